"""Command-line pipeline: ingest -> stats -> score -> import -> evaluate,
plus paired comparison and an all-in-one `run`.

Exit codes: 0 success, 2 validation error, 3 undefined-metric/unstable scope,
4 I/O error. Failures also leave a machine-readable error.json in the output
directory when one is resolvable.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import yaml

from . import __version__
from .corpus import Corpus, corpus_stats, load_corpus, merge_corpora
from .errors import (
    InstabilityError,
    LoadError,
    UndefinedMetricError,
    ValidationError,
)
from .metrics import (
    ALL_METRIC_IDS,
    MetricConfig,
    ScoredPair,
    build_shared_sets,
    canonical_metric_id,
    import_external_scores,
    score_corpus,
)
from .plots import render_curves_svg, write_curves_csv
from .syntax import EditCostTable
from .ranking import (
    BootstrapConfig,
    LabelledScore,
    curve,
    paired_bootstrap_diff,
    scope_filter,
    stratified_report,
)

SCORE_HEADER = ["left_id", "right_id", "dataset", "label", "level",
                "metric_id", "value", "degraded", "direction_note", "note"]
DEFAULT_METRICS = ["CrystalBLEU", "CodeBLEU", "RUBY", "TSED", "FusionTop3"]


@dataclass
class CorpusEntry:
    root: Path
    manifest: Path
    prefix: str = ""


@dataclass
class RunConfig:
    corpora: list[CorpusEntry]
    output_dir: Path
    metrics: list[str] = field(default_factory=lambda: list(DEFAULT_METRICS))
    mode: str = "both"  # raw | preprocessed | both
    language: str = "java"
    strata: list[str] = field(default_factory=lambda: ["pooled", "dataset", "level"])
    curves: str = "all"  # all | pooled | none
    metric_config: MetricConfig = field(default_factory=MetricConfig)
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)
    external_scores: list[dict] = field(default_factory=list)
    workers: Optional[int] = None

    def modes(self) -> list[str]:
        if self.mode == "both":
            return ["raw", "preprocessed"]
        return [self.mode]


def load_config(path: Path | str, overrides: Optional[argparse.Namespace] = None) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise LoadError(f"config file not found: {path}")
    with path.open(encoding="utf-8") as fh:
        if path.suffix == ".json":
            # PyYAML reads bare scientific notation (1e-12) as a string, so
            # JSON documents (e.g. run manifests) get a real JSON parser
            raw = json.load(fh) or {}
        else:
            raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: config must be a mapping")
    if "resolved_config" in raw:  # replaying a run manifest
        raw = raw["resolved_config"]
        if not isinstance(raw, dict):
            raise ValidationError(f"{path}: resolved_config must be a mapping")
    base = path.parent

    corpora = []
    for i, entry in enumerate(raw.get("corpora", [])):
        if not isinstance(entry, dict) or "root" not in entry or "manifest" not in entry:
            raise ValidationError(f"{path}: corpora[{i}] needs 'root' and 'manifest'")
        corpora.append(CorpusEntry(
            root=_resolve(base, entry["root"]),
            manifest=_resolve(base, entry["manifest"]),
            prefix=str(entry.get("prefix", "")),
        ))
    if not corpora:
        raise ValidationError(f"{path}: at least one corpora entry is required")

    metric_cfg_raw = dict(raw.get("metric_config", {}))
    if isinstance(metric_cfg_raw.get("edit_costs"), dict):
        metric_cfg_raw["edit_costs"] = EditCostTable(**metric_cfg_raw["edit_costs"])
    if isinstance(metric_cfg_raw.get("order_weights"), list):
        metric_cfg_raw["order_weights"] = tuple(metric_cfg_raw["order_weights"])
    bootstrap_raw = dict(raw.get("bootstrap", {}))
    try:
        metric_config = MetricConfig(**metric_cfg_raw)
    except TypeError as exc:
        raise ValidationError(f"{path}: bad metric_config: {exc}") from None
    try:
        bootstrap = BootstrapConfig(**bootstrap_raw)
    except TypeError as exc:
        raise ValidationError(f"{path}: bad bootstrap config: {exc}") from None

    cfg = RunConfig(
        corpora=corpora,
        output_dir=_resolve(base, raw.get("output_dir", "out")),
        metrics=[canonical_metric_id(m) for m in raw.get("metrics", DEFAULT_METRICS)],
        mode=str(raw.get("mode", "both")),
        language=str(raw.get("language", "java")),
        strata=list(raw.get("strata", ["pooled", "dataset", "level"])),
        curves=str(raw.get("curves", "all")),
        metric_config=metric_config,
        bootstrap=bootstrap,
        external_scores=list(raw.get("external_scores", [])),
        workers=raw.get("workers"),
    )

    if overrides is not None:
        if getattr(overrides, "mode", None):
            cfg.mode = overrides.mode
        if getattr(overrides, "metrics", None):
            cfg.metrics = [canonical_metric_id(m) for m in overrides.metrics.split(",")]
        if getattr(overrides, "seed", None) is not None:
            cfg.bootstrap = BootstrapConfig(
                resamples=cfg.bootstrap.resamples,
                confidence=cfg.bootstrap.confidence,
                seed=overrides.seed,
            )
        if getattr(overrides, "out", None):
            cfg.output_dir = Path(overrides.out)

    if cfg.mode not in {"raw", "preprocessed", "both"}:
        raise ValidationError(f"{path}: mode must be raw|preprocessed|both, got {cfg.mode!r}")
    if cfg.curves not in {"all", "pooled", "none"}:
        raise ValidationError(f"{path}: curves must be all|pooled|none, got {cfg.curves!r}")
    for entry in cfg.external_scores:
        if "file" not in entry or "metric_id" not in entry:
            raise ValidationError(f"{path}: external_scores entries need 'file' and 'metric_id'")
        entry["file"] = str(_resolve(base, entry["file"]))
    return cfg


def _resolve(base: Path, value) -> Path:
    p = Path(str(value))
    return p if p.is_absolute() else base / p


def resolve_workers(cfg: RunConfig) -> int:
    env = os.environ.get("SIMSCORE_THREADS", "").strip()
    if env:
        try:
            capped = int(env)
        except ValueError:
            raise ValidationError(f"SIMSCORE_THREADS must be an integer, got {env!r}") from None
        if capped < 1:
            raise ValidationError("SIMSCORE_THREADS must be >= 1")
        return min(capped, cfg.workers or capped)
    if cfg.workers:
        return int(cfg.workers)
    return os.cpu_count() or 1


# -- shared pipeline pieces ---------------------------------------------------


def _load_merged(cfg: RunConfig) -> Corpus:
    parts = [load_corpus(e.root, e.manifest, id_prefix=e.prefix, language=cfg.language)
             for e in cfg.corpora]
    return merge_corpora(parts)


def _prepared_corpus(cfg: RunConfig) -> Corpus:
    # stats and the preprocessed scoring mode both need preprocessed_text
    return _load_merged(cfg).with_preprocessed()


def write_scores_csv(path: Path, scores: Sequence[ScoredPair]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCORE_HEADER)
        for s in scores:
            writer.writerow([
                s.left_id, s.right_id, s.dataset,
                "1" if s.label else "0",
                "" if s.level is None else str(s.level),
                s.metric_id, f"{s.value:.9f}",
                "1" if s.degraded else "0",
                "1" if s.direction_note else "0",
                s.note,
            ])


def read_scores_csv(path: Path) -> list[ScoredPair]:
    if not path.is_file():
        raise LoadError(f"scores file not found: {path}")
    out: list[ScoredPair] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in SCORE_HEADER[:7] if c not in (reader.fieldnames or [])]
        if missing:
            raise ValidationError(f"{path}: score file missing column(s) {missing}")
        for row in reader:
            out.append(ScoredPair(
                left_id=row["left_id"], right_id=row["right_id"],
                dataset=row["dataset"], label=row["label"] == "1",
                level=int(row["level"]) if row["level"] else None,
                metric_id=row["metric_id"], value=float(row["value"]),
                degraded=row["degraded"] == "1",
                direction_note=row.get("direction_note") == "1",
                note=row.get("note", ""),
            ))
    return out


def to_labelled(scores: Sequence[ScoredPair]) -> dict[str, list[LabelledScore]]:
    by_metric: dict[str, list[LabelledScore]] = {}
    for s in scores:
        by_metric.setdefault(s.metric_id, []).append(LabelledScore(
            score=s.value, label=s.label, level=s.level,
            dataset=s.dataset, pair=s.pair_key(),
        ))
    return by_metric


def _external_paths(cfg: RunConfig) -> list[Path]:
    return sorted(cfg.output_dir.glob("external_*.csv"))


def _json_dump(obj, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _round(x: Optional[float]):
    return None if x is None else round(x, 9)


# -- subcommands --------------------------------------------------------------


def cmd_ingest(cfg: RunConfig) -> dict:
    corpus = _load_merged(cfg)
    summary = {
        "fragments": len(corpus.fragments),
        "datasets": {},
        "pooled": {**corpus.pair_counts(), "levels": {str(k): v for k, v in corpus.level_counts().items()}},
    }
    for tag in corpus.datasets():
        summary["datasets"][tag] = {
            **corpus.pair_counts(tag),
            "levels": {str(k): v for k, v in corpus.level_counts(tag).items()},
            "fragments": len(corpus.fragments_for_dataset(tag)),
        }
    _json_dump(summary, cfg.output_dir / "corpus_summary.json")
    print(f"ingested {len(corpus.pairs)} pairs / {len(corpus.fragments)} fragments "
          f"from {len(cfg.corpora)} corpora")
    for tag, info in summary["datasets"].items():
        print(f"  {tag}: {info['total']} pairs "
              f"({info['plagiarised']} plagiarised, {info['non_plagiarised']} non-plagiarised)")
    return summary


def cmd_stats(cfg: RunConfig) -> Path:
    corpus = _prepared_corpus(cfg)
    rows = corpus_stats(corpus)
    path = cfg.output_dir / "corpus_stats.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "n_fragments", "avg_tokens", "max_tokens", "n_over_512",
                         "avg_tokens_pre", "max_tokens_pre", "n_over_512_pre", "reduction_pct"])
        for r in rows:
            writer.writerow([r.dataset, r.n_fragments, f"{r.avg_tokens:.4f}", r.max_tokens,
                             r.n_over_512, f"{r.avg_tokens_pre:.4f}", r.max_tokens_pre,
                             r.n_over_512_pre, f"{r.reduction_pct:.4f}"])
    for r in rows:
        print(f"{r.dataset}: avg {r.avg_tokens:.1f} -> {r.avg_tokens_pre:.1f} tokens "
              f"(-{r.reduction_pct:.2f}%), max {r.max_tokens}, >512: {r.n_over_512}")
    return path


def cmd_score(cfg: RunConfig) -> list[Path]:
    corpus = _prepared_corpus(cfg)
    workers = resolve_workers(cfg)
    written = []
    for mode in cfg.modes():
        use_pre = mode == "preprocessed"
        shared = build_shared_sets(corpus, cfg.metric_config, use_pre)
        scores = score_corpus(corpus, cfg.metrics, cfg.metric_config,
                              use_preprocessed=use_pre, shared_sets=shared,
                              workers=workers)
        path = cfg.output_dir / f"scores_{mode}.csv"
        write_scores_csv(path, scores)
        degraded = sum(1 for s in scores if s.degraded)
        print(f"scored {len(corpus.pairs)} pairs x {len(cfg.metrics)} metrics "
              f"({mode}): {len(scores)} rows, {degraded} degraded -> {path}")
        written.append(path)
    return written


def cmd_import(cfg: RunConfig, file: Path | str, metric_id: str,
               max_scale: Optional[float] = None) -> Path:
    if not metric_id.strip():
        raise ValidationError("import: metric-id must be nonempty")
    if metric_id.strip().lower() in {m.lower() for m in ALL_METRIC_IDS}:
        raise ValidationError(
            f"import: metric-id {metric_id!r} shadows a built-in metric; pick another name"
        )
    corpus = _load_merged(cfg)
    result = import_external_scores(file, metric_id, corpus, max_scale=max_scale)
    path = cfg.output_dir / f"external_{metric_id}.csv"
    write_scores_csv(path, result.scores)
    if result.rejected:
        _json_dump({"file": str(file), "metric_id": metric_id, "rejected": result.rejected},
                   cfg.output_dir / f"external_{metric_id}_rejected.json")
        print(f"warning: {len(result.rejected)} rows rejected "
              f"(see external_{metric_id}_rejected.json)", file=sys.stderr)
    if result.warning:
        print(f"warning: {result.warning}", file=sys.stderr)
    print(f"imported {len(result.scores)} external scores as {metric_id!r} -> {path}")
    return path


def cmd_evaluate(cfg: RunConfig) -> list[Path]:
    external: list[ScoredPair] = []
    for path in _external_paths(cfg):
        external.extend(read_scores_csv(path))
    written = []
    for mode in cfg.modes():
        scores_path = cfg.output_dir / f"scores_{mode}.csv"
        scores = read_scores_csv(scores_path) + external
        by_metric = to_labelled(scores)
        reports = stratified_report(by_metric, cfg.strata, cfg.bootstrap)

        degraded_counts: dict[str, int] = {}
        for s in scores:
            if s.degraded:
                degraded_counts[s.metric_id] = degraded_counts.get(s.metric_id, 0) + 1

        doc = {
            "mode": mode,
            "bootstrap": {
                "resamples": cfg.bootstrap.resamples,
                "confidence": cfg.bootstrap.confidence,
                "seed": cfg.bootstrap.seed,
                "interval": "percentile",
            },
            "level_negatives": "all-in-scope",
            "degraded_counts": degraded_counts,
            "scopes": {},
        }
        for report in reports:
            cell_doc = {}
            for metric, cell in report.cells.items():
                cell_doc[metric] = {
                    "auroc": _round(cell.auroc),
                    "ap": _round(cell.ap),
                    "ci_auroc": [_round(cell.ci_auroc[0]), _round(cell.ci_auroc[1])] if cell.ci_auroc else None,
                    "ci_ap": [_round(cell.ci_ap[0]), _round(cell.ci_ap[1])] if cell.ci_ap else None,
                    "n": cell.n, "n_pos": cell.n_pos, "n_neg": cell.n_neg,
                    "undefined": cell.undefined,
                }
            doc["scopes"][report.scope] = cell_doc

        json_path = cfg.output_dir / f"report_{mode}.json"
        _json_dump(doc, json_path)
        csv_path = cfg.output_dir / f"report_{mode}.csv"
        with csv_path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["scope", "metric", "stat", "point", "lo", "hi"])
            for report in reports:
                for metric in sorted(report.cells):
                    cell = report.cells[metric]
                    if cell.undefined:
                        continue
                    writer.writerow([report.scope, metric, "auroc", f"{cell.auroc:.9f}",
                                     f"{cell.ci_auroc[0]:.9f}", f"{cell.ci_auroc[1]:.9f}"])
                    writer.writerow([report.scope, metric, "ap", f"{cell.ap:.9f}",
                                     f"{cell.ci_ap[0]:.9f}", f"{cell.ci_ap[1]:.9f}"])
        written.extend([json_path, csv_path])

        if cfg.curves != "none":
            written.extend(_emit_curves(cfg, mode, by_metric, reports))
        print(f"evaluated {mode}: {len(reports)} scopes -> {json_path}")
    return written


def _emit_curves(cfg: RunConfig, mode: str, by_metric, reports) -> list[Path]:
    written = []
    scopes = [r.scope for r in reports]
    if cfg.curves == "pooled":
        scopes = [s for s in scopes if s == "pooled"]
    cells_by_scope = {r.scope: r.cells for r in reports}
    for scope in scopes:
        for kind in ("roc", "pr"):
            curves = {}
            stats = {}
            for metric in sorted(by_metric):
                cell = cells_by_scope[scope].get(metric)
                if cell is None or cell.undefined:
                    continue
                rows = scope_filter(by_metric[metric], scope)
                curves[metric] = curve(rows, kind, scope)
                stats[metric] = cell.auroc if kind == "roc" else cell.ap
            if not curves:
                continue
            slug = scope.replace(":", "-")
            svg = cfg.output_dir / "curves" / f"{kind}_{mode}_{slug}.svg"
            csv_path = cfg.output_dir / "curves" / f"{kind}_{mode}_{slug}.csv"
            title = f"{'ROC' if kind == 'roc' else 'Precision-Recall'} - {scope} ({mode})"
            render_curves_svg(curves, kind, title, svg, stats)
            write_curves_csv(curves, csv_path)
            written.extend([svg, csv_path])
    return written


def cmd_run(cfg: RunConfig, config_path: Path) -> None:
    cmd_ingest(cfg)
    cmd_stats(cfg)
    cmd_score(cfg)
    for entry in cfg.external_scores:
        cmd_import(cfg, entry["file"], entry["metric_id"],
                   max_scale=entry.get("max_scale"))
    cmd_evaluate(cfg)
    manifest = {
        "simscore_version": __version__,
        "config_file": str(config_path),
        "resolved_config": _config_doc(cfg),
        "input_hashes": {
            str(e.manifest): _sha256(e.manifest) for e in cfg.corpora
        },
    }
    _json_dump(manifest, cfg.output_dir / "run_manifest.json")
    print(f"run complete -> {cfg.output_dir}")


def _config_doc(cfg: RunConfig) -> dict:
    mc = cfg.metric_config
    return {
        "corpora": [{"root": str(e.root), "manifest": str(e.manifest), "prefix": e.prefix}
                    for e in cfg.corpora],
        "output_dir": str(cfg.output_dir),
        "metrics": list(cfg.metrics),
        "mode": cfg.mode,
        "language": cfg.language,
        "strata": list(cfg.strata),
        "curves": cfg.curves,
        "metric_config": {
            "max_order": mc.max_order,
            "order_weights": list(mc.order_weights) if mc.order_weights else None,
            "alpha": mc.alpha, "beta": mc.beta, "gamma": mc.gamma, "delta": mc.delta,
            "epsilon": mc.epsilon, "k_shared": mc.k_shared,
            "keyword_weight": mc.keyword_weight, "symmetrization": mc.symmetrization,
            "subtree_depth": mc.subtree_depth, "node_cap": mc.node_cap,
            "comment_tokens": mc.comment_tokens,
            "edit_costs": {"insert": mc.edit_costs.insert,
                           "delete": mc.edit_costs.delete,
                           "rename": mc.edit_costs.rename},
        },
        "bootstrap": {
            "resamples": cfg.bootstrap.resamples,
            "confidence": cfg.bootstrap.confidence,
            "seed": cfg.bootstrap.seed,
        },
        "external_scores": [dict(e) for e in cfg.external_scores],
    }


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def cmd_compare(cfg: RunConfig, args: argparse.Namespace) -> dict:
    mode = args.mode or ("raw" if cfg.mode == "both" else cfg.mode)
    dir_a = Path(args.dir_a) if args.dir_a else cfg.output_dir
    dir_b = Path(args.dir_b) if args.dir_b else dir_a
    table_a = _score_table(dir_a, mode)
    table_b = _score_table(dir_b, mode)
    metric_a = args.metric_a
    metric_b = args.metric_b
    if metric_a not in table_a:
        raise ValidationError(f"metric {metric_a!r} not found in {dir_a} ({mode})")
    if metric_b not in table_b:
        raise ValidationError(f"metric {metric_b!r} not found in {dir_b} ({mode})")
    rows_a = scope_filter(table_a[metric_a], args.scope)
    rows_b = scope_filter(table_b[metric_b], args.scope)
    doc = {"mode": mode, "scope": args.scope, "metric_a": metric_a, "metric_b": metric_b,
           "bootstrap": {"resamples": cfg.bootstrap.resamples,
                         "confidence": cfg.bootstrap.confidence,
                         "seed": cfg.bootstrap.seed},
           "stats": {}}
    for stat in ("auroc", "ap"):
        diff = paired_bootstrap_diff(rows_a, rows_b, stat, cfg.bootstrap, scope=args.scope)
        doc["stats"][stat] = {
            "delta": _round(diff.delta), "lo": _round(diff.lo), "hi": _round(diff.hi),
            "significant": diff.significant, "n": diff.n,
        }
        marker = "significant" if diff.significant else "not significant"
        print(f"{stat}: delta={diff.delta:+.4f} CI [{diff.lo:+.4f}, {diff.hi:+.4f}] ({marker})")
    out = cfg.output_dir / f"compare_{metric_a}_vs_{metric_b}_{mode}_{args.scope.replace(':', '-')}.json"
    _json_dump(doc, out)
    return doc


def _score_table(outdir: Path, mode: str) -> dict[str, list[LabelledScore]]:
    scores: list[ScoredPair] = []
    scores_path = outdir / f"scores_{mode}.csv"
    if scores_path.is_file():
        scores.extend(read_scores_csv(scores_path))
    for path in sorted(outdir.glob("external_*.csv")):
        scores.extend(read_scores_csv(path))
    if not scores:
        raise LoadError(f"no score files found in {outdir} for mode {mode!r}")
    return to_labelled(scores)


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simscore",
        description="Score code-fragment pairs with similarity metrics and "
                    "evaluate them as plagiarism detectors.",
    )
    parser.add_argument("--version", action="version", version=f"simscore {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="YAML config file")
        p.add_argument("--mode", choices=["raw", "preprocessed", "both"])
        p.add_argument("--metrics", help="comma-separated metric ids "
                                         f"(known: {', '.join(ALL_METRIC_IDS)})")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory override")

    for name, help_text in [
        ("ingest", "load and validate the corpus; write corpus_summary.json"),
        ("stats", "emit corpus token statistics CSV"),
        ("score", "compute metric scores; write scores_<mode>.csv"),
        ("evaluate", "rank-evaluate written scores; write reports and curves"),
        ("run", "full pipeline: ingest, stats, score, import, evaluate"),
    ]:
        add_common(sub.add_parser(name, help=help_text))

    p_import = sub.add_parser("import", help="ingest an external score file")
    add_common(p_import)
    p_import.add_argument("--file", required=True)
    p_import.add_argument("--metric-id", required=True)
    p_import.add_argument("--max-scale", type=float, default=None)

    p_cmp = sub.add_parser("compare", help="paired bootstrap difference between two metrics")
    add_common(p_cmp)
    p_cmp.add_argument("--metric-a", required=True)
    p_cmp.add_argument("--metric-b", required=True)
    p_cmp.add_argument("--scope", default="pooled")
    p_cmp.add_argument("--dir-a", help="run directory for metric A (default: config output_dir)")
    p_cmp.add_argument("--dir-b", help="run directory for metric B (default: dir-a)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    outdir: Optional[Path] = None
    try:
        cfg = load_config(args.config, overrides=args)
        outdir = cfg.output_dir
        if args.command == "ingest":
            cmd_ingest(cfg)
        elif args.command == "stats":
            cmd_stats(cfg)
        elif args.command == "score":
            cmd_score(cfg)
        elif args.command == "import":
            cmd_import(cfg, args.file, args.metric_id, max_scale=args.max_scale)
        elif args.command == "evaluate":
            cmd_evaluate(cfg)
        elif args.command == "run":
            cmd_run(cfg, Path(args.config))
        elif args.command == "compare":
            cmd_compare(cfg, args)
        return 0
    except (UndefinedMetricError, InstabilityError) as exc:
        _report_error(outdir, exc)
        return 3
    except ValidationError as exc:
        _report_error(outdir, exc)
        return 2
    except (LoadError, OSError) as exc:
        _report_error(outdir, exc)
        return 4


def _report_error(outdir: Optional[Path], exc: Exception) -> None:
    print(f"error: {exc}", file=sys.stderr)
    if outdir is not None:
        try:
            _json_dump({"error_type": type(exc).__name__, "message": str(exc)},
                       outdir / "error.json")
        except OSError:
            pass


if __name__ == "__main__":
    sys.exit(main())
