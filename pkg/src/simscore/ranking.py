"""Threshold-free ranking evaluation: ROC/PR curves, AUROC, AP, bootstrap
confidence intervals, paired bootstrap differences, and pooled / per-dataset /
per-level stratification.

AUROC is the Mann-Whitney rank statistic (ties half-credited); AP is the
step-interpolated sum over distinct-score thresholds. Bootstrap resampling is
with replacement at the labelled-pair level, realized as multinomial count
vectors so thousands of resamples evaluate as batched vector operations.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InstabilityError, UndefinedMetricError, ValidationError

_MAX_REDRAWS = 100
_BATCH_ELEMENTS = 4_000_000  # chunk resample batches to ~32 MB of counts


@dataclass(frozen=True)
class LabelledScore:
    score: float
    label: bool
    level: Optional[int]
    dataset: str
    pair: tuple[str, str]


@dataclass(frozen=True)
class BootstrapConfig:
    resamples: int = 10000
    confidence: float = 0.95
    seed: int = 12345

    def __post_init__(self):
        if self.resamples < 1:
            raise ValidationError(f"resamples must be >= 1, got {self.resamples}")
        if not 0.0 < self.confidence < 1.0:
            raise ValidationError(f"confidence must lie in (0,1), got {self.confidence}")


@dataclass
class Curve:
    kind: str  # "roc" | "pr"
    points: list[tuple[float, float]]  # roc: (FPR, TPR); pr: (Recall, Precision)
    thresholds: list[float]  # aligned with points[1:] (first point is the tau=+inf anchor)
    counts: list[tuple[int, int, int, int]]  # (TP, FP, TN, FN) per point


@dataclass
class MetricCell:
    auroc: Optional[float] = None
    ap: Optional[float] = None
    ci_auroc: Optional[tuple[float, float]] = None
    ci_ap: Optional[tuple[float, float]] = None
    n: int = 0
    n_pos: int = 0
    n_neg: int = 0
    undefined: Optional[str] = None


@dataclass
class RankingReport:
    scope: str
    cells: dict[str, MetricCell] = field(default_factory=dict)


@dataclass
class PairedDiff:
    delta: float
    lo: float
    hi: float
    significant: bool
    n: int


def _arrays(scores: Sequence[LabelledScore]) -> tuple[np.ndarray, np.ndarray]:
    s = np.array([x.score for x in scores], dtype=np.float64)
    y = np.array([1 if x.label else 0 for x in scores], dtype=np.int64)
    return s, y


def _require_both_classes(y: np.ndarray, what: str, scope: str) -> None:
    if y.size == 0 or int(y.sum()) == 0 or int(y.sum()) == y.size:
        raise UndefinedMetricError(f"{what} undefined on scope {scope!r}: needs both classes")


# -- grouped machinery (shared by point statistics and bootstrap) ------------


def _group_starts(sorted_scores: np.ndarray) -> np.ndarray:
    mask = np.empty(sorted_scores.size, dtype=bool)
    mask[0] = True
    mask[1:] = sorted_scores[1:] != sorted_scores[:-1]
    return np.flatnonzero(mask)


def _auroc_from_counts(cp: np.ndarray, cn: np.ndarray, starts: np.ndarray) -> np.ndarray:
    """AUROC per batch row from per-item pos/neg counts sorted ascending by score."""
    gp = np.add.reduceat(cp, starts, axis=1)
    gn = np.add.reduceat(cn, starts, axis=1)
    cum_below = np.cumsum(gn, axis=1) - gn
    wins = ((cum_below + 0.5 * gn) * gp).sum(axis=1)
    npos = cp.sum(axis=1)
    nneg = cn.sum(axis=1)
    denom = npos * nneg
    return np.divide(wins, denom, out=np.full(wins.shape, np.nan), where=denom > 0)


def _ap_from_counts(cp: np.ndarray, cn: np.ndarray, starts: np.ndarray) -> np.ndarray:
    """AP per batch row; thresholds descend over distinct scores, ties grouped."""
    gp = np.add.reduceat(cp, starts, axis=1)[:, ::-1]
    gn = np.add.reduceat(cn, starts, axis=1)[:, ::-1]
    tp = np.cumsum(gp, axis=1)
    fp = np.cumsum(gn, axis=1)
    pred = tp + fp
    prec = np.divide(tp, pred, out=np.zeros(tp.shape, dtype=np.float64), where=pred > 0)
    npos = cp.sum(axis=1, keepdims=True).astype(np.float64)
    rec = np.divide(tp, npos, out=np.zeros(tp.shape, dtype=np.float64), where=npos > 0)
    delta_r = np.diff(rec, axis=1, prepend=0.0)
    return (delta_r * prec).sum(axis=1)


def _sorted_counts(s: np.ndarray, y: np.ndarray):
    order = np.argsort(s, kind="mergesort")
    starts = _group_starts(s[order])
    ys = y[order]
    return order, starts, ys


def auroc(scores: Sequence[LabelledScore], scope: str = "scores") -> float:
    """P(score_pos > score_neg) + 0.5 P(tie), computed exactly by sorting."""
    s, y = _arrays(scores)
    _require_both_classes(y, "auroc", scope)
    order, starts, ys = _sorted_counts(s, y)
    cp = (ys == 1).astype(np.float64)[None, :]
    cn = (ys == 0).astype(np.float64)[None, :]
    return float(_auroc_from_counts(cp, cn, starts)[0])


def average_precision(scores: Sequence[LabelledScore], scope: str = "scores") -> float:
    """AP = sum (R_n - R_{n-1}) P_n over descending distinct-score thresholds."""
    s, y = _arrays(scores)
    if y.size == 0 or int(y.sum()) == 0:
        raise UndefinedMetricError(f"average_precision undefined on scope {scope!r}: no positives")
    order, starts, ys = _sorted_counts(s, y)
    cp = (ys == 1).astype(np.float64)[None, :]
    cn = (ys == 0).astype(np.float64)[None, :]
    return float(_ap_from_counts(cp, cn, starts)[0])


def curve(scores: Sequence[LabelledScore], kind: str, scope: str = "scores") -> Curve:
    """One point per distinct threshold plus the tau=+inf anchor; confusion
    counts retained. Trapezoidal area under the roc curve equals auroc."""
    if kind not in {"roc", "pr"}:
        raise ValidationError(f"unknown curve kind {kind!r}")
    s, y = _arrays(scores)
    if kind == "roc":
        _require_both_classes(y, "roc curve", scope)
    elif y.size == 0 or int(y.sum()) == 0:
        raise UndefinedMetricError(f"pr curve undefined on scope {scope!r}: no positives")
    order = np.argsort(-s, kind="mergesort")  # descending
    sd = s[order]
    yd = y[order]
    starts = _group_starts(sd)
    ends = np.append(starts[1:], sd.size)
    tp_cum = np.cumsum(yd)[ends - 1]
    pred_cum = ends
    fp_cum = pred_cum - tp_cum
    npos = int(y.sum())
    nneg = int(y.size - npos)
    thresholds = [float(sd[i]) for i in starts]
    points: list[tuple[float, float]] = []
    counts: list[tuple[int, int, int, int]] = [(0, 0, nneg, npos)]
    if kind == "roc":
        points.append((0.0, 0.0))
        for tp, fp in zip(tp_cum, fp_cum):
            points.append((fp / nneg, tp / npos))
            counts.append((int(tp), int(fp), int(nneg - fp), int(npos - tp)))
    else:
        points.append((0.0, 1.0))
        for tp, fp in zip(tp_cum, fp_cum):
            points.append((tp / npos, tp / (tp + fp)))
            counts.append((int(tp), int(fp), int(nneg - fp), int(npos - tp)))
    return Curve(kind=kind, points=points, thresholds=thresholds, counts=counts)


# -- bootstrap ----------------------------------------------------------------


def _resample_batches(rng: np.random.Generator, n: int, y: np.ndarray,
                      resamples: int, scope: str):
    """Yield (B, n) count matrices of pair-level resamples (index draws with
    replacement, tallied per row). Degenerate (single-class) rows are redrawn
    up to 100 times each and every degenerate draw is counted. Raises
    InstabilityError when degenerate draws exceed half the resamples."""
    pos_mask = y == 1
    degenerate_draws = 0
    produced = 0
    batch_rows = max(1, min(resamples, _BATCH_ELEMENTS // max(n, 1)))
    while produced < resamples:
        b = min(batch_rows, resamples - produced)
        idx = rng.integers(0, n, size=(b, n))
        offsets = np.arange(b, dtype=np.int64)[:, None] * n
        counts = np.bincount((idx + offsets).ravel(), minlength=b * n).reshape(b, n)
        pos_totals = counts[:, pos_mask].sum(axis=1)
        neg_totals = counts[:, ~pos_mask].sum(axis=1)
        bad = np.flatnonzero((pos_totals == 0) | (neg_totals == 0))
        for row in bad:
            for attempt in range(_MAX_REDRAWS):
                degenerate_draws += 1
                redraw = np.bincount(rng.integers(0, n, size=n), minlength=n)
                p = int(redraw[pos_mask].sum())
                if 0 < p < n:
                    counts[row] = redraw
                    break
            else:
                raise InstabilityError(
                    f"scope {scope!r}: resampling produced single-class samples "
                    f"{_MAX_REDRAWS} times in a row"
                )
        if degenerate_draws > 0.5 * resamples:
            raise InstabilityError(
                f"scope {scope!r}: more than half of bootstrap resamples were degenerate "
                f"({degenerate_draws} degenerate draws for {resamples} resamples)"
            )
        produced += b
        yield counts


def _bootstrap_distributions(s: np.ndarray, y: np.ndarray, cfg: BootstrapConfig,
                             seed: int, scope: str,
                             want_auroc: bool, want_ap: bool):
    rng = np.random.default_rng(seed)
    order, starts, ys = _sorted_counts(s, y)
    pos_sorted = ys == 1
    auroc_vals: list[np.ndarray] = []
    ap_vals: list[np.ndarray] = []
    for counts in _resample_batches(rng, s.size, y, cfg.resamples, scope):
        cs = counts[:, order].astype(np.float64)
        cp = cs * pos_sorted
        cn = cs * ~pos_sorted
        if want_auroc:
            auroc_vals.append(_auroc_from_counts(cp, cn, starts))
        if want_ap:
            ap_vals.append(_ap_from_counts(cp, cn, starts))
    out_auroc = np.concatenate(auroc_vals) if want_auroc else None
    out_ap = np.concatenate(ap_vals) if want_ap else None
    return out_auroc, out_ap


def _percentile_interval(vals: np.ndarray, confidence: float) -> tuple[float, float]:
    alpha = (1.0 - confidence) / 2.0
    lo, hi = np.percentile(vals, [100.0 * alpha, 100.0 * (1.0 - alpha)])
    return float(lo), float(hi)


def bootstrap_ci(statistic: str, scores: Sequence[LabelledScore],
                 cfg: BootstrapConfig, scope: str = "scores") -> tuple[float, float, float]:
    """Percentile interval for 'auroc' or 'ap' over pair-level resamples.
    Returns (point, lo, hi); deterministic given cfg.seed."""
    if statistic not in {"auroc", "ap"}:
        raise ValidationError(f"unknown statistic {statistic!r}")
    s, y = _arrays(scores)
    if statistic == "auroc":
        point = auroc(scores, scope)
    else:
        point = average_precision(scores, scope)
        _require_both_classes(y, "bootstrap resampling", scope)
    dist_auroc, dist_ap = _bootstrap_distributions(
        s, y, cfg, cfg.seed, scope,
        want_auroc=statistic == "auroc", want_ap=statistic == "ap")
    vals = dist_auroc if statistic == "auroc" else dist_ap
    lo, hi = _percentile_interval(vals, cfg.confidence)
    return point, lo, hi


def paired_bootstrap_diff(a: Sequence[LabelledScore], b: Sequence[LabelledScore],
                          statistic: str, cfg: BootstrapConfig,
                          scope: str = "scores") -> PairedDiff:
    """Resample pair indices once per iteration, evaluate the statistic on
    both score columns, and summarize the difference distribution.
    significant <=> the percentile CI excludes 0."""
    if statistic not in {"auroc", "ap"}:
        raise ValidationError(f"unknown statistic {statistic!r}")
    a_by_pair = {x.pair: x for x in a}
    b_by_pair = {x.pair: x for x in b}
    only_a = sorted(set(a_by_pair) - set(b_by_pair))
    only_b = sorted(set(b_by_pair) - set(a_by_pair))
    if only_a or only_b:
        raise ValidationError(
            "paired comparison requires identical pair sets; "
            f"missing from b: {only_a[:5]}{'...' if len(only_a) > 5 else ''}; "
            f"missing from a: {only_b[:5]}{'...' if len(only_b) > 5 else ''}"
        )
    keys = sorted(a_by_pair)
    sa = np.array([a_by_pair[k].score for k in keys], dtype=np.float64)
    sb = np.array([b_by_pair[k].score for k in keys], dtype=np.float64)
    ya = np.array([1 if a_by_pair[k].label else 0 for k in keys], dtype=np.int64)
    yb = np.array([1 if b_by_pair[k].label else 0 for k in keys], dtype=np.int64)
    if not np.array_equal(ya, yb):
        raise ValidationError("paired comparison: labels disagree between score sets")
    stat = auroc if statistic == "auroc" else average_precision
    point = stat([a_by_pair[k] for k in keys], scope) - stat([b_by_pair[k] for k in keys], scope)

    rng = np.random.default_rng(cfg.seed)
    order_a, starts_a, ys_a = _sorted_counts(sa, ya)
    order_b, starts_b, ys_b = _sorted_counts(sb, yb)
    deltas: list[np.ndarray] = []
    for counts in _resample_batches(rng, sa.size, ya, cfg.resamples, scope):
        va = _column_stat(counts, order_a, starts_a, ys_a, statistic)
        vb = _column_stat(counts, order_b, starts_b, ys_b, statistic)
        deltas.append(va - vb)
    dist = np.concatenate(deltas)
    lo, hi = _percentile_interval(dist, cfg.confidence)
    return PairedDiff(delta=point, lo=lo, hi=hi, significant=lo > 0 or hi < 0, n=sa.size)


def _column_stat(counts: np.ndarray, order: np.ndarray, starts: np.ndarray,
                 ys: np.ndarray, statistic: str) -> np.ndarray:
    cs = counts[:, order].astype(np.float64)
    pos = ys == 1
    cp = cs * pos
    cn = cs * ~pos
    if statistic == "auroc":
        return _auroc_from_counts(cp, cn, starts)
    return _ap_from_counts(cp, cn, starts)


# -- stratification -----------------------------------------------------------


def scope_filter(scores: Sequence[LabelledScore], scope: str) -> list[LabelledScore]:
    """pooled | dataset:<tag> | level:<k>. Level scopes keep level-k positives
    plus every negative in scope (negatives carry no level)."""
    if scope == "pooled":
        return list(scores)
    if scope.startswith("dataset:"):
        tag = scope.split(":", 1)[1]
        return [x for x in scores if x.dataset == tag]
    if scope.startswith("level:"):
        k = int(scope.split(":", 1)[1])
        return [x for x in scores if (x.label and x.level == k) or not x.label]
    raise ValidationError(f"unknown scope {scope!r}")


def scopes_for(strata: Sequence[str], datasets: Sequence[str]) -> list[str]:
    out: list[str] = []
    for stratum in strata:
        if stratum == "pooled":
            out.append("pooled")
        elif stratum == "dataset":
            out.extend(f"dataset:{tag}" for tag in sorted(datasets))
        elif stratum == "level":
            out.extend(f"level:{k}" for k in range(1, 7))
        else:
            raise ValidationError(f"unknown stratum {stratum!r} (pooled|dataset|level)")
    return out


def _cell_seed(base: int, scope: str, metric: str) -> int:
    return (base + zlib.crc32(f"{scope}|{metric}".encode())) % (2 ** 63)


def stratified_report(scores_by_metric: dict[str, Sequence[LabelledScore]],
                      strata: Sequence[str], cfg: BootstrapConfig) -> list[RankingReport]:
    """One RankingReport per scope; each cell carries AUROC/AP points and
    bootstrap CIs, or an `undefined` reason for empty/single-class strata."""
    datasets = sorted({x.dataset for xs in scores_by_metric.values() for x in xs})
    reports = []
    for scope in scopes_for(strata, datasets):
        report = RankingReport(scope=scope)
        for metric in sorted(scores_by_metric):
            rows = scope_filter(scores_by_metric[metric], scope)
            n_pos = sum(1 for x in rows if x.label)
            n_neg = len(rows) - n_pos
            cell = MetricCell(n=len(rows), n_pos=n_pos, n_neg=n_neg)
            if n_pos == 0 or n_neg == 0:
                cell.undefined = "needs at least one positive and one negative"
                report.cells[metric] = cell
                continue
            s, y = _arrays(rows)
            cell.auroc = auroc(rows, scope)
            cell.ap = average_precision(rows, scope)
            try:
                dist_auroc, dist_ap = _bootstrap_distributions(
                    s, y, cfg, _cell_seed(cfg.seed, scope, metric), f"{scope}/{metric}",
                    want_auroc=True, want_ap=True)
            except InstabilityError as exc:
                # tiny strata: point estimates stand, intervals do not
                cell.undefined = str(exc)
                report.cells[metric] = cell
                continue
            cell.ci_auroc = _percentile_interval(dist_auroc, cfg.confidence)
            cell.ci_ap = _percentile_interval(dist_ap, cfg.confidence)
            report.cells[metric] = cell
        reports.append(report)
    return reports
