"""Similarity metrics on fragment pairs: BLEU, CodeBLEU (+components),
CrystalBLEU, RUBY, TSED, fusion, and external-score ingestion.

All metrics return values in [0, 1]. Pairs are unordered, so directional
metrics are computed both ways and folded by the configured symmetrization
(default: max). Values produced through fallback paths (parse failure, node
cap, empty residue) carry a degraded flag.
"""

from __future__ import annotations

import csv
import math
from collections import Counter, OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from ._dp import levenshtein
from .corpus import Corpus, PairRecord, TokenStream, ngram_multiset, tokenize
from .errors import LoadError, ParseFailure, ValidationError
from .lexer import KIND_KEYWORD
from .syntax import (
    DEFAULT_NODE_CAP,
    DataFlowGraph,
    EditCostTable,
    SyntaxTree,
    dataflow_graph,
    parse,
    subtree_multiset,
    tree_edit_distance,
    truncate_tree,
)

METRIC_BLEU = "BLEU"
METRIC_CODEBLEU = "CodeBLEU"
METRIC_CB_NGRAM = "CB-Ngram"
METRIC_CB_WNGRAM = "CB-Wngram"
METRIC_CB_SYNTAX = "CB-Syntax"
METRIC_CB_DATAFLOW = "CB-Dataflow"
METRIC_CRYSTALBLEU = "CrystalBLEU"
METRIC_RUBY = "RUBY"
METRIC_TSED = "TSED"
METRIC_FUSION = "FusionTop3"

ALL_METRIC_IDS = (
    METRIC_BLEU, METRIC_CODEBLEU, METRIC_CB_NGRAM, METRIC_CB_WNGRAM,
    METRIC_CB_SYNTAX, METRIC_CB_DATAFLOW, METRIC_CRYSTALBLEU, METRIC_RUBY,
    METRIC_TSED, METRIC_FUSION,
)
_CODEBLEU_BUNDLE = (METRIC_CODEBLEU, METRIC_CB_NGRAM, METRIC_CB_WNGRAM,
                    METRIC_CB_SYNTAX, METRIC_CB_DATAFLOW)
FUSION_CONSTITUENTS = (METRIC_CRYSTALBLEU, METRIC_CODEBLEU, METRIC_RUBY)
_CANONICAL = {m.lower(): m for m in ALL_METRIC_IDS}

_ROUND_DIGITS = 9


def canonical_metric_id(name: str) -> str:
    got = _CANONICAL.get(name.strip().lower())
    if got is None:
        raise ValidationError(
            f"unknown metric {name!r}; known metrics: {', '.join(ALL_METRIC_IDS)}"
        )
    return got


@dataclass(frozen=True)
class MetricConfig:
    max_order: int = 4
    order_weights: Optional[tuple[float, ...]] = None  # default: uniform 1/N
    alpha: float = 0.25
    beta: float = 0.25
    gamma: float = 0.25
    delta: float = 0.25
    epsilon: float = 1e-12
    k_shared: int = 500
    keyword_weight: float = 5.0
    symmetrization: str = "max"  # max | mean | left
    subtree_depth: int = 3
    node_cap: int = DEFAULT_NODE_CAP
    edit_costs: EditCostTable = field(default_factory=EditCostTable)
    # raw-mode streams carry comment-content tokens (preprocessing's measured
    # effect on the n-gram metrics comes from removing them)
    comment_tokens: bool = True

    def __post_init__(self):
        if self.max_order < 1:
            raise ValidationError(f"max_order must be >= 1, got {self.max_order}")
        if abs(self.alpha + self.beta + self.gamma + self.delta - 1.0) > 1e-9:
            raise ValidationError("CodeBLEU weights alpha+beta+gamma+delta must sum to 1")
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")
        if self.k_shared < 0:
            raise ValidationError("k_shared must be >= 0")
        if self.symmetrization not in {"max", "mean", "left"}:
            raise ValidationError(f"unknown symmetrization {self.symmetrization!r}")
        if self.order_weights is not None and len(self.order_weights) != self.max_order:
            raise ValidationError("order_weights length must equal max_order")

    def weights(self) -> tuple[float, ...]:
        if self.order_weights is not None:
            return tuple(self.order_weights)
        return tuple(1.0 / self.max_order for _ in range(self.max_order))


@dataclass(frozen=True)
class TriviallySharedSet:
    """Per-order sets of the corpus's most frequent n-grams."""

    per_order: dict[int, frozenset]

    def for_order(self, n: int) -> frozenset:
        return self.per_order.get(n, frozenset())


EMPTY_SHARED = TriviallySharedSet(per_order={})


@dataclass(frozen=True)
class ScoredPair:
    left_id: str
    right_id: str
    dataset: str
    label: bool
    level: Optional[int]
    metric_id: str
    value: float
    degraded: bool = False
    direction_note: bool = False  # symmetrization changed the raw directional value
    note: str = ""

    def pair_key(self) -> tuple[str, str]:
        return (self.left_id, self.right_id) if self.left_id <= self.right_id else (self.right_id, self.left_id)


# -- n-gram machinery ------------------------------------------------------


def clipped_precision(c: TokenStream, r: TokenStream, n: int) -> float:
    """sum(min(count_C, count_R)) / sum(count_C) over candidate n-grams;
    0 when the candidate has no n-grams of this order."""
    cand = ngram_multiset(c, n)
    ref = ngram_multiset(r, n)
    return _clipped_multiset_precision(cand, ref)


def _clipped_multiset_precision(cand: Counter, ref: Counter) -> float:
    total = sum(cand.values())
    if total == 0:
        return 0.0
    matched = sum(min(count, ref.get(gram, 0)) for gram, count in cand.items())
    return matched / total


def _geometric_ngram_score(cand_orders: Sequence[Counter], ref_orders: Sequence[Counter],
                           len_c: int, len_r: int, cfg: MetricConfig,
                           gram_weight=None) -> Optional[float]:
    """Geometric mean of (optionally weighted) clipped precisions x brevity
    penalty. Orders with an empty candidate multiset are skipped and the
    remaining order weights renormalized, so score(c, c) is exactly 1.
    Returns None when every order is empty (caller decides the fallback)."""
    weights = cfg.weights()
    contributing = [i for i, cand in enumerate(cand_orders) if cand]
    if not contributing:
        return None
    wsum = sum(weights[i] for i in contributing)
    if wsum <= 0:  # custom weights may zero out every contributing order
        weights = tuple(1.0 for _ in weights)
        wsum = float(len(contributing))
    log_sum = 0.0
    for i in contributing:
        cand, ref = cand_orders[i], ref_orders[i]
        if gram_weight is None:
            p = _clipped_multiset_precision(cand, ref)
        else:
            num = 0.0
            den = 0.0
            for gram, count in cand.items():
                w = gram_weight(gram)
                num += w * min(count, ref.get(gram, 0))
                den += w * count
            p = num / den if den > 0 else 0.0
        log_sum += (weights[i] / wsum) * math.log(max(p, cfg.epsilon))
    bp = 1.0 if len_c > len_r else math.exp(1.0 - len_r / len_c)
    return math.exp(log_sum) * bp


def _orders(stream: TokenStream, cfg: MetricConfig) -> list[Counter]:
    return [ngram_multiset(stream, n) for n in range(1, cfg.max_order + 1)]


def bleu(c: TokenStream, r: TokenStream, cfg: MetricConfig) -> float:
    """Clipped n-gram precision geometric mean x brevity penalty; empty candidate -> 0."""
    score = _geometric_ngram_score(_orders(c, cfg), _orders(r, cfg), len(c), len(r), cfg)
    return 0.0 if score is None else score


def weighted_ngram_match(c: TokenStream, r: TokenStream, cfg: MetricConfig) -> float:
    """bleu with every n-gram containing a keyword scaled by keyword_weight."""
    keywords = {t.text for t in c.tokens if t.kind == KIND_KEYWORD}
    keywords.update(t.text for t in r.tokens if t.kind == KIND_KEYWORD)
    if not keywords:
        return bleu(c, r, cfg)

    def gram_weight(gram: tuple) -> float:
        return cfg.keyword_weight if any(tok in keywords for tok in gram) else 1.0

    score = _geometric_ngram_score(_orders(c, cfg), _orders(r, cfg), len(c), len(r),
                                   cfg, gram_weight=gram_weight)
    return 0.0 if score is None else score


def trivially_shared_ngrams(corpus_streams: Iterable[TokenStream],
                            cfg: MetricConfig) -> TriviallySharedSet:
    """Per order n <= N, the k_shared most frequent n-grams by total corpus
    count; ties broken lexicographically for determinism."""
    streams = list(corpus_streams)
    if not streams:
        raise ValidationError("trivially_shared_ngrams requires at least one stream")
    per_order: dict[int, frozenset] = {}
    for n in range(1, cfg.max_order + 1):
        counts: Counter = Counter()
        for stream in streams:
            counts.update(ngram_multiset(stream, n))
        if cfg.k_shared == 0 or not counts:
            per_order[n] = frozenset()
            continue
        ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
        per_order[n] = frozenset(gram for gram, _ in ranked[: cfg.k_shared])
    return TriviallySharedSet(per_order=per_order)


def crystalbleu(c: TokenStream, r: TokenStream, shared: TriviallySharedSet,
                cfg: MetricConfig) -> tuple[float, bool]:
    """bleu on n-gram multisets with the trivially shared sets removed.
    Returns (score, degraded); degraded means filtering emptied the
    candidate at every order. Brevity penalty uses raw stream lengths."""
    cand_orders = []
    ref_orders = []
    for n in range(1, cfg.max_order + 1):
        drop = shared.for_order(n)
        cand = ngram_multiset(c, n)
        ref = ngram_multiset(r, n)
        if drop:
            cand = Counter({g: k for g, k in cand.items() if g not in drop})
            ref = Counter({g: k for g, k in ref.items() if g not in drop})
        cand_orders.append(cand)
        ref_orders.append(ref)
    score = _geometric_ngram_score(cand_orders, ref_orders, len(c), len(r), cfg)
    if score is None:
        return 0.0, True
    return score, False


# -- structural metrics ----------------------------------------------------


def syntax_match(t1: Optional[SyntaxTree], t2: Optional[SyntaxTree],
                 cfg: MetricConfig) -> tuple[float, bool]:
    """Clipped multiset precision of t1's subtree encodings against t2's.
    (0, degraded) when either parse failed."""
    if t1 is None or t2 is None:
        return 0.0, True
    cand = subtree_multiset(t1, cfg.subtree_depth)
    ref = subtree_multiset(t2, cfg.subtree_depth)
    return _clipped_multiset_precision(cand, ref), False


def dataflow_match(g1: Optional[DataFlowGraph], g2: Optional[DataFlowGraph]) -> tuple[float, bool]:
    """Clipped multiset precision of g1's edges against g2's. Both empty is
    vacuous agreement (1.0); empty candidate against a nonempty reference is
    (0, degraded)."""
    if g1 is None or g2 is None:
        return 0.0, True
    if len(g1) == 0 and len(g2) == 0:
        return 1.0, False
    if len(g1) == 0:
        return 0.0, True
    return _clipped_multiset_precision(g1.edges, g2.edges), False


def tsed_similarity(t1: Optional[SyntaxTree], t2: Optional[SyntaxTree],
                    cfg: MetricConfig, delta: Optional[float] = None) -> tuple[float, bool, str]:
    """max(1 - delta/max(nodes), 0). Parse failure -> (0, degraded); trees over
    the node cap are compared after truncation and flagged. `delta` short-
    circuits the edit-distance computation when the caller already has it."""
    if t1 is None or t2 is None:
        return 0.0, True, "parse-failure"
    if t1.node_count > cfg.node_cap or t2.node_count > cfg.node_cap:
        t1 = truncate_tree(t1, cfg.node_cap)
        t2 = truncate_tree(t2, cfg.node_cap)
        delta = tree_edit_distance(t1, t2, cfg.edit_costs, node_cap=cfg.node_cap)
        denom = max(t1.node_count, t2.node_count)
        return max(1.0 - delta / denom, 0.0), True, "node-cap"
    if delta is None:
        delta = tree_edit_distance(t1, t2, cfg.edit_costs, node_cap=cfg.node_cap)
    denom = max(t1.node_count, t2.node_count)
    return max(1.0 - delta / denom, 0.0), False, ""


def token_edit_similarity(c: TokenStream, r: TokenStream) -> float:
    """1 - Levenshtein(tokens)/max(len); RUBY's STS fallback. Undefined (and
    never called) when both streams are empty."""
    interned: dict[str, int] = {}
    a = np.array([interned.setdefault(t, len(interned)) for t in c.texts()], dtype=np.int64)
    b = np.array([interned.setdefault(t, len(interned)) for t in r.texts()], dtype=np.int64)
    dist = levenshtein(a, b)
    return 1.0 - dist / max(len(a), len(b))


def ruby_similarity(c: TokenStream, r: TokenStream,
                    t1: Optional[SyntaxTree], t2: Optional[SyntaxTree],
                    text_c: str, text_r: str,
                    cfg: MetricConfig, delta: Optional[float] = None) -> tuple[float, bool, str]:
    """Fallback-chain similarity with the PDG branch unavailable: AST-based
    TRS when both parses succeeded and fit the node cap, else token-based STS.
    Returns (value, degraded, branch)."""
    if t1 is not None and t2 is not None:
        if t1.node_count <= cfg.node_cap and t2.node_count <= cfg.node_cap:
            if delta is None:
                delta = tree_edit_distance(t1, t2, cfg.edit_costs, node_cap=cfg.node_cap)
            value = max(1.0 - delta / max(t1.node_count, t2.node_count), 0.0)
            return value, False, "trs"
    if len(c) == 0 and len(r) == 0:
        value = 1.0 if text_c == "" and text_r == "" else 0.0
        return value, True, "empty"
    return token_edit_similarity(c, r), True, "sts"


# -- symmetrization / fusion -------------------------------------------------


def symmetrize(s_lr: float, s_rl: float, cfg: MetricConfig) -> float:
    if cfg.symmetrization == "max":
        return max(s_lr, s_rl)
    if cfg.symmetrization == "mean":
        return (s_lr + s_rl) / 2.0
    return s_lr


def fuse(values: Sequence[float], ids: Sequence[str] = ()) -> float:
    """Unweighted average of the given metric values."""
    if not values:
        raise ValidationError("fuse requires a nonempty value list")
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise ValidationError(f"fuse input outside [0,1]: {v}")
    if all(v == values[0] for v in values):
        return values[0]  # exact, regardless of float summation rounding
    return sum(values) / len(values)


# -- pair scoring -------------------------------------------------------------


class _LRU:
    def __init__(self, maxsize: int):
        self.maxsize = maxsize
        self._data: OrderedDict = OrderedDict()

    def get(self, key, factory):
        if key in self._data:
            self._data.move_to_end(key)
            return self._data[key]
        value = factory()
        self._data[key] = value
        if len(self._data) > self.maxsize:
            self._data.popitem(last=False)
        return value


class PairScorer:
    """Computes the selected metrics on pairs of one corpus, caching per-
    fragment artifacts (token streams, trees, subtree multisets, dataflow
    graphs) with small LRU bounds so ConPlag-sized corpora stay in memory."""

    def __init__(self, corpus: Corpus, cfg: MetricConfig, use_preprocessed: bool,
                 shared_sets: Optional[dict[str, TriviallySharedSet]] = None):
        self.corpus = corpus
        self.cfg = cfg
        self.use_preprocessed = use_preprocessed
        self.shared_sets = shared_sets or {}
        # bounded: ConPlag-sized trees reach tens of thousands of nodes, and
        # each scoring worker process holds its own caches
        self._streams = _LRU(512)
        self._trees = _LRU(64)
        self._subtrees = _LRU(64)
        self._dfgs = _LRU(256)

    # fragment artifacts

    def text(self, fid: str) -> str:
        frag = self.corpus.fragments[fid]
        if self.use_preprocessed:
            if frag.preprocessed_text is None:
                raise ValidationError(f"fragment {fid!r} has no preprocessed text")
            return frag.preprocessed_text
        return frag.raw_text

    def stream(self, fid: str) -> TokenStream:
        include = self.cfg.comment_tokens and not self.use_preprocessed
        return self._streams.get(fid, lambda: tokenize(
            self.corpus.fragments[fid], use_preprocessed=self.use_preprocessed,
            include_comments=include))

    def tree(self, fid: str) -> Optional[SyntaxTree]:
        def build():
            try:
                return parse(self.corpus.fragments[fid], use_preprocessed=self.use_preprocessed)
            except ParseFailure:
                return None
        return self._trees.get(fid, build)

    def subtrees(self, fid: str) -> Optional[Counter]:
        def build():
            t = self.tree(fid)
            return None if t is None else subtree_multiset(t, self.cfg.subtree_depth)
        return self._subtrees.get(fid, build)

    def dfg(self, fid: str) -> Optional[DataFlowGraph]:
        def build():
            t = self.tree(fid)
            return None if t is None else dataflow_graph(t)
        return self._dfgs.get(fid, build)

    # scoring

    def score_pair(self, pair: PairRecord, metric_ids: Sequence[str]) -> list[ScoredPair]:
        requested = [canonical_metric_id(m) for m in metric_ids]
        needs = set(requested)
        if METRIC_FUSION in needs:
            needs.update(FUSION_CONSTITUENTS)
        if needs & set(_CODEBLEU_BUNDLE):
            needs.update(_CODEBLEU_BUNDLE)

        values: dict[str, tuple[float, bool, bool, str]] = {}  # id -> (value, degraded, direction_note, note)
        left, right = pair.left_id, pair.right_id
        c, r = self.stream(left), self.stream(right)

        def both_ways(fn) -> tuple[float, bool]:
            lr, rl = fn(c, r), fn(r, c)
            return symmetrize(lr, rl, self.cfg), lr != rl

        if METRIC_BLEU in needs:
            value, dnote = both_ways(lambda a, b: bleu(a, b, self.cfg))
            values[METRIC_BLEU] = (value, False, dnote, "")

        if METRIC_CRYSTALBLEU in needs:
            shared = self.shared_sets.get(pair.dataset, EMPTY_SHARED)
            s_lr, deg_lr = crystalbleu(c, r, shared, self.cfg)
            s_rl, deg_rl = crystalbleu(r, c, shared, self.cfg)
            value = symmetrize(s_lr, s_rl, self.cfg)
            values[METRIC_CRYSTALBLEU] = (
                value, deg_lr or deg_rl, s_lr != s_rl,
                "empty-residue" if (deg_lr or deg_rl) else "",
            )

        if needs & set(_CODEBLEU_BUNDLE):
            values.update(self._codebleu(pair, c, r))

        delta: Optional[float] = None
        if needs & {METRIC_RUBY, METRIC_TSED}:
            t1, t2 = self.tree(left), self.tree(right)
            if (t1 is not None and t2 is not None
                    and t1.node_count <= self.cfg.node_cap
                    and t2.node_count <= self.cfg.node_cap):
                delta = tree_edit_distance(t1, t2, self.cfg.edit_costs,
                                           node_cap=self.cfg.node_cap)

        if METRIC_RUBY in needs:
            value, degraded, branch = ruby_similarity(
                c, r, self.tree(left), self.tree(right),
                self.text(left), self.text(right), self.cfg, delta=delta)
            values[METRIC_RUBY] = (value, degraded, False, branch)

        if METRIC_TSED in needs:
            value, degraded, note = tsed_similarity(self.tree(left), self.tree(right),
                                                    self.cfg, delta=delta)
            values[METRIC_TSED] = (value, degraded, False, note)

        if METRIC_FUSION in needs:
            parts = [values[m] for m in FUSION_CONSTITUENTS]
            value = fuse([p[0] for p in parts], FUSION_CONSTITUENTS)
            values[METRIC_FUSION] = (value, any(p[1] for p in parts),
                                     any(p[2] for p in parts), "")

        out = []
        for mid in requested:
            value, degraded, dnote, note = values[mid]
            out.append(ScoredPair(
                left_id=left, right_id=right, dataset=pair.dataset,
                label=pair.label, level=pair.level, metric_id=mid,
                value=round(value, _ROUND_DIGITS), degraded=degraded,
                direction_note=dnote, note=note,
            ))
        return out

    def _codebleu(self, pair: PairRecord, c: TokenStream, r: TokenStream) -> dict:
        cfg = self.cfg
        t1, t2 = self.tree(pair.left_id), self.tree(pair.right_id)
        parse_failed = t1 is None or t2 is None

        ngram_lr, ngram_rl = bleu(c, r, cfg), bleu(r, c, cfg)
        s_ngram = symmetrize(ngram_lr, ngram_rl, cfg)
        wn_lr, wn_rl = weighted_ngram_match(c, r, cfg), weighted_ngram_match(r, c, cfg)
        s_wngram = symmetrize(wn_lr, wn_rl, cfg)

        if parse_failed:
            s_syntax, syn_deg, syn_dnote = 0.0, True, False
            s_dataflow, df_deg, df_dnote = 0.0, True, False
            df_note = "parse-failure"
        else:
            m1, m2 = self.subtrees(pair.left_id), self.subtrees(pair.right_id)
            syn_lr = _clipped_multiset_precision(m1, m2)
            syn_rl = _clipped_multiset_precision(m2, m1)
            s_syntax, syn_deg, syn_dnote = symmetrize(syn_lr, syn_rl, cfg), False, syn_lr != syn_rl
            g1, g2 = self.dfg(pair.left_id), self.dfg(pair.right_id)
            df_lr, deg_lr = dataflow_match(g1, g2)
            df_rl, deg_rl = dataflow_match(g2, g1)
            s_dataflow = symmetrize(df_lr, df_rl, cfg)
            df_deg = deg_lr or deg_rl
            df_dnote = df_lr != df_rl
            df_note = "vacuous" if (len(g1) == 0 and len(g2) == 0) else ""

        total = (cfg.alpha * s_ngram + cfg.beta * s_wngram
                 + cfg.gamma * s_syntax + cfg.delta * s_dataflow)
        any_deg = syn_deg or df_deg
        return {
            METRIC_CB_NGRAM: (s_ngram, False, ngram_lr != ngram_rl, ""),
            METRIC_CB_WNGRAM: (s_wngram, False, wn_lr != wn_rl, ""),
            METRIC_CB_SYNTAX: (s_syntax, syn_deg, syn_dnote, "parse-failure" if syn_deg else ""),
            METRIC_CB_DATAFLOW: (s_dataflow, df_deg, df_dnote, df_note),
            METRIC_CODEBLEU: (total, any_deg, False, ""),
        }


def codebleu(pair: PairRecord, scorer: PairScorer) -> tuple[float, dict[str, float]]:
    """Weighted component sum for one pair; returns (total, components)."""
    c, r = scorer.stream(pair.left_id), scorer.stream(pair.right_id)
    bundle = scorer._codebleu(pair, c, r)
    total = bundle[METRIC_CODEBLEU][0]
    components = {m: bundle[m][0] for m in _CODEBLEU_BUNDLE if m != METRIC_CODEBLEU}
    return total, components


def build_shared_sets(corpus: Corpus, cfg: MetricConfig,
                      use_preprocessed: bool) -> dict[str, TriviallySharedSet]:
    """CrystalBLEU's F_n per dataset over all of that dataset's unique
    fragments, for the given preprocessing mode (same tokenization the
    scorer uses)."""
    include = cfg.comment_tokens and not use_preprocessed
    out = {}
    tags = sorted({f.dataset for f in corpus.fragments.values()})
    for tag in tags:
        streams = [tokenize(f, use_preprocessed=use_preprocessed, include_comments=include)
                   for fid, f in sorted(corpus.fragments.items()) if f.dataset == tag]
        if streams:
            out[tag] = trivially_shared_ngrams(streams, cfg)
    return out


# -- corpus scoring -----------------------------------------------------------

_WORKER_CTX: dict = {}


def _init_worker(corpus, cfg, use_preprocessed, shared_sets, metric_ids):
    _WORKER_CTX["scorer"] = PairScorer(corpus, cfg, use_preprocessed, shared_sets)
    _WORKER_CTX["metric_ids"] = metric_ids


def _score_chunk(pairs: list[PairRecord]) -> list[ScoredPair]:
    scorer = _WORKER_CTX["scorer"]
    metric_ids = _WORKER_CTX["metric_ids"]
    out: list[ScoredPair] = []
    for pair in pairs:
        out.extend(scorer.score_pair(pair, metric_ids))
    return out


def score_corpus(corpus: Corpus, metric_ids: Sequence[str], cfg: MetricConfig,
                 use_preprocessed: bool = False,
                 shared_sets: Optional[dict[str, TriviallySharedSet]] = None,
                 workers: int = 1) -> list[ScoredPair]:
    """One ScoredPair per (pair, metric), sorted by (dataset, pair, metric_id)
    so any worker schedule produces identical output."""
    metric_ids = [canonical_metric_id(m) for m in metric_ids]
    if METRIC_CRYSTALBLEU in metric_ids or METRIC_FUSION in metric_ids:
        if shared_sets is None:
            shared_sets = build_shared_sets(corpus, cfg, use_preprocessed)
    pairs = list(corpus.pairs)
    if workers > 1 and len(pairs) >= 2 * workers:
        from concurrent.futures import ProcessPoolExecutor

        chunks = [pairs[i::workers] for i in range(workers)]
        results: list[ScoredPair] = []
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker,
            initargs=(corpus, cfg, use_preprocessed, shared_sets, metric_ids),
        ) as pool:
            for part in pool.map(_score_chunk, chunks):
                results.extend(part)
    else:
        scorer = PairScorer(corpus, cfg, use_preprocessed, shared_sets)
        results = []
        for pair in pairs:
            results.extend(scorer.score_pair(pair, metric_ids))
    results.sort(key=lambda s: (s.dataset, s.left_id, s.right_id, s.metric_id))
    return results


# -- external score ingestion -------------------------------------------------


@dataclass
class ImportResult:
    scores: list[ScoredPair]
    rejected: list[dict]
    warning: str = ""


def import_external_scores(file: Path | str, metric_id: str, corpus: Corpus,
                           max_scale: Optional[float] = None) -> ImportResult:
    """Read `left_id,right_id,score[,max_scale]` rows, rescale by the declared
    max, validate the [0,1] range, and join labels from the corpus manifest.
    Rows for pairs absent from the corpus are rejected (reported, not fatal)."""
    path = Path(file)
    if not path.is_file():
        raise LoadError(f"external score file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fieldnames = reader.fieldnames or []
        rows = list(reader)
    if not rows:
        return ImportResult(scores=[], rejected=[], warning=f"{path}: no score rows")
    for col in ("left_id", "right_id", "score"):
        if col not in fieldnames:
            raise ValidationError(f"{path}: missing column {col!r}")

    if max_scale is None and "max_scale" in fieldnames:
        declared = (rows[0].get("max_scale") or "").strip()
        if declared:
            max_scale = float(declared)
    scale = 1.0 if max_scale is None else float(max_scale)
    if scale <= 0:
        raise ValidationError(f"{path}: max_scale must be positive, got {scale}")

    by_key: dict[tuple[str, str], PairRecord] = {p.key(): p for p in corpus.pairs}
    scores: list[ScoredPair] = []
    rejected: list[dict] = []
    bad_rows: list[int] = []
    for lineno, row in enumerate(rows, start=2):
        left = (row.get("left_id") or "").strip()
        right = (row.get("right_id") or "").strip()
        try:
            raw = float((row.get("score") or "").strip())
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: malformed score {row.get('score')!r}") from None
        value = raw / scale
        if not 0.0 <= value <= 1.0:
            bad_rows.append(lineno)
            continue
        key = (left, right) if left <= right else (right, left)
        pair = by_key.get(key)
        if pair is None:
            rejected.append({"line": lineno, "left_id": left, "right_id": right,
                             "reason": "pair not in corpus manifest"})
            continue
        scores.append(ScoredPair(
            left_id=pair.left_id, right_id=pair.right_id, dataset=pair.dataset,
            label=pair.label, level=pair.level, metric_id=metric_id,
            value=round(value, _ROUND_DIGITS), degraded=False,
            direction_note=False, note="external",
        ))
    if bad_rows:
        raise ValidationError(
            f"{path}: score outside [0,1] (declared max {scale}) on rows {bad_rows}"
        )
    scores.sort(key=lambda s: (s.dataset, s.left_id, s.right_id, s.metric_id))
    return ImportResult(scores=scores, rejected=rejected)
