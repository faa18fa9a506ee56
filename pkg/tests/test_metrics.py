"""BLEU family, CodeBLEU components, CrystalBLEU, RUBY, TSED, fusion,
corpus scoring, and external-score ingestion."""

from __future__ import annotations

import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simscore.corpus import CodeFragment, Corpus, PairRecord, TokenStream, preprocess, tokenize
from simscore.errors import LoadError, ValidationError
from simscore.lexer import Token
from simscore.metrics import (
    MetricConfig,
    PairScorer,
    TriviallySharedSet,
    bleu,
    build_shared_sets,
    clipped_precision,
    crystalbleu,
    dataflow_match,
    fuse,
    import_external_scores,
    ruby_similarity,
    score_corpus,
    symmetrize,
    syntax_match,
    token_edit_similarity,
    trivially_shared_ngrams,
    tsed_similarity,
    weighted_ngram_match,
)
from simscore.syntax import parse
from simscore.syntax.dataflow import DataFlowGraph
from simscore.syntax.tree import Node, SyntaxTree

from conftest import synth_corpus
from oracles import levenshtein_brute

CFG = MetricConfig()


def stream(*texts: str) -> TokenStream:
    return TokenStream(tokens=tuple(Token(t, "identifier") for t in texts))


def kw_stream(*pairs: tuple[str, str]) -> TokenStream:
    return TokenStream(tokens=tuple(Token(t, k) for t, k in pairs))


def _parse_text(text: str, fid: str = "f"):
    return parse(CodeFragment(id=fid, dataset="d", task_id="", raw_text=text))


# -- clipped precision ---------------------------------------------------------


def test_clipped_precision_identity():
    s = stream("a", "b", "c")
    for n in (1, 2, 3):
        assert clipped_precision(s, s, n) == 1.0


def test_clipped_precision_half():
    assert clipped_precision(stream("a", "b"), stream("a", "c"), 1) == 0.5


def test_clipped_precision_clipping():
    assert clipped_precision(stream("a", "a", "a"), stream("a"), 1) == pytest.approx(1 / 3)


def test_clipped_precision_empty_candidate():
    assert clipped_precision(stream(), stream("a"), 1) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from("abcd"), max_size=12),
       st.lists(st.sampled_from("abcd"), max_size=12),
       st.integers(1, 4))
def test_clipped_precision_never_exceeds_one(c, r, n):
    assert 0.0 <= clipped_precision(stream(*c), stream(*r), n) <= 1.0


# -- bleu -----------------------------------------------------------------------


def test_bleu_identity():
    s = stream("a", "b", "c", "d", "e")
    assert bleu(s, s, CFG) == 1.0


def test_bleu_short_identity():
    # shorter than max_order: contributing orders renormalize, identity stays exact
    s = stream("a", "b")
    assert bleu(s, s, CFG) == 1.0


def test_bleu_brevity_penalty_example():
    cfg = MetricConfig(max_order=1)
    value = bleu(stream("a", "b"), stream("a", "b", "c", "d"), cfg)
    assert value == pytest.approx(math.exp(1 - 4 / 2), abs=1e-12)
    assert round(value, 4) == 0.3679


def test_bleu_disjoint_rounds_to_zero():
    value = bleu(stream("a", "b"), stream("x", "y"), CFG)
    assert round(value, 9) == 0.0


def test_bleu_empty_candidate_zero():
    assert bleu(stream(), stream("a"), CFG) == 0.0


# -- weighted n-gram match -------------------------------------------------------


def test_weighted_identity():
    s = kw_stream(("if", "keyword"), ("a", "identifier"), ("b", "identifier"),
                  ("return", "keyword"), ("c", "identifier"))
    assert weighted_ngram_match(s, s, CFG) == 1.0


def test_weighted_no_keywords_equals_bleu():
    c = stream("a", "b", "c", "d")
    r = stream("a", "b", "x", "d")
    assert weighted_ngram_match(c, r, CFG) == bleu(c, r, CFG)


def test_weighted_promotes_keyword_overlap():
    # same keywords, one differing identifier: keyword-weighted precision
    # must not fall below the plain one
    c = kw_stream(("if", "keyword"), ("x", "identifier"), ("return", "keyword"),
                  ("y", "identifier"), ("while", "keyword"))
    r = kw_stream(("if", "keyword"), ("x", "identifier"), ("return", "keyword"),
                  ("z", "identifier"), ("while", "keyword"))
    assert weighted_ngram_match(c, r, CFG) >= bleu(c, r, CFG)


# -- syntax / dataflow match -----------------------------------------------------


def test_syntax_match_identity():
    t = _parse_text("class A { int x; }")
    value, degraded = syntax_match(t, t, CFG)
    assert value == 1.0 and not degraded


def test_syntax_match_disjoint_zero():
    t1 = SyntaxTree(root=Node("a"))
    t2 = SyntaxTree(root=Node("b"))
    value, _ = syntax_match(t1, t2, CFG)
    assert value == 0.0


def test_syntax_match_hand_example():
    t1 = SyntaxTree(root=Node("root", [Node("a"), Node("b")]))
    t2 = SyntaxTree(root=Node("root", [Node("a"), Node("c")]))
    cfg = MetricConfig(subtree_depth=1)
    value, _ = syntax_match(t1, t2, cfg)
    assert value == pytest.approx(2 / 3)


def test_syntax_match_parse_failure_degraded():
    t = _parse_text("class A {}")
    value, degraded = syntax_match(None, t, CFG)
    assert value == 0.0 and degraded


def test_dataflow_match_identity():
    g = DataFlowGraph(edges=Counter({(0, 0, 0): 1, (1, 0, 0): 1}))
    value, degraded = dataflow_match(g, g)
    assert value == 1.0 and not degraded


def test_dataflow_match_both_empty_vacuous():
    empty = DataFlowGraph(edges=Counter())
    value, degraded = dataflow_match(empty, empty)
    assert value == 1.0 and not degraded


def test_dataflow_match_empty_candidate_degraded():
    empty = DataFlowGraph(edges=Counter())
    full = DataFlowGraph(edges=Counter({(0, 0, 0): 1}))
    value, degraded = dataflow_match(empty, full)
    assert value == 0.0 and degraded


def test_dataflow_match_hand_example():
    g1 = DataFlowGraph(edges=Counter({"e1": 1, "e2": 1}))
    g2 = DataFlowGraph(edges=Counter({"e1": 1}))
    value, _ = dataflow_match(g1, g2)
    assert value == 0.5


# -- trivially shared n-grams / crystalbleu ---------------------------------------


def test_shared_k_zero_empty():
    shared = trivially_shared_ngrams([stream("a", "b")], MetricConfig(k_shared=0))
    for n in range(1, 5):
        assert shared.for_order(n) == frozenset()


def test_shared_most_frequent():
    shared = trivially_shared_ngrams([stream("a", "a", "b")], MetricConfig(k_shared=1))
    assert shared.for_order(1) == frozenset({("a",)})


def test_shared_deterministic_under_shuffle():
    streams = [stream(*"a b c a b".split()), stream(*"c c d".split()),
               stream(*"b d e".split())]
    cfg = MetricConfig(k_shared=3)
    baseline = trivially_shared_ngrams(streams, cfg)
    for seed in range(5):
        rng = random.Random(seed)
        shuffled = list(streams)
        rng.shuffle(shuffled)
        assert trivially_shared_ngrams(shuffled, cfg).per_order == baseline.per_order


def test_crystalbleu_k_zero_equals_bleu():
    rng = random.Random(4)
    empty = TriviallySharedSet(per_order={})
    for _ in range(60):
        c = stream(*[rng.choice("abcdef") for _ in range(rng.randint(1, 15))])
        r = stream(*[rng.choice("abcdef") for _ in range(rng.randint(1, 15))])
        value, degraded = crystalbleu(c, r, empty, CFG)
        assert value == bleu(c, r, CFG)
        assert not degraded


def test_crystalbleu_identity_with_residue():
    shared = TriviallySharedSet(per_order={1: frozenset({("the",)})})
    s = stream("the", "quick", "fox", "jumps")
    value, degraded = crystalbleu(s, s, shared, CFG)
    assert value == 1.0 and not degraded


def test_crystalbleu_empty_residue_degraded():
    shared = TriviallySharedSet(per_order={
        1: frozenset({("a",), ("b",)}),
        2: frozenset({("a", "b")}),
        3: frozenset(), 4: frozenset(),
    })
    s = stream("a", "b")
    value, degraded = crystalbleu(s, s, shared, CFG)
    assert value == 0.0 and degraded


# -- ruby / tsed -------------------------------------------------------------------


def test_ruby_identity_trs():
    t = _parse_text("class A { void m() { int x = 1; } }")
    s = tokenize(CodeFragment(id="f", dataset="d", task_id="", raw_text="class A { void m() { int x = 1; } }"))
    value, degraded, branch = ruby_similarity(s, s, t, t, "x", "x", CFG)
    assert value == 1.0 and branch == "trs" and not degraded


def test_ruby_unparseable_identical_sts():
    s = stream("a", "b", "c")
    value, degraded, branch = ruby_similarity(s, s, None, None, "a b c", "a b c", CFG)
    assert value == 1.0 and branch == "sts" and degraded


def test_ruby_sts_hand_example():
    # tokens [a,b,c] vs [a,x,c]: one substitution of three
    c, r = stream("a", "b", "c"), stream("a", "x", "c")
    value = token_edit_similarity(c, r)
    assert value == pytest.approx(2 / 3)
    assert levenshtein_brute(c.texts(), r.texts()) == 1


def test_ruby_both_empty():
    empty = stream()
    value, degraded, branch = ruby_similarity(empty, empty, None, None, "", "", CFG)
    assert value == 1.0 and degraded and branch == "empty"
    value, degraded, _ = ruby_similarity(empty, empty, None, None, " ", "", CFG)
    assert value == 0.0 and degraded


@settings(max_examples=80, deadline=None)
@given(st.lists(st.sampled_from("abc"), min_size=1, max_size=8),
       st.lists(st.sampled_from("abc"), min_size=1, max_size=8))
def test_token_edit_similarity_matches_brute_force(a, b):
    got = token_edit_similarity(stream(*a), stream(*b))
    want = 1.0 - levenshtein_brute(tuple(a), tuple(b)) / max(len(a), len(b))
    assert got == pytest.approx(want, abs=1e-12)


def test_tsed_identity():
    t = _parse_text("class A { int x; }")
    value, degraded, _ = tsed_similarity(t, t, CFG)
    assert value == 1.0 and not degraded


def test_tsed_single_node_rename_floor():
    a = SyntaxTree(root=Node("a"))
    b = SyntaxTree(root=Node("b"))
    value, degraded, _ = tsed_similarity(a, b, CFG)
    assert value == 0.0 and not degraded


def test_tsed_parse_failure_degraded():
    t = _parse_text("class A {}")
    value, degraded, note = tsed_similarity(None, t, CFG)
    assert value == 0.0 and degraded and note == "parse-failure"


def test_tsed_node_cap_truncates_and_flags():
    t1 = _parse_text("class A { void m() { int a=1; int b=2; int c=3; int d=4; } }")
    t2 = _parse_text("class A { void m() { int a=1; int b=2; int c=9; int e=4; } }")
    cfg = MetricConfig(node_cap=12)
    value, degraded, note = tsed_similarity(t1, t2, cfg)
    assert degraded and note == "node-cap"
    assert 0.0 <= value <= 1.0


def test_ruby_node_cap_falls_back_to_sts():
    text1 = "class A { void m() { int a=1; int b=2; } }"
    text2 = "class A { void m() { int a=1; int c=3; } }"
    t1, t2 = _parse_text(text1), _parse_text(text2)
    s1 = tokenize(CodeFragment(id="x", dataset="d", task_id="", raw_text=text1))
    s2 = tokenize(CodeFragment(id="y", dataset="d", task_id="", raw_text=text2))
    cfg = MetricConfig(node_cap=5)
    value, degraded, branch = ruby_similarity(s1, s2, t1, t2, text1, text2, cfg)
    assert branch == "sts" and degraded
    assert 0.0 < value < 1.0


# -- symmetrize / fuse ---------------------------------------------------------------


def test_symmetrize_modes():
    assert symmetrize(0.4, 0.8, MetricConfig(symmetrization="max")) == 0.8
    assert symmetrize(0.4, 0.8, MetricConfig(symmetrization="mean")) == pytest.approx(0.6)
    assert symmetrize(0.4, 0.8, MetricConfig(symmetrization="left")) == 0.4
    for mode in ("max", "mean", "left"):
        assert symmetrize(0.7, 0.7, MetricConfig(symmetrization=mode)) == 0.7


def test_fuse():
    assert fuse([1.0, 1.0, 1.0]) == 1.0
    assert fuse([0.2, 0.4, 0.9]) == pytest.approx(0.5)
    assert fuse([0.37]) == 0.37
    # identical values come back exactly, not via lossy summation
    for x in (0.1, 0.37, 1 / 3, 0.8300000000000001):
        assert fuse([x, x, x]) == x
    with pytest.raises(ValidationError):
        fuse([])


def test_score_corpus_invariant_under_pair_order(scorer_corpus):
    corpus, cfg, shared = scorer_corpus
    shuffled = Corpus(fragments=dict(corpus.fragments),
                      pairs=list(reversed(corpus.pairs)))
    ids = ["CrystalBLEU", "RUBY"]
    a = score_corpus(corpus, ids, cfg, shared_sets=shared[False])
    b = score_corpus(shuffled, ids, cfg, shared_sets=shared[False])
    assert a == b


# -- codebleu ---------------------------------------------------------------------


@pytest.fixture(scope="module")
def scorer_corpus():
    corpus = synth_corpus(seed=13, n_fragments=10, n_pairs=14)
    cfg = MetricConfig()
    shared = {
        False: build_shared_sets(corpus, cfg, False),
        True: build_shared_sets(corpus, cfg, True),
    }
    return corpus, cfg, shared


def test_codebleu_identity(scorer_corpus):
    corpus, cfg, shared = scorer_corpus
    fid = sorted(corpus.fragments)[0]
    pair = PairRecord(fid, sorted(corpus.fragments)[1], False, None, "synth")
    twin = Corpus(fragments={"L": corpus.fragments[fid],
                             "R": CodeFragment(id="R", dataset="synth", task_id="",
                                               raw_text=corpus.fragments[fid].raw_text)},
                  pairs=[PairRecord("L", "R", True, 1, "synth")])
    scorer = PairScorer(twin, cfg, False, build_shared_sets(twin, cfg, False))
    rows = {s.metric_id: s for s in scorer.score_pair(twin.pairs[0],
            ["CodeBLEU", "CB-Ngram", "CB-Wngram", "CB-Syntax", "CB-Dataflow"])}
    for mid, s in rows.items():
        assert s.value == 1.0, mid


def test_codebleu_total_is_component_dot_product(scorer_corpus):
    corpus, cfg, shared = scorer_corpus
    scorer = PairScorer(corpus, cfg, False, shared[False])
    for pair in corpus.pairs:
        c, r = scorer.stream(pair.left_id), scorer.stream(pair.right_id)
        bundle = scorer._codebleu(pair, c, r)
        total = bundle["CodeBLEU"][0]
        dot = (cfg.alpha * bundle["CB-Ngram"][0] + cfg.beta * bundle["CB-Wngram"][0]
               + cfg.gamma * bundle["CB-Syntax"][0] + cfg.delta * bundle["CB-Dataflow"][0])
        assert abs(total - dot) <= 1e-12


def test_codebleu_halfway_weights():
    # components (1, 1, 0, 0) with default 0.25 weights -> 0.5
    cfg = MetricConfig()
    assert cfg.alpha * 1 + cfg.beta * 1 + cfg.gamma * 0 + cfg.delta * 0 == 0.5


def test_codebleu_parse_failure_degrades_structural_components():
    frag_ok = CodeFragment(id="ok", dataset="d", task_id="", raw_text="class A { int x; }")
    frag_bad = CodeFragment(id="bad", dataset="d", task_id="", raw_text="class A { int x; }",
                            language="cobol")
    corpus = Corpus(fragments={"ok": frag_ok, "bad": frag_bad},
                    pairs=[PairRecord("ok", "bad", True, 1, "d")])
    scorer = PairScorer(corpus, MetricConfig(), False, {})
    rows = {s.metric_id: s for s in scorer.score_pair(corpus.pairs[0],
            ["CodeBLEU", "CB-Syntax", "CB-Dataflow", "CB-Ngram"])}
    assert rows["CB-Syntax"].value == 0.0 and rows["CB-Syntax"].degraded
    assert rows["CB-Dataflow"].value == 0.0 and rows["CB-Dataflow"].degraded
    assert rows["CodeBLEU"].degraded
    assert rows["CodeBLEU"].value > 0.0  # lexical components still defined
    assert not rows["CB-Ngram"].degraded


# -- pair-swap invariance / value ranges --------------------------------------------


def test_pair_swap_invariance_max_and_mean(scorer_corpus):
    corpus, _, _ = scorer_corpus
    metric_ids = ["BLEU", "CodeBLEU", "CB-Ngram", "CB-Wngram", "CB-Syntax",
                  "CB-Dataflow", "CrystalBLEU", "RUBY", "TSED", "FusionTop3"]
    for mode in ("max", "mean"):
        cfg = MetricConfig(symmetrization=mode)
        shared = build_shared_sets(corpus, cfg, False)
        scorer = PairScorer(corpus, cfg, False, shared)
        for pair in corpus.pairs[:6]:
            swapped = PairRecord(pair.right_id, pair.left_id, pair.label,
                                 pair.level, pair.dataset)
            a = {s.metric_id: s.value for s in scorer.score_pair(pair, metric_ids)}
            b = {s.metric_id: s.value for s in scorer.score_pair(swapped, metric_ids)}
            assert a == b, (mode, pair)


def test_all_metric_values_in_unit_interval(scorer_corpus):
    corpus, cfg, shared = scorer_corpus
    rows = score_corpus(corpus, ["BLEU", "CodeBLEU", "CB-Ngram", "CB-Wngram",
                                 "CB-Syntax", "CB-Dataflow", "CrystalBLEU",
                                 "RUBY", "TSED", "FusionTop3"],
                        cfg, use_preprocessed=False, shared_sets=shared[False])
    for s in rows:
        assert 0.0 <= s.value <= 1.0, s


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from("abcd"), min_size=1, max_size=10),
       st.lists(st.sampled_from("abcd"), min_size=1, max_size=10))
def test_bleu_family_fuzz_ranges(c_toks, r_toks):
    c, r = stream(*c_toks), stream(*r_toks)
    assert 0.0 <= bleu(c, r, CFG) <= 1.0
    assert 0.0 <= weighted_ngram_match(c, r, CFG) <= 1.0
    value, _ = crystalbleu(c, r, TriviallySharedSet(per_order={1: frozenset({("a",)})}), CFG)
    assert 0.0 <= value <= 1.0


# -- score_corpus ---------------------------------------------------------------------


def test_score_corpus_cardinality_and_order(scorer_corpus):
    corpus, cfg, shared = scorer_corpus
    rows = score_corpus(corpus, ["RUBY", "BLEU"], cfg, shared_sets=shared[False])
    assert len(rows) == 2 * len(corpus.pairs)
    keys = [(s.dataset, s.left_id, s.right_id, s.metric_id) for s in rows]
    assert keys == sorted(keys)


def test_score_corpus_deterministic(scorer_corpus):
    corpus, cfg, shared = scorer_corpus
    ids = ["CrystalBLEU", "CodeBLEU", "RUBY", "TSED", "FusionTop3"]
    a = score_corpus(corpus, ids, cfg, shared_sets=shared[False])
    b = score_corpus(corpus, ids, cfg, shared_sets=shared[False])
    assert a == b


def test_score_corpus_parallel_matches_serial(scorer_corpus):
    corpus, cfg, shared = scorer_corpus
    ids = ["BLEU", "RUBY"]
    serial = score_corpus(corpus, ids, cfg, shared_sets=shared[False], workers=1)
    parallel = score_corpus(corpus, ids, cfg, shared_sets=shared[False], workers=2)
    assert serial == parallel


def test_fusion_requires_nothing_extra(scorer_corpus):
    corpus, cfg, shared = scorer_corpus
    rows = score_corpus(corpus, ["FusionTop3"], cfg, shared_sets=shared[False])
    assert {s.metric_id for s in rows} == {"FusionTop3"}
    assert len(rows) == len(corpus.pairs)


def test_unknown_metric_rejected(scorer_corpus):
    corpus, cfg, _ = scorer_corpus
    with pytest.raises(ValidationError):
        score_corpus(corpus, ["NotAMetric"], cfg)


# -- import_external_scores --------------------------------------------------------


def _mini_corpus() -> Corpus:
    frags = {
        "a": CodeFragment(id="a", dataset="d", task_id="", raw_text="class A {}"),
        "b": CodeFragment(id="b", dataset="d", task_id="", raw_text="class B {}"),
        "c": CodeFragment(id="c", dataset="d", task_id="", raw_text="class C {}"),
    }
    pairs = [PairRecord("a", "b", True, 1, "d"), PairRecord("a", "c", False, None, "d")]
    return Corpus(fragments=frags, pairs=pairs)


def test_import_external_scores_joins_labels(tmp_path):
    path = tmp_path / "ext.csv"
    path.write_text("left_id,right_id,score\nb,a,0.9\na,c,0.2\n")
    result = import_external_scores(path, "tool", _mini_corpus())
    assert len(result.scores) == 2
    by_pair = {s.pair_key(): s for s in result.scores}
    assert by_pair[("a", "b")].label is True
    assert by_pair[("a", "b")].value == 0.9  # unordered join
    assert by_pair[("a", "c")].label is False


def test_import_external_scores_range_error(tmp_path):
    path = tmp_path / "ext.csv"
    path.write_text("left_id,right_id,score\na,b,1.7\n")
    with pytest.raises(ValidationError):
        import_external_scores(path, "tool", _mini_corpus())


def test_import_external_scores_max_scale(tmp_path):
    path = tmp_path / "ext.csv"
    path.write_text("left_id,right_id,score,max_scale\na,b,85,100\na,c,20,100\n")
    result = import_external_scores(path, "tool", _mini_corpus())
    values = sorted(s.value for s in result.scores)
    assert values == [0.2, 0.85]


def test_import_external_scores_empty_file_warns(tmp_path):
    path = tmp_path / "ext.csv"
    path.write_text("left_id,right_id,score\n")
    result = import_external_scores(path, "tool", _mini_corpus())
    assert result.scores == [] and result.warning


def test_import_external_scores_rejects_unknown_pairs(tmp_path):
    path = tmp_path / "ext.csv"
    path.write_text("left_id,right_id,score\na,b,0.5\nnope,a,0.5\n")
    result = import_external_scores(path, "tool", _mini_corpus())
    assert len(result.scores) == 1
    assert len(result.rejected) == 1
    assert result.rejected[0]["left_id"] == "nope"


def test_import_external_scores_missing_file():
    with pytest.raises(LoadError):
        import_external_scores("/nonexistent/scores.csv", "tool", _mini_corpus())


def test_import_external_scores_zero_max_scale_rejected(tmp_path):
    path = tmp_path / "ext.csv"
    path.write_text("left_id,right_id,score,max_scale\na,b,0.5,0\n")
    with pytest.raises(ValidationError, match="max_scale"):
        import_external_scores(path, "tool", _mini_corpus())


def test_bleu_with_zeroed_order_weights():
    # custom weights can zero out every contributing order; bleu must not crash
    cfg = MetricConfig(max_order=4, order_weights=(0.0, 0.0, 0.0, 1.0))
    short = stream("a", "b")  # only orders 1-2 contribute
    assert bleu(short, short, cfg) == 1.0
