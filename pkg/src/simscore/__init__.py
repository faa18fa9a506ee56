"""simscore: code-similarity metrics evaluated as plagiarism detectors.

Pipeline: load a labelled pair corpus, optionally preprocess fragments,
score every pair with CodeBLEU/CrystalBLEU/RUBY/TSED (plus fusion and
external baselines), then rank-evaluate with AUROC/AP and bootstrap CIs,
stratified by dataset and plagiarism level.
"""

__version__ = "0.1.0"

from .corpus import (
    CodeFragment,
    Corpus,
    CorpusStats,
    PairRecord,
    TokenStream,
    corpus_stats,
    load_corpus,
    merge_corpora,
    ngram_multiset,
    preprocess,
    preprocess_text,
    tokenize,
)
from .errors import (
    CapacityError,
    InstabilityError,
    LoadError,
    ParseFailure,
    SimscoreError,
    UndefinedMetricError,
    ValidationError,
)
from .metrics import (
    ALL_METRIC_IDS,
    MetricConfig,
    PairScorer,
    ScoredPair,
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
from .ranking import (
    BootstrapConfig,
    Curve,
    LabelledScore,
    PairedDiff,
    RankingReport,
    auroc,
    average_precision,
    bootstrap_ci,
    curve,
    paired_bootstrap_diff,
    stratified_report,
)
from .syntax import (
    DataFlowGraph,
    EditCostTable,
    SyntaxTree,
    dataflow_graph,
    parse,
    subtree_multiset,
    tree_edit_distance,
)
