"""Uncertainty-aware topic-model ensemble workbench.

Train or import ensembles of LDA topic models, quantify each topic's
matching and existence uncertainty against the rest of the ensemble,
embed all topics into a 2D overview, and explore the result through
filters, groups, document rankings, and token-level highlighting, either
as a library or over the bundled HTTP API.
"""

__version__ = "0.1.0"

from .analysis import (
    FilterSpec,
    MeasureSummary,
    StabilityClass,
    TopicGroup,
    apply_filter,
    classify_stability,
    completeness,
    convex_hull,
    correlation,
    ensemble_summary,
    make_group,
)
from .corpus import (
    Document,
    DocTermMatrix,
    EmptyVocabularyError,
    PreprocessingConfig,
    Token,
    Vocabulary,
    build_matrix,
    load_corpus_dir,
    load_corpus_jsonl,
    load_stopwords,
    tokenize,
)
from .docviews import (
    CapabilityError,
    DocRanking,
    HighlightedDocument,
    HighlightSpan,
    highlight,
    rank_documents,
)
from .embedding import (
    Embedding,
    EmbeddingConfig,
    SimilarityTsne,
    embed_similarity,
    kl_objective,
    similarity_to_distance,
    tsne,
)
from .ensemble import Ensemble, EnsembleSpec, TopicRef, generate, preset
from .lda import GibbsLda, LdaConfig, TopicModel, log_likelihood, train
from .mallet import (
    MalletParseError,
    MalletStructureError,
    export_mallet,
    import_mallet,
    parse_doc_topics,
    parse_topic_word_weights,
)
from .metrics import (
    DegenerateMatchError,
    InfiniteDivergenceError,
    MatchDistribution,
    SimilarityMatrix,
    UncertaintyRecord,
    compute_all,
    cosine_similarity,
    existence_uncertainty,
    js_divergence,
    kl_divergence,
    match_distribution,
    matching_uncertainty,
    matching_uncertainty_pair,
    similarity_matrix,
)
from .project import (
    CorpusRef,
    Project,
    ProjectFormatError,
    ViewConfig,
    create_project,
    open_project,
    save_project,
)
from .server import create_app
from .synthbench import (
    SyntheticCorpus,
    SyntheticSpec,
    generate_corpus,
    run_experiment,
)

__all__ = [
    "__version__",
    # corpus
    "Document",
    "DocTermMatrix",
    "EmptyVocabularyError",
    "PreprocessingConfig",
    "Token",
    "Vocabulary",
    "build_matrix",
    "load_corpus_dir",
    "load_corpus_jsonl",
    "load_stopwords",
    "tokenize",
    # lda
    "GibbsLda",
    "LdaConfig",
    "TopicModel",
    "log_likelihood",
    "train",
    # ensemble
    "Ensemble",
    "EnsembleSpec",
    "TopicRef",
    "generate",
    "preset",
    # mallet
    "MalletParseError",
    "MalletStructureError",
    "export_mallet",
    "import_mallet",
    "parse_doc_topics",
    "parse_topic_word_weights",
    # metrics
    "DegenerateMatchError",
    "InfiniteDivergenceError",
    "MatchDistribution",
    "SimilarityMatrix",
    "UncertaintyRecord",
    "compute_all",
    "cosine_similarity",
    "existence_uncertainty",
    "js_divergence",
    "kl_divergence",
    "match_distribution",
    "matching_uncertainty",
    "matching_uncertainty_pair",
    "similarity_matrix",
    # embedding
    "Embedding",
    "EmbeddingConfig",
    "SimilarityTsne",
    "embed_similarity",
    "kl_objective",
    "similarity_to_distance",
    "tsne",
    # analysis
    "FilterSpec",
    "MeasureSummary",
    "StabilityClass",
    "TopicGroup",
    "apply_filter",
    "classify_stability",
    "completeness",
    "convex_hull",
    "correlation",
    "ensemble_summary",
    "make_group",
    # docviews
    "CapabilityError",
    "DocRanking",
    "HighlightedDocument",
    "HighlightSpan",
    "highlight",
    "rank_documents",
    # project + server
    "CorpusRef",
    "Project",
    "ProjectFormatError",
    "ViewConfig",
    "create_project",
    "open_project",
    "save_project",
    "create_app",
    # synthetic benchmark
    "SyntheticCorpus",
    "SyntheticSpec",
    "generate_corpus",
    "run_experiment",
]
