"""evverkit: build balanced three-class news corpora, train evidence
classifiers with domain credibility scores, and filter web evidence for
fact-checking pipelines."""

from .baselines import (
    BaselineModel,
    evaluate_baseline,
    fit_decision_tree,
    fit_logreg,
    fit_mlp_baseline,
    fit_naive_bayes,
)
from .dcs import (
    DcsCache,
    DcsRecord,
    MbfcClient,
    encode_dcs,
    normalize_dcs,
)
from .features import (
    EmbeddingSet,
    Vocabulary,
    count_vector,
    fit_vocabulary,
    load_embeddings,
    save_embeddings,
    tfidf_vector,
    tokenize,
)
from .filtering import (
    AuditReport,
    Prediction,
    audit,
    classify_evidence,
    clean_evidence,
    filter_credible,
)
from .ingest import (
    ExtractionRule,
    SourceAdapterConfig,
    fetch_article,
    ingest_source,
    title_from_url,
)
from .network import (
    EvverConfig,
    EvverModel,
    GridSpec,
    cross_validate,
    evaluate,
    forward,
    grad_check,
    grid_search,
    load_model,
    save_model,
    train,
)
from .pipeline import (
    BalancePlan,
    TopicMap,
    balance,
    build_corpus,
    consolidate_topic,
    corpus_stats,
    dedup,
    derive_balance_plan,
    filter_years,
    load_topic_map,
    split,
)
from .types import (
    Article,
    ClassLabel,
    DatasetSplit,
    EvidenceItem,
    label_from_code,
)

__version__ = "0.1.0"

__all__ = [
    "Article",
    "AuditReport",
    "BalancePlan",
    "BaselineModel",
    "ClassLabel",
    "DatasetSplit",
    "DcsCache",
    "DcsRecord",
    "EmbeddingSet",
    "EvidenceItem",
    "EvverConfig",
    "EvverModel",
    "ExtractionRule",
    "GridSpec",
    "MbfcClient",
    "Prediction",
    "SourceAdapterConfig",
    "TopicMap",
    "Vocabulary",
    "audit",
    "balance",
    "build_corpus",
    "classify_evidence",
    "clean_evidence",
    "consolidate_topic",
    "corpus_stats",
    "count_vector",
    "cross_validate",
    "dedup",
    "derive_balance_plan",
    "encode_dcs",
    "evaluate",
    "evaluate_baseline",
    "fetch_article",
    "filter_credible",
    "filter_years",
    "fit_decision_tree",
    "fit_logreg",
    "fit_mlp_baseline",
    "fit_naive_bayes",
    "fit_vocabulary",
    "forward",
    "grad_check",
    "grid_search",
    "ingest_source",
    "label_from_code",
    "load_embeddings",
    "load_model",
    "load_topic_map",
    "normalize_dcs",
    "save_embeddings",
    "save_model",
    "split",
    "tfidf_vector",
    "title_from_url",
    "tokenize",
    "train",
]
