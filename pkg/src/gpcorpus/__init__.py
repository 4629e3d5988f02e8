"""gpcorpus: silver-standard gene-phenotype relation corpus builder.

Annotates abstracts with gene and phenotype mentions by dictionary
matching, pairs them by sentence co-occurrence, labels the pairs against a
gold relation file (distant supervision), and ships the curation and
evaluation harness that measures the result.
"""

from .errors import (
    ConfigError,
    FormatError,
    GPCorpusError,
    IntegrityError,
    PayloadError,
    StageError,
    TransportError,
)
from .ingest import Document, QuerySpec, fetch_abstracts, filter_documents
from .lexicon import (
    EntityType,
    GoldRelationSet,
    Lexicon,
    LexiconEntry,
    load_gold_relations,
    load_lexicon,
    load_ontology_terms,
    merge_synonyms,
)
from .matcher import (
    Annotation,
    CompiledMatcher,
    MatcherOptions,
    annotate,
    compile_matcher,
    merge_annotations,
    recover_adjacent,
    report_unmatched,
)
from .pipeline import (
    CandidateRelation,
    CorpusStats,
    PipelineConfig,
    RelationLabel,
    Sentence,
    extract_pairs,
    filter_both_types,
    label_relations,
    run_pipeline,
    split_sentences,
)
from .evaluation import (
    ConfusionCounts,
    CurationAssignment,
    CurationMark,
    Mark,
    MetricsReport,
    baseline_cooccurrence,
    compute_prf,
    corpus_stats,
    inter_curator_agreement,
    sample_for_curation,
    score_curation,
)

__version__ = "0.1.0"
