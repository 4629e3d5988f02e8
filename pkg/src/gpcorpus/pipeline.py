"""Per-document corpus assembly.

Splits abstracts into sentences, pairs gene and phenotype mentions that
co-occur in one sentence, labels each pair Known/Unknown by membership in
the gold relation set, and emits the corpus TSV. Documents are independent
work units; emission sorts the buffered rows so output is byte-identical
regardless of processing order or worker count.
"""

from __future__ import annotations

import dataclasses
import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from . import ingest
from .errors import FormatError, StageError
from .lexicon import (
    DEFAULT_MIN_SYNONYM_LEN,
    EntityType,
    GoldRelationSet,
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
)
from .tsvio import escape_field, iter_rows

log = logging.getLogger(__name__)

_TERMINATORS = frozenset(".!?")

# Trailing-period tokens that do not end a sentence. Checked case-insensitively
# with a word boundary on the left.
ABBREVIATIONS = frozenset({
    "e.g.", "i.e.", "et al.", "al.", "fig.", "figs.", "eq.", "eqs.",
    "ref.", "refs.", "vs.", "cf.", "ca.", "approx.", "resp.", "no.",
    "nos.", "dr.", "prof.", "inc.", "jr.", "sr.", "st.",
})


class RelationLabel(str, Enum):
    KNOWN = "Known"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    index: int
    start: int
    end: int
    text: str


@dataclass(frozen=True)
class CandidateRelation:
    """One (gene, phenotype) pair co-occurring in one sentence."""

    doc_id: str
    sentence_index: int
    gene: Annotation
    phenotype: Annotation
    label: RelationLabel | None = None

    @property
    def uid(self) -> str:
        return relation_uid(self.doc_id, self.sentence_index,
                            self.gene.entity_id, self.phenotype.entity_id)


def relation_uid(doc_id: str, sentence_index: int, gene_id: str, phenotype_id: str) -> str:
    """Stable 16-hex-char identifier for a candidate relation."""
    key = f"{doc_id}\t{sentence_index}\t{gene_id}\t{phenotype_id}"
    return hashlib.sha1(key.encode("utf-8")).hexdigest()[:16]


def _is_abbreviation(lowered: str, period_end: int) -> bool:
    head = lowered[:period_end]
    for abbrev in ABBREVIATIONS:
        if not head.endswith(abbrev):
            continue
        before = period_end - len(abbrev) - 1
        if before < 0 or not lowered[before].isalpha():
            return True
    return False


def split_sentences(doc) -> list[Sentence]:
    """Rule-based segmentation on ., !, ? followed by whitespace and an
    uppercase letter or digit, with an abbreviation exception list.

    Sentence offsets index the original document text; each sentence's
    ``text`` is the exact slice ``doc.text[start:end]``.
    """
    text = doc.text
    lowered = text.lower()
    n = len(text)
    break_ends: list[int] = []
    i = 0
    while i < n:
        if text[i] not in _TERMINATORS:
            i += 1
            continue
        j = i
        while j + 1 < n and text[j + 1] in _TERMINATORS:
            j += 1
        run_end = j + 1
        if _breaks_after(text, lowered, i, run_end):
            break_ends.append(run_end)
        i = run_end
    sentences: list[Sentence] = []
    cursor = 0
    for end in [*break_ends, n]:
        start = cursor
        while start < end and text[start].isspace():
            start += 1
        trimmed = end
        while trimmed > start and text[trimmed - 1].isspace():
            trimmed -= 1
        if trimmed > start:
            sentences.append(Sentence(doc.doc_id, len(sentences), start, trimmed,
                                      text[start:trimmed]))
        cursor = end
    return sentences


def _breaks_after(text: str, lowered: str, run_start: int, run_end: int) -> bool:
    n = len(text)
    k = run_end
    while k < n and text[k].isspace():
        k += 1
    if k == n:
        return True
    if k == run_end:
        # No whitespace after the terminator: "3.5", "e.coli", "?!)".
        return False
    if not (text[k].isupper() or text[k].isdigit()):
        return False
    single_period = run_end - run_start == 1 and text[run_start] == "."
    if single_period and _is_abbreviation(lowered, run_end):
        return False
    return True


def filter_both_types(doc, annotations: Sequence[Annotation]) -> bool:
    """True iff the document has at least one gene and one phenotype mention."""
    has_gene = any(a.entity_type is EntityType.GENE for a in annotations)
    has_phenotype = any(a.entity_type is EntityType.PHENOTYPE for a in annotations)
    return has_gene and has_phenotype


def extract_pairs(doc, sentences: Sequence[Sentence],
                  annotations: Sequence[Annotation]) -> list[CandidateRelation]:
    """Sentence-local gene x phenotype Cartesian product, deduplicated to one
    candidate per (sentence, gene_id, phenotype_id) keeping earliest spans."""
    candidates: list[CandidateRelation] = []
    for sent in sentences:
        genes = sorted(
            (a for a in annotations
             if a.entity_type is EntityType.GENE and sent.start <= a.start and a.end <= sent.end),
            key=lambda a: a.start,
        )
        phenotypes = sorted(
            (a for a in annotations
             if a.entity_type is EntityType.PHENOTYPE and sent.start <= a.start and a.end <= sent.end),
            key=lambda a: a.start,
        )
        seen: set[tuple[str, str]] = set()
        for gene in genes:
            for phenotype in phenotypes:
                key = (gene.entity_id, phenotype.entity_id)
                if key in seen:
                    continue
                seen.add(key)
                candidates.append(CandidateRelation(doc.doc_id, sent.index, gene, phenotype))
    return candidates


def label_relations(candidates: Iterable[CandidateRelation],
                    gold: GoldRelationSet) -> list[CandidateRelation]:
    """Distant supervision: Known iff the id pair is in the gold set."""
    labeled = [
        dataclasses.replace(
            c,
            label=RelationLabel.KNOWN
            if (c.gene.entity_id, c.phenotype.entity_id) in gold
            else RelationLabel.UNKNOWN,
        )
        for c in candidates
    ]
    known = sum(1 for c in labeled if c.label is RelationLabel.KNOWN)
    log.info("labeled %d candidates: %d Known, %d Unknown",
             len(labeled), known, len(labeled) - known)
    return labeled


CORPUS_COLUMNS = [
    "doc_id", "sentence_index", "sentence_text",
    "gene_surface", "gene_id", "gene_start", "gene_end",
    "phenotype_surface", "phenotype_id", "phenotype_start", "phenotype_end",
    "label", "uid",
]


def corpus_row(relation: CandidateRelation, sentence: Sentence) -> list[str]:
    """One corpus TSV row; offsets are sentence-relative code points, half-open."""
    g, p = relation.gene, relation.phenotype
    return [
        escape_field(relation.doc_id),
        str(relation.sentence_index),
        escape_field(sentence.text),
        escape_field(g.surface), escape_field(g.entity_id),
        str(g.start - sentence.start), str(g.end - sentence.start),
        escape_field(p.surface), escape_field(p.entity_id),
        str(p.start - sentence.start), str(p.end - sentence.start),
        relation.label.value if relation.label else "",
        relation.uid,
    ]


def write_corpus(rows: Iterable[list[str]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(CORPUS_COLUMNS) + "\n")
        for row in rows:
            fh.write("\t".join(row) + "\n")


@dataclass(frozen=True)
class PipelineConfig:
    documents_path: str | Path
    gene_lexicon_path: str | Path
    ontology_terms_path: str | Path
    gold_relations_path: str | Path
    output_path: str | Path
    gene_synonyms_path: str | Path | None = None
    min_len: int = DEFAULT_MIN_SYNONYM_LEN
    case_fold: bool = True
    workers: int = 1


@dataclass(frozen=True)
class CorpusStats:
    """Run summary mirroring the abstract/annotation/relation count columns."""

    abstracts_ingested: int
    abstracts_kept: int
    gene_annotations: int
    phenotype_annotations: int
    known: int
    unknown: int
    total: int

    def relations_per_abstract(self) -> float:
        return self.total / self.abstracts_kept if self.abstracts_kept else 0.0


@dataclass(frozen=True)
class _DocResult:
    kept: bool
    gene_count: int = 0
    phenotype_count: int = 0
    sentences: tuple[Sentence, ...] = ()
    candidates: tuple[CandidateRelation, ...] = ()


def _process_document(doc, gene_matcher: CompiledMatcher,
                      phenotype_matcher: CompiledMatcher) -> _DocResult:
    genes = annotate(doc, gene_matcher)
    genes = merge_annotations(genes, recover_adjacent(doc, gene_matcher, genes))
    phenotypes = annotate(doc, phenotype_matcher)
    phenotypes = merge_annotations(phenotypes, recover_adjacent(doc, phenotype_matcher, phenotypes))
    annotations = [*genes, *phenotypes]
    if not filter_both_types(doc, annotations):
        return _DocResult(kept=False)
    sentences = split_sentences(doc)
    candidates = extract_pairs(doc, sentences, annotations)
    return _DocResult(True, len(genes), len(phenotypes), tuple(sentences), tuple(candidates))


def run_pipeline(config: PipelineConfig) -> CorpusStats:
    """End to end: ingest, annotate both types, recover, filter, segment,
    pair, label, emit. Returns aggregate counts; failures carry the stage."""
    try:
        documents = ingest.filter_documents(ingest.load_documents(config.documents_path))
    except Exception as exc:
        raise StageError("ingest", exc) from exc

    try:
        gene_lexicon = load_lexicon(config.gene_lexicon_path, EntityType.GENE)
        if config.gene_synonyms_path:
            gene_lexicon = merge_synonyms(gene_lexicon, config.gene_synonyms_path, config.min_len)
        term_lexicon = load_ontology_terms(config.ontology_terms_path)
        gold = load_gold_relations(config.gold_relations_path)
        options = MatcherOptions(case_fold=config.case_fold)
        gene_matcher = compile_matcher(gene_lexicon, options)
        phenotype_matcher = compile_matcher(term_lexicon, options)
    except Exception as exc:
        raise StageError("lexicon", exc) from exc

    try:
        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                results = list(pool.map(
                    lambda d: _process_document(d, gene_matcher, phenotype_matcher), documents))
        else:
            results = [_process_document(d, gene_matcher, phenotype_matcher) for d in documents]
    except Exception as exc:
        raise StageError("annotate", exc) from exc

    kept = [r for r in results if r.kept]
    candidates = [c for r in kept for c in r.candidates]
    try:
        labeled = label_relations(candidates, gold)
    except Exception as exc:
        raise StageError("label", exc) from exc

    try:
        sentences_by_key = {(s.doc_id, s.index): s for r in kept for s in r.sentences}
        ordered = sorted(
            labeled,
            key=lambda c: (c.doc_id, c.sentence_index, c.gene.start, c.phenotype.start),
        )
        write_corpus((corpus_row(c, sentences_by_key[(c.doc_id, c.sentence_index)])
                      for c in ordered), config.output_path)
    except Exception as exc:
        raise StageError("emit", exc) from exc

    known = sum(1 for c in labeled if c.label is RelationLabel.KNOWN)
    return CorpusStats(
        abstracts_ingested=len(documents),
        abstracts_kept=len(kept),
        gene_annotations=sum(r.gene_count for r in kept),
        phenotype_annotations=sum(r.phenotype_count for r in kept),
        known=known,
        unknown=len(labeled) - known,
        total=len(labeled),
    )


def load_corpus_labels(path) -> dict[str, RelationLabel]:
    """uid -> label map from a corpus TSV (header required)."""
    labels: dict[str, RelationLabel] = {}
    for line_no, cols in iter_rows(path):
        if cols == CORPUS_COLUMNS:
            continue
        if len(cols) != len(CORPUS_COLUMNS):
            raise FormatError(path, line_no,
                              f"expected {len(CORPUS_COLUMNS)} columns, got {len(cols)}")
        labels[cols[12]] = RelationLabel(cols[11])
    return labels
