"""Curation sampling, confusion-matrix scoring, agreement, and the
co-occurrence baseline.

Metric arithmetic is exact: precision, recall and F-measure are kept as
rationals and rounded half-up only for display, so the reported 4-decimal
values are reproducible to the digit.
"""

from __future__ import annotations

import json
import logging
import random
from collections import Counter
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, localcontext
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, FormatError, IntegrityError
from .pipeline import CORPUS_COLUMNS, RelationLabel
from .tsvio import escape_field, iter_rows, unescape_field

log = logging.getLogger(__name__)


class Mark(str, Enum):
    CORRECT = "C"
    INCORRECT = "I"
    UNCERTAIN = "U"


@dataclass(frozen=True)
class CurationMark:
    curator: str
    relation_uid: str
    mark: Mark
    timestamp: str = ""
    note: str = ""


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int
    excluded_uncertain: int = 0

    def scored(self) -> int:
        return self.tp + self.fp + self.fn + self.tn + self.excluded_uncertain


def round_half_up(value: Fraction, places: int = 4) -> float:
    with localcontext() as ctx:
        ctx.prec = 50
        dec = Decimal(value.numerator) / Decimal(value.denominator)
        return float(dec.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP))


def format_metric(value: Fraction, places: int = 4) -> str:
    return f"{round_half_up(value, places):.{places}f}"


@dataclass(frozen=True)
class MetricsReport:
    """Precision/recall/F as exact rationals in [0, 1].

    ``degenerate`` names the metrics whose denominator was zero; those are
    defined as 0 and flagged rather than raising.
    """

    precision: Fraction
    recall: Fraction
    f_measure: Fraction
    degenerate: tuple[str, ...] = ()

    def rounded(self, places: int = 4) -> tuple[float, float, float]:
        return (round_half_up(self.precision, places),
                round_half_up(self.recall, places),
                round_half_up(self.f_measure, places))

    def formatted(self, places: int = 4) -> str:
        return (f"P={format_metric(self.precision, places)} "
                f"R={format_metric(self.recall, places)} "
                f"F={format_metric(self.f_measure, places)}")


def compute_prf(counts: ConfusionCounts) -> MetricsReport:
    """precision = tp/(tp+fp), recall = tp/(tp+fn), F = 2PR/(P+R)."""
    degenerate = []
    if counts.tp + counts.fp:
        precision = Fraction(counts.tp, counts.tp + counts.fp)
    else:
        precision = Fraction(0)
        degenerate.append("precision")
    if counts.tp + counts.fn:
        recall = Fraction(counts.tp, counts.tp + counts.fn)
    else:
        recall = Fraction(0)
        degenerate.append("recall")
    if precision + recall:
        f_measure = 2 * precision * recall / (precision + recall)
    else:
        f_measure = Fraction(0)
        degenerate.append("f_measure")
    return MetricsReport(precision, recall, f_measure, tuple(degenerate))


def _as_label(value) -> RelationLabel:
    return value if isinstance(value, RelationLabel) else RelationLabel(value)


def score_curation(marks: Sequence[CurationMark],
                   corpus_labels: Mapping[str, RelationLabel | str],
                   ) -> tuple[ConfusionCounts, MetricsReport]:
    """Score curator judgments against the pipeline's labels.

    TP: Known marked C. FP: Known marked I. FN: Unknown marked I.
    TN: Unknown marked C. U marks are excluded from the matrix but counted.
    """
    seen: set[tuple[str, str]] = set()
    tp = fp = fn = tn = uncertain = 0
    for m in marks:
        key = (m.curator, m.relation_uid)
        if key in seen:
            raise IntegrityError(f"duplicate mark for curator={m.curator} uid={m.relation_uid}")
        seen.add(key)
        if m.relation_uid not in corpus_labels:
            raise IntegrityError(f"mark references unknown relation uid {m.relation_uid}")
        if m.mark is Mark.UNCERTAIN:
            uncertain += 1
            continue
        known = _as_label(corpus_labels[m.relation_uid]) is RelationLabel.KNOWN
        if m.mark is Mark.CORRECT:
            tp, tn = (tp + 1, tn) if known else (tp, tn + 1)
        else:
            fp, fn = (fp + 1, fn) if known else (fp, fn + 1)
    counts = ConfusionCounts(tp, fp, fn, tn, uncertain)
    return counts, compute_prf(counts)


def dedupe_majority(marks: Sequence[CurationMark]) -> list[CurationMark]:
    """Collapse multi-curator marks to one per uid by majority vote; ties
    (including C/I/U three-way splits) resolve to U."""
    by_uid: dict[str, list[CurationMark]] = {}
    for m in marks:
        by_uid.setdefault(m.relation_uid, []).append(m)
    result = []
    for uid, group in by_uid.items():
        if len(group) == 1:
            result.append(group[0])
            continue
        tally = Counter(m.mark for m in group).most_common()
        winner = tally[0][0] if len(tally) == 1 or tally[0][1] > tally[1][1] else Mark.UNCERTAIN
        result.append(CurationMark(
            curator="consensus",
            relation_uid=uid,
            mark=winner,
            timestamp=max(m.timestamp for m in group),
        ))
    return result


def inter_curator_agreement(marks: Sequence[CurationMark],
                            overlap_set: Iterable[str]) -> float:
    """Mean over overlap items of agreeing curator pairs / total pairs.

    Marks are compared as raw C/I/U categories. Items marked by fewer than
    two curators carry no pairs and are skipped; if that leaves nothing,
    the two-curator precondition is violated.
    """
    overlap = set(overlap_set)
    by_item: dict[str, dict[str, Mark]] = {uid: {} for uid in overlap}
    for m in marks:
        if m.relation_uid not in overlap:
            continue
        if m.curator in by_item[m.relation_uid]:
            raise IntegrityError(f"duplicate mark for curator={m.curator} uid={m.relation_uid}")
        by_item[m.relation_uid][m.curator] = m.mark
    scores = []
    for uid, curator_marks in by_item.items():
        n = len(curator_marks)
        if n < 2:
            continue
        tally = Counter(curator_marks.values())
        agreeing = sum(c * (c - 1) // 2 for c in tally.values())
        scores.append(Fraction(agreeing, n * (n - 1) // 2))
    if not scores:
        raise ConfigError("agreement needs marks from at least 2 curators on the overlap set")
    return float(sum(scores) / len(scores))


@dataclass(frozen=True)
class CurationAssignment:
    """Per-curator uid lists plus the shared overlap subset."""

    assignments: dict[str, list[str]]
    overlap_set: list[str]
    seed: int

    def all_uids(self) -> set[str]:
        return {uid for uids in self.assignments.values() for uid in uids}


SAMPLING_IDENTITY = "n_total = overlap + n_curators * (per_curator - overlap)"


def sample_for_curation(corpus_uids: Iterable[str], n_total: int, n_curators: int,
                        per_curator: int, overlap: int, seed: int,
                        curators: Sequence[str] | None = None) -> CurationAssignment:
    """Seeded uniform sample without replacement, split into per-curator
    lists that all share the first ``overlap`` sampled relations."""
    if n_curators < 1:
        raise ConfigError("n_curators must be >= 1")
    if not 0 <= overlap <= per_curator:
        raise ConfigError("overlap must satisfy 0 <= overlap <= per_curator")
    if n_total != overlap + n_curators * (per_curator - overlap):
        raise ConfigError(
            f"sampling parameters violate {SAMPLING_IDENTITY}: "
            f"{n_total} != {overlap} + {n_curators} * ({per_curator} - {overlap})"
        )
    unique = sorted(set(corpus_uids))
    if len(unique) < n_total:
        raise ConfigError(f"corpus has {len(unique)} relations, need {n_total}")
    if curators is None:
        curators = [f"curator{i}" for i in range(1, n_curators + 1)]
    elif len(curators) != n_curators:
        raise ConfigError(f"got {len(curators)} curator names for n_curators={n_curators}")
    sampled = random.Random(seed).sample(unique, n_total)
    shared = sampled[:overlap]
    own = per_curator - overlap
    assignments = {
        name: [*shared, *sampled[overlap + i * own: overlap + (i + 1) * own]]
        for i, name in enumerate(curators)
    }
    return CurationAssignment(assignments, list(shared), seed)


def save_assignment(assignment: CurationAssignment, path) -> None:
    payload = {
        "seed": assignment.seed,
        "overlap_set": assignment.overlap_set,
        "assignments": assignment.assignments,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_assignment(path) -> CurationAssignment:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return CurationAssignment(
        assignments={k: list(v) for k, v in payload["assignments"].items()},
        overlap_set=list(payload["overlap_set"]),
        seed=int(payload["seed"]),
    )


def baseline_cooccurrence(test_labels: Sequence[RelationLabel | str]) -> MetricsReport:
    """All-true baseline: predict Known for every candidate. Recall is 1
    whenever the test set contains a Known relation; precision equals the
    Known fraction."""
    if not test_labels:
        raise ConfigError("baseline needs a non-empty test set")
    known = sum(1 for l in test_labels if _as_label(l) is RelationLabel.KNOWN)
    counts = ConfusionCounts(tp=known, fp=len(test_labels) - known, fn=0, tn=0)
    return compute_prf(counts)


@dataclass(frozen=True)
class CorpusFileStats:
    """Counts recomputed from a corpus TSV. Annotation counts cover the
    distinct spans that participate in at least one emitted relation."""

    abstracts: int
    gene_annotations: int
    phenotype_annotations: int
    known: int
    unknown: int

    @property
    def total(self) -> int:
        return self.known + self.unknown


def corpus_stats(path) -> CorpusFileStats:
    doc_ids: set[str] = set()
    genes: set[tuple] = set()
    phenotypes: set[tuple] = set()
    known = unknown = 0
    for line_no, cols in iter_rows(path):
        if cols == CORPUS_COLUMNS:
            continue
        if len(cols) != len(CORPUS_COLUMNS):
            raise FormatError(path, line_no,
                              f"expected {len(CORPUS_COLUMNS)} columns, got {len(cols)}")
        doc_id, sent_idx = cols[0], cols[1]
        try:
            int(sent_idx), int(cols[5]), int(cols[6]), int(cols[9]), int(cols[10])
        except ValueError as exc:
            raise FormatError(path, line_no, f"non-integer offset column: {exc}") from exc
        if cols[11] == RelationLabel.KNOWN.value:
            known += 1
        elif cols[11] == RelationLabel.UNKNOWN.value:
            unknown += 1
        else:
            raise FormatError(path, line_no, f"unknown label {cols[11]!r}")
        doc_ids.add(doc_id)
        genes.add((doc_id, sent_idx, cols[5], cols[6], cols[4]))
        phenotypes.add((doc_id, sent_idx, cols[9], cols[10], cols[8]))
    return CorpusFileStats(len(doc_ids), len(genes), len(phenotypes), known, unknown)


MARKS_COLUMNS = ["curator", "relation_uid", "mark", "timestamp"]


def load_marks(path) -> list[CurationMark]:
    """Read a marks file (4 or 5 columns; the 5th is an optional note)."""
    marks = []
    for line_no, cols in iter_rows(path):
        if len(cols) not in (4, 5):
            raise FormatError(path, line_no, f"expected 4 or 5 columns, got {len(cols)}")
        try:
            mark = Mark(cols[2])
        except ValueError as exc:
            raise FormatError(path, line_no, f"mark must be C, I or U, got {cols[2]!r}") from exc
        marks.append(CurationMark(
            curator=cols[0],
            relation_uid=cols[1],
            mark=mark,
            timestamp=cols[3],
            note=unescape_field(cols[4]) if len(cols) == 5 else "",
        ))
    return marks


def append_mark(path, mark: CurationMark) -> None:
    """Append one record; the file stays a prefix-valid record stream."""
    line = "\t".join([
        escape_field(mark.curator),
        mark.relation_uid,
        mark.mark.value,
        mark.timestamp,
        escape_field(mark.note),
    ])
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        fh.write(line + "\n")
        fh.flush()


def collapse_last_write(marks: Sequence[CurationMark]) -> list[CurationMark]:
    """Resolve an append-only stream: the last record per (curator, uid) wins."""
    effective: dict[tuple[str, str], CurationMark] = {}
    for m in marks:
        effective[(m.curator, m.relation_uid)] = m
    return list(effective.values())
