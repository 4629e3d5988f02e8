"""Entity vocabularies: gene/phenotype lexicons and the gold relation set.

A lexicon maps surface forms (names, synonyms, ontology term labels) to
entity identifiers. Identifiers are opaque strings, so mixed namespaces
(numeric gene ids, ontology CURIEs, registry fallbacks) coexist without
special handling. Lexicons are immutable after load and safe to share
across worker threads.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from .errors import FormatError
from .tsvio import iter_rows

log = logging.getLogger(__name__)

DEFAULT_MIN_SYNONYM_LEN = 2

_TRUE_FLAGS = {"1", "true", "yes", "canonical"}
_FALSE_FLAGS = {"0", "false", "no", "synonym"}


class EntityType(str, Enum):
    GENE = "Gene"
    PHENOTYPE = "Phenotype"


@dataclass(frozen=True)
class LexiconEntry:
    surface: str
    entity_id: str
    canonical: bool = True


class Lexicon:
    """Surface form -> entity id map for one entity type.

    Surfaces are unique. When two rows claim the same surface with
    different ids, the canonical entry wins over a synonym; between peers
    the earlier row is kept and the collision is logged. This keeps loads
    deterministic without an external disambiguation score.
    """

    def __init__(self, entity_type: EntityType, entries: Iterable[LexiconEntry] = ()):
        self.entity_type = entity_type
        self._entries: dict[str, LexiconEntry] = {}
        for entry in entries:
            self._add(entry)

    def _add(self, entry: LexiconEntry) -> None:
        current = self._entries.get(entry.surface)
        if current is None:
            self._entries[entry.surface] = entry
            return
        if current.entity_id != entry.entity_id:
            if entry.canonical and not current.canonical:
                log.warning(
                    "surface %r: canonical id %s replaces synonym id %s",
                    entry.surface, entry.entity_id, current.entity_id,
                )
                self._entries[entry.surface] = entry
            else:
                log.warning(
                    "surface %r: keeping id %s, dropping colliding id %s",
                    entry.surface, current.entity_id, entry.entity_id,
                )
        elif entry.canonical and not current.canonical:
            # Same mapping seen as both name and synonym: record it as a name.
            self._entries[entry.surface] = entry

    def lookup(self, surface: str) -> str | None:
        entry = self._entries.get(surface)
        return entry.entity_id if entry else None

    def entry(self, surface: str) -> LexiconEntry | None:
        return self._entries.get(surface)

    def surfaces(self) -> Iterator[str]:
        return iter(self._entries)

    def ids(self) -> set[str]:
        return {e.entity_id for e in self._entries.values()}

    def __contains__(self, surface: str) -> bool:
        return surface in self._entries

    def __iter__(self) -> Iterator[LexiconEntry]:
        return iter(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)


@dataclass(frozen=True)
class GoldRelationSet:
    """Known (gene_id, phenotype_id) pairs used as the distant-supervision oracle."""

    pairs: frozenset[tuple[str, str]]

    def __contains__(self, pair: tuple[str, str]) -> bool:
        return tuple(pair) in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)


def _parse_flag(path, line_no: int, raw: str) -> bool:
    value = raw.strip().lower()
    if value in _TRUE_FLAGS:
        return True
    if value in _FALSE_FLAGS:
        return False
    raise FormatError(path, line_no, f"unrecognized canonical flag {raw!r}")


def load_lexicon(path, entity_type: EntityType) -> Lexicon:
    """Load a two- or three-column lexicon TSV: surface, entity_id[, canonical].

    Rows missing the id column raise FormatError with the line number.
    Duplicate (surface, id) rows collapse; conflicting ids follow the
    collision policy documented on Lexicon.
    """
    lexicon = Lexicon(entity_type)
    for line_no, cols in iter_rows(path):
        if len(cols) < 2:
            raise FormatError(path, line_no, "expected at least 2 tab-separated columns")
        surface, entity_id = cols[0].strip(), cols[1].strip()
        if not surface or not entity_id:
            raise FormatError(path, line_no, "empty surface or entity id")
        canonical = _parse_flag(path, line_no, cols[2]) if len(cols) > 2 and cols[2].strip() else True
        lexicon._add(LexiconEntry(surface, entity_id, canonical))
    if len(lexicon) == 0:
        log.warning("lexicon %s is empty", path)
    return lexicon


def merge_synonyms(base: Lexicon, synonyms_path, min_len: int = DEFAULT_MIN_SYNONYM_LEN) -> Lexicon:
    """Merge a synonym file into ``base`` and return the expanded lexicon.

    Each row maps a synonym surface to a canonical surface or entity id
    already present in ``base``. Synonyms shorter than ``min_len``
    characters are dropped (short symbols are a false-positive machine),
    and synonyms whose canonical reference cannot be resolved are skipped
    and reported.
    """
    if min_len < 1:
        raise ValueError("min_len must be >= 1")
    base_ids = base.ids()
    merged = Lexicon(base.entity_type, iter(base))
    added = skipped_short = skipped_unresolved = 0
    for line_no, cols in iter_rows(synonyms_path):
        if len(cols) < 2:
            raise FormatError(synonyms_path, line_no, "expected at least 2 tab-separated columns")
        synonym, ref = cols[0].strip(), cols[1].strip()
        if not synonym or not ref:
            raise FormatError(synonyms_path, line_no, "empty synonym or canonical reference")
        if len(synonym) < min_len:
            skipped_short += 1
            continue
        if ref in base_ids:
            entity_id = ref
        else:
            entity_id = base.lookup(ref)
        if entity_id is None:
            skipped_unresolved += 1
            log.warning("%s:%d: synonym %r references unknown canonical %r",
                        synonyms_path, line_no, synonym, ref)
            continue
        if synonym not in merged:
            added += 1
        merged._add(LexiconEntry(synonym, entity_id, canonical=False))
    log.info(
        "merged synonyms from %s: %d added, %d below min_len=%d, %d unresolved",
        synonyms_path, added, skipped_short, min_len, skipped_unresolved,
    )
    return merged


def load_ontology_terms(path) -> Lexicon:
    """Load a flattened ontology term file (term/synonym surface, CURIE id)."""
    return load_lexicon(path, EntityType.PHENOTYPE)


def load_gold_relations(path) -> GoldRelationSet:
    """Load the gold relations TSV (gene_id, phenotype_id) into a set of pairs."""
    pairs: set[tuple[str, str]] = set()
    for line_no, cols in iter_rows(path):
        if len(cols) != 2:
            raise FormatError(path, line_no, f"expected 2 tab-separated columns, got {len(cols)}")
        gene_id, phenotype_id = cols[0].strip(), cols[1].strip()
        if not gene_id or not phenotype_id:
            raise FormatError(path, line_no, "empty identifier")
        pairs.add((gene_id, phenotype_id))
    return GoldRelationSet(frozenset(pairs))
