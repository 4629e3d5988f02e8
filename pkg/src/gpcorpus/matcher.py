"""Dictionary NER engine.

Compiles a lexicon into an Aho-Corasick automaton and annotates documents
with typed, identifier-resolved spans. Matching is leftmost-longest at
token boundaries. The first pass treats slash, backslash and dash as
in-token joiners (so ``Bax/Bcl-2`` is one token); a second recovery pass
demotes those joiners to boundaries to pick up mentions glued to them,
without disturbing spans already annotated.

Compiled matchers are immutable and safe to share across worker threads.
"""

from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import ConfigError
from .lexicon import EntityType, Lexicon
from .tsvio import escape_field

log = logging.getLogger(__name__)

# Joiner characters keep a token together in the first pass; the recovery
# pass treats them as boundaries instead.
JOINER_CHARS = frozenset("/\\-")


def fold_char(c: str) -> str:
    # Length-preserving case fold: offsets into the folded text must map
    # one-to-one onto the original, so multi-char expansions keep the
    # original character.
    folded = c.casefold()
    if len(folded) == 1:
        return folded
    lowered = c.lower()
    return lowered if len(lowered) == 1 else c


def fold_text(text: str) -> str:
    return "".join(fold_char(c) for c in text)


@dataclass(frozen=True)
class Annotation:
    """One entity mention: half-open code-point span into the document text."""

    doc_id: str
    entity_type: EntityType
    start: int
    end: int
    surface: str
    entity_id: str


@dataclass(frozen=True)
class MatcherOptions:
    case_fold: bool = True


class CompiledMatcher:
    """Aho-Corasick automaton over a lexicon's surface forms.

    The automaton reports every raw substring occurrence; token-boundary
    filtering and leftmost-longest selection happen in :func:`annotate`.
    Compilation is a pure function of (lexicon, options).
    """

    def __init__(self, lexicon: Lexicon, options: MatcherOptions = MatcherOptions()):
        if len(lexicon) == 0:
            raise ConfigError("cannot compile a matcher from an empty lexicon")
        self.entity_type = lexicon.entity_type
        self.case_fold = options.case_fold
        self._children: list[dict[str, int]] = [{}]
        # terminal[node] = (pattern length, entity_id) or None
        self._terminal: list[tuple[int, str] | None] = [None]
        canonical_at: dict[int, bool] = {}
        for entry in lexicon:
            pattern = fold_text(entry.surface) if self.case_fold else entry.surface
            node = 0
            for ch in pattern:
                nxt = self._children[node].get(ch)
                if nxt is None:
                    nxt = len(self._children)
                    self._children.append({})
                    self._terminal.append(None)
                    self._children[node][ch] = nxt
                node = nxt
            current = self._terminal[node]
            if current is None:
                self._terminal[node] = (len(pattern), entry.entity_id)
                canonical_at[node] = entry.canonical
            elif current[1] != entry.entity_id:
                # Two surfaces folding to the same pattern with different ids:
                # canonical wins, otherwise first compiled stays.
                if entry.canonical and not canonical_at[node]:
                    log.warning("folded surface %r: canonical id %s replaces %s",
                                pattern, entry.entity_id, current[1])
                    self._terminal[node] = (len(pattern), entry.entity_id)
                    canonical_at[node] = True
                else:
                    log.warning("folded surface %r: keeping id %s, dropping %s",
                                pattern, current[1], entry.entity_id)
        self._build_links()

    def _build_links(self) -> None:
        n = len(self._children)
        self._fail = [0] * n
        self._emit = [0] * n  # nearest terminal node on the fail chain, inclusive
        queue: list[int] = []
        for child in self._children[0].values():
            queue.append(child)
        head = 0
        while head < len(queue):
            node = queue[head]
            head += 1
            fail = self._fail[node]
            self._emit[node] = node if self._terminal[node] else self._emit[fail]
            for ch, child in self._children[node].items():
                f = fail
                while f and ch not in self._children[f]:
                    f = self._fail[f]
                self._fail[child] = self._children[f].get(ch, 0)
                queue.append(child)

    def raw_matches(self, text: str) -> Iterator[tuple[int, int, str]]:
        """Yield every (start, end, entity_id) substring occurrence."""
        haystack = fold_text(text) if self.case_fold else text
        children, fail, emit, terminal = self._children, self._fail, self._emit, self._terminal
        node = 0
        for i, ch in enumerate(haystack):
            while node and ch not in children[node]:
                node = fail[node]
            node = children[node].get(ch, 0)
            t = emit[node]
            while t:
                length, entity_id = terminal[t]
                yield i + 1 - length, i + 1, entity_id
                t = emit[fail[t]]


def compile_matcher(lexicon: Lexicon, options: MatcherOptions = MatcherOptions()) -> CompiledMatcher:
    return CompiledMatcher(lexicon, options)


def _is_word_char(c: str, joiners: frozenset[str]) -> bool:
    return c.isalnum() or c == "_" or c in joiners


def _at_token_boundaries(text: str, start: int, end: int, joiners: frozenset[str]) -> bool:
    if start > 0 and _is_word_char(text[start - 1], joiners):
        return False
    if end < len(text) and _is_word_char(text[end], joiners):
        return False
    return True


def _select_spans(
    candidates: Iterable[tuple[int, int, str]],
    taken: Sequence[tuple[int, int]] = (),
) -> list[tuple[int, int, str]]:
    """Greedy leftmost-longest selection, skipping anything that overlaps
    an already-taken span. ``taken`` must be non-overlapping."""
    blocked = sorted(taken)
    starts = [s for s, _ in blocked]

    def overlaps_taken(s: int, e: int) -> bool:
        # Rightmost blocked interval starting before e is the only one
        # that can reach past s (blocked intervals do not overlap).
        idx = bisect.bisect_left(starts, e)
        return idx > 0 and blocked[idx - 1][1] > s

    chosen: list[tuple[int, int, str]] = []
    for s, e, entity_id in sorted(candidates, key=lambda m: (m[0], -m[1])):
        if chosen and s < chosen[-1][1]:
            continue
        if overlaps_taken(s, e):
            continue
        chosen.append((s, e, entity_id))
    return chosen


def _candidates(matcher: CompiledMatcher, text: str, joiners: frozenset[str]) -> list[tuple[int, int, str]]:
    return [
        (s, e, eid)
        for s, e, eid in matcher.raw_matches(text)
        if _at_token_boundaries(text, s, e, joiners)
    ]


def annotate(doc, matcher: CompiledMatcher, entity_type: EntityType | None = None) -> list[Annotation]:
    """Annotate a document: leftmost-longest non-overlapping matches at
    token boundaries, sorted by start offset."""
    if not doc.text:
        return []
    etype = entity_type if entity_type is not None else matcher.entity_type
    spans = _select_spans(_candidates(matcher, doc.text, JOINER_CHARS))
    return [
        Annotation(doc.doc_id, etype, s, e, doc.text[s:e], eid)
        for s, e, eid in spans
    ]


def recover_adjacent(doc, matcher: CompiledMatcher, existing: Sequence[Annotation],
                     entity_type: EntityType | None = None) -> list[Annotation]:
    """Second pass with slash/backslash/dash treated as token boundaries.

    Returns only new annotations that do not overlap ``existing`` (the
    first-pass output for this document); merge with
    :func:`merge_annotations` to keep the span invariants.
    """
    if not doc.text or not any(c in doc.text for c in JOINER_CHARS):
        return []
    etype = entity_type if entity_type is not None else matcher.entity_type
    taken = [(a.start, a.end) for a in existing]
    spans = _select_spans(_candidates(matcher, doc.text, frozenset()), taken)
    return [
        Annotation(doc.doc_id, etype, s, e, doc.text[s:e], eid)
        for s, e, eid in spans
    ]


def merge_annotations(existing: Sequence[Annotation], recovered: Sequence[Annotation]) -> list[Annotation]:
    """Merge first-pass and recovered annotations, sorted by start.

    Raises ValueError if the result would overlap; recover_adjacent output
    never does.
    """
    merged = sorted([*existing, *recovered], key=lambda a: (a.start, a.end))
    for prev, cur in zip(merged, merged[1:]):
        if cur.start < prev.end:
            raise ValueError(f"overlapping annotations at {prev.start}-{prev.end} and {cur.start}-{cur.end}")
    return merged


def report_unmatched(doc, spans: Iterable[tuple[int, int]], lexicon: Lexicon,
                     case_fold: bool = True) -> list[tuple[str, str, int, int]]:
    """Rows (doc_id, surface, start, end) for imported spans whose surface
    does not resolve against the lexicon.

    Only externally imported annotation streams can produce such rows; the
    internal matcher resolves everything it emits.
    """
    if case_fold:
        known = {fold_text(s) for s in lexicon.surfaces()}
    else:
        known = set(lexicon.surfaces())
    rows = []
    for start, end in spans:
        surface = doc.text[start:end]
        key = fold_text(surface) if case_fold else surface
        if key not in known:
            rows.append((doc.doc_id, surface, start, end))
    return rows


def write_unmatched(rows: Iterable[tuple[str, str, int, int]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc_id, surface, start, end in rows:
            fh.write(f"{escape_field(doc_id)}\t{escape_field(surface)}\t{start}\t{end}\n")


def write_annotations(annotations: Iterable[Annotation], path) -> None:
    """Annotations export: doc_id, entity_type, start, end, surface, entity_id."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for a in annotations:
            fh.write(
                f"{escape_field(a.doc_id)}\t{a.entity_type.value}\t{a.start}\t{a.end}"
                f"\t{escape_field(a.surface)}\t{escape_field(a.entity_id)}\n"
            )
