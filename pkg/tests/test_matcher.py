import random

import pytest

from gpcorpus.errors import ConfigError
from gpcorpus.lexicon import EntityType, Lexicon, LexiconEntry
from gpcorpus.matcher import (
    MatcherOptions,
    annotate,
    compile_matcher,
    fold_text,
    merge_annotations,
    recover_adjacent,
    report_unmatched,
    write_unmatched,
)

from oracles import naive_annotate, random_lexicon, random_text

EXAMPLE_RECOVERY_TEXT = (
    "According to the morphological observations and DNA fragmentation assay, "
    "the MPS compound induced apoptosis in both cell lines, and also cause a "
    "significant increase in the expression of Bax/Bcl-2."
)


def make_lexicon(mapping, entity_type=EntityType.GENE, canonical=True):
    return Lexicon(entity_type, [
        LexiconEntry(surface, entity_id, canonical)
        for surface, entity_id in mapping.items()
    ])


class TestCompile:
    def test_recognizes_exactly_the_lexicon(self, make_doc):
        surfaces = {"ABC1": "1", "delta": "2", "X9": "3"}
        matcher = compile_matcher(make_lexicon(surfaces))
        doc = make_doc("ABC1 binds delta but not X9b; X9 yes, deltas no.")
        got = {(a.start, a.end, a.entity_id) for a in annotate(doc, matcher)}
        assert got == set(naive_annotate(doc.text, surfaces))
        assert {a.surface for a in annotate(doc, matcher)} == {"ABC1", "delta", "X9"}

    def test_prefix_pair_both_compiled(self, make_doc):
        matcher = compile_matcher(make_lexicon({"TP5": "a", "TP53": "b"}))
        doc = make_doc("TP53 and TP5")
        got = [(a.surface, a.start) for a in annotate(doc, matcher)]
        assert got == [("TP53", 0), ("TP5", 9)]

    def test_case_fold_option(self, make_doc):
        matcher = compile_matcher(make_lexicon({"BAX": "581"}))
        assert [a.surface for a in annotate(make_doc("Bax levels rose"), matcher)] == ["Bax"]
        strict = compile_matcher(make_lexicon({"BAX": "581"}), MatcherOptions(case_fold=False))
        assert annotate(make_doc("Bax levels rose"), strict) == []

    def test_empty_lexicon_rejected(self):
        with pytest.raises(ConfigError):
            compile_matcher(Lexicon(EntityType.GENE))


class TestAnnotate:
    def test_example_sentence_gene(self, make_doc):
        doc = make_doc(
            "A homozygous mutation of SERPINB6, a gene encoding an intracellular "
            "protease inhibitor, has recently been associated with post-lingual, "
            "autosomal-recessive, nonsyndromic hearing loss in humans (DFNB91)."
        )
        matcher = compile_matcher(make_lexicon({"SERPINB6": "5269"}))
        (ann,) = annotate(doc, matcher)
        assert (ann.surface, ann.entity_id) == ("SERPINB6", "5269")
        assert doc.text[ann.start:ann.end] == "SERPINB6"

    def test_no_match_is_empty(self, make_doc):
        matcher = compile_matcher(make_lexicon({"XYZ": "1"}))
        assert annotate(make_doc("nothing relevant here"), matcher) == []

    def test_leftmost_longest_hand_derived(self, make_doc):
        # all (start, surface) candidates: TP53@0 (TP5@0 blocked by '3'),
        # TP5@9 at text end; greedy selection keeps TP53 then TP5
        matcher = compile_matcher(make_lexicon({"TP5": "a", "TP53": "b"}))
        doc = make_doc("TP53 and TP5")
        got = [(a.start, a.end, a.entity_id) for a in annotate(doc, matcher)]
        assert got == [(0, 4, "b"), (9, 12, "a")]

    def test_word_boundaries_block_inner_matches(self, make_doc):
        matcher = compile_matcher(make_lexicon({"HER2": "1"}))
        (only,) = annotate(make_doc("mother2 said HER2 not HER2b nor xHER2"), matcher)
        assert only.start == 13

    def test_joiners_glue_tokens_in_first_pass(self, make_doc):
        matcher = compile_matcher(make_lexicon({"Bax": "581"}))
        assert annotate(make_doc("expression of Bax/Bcl-2."), matcher) == []
        assert annotate(make_doc("expression of Bax-2"), matcher) == []
        assert annotate(make_doc("expression of Bax."), matcher) != []

    def test_sorted_and_non_overlapping(self, make_doc):
        rng = random.Random(99)
        surfaces = random_lexicon(rng)
        matcher = compile_matcher(make_lexicon(surfaces))
        doc = make_doc(random_text(rng, surfaces))
        anns = annotate(doc, matcher)
        assert anns == sorted(anns, key=lambda a: a.start)
        assert all(a.end <= b.start for a, b in zip(anns, anns[1:]))

    def test_span_fidelity_case_folded(self, make_doc):
        rng = random.Random(7)
        surfaces = random_lexicon(rng)
        matcher = compile_matcher(make_lexicon(surfaces))
        doc = make_doc(random_text(rng, surfaces))
        lexicon_by_id = {v: k for k, v in surfaces.items()}
        for a in annotate(doc, matcher):
            assert doc.text[a.start:a.end] == a.surface
            assert fold_text(a.surface) == fold_text(lexicon_by_id[a.entity_id])

    def test_determinism(self, make_doc):
        rng = random.Random(5)
        surfaces = random_lexicon(rng)
        doc = make_doc(random_text(rng, surfaces))
        runs = [
            [(a.start, a.end, a.entity_id)
             for a in annotate(doc, compile_matcher(make_lexicon(surfaces)))]
            for _ in range(3)
        ]
        assert runs[0] == runs[1] == runs[2]

    def test_oracle_equivalence_random_trials(self, make_doc):
        rng = random.Random(20240313)
        for _ in range(100):
            surfaces = random_lexicon(rng)
            text = random_text(rng, surfaces)
            matcher = compile_matcher(make_lexicon(surfaces))
            got = [(a.start, a.end, a.entity_id) for a in annotate(make_doc(text), matcher)]
            assert got == naive_annotate(text, surfaces), f"text={text!r}"


class TestRecoverAdjacent:
    def test_example_recovery(self, make_doc):
        doc = make_doc(EXAMPLE_RECOVERY_TEXT, doc_id="30273005")
        matcher = compile_matcher(make_lexicon({"BAX": "581"}))
        first = annotate(doc, matcher)
        assert first == []
        recovered = recover_adjacent(doc, matcher, first)
        assert [(a.surface, a.entity_id) for a in recovered] == [("Bax", "581")]

    def test_no_joiner_characters_no_change(self, make_doc):
        doc = make_doc("BAX binds BAK in the assay")
        matcher = compile_matcher(make_lexicon({"BAX": "581"}))
        first = annotate(doc, matcher)
        assert recover_adjacent(doc, matcher, first) == []

    def test_overlap_suppression_against_first_pass(self, make_doc):
        doc = make_doc("ABC-DEF binds nothing")
        matcher = compile_matcher(make_lexicon({"ABC": "1", "ABC-DEF": "2"}))
        first = annotate(doc, matcher)
        assert [(a.surface,) for a in first] == [("ABC-DEF",)]
        assert recover_adjacent(doc, matcher, first) == []

    def test_merged_output_stays_sorted_non_overlapping(self, make_doc):
        rng = random.Random(11)
        for _ in range(50):
            surfaces = random_lexicon(rng, max_surfaces=20)
            doc = make_doc(random_text(rng, surfaces, max_chars=500))
            matcher = compile_matcher(make_lexicon(surfaces))
            first = annotate(doc, matcher)
            recovered = recover_adjacent(doc, matcher, first)
            first_spans = [(a.start, a.end) for a in first]
            for r in recovered:
                assert all(r.end <= s or e <= r.start for s, e in first_spans)
            merged = merge_annotations(first, recovered)
            assert all(a.end <= b.start for a, b in zip(merged, merged[1:]))

    def test_recovery_matches_oracle_with_blocked_spans(self, make_doc):
        from oracles import naive_candidates, naive_select

        rng = random.Random(23)
        for _ in range(50):
            surfaces = random_lexicon(rng, max_surfaces=20)
            text = random_text(rng, surfaces, max_chars=500)
            doc = make_doc(text)
            matcher = compile_matcher(make_lexicon(surfaces))
            first = annotate(doc, matcher)
            got = [(a.start, a.end, a.entity_id)
                   for a in recover_adjacent(doc, matcher, first)]
            if not any(c in text for c in "/\\-"):
                assert got == []
                continue
            expected = naive_select(
                naive_candidates(text, surfaces, True, set()),
                blocked=[(a.start, a.end) for a in first],
            )
            assert got == expected


class TestReportUnmatched:
    def test_unresolvable_span_reported(self, make_doc, tmp_path):
        doc = make_doc("gait ataxia and HEARING loss", doc_id="d9")
        lexicon = make_lexicon({"hearing loss": "HP_1"}, EntityType.PHENOTYPE)
        rows = report_unmatched(doc, [(0, 11), (16, 28)], lexicon)
        assert rows == [("d9", "gait ataxia", 0, 11)]
        out = tmp_path / "unmatched.tsv"
        write_unmatched(rows, out)
        assert out.read_text() == "d9\tgait ataxia\t0\t11\n"

    def test_all_resolvable_empty(self, make_doc):
        doc = make_doc("hearing loss persists")
        lexicon = make_lexicon({"hearing loss": "HP_1"}, EntityType.PHENOTYPE)
        assert report_unmatched(doc, [(0, 12)], lexicon) == []

    def test_counts_by_lookup(self, make_doc):
        text = "aa bb cc dd ee ff gg hh ii jj"
        doc = make_doc(text)
        lexicon = make_lexicon({t: str(i) for i, t in enumerate(text.split()[:7])})
        spans = [(i * 3, i * 3 + 2) for i in range(10)]
        rows = report_unmatched(doc, spans, lexicon)
        assert len(rows) == 3
