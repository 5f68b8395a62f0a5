import dataclasses
import filecmp
from collections import Counter

import pytest

from docnre import evaluation
from docnre import synthgen
from docnre.candidates import TERNARY, Scale, generate as generate_candidates
from docnre.errors import DataError
from docnre.evaluation import average_precision, max_recall, narrowest_scope
from docnre.ner import find_all_mentions, preprocess_document
from docnre.predictions import Prediction
from docnre.synthgen import (
    SynthSpec,
    drug_id,
    drug_surface,
    gene_id,
    gene_surface,
    generate,
    write_outputs,
)

SPEC = SynthSpec(seed=20260822, num_docs=12, num_drugs=10, num_genes=10)

DECLARED_TO_EVAL_SCOPE = {
    synthgen.SCOPE_SENTENCE: evaluation.SCOPE_SENTENCE,
    synthgen.SCOPE_PARAGRAPH: evaluation.SCOPE_PARAGRAPH,
    synthgen.SCOPE_CROSS_PARAGRAPH: evaluation.SCOPE_CROSS_PARAGRAPH,
}


@pytest.fixture(scope="module")
def result():
    return generate(SPEC)


@pytest.fixture(scope="module")
def processed(result):
    dictionaries = [result.drug_dictionary, result.gene_dictionary]
    return {
        doc.doc_id: preprocess_document(doc, dictionaries) for doc in result.documents
    }


class TestDeterminism:
    def test_regeneration_identical(self):
        a = generate(SPEC)
        b = generate(SPEC)
        assert [d.paragraphs for d in a.documents] == [d.paragraphs for d in b.documents]
        assert a.gold == b.gold
        assert a.kb == b.kb
        assert a.facts == b.facts

    def test_written_files_byte_identical(self, tmp_path):
        for sub in ("one", "two"):
            out = tmp_path / sub
            out.mkdir()
            write_outputs(generate(SPEC), out)
        names = [
            "corpus.jsonl", "gold.tsv", "kb.tsv", "drugs.tsv", "genes.tsv",
            "genemut_seed.tsv",
        ]
        match, mismatch, errors = filecmp.cmpfiles(
            tmp_path / "one", tmp_path / "two", names, shallow=False
        )
        assert match == names and not mismatch and not errors

    def test_different_seed_different_corpus(self):
        other = generate(dataclasses.replace(SPEC, seed=SPEC.seed + 1))
        base = generate(SPEC)
        assert [d.paragraphs for d in other.documents] != [
            d.paragraphs for d in base.documents
        ]

    def test_dictionaries_independent_of_seed(self, tmp_path):
        for sub, seed in (("one", 1), ("two", 2)):
            out = tmp_path / sub
            out.mkdir()
            write_outputs(generate(dataclasses.replace(SPEC, seed=seed)), out)
        for name in ("drugs.tsv", "genes.tsv"):
            assert filecmp.cmp(tmp_path / "one" / name, tmp_path / "two" / name, shallow=False)


class TestSurfaces:
    def test_drug_surfaces_unique(self):
        surfaces = {drug_surface(i, v) for i in range(50) for v in range(3)}
        assert len(surfaces) == 150

    def test_gene_surfaces_unique(self):
        surfaces = {gene_surface(i, v) for i in range(50) for v in range(3)}
        assert len(surfaces) == 150

    def test_ids_zero_padded(self):
        assert drug_id(3) == "D003"
        assert gene_id(11) == "G011"


class TestCorpusShape:
    def test_document_grid(self, result):
        for doc in result.documents:
            assert doc.num_paragraphs == SPEC.paragraphs_per_doc
            assert doc.num_sentences == SPEC.paragraphs_per_doc * SPEC.sentences_per_paragraph

    def test_gold_matches_planted_facts(self, result):
        expect = {}
        for f in result.facts:
            expect.setdefault(f.doc_id, set()).add(f.entities)
        assert result.gold == expect

    def test_kb_is_exactly_planted_fact_set(self, result):
        assert result.kb == {f.entities for f in result.facts}

    def test_scope_mix_allocation_exact(self, result):
        # 12 docs x 2 facts = 24 facts; largest remainder on (.3, .3, .4)
        # gives 7 / 7 / 10: floors 7/7/9 leave one unit for the largest
        # fractional part, 0.6 on the cross-paragraph share.
        counts = Counter(f.scope for f in result.facts)
        assert counts == {
            synthgen.SCOPE_SENTENCE: 7,
            synthgen.SCOPE_PARAGRAPH: 7,
            synthgen.SCOPE_CROSS_PARAGRAPH: 10,
        }

    def test_mutations_are_document_exclusive(self, result, processed):
        seen_in: dict[str, set[str]] = {}
        for doc_id, proc in processed.items():
            for m in proc.mentions:
                if m.entity_type.value == "mutation":
                    seen_in.setdefault(m.entity_id, set()).add(doc_id)
        assert seen_in, "corpus must contain mutation mentions"
        multi = {mut: docs for mut, docs in seen_in.items() if len(docs) > 1}
        assert multi == {}

    def test_fact_entities_disjoint_within_document(self, result):
        by_doc: dict[str, list] = {}
        for f in result.facts:
            by_doc.setdefault(f.doc_id, []).append(f)
        for facts in by_doc.values():
            drugs = [f.drug for f in facts]
            genes = [f.gene for f in facts]
            muts = [f.mutation for f in facts]
            assert len(set(drugs)) == len(drugs)
            assert len(set(genes)) == len(genes)
            assert len(set(muts)) == len(muts)


class TestRecoverability:
    def test_declared_scope_matches_mention_geometry(self, result, processed):
        for fact in result.facts:
            proc = processed[fact.doc_id]
            got = narrowest_scope(proc.document, proc.mentions, fact.entities)
            assert got == DECLARED_TO_EVAL_SCOPE[fact.scope], fact

    def test_document_scale_max_recall_is_one(self, result, processed):
        cands = []
        for doc_id, proc in processed.items():
            for c in generate_candidates(proc.document, proc.mentions, TERNARY, Scale.DOCUMENT):
                cands.append((c.doc_id, c.entities))
        assert max_recall(cands, result.gold) == 1.0

    def test_sentence_scale_recall_matches_declared_mix(self, result, processed):
        cands = set()
        for doc_id, proc in processed.items():
            for c in generate_candidates(proc.document, proc.mentions, TERNARY, Scale.SENTENCE):
                cands.add((c.doc_id, c.entities))
        recovered = sum(
            1 for f in result.facts if (f.doc_id, f.entities) in cands
        )
        assert recovered == sum(1 for f in result.facts if f.scope == synthgen.SCOPE_SENTENCE)

    def test_kb_membership_oracle_reaches_perfect_ap(self, result, processed):
        # Distractor triples never enter the relation store, and every
        # planted fact is recoverable, so ranking candidates by membership
        # separates gold from non-gold completely.
        preds = []
        for doc_id, proc in processed.items():
            for c in generate_candidates(proc.document, proc.mentions, TERNARY, Scale.DOCUMENT):
                score = 1.0 if c.entities in result.kb else 0.0
                preds.append(Prediction(c.doc_id, c.entities, score, "oracle"))
        assert average_precision(preds, result.gold) == 1.0

    def test_distractor_mutations_offer_negatives(self, result, processed):
        # With a positive distractor rate some document-scale candidates
        # must fall outside the relation store.
        negatives = 0
        for doc_id, proc in processed.items():
            for c in generate_candidates(proc.document, proc.mentions, TERNARY, Scale.DOCUMENT):
                if c.entities not in result.kb:
                    negatives += 1
        assert negatives > 0


class TestInfeasibleSpecs:
    def test_entity_pool_too_small(self):
        with pytest.raises(DataError):
            generate(dataclasses.replace(SPEC, num_drugs=2, facts_per_doc=3))

    def test_grid_too_small_for_facts(self):
        with pytest.raises(DataError):
            generate(
                dataclasses.replace(
                    SPEC,
                    paragraphs_per_doc=1,
                    sentences_per_paragraph=2,
                    facts_per_doc=4,
                    scope_mix=(1.0, 0.0, 0.0),
                )
            )

    def test_cross_paragraph_needs_two_paragraphs(self):
        with pytest.raises(DataError):
            generate(
                dataclasses.replace(
                    SPEC, paragraphs_per_doc=1, scope_mix=(0.0, 0.0, 1.0)
                )
            )

    def test_bad_mix_rejected(self):
        with pytest.raises(DataError):
            SynthSpec(scope_mix=(0.5, 0.2, 0.2))
        with pytest.raises(DataError):
            SynthSpec(scope_mix=(1.2, -0.1, -0.1))

    def test_spec_json_round_trip(self):
        assert SynthSpec.from_json(SPEC.to_json()) == SPEC
        with pytest.raises(DataError):
            SynthSpec.from_json({"bogus_field": 1})
