"""Release acceptance suite.

Each test implements one numbered release criterion end to end, using only
public package APIs plus the independent oracles defined in the module test
files.  Tolerances and runtime budgets are fixed constants here; the summary
hook in conftest.py prints one PASS/FAIL line per criterion after the run.
"""
import dataclasses
import filecmp
import json
import math
import random
import time

import pytest
import torch

from docnre.candidates import TERNARY, CandidateTuple, Scale, distant_label
from docnre.candidates import generate as generate_candidates
from docnre.cli import main
from docnre.corpus import Document
from docnre.ensemble import EnsembleKind, combine, document_scores, multiscale
from docnre.enttypes import EntityType
from docnre.evaluation import average_precision, max_recall
from docnre.genelink import (
    AugmentRule,
    GeneMutationAssignment,
    LinkRule,
    assign_in_document,
    augment_global_map,
    filter_candidates,
)
from docnre.model import (
    Aggregator,
    ModelConfig,
    RelationClassifier,
    Vocabulary,
    build_batches,
    grad_check,
    predict_batches,
    train,
    variant_config,
)
from docnre.model.batching import scale_for_config
from docnre.model.network import pool_vectors
from docnre.ner import EntityDictionary, Mention, find_all_mentions, preprocess_document
from docnre.synthgen import SynthSpec, generate

from test_candidates import oracle_candidates, random_micro_doc
from test_eval import oracle_ap, ranked_instance
from test_genelink import EGFR_DICT, corpus_from_sentences, rules_firing
from test_model import TINY, micro_setup


# ---------------------------------------------------------------------------
# Shared pipeline helpers for the training criteria.
# ---------------------------------------------------------------------------

def _preprocess_all(result):
    dictionaries = [result.drug_dictionary, result.gene_dictionary]
    return {d.doc_id: preprocess_document(d, dictionaries) for d in result.documents}


def _candidates_for(processed, doc_ids, config, kb=None):
    scale = scale_for_config(config)
    out = []
    for doc_id in doc_ids:
        doc, mentions = processed[doc_id]
        cands = generate_candidates(doc, mentions, TERNARY, scale)
        if kb is not None:
            cands = distant_label(cands, kb)
        out.extend(cands)
    return out


def _fit_and_score(base, variant, processed, kb, gold_test, train_ids, test_ids,
                   aggregator=Aggregator.LOG_SUM_EXP, seed=0):
    """Train one variant and return its document-level test predictions + AP."""
    config = dataclasses.replace(
        variant_config(base, variant), aggregator=aggregator, seed=seed
    )
    train_cands = _candidates_for(processed, train_ids, config, kb=kb)
    test_cands = _candidates_for(processed, test_ids, config)
    vocab = Vocabulary.from_documents([processed[d].document for d in train_ids])
    model = RelationClassifier(config, vocab)
    train_subset = {d: processed[d] for d in train_ids}
    test_subset = {d: processed[d] for d in test_ids}
    train(model, build_batches(train_subset, train_cands, TERNARY, config, vocab))
    preds = predict_batches(
        model, build_batches(test_subset, test_cands, TERNARY, config, vocab), variant
    )
    if config.scope.value == "single_unit":
        preds = document_scores(preds, EnsembleKind.NOISY_OR, variant)
    return preds, average_precision(preds, gold_test)


# ---------------------------------------------------------------------------
# c01: gradient correctness on a reduced model.
# ---------------------------------------------------------------------------

def test_c01_gradients_match_central_differences():
    reduced = dataclasses.replace(
        TINY, d_word=4, d_unit_index=2, lstm_hidden=3, d_mention=6, ffn_hidden=6
    )
    model, batches, _, _, _ = micro_setup(config=reduced)
    # The fixture document populates two pair subrelations with mention
    # tuples and leaves the others empty, so the learned fallback bias
    # vectors sit on the differentiated path too.
    batch = batches[0]
    present = {k for cb in batch.candidates for k in cb.tuple_indices}
    assert len(present) == 2
    assert any(p.requires_grad for n, p in model.named_parameters() if "fallback" in n)

    start = time.monotonic()
    report = grad_check(model, batch)
    elapsed = time.monotonic() - start

    assert next(model.parameters()).dtype == torch.float64
    assert report.max_relative_error < 1e-4
    assert set(report.per_parameter) == {n for n, _ in model.named_parameters()}
    assert elapsed < 10.0


# ---------------------------------------------------------------------------
# c02: log-sum-exp pooling algebra, 1000 randomized checks.
# ---------------------------------------------------------------------------

def test_c02_logsumexp_pooling_algebra():
    rng = random.Random(20260801)
    for _ in range(1000):
        n = rng.randint(1, 6)
        d = rng.randint(1, 5)
        scale = rng.choice([1.0, 10.0, 1e3])
        data = [[(rng.random() - 0.5) * 2 * scale for _ in range(d)] for _ in range(n)]
        vectors = torch.tensor(data, dtype=torch.float64)

        lse = pool_vectors(vectors, Aggregator.LOG_SUM_EXP)
        mx = pool_vectors(vectors, Aggregator.MAX)

        assert torch.isfinite(lse).all()
        assert (lse >= mx - 1e-12).all()
        assert (lse <= mx + math.log(n) + 1e-9).all()

        order = list(range(n))
        rng.shuffle(order)
        shuffled = pool_vectors(vectors[order], Aggregator.LOG_SUM_EXP)
        assert torch.allclose(shuffled, lse, atol=1e-9, rtol=0)
        assert torch.equal(pool_vectors(vectors[order], Aggregator.MAX), mx)

        k = rng.randint(1, 5)
        row = vectors[:1]
        copies = pool_vectors(row.repeat(k, 1), Aggregator.LOG_SUM_EXP)
        assert torch.allclose(copies, row[0] + math.log(k), atol=1e-9, rtol=0)


# ---------------------------------------------------------------------------
# c03: probability combination algebra, 1000 randomized checks.
# ---------------------------------------------------------------------------

def test_c03_probability_combination_algebra():
    rng = random.Random(20260802)
    for _ in range(1000):
        n = rng.randint(1, 6)
        probs = []
        for _ in range(n):
            roll = rng.random()
            if roll < 0.1:
                probs.append(0.0)
            elif roll < 0.2:
                probs.append(1.0)
            else:
                probs.append(rng.random())

        top = combine(probs, EnsembleKind.MAX)
        fused = combine(probs, EnsembleKind.NOISY_OR)

        assert top == max(probs)
        assert 0.0 <= fused <= 1.0
        assert fused >= top - 1e-12
        if 1.0 in probs:
            assert fused == 1.0
        if all(p == 0.0 for p in probs):
            assert fused == 0.0

        shuffled = probs[:]
        rng.shuffle(shuffled)
        assert combine(shuffled, EnsembleKind.MAX) == top
        assert combine(shuffled, EnsembleKind.NOISY_OR) == pytest.approx(fused, abs=1e-12)

        assert combine([top, top], EnsembleKind.MAX) == top
        extra = rng.random()
        assert combine(probs + [extra], EnsembleKind.NOISY_OR) >= fused - 1e-12
        assert combine(probs + [extra], EnsembleKind.MAX) >= top

        if n >= 2:
            cut = rng.randint(1, n - 1)
            for kind, flat in ((EnsembleKind.MAX, top), (EnsembleKind.NOISY_OR, fused)):
                staged = combine(
                    [combine(probs[:cut], kind), combine(probs[cut:], kind)], kind
                )
                assert staged == pytest.approx(flat, abs=1e-12)


# ---------------------------------------------------------------------------
# c04: candidate generation equals brute-force enumeration.
# ---------------------------------------------------------------------------

def test_c04_candidates_match_bruteforce_oracle():
    rng = random.Random(20260803)
    for _ in range(200):
        doc, mentions = random_micro_doc(rng, max_mentions=6)
        by_scale = {}
        for scale in (Scale.SENTENCE, Scale.PARAGRAPH, Scale.DOCUMENT):
            got = generate_candidates(doc, mentions, TERNARY, scale)
            keys = {(c.entities, c.unit_index) for c in got}
            assert len(keys) == len(got)
            assert keys == oracle_candidates(doc, mentions, TERNARY, scale)
            by_scale[scale] = {c.entities for c in got}
        assert by_scale[Scale.SENTENCE] <= by_scale[Scale.PARAGRAPH]
        assert by_scale[Scale.PARAGRAPH] <= by_scale[Scale.DOCUMENT]


# ---------------------------------------------------------------------------
# c05: ranking metric equals curve integration.
# ---------------------------------------------------------------------------

def test_c05_average_precision_matches_curve_integration():
    preds, gold = ranked_instance([1, 0, 1])
    assert average_precision(preds, gold) == pytest.approx(5 / 6, abs=1e-9)
    assert average_precision(preds, gold) == pytest.approx(0.8333, abs=5e-5)

    rng = random.Random(20260804)
    checked = 0
    while checked < 500:
        n = rng.randint(1, 20)
        labels = [rng.random() < 0.4 for _ in range(n)]
        extra_gold = rng.randint(0, 3)
        total = sum(labels) + extra_gold
        if total == 0:
            continue
        preds, gold = ranked_instance(labels, start=0.99, step=0.9 / (n + 1))
        for j in range(extra_gold):
            gold.setdefault("d", set()).add((f"X{j}", f"Y{j}", f"Z{j}"))
        got = average_precision(preds, gold)
        assert got == pytest.approx(oracle_ap(labels, total), abs=1e-12)
        checked += 1


# ---------------------------------------------------------------------------
# c06: scope mix controls reachable recall per scale.
# ---------------------------------------------------------------------------

def test_c06_scope_mix_bounds_max_recall_per_scale():
    start = time.monotonic()
    result = generate(SynthSpec(seed=6, num_docs=50, facts_per_doc=2,
                                scope_mix=(0.3, 0.3, 0.4)))
    processed = _preprocess_all(result)
    assert sum(len(facts) for facts in result.gold.values()) == 100

    expected = {Scale.SENTENCE: 0.30, Scale.PARAGRAPH: 0.60, Scale.DOCUMENT: 1.00}
    for scale, target in expected.items():
        tuples = []
        for doc, mentions in processed.values():
            tuples.extend(
                (c.doc_id, c.entities)
                for c in generate_candidates(doc, mentions, TERNARY, scale)
            )
        assert abs(max_recall(tuples, result.gold) - target) <= 0.02, scale
    assert time.monotonic() - start < 60.0


# ---------------------------------------------------------------------------
# c07: end-to-end learning separates document-level from sentence-only.
# ---------------------------------------------------------------------------

def test_c07_document_scale_training_beats_sentence_only():
    start = time.monotonic()
    result = generate(SynthSpec(seed=1, num_docs=300))
    processed = _preprocess_all(result)
    ids = sorted(processed)
    train_ids, test_ids = ids[:200], ids[250:]
    gold_test = {d: result.gold[d] for d in test_ids if d in result.gold}
    base = ModelConfig(d_word=32, d_unit_index=16, lstm_hidden=32, d_mention=64,
                       ffn_hidden=64, learning_rate=1e-3, epochs=30)
    assert base.epochs == 30

    shared = (base, processed, result.kb, gold_test, train_ids, test_ids)
    doc_preds, doc_ap = _fit_and_score(shared[0], "doc", *shared[1:])
    sent_preds, sent_ap = _fit_and_score(shared[0], "sent", *shared[1:])
    para_preds, _ = _fit_and_score(shared[0], "para", *shared[1:])
    fused = multiscale([sent_preds, para_preds, doc_preds], EnsembleKind.NOISY_OR)
    multi_ap = average_precision(fused, gold_test)
    elapsed = time.monotonic() - start

    assert doc_ap >= 0.90
    assert sent_ap < 0.65
    assert multi_ap >= doc_ap - 0.02
    assert elapsed < 1200.0


# ---------------------------------------------------------------------------
# c08: soft pooling is at least as good as hard max under diluted evidence.
# ---------------------------------------------------------------------------

def test_c08_soft_pooling_matches_or_beats_max_under_dilution():
    result = generate(SynthSpec(seed=2, num_docs=150, evidence_repeats=3,
                                sentences_per_paragraph=8))
    processed = _preprocess_all(result)
    ids = sorted(processed)
    train_ids, test_ids = ids[:100], ids[100:]
    gold_test = {d: result.gold[d] for d in test_ids if d in result.gold}
    base = ModelConfig(d_word=32, d_unit_index=16, lstm_hidden=32, d_mention=64,
                       ffn_hidden=64, learning_rate=1e-3, epochs=12)

    config0 = variant_config(base, "doc")
    train_cands = _candidates_for(processed, train_ids, config0, kb=result.kb)
    vocab = Vocabulary.from_documents([processed[d].document for d in train_ids])
    batches = build_batches({d: processed[d] for d in train_ids}, train_cands,
                            TERNARY, config0, vocab)
    tuple_counts = [
        sum(idx.shape[0] for idx in cb.tuple_indices.values())
        for b in batches for cb in b.candidates if cb.candidate.label == 1
    ]
    # The dilution premise: every positive carries several mention tuples,
    # so per-tuple evidence is spread rather than concentrated.
    assert tuple_counts and min(tuple_counts) >= 3

    mean_ap = {}
    for aggregator in (Aggregator.LOG_SUM_EXP, Aggregator.MAX):
        aps = [
            _fit_and_score(base, "doc", processed, result.kb, gold_test,
                           train_ids, test_ids, aggregator=aggregator, seed=seed)[1]
            for seed in (0, 1, 2)
        ]
        mean_ap[aggregator] = sum(aps) / len(aps)

    assert mean_ap[Aggregator.LOG_SUM_EXP] >= mean_ap[Aggregator.MAX]


# ---------------------------------------------------------------------------
# c09: predictions depend only on entity identity, not surface strings.
# ---------------------------------------------------------------------------

def _rebuild_with_tokens(doc, replacements):
    """Copy a document, substituting single tokens at document-wide indexes."""
    paragraphs = []
    offset = 0
    for para in doc.paragraphs:
        sentences = []
        for sent in para:
            tokens = [replacements.get(offset + i, t) for i, t in enumerate(sent)]
            sentences.append(" ".join(tokens))
            offset += len(sent)
        paragraphs.append(sentences)
    return Document.from_raw(doc.doc_id, paragraphs)


def _with_novel_surfaces(dictionary):
    mapping = {surface: eid for surface, eid in dictionary.entries()}
    for _, eid in dictionary.entries():
        mapping[f"novo{eid.lower()}"] = eid
    return EntityDictionary(dictionary.entity_type, mapping)


def test_c09_unseen_synonyms_leave_predictions_bitwise_identical():
    result = generate(SynthSpec(seed=9, num_docs=15))
    dictionaries = [result.drug_dictionary, result.gene_dictionary]
    processed = _preprocess_all(result)
    ids = sorted(processed)
    config = variant_config(
        ModelConfig(d_word=8, d_unit_index=4, lstm_hidden=4, d_mention=8,
                    ffn_hidden=8, learning_rate=1e-2, seed=3, epochs=2),
        "doc",
    )
    cands = _candidates_for(processed, ids, config, kb=result.kb)
    vocab = Vocabulary.from_documents([processed[d].document for d in ids])
    model = RelationClassifier(config, vocab)
    train(model, build_batches(processed, cands, TERNARY, config, vocab))
    baseline = predict_batches(
        model, build_batches(processed, cands, TERNARY, config, vocab), "doc"
    )

    # Rewrite every entity mention to a surface the model never saw: novel
    # dictionary synonyms for drugs/genes, and the alternate prefix spelling
    # for mutations.  Entity identities are unchanged.
    known = set(vocab.tokens)
    swapped_dicts = [_with_novel_surfaces(d) for d in dictionaries]
    swapped_processed = {}
    for doc in result.documents:
        replacements = {}
        for m in find_all_mentions(doc, dictionaries):
            assert m.length == 1
            old = doc.tokens[m.token_index]
            if m.entity_type == EntityType.MUTATION:
                new = old[2:] if old.startswith("p.") else f"p.{old}"
            else:
                new = f"novo{m.entity_id.lower()}"
            assert new != old and new not in known
            replacements[m.token_index] = new
        assert replacements
        swapped = _rebuild_with_tokens(doc, replacements)
        assert swapped.tokens != doc.tokens
        swapped_processed[doc.doc_id] = preprocess_document(swapped, swapped_dicts)

    # Type masking collapses both corpora to the same token stream.
    assert swapped_processed == processed

    recands = _candidates_for(swapped_processed, ids, config, kb=result.kb)
    again = predict_batches(
        model, build_batches(swapped_processed, recands, TERNARY, config, vocab), "doc"
    )
    assert [(p.doc_id, p.entities, p.units, p.p) for p in again] == [
        (p.doc_id, p.entities, p.units, p.p) for p in baseline
    ]


# ---------------------------------------------------------------------------
# c10: linking rules fire exactly as designated.
# ---------------------------------------------------------------------------

def test_c10_linking_rules_precedence_fallback_and_filter_laws():
    designated = {
        "the EGFR-T790M variant emerged .": AugmentRule.SAME_TOKEN,
        "the EGFR T790M variant emerged .": AugmentRule.ADJACENT,
        "the EGFR - T790M variant emerged .": AugmentRule.ONE_TOKEN_GAP,
    }
    for sentence, rule in designated.items():
        docs = corpus_from_sentences(sentence)
        firing = rules_firing(docs, "T790M")
        assert firing[rule], sentence
        assert sum(firing.values()) == 1, sentence
        augmented = augment_global_map(docs, EGFR_DICT)
        assert augmented.mapping == {"T790M": {"G001"}}
        assert augmented.fired["T790M"][0] == rule

    # Precedence: a single fused-token match outranks two adjacency matches.
    docs = corpus_from_sentences(
        "the EGFR-T790M variant emerged .",
        "KRAS T790M was also seen .",
        "KRAS T790M recurred in culture .",
    )
    augmented = augment_global_map(docs, EGFR_DICT)
    assert augmented.fired["T790M"][0] == AugmentRule.SAME_TOKEN
    assert augmented.mapping == {"T790M": {"G001"}}

    # Fallback: no corpus pattern fires, yet in-document assignment still
    # links the mutation to the most frequent gene.
    doc = Document.from_raw("d0", [["GENE_B here GENE_B there GENE_A with T790M ."]])
    mentions = [
        Mention("GB", EntityType.GENE, 0, 0, 0),
        Mention("GB", EntityType.GENE, 2, 0, 0),
        Mention("GA", EntityType.GENE, 4, 0, 0),
        Mention("T790M", EntityType.MUTATION, 6, 0, 0),
    ]
    assignment = assign_in_document(doc, mentions, {})
    assert assignment.gene_for == {"T790M": "GB"}
    assert assignment.rule_for == {"T790M": LinkRule.MOST_FREQUENT}

    assignments = {
        "d0": GeneMutationAssignment(
            "d0", {"T790M": "G1"}, {"T790M": LinkRule.MOST_FREQUENT}, ()
        )
    }
    cands = [
        CandidateTuple("d0", ("D1", "G1", "T790M"), Scale.DOCUMENT),
        CandidateTuple("d0", ("D2", "G1", "T790M"), Scale.DOCUMENT),
        CandidateTuple("d0", ("D1", "G2", "T790M"), Scale.DOCUMENT),
        CandidateTuple("d9", ("D1", "G1", "T790M"), Scale.DOCUMENT),
    ]
    once = filter_candidates(cands, assignments, TERNARY)
    assert once == [cands[0], cands[1]]
    assert filter_candidates(once, assignments, TERNARY) == once
    assert set(once) <= set(cands)


# ---------------------------------------------------------------------------
# c11: the whole pipeline is reproducible byte for byte.
# ---------------------------------------------------------------------------

_PIPELINE_MODEL_FLAGS = [
    "--d-word", "8", "--d-unit-index", "4", "--lstm-hidden", "4",
    "--d-mention", "8", "--ffn-hidden", "8", "--learning-rate", "0.01",
    "--epochs", "2", "--seed", "3",
]


def _run_pipeline(root, monkeypatch):
    """Run every stage with relative paths from `root` as working directory.

    Relative paths keep the recorded manifests location-independent, so two
    runs rooted in different directories must agree byte for byte.
    """
    root.mkdir(parents=True)
    monkeypatch.chdir(root)

    def run(*argv):
        assert main(list(argv)) == 0, argv

    run("synth", "--out", "data", "--seed", "11", "--num-docs", "8",
        "--num-drugs", "8", "--num-genes", "8")
    run("preprocess", "--corpus", "data/corpus.jsonl",
        "--drug-dict", "data/drugs.tsv", "--gene-dict", "data/genes.tsv",
        "--out", "processed.jsonl")
    run("link", "--corpus", "data/corpus.jsonl",
        "--drug-dict", "data/drugs.tsv", "--gene-dict", "data/genes.tsv",
        "--seed-map", "data/genemut_seed.tsv", "--out", "assignments.jsonl")
    run("label", "--processed", "processed.jsonl", "--scale", "document",
        "--kb", "data/kb.tsv", "--out", "cands.jsonl")
    run("train", "--processed", "processed.jsonl", "--candidates", "cands.jsonl",
        "--variant", "doc", "--out", "model.pt", *_PIPELINE_MODEL_FLAGS)
    run("predict", "--checkpoint", "model.pt", "--processed", "processed.jsonl",
        "--candidates", "cands.jsonl", "--out", "preds.jsonl")
    run("eval", "--predictions", "preds.jsonl", "--gold", "data/gold.tsv",
        "--candidates", "cands.jsonl", "--out", "report.json")
    run("prcurve", "--predictions", "preds.jsonl", "--gold", "data/gold.tsv",
        "--out", "curve.csv")
    return root


def test_c11_pipeline_runs_are_byte_identical(tmp_path, monkeypatch):
    first = _run_pipeline(tmp_path / "a", monkeypatch)
    second = _run_pipeline(tmp_path / "b", monkeypatch)

    same_manifests = ("data/corpus.jsonl.manifest.json",
                      "model.pt.manifest.json", "preds.jsonl.manifest.json")
    for name in same_manifests:
        assert filecmp.cmp(first / name, second / name, shallow=False), name

    outputs = ("assignments.jsonl", "preds.jsonl", "report.json", "curve.csv",
               "data/corpus.jsonl", "data/gold.tsv", "data/kb.tsv")
    for name in outputs:
        assert filecmp.cmp(first / name, second / name, shallow=False), name

    manifest = json.loads((first / "model.pt.manifest.json").read_text())
    assert len(manifest["config_sha256"]) == 64
