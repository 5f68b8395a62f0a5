"""Command-line pipeline: generate, preprocess, link, label, train, predict,
ensemble, and evaluate.

Every subcommand accepts --config FILE (flat JSON whose keys equal the flag
names with dashes as underscores); explicit flags override file values.
Each run writes a `<output>.manifest.json` recording the effective
configuration, seed, and SHA-256 checksums of all inputs and outputs, so a
rerun can be verified byte for byte.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from docnre import candidates as cand_mod
from docnre import corpus as corpus_mod
from docnre import ensemble as ensemble_mod
from docnre import evaluation as eval_mod
from docnre import genelink as genelink_mod
from docnre import ner as ner_mod
from docnre import synthgen as synth_mod
from docnre.enttypes import EntityType
from docnre.errors import DataError, NumericalError, UsageError
from docnre.model import (
    ModelConfig,
    RelationClassifier,
    Vocabulary,
    build_batches,
    load_checkpoint,
    load_word_vectors,
    predict_batches,
    save_checkpoint,
    train,
    variant_config,
)
from docnre.model.config import VARIANTS, Aggregator
from docnre.predictions import load_predictions, save_predictions

log = logging.getLogger("docnre")


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; the contract says 1."""

    def error(self, message: str):  # noqa: A003 - argparse API
        raise UsageError(message)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config file {path}: expected a flat JSON object")
    return data


class _Settings:
    """Flag values merged over config-file values, with required-key checks."""

    def __init__(self, args: argparse.Namespace, allowed: set[str]):
        self._args = vars(args)
        self._file = _load_config_file(self._args.get("config"))
        for key in self._file:
            if key not in allowed:
                raise UsageError(f"unknown config key: {key}")
        self.effective: dict = {}

    def get(self, key: str, default=None):
        value = self._args.get(key)
        if value is None:
            value = self._file.get(key, default)
        self.effective[key] = value
        return value

    def require(self, key: str):
        value = self.get(key)
        if value is None:
            raise UsageError(f"missing required setting: {key}")
        return value


def _input_path(value, key: str) -> Path:
    p = Path(value)
    if not p.is_file():
        raise UsageError(f"{key}: input not found: {value}")
    return p


def _write_manifest(
    anchor: Path,
    command: str,
    settings: dict,
    seed,
    inputs: dict[str, Path],
    outputs: dict[str, Path],
) -> Path:
    payload = {
        "command": command,
        "config": settings,
        "config_sha256": hashlib.sha256(
            json.dumps(settings, sort_keys=True).encode("utf-8")
        ).hexdigest(),
        "seed": seed,
        "inputs": {k: {"path": str(p), "sha256": _sha256(p)} for k, p in sorted(inputs.items())},
        "outputs": {k: {"path": str(p), "sha256": _sha256(p)} for k, p in sorted(outputs.items())},
    }
    path = anchor.with_name(anchor.name + ".manifest.json")
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _load_processed_map(path: Path) -> dict[str, ner_mod.ProcessedDocument]:
    return {pd.document.doc_id: pd for pd in ner_mod.load_processed(path)}


def _load_dictionaries(settings: _Settings) -> tuple[Path, Path, list[ner_mod.EntityDictionary]]:
    drug_path = _input_path(settings.require("drug_dict"), "drug_dict")
    gene_path = _input_path(settings.require("gene_dict"), "gene_dict")
    dicts = [
        ner_mod.EntityDictionary.load(drug_path, EntityType.DRUG),
        ner_mod.EntityDictionary.load(gene_path, EntityType.GENE),
    ]
    return drug_path, gene_path, dicts


# --------------------------------------------------------------------------
# subcommands


def _cmd_synth(args: argparse.Namespace) -> int:
    keys = {
        "config", "out", "seed", "num_docs", "num_drugs", "num_genes", "facts_per_doc",
        "scope_mix", "distractor_rate", "paragraphs_per_doc", "sentences_per_paragraph",
        "evidence_repeats", "synonyms_per_entity",
    }
    s = _Settings(args, keys)
    out_dir = Path(s.require("out"))
    spec_kwargs = {}
    for key in (
        "seed", "num_docs", "num_drugs", "num_genes", "facts_per_doc", "distractor_rate",
        "paragraphs_per_doc", "sentences_per_paragraph", "evidence_repeats",
        "synonyms_per_entity",
    ):
        value = s.get(key)
        if value is not None:
            spec_kwargs[key] = value
    mix = s.get("scope_mix")
    if mix is not None:
        if isinstance(mix, str):
            try:
                mix = tuple(float(x) for x in mix.split(","))
            except ValueError:
                raise UsageError("scope_mix: expected three comma-separated numbers") from None
        else:
            mix = tuple(float(x) for x in mix)
        if len(mix) != 3:
            raise UsageError("scope_mix: expected three comma-separated numbers")
        spec_kwargs["scope_mix"] = mix
    spec = synth_mod.SynthSpec(**spec_kwargs)
    result = synth_mod.generate(spec)
    paths = synth_mod.write_outputs(result, out_dir)
    _write_manifest(
        paths["corpus"], "synth", spec.to_json(), spec.seed, {}, {k: p for k, p in paths.items()}
    )
    log.info(
        "wrote %d documents, %d gold facts to %s",
        len(result.documents), eval_mod.gold_size(result.gold), out_dir,
    )
    return 0


def _cmd_preprocess(args: argparse.Namespace) -> int:
    s = _Settings(args, {"config", "corpus", "drug_dict", "gene_dict", "out"})
    corpus_path = _input_path(s.require("corpus"), "corpus")
    drug_path, gene_path, dicts = _load_dictionaries(s)
    out_path = Path(s.require("out"))

    documents = corpus_mod.ingest(corpus_path)
    processed = [ner_mod.preprocess_document(doc, dicts) for doc in documents]
    ner_mod.save_processed(processed, out_path)
    _write_manifest(
        out_path, "preprocess", s.effective, None,
        {"corpus": corpus_path, "drug_dict": drug_path, "gene_dict": gene_path},
        {"processed": out_path},
    )
    total = sum(len(pd.mentions) for pd in processed)
    log.info("masked %d mentions across %d documents", total, len(processed))
    return 0


def _cmd_link(args: argparse.Namespace) -> int:
    s = _Settings(args, {"config", "corpus", "drug_dict", "gene_dict", "seed_map", "out"})
    corpus_path = _input_path(s.require("corpus"), "corpus")
    drug_path, gene_path, dicts = _load_dictionaries(s)
    out_path = Path(s.require("out"))
    seed_map_value = s.get("seed_map")

    seed_map = {}
    inputs = {"corpus": corpus_path, "drug_dict": drug_path, "gene_dict": gene_path}
    if seed_map_value is not None:
        seed_path = _input_path(seed_map_value, "seed_map")
        seed_map = genelink_mod.load_seed_map(seed_path)
        inputs["seed_map"] = seed_path

    documents = corpus_mod.ingest(corpus_path)
    with_mentions = [(doc, ner_mod.find_all_mentions(doc, dicts)) for doc in documents]
    augmented = genelink_mod.augment_global_map(with_mentions, dicts[1], seed_map)
    assignments = [
        genelink_mod.assign_in_document(doc, mentions, augmented.mapping)
        for doc, mentions in with_mentions
    ]
    genelink_mod.save_assignments(assignments, out_path)
    _write_manifest(out_path, "link", s.effective, None, inputs, {"assignments": out_path})
    log.info(
        "assigned genes for %d documents (%d corpus patterns fired)",
        len(assignments), len(augmented.fired),
    )
    return 0


def _cmd_label(args: argparse.Namespace) -> int:
    s = _Settings(
        args,
        {"config", "processed", "scale", "kb", "assignments", "exclude_docs",
         "max_negatives_per_doc", "out"},
    )
    processed_path = _input_path(s.require("processed"), "processed")
    scale = cand_mod.Scale(s.require("scale"))
    out_path = Path(s.require("out"))
    inputs = {"processed": processed_path}

    processed = ner_mod.load_processed(processed_path)
    excluded: set[str] = set()
    exclude_value = s.get("exclude_docs")
    if exclude_value is not None:
        exclude_path = _input_path(exclude_value, "exclude_docs")
        excluded = {
            line.strip()
            for line in exclude_path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        }
        inputs["exclude_docs"] = exclude_path

    generated: list[cand_mod.CandidateTuple] = []
    for doc, mentions in processed:
        if doc.doc_id in excluded:
            continue
        generated.extend(cand_mod.generate(doc, mentions, cand_mod.TERNARY, scale))

    assignments_value = s.get("assignments")
    if assignments_value is not None:
        assignments_path = _input_path(assignments_value, "assignments")
        assignments = genelink_mod.load_assignments(assignments_path)
        generated = genelink_mod.filter_candidates(generated, assignments, cand_mod.TERNARY)
        inputs["assignments"] = assignments_path

    kb_value = s.get("kb")
    if kb_value is not None:
        kb_path = _input_path(kb_value, "kb")
        kb = cand_mod.load_kb(kb_path, cand_mod.TERNARY.arity)
        generated = cand_mod.distant_label(generated, kb)
        inputs["kb"] = kb_path

    cap = s.get("max_negatives_per_doc")
    if cap is not None:
        if kb_value is None:
            raise UsageError("max_negatives_per_doc requires kb (labels are needed)")
        generated = cand_mod.cap_negatives(generated, cap)

    generated.sort(key=cand_mod.CandidateTuple.sort_key)
    cand_mod.save_candidates(generated, out_path)
    _write_manifest(out_path, "label", s.effective, None, inputs, {"candidates": out_path})
    positives = sum(1 for c in generated if c.label == cand_mod.POSITIVE)
    log.info(
        "%d candidates at %s scale (%s positive)",
        len(generated), scale.value, positives if kb_value is not None else "unlabeled",
    )
    return 0


_MODEL_KEYS = {
    "variant", "aggregator", "d_word", "d_unit_index", "lstm_hidden", "d_mention",
    "ffn_hidden", "learning_rate", "seed", "epochs", "mention_tuple_cap", "dtype",
}


def _model_config(s: _Settings) -> ModelConfig:
    overrides = {}
    for key in ("d_word", "d_unit_index", "lstm_hidden", "d_mention", "ffn_hidden",
                "learning_rate", "seed", "epochs", "mention_tuple_cap"):
        value = s.get(key)
        if value is not None:
            overrides[key] = value
    aggregator = s.get("aggregator")
    if aggregator is not None:
        overrides["aggregator"] = Aggregator(aggregator)
    dtype = s.get("dtype")
    if dtype is not None:
        overrides["dtype_name"] = dtype
    config = dataclasses.replace(ModelConfig(), **overrides)
    return variant_config(config, s.get("variant", "doc"))


def _cmd_train(args: argparse.Namespace) -> int:
    s = _Settings(args, {"config", "processed", "candidates", "word_vectors", "out"} | _MODEL_KEYS)
    processed_path = _input_path(s.require("processed"), "processed")
    candidates_path = _input_path(s.require("candidates"), "candidates")
    out_path = Path(s.require("out"))
    config = _model_config(s)

    inputs = {"processed": processed_path, "candidates": candidates_path}
    processed = _load_processed_map(processed_path)
    labeled = cand_mod.load_candidates(candidates_path)
    if any(c.label is None for c in labeled):
        raise DataError("training candidates must be labeled (run label with kb)")

    word_vectors = None
    vectors_value = s.get("word_vectors")
    if vectors_value is not None:
        vectors_path = _input_path(vectors_value, "word_vectors")
        word_vectors = load_word_vectors(vectors_path, config.d_word)
        inputs["word_vectors"] = vectors_path

    vocab = Vocabulary.from_documents(pd.document for pd in processed.values())
    model = RelationClassifier(config, vocab, arity=cand_mod.TERNARY.arity, word_vectors=word_vectors)
    batches = build_batches(processed, labeled, cand_mod.TERNARY, config, vocab)
    train(model, batches)
    save_checkpoint(model, out_path)
    _write_manifest(out_path, "train", s.effective, config.seed, inputs, {"checkpoint": out_path})
    log.info("trained %s-scope model for %d epochs", config.scope.value, config.epochs)
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    s = _Settings(args, {"config", "checkpoint", "processed", "candidates", "name", "out"})
    checkpoint_path = _input_path(s.require("checkpoint"), "checkpoint")
    processed_path = _input_path(s.require("processed"), "processed")
    candidates_path = _input_path(s.require("candidates"), "candidates")
    out_path = Path(s.require("out"))

    model = load_checkpoint(checkpoint_path)
    processed = _load_processed_map(processed_path)
    cands = cand_mod.load_candidates(candidates_path)
    name = s.get("name")
    if name is None:
        name = next(
            (v for v, (scope, kind) in VARIANTS.items()
             if (scope, kind) == (model.config.scope, model.config.unit_kind)),
            model.config.scope.value,
        )
    batches = build_batches(processed, cands, cand_mod.TERNARY, model.config, model.vocab)
    preds = predict_batches(model, batches, name)
    save_predictions(preds, out_path)
    _write_manifest(
        out_path, "predict", s.effective, model.config.seed,
        {"checkpoint": checkpoint_path, "processed": processed_path, "candidates": candidates_path},
        {"predictions": out_path},
    )
    log.info("wrote %d predictions (%s)", len(preds), name)
    return 0


def _cmd_ensemble(args: argparse.Namespace) -> int:
    s = _Settings(args, {"config", "inputs", "kind", "name", "out"})
    input_values = s.require("inputs")
    if isinstance(input_values, str):
        input_values = [input_values]
    if not input_values:
        raise UsageError("ensemble needs at least one predictions file")
    kind = ensemble_mod.EnsembleKind(s.get("kind", "noisy_or"))
    name = s.get("name", "ensemble")
    out_path = Path(s.require("out"))

    inputs = {}
    prediction_sets = []
    for i, value in enumerate(input_values):
        path = _input_path(value, f"inputs[{i}]")
        inputs[f"predictions_{i}"] = path
        prediction_sets.append(load_predictions(path))

    # Both operators are associative, so one flat combine per entity tuple
    # equals units-then-variants staging.
    merged: dict = {}
    units: dict = {}
    for preds in prediction_sets:
        for p in preds:
            merged.setdefault(p.key(), []).append(p.p)
            units.setdefault(p.key(), set()).update(p.units)
    combined = [
        ensemble_mod.Prediction(
            doc_id=doc_id,
            entities=entities,
            p=ensemble_mod.combine(ps, kind),
            variant=name,
            units=tuple(sorted(units[(doc_id, entities)])),
        )
        for (doc_id, entities), ps in sorted(merged.items())
    ]
    save_predictions(combined, out_path)
    _write_manifest(out_path, "ensemble", s.effective, None, inputs, {"predictions": out_path})
    log.info("combined %d files into %d tuple scores", len(prediction_sets), len(combined))
    return 0


def _tuples_from_candidates(path: Path) -> set[tuple[str, tuple[str, ...]]]:
    return {(c.doc_id, c.entities) for c in cand_mod.load_candidates(path)}


def _cmd_eval(args: argparse.Namespace) -> int:
    s = _Settings(
        args,
        {"config", "predictions", "gold", "threshold", "dev_predictions", "dev_gold",
         "candidates", "out"},
    )
    predictions_path = _input_path(s.require("predictions"), "predictions")
    gold_path = _input_path(s.require("gold"), "gold")
    out_path = Path(s.require("out"))

    preds = load_predictions(predictions_path)
    gold = eval_mod.load_gold(gold_path, cand_mod.TERNARY.arity)
    inputs = {"predictions": predictions_path, "gold": gold_path}

    threshold = s.get("threshold")
    dev_pred_value = s.get("dev_predictions")
    if threshold is None and dev_pred_value is not None:
        dev_gold_value = s.get("dev_gold")
        if dev_gold_value is None:
            raise UsageError("dev_predictions requires dev_gold")
        dev_pred_path = _input_path(dev_pred_value, "dev_predictions")
        dev_gold_path = _input_path(dev_gold_value, "dev_gold")
        inputs["dev_predictions"] = dev_pred_path
        inputs["dev_gold"] = dev_gold_path
        threshold = eval_mod.tune_threshold(
            load_predictions(dev_pred_path), eval_mod.load_gold(dev_gold_path, cand_mod.TERNARY.arity)
        )

    candidate_tuples = None
    candidates_value = s.get("candidates")
    if candidates_value is not None:
        candidates_path = _input_path(candidates_value, "candidates")
        candidate_tuples = _tuples_from_candidates(candidates_path)
        inputs["candidates"] = candidates_path

    report = eval_mod.evaluate(preds, gold, threshold=threshold, candidate_tuples=candidate_tuples)
    out_path.write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_manifest(out_path, "eval", s.effective, None, inputs, {"report": out_path})
    print(report.to_table())
    return 0


def _cmd_breakdown(args: argparse.Namespace) -> int:
    s = _Settings(args, {"config", "predictions", "gold", "processed", "threshold", "out"})
    predictions_path = _input_path(s.require("predictions"), "predictions")
    gold_path = _input_path(s.require("gold"), "gold")
    processed_path = _input_path(s.require("processed"), "processed")
    out_path = Path(s.require("out"))

    preds = load_predictions(predictions_path)
    gold = eval_mod.load_gold(gold_path, cand_mod.TERNARY.arity)
    processed = _load_processed_map(processed_path)
    threshold = s.get("threshold")
    if threshold is None:
        threshold = eval_mod.tune_threshold(preds, gold)

    correct = [
        (p.doc_id, p.entities)
        for p in preds
        if p.p >= threshold and p.entities in gold.get(p.doc_id, ())
    ]
    counts = eval_mod.scope_breakdown(correct, processed)
    payload = {"threshold": threshold, "correct": len(correct), "breakdown": counts}
    out_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_manifest(
        out_path, "breakdown", s.effective, None,
        {"predictions": predictions_path, "gold": gold_path, "processed": processed_path},
        {"report": out_path},
    )
    for scope in eval_mod.SCOPES:
        print(f"{scope:<36}{counts[scope]}")
    return 0


def _cmd_prcurve(args: argparse.Namespace) -> int:
    s = _Settings(args, {"config", "predictions", "gold", "out"})
    predictions_path = _input_path(s.require("predictions"), "predictions")
    gold_path = _input_path(s.require("gold"), "gold")
    out_path = Path(s.require("out"))

    preds = load_predictions(predictions_path)
    gold = eval_mod.load_gold(gold_path, cand_mod.TERNARY.arity)
    rows = eval_mod.pr_curve(preds, gold)
    eval_mod.save_pr_curve(rows, out_path)
    _write_manifest(
        out_path, "prcurve", s.effective, None,
        {"predictions": predictions_path, "gold": gold_path}, {"curve": out_path},
    )
    log.info("wrote %d curve points", len(rows))
    return 0


# --------------------------------------------------------------------------
# argument wiring


def _add_config_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat JSON config file; flags override its values")


def build_parser() -> _Parser:
    parser = _Parser(prog="docnre", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    _add_config_flag(p)
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--num-docs", dest="num_docs", type=int)
    p.add_argument("--num-drugs", dest="num_drugs", type=int)
    p.add_argument("--num-genes", dest="num_genes", type=int)
    p.add_argument("--facts-per-doc", dest="facts_per_doc", type=int)
    p.add_argument("--scope-mix", dest="scope_mix", help="sentence,paragraph,cross fractions")
    p.add_argument("--distractor-rate", dest="distractor_rate", type=float)
    p.add_argument("--paragraphs-per-doc", dest="paragraphs_per_doc", type=int)
    p.add_argument("--sentences-per-paragraph", dest="sentences_per_paragraph", type=int)
    p.add_argument("--evidence-repeats", dest="evidence_repeats", type=int)
    p.add_argument("--synonyms-per-entity", dest="synonyms_per_entity", type=int)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("preprocess", help="ingest, tag, and mask a corpus")
    _add_config_flag(p)
    p.add_argument("--corpus")
    p.add_argument("--drug-dict", dest="drug_dict")
    p.add_argument("--gene-dict", dest="gene_dict")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("link", help="rule-based gene assignment for mutations")
    _add_config_flag(p)
    p.add_argument("--corpus", help="raw corpus (linking reads unmasked text)")
    p.add_argument("--drug-dict", dest="drug_dict")
    p.add_argument("--gene-dict", dest="gene_dict")
    p.add_argument("--seed-map", dest="seed_map")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_link)

    p = sub.add_parser("label", help="generate candidates and distant labels")
    _add_config_flag(p)
    p.add_argument("--processed")
    p.add_argument("--scale", choices=[s.value for s in cand_mod.Scale])
    p.add_argument("--kb", help="fact TSV; omit for unlabeled candidates")
    p.add_argument("--assignments", help="gene-mutation assignments; enables the filter")
    p.add_argument("--exclude-docs", dest="exclude_docs", help="file of doc_ids to skip")
    p.add_argument("--max-negatives-per-doc", dest="max_negatives_per_doc", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_label)

    p = sub.add_parser("train", help="train one model variant")
    _add_config_flag(p)
    p.add_argument("--processed")
    p.add_argument("--candidates")
    p.add_argument("--word-vectors", dest="word_vectors")
    p.add_argument("--out", help="checkpoint path")
    p.add_argument("--variant", choices=sorted(VARIANTS))
    p.add_argument("--aggregator", choices=[a.value for a in Aggregator])
    p.add_argument("--d-word", dest="d_word", type=int)
    p.add_argument("--d-unit-index", dest="d_unit_index", type=int)
    p.add_argument("--lstm-hidden", dest="lstm_hidden", type=int)
    p.add_argument("--d-mention", dest="d_mention", type=int)
    p.add_argument("--ffn-hidden", dest="ffn_hidden", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--mention-tuple-cap", dest="mention_tuple_cap", type=int)
    p.add_argument("--dtype", choices=["float32", "float64"])
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="score candidates with a checkpoint")
    _add_config_flag(p)
    p.add_argument("--checkpoint")
    p.add_argument("--processed")
    p.add_argument("--candidates")
    p.add_argument("--name", help="variant name recorded in predictions")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("ensemble", help="combine prediction files per entity tuple")
    _add_config_flag(p)
    p.add_argument("--inputs", nargs="+", help="predictions JSONL files")
    p.add_argument("--kind", choices=[k.value for k in ensemble_mod.EnsembleKind])
    p.add_argument("--name")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_ensemble)

    p = sub.add_parser("eval", help="score predictions against gold facts")
    _add_config_flag(p)
    p.add_argument("--predictions")
    p.add_argument("--gold")
    p.add_argument("--threshold", type=float)
    p.add_argument("--dev-predictions", dest="dev_predictions")
    p.add_argument("--dev-gold", dest="dev_gold")
    p.add_argument("--candidates", help="for max recall")
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("breakdown", help="correct extractions by co-occurrence scope")
    _add_config_flag(p)
    p.add_argument("--predictions")
    p.add_argument("--gold")
    p.add_argument("--processed")
    p.add_argument("--threshold", type=float)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_breakdown)

    p = sub.add_parser("prcurve", help="precision-recall curve CSV")
    _add_config_flag(p)
    p.add_argument("--predictions")
    p.add_argument("--gold")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_prcurve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
