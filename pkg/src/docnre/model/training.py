"""Training loop, inference, and checkpoint round-trip.

Each document is one optimizer step; documents are shuffled each epoch with
a seeded RNG and everything runs single-threaded, so a fixed seed yields
bitwise-identical parameters and predictions.
"""
from __future__ import annotations

import logging
import random
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import torch
from torch import Tensor

from docnre.candidates import CandidateTuple, RelationSchema, Scale, TERNARY
from docnre.errors import DataError, NumericalError
from docnre.model.batching import DocumentBatch, build_batches
from docnre.model.config import ModelConfig
from docnre.model.network import RelationClassifier
from docnre.model.vocab import Vocabulary
from docnre.ner import ProcessedDocument
from docnre.predictions import Prediction

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT_VERSION = 1


def _forward_batch(model: RelationClassifier, batch: DocumentBatch) -> Tensor:
    """(num_candidates, num_classes) logits for one document."""
    if not batch.candidates:
        raise DataError(f"{batch.doc_id}: batch without candidates")
    hidden = [model.encode_unit(token_ids, unit_index) for unit_index, token_ids in batch.units]
    if hidden:
        flat = torch.cat(hidden, dim=0)
    else:
        flat = torch.empty((0, model.config.d_hidden), dtype=model.config.dtype)
    return torch.stack(
        [model.candidate_logits(flat, cand.tuple_indices) for cand in batch.candidates]
    )


def document_loss(model: RelationClassifier, batch: DocumentBatch) -> Tensor:
    """Mean negative log-likelihood; an empty candidate list costs zero."""
    if not batch.candidates:
        return torch.zeros((), dtype=model.config.dtype)
    logits = _forward_batch(model, batch)
    return torch.nn.functional.cross_entropy(logits, batch.labels)


def train(
    model: RelationClassifier,
    batches: Sequence[DocumentBatch],
    epoch_hook: Callable[[int, RelationClassifier], bool | None] | None = None,
) -> RelationClassifier:
    """Adam over per-document batches for the configured epoch count.

    epoch_hook runs after each epoch (for dev evaluation); returning True
    stops training early.
    """
    torch.set_num_threads(1)
    config = model.config
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    order = list(range(len(batches)))
    rng = random.Random(config.seed)
    model.train()
    for epoch in range(config.epochs):
        rng.shuffle(order)
        total = 0.0
        steps = 0
        for i in order:
            batch = batches[i]
            if not batch.candidates:
                continue
            optimizer.zero_grad()
            loss = document_loss(model, batch)
            if not torch.isfinite(loss):
                raise NumericalError(
                    f"non-finite loss at epoch {epoch}, document {batch.doc_id}"
                )
            loss.backward()
            optimizer.step()
            total += float(loss.detach())
            steps += 1
        log.info("epoch %d: mean loss %.6f over %d documents", epoch, total / max(steps, 1), steps)
        if epoch_hook is not None and epoch_hook(epoch, model):
            log.info("early stop after epoch %d", epoch)
            break
    model.eval()
    return model


def predict_batches(
    model: RelationClassifier, batches: Sequence[DocumentBatch], variant: str
) -> list[Prediction]:
    """One prediction per candidate, with contributing-unit provenance."""
    torch.set_num_threads(1)
    model.eval()
    out: list[Prediction] = []
    with torch.no_grad():
        for batch in batches:
            if not batch.candidates:
                continue
            probs = torch.softmax(_forward_batch(model, batch), dim=1)
            for cand_batch, row in zip(batch.candidates, probs):
                cand = cand_batch.candidate
                if cand.unit_index is not None:
                    units = (cand.unit_index,)
                else:
                    units = cand_batch.contributing_units
                out.append(
                    Prediction(
                        doc_id=cand.doc_id,
                        entities=cand.entities,
                        p=float(row[1]),
                        variant=variant,
                        units=units,
                    )
                )
    return out


def predict_documents(
    model: RelationClassifier,
    processed_docs: Mapping[str, ProcessedDocument],
    candidates: Iterable[CandidateTuple],
    variant: str,
    schema: RelationSchema = TERNARY,
) -> list[Prediction]:
    batches = build_batches(processed_docs, candidates, schema, model.config, model.vocab)
    return predict_batches(model, batches, variant)


def save_checkpoint(model: RelationClassifier, path: str | Path) -> None:
    torch.save(
        {
            "format_version": CHECKPOINT_FORMAT_VERSION,
            "config": model.config.to_json(),
            "vocab": model.vocab.to_json(),
            "arity": model.arity,
            "state_dict": model.state_dict(),
        },
        path,
    )


def load_checkpoint(path: str | Path) -> RelationClassifier:
    try:
        payload = torch.load(path, weights_only=False)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise DataError(f"cannot read checkpoint {path}: {exc}") from exc
    if payload.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise DataError(
            f"checkpoint {path}: unsupported format version {payload.get('format_version')!r}"
        )
    config = ModelConfig.from_json(payload["config"])
    vocab = Vocabulary.from_json(payload["vocab"])
    model = RelationClassifier(config, vocab, arity=payload["arity"])
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model
