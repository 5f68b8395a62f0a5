"""Turning processed documents plus candidates into per-document tensors.

One document is one batch: every needed discourse unit is encoded exactly
once and all of the document's candidates index into the same flat matrix
of hidden states.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import torch
from torch import Tensor

from docnre.candidates import (
    CandidateTuple,
    RelationSchema,
    Scale,
    mention_tuples,
    relation_subsets,
)
from docnre.corpus import UnitKind
from docnre.errors import DataError
from docnre.model.config import ModelConfig, ModelScope
from docnre.model.network import subset_key
from docnre.model.vocab import Vocabulary
from docnre.ner import ProcessedDocument


def scale_for_config(config: ModelConfig) -> Scale:
    """Which candidate scale this model variant consumes."""
    if config.scope == ModelScope.WHOLE_DOCUMENT:
        return Scale.DOCUMENT
    return Scale.SENTENCE if config.unit_kind == UnitKind.SENTENCE else Scale.PARAGRAPH


@dataclass
class CandidateBatch:
    candidate: CandidateTuple
    # subset key -> (num_tuples, |subset|) rows into the flat hidden matrix
    tuple_indices: dict[str, Tensor]
    contributing_units: tuple[int, ...]


@dataclass
class DocumentBatch:
    doc_id: str
    # (document-level unit index, token-id tensor), sorted by unit index
    units: list[tuple[int, Tensor]]
    candidates: list[CandidateBatch]

    @property
    def labels(self) -> Tensor:
        labels = [c.candidate.label for c in self.candidates]
        if any(label is None for label in labels):
            raise DataError(f"{self.doc_id}: unlabeled candidate in a labeled batch")
        return torch.tensor(labels, dtype=torch.int64)


def build_document_batch(
    processed: ProcessedDocument,
    doc_candidates: Sequence[CandidateTuple],
    schema: RelationSchema,
    config: ModelConfig,
    vocab: Vocabulary,
) -> DocumentBatch:
    document, mentions = processed
    expected_scale = scale_for_config(config)
    subsets = relation_subsets(schema.arity)
    all_units = document.units(config.unit_kind)

    tuple_sets = []
    needed_units: set[int] = set()
    for cand in sorted(doc_candidates, key=CandidateTuple.sort_key):
        if cand.scale != expected_scale:
            raise DataError(
                f"{document.doc_id}: {cand.scale.value}-scale candidate given to a "
                f"{expected_scale.value}-scale model"
            )
        per_subset = {}
        for subset in subsets:
            ts = mention_tuples(
                document, mentions, cand, schema, subset, config.unit_kind,
                cap=config.mention_tuple_cap,
            )
            per_subset[subset] = ts
            needed_units.update(unit for _, unit in ts.tuples)
        tuple_sets.append((cand, per_subset))

    unit_rows: list[tuple[int, Tensor]] = []
    offset_of: dict[int, int] = {}
    offset = 0
    for unit_index in sorted(needed_units):
        unit = all_units[unit_index]
        tokens = document.tokens[unit.start : unit.stop]
        unit_rows.append((unit_index, torch.tensor(vocab.indices(tokens), dtype=torch.int64)))
        offset_of[unit_index] = offset - unit.start
        offset += len(tokens)

    out: list[CandidateBatch] = []
    for cand, per_subset in tuple_sets:
        indices: dict[str, Tensor] = {}
        contributing: set[int] = set()
        for subset, ts in per_subset.items():
            if not ts.tuples:
                continue
            rows = [
                [offset_of[unit] + m.token_index for m in mention_tuple]
                for mention_tuple, unit in ts.tuples
            ]
            indices[subset_key(subset)] = torch.tensor(rows, dtype=torch.int64)
            contributing.update(unit for _, unit in ts.tuples)
        out.append(CandidateBatch(cand, indices, tuple(sorted(contributing))))

    return DocumentBatch(doc_id=document.doc_id, units=unit_rows, candidates=out)


def build_batches(
    processed_docs: Mapping[str, ProcessedDocument],
    candidates: Iterable[CandidateTuple],
    schema: RelationSchema,
    config: ModelConfig,
    vocab: Vocabulary,
) -> list[DocumentBatch]:
    """One batch per document that has candidates, sorted by doc_id."""
    by_doc: dict[str, list[CandidateTuple]] = {}
    for cand in candidates:
        if cand.doc_id not in processed_docs:
            raise DataError(f"candidate references unknown document {cand.doc_id}")
        by_doc.setdefault(cand.doc_id, []).append(cand)
    return [
        build_document_batch(processed_docs[doc_id], by_doc[doc_id], schema, config, vocab)
        for doc_id in sorted(by_doc)
    ]
