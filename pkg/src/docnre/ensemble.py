"""Probability-level combination across discourse units and model variants.

Both operators are associative and commutative, so combining unit scores
into a per-variant document score and then combining variants gives the
same result as one flat combine.
"""
from __future__ import annotations

from enum import Enum
from typing import Iterable, Mapping, Sequence

from docnre.enttypes import EntityType
from docnre.errors import DataError
from docnre.genelink import GeneMutationAssignment
from docnre.predictions import Prediction


class EnsembleKind(str, Enum):
    MAX = "max"
    NOISY_OR = "noisy_or"


def combine(probs: Sequence[float], kind: EnsembleKind) -> float:
    """Max, or noisy-or: 1 - prod(1 - p_i)."""
    if not probs:
        raise DataError("combine needs at least one probability")
    for p in probs:
        if not 0.0 <= p <= 1.0:
            raise DataError(f"probability {p!r} outside [0, 1]")
    if kind == EnsembleKind.MAX:
        return max(probs)
    acc = 1.0
    for p in probs:
        acc *= 1.0 - p
    return 1.0 - acc


def _grouped(predictions: Iterable[Prediction]) -> dict[tuple[str, tuple[str, ...]], list[Prediction]]:
    grouped: dict[tuple[str, tuple[str, ...]], list[Prediction]] = {}
    for p in predictions:
        grouped.setdefault(p.key(), []).append(p)
    return grouped


def document_scores(
    unit_predictions: Iterable[Prediction], kind: EnsembleKind, variant: str
) -> list[Prediction]:
    """Collapse per-unit scores to one document-level score per entity tuple.

    Tuples with no qualifying unit simply produce no prediction; they sit
    outside this variant's max recall.
    """
    out: list[Prediction] = []
    for (doc_id, entities), preds in sorted(_grouped(unit_predictions).items()):
        preds.sort(key=lambda p: p.units)
        units = tuple(sorted({u for p in preds for u in p.units}))
        out.append(
            Prediction(
                doc_id=doc_id,
                entities=entities,
                p=combine([p.p for p in preds], kind),
                variant=variant,
                units=units,
            )
        )
    return out


def multiscale(
    variant_predictions: Sequence[Iterable[Prediction]],
    kind: EnsembleKind,
    variant: str = "multiscale",
) -> list[Prediction]:
    """Combine document-level scores across variants, tuple by tuple.

    A variant that produced no prediction for a tuple is skipped, not
    counted as zero: it expresses no opinion on tuples outside its scope.
    Coverage is therefore the union of the variants' coverages.
    """
    merged: dict[tuple[str, tuple[str, ...]], list[float]] = {}
    for preds in variant_predictions:
        for p in preds:
            merged.setdefault(p.key(), []).append(p.p)
    return [
        Prediction(doc_id=doc_id, entities=entities, p=combine(ps, kind), variant=variant)
        for (doc_id, entities), ps in sorted(merged.items())
    ]


def subrelation_join(
    pair_predictions: Iterable[Prediction],
    pair_types: Sequence[EntityType],
    assignments: Mapping[str, GeneMutationAssignment],
    variant: str = "subrelation_join",
) -> list[Prediction]:
    """Lift drug-gene or drug-mutation pair scores to ternary tuples.

    A drug-mutation score attaches the mutation's assigned gene; a drug-gene
    score fans out to every mutation assigned to that gene in the document
    (keeping the pair score). Unassigned mutations yield nothing. Output
    entity order is (drug, gene, mutation).
    """
    pair_types = tuple(pair_types)
    if pair_types == (EntityType.DRUG, EntityType.MUTATION):
        attach_gene = True
    elif pair_types == (EntityType.DRUG, EntityType.GENE):
        attach_gene = False
    else:
        raise DataError("pair join supports drug-gene and drug-mutation schemas only")

    out: list[Prediction] = []
    for pred in sorted(pair_predictions, key=lambda p: p.key()):
        a = assignments.get(pred.doc_id)
        if a is None:
            continue
        drug, partner = pred.entities
        if attach_gene:
            gene = a.gene_for.get(partner)
            if gene is None:
                continue
            triples = [(drug, gene, partner)]
        else:
            triples = [
                (drug, partner, mut)
                for mut in sorted(a.gene_for)
                if a.gene_for[mut] == partner
            ]
        for triple in triples:
            out.append(
                Prediction(
                    doc_id=pred.doc_id,
                    entities=triple,
                    p=pred.p,
                    variant=variant,
                    units=pred.units,
                )
            )
    return out
