"""Entity-centric relation candidates at sentence, paragraph, and document scale.

A candidate pairs an ordered entity tuple with a text span: one discourse
unit (sentence or paragraph scale) or the whole document. Mention-tuple
enumeration and distant-supervision labeling live here too.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from docnre.corpus import Document, UnitKind
from docnre.enttypes import EntityType
from docnre.errors import DataError
from docnre.ner import Mention

NEGATIVE = 0
POSITIVE = 1

KBFact = tuple[str, ...]


class Scale(str, Enum):
    SENTENCE = "sentence"
    PARAGRAPH = "paragraph"
    DOCUMENT = "document"


# Which discourse-unit kind a single-unit scale refers to.
_SCALE_UNIT_KIND = {Scale.SENTENCE: UnitKind.SENTENCE, Scale.PARAGRAPH: UnitKind.PARAGRAPH}


@dataclass(frozen=True)
class RelationSchema:
    """Ordered entity-type signature of the relation being extracted."""

    name: str
    entity_types: tuple[EntityType, ...]
    num_classes: int = 2

    def __post_init__(self) -> None:
        if len(self.entity_types) < 2:
            raise DataError("relation schema needs at least 2 entity slots")
        if len(set(self.entity_types)) != len(self.entity_types):
            raise DataError("relation schema slots must have distinct entity types")
        if self.num_classes < 2:
            raise DataError("relation schema needs at least 2 classes")

    @property
    def arity(self) -> int:
        return len(self.entity_types)

    def slot_of(self, entity_type: EntityType) -> int:
        try:
            return self.entity_types.index(entity_type)
        except ValueError:
            raise DataError(f"schema {self.name} has no {entity_type.value} slot") from None


TERNARY = RelationSchema("drug_gene_mutation", (EntityType.DRUG, EntityType.GENE, EntityType.MUTATION))
DRUG_GENE = RelationSchema("drug_gene", (EntityType.DRUG, EntityType.GENE))
DRUG_MUTATION = RelationSchema("drug_mutation", (EntityType.DRUG, EntityType.MUTATION))


@dataclass(frozen=True)
class CandidateTuple:
    """One classification unit: an entity tuple plus the span it lives in.

    unit_index is the document-level sentence or paragraph index for
    single-unit scales and None at document scale.
    """

    doc_id: str
    entities: tuple[str, ...]
    scale: Scale
    unit_index: int | None = None
    label: int | None = None

    def __post_init__(self) -> None:
        if (self.unit_index is None) != (self.scale == Scale.DOCUMENT):
            raise DataError("unit_index is required at sentence/paragraph scale and forbidden at document scale")

    def sort_key(self) -> tuple:
        return (self.doc_id, self.entities, self.scale.value, -1 if self.unit_index is None else self.unit_index)

    def to_record(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "entities": list(self.entities),
            "scale": self.scale.value,
            "unit_index": self.unit_index,
            "label": self.label,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "CandidateTuple":
        return cls(
            doc_id=rec["doc_id"],
            entities=tuple(rec["entities"]),
            scale=Scale(rec["scale"]),
            unit_index=rec["unit_index"],
            label=rec["label"],
        )


@dataclass(frozen=True)
class MentionTupleSet:
    """All co-occurring mention combinations for one entity subset.

    Each element pairs a mention tuple (schema-slot order, restricted to the
    subset) with the document-level index of the unit containing it. Empty is
    valid: the model substitutes a learned fallback vector.
    """

    subset: tuple[int, ...]
    tuples: tuple[tuple[tuple[Mention, ...], int], ...]

    def __len__(self) -> int:
        return len(self.tuples)


def relation_subsets(arity: int) -> list[tuple[int, ...]]:
    """Entity-slot subsets of size >= 2, smallest first, then lexicographic."""
    out = [
        combo
        for size in range(2, arity + 1)
        for combo in itertools.combinations(range(arity), size)
    ]
    assert len(out) == 2**arity - arity - 1
    return out


def _ids_by_slot_per_unit(
    mentions: Sequence[Mention], schema: RelationSchema, kind: UnitKind
) -> dict[int, list[set[str]]]:
    per_unit: dict[int, list[set[str]]] = {}
    slot_of = {t: i for i, t in enumerate(schema.entity_types)}
    for m in mentions:
        slot = slot_of.get(m.entity_type)
        if slot is None:
            continue
        unit = m.sentence_index if kind == UnitKind.SENTENCE else m.paragraph_index
        per_unit.setdefault(unit, [set() for _ in schema.entity_types])[slot].add(m.entity_id)
    return per_unit


def generate(
    document: Document,
    mentions: Sequence[Mention],
    schema: RelationSchema,
    scale: Scale,
) -> list[CandidateTuple]:
    """Enumerate candidates whose entity tuple fully co-occurs in the span.

    Sentence/paragraph scale yields one candidate per (entity tuple, unit);
    document scale yields one per entity tuple with every slot mentioned
    anywhere in the document.
    """
    out: list[CandidateTuple] = []
    if scale == Scale.DOCUMENT:
        slots: list[set[str]] = [set() for _ in schema.entity_types]
        slot_of = {t: i for i, t in enumerate(schema.entity_types)}
        for m in mentions:
            slot = slot_of.get(m.entity_type)
            if slot is not None:
                slots[slot].add(m.entity_id)
        for combo in itertools.product(*(sorted(s) for s in slots)):
            out.append(CandidateTuple(document.doc_id, combo, scale))
        return out

    per_unit = _ids_by_slot_per_unit(mentions, schema, _SCALE_UNIT_KIND[scale])
    for unit in sorted(per_unit):
        for combo in itertools.product(*(sorted(s) for s in per_unit[unit])):
            out.append(CandidateTuple(document.doc_id, combo, scale, unit))
    return out


def mention_tuples(
    document: Document,
    mentions: Sequence[Mention],
    candidate: CandidateTuple,
    schema: RelationSchema,
    subset: Sequence[int],
    unit_kind: UnitKind,
    cap: int | None = None,
) -> MentionTupleSet:
    """Cross product of the subset's entity mentions within each unit.

    Single-unit candidates restrict to their own unit (unit_kind must match
    the candidate's scale); document candidates range over every unit of
    unit_kind. An optional cap keeps the earliest tuples by token position.
    """
    subset = tuple(subset)
    if len(subset) < 2:
        raise DataError("mention tuples need a subset of at least 2 entity slots")
    if candidate.scale != Scale.DOCUMENT and _SCALE_UNIT_KIND[candidate.scale] != unit_kind:
        raise DataError(
            f"{candidate.scale.value}-scale candidate cannot use {unit_kind.value} units"
        )

    def unit_of(m: Mention) -> int:
        return m.sentence_index if unit_kind == UnitKind.SENTENCE else m.paragraph_index

    per_unit: dict[int, dict[int, list[Mention]]] = {}
    wanted = {
        (candidate.entities[slot], schema.entity_types[slot]): slot for slot in subset
    }
    for m in sorted(mentions, key=lambda m: m.token_index):
        slot = wanted.get((m.entity_id, m.entity_type))
        if slot is None:
            continue
        unit = unit_of(m)
        if candidate.unit_index is not None and unit != candidate.unit_index:
            continue
        per_unit.setdefault(unit, {}).setdefault(slot, []).append(m)

    tuples: list[tuple[tuple[Mention, ...], int]] = []
    for unit in sorted(per_unit):
        by_slot = per_unit[unit]
        if any(slot not in by_slot for slot in subset):
            continue
        for combo in itertools.product(*(by_slot[slot] for slot in subset)):
            tuples.append((combo, unit))
    if cap is not None and len(tuples) > cap:
        tuples.sort(key=lambda t: tuple(m.token_index for m in t[0]))
        tuples = tuples[:cap]
    return MentionTupleSet(subset=subset, tuples=tuple(tuples))


def load_kb(path: str | Path, arity: int) -> set[KBFact]:
    """Load tab-separated canonical fact tuples; # starts a comment line."""
    facts: set[KBFact] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != arity or any(not p for p in parts):
                raise DataError(f"{path}:{lineno}: expected {arity} tab-separated ids")
            facts.add(tuple(parts))
    return facts


def save_kb(facts: Iterable[KBFact], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for fact in sorted(facts):
            fh.write("\t".join(fact) + "\n")


def project_kb(kb: Iterable[KBFact], slots: Sequence[int]) -> set[KBFact]:
    """Project n-ary facts onto a subset of slots (for pair baselines)."""
    return {tuple(fact[i] for i in slots) for fact in kb}


def distant_label(candidates: Iterable[CandidateTuple], kb: set[KBFact]) -> list[CandidateTuple]:
    """Positive iff the entity tuple is a KB fact; no re-weighting."""
    return [
        replace(c, label=POSITIVE if c.entities in kb else NEGATIVE) for c in candidates
    ]


def cap_negatives(
    candidates: Sequence[CandidateTuple], max_negatives_per_doc: int
) -> list[CandidateTuple]:
    """Keep at most N negatives per document, earliest in sort order.

    Deterministic subsampling knob for desk-scale runs; positives always kept.
    """
    if max_negatives_per_doc < 0:
        raise DataError("negative cap must be >= 0")
    kept: list[CandidateTuple] = []
    seen_neg: dict[str, int] = {}
    for c in sorted(candidates, key=CandidateTuple.sort_key):
        if c.label is None:
            raise DataError("cannot cap negatives over unlabeled candidates")
        if c.label == NEGATIVE:
            n = seen_neg.get(c.doc_id, 0)
            if n >= max_negatives_per_doc:
                continue
            seen_neg[c.doc_id] = n + 1
        kept.append(c)
    return kept


def save_candidates(candidates: Iterable[CandidateTuple], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c in candidates:
            fh.write(json.dumps(c.to_record(), sort_keys=True) + "\n")


def load_candidates(path: str | Path) -> list[CandidateTuple]:
    out: list[CandidateTuple] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"candidates line {lineno}: invalid JSON ({exc.msg})") from exc
            try:
                out.append(CandidateTuple.from_record(rec))
            except (KeyError, ValueError) as exc:
                raise DataError(f"candidates line {lineno}: {exc}") from exc
    return out


def group_by_document(candidates: Iterable[CandidateTuple]) -> dict[str, list[CandidateTuple]]:
    grouped: dict[str, list[CandidateTuple]] = {}
    for c in candidates:
        grouped.setdefault(c.doc_id, []).append(c)
    return grouped
