"""Scored predictions with provenance, and their JSONL round-trip format."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from docnre.errors import DataError


@dataclass(frozen=True)
class Prediction:
    """Positive-class probability for one document-level entity tuple.

    units lists the document-level discourse-unit indices that contributed;
    it is empty for whole-document model output and for ensembles of
    ensembles, where the notion of a single unit no longer applies.
    """

    doc_id: str
    entities: tuple[str, ...]
    p: float
    variant: str
    units: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise DataError(f"probability {self.p!r} outside [0, 1]")

    @property
    def probabilities(self) -> tuple[float, float]:
        """(negative, positive) class probabilities."""
        return (1.0 - self.p, self.p)

    def key(self) -> tuple[str, tuple[str, ...]]:
        return (self.doc_id, self.entities)

    def to_record(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "entities": list(self.entities),
            "p": self.p,
            "variant": self.variant,
            "units": list(self.units),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Prediction":
        return cls(
            doc_id=rec["doc_id"],
            entities=tuple(rec["entities"]),
            p=float(rec["p"]),
            variant=rec["variant"],
            units=tuple(rec.get("units", ())),
        )


def save_predictions(predictions: Iterable[Prediction], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in predictions:
            rec = p.to_record()
            # repr keeps the float round-trip exact across save/load cycles.
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_predictions(path: str | Path) -> list[Prediction]:
    out: list[Prediction] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"predictions line {lineno}: invalid JSON ({exc.msg})") from exc
            try:
                out.append(Prediction.from_record(rec))
            except (KeyError, ValueError) as exc:
                raise DataError(f"predictions line {lineno}: {exc}") from exc
    return out
