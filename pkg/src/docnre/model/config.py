"""Model hyperparameters and the three standard variant presets."""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import torch

from docnre.corpus import UnitKind
from docnre.errors import DataError


class ModelScope(str, Enum):
    SINGLE_UNIT = "single_unit"
    WHOLE_DOCUMENT = "whole_document"


class Aggregator(str, Enum):
    LOG_SUM_EXP = "logsumexp"
    MAX = "max"


@dataclass(frozen=True)
class ModelConfig:
    """Dimensions, scope, and optimization settings.

    Defaults mirror the reference setting: 200d word vectors, 100d sinusoidal
    unit-index encoding, a single-layer BiLSTM with 200 units per direction,
    400d mention and hidden layers, Adam at 1e-5 with one document per batch.
    """

    d_word: int = 200
    d_unit_index: int = 100
    lstm_hidden: int = 200
    d_mention: int = 400
    ffn_hidden: int = 400
    num_classes: int = 2
    unit_kind: UnitKind = UnitKind.PARAGRAPH
    scope: ModelScope = ModelScope.WHOLE_DOCUMENT
    aggregator: Aggregator = Aggregator.LOG_SUM_EXP
    learning_rate: float = 1e-5
    seed: int = 0
    epochs: int = 30
    mention_tuple_cap: int | None = None
    # Tests pin float64; float32 is the speed option for real training runs.
    dtype_name: str = "float64"

    def __post_init__(self) -> None:
        for name in ("d_word", "d_unit_index", "lstm_hidden", "d_mention", "ffn_hidden"):
            if getattr(self, name) <= 0:
                raise DataError(f"{name} must be positive")
        if self.d_unit_index % 2 != 0:
            raise DataError("d_unit_index must be even (interleaved sin/cos pairs)")
        if self.num_classes < 2:
            raise DataError("num_classes must be at least 2")
        if self.epochs < 0:
            raise DataError("epochs must be >= 0")
        if self.mention_tuple_cap is not None and self.mention_tuple_cap < 1:
            raise DataError("mention_tuple_cap must be >= 1 when set")
        if self.dtype_name not in ("float32", "float64"):
            raise DataError("dtype_name must be float32 or float64")

    @property
    def dtype(self) -> torch.dtype:
        return torch.float64 if self.dtype_name == "float64" else torch.float32

    @property
    def d_input(self) -> int:
        return self.d_word + self.d_unit_index

    @property
    def d_hidden(self) -> int:
        """Per-token BiLSTM output width (both directions)."""
        return 2 * self.lstm_hidden

    def to_json(self) -> dict:
        return {
            "d_word": self.d_word,
            "d_unit_index": self.d_unit_index,
            "lstm_hidden": self.lstm_hidden,
            "d_mention": self.d_mention,
            "ffn_hidden": self.ffn_hidden,
            "num_classes": self.num_classes,
            "unit_kind": self.unit_kind.value,
            "scope": self.scope.value,
            "aggregator": self.aggregator.value,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "epochs": self.epochs,
            "mention_tuple_cap": self.mention_tuple_cap,
            "dtype_name": self.dtype_name,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ModelConfig":
        known = dict(data)
        try:
            known["unit_kind"] = UnitKind(known["unit_kind"])
            known["scope"] = ModelScope(known["scope"])
            known["aggregator"] = Aggregator(known["aggregator"])
        except KeyError as exc:
            raise DataError(f"model config missing key {exc}") from exc
        except ValueError as exc:
            raise DataError(f"model config: {exc}") from exc
        try:
            return cls(**known)
        except TypeError as exc:
            raise DataError(f"model config: {exc}") from exc


# Variant name -> (scope, unit kind). "sent" and "para" score one discourse
# unit at a time; "doc" reads the whole document as a sequence of paragraphs.
VARIANTS: dict[str, tuple[ModelScope, UnitKind]] = {
    "sent": (ModelScope.SINGLE_UNIT, UnitKind.SENTENCE),
    "para": (ModelScope.SINGLE_UNIT, UnitKind.PARAGRAPH),
    "doc": (ModelScope.WHOLE_DOCUMENT, UnitKind.PARAGRAPH),
}


def variant_config(base: ModelConfig, variant: str) -> ModelConfig:
    if variant not in VARIANTS:
        raise DataError(f"unknown variant {variant!r}; expected one of {sorted(VARIANTS)}")
    scope, unit_kind = VARIANTS[variant]
    return replace(base, scope=scope, unit_kind=unit_kind)
