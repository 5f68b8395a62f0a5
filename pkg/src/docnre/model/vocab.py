"""Token vocabulary and optional pretrained word-vector loading."""
from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Iterable, Sequence

from docnre.corpus import Document
from docnre.errors import DataError

UNK = "<unk>"


class Vocabulary:
    """Fixed token-to-index map with a dedicated unknown-token slot at 0."""

    def __init__(self, tokens: Sequence[str]):
        if UNK in tokens:
            raise DataError(f"{UNK!r} is reserved")
        if len(set(tokens)) != len(tokens):
            raise DataError("vocabulary tokens must be unique")
        self._tokens: tuple[str, ...] = (UNK, *tokens)
        self._index = {t: i for i, t in enumerate(self._tokens)}

    @classmethod
    def from_documents(cls, documents: Iterable[Document], min_count: int = 1) -> "Vocabulary":
        counts: Counter = Counter()
        for doc in documents:
            counts.update(doc.tokens)
        return cls(sorted(t for t, c in counts.items() if c >= min_count))

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    @property
    def tokens(self) -> tuple[str, ...]:
        return self._tokens

    def index(self, token: str) -> int:
        return self._index.get(token, 0)

    def indices(self, tokens: Iterable[str]) -> list[int]:
        return [self.index(t) for t in tokens]

    def to_json(self) -> dict:
        return {"tokens": list(self._tokens[1:])}

    @classmethod
    def from_json(cls, data: dict) -> "Vocabulary":
        return cls(list(data["tokens"]))


def load_word_vectors(path: str | Path, dim: int) -> dict[str, list[float]]:
    """Read `token v1 ... v_dim` lines, whitespace separated."""
    vectors: dict[str, list[float]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != dim + 1:
                raise DataError(f"{path}:{lineno}: expected a token plus {dim} numbers")
            try:
                vectors[parts[0]] = [float(x) for x in parts[1:]]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    return vectors
