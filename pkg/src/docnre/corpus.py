"""Document ingestion, tokenization, and discourse segmentation.

A corpus file is JSONL, one document per line:

    {"doc_id": "d1", "paragraphs": [["First sentence.", "Second."], ["Third."]]}

Sentences arrive pre-split; tokenization is deterministic so that every
downstream artifact can reference token indices.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from docnre.errors import DataError


class UnitKind(str, Enum):
    SENTENCE = "sentence"
    PARAGRAPH = "paragraph"


@dataclass(frozen=True)
class DiscourseUnit:
    """A sentence or paragraph, as a half-open token-index interval."""

    kind: UnitKind
    index: int
    start: int
    stop: int

    def __len__(self) -> int:
        return self.stop - self.start

    def contains(self, token_index: int) -> bool:
        return self.start <= token_index < self.stop


def _split_whitespace_token(tok: str) -> list[str]:
    # Peel leading/trailing punctuation one character at a time; interior
    # characters (hyphens, slashes, dots) are never touched, so tokens like
    # "EGFR-T790M" and "p.V600E" survive whole.
    lead: list[str] = []
    while len(tok) > 1 and not tok[0].isalnum():
        lead.append(tok[0])
        tok = tok[1:]
    trail: list[str] = []
    while len(tok) > 1 and not tok[-1].isalnum():
        trail.append(tok[-1])
        tok = tok[:-1]
    return lead + [tok] + trail[::-1]


def tokenize(raw_sentence: str) -> list[str]:
    """Deterministic tokenizer: whitespace split, then punctuation peeling.

    Joining the output with single spaces and re-tokenizing yields the same
    token list.
    """
    out: list[str] = []
    for tok in raw_sentence.split():
        out.extend(_split_whitespace_token(tok))
    return out


@dataclass(frozen=True)
class Document:
    """An immutable tokenized document.

    ``paragraphs`` is nested paragraph -> sentence -> tokens. Sentence and
    paragraph indices are global, 0-based, in document order; sentences never
    span paragraphs.
    """

    doc_id: str
    paragraphs: tuple[tuple[tuple[str, ...], ...], ...]

    @classmethod
    def from_raw(cls, doc_id: str, raw_paragraphs: Sequence[Sequence[str]]) -> "Document":
        return cls(
            doc_id=doc_id,
            paragraphs=tuple(
                tuple(tuple(tokenize(sent)) for sent in para) for para in raw_paragraphs
            ),
        )

    @classmethod
    def from_tokens(cls, doc_id: str, token_paragraphs: Sequence[Sequence[Sequence[str]]]) -> "Document":
        return cls(
            doc_id=doc_id,
            paragraphs=tuple(
                tuple(tuple(sent) for sent in para) for para in token_paragraphs
            ),
        )

    @cached_property
    def tokens(self) -> tuple[str, ...]:
        return tuple(tok for para in self.paragraphs for sent in para for tok in sent)

    @cached_property
    def token_coords(self) -> tuple[tuple[int, int], ...]:
        """Per-token (paragraph_index, sentence_index), sentence index global."""
        coords: list[tuple[int, int]] = []
        sent_idx = 0
        for p_idx, para in enumerate(self.paragraphs):
            for sent in para:
                coords.extend((p_idx, sent_idx) for _ in sent)
                sent_idx += 1
        return tuple(coords)

    @cached_property
    def sentence_units(self) -> tuple[DiscourseUnit, ...]:
        units: list[DiscourseUnit] = []
        pos = 0
        sent_idx = 0
        for para in self.paragraphs:
            for sent in para:
                units.append(DiscourseUnit(UnitKind.SENTENCE, sent_idx, pos, pos + len(sent)))
                pos += len(sent)
                sent_idx += 1
        return tuple(units)

    @cached_property
    def paragraph_units(self) -> tuple[DiscourseUnit, ...]:
        units: list[DiscourseUnit] = []
        pos = 0
        for p_idx, para in enumerate(self.paragraphs):
            length = sum(len(sent) for sent in para)
            units.append(DiscourseUnit(UnitKind.PARAGRAPH, p_idx, pos, pos + length))
            pos += length
        return tuple(units)

    def units(self, kind: UnitKind) -> tuple[DiscourseUnit, ...]:
        return self.sentence_units if kind == UnitKind.SENTENCE else self.paragraph_units

    @property
    def num_sentences(self) -> int:
        return len(self.sentence_units)

    @property
    def num_paragraphs(self) -> int:
        return len(self.paragraphs)

    def sentence_of(self, token_index: int) -> int:
        return self.token_coords[token_index][1]

    def paragraph_of(self, token_index: int) -> int:
        return self.token_coords[token_index][0]

    def to_record(self) -> dict:
        """Corpus-file form: sentences as space-joined token strings."""
        return {
            "doc_id": self.doc_id,
            "paragraphs": [[" ".join(sent) for sent in para] for para in self.paragraphs],
        }


def units(document: Document, kind: UnitKind) -> tuple[DiscourseUnit, ...]:
    """Discourse units of one kind, in document order."""
    return document.units(kind)


def _parse_line(line: str, lineno: int) -> Document:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"corpus line {lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(rec, dict) or "doc_id" not in rec:
        raise DataError(f"corpus line {lineno}: missing doc_id")
    if "paragraphs" not in rec:
        raise DataError(f"corpus line {lineno}: missing paragraphs")
    doc_id = rec["doc_id"]
    paragraphs = rec["paragraphs"]
    if not isinstance(doc_id, str) or not doc_id:
        raise DataError(f"corpus line {lineno}: doc_id must be a non-empty string")
    if not isinstance(paragraphs, list) or not all(
        isinstance(p, list) and all(isinstance(s, str) for s in p) for p in paragraphs
    ):
        raise DataError(f"corpus line {lineno}: paragraphs must be a list of lists of strings")
    return Document.from_raw(doc_id, paragraphs)


def ingest(path: str | Path) -> list[Document]:
    """Read a JSONL corpus file into validated, tokenized documents."""
    docs: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            doc = _parse_line(line, lineno)
            if doc.doc_id in seen:
                raise DataError(f"corpus line {lineno}: duplicate doc_id {doc.doc_id!r}")
            seen.add(doc.doc_id)
            docs.append(doc)
    return docs


def save_corpus(documents: Iterable[Document], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in documents:
            fh.write(json.dumps(doc.to_record(), sort_keys=True) + "\n")
