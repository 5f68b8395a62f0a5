"""Entity mention detection, canonicalization, and type masking.

Three entity types: drugs and genes come from dictionary lookup (two-column
TSV of surface form and canonical id), missense mutations from a fixed
regular expression. Mentions are masked to one dummy token per type so the
classifier can only use position and context, never the surface form.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from docnre.corpus import Document
from docnre.errors import DataError
from docnre.enttypes import EntityType

logger = logging.getLogger(__name__)

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"

# Optional "p." prefix, residue letter, 1-4 digit position, residue letter,
# anchored to a whole token or a hyphen/slash-delimited subtoken.
MISSENSE_RE = re.compile(rf"^(?:p\.)?([{AMINO_ACIDS}])(\d{{1,4}})([{AMINO_ACIDS}])$")

MAX_SURFACE_TOKENS = 5

DUMMY_TOKENS = {
    EntityType.DRUG: "DRUG_X",
    EntityType.GENE: "GENE_X",
    EntityType.MUTATION: "MUT_X",
}

# Deterministic priority for overlap resolution among same-start, same-length
# mentions of different types.
_TYPE_ORDER = {EntityType.DRUG: 0, EntityType.GENE: 1, EntityType.MUTATION: 2}


@dataclass(frozen=True)
class Mention:
    """A typed entity mention grounded to a canonical id.

    ``token_index`` is the first token of the surface span; ``length`` is the
    span's token count (always 1 after masking).
    """

    entity_id: str
    entity_type: EntityType
    token_index: int
    sentence_index: int
    paragraph_index: int
    length: int = 1

    @property
    def stop(self) -> int:
        return self.token_index + self.length

    def to_record(self) -> dict:
        return {
            "entity_id": self.entity_id,
            "entity_type": self.entity_type.value,
            "token_index": self.token_index,
            "sentence_index": self.sentence_index,
            "paragraph_index": self.paragraph_index,
            "length": self.length,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Mention":
        return cls(
            entity_id=rec["entity_id"],
            entity_type=EntityType(rec["entity_type"]),
            token_index=rec["token_index"],
            sentence_index=rec["sentence_index"],
            paragraph_index=rec["paragraph_index"],
            length=rec.get("length", 1),
        )


def normalize_mutation(token: str) -> str | None:
    """Canonical mutation id for a token, or None if it is not a missense form.

    Strips the "p." prefix; the matched residues/position are kept verbatim
    (the pattern only admits uppercase residue letters).
    """
    m = MISSENSE_RE.match(token)
    if m is None:
        return None
    return "".join(m.groups())


def _subtoken_mutation(token: str) -> str | None:
    """Mutation id matched by the whole token or one of its -/ subtokens."""
    whole = normalize_mutation(token)
    if whole is not None:
        return whole
    if "-" in token or "/" in token:
        for seg in re.split(r"[-/]", token):
            norm = normalize_mutation(seg)
            if norm is not None:
                return norm
    return None


def find_mutations(document: Document) -> list[Mention]:
    """One Mention per token matching the missense pattern.

    Hyphen/slash-delimited subtokens also match (leftmost subtoken wins), so
    forms like "EGFR-T790M" yield the mutation even though the gene dictionary
    only sees whole tokens.
    """
    mentions: list[Mention] = []
    for idx, token in enumerate(document.tokens):
        norm = _subtoken_mutation(token)
        if norm is None:
            continue
        p_idx, s_idx = document.token_coords[idx]
        mentions.append(
            Mention(
                entity_id=norm,
                entity_type=EntityType.MUTATION,
                token_index=idx,
                sentence_index=s_idx,
                paragraph_index=p_idx,
            )
        )
    return mentions


class EntityDictionary:
    """Case-insensitive surface-form lookup mapping to canonical ids.

    Surfaces may span several tokens (up to MAX_SURFACE_TOKENS); lookup keys
    are lowercased token tuples.
    """

    def __init__(self, entity_type: EntityType, surfaces: dict[str, str] | None = None):
        self.entity_type = entity_type
        self._by_tokens: dict[tuple[str, ...], str] = {}
        self.max_len = 0
        if surfaces:
            for surface, canonical in surfaces.items():
                self.add(surface, canonical)

    def add(self, surface: str, canonical: str) -> None:
        from docnre.corpus import tokenize

        if not canonical:
            raise DataError(f"empty canonical id for surface {surface!r}")
        key = tuple(t.lower() for t in tokenize(surface))
        if not key:
            raise DataError(f"empty surface form for canonical id {canonical!r}")
        if len(key) > MAX_SURFACE_TOKENS:
            logger.warning("surface %r longer than %d tokens, skipped", surface, MAX_SURFACE_TOKENS)
            return
        if key in self._by_tokens and self._by_tokens[key] != canonical:
            raise DataError(f"surface {surface!r} maps to both {self._by_tokens[key]!r} and {canonical!r}")
        self._by_tokens[key] = canonical
        self.max_len = max(self.max_len, len(key))

    def lookup(self, token_ngram: Sequence[str]) -> str | None:
        return self._by_tokens.get(tuple(t.lower() for t in token_ngram))

    def ids(self) -> set[str]:
        return set(self._by_tokens.values())

    def surfaces_of(self, canonical: str) -> list[str]:
        return [" ".join(k) for k, v in sorted(self._by_tokens.items()) if v == canonical]

    def single_token_surfaces(self) -> dict[str, str]:
        """Lowercased one-token surfaces -> canonical id (used by gene linking)."""
        return {k[0]: v for k, v in self._by_tokens.items() if len(k) == 1}

    def entries(self) -> list[tuple[str, str]]:
        """Sorted (surface, canonical id) pairs, surfaces space-joined."""
        return sorted((" ".join(k), v) for k, v in self._by_tokens.items())

    def __len__(self) -> int:
        return len(self._by_tokens)

    @classmethod
    def load(cls, path: str | Path, entity_type: EntityType) -> "EntityDictionary":
        """Load a `surface<TAB>canonical_id` TSV; lines starting with # are comments."""
        dct = cls(entity_type)
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise DataError(f"{path}:{lineno}: expected 2 tab-separated columns")
                dct.add(parts[0], parts[1])
        return dct


def find_by_dictionary(document: Document, dictionary: EntityDictionary) -> list[Mention]:
    """Longest-match dictionary lookup over within-sentence token n-grams.

    Overlaps are resolved leftmost-longest; each match yields a Mention at its
    first token.
    """
    mentions: list[Mention] = []
    max_n = min(dictionary.max_len, MAX_SURFACE_TOKENS)
    if max_n == 0:
        return mentions
    for unit in document.sentence_units:
        i = unit.start
        while i < unit.stop:
            matched = 0
            for n in range(min(max_n, unit.stop - i), 0, -1):
                canonical = dictionary.lookup(document.tokens[i : i + n])
                if canonical is not None:
                    p_idx, s_idx = document.token_coords[i]
                    mentions.append(
                        Mention(
                            entity_id=canonical,
                            entity_type=dictionary.entity_type,
                            token_index=i,
                            sentence_index=s_idx,
                            paragraph_index=p_idx,
                            length=n,
                        )
                    )
                    matched = n
                    break
            i += matched if matched else 1
    return mentions


def resolve_overlaps(mentions: Iterable[Mention]) -> list[Mention]:
    """Deterministic leftmost-longest resolution across mention sources."""
    ordered = sorted(
        mentions,
        key=lambda m: (m.token_index, -m.length, _TYPE_ORDER[m.entity_type], m.entity_id),
    )
    kept: list[Mention] = []
    next_free = 0
    for mention in ordered:
        if mention.token_index < next_free:
            logger.debug("dropping overlapped mention %s", mention)
            continue
        kept.append(mention)
        next_free = mention.stop
    return kept


def find_all_mentions(document: Document, dictionaries: Sequence[EntityDictionary]) -> list[Mention]:
    """Mutation regex plus every dictionary, overlap-resolved."""
    found: list[Mention] = list(find_mutations(document))
    for dct in dictionaries:
        found.extend(find_by_dictionary(document, dct))
    return resolve_overlaps(found)


def mask(document: Document, mentions: Sequence[Mention]) -> tuple[Document, list[Mention]]:
    """Replace each mention's token span with one per-type dummy token.

    Returns the masked document and the mentions remapped to their dummy
    token positions. Overlapping inputs are resolved leftmost-longest first
    (dropped mentions are logged).
    """
    resolved = resolve_overlaps(mentions)
    if len(resolved) != len(list(mentions)):
        logger.info(
            "doc %s: dropped %d overlapped mention(s) during masking",
            document.doc_id,
            len(list(mentions)) - len(resolved),
        )
    starts = {m.token_index: m for m in resolved}

    new_paragraphs: list[list[list[str]]] = []
    remapped: list[Mention] = []
    old_idx = 0
    new_idx = 0
    for para in document.paragraphs:
        new_para: list[list[str]] = []
        for sent in para:
            new_sent: list[str] = []
            stop = old_idx + len(sent)
            while old_idx < stop:
                mention = starts.get(old_idx)
                if mention is not None:
                    if mention.stop > stop:
                        raise DataError(
                            f"doc {document.doc_id}: mention at token {old_idx} crosses a sentence boundary"
                        )
                    new_sent.append(DUMMY_TOKENS[mention.entity_type])
                    remapped.append(replace(mention, token_index=new_idx, length=1))
                    new_idx += 1
                    old_idx = mention.stop
                else:
                    new_sent.append(document.tokens[old_idx])
                    old_idx += 1
                    new_idx += 1
            new_para.append(new_sent)
        new_paragraphs.append(new_para)

    masked = Document.from_tokens(document.doc_id, new_paragraphs)
    return masked, remapped


class ProcessedDocument(NamedTuple):
    """A document paired with its (typically masked) mentions."""

    document: Document
    mentions: tuple[Mention, ...]


def preprocess_document(document: Document, dictionaries: Sequence[EntityDictionary]) -> ProcessedDocument:
    """NER + overlap resolution + masking for one document."""
    found = find_all_mentions(document, dictionaries)
    masked, remapped = mask(document, found)
    return ProcessedDocument(masked, tuple(remapped))


def save_processed(processed: Iterable[ProcessedDocument], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc, mentions in processed:
            rec = {
                "doc_id": doc.doc_id,
                "paragraphs": [[list(sent) for sent in para] for para in doc.paragraphs],
                "mentions": [m.to_record() for m in mentions],
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_processed(path: str | Path) -> list[ProcessedDocument]:
    out: list[ProcessedDocument] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"processed corpus line {lineno}: invalid JSON ({exc.msg})") from exc
            for key in ("doc_id", "paragraphs", "mentions"):
                if key not in rec:
                    raise DataError(f"processed corpus line {lineno}: missing {key}")
            if rec["doc_id"] in seen:
                raise DataError(f"processed corpus line {lineno}: duplicate doc_id {rec['doc_id']!r}")
            seen.add(rec["doc_id"])
            doc = Document.from_tokens(rec["doc_id"], rec["paragraphs"])
            mentions = tuple(Mention.from_record(m) for m in rec["mentions"])
            out.append(ProcessedDocument(doc, mentions))
    return out
