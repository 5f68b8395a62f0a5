"""Rule-based association of mutations with genes.

A global mutation->genes map (seeded from a TSV, augmented from corpus
co-occurrence patterns) plus per-document assignment rules produce exactly
one gene per mutation mention, which is then used to filter relation
candidates whose gene-mutation pair contradicts the assignment.

All pattern matching here runs on the unmasked token stream.
"""
from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from docnre.corpus import Document
from docnre.enttypes import EntityType
from docnre.errors import DataError
from docnre.ner import EntityDictionary, Mention, normalize_mutation

GeneMutationMap = dict[str, set[str]]


class AugmentRule(str, Enum):
    """Corpus-wide co-occurrence patterns, tried in this order."""

    SAME_TOKEN = "same_token"          # e.g. one token "EGFR-T790M"
    ADJACENT = "adjacent"              # gene token directly followed by mutation token
    ONE_TOKEN_GAP = "one_token_gap"    # gene token, any single-character token, mutation token


class LinkRule(str, Enum):
    """Per-document assignment rules, tried in this order."""

    GLOBAL_CLOSEST = "global_closest"
    MUT_PATTERN_SENTENCE = "mut_pattern_sentence"          # same sentence as "<gene> mut"
    MUTATION_PATTERN_PARAGRAPH = "mutation_pattern_paragraph"  # same paragraph as "<gene> mutation"
    MOST_FREQUENT = "most_frequent"


@dataclass
class AugmentResult:
    mapping: GeneMutationMap
    fired: dict[str, tuple[AugmentRule, str]]  # mutation -> (rule, gene added)


@dataclass(frozen=True)
class GeneMutationAssignment:
    """Per-document mapping of each mutation to exactly one gene."""

    doc_id: str
    gene_for: Mapping[str, str]
    rule_for: Mapping[str, LinkRule]
    unassigned: tuple[str, ...] = ()

    def to_record(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "assignments": {
                mut: {"gene": self.gene_for[mut], "rule": self.rule_for[mut].value}
                for mut in sorted(self.gene_for)
            },
            "unassigned": sorted(self.unassigned),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "GeneMutationAssignment":
        gene_for = {mut: a["gene"] for mut, a in rec["assignments"].items()}
        rule_for = {mut: LinkRule(a["rule"]) for mut, a in rec["assignments"].items()}
        return cls(
            doc_id=rec["doc_id"],
            gene_for=gene_for,
            rule_for=rule_for,
            unassigned=tuple(rec.get("unassigned", ())),
        )


def load_seed_map(path: str | Path) -> GeneMutationMap:
    """Load a `mutation_id<TAB>gene_id` TSV; # starts a comment line."""
    mapping: GeneMutationMap = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise DataError(f"{path}:{lineno}: expected `mutation<TAB>gene`")
            mapping.setdefault(parts[0], set()).add(parts[1])
    return mapping


def _token_segments(token: str) -> list[str]:
    return re.split(r"[-/]", token)


def _same_token_gene_counts(
    docs: Sequence[tuple[Document, Sequence[Mention]]],
    gene_surfaces: Mapping[str, str],
    mutation_id: str,
) -> Counter:
    counts: Counter = Counter()
    for doc, _ in docs:
        for token in doc.tokens:
            if "-" not in token and "/" not in token:
                continue
            segments = _token_segments(token)
            if not any(normalize_mutation(seg) == mutation_id for seg in segments):
                continue
            genes = {gene_surfaces[seg.lower()] for seg in segments if seg.lower() in gene_surfaces}
            counts.update(genes)
    return counts


def _sequence_gene_counts(
    docs: Sequence[tuple[Document, Sequence[Mention]]],
    mutation_id: str,
    gap: int,
) -> Counter:
    """Matches `gene-mention [single-char-token]*gap mutation-token`."""
    counts: Counter = Counter()
    for doc, mentions in docs:
        tokens = doc.tokens
        for m in mentions:
            if m.entity_type != EntityType.GENE:
                continue
            mid = m.stop + gap
            if mid >= len(tokens):
                continue
            if gap == 1 and len(tokens[m.stop]) != 1:
                continue
            if normalize_mutation(tokens[mid]) == mutation_id:
                counts[m.entity_id] += 1
    return counts


def augment_global_map(
    docs: Sequence[tuple[Document, Sequence[Mention]]],
    gene_dictionary: EntityDictionary,
    seed_map: Mapping[str, set[str]] | None = None,
) -> AugmentResult:
    """Extend the mutation->genes map from corpus co-occurrence patterns.

    For each mutation seen in the corpus the three patterns are tried in
    order; at the first pattern with at least one match, the gene with the
    most matches is added and later patterns are skipped.
    """
    mapping: GeneMutationMap = {mut: set(genes) for mut, genes in (seed_map or {}).items()}
    gene_surfaces = gene_dictionary.single_token_surfaces()

    corpus_mutations = sorted(
        {m.entity_id for _, mentions in docs for m in mentions if m.entity_type == EntityType.MUTATION}
    )
    fired: dict[str, tuple[AugmentRule, str]] = {}
    for mut in corpus_mutations:
        for rule in AugmentRule:
            if rule == AugmentRule.SAME_TOKEN:
                counts = _same_token_gene_counts(docs, gene_surfaces, mut)
            elif rule == AugmentRule.ADJACENT:
                counts = _sequence_gene_counts(docs, mut, gap=0)
            else:
                counts = _sequence_gene_counts(docs, mut, gap=1)
            if counts:
                best = min(counts, key=lambda g: (-counts[g], g))
                mapping.setdefault(mut, set()).add(best)
                fired[mut] = (rule, best)
                break
    return AugmentResult(mapping=mapping, fired=fired)


def _keyword_pattern_positions(
    document: Document, gene_mentions: Sequence[Mention], keyword: str
) -> list[tuple[int, Mention]]:
    """Token positions of `<gene> keyword` instances, in document order."""
    tokens = document.tokens
    hits: list[tuple[int, Mention]] = []
    for m in gene_mentions:
        after = m.stop
        if after >= len(tokens):
            continue
        if tokens[after].lower() != keyword:
            continue
        # The two-token pattern must not straddle a sentence boundary.
        if document.sentence_of(after) != m.sentence_index:
            continue
        hits.append((m.token_index, m))
    hits.sort(key=lambda h: h[0])
    return hits


def assign_in_document(
    document: Document,
    mentions: Sequence[Mention],
    global_map: Mapping[str, set[str]],
) -> GeneMutationAssignment:
    """Assign exactly one gene to each mutation mentioned in the document.

    Order of preference: closest globally-known gene by token distance, then
    the `<gene> mut` same-sentence pattern, then the `<gene> mutation`
    same-paragraph pattern, then the document's most frequent gene. Distance
    and frequency ties break by earliest document position, then gene id.
    """
    gene_mentions = sorted(
        (m for m in mentions if m.entity_type == EntityType.GENE), key=lambda m: m.token_index
    )
    mutation_mentions = [m for m in mentions if m.entity_type == EntityType.MUTATION]

    mut_positions: dict[str, list[int]] = {}
    for m in sorted(mutation_mentions, key=lambda m: m.token_index):
        mut_positions.setdefault(m.entity_id, []).append(m.token_index)

    if not mut_positions:
        return GeneMutationAssignment(document.doc_id, {}, {}, ())
    if not gene_mentions:
        return GeneMutationAssignment(document.doc_id, {}, {}, tuple(sorted(mut_positions)))

    first_pos: dict[str, int] = {}
    gene_counts: Counter = Counter()
    for m in gene_mentions:
        first_pos.setdefault(m.entity_id, m.token_index)
        gene_counts[m.entity_id] += 1

    mut_sentences = {
        mid: {document.sentence_of(p) for p in positions} for mid, positions in mut_positions.items()
    }
    mut_paragraphs = {
        mid: {document.paragraph_of(p) for p in positions} for mid, positions in mut_positions.items()
    }

    gene_for: dict[str, str] = {}
    rule_for: dict[str, LinkRule] = {}
    for mut in sorted(mut_positions):
        known = global_map.get(mut, set())
        ranked: list[tuple[int, int, str]] = []
        for gene_id in sorted({m.entity_id for m in gene_mentions} & known):
            dist = min(
                abs(gm.token_index - mp)
                for gm in gene_mentions
                if gm.entity_id == gene_id
                for mp in mut_positions[mut]
            )
            ranked.append((dist, first_pos[gene_id], gene_id))
        if ranked:
            ranked.sort()
            gene_for[mut] = ranked[0][2]
            rule_for[mut] = LinkRule.GLOBAL_CLOSEST
            continue

        hit = next(
            (
                m
                for _, m in _keyword_pattern_positions(document, gene_mentions, "mut")
                if m.sentence_index in mut_sentences[mut]
            ),
            None,
        )
        if hit is not None:
            gene_for[mut] = hit.entity_id
            rule_for[mut] = LinkRule.MUT_PATTERN_SENTENCE
            continue

        hit = next(
            (
                m
                for _, m in _keyword_pattern_positions(document, gene_mentions, "mutation")
                if m.paragraph_index in mut_paragraphs[mut]
            ),
            None,
        )
        if hit is not None:
            gene_for[mut] = hit.entity_id
            rule_for[mut] = LinkRule.MUTATION_PATTERN_PARAGRAPH
            continue

        gene_for[mut] = min(gene_counts, key=lambda g: (-gene_counts[g], first_pos[g], g))
        rule_for[mut] = LinkRule.MOST_FREQUENT

    return GeneMutationAssignment(document.doc_id, gene_for, rule_for, ())


def filter_candidates(
    candidates: Iterable,
    assignments: Mapping[str, GeneMutationAssignment],
    schema,
) -> list:
    """Drop candidates whose gene-mutation pair contradicts the assignment.

    Keeps exactly the candidates whose mutation is assigned to that gene in
    the candidate's document. Apply the same way at train and test time.
    """
    gene_slot = schema.slot_of(EntityType.GENE)
    mut_slot = schema.slot_of(EntityType.MUTATION)
    kept = []
    for c in candidates:
        a = assignments.get(c.doc_id)
        if a is None:
            continue
        if a.gene_for.get(c.entities[mut_slot]) == c.entities[gene_slot]:
            kept.append(c)
    return kept


def save_assignments(assignments: Iterable[GeneMutationAssignment], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in assignments:
            fh.write(json.dumps(a.to_record(), sort_keys=True) + "\n")


def load_assignments(path: str | Path) -> dict[str, GeneMutationAssignment]:
    out: dict[str, GeneMutationAssignment] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"assignments line {lineno}: invalid JSON ({exc.msg})") from exc
            a = GeneMutationAssignment.from_record(rec)
            out[a.doc_id] = a
    return out
