"""Deterministic synthetic corpora with facts planted at controlled scopes.

Every generated document is a grid of paragraph/sentence slots. A planted
fact fills slots according to its scope: a single relational sentence
(sentence scope), an introduce-then-treat sentence pair inside one
paragraph (paragraph scope), or the pair split across paragraphs with all
gene evidence strictly before all drug evidence (cross-paragraph scope, so
the three entities never share a paragraph). Distractor tuples co-occur in
one sentence under a non-relational template and never enter the knowledge
base.

Drug and gene surfaces derive from pool indices alone, so corpora generated
with different seeds but equal pool sizes share byte-identical dictionary
files. Mutation ids are allocated from a corpus-wide counter and appear in
exactly one document each, which keeps distant labels exact and scope
classification immune to cross-document leakage.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from docnre.corpus import Document, save_corpus
from docnre.enttypes import EntityType
from docnre.errors import DataError
from docnre.evaluation import GoldSet, save_gold
from docnre.ner import AMINO_ACIDS, EntityDictionary
from docnre.candidates import KBFact, save_kb

SCOPE_SENTENCE = "sentence"
SCOPE_PARAGRAPH = "paragraph"
SCOPE_CROSS_PARAGRAPH = "cross_paragraph"
SCOPE_ORDER = (SCOPE_SENTENCE, SCOPE_PARAGRAPH, SCOPE_CROSS_PARAGRAPH)

_DRUG_STEMS = (
    "ba", "do", "fi", "ga", "ki", "lo", "mu", "ne",
    "po", "ru", "sa", "tu", "vi", "wo", "za", "ce",
)
_DRUG_SUFFIXES = ("nib", "mab", "tin", "zol", "pril", "stat")
_GENE_LETTERS = "BCDFGHJKLMNPQRSTVWXZ"

RELATION_TEMPLATES = (
    "treatment with {drug} overcame the {mutation} variant of {gene} in this cohort .",
    "{drug} remained active against {gene} {mutation} positive disease .",
    "clinical benefit from {drug} persisted although {gene} carried the {mutation} change .",
)
INTRO_TEMPLATES = (
    "baseline profiling of {gene} revealed the {mutation} variant .",
    "the {mutation} change in {gene} was confirmed at diagnosis .",
    "sequencing detected {mutation} within {gene} in most samples .",
)
EFFECT_TEMPLATES = (
    "patients carrying {mutation} responded durably to {drug} .",
    "{drug} produced lasting remissions despite the {mutation} finding .",
    "disease control with {drug} was maintained in the {mutation} subgroup .",
)
DISTRACTOR_TEMPLATES = (
    "the screening panel simply listed {drug} , {gene} , and {mutation} together .",
    "an inventory registry recorded {drug} , {gene} , and {mutation} without outcome data .",
)
FILLER_TEMPLATES = (
    "enrollment continued across participating sites during the review period .",
    "imaging schedules followed the standard protocol throughout follow up .",
    "adverse events were graded according to routine criteria .",
    "no additional laboratory findings were reported for this interval .",
    "consent procedures matched institutional guidance at every visit .",
)


def drug_surface(index: int, variant: int) -> str:
    """Pool-index-derived surface; the variant changes only the suffix."""
    if variant >= len(_DRUG_SUFFIXES):
        raise DataError(f"drug surface variant {variant} out of range")
    stem = _DRUG_STEMS[index % 16] + _DRUG_STEMS[(index // 16) % 16]
    return stem + _DRUG_SUFFIXES[variant]


def gene_surface(index: int, variant: int) -> str:
    """Three consonants from the index plus a variant digit, e.g. BCF2."""
    if variant > 8:
        raise DataError(f"gene surface variant {variant} out of range")
    letters = []
    value = index
    for _ in range(3):
        letters.append(_GENE_LETTERS[value % 20])
        value //= 20
    return "".join(reversed(letters)) + str(variant + 1)


def drug_id(index: int) -> str:
    return f"D{index:03d}"


def gene_id(index: int) -> str:
    return f"G{index:03d}"


@dataclass(frozen=True)
class PlantedFact:
    doc_id: str
    drug: str
    gene: str
    mutation: str
    scope: str

    @property
    def entities(self) -> tuple[str, str, str]:
        return (self.drug, self.gene, self.mutation)


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    num_docs: int = 20
    num_drugs: int = 12
    num_genes: int = 12
    facts_per_doc: int = 2
    scope_mix: tuple[float, float, float] = (0.3, 0.3, 0.4)
    distractor_rate: float = 0.5
    paragraphs_per_doc: int = 4
    sentences_per_paragraph: int = 4
    evidence_repeats: int = 1
    synonyms_per_entity: int = 2
    relation_templates: tuple[str, ...] = RELATION_TEMPLATES
    intro_templates: tuple[str, ...] = INTRO_TEMPLATES
    effect_templates: tuple[str, ...] = EFFECT_TEMPLATES
    distractor_templates: tuple[str, ...] = DISTRACTOR_TEMPLATES
    filler_templates: tuple[str, ...] = FILLER_TEMPLATES

    def __post_init__(self) -> None:
        if abs(sum(self.scope_mix) - 1.0) > 1e-9 or any(f < 0 for f in self.scope_mix):
            raise DataError("scope mix must be nonnegative and sum to 1")
        for name in ("num_docs", "num_drugs", "num_genes", "paragraphs_per_doc",
                     "sentences_per_paragraph"):
            if getattr(self, name) <= 0:
                raise DataError(f"{name} must be positive")
        if self.facts_per_doc < 0 or self.distractor_rate < 0:
            raise DataError("facts_per_doc and distractor_rate must be >= 0")
        if self.evidence_repeats < 1:
            raise DataError("evidence_repeats must be >= 1")
        if not 1 <= self.synonyms_per_entity <= len(_DRUG_SUFFIXES):
            raise DataError("synonyms_per_entity out of range")

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "num_docs": self.num_docs,
            "num_drugs": self.num_drugs,
            "num_genes": self.num_genes,
            "facts_per_doc": self.facts_per_doc,
            "scope_mix": list(self.scope_mix),
            "distractor_rate": self.distractor_rate,
            "paragraphs_per_doc": self.paragraphs_per_doc,
            "sentences_per_paragraph": self.sentences_per_paragraph,
            "evidence_repeats": self.evidence_repeats,
            "synonyms_per_entity": self.synonyms_per_entity,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SynthSpec":
        known = dict(data)
        if "scope_mix" in known:
            known["scope_mix"] = tuple(known["scope_mix"])
        try:
            return cls(**known)
        except TypeError as exc:
            raise DataError(f"synthetic corpus spec: {exc}") from exc


@dataclass
class SynthResult:
    documents: list[Document]
    gold: GoldSet
    kb: set[KBFact]
    facts: list[PlantedFact]
    drug_dictionary: EntityDictionary
    gene_dictionary: EntityDictionary
    seed_map: dict[str, set[str]]


def _allocate_scopes(total: int, mix: Sequence[float], rng: random.Random) -> list[str]:
    """Largest-remainder allocation of the scope mix, then a seeded shuffle."""
    raw = [f * total for f in mix]
    counts = [int(r) for r in raw]
    shortfall = total - sum(counts)
    by_remainder = sorted(range(3), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in range(shortfall):
        counts[by_remainder[i % 3]] += 1
    scopes = [scope for scope, c in zip(SCOPE_ORDER, counts) for _ in range(c)]
    rng.shuffle(scopes)
    return scopes


def _build_dictionaries(spec: SynthSpec) -> tuple[EntityDictionary, EntityDictionary]:
    drugs = EntityDictionary(EntityType.DRUG)
    for i in range(spec.num_drugs):
        for v in range(spec.synonyms_per_entity):
            drugs.add(drug_surface(i, v), drug_id(i))
    genes = EntityDictionary(EntityType.GENE)
    for i in range(spec.num_genes):
        for v in range(spec.synonyms_per_entity):
            genes.add(gene_surface(i, v), gene_id(i))
    return drugs, genes


class _MutationAllocator:
    """Corpus-unique missense mutations from a running position counter."""

    def __init__(self) -> None:
        self._position = 100

    def fresh(self, rng: random.Random) -> str:
        if self._position > 9999:
            raise DataError("mutation position space exhausted; reduce corpus size")
        ref = rng.choice(AMINO_ACIDS)
        alt = rng.choice(AMINO_ACIDS.replace(ref, ""))
        mutation = f"{ref}{self._position}{alt}"
        self._position += 1
        return mutation


@dataclass
class _DocPlan:
    """Mutable sentence grid for one document."""

    spec: SynthSpec
    grid: list[list[str | None]]

    @classmethod
    def empty(cls, spec: SynthSpec) -> "_DocPlan":
        return cls(spec, [[None] * spec.sentences_per_paragraph for _ in range(spec.paragraphs_per_doc)])

    def free_slots(self, paragraphs: range | None = None) -> list[tuple[int, int]]:
        rows = paragraphs if paragraphs is not None else range(len(self.grid))
        return [
            (p, s)
            for p in rows
            for s in range(self.spec.sentences_per_paragraph)
            if self.grid[p][s] is None
        ]

    def place(self, slot: tuple[int, int], sentence: str) -> None:
        p, s = slot
        assert self.grid[p][s] is None
        self.grid[p][s] = sentence

    def fill_rest(self, rng: random.Random) -> None:
        for p, s in self.free_slots():
            self.grid[p][s] = rng.choice(self.spec.filler_templates)

    def paragraphs(self) -> list[list[str]]:
        return [[s for s in row if s is not None] for row in self.grid]


def _take(plan: _DocPlan, rng: random.Random, count: int, paragraphs: range | None = None) -> list[tuple[int, int]]:
    free = plan.free_slots(paragraphs)
    if len(free) < count:
        raise DataError(
            "document grid too small for the requested facts; increase "
            "paragraphs_per_doc or sentences_per_paragraph"
        )
    return sorted(rng.sample(free, count))


def _mutation_surface(mutation: str, rng: random.Random) -> str:
    return f"p.{mutation}" if rng.random() < 0.5 else mutation


def _plant_fact(
    plan: _DocPlan,
    spec: SynthSpec,
    rng: random.Random,
    scope: str,
    drug_index: int,
    gene_index: int,
    mutation: str,
) -> None:
    def fills() -> dict[str, str]:
        return {
            "drug": drug_surface(drug_index, rng.randrange(spec.synonyms_per_entity)),
            "gene": gene_surface(gene_index, rng.randrange(spec.synonyms_per_entity)),
            "mutation": _mutation_surface(mutation, rng),
        }

    repeats = spec.evidence_repeats
    if scope == SCOPE_SENTENCE:
        for slot in _take(plan, rng, repeats):
            plan.place(slot, rng.choice(spec.relation_templates).format(**fills()))
        return

    if scope == SCOPE_PARAGRAPH:
        viable = [
            p
            for p in range(spec.paragraphs_per_doc)
            if len(plan.free_slots(range(p, p + 1))) >= 2 * repeats
        ]
        if not viable:
            raise DataError("no paragraph has room for a paragraph-scope fact")
        p = rng.choice(viable)
        slots = _take(plan, rng, 2 * repeats, range(p, p + 1))
        for slot in slots[:repeats]:
            plan.place(slot, rng.choice(spec.intro_templates).format(**fills()))
        for slot in slots[repeats:]:
            plan.place(slot, rng.choice(spec.effect_templates).format(**fills()))
        return

    if spec.paragraphs_per_doc < 2:
        raise DataError("cross-paragraph facts need at least 2 paragraphs per document")
    splits = [
        split
        for split in range(1, spec.paragraphs_per_doc)
        if len(plan.free_slots(range(0, split))) >= repeats
        and len(plan.free_slots(range(split, spec.paragraphs_per_doc))) >= repeats
    ]
    if not splits:
        raise DataError("no paragraph split has room for a cross-paragraph fact")
    split = rng.choice(splits)
    for slot in _take(plan, rng, repeats, range(0, split)):
        plan.place(slot, rng.choice(spec.intro_templates).format(**fills()))
    for slot in _take(plan, rng, repeats, range(split, spec.paragraphs_per_doc)):
        plan.place(slot, rng.choice(spec.effect_templates).format(**fills()))


def generate(spec: SynthSpec) -> SynthResult:
    """Build the corpus, gold facts, knowledge base, and dictionaries."""
    rng = random.Random(spec.seed)
    drug_dict, gene_dict = _build_dictionaries(spec)
    mutations = _MutationAllocator()

    distractors_possible = spec.distractor_rate > 0
    needed = spec.facts_per_doc + (1 if distractors_possible else 0)
    if needed > spec.num_drugs or needed > spec.num_genes:
        raise DataError(
            "entity pools too small: each document needs distinct drugs and genes "
            "for its facts plus any distractor"
        )

    scopes = _allocate_scopes(spec.num_docs * spec.facts_per_doc, spec.scope_mix, rng)
    documents: list[Document] = []
    gold: GoldSet = {}
    kb: set[KBFact] = set()
    facts: list[PlantedFact] = []
    seed_map: dict[str, set[str]] = {}

    for doc_index in range(spec.num_docs):
        doc_id = f"doc{doc_index:04d}"
        plan = _DocPlan.empty(spec)
        doc_scopes = scopes[doc_index * spec.facts_per_doc : (doc_index + 1) * spec.facts_per_doc]
        # Cross-paragraph facts claim split capacity first, then paragraph,
        # then sentence scope; this keeps tight grids feasible.
        placement_order = sorted(
            range(len(doc_scopes)), key=lambda i: -SCOPE_ORDER.index(doc_scopes[i])
        )

        drug_picks = rng.sample(range(spec.num_drugs), needed)
        gene_picks = rng.sample(range(spec.num_genes), needed)
        fact_entities: list[tuple[int, int, str]] = []
        for k in range(spec.facts_per_doc):
            fact_entities.append((drug_picks[k], gene_picks[k], mutations.fresh(rng)))

        for i in placement_order:
            drug_i, gene_i, mutation = fact_entities[i]
            _plant_fact(plan, spec, rng, doc_scopes[i], drug_i, gene_i, mutation)

        for i, (drug_i, gene_i, mutation) in enumerate(fact_entities):
            fact = PlantedFact(doc_id, drug_id(drug_i), gene_id(gene_i), mutation, doc_scopes[i])
            facts.append(fact)
            gold.setdefault(doc_id, set()).add(fact.entities)
            kb.add(fact.entities)
            seed_map.setdefault(mutation, set()).add(fact.gene)

        whole, frac = divmod(spec.distractor_rate, 1.0)
        num_distractors = int(whole) + (1 if rng.random() < frac else 0)
        for _ in range(num_distractors):
            slot = _take(plan, rng, 1)[0]
            text = rng.choice(spec.distractor_templates).format(
                drug=drug_surface(drug_picks[-1], rng.randrange(spec.synonyms_per_entity)),
                gene=gene_surface(gene_picks[-1], rng.randrange(spec.synonyms_per_entity)),
                mutation=_mutation_surface(mutations.fresh(rng), rng),
            )
            plan.place(slot, text)

        plan.fill_rest(rng)
        documents.append(Document.from_raw(doc_id, plan.paragraphs()))

    return SynthResult(
        documents=documents,
        gold=gold,
        kb=kb,
        facts=facts,
        drug_dictionary=drug_dict,
        gene_dictionary=gene_dict,
        seed_map=seed_map,
    )


def write_outputs(result: SynthResult, out_dir: str | Path) -> dict[str, Path]:
    """Write corpus, gold, KB, dictionaries, and the seed gene-mutation map."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "corpus": out / "corpus.jsonl",
        "gold": out / "gold.tsv",
        "kb": out / "kb.tsv",
        "drug_dictionary": out / "drugs.tsv",
        "gene_dictionary": out / "genes.tsv",
        "seed_map": out / "genemut_seed.tsv",
    }
    save_corpus(result.documents, paths["corpus"])
    save_gold(result.gold, paths["gold"])
    save_kb(result.kb, paths["kb"])
    _save_dictionary(result.drug_dictionary, paths["drug_dictionary"])
    _save_dictionary(result.gene_dictionary, paths["gene_dictionary"])
    with open(paths["seed_map"], "w", encoding="utf-8") as fh:
        for mutation in sorted(result.seed_map):
            for gene in sorted(result.seed_map[mutation]):
                fh.write(f"{mutation}\t{gene}\n")
    return paths


def _save_dictionary(dictionary: EntityDictionary, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for surface, entity_id in dictionary.entries():
            fh.write(f"{surface}\t{entity_id}\n")
