"""Metrics: average precision, max recall, threshold tuning, scope breakdown.

Average precision sums precision at each recovered gold fact's rank and
divides by the total gold count, so gold facts with no prediction at all
still depress the score. Ranking ties break lexicographically on
(doc_id, entity ids) to keep every number reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from docnre.corpus import Document
from docnre.errors import DataError
from docnre.ner import Mention
from docnre.predictions import Prediction

GoldSet = dict[str, set[tuple[str, ...]]]

SCOPE_SENTENCE = "sentence"
SCOPE_PARAGRAPH = "cross_sentence_within_paragraph"
SCOPE_CROSS_PARAGRAPH = "cross_paragraph"
SCOPES = (SCOPE_SENTENCE, SCOPE_PARAGRAPH, SCOPE_CROSS_PARAGRAPH)


def load_gold(path: str | Path, arity: int = 3) -> GoldSet:
    """Load `doc_id<TAB>id_1<TAB>...<TAB>id_n` rows; # starts a comment."""
    gold: GoldSet = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != arity + 1 or any(not p for p in parts):
                raise DataError(f"{path}:{lineno}: expected doc_id plus {arity} ids")
            gold.setdefault(parts[0], set()).add(tuple(parts[1:]))
    return gold


def save_gold(gold: GoldSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id in sorted(gold):
            for fact in sorted(gold[doc_id]):
                fh.write("\t".join((doc_id,) + fact) + "\n")


def gold_size(gold: GoldSet) -> int:
    return sum(len(facts) for facts in gold.values())


def _ranked(predictions: Sequence[Prediction]) -> list[Prediction]:
    seen: set[tuple[str, tuple[str, ...]]] = set()
    for p in predictions:
        if p.key() in seen:
            raise DataError(f"duplicate prediction for {p.doc_id} {p.entities}")
        seen.add(p.key())
    return sorted(predictions, key=lambda p: (-p.p, p.doc_id, p.entities))


def _is_gold(p: Prediction, gold: GoldSet) -> bool:
    return p.entities in gold.get(p.doc_id, ())


def average_precision(predictions: Sequence[Prediction], gold: GoldSet) -> float:
    """Sum of precision at each gold hit's rank, over the total gold count."""
    total_gold = gold_size(gold)
    if total_gold == 0:
        raise DataError("average precision is undefined on an empty gold set")
    hits = 0
    ap = 0.0
    for rank, p in enumerate(_ranked(predictions), start=1):
        if _is_gold(p, gold):
            hits += 1
            ap += hits / rank
    return ap / total_gold


def max_recall(candidate_tuples: Iterable[tuple[str, tuple[str, ...]]], gold: GoldSet) -> float:
    """Fraction of gold facts for which any candidate was generated."""
    total_gold = gold_size(gold)
    if total_gold == 0:
        raise DataError("max recall is undefined on an empty gold set")
    generated = set(candidate_tuples)
    recovered = sum(
        1 for doc_id, facts in gold.items() for fact in facts if (doc_id, fact) in generated
    )
    return recovered / total_gold


def confusion_at_threshold(
    predictions: Sequence[Prediction], gold: GoldSet, threshold: float
) -> tuple[int, int, int]:
    """(TP, FP, FN) counting p >= threshold as predicted positive."""
    tp = fp = 0
    for p in _ranked(predictions):
        if p.p < threshold:
            continue
        if _is_gold(p, gold):
            tp += 1
        else:
            fp += 1
    fn = gold_size(gold) - tp
    return tp, fp, fn


def precision_recall_f1(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def tune_threshold(predictions: Sequence[Prediction], gold: GoldSet) -> float:
    """Distinct score maximizing F1; ties resolve to the higher threshold."""
    if not predictions:
        raise DataError("threshold tuning needs at least one prediction")
    best_f1 = -1.0
    best_threshold = 0.0
    for t in sorted({p.p for p in predictions}, reverse=True):
        _, _, f1 = precision_recall_f1(*confusion_at_threshold(predictions, gold, t))
        if f1 > best_f1:
            best_f1 = f1
            best_threshold = t
    return best_threshold


def pr_curve(predictions: Sequence[Prediction], gold: GoldSet) -> list[tuple[float, float, float]]:
    """(threshold, precision, recall) rows at each distinct score, best first."""
    total_gold = gold_size(gold)
    if total_gold == 0:
        raise DataError("a precision-recall curve needs a nonempty gold set")
    rows: list[tuple[float, float, float]] = []
    tp = npred = 0
    ranked = _ranked(predictions)
    for i, p in enumerate(ranked):
        npred += 1
        if _is_gold(p, gold):
            tp += 1
        if i + 1 < len(ranked) and ranked[i + 1].p == p.p:
            continue
        rows.append((p.p, tp / npred, tp / total_gold))
    return rows


def save_pr_curve(rows: Iterable[tuple[float, float, float]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("threshold,precision,recall\n")
        for threshold, precision, recall in rows:
            fh.write(f"{threshold!r},{precision!r},{recall!r}\n")


def narrowest_scope(
    document: Document, mentions: Sequence[Mention], entities: Sequence[str]
) -> str:
    """Narrowest unit in which all the tuple's entities co-occur."""
    sentence_sets = []
    paragraph_sets = []
    for entity_id in entities:
        own = [m for m in mentions if m.entity_id == entity_id]
        if not own:
            raise DataError(f"{document.doc_id}: entity {entity_id} has no mentions")
        sentence_sets.append({m.sentence_index for m in own})
        paragraph_sets.append({m.paragraph_index for m in own})
    if set.intersection(*sentence_sets):
        return SCOPE_SENTENCE
    if set.intersection(*paragraph_sets):
        return SCOPE_PARAGRAPH
    return SCOPE_CROSS_PARAGRAPH


def scope_breakdown(
    facts: Iterable[tuple[str, tuple[str, ...]]],
    processed: Mapping[str, tuple[Document, Sequence[Mention]]],
) -> dict[str, int]:
    """Count facts by the narrowest scope their entities share."""
    counts = {scope: 0 for scope in SCOPES}
    for doc_id, entities in facts:
        if doc_id not in processed:
            raise DataError(f"no processed document for {doc_id}")
        document, mentions = processed[doc_id]
        counts[narrowest_scope(document, mentions, entities)] += 1
    return counts


@dataclass
class EvalReport:
    auc: float
    max_recall: float | None
    threshold: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    breakdown: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "auc": self.auc,
            "max_recall": self.max_recall,
            "threshold": self.threshold,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "counts": {"tp": self.tp, "fp": self.fp, "fn": self.fn},
        }
        if self.breakdown:
            out["breakdown"] = dict(self.breakdown)
        return out

    def to_table(self) -> str:
        lines = [
            f"{'AUC (average precision)':<28}{self.auc:.4f}",
            f"{'Max recall':<28}{'-' if self.max_recall is None else format(self.max_recall, '.4f')}",
            f"{'Threshold':<28}{self.threshold:.4f}",
            f"{'Precision':<28}{self.precision:.4f}",
            f"{'Recall':<28}{self.recall:.4f}",
            f"{'F1':<28}{self.f1:.4f}",
            f"{'TP / FP / FN':<28}{self.tp} / {self.fp} / {self.fn}",
        ]
        for scope in SCOPES:
            if scope in self.breakdown:
                lines.append(f"{scope:<28}{self.breakdown[scope]}")
        return "\n".join(lines)


def evaluate(
    predictions: Sequence[Prediction],
    gold: GoldSet,
    threshold: float | None = None,
    candidate_tuples: Iterable[tuple[str, tuple[str, ...]]] | None = None,
) -> EvalReport:
    """Full report; tunes the threshold on these predictions if none given."""
    auc = average_precision(predictions, gold)
    if threshold is None:
        threshold = tune_threshold(predictions, gold)
    tp, fp, fn = confusion_at_threshold(predictions, gold, threshold)
    precision, recall, f1 = precision_recall_f1(tp, fp, fn)
    mr = None
    if candidate_tuples is not None:
        mr = max_recall(candidate_tuples, gold)
    return EvalReport(
        auc=auc,
        max_recall=mr,
        threshold=threshold,
        precision=precision,
        recall=recall,
        f1=f1,
        tp=tp,
        fp=fp,
        fn=fn,
    )
