"""B-cubed precision, recall and F-score for cognate partitions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, TextIO

from .cogcluster import CognatePartition

CONCEPT, ITEM = "concept", "item"


@dataclass(frozen=True)
class ConceptScore:
    concept: str
    precision: float
    recall: float
    n_items: int


@dataclass(frozen=True)
class BcubedResult:
    precision: float
    recall: float
    f_score: float
    per_concept: tuple[ConceptScore, ...]


def f_measure(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2.0 * p * r / (p + r)


def bcubed(pred: CognatePartition, gold: CognatePartition, average: str = CONCEPT) -> BcubedResult:
    """Score ``pred`` against ``gold``.

    With ``average="concept"`` (default) item scores are averaged within each
    concept and concepts are weighted equally; ``average="item"`` pools all
    items.  F is the harmonic mean of the global precision and recall.
    """
    if average not in (CONCEPT, ITEM):
        raise ValueError(f"average must be {CONCEPT!r} or {ITEM!r}")
    if pred.ids != gold.ids:
        extra = sorted(pred.ids - gold.ids)
        missing = sorted(gold.ids - pred.ids)
        raise ValueError(f"partitions cover different ids: only in pred {extra}, only in gold {missing}")

    pred_members = {lab: set(ids) for lab, ids in pred.clusters().items()}
    gold_members = {lab: set(ids) for lab, ids in gold.clusters().items()}
    per_concept = []
    all_p, all_r = [], []
    for concept, items in gold.concepts().items():
        ps, rs = [], []
        for w in items:
            pc = pred_members[pred.assignment[w]]
            gc = gold_members[gold.assignment[w]]
            overlap = len(pc & gc)
            ps.append(overlap / len(pc))
            rs.append(overlap / len(gc))
        all_p.extend(ps)
        all_r.extend(rs)
        per_concept.append(ConceptScore(concept, sum(ps) / len(ps), sum(rs) / len(rs), len(items)))

    if not per_concept:
        raise ValueError("cannot score empty partitions")
    if average == CONCEPT:
        p = sum(c.precision for c in per_concept) / len(per_concept)
        r = sum(c.recall for c in per_concept) / len(per_concept)
    else:
        p = sum(all_p) / len(all_p)
        r = sum(all_r) / len(all_r)
    return BcubedResult(p, r, f_measure(p, r), tuple(per_concept))


REPORT_COLUMNS = ("METHOD", "FAMILY", "PRECISION", "RECALL", "FSCORE")


def write_report(rows: Iterable[tuple[str, str, Optional[BcubedResult]]], sink: TextIO,
                 header: Iterable[str] = ()) -> None:
    """One row per method; a ``None`` result marks a skipped method."""
    for line in header:
        sink.write(f"# {line}\n")
    sink.write("\t".join(REPORT_COLUMNS) + "\n")
    for method, family, res in rows:
        if res is None:
            sink.write(f"{method}\t{family}\tNA\tNA\tNA\n")
            continue
        sink.write(f"{method}\t{family}\t{res.precision:.4f}\t{res.recall:.4f}\t{res.f_score:.4f}\n")
