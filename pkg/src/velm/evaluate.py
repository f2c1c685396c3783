"""Clinical evaluation metrics: ROC/AUC, per-gene AUC, weighted mean AUC.

Pathogenic is the positive class throughout. Tied scores advance the ROC as
a single diagonal segment and earn half credit, which makes the trapezoidal
area and the pairwise Mann-Whitney statistic agree exactly:

    AUC = P(score_path > score_ben) + 1/2 * P(score_path == score_ben)

All computations are pure functions over immutable inputs and independent of
evaluation order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateClasses, NoQualifyingGenes
from .ingest import ClinicalLabel

logger = logging.getLogger(__name__)

WEIGHTINGS = ("total", "min_class", "uniform")


@dataclass(frozen=True)
class ScoredLabel:
    """One evaluation row: a gene's variant score with its clinical label."""

    gene_id: str
    score: float
    label: ClinicalLabel

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ValueError(f"{self.gene_id}: score must be finite, got {self.score!r}")


@dataclass(frozen=True)
class RocCurve:
    """ROC points (FPR, TPR) from (0,0) to (1,1) plus the area under them."""

    points: tuple[tuple[float, float], ...]
    auc: float
    n_pathogenic: int
    n_benign: int

    def __post_init__(self):
        if self.points[0] != (0.0, 0.0) or self.points[-1] != (1.0, 1.0):
            raise ValueError("ROC must start at (0,0) and end at (1,1)")
        xs, ys = zip(*self.points)
        if any(b < a for a, b in zip(xs, xs[1:])) or any(b < a for a, b in zip(ys, ys[1:])):
            raise ValueError("ROC coordinates must be non-decreasing")
        if abs(self.auc - float(np.trapezoid(ys, xs))) > 1e-12:
            raise ValueError("auc disagrees with the trapezoidal integral of the points")


@dataclass(frozen=True)
class GeneAuc:
    """Per-gene AUC; ``auc`` is None when the gene lacks one of the classes."""

    auc: float | None
    n_pathogenic: int
    n_benign: int

    @property
    def n_labels(self) -> int:
        return self.n_pathogenic + self.n_benign


@dataclass(frozen=True)
class MaucRow:
    """Label-weighted mean of per-gene AUCs over genes with >= N labels per class."""

    min_labels: int
    mauc: float
    genes_included: int
    variants_included: int

    def __post_init__(self):
        if not 0.0 <= self.mauc <= 1.0:
            raise ValueError(f"mauc {self.mauc} outside [0, 1]")


@dataclass(frozen=True)
class Histogram:
    """Per-label counts over shared equal-width bins."""

    edges: tuple[float, ...]
    pathogenic: tuple[int, ...]
    benign: tuple[int, ...]


@dataclass(frozen=True)
class MethodReport:
    """Metrics of one external method on the rows where it has a score."""

    auc: float
    n_rows: int
    n_pathogenic: int
    n_benign: int
    mauc_rows: tuple[MaucRow, ...]


def roc_auc(data: Sequence[ScoredLabel]) -> RocCurve:
    """ROC by sweeping a descending score threshold; ties step diagonally."""
    n_path = sum(1 for row in data if row.label is ClinicalLabel.PATHOGENIC)
    n_ben = len(data) - n_path
    if n_path == 0 or n_ben == 0:
        raise DegenerateClasses(
            f"need both classes, got {n_path} pathogenic / {n_ben} benign"
        )
    ordered = sorted(data, key=lambda row: row.score, reverse=True)
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < len(ordered):
        j = i
        while j < len(ordered) and ordered[j].score == ordered[i].score:
            if ordered[j].label is ClinicalLabel.PATHOGENIC:
                tp += 1
            else:
                fp += 1
            j += 1
        points.append((fp / n_ben, tp / n_path))
        i = j
    xs, ys = zip(*points)
    auc = float(np.trapezoid(ys, xs))
    return RocCurve(tuple(points), auc, n_path, n_ben)


def per_gene_auc(data: Sequence[ScoredLabel]) -> dict[str, GeneAuc]:
    """AUC for each gene's rows separately; single-class genes keep counts only."""
    by_gene: dict[str, list[ScoredLabel]] = {}
    for row in data:
        by_gene.setdefault(row.gene_id, []).append(row)
    out: dict[str, GeneAuc] = {}
    for gene_id, rows in by_gene.items():
        n_path = sum(1 for row in rows if row.label is ClinicalLabel.PATHOGENIC)
        n_ben = len(rows) - n_path
        if n_path == 0 or n_ben == 0:
            out[gene_id] = GeneAuc(None, n_path, n_ben)
        else:
            out[gene_id] = GeneAuc(roc_auc(rows).auc, n_path, n_ben)
    return out


def _gene_weight(gene: GeneAuc, weighting: str) -> float:
    if weighting == "total":
        return float(gene.n_labels)
    if weighting == "min_class":
        return float(min(gene.n_pathogenic, gene.n_benign))
    if weighting == "uniform":
        return 1.0
    raise ValueError(f"unknown weighting {weighting!r}; expected one of {WEIGHTINGS}")


def mean_auc(
    per_gene: Mapping[str, GeneAuc], min_labels: int, weighting: str = "total"
) -> MaucRow:
    """Weighted mean AUC over genes with at least ``min_labels`` of each class.

    Genes with an undefined AUC can never qualify (they lack one class
    entirely). Default weight is the gene's total label count.
    """
    if min_labels < 1:
        raise ValueError("min_labels must be >= 1")
    qualifying = [
        gene
        for gene in per_gene.values()
        if gene.n_pathogenic >= min_labels and gene.n_benign >= min_labels
    ]
    if not qualifying:
        raise NoQualifyingGenes(f"no gene has >= {min_labels} labels of each class")
    weights = np.array([_gene_weight(g, weighting) for g in qualifying])
    aucs = np.array([g.auc for g in qualifying])
    mauc = float(np.sum(weights * aucs) / np.sum(weights))
    return MaucRow(
        min_labels=min_labels,
        mauc=min(max(mauc, 0.0), 1.0),
        genes_included=len(qualifying),
        variants_included=int(sum(g.n_labels for g in qualifying)),
    )


def histogram(data: Sequence[ScoredLabel], bin_count: int) -> Histogram:
    """Per-label counts over ``bin_count`` equal-width bins spanning all scores."""
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    if not data:
        raise ValueError("histogram needs at least one row")
    scores = np.array([row.score for row in data])
    # np.histogram widens a zero-width range itself, keeping one occupied bin.
    _, edges = np.histogram(scores, bins=bin_count, range=(scores.min(), scores.max()))
    counts = {}
    for label in (ClinicalLabel.PATHOGENIC, ClinicalLabel.BENIGN):
        subset = np.array([row.score for row in data if row.label is label])
        hist, _ = np.histogram(subset, bins=edges) if subset.size else (np.zeros(len(edges) - 1, dtype=int), edges)
        counts[label] = tuple(int(c) for c in hist)
    return Histogram(
        edges=tuple(float(e) for e in edges),
        pathogenic=counts[ClinicalLabel.PATHOGENIC],
        benign=counts[ClinicalLabel.BENIGN],
    )


@dataclass(frozen=True)
class AnnotatedRecord:
    """A labeled row with scores from zero or more external methods."""

    gene_id: str
    label: ClinicalLabel
    method_scores: Mapping[str, float]


def compare_methods(
    data: Sequence[AnnotatedRecord],
    min_labels: Iterable[int] = (1, 3, 5),
    weighting: str = "total",
) -> dict[str, MethodReport]:
    """Evaluate each external method on exactly the rows where it has a score.

    Methods whose rows are all missing, or degenerate (one class only), are
    omitted with a warning; row counts in the report make the differing
    coverage of the surviving methods visible.
    """
    names = sorted({name for row in data for name in row.method_scores})
    out: dict[str, MethodReport] = {}
    for name in names:
        rows = [
            ScoredLabel(row.gene_id, float(row.method_scores[name]), row.label)
            for row in data
            if name in row.method_scores
        ]
        if not rows:
            logger.warning("method %r has no scores; omitted", name)
            continue
        try:
            curve = roc_auc(rows)
        except DegenerateClasses as exc:
            logger.warning("method %r is degenerate (%s); omitted", name, exc)
            continue
        per_gene = per_gene_auc(rows)
        mauc_rows = []
        for n in min_labels:
            try:
                mauc_rows.append(mean_auc(per_gene, n, weighting))
            except NoQualifyingGenes:
                pass
        out[name] = MethodReport(
            auc=curve.auc,
            n_rows=len(rows),
            n_pathogenic=curve.n_pathogenic,
            n_benign=curve.n_benign,
            mauc_rows=tuple(mauc_rows),
        )
    return out
