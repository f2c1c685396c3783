"""The evaluation harness: ROC/AUC, per-gene AUC, weighted mean AUC.

Pathogenic is the positive class; the AUC equals the probability a random
pathogenic variant outscores a random benign one, ties at half credit.
Per-gene AUCs are averaged weighted by each gene's label count, restricted
to genes with at least N labels per class.
"""

import numpy as np

from velm import (
    AnnotatedRecord,
    ClinicalLabel,
    ScoredLabel,
    compare_methods,
    histogram,
    mean_auc,
    per_gene_auc,
    roc_auc,
)

PATH, BEN = ClinicalLabel.PATHOGENIC, ClinicalLabel.BENIGN

rng = np.random.default_rng(42)
data = []
for gene, n, shift in (("BRCA1", 120, 2.0), ("TP53", 60, 1.2), ("MLH1", 14, 0.8)):
    for _ in range(n):
        if rng.random() < 0.55:
            data.append(ScoredLabel(gene, float(rng.normal(shift, 1.0)), PATH))
        else:
            data.append(ScoredLabel(gene, float(rng.normal(0.0, 1.0)), BEN))

curve = roc_auc(data)
print(f"aggregate AUC = {curve.auc:.4f} "
      f"({curve.n_pathogenic} pathogenic / {curve.n_benign} benign)")
print("first ROC points:", [tuple(round(c, 3) for c in p) for p in curve.points[:4]])

print("\nper-gene AUC:")
per_gene = per_gene_auc(data)
for gene, entry in sorted(per_gene.items()):
    print(f"  {gene}: auc={entry.auc:.4f} ({entry.n_pathogenic}P/{entry.n_benign}B)")

print("\nmean AUC by minimum per-class label count:")
for n in (1, 3, 5):
    row = mean_auc(per_gene, min_labels=n)
    print(
        f"  N>={n}: mauc={row.mauc:.4f} over {row.genes_included} genes "
        f"({row.variants_included} variants)"
    )

hist = histogram(data, bin_count=8)
print("\nhistogram bins (pathogenic | benign):")
for i, (p, b) in enumerate(zip(hist.pathogenic, hist.benign)):
    lo, hi = hist.edges[i], hist.edges[i + 1]
    print(f"  [{lo:6.2f}, {hi:6.2f}) {'#' * p:<30} | {'#' * b}")

# External method columns ride along and are evaluated on their own coverage.
annotated = [
    AnnotatedRecord(
        r.gene_id,
        r.label,
        # an "oracle" method with partial coverage, and a noisy one
        {
            **({"flipped": -r.score}),
            **({"noisy": r.score + float(rng.normal(0, 1.5))} if rng.random() < 0.7 else {}),
        },
    )
    for r in data
]
print("\nexternal methods:")
for name, report in compare_methods(annotated).items():
    print(f"  {name}: auc={report.auc:.4f} on {report.n_rows} rows")
