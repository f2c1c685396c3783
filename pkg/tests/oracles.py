"""Independent oracles the tests check the library against.

Each oracle recomputes a quantity by the most direct method available —
explicit counting, per-term summation over a hand-built mask, quadratic
pairwise comparison — sharing as little code as possible with the paths
under test.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from velm.alphabet import CANONICAL
from velm.backend import MaskedQuery
from velm.sequence import MaskedSequence, ProteinSequence, Variant


def profile_probabilities(corpus: list[str], alpha: float) -> list[dict[str, float]]:
    """Per-position smoothed probabilities by direct counting:
    (count + alpha) / (N + 20*alpha)."""
    n = len(corpus)
    length = len(corpus[0])
    out = []
    for i in range(length):
        counts = Counter(seq[i] for seq in corpus)
        out.append(
            {aa: (counts.get(aa, 0) + alpha) / (n + 20 * alpha) for aa in CANONICAL}
        )
    return out


def brute_force_score(
    wildtype: ProteinSequence, variant: Variant, backend
) -> float:
    """Recompute the log-odds score from scratch: build the masked string by
    hand, query the backend once with all mutated positions masked, then
    subtract and sum per position."""
    positions = tuple(sorted(s.position for s in variant.substitutions))
    rendered = list(wildtype.residues)
    for pos in positions:
        rendered[pos - 1] = "?"
    masked = MaskedSequence(wildtype.gene_id, positions, "".join(rendered))
    marginals = {
        dist.position: dist
        for dist in backend.query_marginals(MaskedQuery(masked, positions))
    }
    total = 0.0
    for sub in variant.substitutions:
        dist = marginals[sub.position]
        total += dist.log_prob(sub.wildtype) - dist.log_prob(sub.mutant)
    return total


def pairwise_auc(path_scores, ben_scores) -> float:
    """Mann-Whitney by quadratic pair counting, ties at half credit."""
    p = np.asarray(path_scores, dtype=np.float64)[:, None]
    b = np.asarray(ben_scores, dtype=np.float64)[None, :]
    wins = np.sum(p > b) + 0.5 * np.sum(p == b)
    return float(wins / (p.size * b.size))
