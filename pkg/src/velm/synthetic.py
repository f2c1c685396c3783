"""Synthetic corpus and labeled-variant generation.

Builds a sharply profiled corpus, takes its consensus as the wildtype, then
samples "benign" variants toward high-probability residues and "pathogenic"
variants toward low-probability residues at uniformly chosen positions. The
sampling law is simple enough that the expected AUC of the log-odds score is
exactly enumerable over the finite (position, mutant) space, which gives
end-to-end tests an independent oracle.

All randomness flows through one ``numpy.random.Generator``; a fixed seed
reproduces the dataset bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alphabet import CANONICAL
from .backend import ProfileBackend, train_profile
from .ingest import ClinicalLabel
from .parser import format_variant
from .sequence import ProteinSequence, Substitution, Variant

GENE_ID = "SYN1"

# Pool sizes are tuned so the class score distributions overlap a little:
# the pathogenic pool reaches up into the mid-probability residues, keeping
# the expected AUC high but strictly below 1.
BENIGN_POOL = 2  # mutants drawn from the top-k non-wildtype residues
PATHOGENIC_POOL = 17  # mutants drawn from the bottom-k


@dataclass(frozen=True)
class SyntheticDataset:
    corpus: tuple[ProteinSequence, ...]
    wildtype: ProteinSequence
    backend: ProfileBackend
    labeled: tuple[tuple[Variant, ClinicalLabel], ...]
    expected_auc: float


def make_corpus(
    rng: np.random.Generator,
    length: int = 24,
    depth: int = 64,
    residues_per_position: int = 4,
) -> list[ProteinSequence]:
    """Corpus whose columns each mix a dominant residue with a few minors."""
    columns = []
    for _ in range(length):
        residues = rng.choice(len(CANONICAL), size=residues_per_position, replace=False)
        dominant = rng.uniform(0.55, 0.85)
        rest = rng.dirichlet(np.ones(residues_per_position - 1)) * (1.0 - dominant)
        counts = rng.multinomial(depth, np.concatenate(([dominant], rest)))
        column = np.repeat(residues, counts)
        rng.shuffle(column)
        columns.append(column)
    grid = np.stack(columns, axis=1)
    return [
        ProteinSequence(f"{GENE_ID}_C{row:03d}", "".join(CANONICAL[i] for i in grid[row]))
        for row in range(depth)
    ]


def consensus(backend: ProfileBackend) -> ProteinSequence:
    """Most probable residue per position; ties break toward the alphabet."""
    rows = np.stack([backend.position_log_probs(i + 1) for i in range(backend.length)])
    return ProteinSequence(GENE_ID, "".join(CANONICAL[i] for i in np.argmax(rows, axis=1)))


def _ranked_mutants(backend: ProfileBackend, wildtype: ProteinSequence, position: int) -> list[str]:
    """Non-wildtype residues at ``position`` by ascending profile probability.

    Ties break toward the alphabet so the sampler and the enumeration oracle
    agree on pool membership exactly.
    """
    row = backend.position_log_probs(position)
    wt = wildtype.residue_at(position)
    order = sorted(
        (aa for aa in CANONICAL if aa != wt),
        key=lambda aa: (row[CANONICAL.index(aa)], aa),
    )
    return order


def _pools(
    backend: ProfileBackend, wildtype: ProteinSequence
) -> tuple[list[list[str]], list[list[str]]]:
    benign, pathogenic = [], []
    for pos in range(1, len(wildtype) + 1):
        ranked = _ranked_mutants(backend, wildtype, pos)
        pathogenic.append(ranked[:PATHOGENIC_POOL])
        benign.append(ranked[-BENIGN_POOL:])
    return benign, pathogenic


def sample_labeled_variants(
    backend: ProfileBackend,
    wildtype: ProteinSequence,
    rng: np.random.Generator,
    n_pathogenic: int = 300,
    n_benign: int = 300,
) -> list[tuple[Variant, ClinicalLabel]]:
    """Draw labeled single-substitution variants per the documented law:
    position uniform, then a uniform draw from the class's mutant pool."""
    benign_pool, pathogenic_pool = _pools(backend, wildtype)
    out: list[tuple[Variant, ClinicalLabel]] = []
    for label, count, pools in (
        (ClinicalLabel.PATHOGENIC, n_pathogenic, pathogenic_pool),
        (ClinicalLabel.BENIGN, n_benign, benign_pool),
    ):
        for _ in range(count):
            pos = int(rng.integers(1, len(wildtype) + 1))
            pool = pools[pos - 1]
            mutant = pool[int(rng.integers(len(pool)))]
            variant = Variant.of(
                GENE_ID, [Substitution(pos, wildtype.residue_at(pos), mutant)]
            )
            out.append((variant, label))
    return out


def expected_auc(backend: ProfileBackend, wildtype: ProteinSequence) -> float:
    """Exact AUC of the sampling law, by enumerating the finite variant space.

    Every (position, mutant) pair a class can emit gets its sampling weight;
    the AUC is the weighted probability that a pathogenic draw outscores a
    benign one, ties at half credit. Scores reuse the backend's own log
    matrix, so tie structure matches the scoring engine exactly.
    """
    benign_pool, pathogenic_pool = _pools(backend, wildtype)
    length = len(wildtype)

    def flatten(pools: list[list[str]]) -> tuple[np.ndarray, np.ndarray]:
        scores, weights = [], []
        for pos, pool in enumerate(pools, start=1):
            row = backend.position_log_probs(pos)
            wt = wildtype.residue_at(pos)
            for aa in pool:
                scores.append(row[CANONICAL.index(wt)] - row[CANONICAL.index(aa)])
                weights.append(1.0 / (length * len(pool)))
        return np.array(scores), np.array(weights)

    s_path, w_path = flatten(pathogenic_pool)
    s_ben, w_ben = flatten(benign_pool)
    gt = (s_path[:, None] > s_ben[None, :]).astype(np.float64)
    eq = (s_path[:, None] == s_ben[None, :]).astype(np.float64)
    auc = float(w_path @ (gt + 0.5 * eq) @ w_ben)
    return min(max(auc, 0.0), 1.0)


def make_dataset(
    seed: int,
    length: int = 24,
    depth: int = 64,
    n_pathogenic: int = 300,
    n_benign: int = 300,
) -> SyntheticDataset:
    rng = np.random.default_rng(seed)
    corpus = make_corpus(rng, length=length, depth=depth)
    backend = train_profile(corpus, pseudocount=1.0)
    wildtype = consensus(backend)
    labeled = sample_labeled_variants(
        backend, wildtype, rng, n_pathogenic=n_pathogenic, n_benign=n_benign
    )
    return SyntheticDataset(
        corpus=tuple(corpus),
        wildtype=wildtype,
        backend=backend,
        labeled=tuple(labeled),
        expected_auc=expected_auc(backend, wildtype),
    )


def labeled_tsv(dataset: SyntheticDataset, stars: int = 2) -> str:
    lines = ["gene_id\tvariant\tlabel\tstars"]
    for variant, label in dataset.labeled:
        lines.append(f"{variant.gene_id}\t{format_variant(variant)}\t{label.value}\t{stars}")
    return "\n".join(lines) + "\n"
