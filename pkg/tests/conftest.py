import pytest

from velm.backend import train_profile
from velm.sequence import ProteinSequence

# The four-sequence counting corpus: at position 2, R occurs 3 times and K
# once, so with alpha=1 the smoothed probabilities are P(R) = 4/24 = 1/6,
# P(K) = 2/24 = 1/12 and 1/24 for the other 18 residues.
TINY_CORPUS = ["MKT", "MRT", "MRT", "MRT"]


@pytest.fixture
def tiny_corpus():
    return [ProteinSequence(f"C{i}", seq) for i, seq in enumerate(TINY_CORPUS)]


@pytest.fixture
def tiny_profile(tiny_corpus):
    return train_profile(tiny_corpus, pseudocount=1.0)
