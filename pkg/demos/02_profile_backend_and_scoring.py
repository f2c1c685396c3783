"""Training a profile backend and scoring variants with it.

The profile backend is the deterministic reference implementation of the
masked-marginal interface: per-position residue counts with a pseudocount,
no context sensitivity. The score of a variant is the summed log-odds of
wildtype over mutant residues at the masked positions — higher means the
mutant is less likely, read as more likely pathogenic.
"""

import math

from velm import (
    MarginalCache,
    ProteinSequence,
    parse_variant,
    score_variant,
    train_profile,
)

# A tiny corpus: position 2 holds R three times and K once.
corpus = [
    ProteinSequence("seq0", "MKT"),
    ProteinSequence("seq1", "MRT"),
    ProteinSequence("seq2", "MRT"),
    ProteinSequence("seq3", "MRT"),
]
backend = train_profile(corpus, pseudocount=1.0)
print("backend:", backend.descriptor)

# Smoothed probabilities at position 2: P(R) = 4/24, P(K) = 2/24.
row = backend.position_log_probs(2)
print(f"P(R at 2) = {math.exp(row[15]):.4f}  (R is index 15 in the alphabet)")
print(f"P(K at 2) = {math.exp(row[8]):.4f}")

wildtype = ProteinSequence("G1", "MRT")
cache = MarginalCache(capacity=64)

# Scoring the consensus's R2K: ln(4/24) - ln(2/24) = ln 2.
score = score_variant(wildtype, parse_variant("R2K", "G1"), backend, cache)
print(f"\nscore(R2K) = {score.score:.6f}  (ln 2 = {math.log(2):.6f})")
for term in score.per_position_terms:
    print(
        f"  position {term.position}: "
        f"log P(wt) = {term.log_prob_wildtype:.4f}, "
        f"log P(mt) = {term.log_prob_mutant:.4f}"
    )

# A rarer substitution scores higher (less likely under the profile).
score_rare = score_variant(wildtype, parse_variant("R2W", "G1"), backend, cache)
print(f"score(R2W) = {score_rare.score:.6f}  (W was never observed)")

# Same mutation set -> served from the cache.
again = score_variant(wildtype, parse_variant("R2A", "G1"), backend, cache)
print(f"score(R2A) = {again.score:.6f}, cache_hit = {again.cache_hit}")
