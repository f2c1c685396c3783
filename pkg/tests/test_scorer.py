import itertools
import math

import numpy as np
import pytest

from velm.alphabet import CANONICAL
from velm.backend import Backend, BackendDescriptor, MarginalDistribution, ProfileBackend
from velm.errors import PositionOutOfRange, UnknownGene, WildtypeMismatch
from velm.scorer import (
    DEFAULT_FLOOR,
    MarginalCache,
    VariantScore,
    score_batch,
    score_variant,
    write_scores_tsv,
)
from velm.sequence import (
    ProteinSequence,
    Substitution,
    Variant,
    apply_variant,
    invert_variant,
)

from .oracles import brute_force_score


def seq(residues, gene="G1"):
    return ProteinSequence(gene, residues)


def var(gene, *subs):
    return Variant.of(gene, [Substitution(p, wt, mt) for p, wt, mt in subs])


def uniform_backend(length=10):
    return ProfileBackend(np.zeros((length, 20)), pseudocount=1.0, corpus_size=0)


class CountingBackend(Backend):
    """Wraps a backend and counts queries."""

    def __init__(self, inner):
        self.inner = inner
        self.queries = 0

    @property
    def descriptor(self):
        return self.inner.descriptor

    def query_marginals(self, query):
        self.queries += 1
        return self.inner.query_marginals(query)


class ShiftedBackend(Backend):
    """De-normalized test double: a constant added to every log-prob."""

    def __init__(self, inner, shift):
        self.inner = inner
        self.shift = shift

    @property
    def descriptor(self):
        return BackendDescriptor("shifted", "profile", None, "test")

    def query_marginals(self, query):
        return [
            MarginalDistribution(d.position, d.as_array() + self.shift, validate=False)
            for d in self.inner.query_marginals(query)
        ]


# -- score_variant -------------------------------------------------------------

def test_equal_probability_scores_zero():
    score = score_variant(seq("MKT"), var("G1", (2, "K", "R")), uniform_backend(3))
    assert score.score == 0.0


def test_counting_corpus_single_substitution(tiny_profile):
    # At position 2 the profile has P(R) = 4/24 and P(K) = 2/24; scoring the
    # R->K variant of the consensus "MRT" gives ln(4/24) - ln(2/24) = ln 2.
    score = score_variant(seq("MRT"), var("G1", (2, "R", "K")), tiny_profile)
    assert score.score == pytest.approx(math.log(2), abs=1e-12)
    assert score.backend_id == tiny_profile.descriptor.id
    assert not score.cache_hit


def test_double_variant_matches_brute_force(tiny_profile):
    wildtype = seq("MRT")
    variant = var("G1", (2, "R", "K"), (3, "T", "A"))
    score = score_variant(wildtype, variant, tiny_profile)
    assert score.score == pytest.approx(
        brute_force_score(wildtype, variant, tiny_profile), abs=1e-12
    )
    assert len(score.per_position_terms) == 2


def test_score_recomputable_from_terms(tiny_profile):
    score = score_variant(seq("MRT"), var("G1", (2, "R", "K"), (3, "T", "A")), tiny_profile)
    recomputed = sum(t.log_prob_wildtype - t.log_prob_mutant for t in score.per_position_terms)
    assert abs(score.score - recomputed) <= 1e-9


def test_antisymmetry_under_inversion(tiny_profile):
    wildtype = seq("MRT")
    variant = var("G1", (2, "R", "K"), (3, "T", "A"))
    mutant = apply_variant(wildtype, variant)
    forward = score_variant(wildtype, variant, tiny_profile)
    backward = score_variant(mutant, invert_variant(variant), tiny_profile)
    assert forward.score == -backward.score


def test_shift_invariance_of_score_differences(tiny_profile):
    wildtype = seq("MRT")
    variants = [var("G1", (2, "R", "K")), var("G1", (2, "R", "A")), var("G1", (1, "M", "W"))]
    base = [score_variant(wildtype, v, tiny_profile).score for v in variants]
    shifted_backend = ShiftedBackend(tiny_profile, shift=3.7)
    shifted = [score_variant(wildtype, v, shifted_backend).score for v in variants]
    for (a, b), (sa, sb) in zip(
        itertools.combinations(base, 2), itertools.combinations(shifted, 2)
    ):
        assert (a - b) == pytest.approx(sa - sb, abs=1e-9)


def test_floor_clamps_vanishing_mutant_probability():
    class TinyProbBackend(Backend):
        @property
        def descriptor(self):
            return BackendDescriptor("tiny", "profile", None, "test")

        def query_marginals(self, query):
            probs = np.full(20, (1.0 - 1e-30) / 19)
            probs[CANONICAL.index("W")] = 1e-30
            return [
                MarginalDistribution(pos, np.log(probs))
                for pos in query.query_positions
            ]

    score = score_variant(seq("MKT"), var("G1", (2, "K", "W")), TinyProbBackend())
    assert score.floored
    assert score.per_position_terms[0].log_prob_mutant == DEFAULT_FLOOR
    assert score.score == pytest.approx(math.log((1 - 1e-30) / 19) - DEFAULT_FLOOR)


def test_wildtype_mismatch_propagates(tiny_profile):
    with pytest.raises(WildtypeMismatch):
        score_variant(seq("MRT"), var("G1", (2, "K", "A")), tiny_profile)


# -- cache ----------------------------------------------------------------------

def test_cache_hit_returns_identical_values(tiny_profile):
    cache = MarginalCache(8)
    wildtype = seq("MRT")
    variant = var("G1", (2, "R", "K"))
    cold = score_variant(wildtype, variant, tiny_profile, cache)
    warm = score_variant(wildtype, variant, tiny_profile, cache)
    assert not cold.cache_hit and warm.cache_hit
    assert cold.score == warm.score
    assert cold.per_position_terms == warm.per_position_terms


def test_cache_shared_across_mutants_of_same_positions(tiny_profile):
    cache = MarginalCache(8)
    counting = CountingBackend(tiny_profile)
    wildtype = seq("MRT")
    for mutant in ("K", "A", "W"):
        score_variant(wildtype, var("G1", (2, "R", mutant)), counting, cache)
    assert counting.queries == 1


def test_cache_lru_eviction(tiny_profile):
    cache = MarginalCache(2)
    counting = CountingBackend(tiny_profile)
    wildtype = seq("MRT")
    score_variant(wildtype, var("G1", (1, "M", "A")), counting, cache)  # key {1}
    score_variant(wildtype, var("G1", (2, "R", "A")), counting, cache)  # key {2}
    score_variant(wildtype, var("G1", (1, "M", "W")), counting, cache)  # hit {1}
    score_variant(wildtype, var("G1", (3, "T", "A")), counting, cache)  # evicts {2}
    score_variant(wildtype, var("G1", (2, "R", "K")), counting, cache)  # refetch {2}
    assert counting.queries == 4
    assert cache.hits == 1


def test_cache_capacity_validation():
    with pytest.raises(ValueError):
        MarginalCache(0)


# -- score_batch ------------------------------------------------------------------

def make_corpus_profile(length=8, seed=11, depth=60):
    rng = np.random.default_rng(seed)
    counts = np.stack(
        [rng.multinomial(depth, rng.dirichlet(np.ones(20))) for _ in range(length)]
    ).astype(float)
    return ProfileBackend(counts, pseudocount=1.0, corpus_size=depth)


def batch_fixture(n=100):
    backend = make_corpus_profile()
    wildtype = seq("ACDEFGHI")
    pairs = [
        (mt1, mt2)
        for mt1 in CANONICAL
        if mt1 != "C"
        for mt2 in CANONICAL
        if mt2 != "E"
    ][:n]
    variants = [
        var("G1", (2, "C", mt1), (4, "E", mt2)) for mt1, mt2 in pairs
    ]
    return backend, {"G1": wildtype}, variants


def test_batch_same_mask_set_single_query():
    backend, sequences, variants = batch_fixture(100)
    counting = CountingBackend(backend)
    results = score_batch(sequences, variants, counting, MarginalCache(16))
    assert counting.queries == 1
    assert all(isinstance(r, VariantScore) for r in results)


def test_batch_query_count_equals_distinct_keys():
    backend = make_corpus_profile()
    wildtype = seq("ACDEFGHI")
    variants = [
        var("G1", (2, "C", "A")),
        var("G1", (2, "C", "W")),  # same key as above
        var("G1", (4, "E", "A")),
        var("G1", (2, "C", "A"), (4, "E", "A")),
    ]
    counting = CountingBackend(backend)
    score_batch({"G1": wildtype}, variants, counting, MarginalCache(16))
    assert counting.queries == 3  # keys {2}, {4}, {2,4}


def test_batch_parallelism_determinism():
    backend, sequences, variants = batch_fixture(100)
    serial = score_batch(sequences, variants, backend, MarginalCache(16), parallelism=1)
    threaded = score_batch(sequences, variants, backend, MarginalCache(16), parallelism=8)
    assert [r.score for r in serial] == [r.score for r in threaded]


def test_batch_cold_vs_cached_bit_identical():
    backend, sequences, variants = batch_fixture(50)
    cache = MarginalCache(16)
    cold = score_batch(sequences, variants, backend, cache)
    warm = score_batch(sequences, variants, backend, cache)
    assert [r.score for r in cold] == [r.score for r in warm]
    assert all(not r.cache_hit for r in cold)
    assert all(r.cache_hit for r in warm)


def test_batch_per_item_errors():
    backend = make_corpus_profile()
    sequences = {"G1": seq("ACDEFGHI")}
    variants = [
        var("G1", (2, "C", "A")),
        var("G1", (99, "C", "A")),  # out of range
        var("G2", (1, "A", "W")),  # unknown gene
        var("G1", (2, "C", "K")),
    ]
    results = score_batch(sequences, variants, backend, MarginalCache(4))
    assert isinstance(results[0], VariantScore)
    assert isinstance(results[1], PositionOutOfRange)
    assert isinstance(results[2], UnknownGene)
    assert isinstance(results[3], VariantScore)


def test_batch_single_flight_serializes():
    import threading
    import time

    class SingleFlightBackend(CountingBackend):
        single_flight = True

        def __init__(self, inner):
            super().__init__(inner)
            self._gauge = threading.Lock()
            self.active = 0
            self.max_active = 0

        def query_marginals(self, query):
            with self._gauge:
                self.active += 1
                self.max_active = max(self.max_active, self.active)
            time.sleep(0.005)
            result = super().query_marginals(query)
            with self._gauge:
                self.active -= 1
            return result

    backend = SingleFlightBackend(make_corpus_profile())
    wildtype = seq("ACDEFGHI")
    variants = [var("G1", (p, "ACDEFGHI"[p - 1], "W")) for p in (1, 2, 3, 4, 5)]
    score_batch({"G1": wildtype}, variants, backend, MarginalCache(16), parallelism=8)
    assert backend.max_active == 1


def test_batch_order_preserved():
    backend, sequences, variants = batch_fixture(20)
    results = score_batch(sequences, variants, backend, MarginalCache(16), parallelism=4)
    for variant, result in zip(variants, results):
        assert result.variant == variant


def test_write_scores_tsv(tiny_profile):
    import io

    results = [
        score_variant(seq("MRT"), var("G1", (2, "R", "K")), tiny_profile),
        UnknownGene("nope"),
    ]
    buf = io.StringIO()
    written = write_scores_tsv(buf, results)
    lines = buf.getvalue().splitlines()
    assert written == 1
    assert lines[0] == "gene_id\tvariant\tscore\tbackend_id\tcache_hit"
    fields = lines[1].split("\t")
    assert fields[0] == "G1"
    assert fields[1] == "R2K"
    assert float(fields[2]) == pytest.approx(math.log(2), abs=1e-12)
    assert fields[4] == "false"
