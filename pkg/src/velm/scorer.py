"""The masked-marginal log-odds score.

For a variant with mutation set M against wildtype x, the score is

    sum over i in M of  log P(x_i = wt_i | context) - log P(x_i = mt_i | context)

where the context is the sequence masked at all of M. Masking at M erases
exactly the residues where wildtype and mutant differ, so both share one
masked context: marginals depend only on (gene, M), never on the mutant
residues. That identity is the efficiency win this module exploits — all
variants sharing (gene, M) are answered by a single backend query, and the
marginal cache is keyed accordingly.

Higher score means the mutant residues are less likely than the wildtype
ones under the model, read downstream as more likely pathogenic. Scores are
natural-log units, emitted unrounded.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence, TextIO

from .backend import Backend, MarginalDistribution, MaskedQuery
from .errors import UnknownGene, VelmError
from .parser import format_variant
from .sequence import ProteinSequence, Variant, mask_at, mutation_set

# Terms are clamped at this log-probability so a (near-)zero mutant
# probability cannot blow the sum up to infinity; AUC stays computable.
DEFAULT_FLOOR = math.log(1e-10)

CacheKey = tuple[str, tuple[int, ...]]


@dataclass(frozen=True)
class PositionTerm:
    """One summand of the score at a mutated position (already floored)."""

    position: int
    log_prob_wildtype: float
    log_prob_mutant: float

    @property
    def value(self) -> float:
        return self.log_prob_wildtype - self.log_prob_mutant


@dataclass(frozen=True)
class VariantScore:
    """A scored variant with enough provenance to recompute the sum."""

    variant: Variant
    score: float
    per_position_terms: tuple[PositionTerm, ...]
    backend_id: str
    cache_hit: bool
    floor: float = DEFAULT_FLOOR
    floored: bool = False


class MarginalCache:
    """LRU cache of backend answers keyed by (gene_id, masked position set).

    Concurrent reads are fine; inserts are exclusive and first-writer-wins,
    so racing writers of the same key all end up holding the value that got
    in first (value-identical anyway for deterministic backends; for remote
    backends this pins the first reply). One cache serves one backend — reuse
    across backends would mix their answers.
    """

    def __init__(self, capacity: int = 1024):
        if capacity < 1:
            raise ValueError("cache capacity must be >= 1")
        self.capacity = capacity
        self._entries: OrderedDict[CacheKey, tuple[MarginalDistribution, ...]] = OrderedDict()
        self._lock = threading.RLock()
        self.hits = 0
        self.misses = 0

    def get(self, key: CacheKey) -> tuple[MarginalDistribution, ...] | None:
        with self._lock:
            value = self._entries.get(key)
            if value is None:
                self.misses += 1
                return None
            self._entries.move_to_end(key)
            self.hits += 1
            return value

    def put(
        self, key: CacheKey, value: tuple[MarginalDistribution, ...]
    ) -> tuple[MarginalDistribution, ...]:
        with self._lock:
            existing = self._entries.get(key)
            if existing is not None:
                self._entries.move_to_end(key)
                return existing
            self._entries[key] = value
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)
            return value

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


def _fetch_marginals(
    wildtype: ProteinSequence,
    positions: tuple[int, ...],
    backend: Backend,
    lock: threading.Lock | None = None,
) -> tuple[MarginalDistribution, ...]:
    query = MaskedQuery(mask_at(wildtype, positions), positions)
    if lock is not None:
        with lock:
            return tuple(backend.query_marginals(query))
    return tuple(backend.query_marginals(query))


def _assemble_score(
    wildtype: ProteinSequence,
    variant: Variant,
    marginals: Sequence[MarginalDistribution],
    backend_id: str,
    cache_hit: bool,
    floor: float,
) -> VariantScore:
    by_position = {m.position: m for m in marginals}
    terms = []
    floored = False
    for sub in variant.substitutions:
        dist = by_position[sub.position]
        lp_wt = dist.log_prob(sub.wildtype)
        lp_mt = dist.log_prob(sub.mutant)
        if lp_wt < floor or lp_mt < floor:
            floored = True
            lp_wt = max(lp_wt, floor)
            lp_mt = max(lp_mt, floor)
        terms.append(PositionTerm(sub.position, lp_wt, lp_mt))
    score = 0.0
    for term in terms:  # fixed position order keeps the sum deterministic
        score += term.value
    return VariantScore(
        variant=variant,
        score=score,
        per_position_terms=tuple(terms),
        backend_id=backend_id,
        cache_hit=cache_hit,
        floor=floor,
        floored=floored,
    )


def score_variant(
    wildtype: ProteinSequence,
    variant: Variant,
    backend: Backend,
    cache: MarginalCache | None = None,
    floor: float = DEFAULT_FLOOR,
) -> VariantScore:
    """Score one variant, fetching marginals through the cache when given."""
    positions = tuple(sorted(mutation_set(wildtype, variant)))
    key: CacheKey = (wildtype.gene_id, positions)
    cache_hit = False
    marginals = cache.get(key) if cache is not None else None
    if marginals is None:
        marginals = _fetch_marginals(wildtype, positions, backend)
        if cache is not None:
            marginals = cache.put(key, marginals)
    else:
        cache_hit = True
    return _assemble_score(
        wildtype, variant, marginals, backend.descriptor.id, cache_hit, floor
    )


def score_batch(
    sequences: Mapping[str, ProteinSequence],
    variants: Sequence[Variant],
    backend: Backend,
    cache: MarginalCache | None = None,
    parallelism: int = 1,
    floor: float = DEFAULT_FLOOR,
) -> list[VariantScore | VelmError]:
    """Score many variants; failures stay per-item.

    The result list is aligned with the input: each entry is a VariantScore
    or the error that variant raised. Variants sharing (gene, M) collapse to
    one backend query, issued concurrently up to ``parallelism`` across
    distinct keys. Scores are identical for any parallelism and grouping; a
    reported cache_hit means the key predated this call.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    backend_id = backend.descriptor.id
    results: list[VariantScore | VelmError | None] = [None] * len(variants)

    # Validation pass: bind each variant and group by cache key.
    plan: dict[CacheKey, list[int]] = {}
    bound: dict[int, tuple[ProteinSequence, tuple[int, ...]]] = {}
    for idx, variant in enumerate(variants):
        wildtype = sequences.get(variant.gene_id)
        if wildtype is None:
            results[idx] = UnknownGene(f"no sequence loaded for gene {variant.gene_id!r}")
            continue
        try:
            positions = tuple(sorted(mutation_set(wildtype, variant)))
        except VelmError as exc:
            results[idx] = exc
            continue
        bound[idx] = (wildtype, positions)
        plan.setdefault((variant.gene_id, positions), []).append(idx)

    # Fetch pass: one query per distinct key not already cached.
    preexisting: set[CacheKey] = set()
    to_fetch: list[CacheKey] = []
    fetched: dict[CacheKey, tuple[MarginalDistribution, ...] | VelmError] = {}
    for key, indices in plan.items():
        value = cache.get(key) if cache is not None else None
        if value is not None:
            preexisting.add(key)
            fetched[key] = value
        else:
            to_fetch.append(key)

    flight_lock = threading.Lock() if backend.single_flight else None

    def fetch(key: CacheKey) -> tuple[MarginalDistribution, ...] | VelmError:
        wildtype, positions = bound[plan[key][0]]
        try:
            value = _fetch_marginals(wildtype, positions, backend, flight_lock)
        except VelmError as exc:
            return exc
        if cache is not None:
            value = cache.put(key, value)
        return value

    if parallelism == 1 or len(to_fetch) <= 1:
        for key in to_fetch:
            fetched[key] = fetch(key)
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            for key, value in zip(to_fetch, pool.map(fetch, to_fetch)):
                fetched[key] = value

    # Assembly pass: deterministic, order-preserving.
    for key, indices in plan.items():
        outcome = fetched[key]
        for idx in indices:
            if isinstance(outcome, VelmError):
                results[idx] = outcome
            else:
                wildtype, _ = bound[idx]
                results[idx] = _assemble_score(
                    wildtype,
                    variants[idx],
                    outcome,
                    backend_id,
                    key in preexisting,
                    floor,
                )
    return results  # type: ignore[return-value]


def write_scores_tsv(
    out: TextIO, results: Sequence[VariantScore | VelmError]
) -> int:
    """Write scored rows as TSV; errors are skipped. Returns rows written."""
    out.write("gene_id\tvariant\tscore\tbackend_id\tcache_hit\n")
    written = 0
    for item in results:
        if isinstance(item, VariantScore):
            out.write(
                f"{item.variant.gene_id}\t{format_variant(item.variant)}\t"
                f"{item.score!r}\t{item.backend_id}\t{str(item.cache_hit).lower()}\n"
            )
            written += 1
    return written
