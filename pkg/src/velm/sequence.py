"""Wildtype sequences, variants and masking.

Positions are 1-based everywhere in public interfaces, matching clinical
notation ("R123C"); 0-based indexing stays internal. All types are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .alphabet import CANONICAL_SET, MASK, UNKNOWN
from .errors import (
    DuplicatePosition,
    EmptyMaskSet,
    EmptyVariant,
    GeneMismatch,
    InvalidResidue,
    PositionOutOfRange,
    WildtypeMismatch,
)


@dataclass(frozen=True)
class ProteinSequence:
    """A validated wildtype sequence for one gene.

    ``residues`` holds only canonical letters, except for ``X`` (unknown)
    which a parser may have admitted; ``X`` positions can never be scored.
    MASK never occurs here.
    """

    gene_id: str
    residues: str

    def __post_init__(self):
        if not self.gene_id:
            raise ValueError("gene_id must be non-empty")
        if not self.residues:
            raise ValueError(f"{self.gene_id}: sequence must have length >= 1")
        allowed = CANONICAL_SET | {UNKNOWN}
        for i, ch in enumerate(self.residues):
            if ch not in allowed:
                raise InvalidResidue(ch, column=i + 1)

    def __len__(self) -> int:
        return len(self.residues)

    def residue_at(self, position: int) -> str:
        """Residue at a 1-based position."""
        if not 1 <= position <= len(self.residues):
            raise PositionOutOfRange(
                f"position {position} outside 1..{len(self.residues)} of {self.gene_id}"
            )
        return self.residues[position - 1]


@dataclass(frozen=True, order=True)
class Substitution:
    """One missense substitution: ``wildtype`` at ``position`` becomes ``mutant``."""

    position: int
    wildtype: str
    mutant: str

    def __post_init__(self):
        if self.position < 1:
            raise PositionOutOfRange(f"position {self.position} must be >= 1")
        for residue in (self.wildtype, self.mutant):
            if residue not in CANONICAL_SET:
                raise InvalidResidue(residue)
        if self.wildtype == self.mutant:
            raise ValueError(f"substitution at {self.position} does not change the residue")

    def short(self) -> str:
        return f"{self.wildtype}{self.position}{self.mutant}"


@dataclass(frozen=True)
class Variant:
    """A gene reference plus a non-empty set of substitutions at distinct positions.

    Substitutions are stored sorted by position, so equal variants compare
    and hash equal regardless of construction order.
    """

    gene_id: str
    substitutions: tuple[Substitution, ...]

    def __post_init__(self):
        if not self.gene_id:
            raise ValueError("gene_id must be non-empty")
        if not self.substitutions:
            raise EmptyVariant(f"{self.gene_id}: variant needs at least one substitution")
        ordered = tuple(sorted(self.substitutions))
        positions = [s.position for s in ordered]
        if len(set(positions)) != len(positions):
            raise DuplicatePosition(f"{self.gene_id}: duplicate substitution positions {positions}")
        object.__setattr__(self, "substitutions", ordered)

    @classmethod
    def of(cls, gene_id: str, substitutions: Iterable[Substitution]) -> "Variant":
        return cls(gene_id, tuple(substitutions))

    def positions(self) -> tuple[int, ...]:
        return tuple(s.position for s in self.substitutions)


@dataclass(frozen=True)
class MaskedSequence:
    """A sequence with MASK at a fixed, sorted set of positions.

    Construction is deterministic: identical (base, masked_positions) always
    render identically, and ``rendered`` differs from the base exactly at the
    masked positions.
    """

    gene_id: str
    masked_positions: tuple[int, ...]
    rendered: str

    def __len__(self) -> int:
        return len(self.rendered)


def bind_variant(wildtype: ProteinSequence, variant: Variant) -> Variant:
    """Validate ``variant`` against its wildtype sequence and return it.

    Checks gene identity, position range and that each claimed wildtype
    residue matches the sequence. Since substitutions never carry ``X``,
    unknown-residue positions are rejected here as mismatches.
    """
    if variant.gene_id != wildtype.gene_id:
        raise GeneMismatch(f"variant is for {variant.gene_id}, sequence is {wildtype.gene_id}")
    for sub in variant.substitutions:
        actual = wildtype.residue_at(sub.position)
        if actual != sub.wildtype:
            raise WildtypeMismatch(
                f"{wildtype.gene_id} position {sub.position}: variant claims "
                f"{sub.wildtype}, sequence has {actual}"
            )
    return variant


def mutation_set(wildtype: ProteinSequence, variant: Variant) -> frozenset[int]:
    """The positions where applying ``variant`` changes the sequence.

    Substitutions always change their position (wildtype != mutant is a type
    invariant), so after validation this is exactly the substitution positions.
    """
    bind_variant(wildtype, variant)
    return frozenset(variant.positions())


def apply_variant(wildtype: ProteinSequence, variant: Variant) -> ProteinSequence:
    """Materialize the mutant sequence."""
    bind_variant(wildtype, variant)
    residues = list(wildtype.residues)
    for sub in variant.substitutions:
        residues[sub.position - 1] = sub.mutant
    return ProteinSequence(wildtype.gene_id, "".join(residues))


def invert_variant(variant: Variant) -> Variant:
    """Swap wildtype and mutant residues; valid against the mutant sequence."""
    return Variant(
        variant.gene_id,
        tuple(Substitution(s.position, s.mutant, s.wildtype) for s in variant.substitutions),
    )


def derive_variant(wildtype: ProteinSequence, mutant: ProteinSequence) -> Variant:
    """Recover the substitution set between two equal-length sequences."""
    if wildtype.gene_id != mutant.gene_id:
        raise GeneMismatch(f"{wildtype.gene_id} vs {mutant.gene_id}")
    if len(wildtype) != len(mutant):
        raise ValueError("sequences differ in length; only substitutions are modeled")
    subs = [
        Substitution(i + 1, wt, mt)
        for i, (wt, mt) in enumerate(zip(wildtype.residues, mutant.residues))
        if wt != mt
    ]
    return Variant.of(wildtype.gene_id, subs)


def mask_at(seq: ProteinSequence, positions: Iterable[int]) -> MaskedSequence:
    """Mask ``seq`` at the given 1-based positions.

    For any bound variant, masking the wildtype and masking the mutant at the
    variant's mutation set render identically: the masked context depends only
    on (gene, positions).
    """
    ordered = tuple(sorted(set(positions)))
    if not ordered:
        raise EmptyMaskSet("at least one position must be masked")
    if ordered[0] < 1 or ordered[-1] > len(seq):
        bad = ordered[0] if ordered[0] < 1 else ordered[-1]
        raise PositionOutOfRange(f"position {bad} outside 1..{len(seq)} of {seq.gene_id}")
    residues = list(seq.residues)
    for pos in ordered:
        residues[pos - 1] = MASK
    return MaskedSequence(seq.gene_id, ordered, "".join(residues))
