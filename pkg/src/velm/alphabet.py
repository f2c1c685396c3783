"""The amino-acid alphabet.

Exactly 22 symbols exist: the 20 canonical residues plus the MASK marker
(``?``, also the wire-protocol placeholder) and the UNKNOWN residue (``X``).
MASK never appears in a stored sequence; UNKNOWN may appear only when a
parser was told to accept it, and positions holding it are never scorable.
"""

from __future__ import annotations

from .errors import InvalidResidue

# Canonical one-letter residues, alphabetical. This ordering is the layout of
# every probability vector and of the wire-protocol log_probs maps.
CANONICAL = "ACDEFGHIKLMNPQRSTVWY"
CANONICAL_SET = frozenset(CANONICAL)

MASK = "?"
UNKNOWN = "X"

# Non-canonical IUPAC codes an ingest flag may map to UNKNOWN. B/Z are
# ambiguity codes, U/O the rare translated residues, J a mass-spec ambiguity.
NON_CANONICAL = frozenset("BZUOJ")

AA_INDEX = {aa: i for i, aa in enumerate(CANONICAL)}

THREE_TO_ONE = {
    "Ala": "A", "Arg": "R", "Asn": "N", "Asp": "D", "Cys": "C",
    "Gln": "Q", "Glu": "E", "Gly": "G", "His": "H", "Ile": "I",
    "Leu": "L", "Lys": "K", "Met": "M", "Phe": "F", "Pro": "P",
    "Ser": "S", "Thr": "T", "Trp": "W", "Tyr": "Y", "Val": "V",
}
ONE_TO_THREE = {one: three for three, one in THREE_TO_ONE.items()}


def is_canonical(residue: str) -> bool:
    return residue in CANONICAL_SET


def require_canonical(residue: str) -> str:
    """Return ``residue`` if it is one of the 20 canonical letters, else raise."""
    if residue not in CANONICAL_SET:
        raise InvalidResidue(residue)
    return residue
