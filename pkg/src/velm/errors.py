"""Exception hierarchy.

Three families matter to callers: ``InputError`` (bad user data, CLI exit
code 2), ``BackendError`` (a likelihood backend failed, exit code 3) and
``DegenerateClasses`` (evaluation impossible, exit code 4). Everything
derives from ``VelmError`` so library users can catch one base.
"""


class VelmError(Exception):
    """Base class for every error raised by this package."""


# ---------------------------------------------------------------------------
# Input / validation errors (CLI exit code 2)
# ---------------------------------------------------------------------------

class InputError(VelmError):
    """User-supplied data failed validation."""


class PositionOutOfRange(InputError):
    """A 1-based position falls outside the referenced sequence."""


class WildtypeMismatch(InputError):
    """A variant claims a wildtype residue that disagrees with the sequence."""


class GeneMismatch(InputError):
    """A variant was bound against a sequence with a different gene id."""


class EmptyVariant(InputError):
    """A variant must carry at least one substitution."""


class DuplicatePosition(InputError):
    """Two substitutions of one variant target the same position."""


class EmptyMaskSet(InputError):
    """Masking requires at least one position."""


class InvalidResidue(InputError):
    """A character outside the accepted amino-acid alphabet."""

    def __init__(self, char: str, line: int | None = None, column: int | None = None):
        self.char = char
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"invalid residue {char!r}{where}")


class MalformedHeader(InputError):
    """A FASTA structural problem (bad header, body before header, empty record)."""


class DuplicateGeneId(InputError):
    """Two FASTA records share a gene id."""


class UnrecognizedNotation(InputError):
    """A variant string matches neither the short nor the HGVS protein grammar."""


class UnknownResidueName(InputError):
    """An HGVS three-letter residue name is not one of the 20 canonical ones."""


class SynonymousVariant(InputError):
    """Wildtype and mutant residue are identical (e.g. R123R)."""


class NonMissenseVariant(InputError):
    """Stop-gain, frameshift, insertion or deletion notation; out of scope."""


class MissingColumn(InputError):
    """A required column is absent from a labeled-variant table."""


class UnknownGene(InputError):
    """A variant references a gene id with no loaded sequence."""


class EmptyCorpus(InputError):
    """Profile training needs at least one sequence."""


class RaggedCorpus(InputError):
    """Profile training needs sequences of equal length."""


class NonPositivePseudocount(InputError):
    """The profile pseudocount must be > 0."""


# ---------------------------------------------------------------------------
# Backend errors (CLI exit code 3)
# ---------------------------------------------------------------------------

class BackendError(VelmError):
    """A likelihood backend could not answer a query."""


class SequenceTooLong(BackendError):
    """The query sequence exceeds the backend's maximum length."""


class BackendUnavailable(BackendError):
    """The remote endpoint cannot be reached."""


class BackendTimeout(BackendError):
    """The remote endpoint did not answer within the configured timeout."""


class ProtocolError(BackendError):
    """A remote reply violates the wire protocol."""


class NonNormalizedReply(BackendError):
    """A reply's probabilities are too far from summing to one."""


# ---------------------------------------------------------------------------
# Evaluation errors
# ---------------------------------------------------------------------------

class DegenerateClasses(VelmError):
    """ROC/AUC needs at least one pathogenic and one benign record (exit code 4)."""


class NoQualifyingGenes(VelmError):
    """No gene passes the per-class minimum label count."""
