"""FASTA and protein-variant notation parsing.

Two notation styles are supported:

    short := <AA><digits><AA>              e.g. R123C
    hgvs  := "p." <AAA><digits><AAA>       e.g. p.Arg123Cys
    multi := item (";" item)*              e.g. R123C;K7A

Parsing is total: every input either yields a value or raises a typed error,
never a partial result. Stop-gain (``Ter``/``*``), frameshift and indel
notations are recognized and rejected with ``NonMissenseVariant`` so they
fail loudly rather than as generic syntax errors.
"""

from __future__ import annotations

import re
from typing import Iterable, TextIO

from .alphabet import NON_CANONICAL, ONE_TO_THREE, THREE_TO_ONE, UNKNOWN, CANONICAL_SET
from .errors import (
    DuplicateGeneId,
    InvalidResidue,
    MalformedHeader,
    NonMissenseVariant,
    SynonymousVariant,
    UnknownResidueName,
    UnrecognizedNotation,
)
from .sequence import ProteinSequence, Substitution, Variant

SHORT_STYLE = "short"
HGVS_STYLE = "hgvs"

_SHORT_RE = re.compile(r"^([A-Za-z])(\d+)([A-Za-z])$")
_HGVS_RE = re.compile(r"^p\.([A-Za-z]{3})(\d+)([A-Za-z]{3})$", re.IGNORECASE)
# Notation that is syntactically variant-like but out of missense scope.
_NON_MISSENSE_RE = re.compile(
    r"(\*$|Ter$|fs|del|ins|dup|ext)", re.IGNORECASE
)


def parse_fasta(
    source: str | TextIO,
    *,
    allow_unknown: bool = False,
    map_non_canonical: bool = False,
) -> list[ProteinSequence]:
    """Parse FASTA text into validated sequences.

    The first whitespace-delimited token after ``>`` is the gene id.
    Multi-line bodies concatenate; CRLF and LF line endings both work and
    lines are length-unlimited. Lowercase residues are accepted and
    upper-cased.

    ``allow_unknown`` admits ``X`` residues; ``map_non_canonical`` maps
    B/Z/U/O/J to ``X`` (implying those positions are unscorable). By default
    both are rejected as ``InvalidResidue``.
    """
    text = source if isinstance(source, str) else source.read()
    records: list[ProteinSequence] = []
    seen: set[str] = set()
    gene_id: str | None = None
    parts: list[str] = []
    header_line = 0

    def flush():
        if gene_id is None:
            return
        body = "".join(parts)
        if not body:
            raise MalformedHeader(f"line {header_line}: record {gene_id!r} has no sequence")
        records.append(ProteinSequence(gene_id, body))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            flush()
            tokens = line[1:].split()
            if not tokens:
                raise MalformedHeader(f"line {lineno}: header has no gene id")
            gene_id = tokens[0]
            if gene_id in seen:
                raise DuplicateGeneId(f"line {lineno}: duplicate gene id {gene_id!r}")
            seen.add(gene_id)
            parts = []
            header_line = lineno
            continue
        if gene_id is None:
            raise MalformedHeader(f"line {lineno}: sequence data before any '>' header")
        cleaned = []
        for col, ch in enumerate(line, start=1):
            ch = ch.upper()
            if ch in CANONICAL_SET:
                cleaned.append(ch)
            elif ch == UNKNOWN:
                if not allow_unknown:
                    raise InvalidResidue(ch, line=lineno, column=col)
                cleaned.append(ch)
            elif ch in NON_CANONICAL and map_non_canonical:
                cleaned.append(UNKNOWN)
            else:
                raise InvalidResidue(ch, line=lineno, column=col)
        parts.append("".join(cleaned))
    flush()
    return records


def load_fasta(
    source: str | TextIO,
    *,
    allow_unknown: bool = False,
    map_non_canonical: bool = False,
) -> dict[str, ProteinSequence]:
    """Like :func:`parse_fasta` but keyed by gene id."""
    return {
        seq.gene_id: seq
        for seq in parse_fasta(
            source, allow_unknown=allow_unknown, map_non_canonical=map_non_canonical
        )
    }


def _parse_substitution(item: str) -> Substitution:
    m = _HGVS_RE.match(item)
    if m is not None:
        wt3, pos, mt3 = m.group(1).capitalize(), int(m.group(2)), m.group(3).capitalize()
        for name in (wt3, mt3):
            if name in ("Ter", "Del", "Ins", "Dup", "Ext"):
                raise NonMissenseVariant(
                    f"{item!r}: only missense substitutions are supported"
                )
            if name not in THREE_TO_ONE:
                raise UnknownResidueName(f"{item!r}: unknown residue name {name!r}")
        wt, mt = THREE_TO_ONE[wt3], THREE_TO_ONE[mt3]
        if wt == mt:
            raise SynonymousVariant(f"{item!r}: wildtype equals mutant")
        return Substitution(pos, wt, mt)

    m = _SHORT_RE.match(item)
    if m is not None:
        wt, pos, mt = m.group(1).upper(), int(m.group(2)), m.group(3).upper()
        for residue in (wt, mt):
            if residue not in CANONICAL_SET:
                raise UnknownResidueName(f"{item!r}: {residue!r} is not a canonical residue")
        if wt == mt:
            raise SynonymousVariant(f"{item!r}: wildtype equals mutant")
        return Substitution(pos, wt, mt)

    if _NON_MISSENSE_RE.search(item) and any(ch.isdigit() for ch in item):
        raise NonMissenseVariant(f"{item!r}: only missense substitutions are supported")
    raise UnrecognizedNotation(f"cannot parse variant notation {item!r}")


def parse_variant(notation: str, gene_id: str) -> Variant:
    """Parse one variant string (possibly ``;``-joined) for ``gene_id``."""
    items = [part.strip() for part in notation.split(";")]
    if not notation.strip() or any(not part for part in items):
        raise UnrecognizedNotation(f"cannot parse variant notation {notation!r}")
    return Variant.of(gene_id, (_parse_substitution(item) for item in items))


def format_variant(variant: Variant, style: str = SHORT_STYLE) -> str:
    """Canonical text for a variant in the given style."""
    if style == SHORT_STYLE:
        return ";".join(s.short() for s in variant.substitutions)
    if style == HGVS_STYLE:
        return ";".join(
            f"p.{ONE_TO_THREE[s.wildtype]}{s.position}{ONE_TO_THREE[s.mutant]}"
            for s in variant.substitutions
        )
    raise ValueError(f"unknown notation style {style!r}")


def detect_style(notation: str) -> str:
    """Style of a notation string, judged by its first item."""
    first = notation.split(";", 1)[0].strip()
    return HGVS_STYLE if first.lower().startswith("p.") else SHORT_STYLE


def format_fasta(sequences: Iterable[ProteinSequence], width: int = 60) -> str:
    """Render sequences as FASTA text, wrapping bodies at ``width`` columns."""
    chunks = []
    for seq in sequences:
        chunks.append(f">{seq.gene_id}")
        for start in range(0, len(seq.residues), width):
            chunks.append(seq.residues[start : start + width])
    return "\n".join(chunks) + "\n"
