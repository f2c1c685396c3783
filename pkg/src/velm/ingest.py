"""Loading clinically labeled variant tables and the evaluation-set filters.

Input is a TSV with header columns ``gene_id``, ``variant``, ``label`` and
``stars``; extra columns ride along as opaque annotations (external method
scores, typically). ``#``-prefixed lines are comments. Rows that fail any
step land in a rejection log with a reason — never silently dropped — so

    rows in == evaluation set + rejection log

holds across the whole pipeline.

By default only exact ``pathogenic``/``benign`` labels are admitted; the
``include_likely`` flag extends the mapping with ``likely_pathogenic`` and
``likely_benign``. Star ratings below the minimum (default 1), genes longer
than the maximum (default 512) and — when a focus sidecar is given —
substitutions outside a gene's focus positions are filtered out. Duplicate
gene+variant rows with conflicting labels are all rejected; asserting either
label would be guesswork.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence, TextIO

from .errors import InputError, MissingColumn, UnknownGene
from .parser import format_variant, parse_variant
from .sequence import ProteinSequence, Variant, bind_variant

REQUIRED_COLUMNS = ("gene_id", "variant", "label", "stars")


class ClinicalLabel(enum.Enum):
    PATHOGENIC = "pathogenic"
    BENIGN = "benign"


# Rejection reason codes, stable strings for the log.
class Reason:
    COLUMN_COUNT = "ColumnCount"
    UNKNOWN_GENE = "UnknownGene"
    LABEL_EXCLUDED = "LabelExcluded"
    BAD_STARS = "BadStars"
    STAR_FILTER = "StarFilter"
    LENGTH_FILTER = "LengthFilter"
    FOCUS_FILTER = "FocusFilter"
    CONFLICTING_LABEL = "ConflictingLabel"


@dataclass(frozen=True)
class LabeledVariant:
    """A bound variant with its clinical label and provenance."""

    variant: Variant
    label: ClinicalLabel
    stars: int
    raw_label: str
    annotations: Mapping[str, str] = field(default_factory=dict)
    row_number: int = 0
    raw_row: str = ""

    def __post_init__(self):
        if self.stars < 0:
            raise ValueError("stars must be >= 0")


@dataclass(frozen=True)
class EvalFilterConfig:
    min_stars: int = 1
    max_length: int = 512
    focus_positions: Mapping[str, frozenset[int]] | None = None
    include_likely: bool = False

    def __post_init__(self):
        if self.min_stars < 0:
            raise ValueError("min_stars must be >= 0")
        if self.max_length < 1:
            raise ValueError("max_length must be >= 1")

    def label_map(self) -> dict[str, ClinicalLabel]:
        mapping = {
            "pathogenic": ClinicalLabel.PATHOGENIC,
            "benign": ClinicalLabel.BENIGN,
        }
        if self.include_likely:
            mapping["likely_pathogenic"] = ClinicalLabel.PATHOGENIC
            mapping["likely_benign"] = ClinicalLabel.BENIGN
        return mapping


@dataclass(frozen=True)
class Rejection:
    row_number: int
    reason: str
    raw_row: str


@dataclass(frozen=True)
class EvalSummary:
    genes: int
    variants: int
    n_pathogenic: int
    n_benign: int


@dataclass(frozen=True)
class FilterResult:
    eval_set: tuple[LabeledVariant, ...]
    rejections: tuple[Rejection, ...]
    summary: EvalSummary


def _normalize_label(raw: str) -> str:
    return raw.strip().lower().replace(" ", "_")


def load_labeled_tsv(
    source: str | TextIO,
    sequences: Mapping[str, ProteinSequence],
    config: EvalFilterConfig = EvalFilterConfig(),
) -> tuple[list[LabeledVariant], list[Rejection]]:
    """Parse and bind every row; per-row failures go to the rejection log.

    Only a missing required column raises. Star ratings below
    ``config.min_stars`` are rejected here already so the log carries one
    reason per bad row as early as possible.
    """
    text = source if isinstance(source, str) else source.read()
    lines = [
        (lineno, line)
        for lineno, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines:
        raise MissingColumn(f"empty table; expected header with {REQUIRED_COLUMNS}")
    header = lines[0][1].rstrip("\r").split("\t")
    missing = [col for col in REQUIRED_COLUMNS if col not in header]
    if missing:
        raise MissingColumn(f"missing required column(s) {missing}; header is {header}")
    index = {col: header.index(col) for col in header}
    extra_columns = [col for col in header if col not in REQUIRED_COLUMNS]

    label_map = config.label_map()
    records: list[LabeledVariant] = []
    rejections: list[Rejection] = []
    for lineno, raw in lines[1:]:
        row = raw.rstrip("\r")
        fields = row.split("\t")

        def reject(reason: str):
            rejections.append(Rejection(lineno, reason, row))

        if len(fields) != len(header):
            reject(Reason.COLUMN_COUNT)
            continue
        gene_id = fields[index["gene_id"]].strip()
        wildtype = sequences.get(gene_id)
        if wildtype is None:
            reject(Reason.UNKNOWN_GENE)
            continue
        try:
            variant = parse_variant(fields[index["variant"]].strip(), gene_id)
            bind_variant(wildtype, variant)
        except InputError as exc:
            reject(type(exc).__name__)
            continue
        raw_label = fields[index["label"]].strip()
        label = label_map.get(_normalize_label(raw_label))
        if label is None:
            reject(Reason.LABEL_EXCLUDED)
            continue
        try:
            stars = int(fields[index["stars"]].strip())
            if stars < 0:
                raise ValueError
        except ValueError:
            reject(Reason.BAD_STARS)
            continue
        if stars < config.min_stars:
            reject(Reason.STAR_FILTER)
            continue
        annotations = {
            col: fields[index[col]].strip()
            for col in extra_columns
            if fields[index[col]].strip()
        }
        records.append(
            LabeledVariant(
                variant=variant,
                label=label,
                stars=stars,
                raw_label=raw_label,
                annotations=annotations,
                row_number=lineno,
                raw_row=row,
            )
        )
    return records, rejections


def apply_filters(
    records: Sequence[LabeledVariant],
    config: EvalFilterConfig,
    sequences: Mapping[str, ProteinSequence],
) -> FilterResult:
    """Reduce loaded records to the evaluation set; total and idempotent.

    Checks run in a fixed order (stars, length, focus, conflicting
    duplicates) so a row failing several gets a deterministic reason. With a
    focus sidecar present, genes absent from it have an empty focus set —
    mirroring a per-gene method that cannot score them at all.
    """
    survivors: list[LabeledVariant] = []
    rejections: list[Rejection] = []
    for record in records:
        gene_id = record.variant.gene_id
        if record.stars < config.min_stars:
            rejections.append(
                Rejection(record.row_number, Reason.STAR_FILTER, record.raw_row)
            )
            continue
        wildtype = sequences.get(gene_id)
        if wildtype is None:
            rejections.append(
                Rejection(record.row_number, Reason.UNKNOWN_GENE, record.raw_row)
            )
            continue
        if len(wildtype) > config.max_length:
            rejections.append(
                Rejection(record.row_number, Reason.LENGTH_FILTER, record.raw_row)
            )
            continue
        if config.focus_positions is not None:
            focus = config.focus_positions.get(gene_id, frozenset())
            if not all(pos in focus for pos in record.variant.positions()):
                rejections.append(
                    Rejection(record.row_number, Reason.FOCUS_FILTER, record.raw_row)
                )
                continue
        survivors.append(record)

    # Conflicting duplicates: same gene+variant with more than one label.
    labels_by_key: dict[tuple[str, str], set[ClinicalLabel]] = {}
    for record in survivors:
        key = (record.variant.gene_id, format_variant(record.variant))
        labels_by_key.setdefault(key, set()).add(record.label)
    eval_set: list[LabeledVariant] = []
    for record in survivors:
        key = (record.variant.gene_id, format_variant(record.variant))
        if len(labels_by_key[key]) > 1:
            rejections.append(
                Rejection(record.row_number, Reason.CONFLICTING_LABEL, record.raw_row)
            )
        else:
            eval_set.append(record)

    n_path = sum(1 for r in eval_set if r.label is ClinicalLabel.PATHOGENIC)
    summary = EvalSummary(
        genes=len({r.variant.gene_id for r in eval_set}),
        variants=len(eval_set),
        n_pathogenic=n_path,
        n_benign=len(eval_set) - n_path,
    )
    return FilterResult(tuple(eval_set), tuple(rejections), summary)


def parse_focus_file(source: str | TextIO) -> dict[str, frozenset[int]]:
    """Sidecar format: one gene per line, ``gene_id<TAB>pos,pos,...``."""
    text = source if isinstance(source, str) else source.read()
    out: dict[str, frozenset[int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise InputError(f"focus file line {lineno}: expected gene_id<TAB>positions")
        gene_id, positions = parts
        try:
            out[gene_id.strip()] = frozenset(
                int(tok) for tok in positions.split(",") if tok.strip()
            )
        except ValueError as exc:
            raise InputError(f"focus file line {lineno}: bad position list") from exc
    return out


def write_rejections(out: TextIO, rejections: Sequence[Rejection]) -> None:
    """Rejection log as TSV: ``row_number<TAB>reason<TAB>raw_row``."""
    out.write("row_number\treason\traw_row\n")
    for rej in rejections:
        out.write(f"{rej.row_number}\t{rej.reason}\t{rej.raw_row}\n")
