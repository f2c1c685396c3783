"""Evaluation report artifacts: JSON, CSV and self-contained SVG files.

The JSON layout is the stable machine-readable contract:

    {
      "aggregate": {"auc": .., "n_path": .., "n_ben": ..},
      "roc": [[fpr, tpr], ...],
      "histogram": {"edges": [..], "pathogenic": [..], "benign": [..]},
      "per_gene": {"<gene>": {"auc": .. or null, "n_path": .., "n_ben": ..}, ...},
      "mauc": [{"min_labels": 1, "mauc": .., "genes_included": ..,
                "variants_included": ..}, ...],
      "methods": {"<name>": {"auc": .., "n_rows": .., ...}, ...}
    }

Serialization is fully deterministic (sorted keys, shortest-repr floats,
no timestamps) so reruns over identical inputs are byte-identical. The SVGs
are rendered by hand for the same reason — display-only line/bar charts, no
plotting stack.
"""

from __future__ import annotations

import json
from typing import Mapping, Sequence, TextIO

from .evaluate import GeneAuc, Histogram, MaucRow, MethodReport, RocCurve


def build_report(
    curve: RocCurve,
    hist: Histogram,
    per_gene: Mapping[str, GeneAuc],
    mauc_rows: Sequence[MaucRow],
    methods: Mapping[str, MethodReport] | None = None,
) -> dict:
    report = {
        "aggregate": {
            "auc": curve.auc,
            "n_path": curve.n_pathogenic,
            "n_ben": curve.n_benign,
        },
        "roc": [[fpr, tpr] for fpr, tpr in curve.points],
        "histogram": {
            "edges": list(hist.edges),
            "pathogenic": list(hist.pathogenic),
            "benign": list(hist.benign),
        },
        "per_gene": {
            gene: {
                "auc": entry.auc,
                "n_path": entry.n_pathogenic,
                "n_ben": entry.n_benign,
            }
            for gene, entry in per_gene.items()
        },
        "mauc": [
            {
                "min_labels": row.min_labels,
                "mauc": row.mauc,
                "genes_included": row.genes_included,
                "variants_included": row.variants_included,
            }
            for row in mauc_rows
        ],
        "methods": {
            name: {
                "auc": m.auc,
                "n_rows": m.n_rows,
                "n_path": m.n_pathogenic,
                "n_ben": m.n_benign,
                "mauc": [
                    {
                        "min_labels": row.min_labels,
                        "mauc": row.mauc,
                        "genes_included": row.genes_included,
                        "variants_included": row.variants_included,
                    }
                    for row in m.mauc_rows
                ],
            }
            for name, m in (methods or {}).items()
        },
    }
    return report


def dump_report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_roc_csv(out: TextIO, curve: RocCurve) -> None:
    out.write("fpr,tpr\n")
    for fpr, tpr in curve.points:
        out.write(f"{fpr!r},{tpr!r}\n")


def write_histogram_csv(out: TextIO, hist: Histogram) -> None:
    out.write("bin_left,bin_right,pathogenic,benign\n")
    for i in range(len(hist.pathogenic)):
        out.write(
            f"{hist.edges[i]!r},{hist.edges[i + 1]!r},"
            f"{hist.pathogenic[i]},{hist.benign[i]}\n"
        )


_SVG_HEADER = (
    '<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
    'viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">\n'
)

# Chart geometry; margins leave room for axis labels.
_W, _H, _ML, _MR, _MT, _MB = 480, 400, 56, 16, 24, 48


def _axes(title: str, x_label: str, y_label: str) -> list[str]:
    return [
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="16" text-anchor="middle" font-weight="bold">{title}</text>',
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
        f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 12}" text-anchor="middle">{x_label}</text>',
        f'<text x="14" y="{(_MT + _H - _MB) / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {(_MT + _H - _MB) / 2})">{y_label}</text>',
    ]


def render_roc_svg(curve: RocCurve) -> str:
    """ROC polyline with the chance diagonal and the AUC in the title."""
    span_x, span_y = _W - _ML - _MR, _H - _MT - _MB

    def px(fpr: float, tpr: float) -> tuple[float, float]:
        return (_ML + fpr * span_x, _H - _MB - tpr * span_y)

    parts = [_SVG_HEADER.format(w=_W, h=_H)]
    parts += _axes(f"ROC (AUC = {curve.auc:.4f})", "false positive rate", "true positive rate")
    x0, y0 = px(0.0, 0.0)
    x1, y1 = px(1.0, 1.0)
    parts.append(
        f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y1:.2f}" '
        'stroke="#bbbbbb" stroke-dasharray="4 4"/>'
    )
    coords = " ".join(f"{px(f, t)[0]:.2f},{px(f, t)[1]:.2f}" for f, t in curve.points)
    parts.append(f'<polyline points="{coords}" fill="none" stroke="#1f77b4" stroke-width="2"/>')
    for tick in (0.0, 0.5, 1.0):
        tx, ty = px(tick, 0.0)
        parts.append(f'<text x="{tx:.2f}" y="{_H - _MB + 16}" text-anchor="middle">{tick:g}</text>')
        tx, ty = px(0.0, tick)
        parts.append(f'<text x="{_ML - 6}" y="{ty + 4:.2f}" text-anchor="end">{tick:g}</text>')
    parts.append("</svg>\n")
    return "\n".join(parts)


def render_histogram_svg(hist: Histogram) -> str:
    """Side-by-side per-label bars over the shared bins."""
    span_x, span_y = _W - _ML - _MR, _H - _MT - _MB
    n_bins = len(hist.pathogenic)
    peak = max(1, *hist.pathogenic, *hist.benign)
    bin_w = span_x / n_bins
    bar_w = bin_w / 2

    parts = [_SVG_HEADER.format(w=_W, h=_H)]
    parts += _axes("Score histogram by clinical label", "score", "count")
    for i in range(n_bins):
        x = _ML + i * bin_w
        for offset, counts, color in (
            (0.0, hist.benign, "#2ca02c"),
            (bar_w, hist.pathogenic, "#d62728"),
        ):
            h = counts[i] / peak * span_y
            parts.append(
                f'<rect x="{x + offset:.2f}" y="{_H - _MB - h:.2f}" '
                f'width="{bar_w:.2f}" height="{h:.2f}" fill="{color}" fill-opacity="0.8"/>'
            )
    parts.append(
        f'<rect x="{_W - _MR - 150}" y="{_MT}" width="10" height="10" fill="#d62728"/>'
        f'<text x="{_W - _MR - 136}" y="{_MT + 9}">pathogenic</text>'
    )
    parts.append(
        f'<rect x="{_W - _MR - 150}" y="{_MT + 16}" width="10" height="10" fill="#2ca02c"/>'
        f'<text x="{_W - _MR - 136}" y="{_MT + 25}">benign</text>'
    )
    for tick_i in (0, n_bins):
        x = _ML + tick_i * bin_w
        parts.append(
            f'<text x="{x:.2f}" y="{_H - _MB + 16}" text-anchor="middle">'
            f"{hist.edges[tick_i]:.3g}</text>"
        )
    parts.append(f'<text x="{_ML - 6}" y="{_MT + 4}" text-anchor="end">{peak}</text>')
    parts.append(f'<text x="{_ML - 6}" y="{_H - _MB + 4}" text-anchor="end">0</text>')
    parts.append("</svg>\n")
    return "\n".join(parts)
