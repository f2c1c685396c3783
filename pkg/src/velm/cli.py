"""Command-line entry point.

Commands: ``train-profile`` (fit and save a profile backend), ``score``
(variants TSV -> score TSV), ``evaluate`` (labeled TSV -> ROC/AUC/mAUC
report) and ``synth`` (seeded synthetic dataset for exercising the
pipeline).

Configuration precedence is flags > config file (``--config``, JSON) >
defaults, with the ``VELM_BACKEND`` environment variable as the default
backend spec. Every run directory receives a manifest echoing the resolved
config, the backend descriptor and content digests of the inputs, enough to
repeat the run. Output files are written atomically (temp file + rename).

Exit codes: 0 success, 2 input error, 3 backend error, 4 degenerate classes
(evaluation has fewer than two label classes after filtering).
"""

from __future__ import annotations

import functools
import hashlib
import io
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import click

from . import __version__
from .backend import Backend, ProfileBackend, RemoteBackend, train_profile
from .errors import (
    BackendError,
    DegenerateClasses,
    InputError,
    NoQualifyingGenes,
    VelmError,
)
from .evaluate import (
    AnnotatedRecord,
    ScoredLabel,
    compare_methods,
    histogram,
    mean_auc,
    per_gene_auc,
    roc_auc,
)
from .ingest import (
    EvalFilterConfig,
    Rejection,
    apply_filters,
    load_labeled_tsv,
    parse_focus_file,
    write_rejections,
)
from .parser import format_fasta, load_fasta, parse_variant
from .report import (
    build_report,
    dump_report_json,
    render_histogram_svg,
    render_roc_svg,
    write_histogram_csv,
    write_roc_csv,
)
from .scorer import MarginalCache, VariantScore, score_batch, write_scores_tsv
from .sequence import bind_variant
from . import synthetic

MAUC_LEVELS = (1, 3, 5)


@dataclass(frozen=True)
class RunConfig:
    backend: str | None = None
    min_stars: int = 1
    max_length: int = 512
    focus: str | None = None
    include_likely: bool = False
    parallelism: int = 1
    cache_capacity: int = 4096
    out: str = "run"
    seed: int = 0
    weighting: str = "total"
    bins: int = 30
    timeout: float = 60.0


def resolve_config(config_path: str | None, **flags) -> RunConfig:
    """flags > config file > env (backend only) > defaults."""
    merged: dict = {}
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            try:
                file_values = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InputError(f"{config_path}: not valid JSON ({exc})") from exc
        unknown = set(file_values) - set(RunConfig.__dataclass_fields__)
        if unknown:
            raise InputError(f"{config_path}: unknown config keys {sorted(unknown)}")
        merged.update(file_values)
    for key, value in flags.items():
        if value is not None:
            merged[key] = value
    if merged.get("backend") is None and os.environ.get("VELM_BACKEND"):
        merged["backend"] = os.environ["VELM_BACKEND"]
    return RunConfig(**merged)


def resolve_backend(config: RunConfig) -> Backend:
    """Build the backend from its ``profile:<path>`` / ``remote:<url>`` spec.

    Remote endpoints are health-checked here so a run fails before writing
    anything.
    """
    spec = config.backend
    if not spec:
        raise InputError(
            "no backend configured; pass --backend, set it in --config, "
            "or export VELM_BACKEND"
        )
    kind, _, rest = spec.partition(":")
    if kind == "profile" and rest:
        try:
            return ProfileBackend.load(rest)
        except FileNotFoundError as exc:
            raise InputError(f"profile file not found: {rest}") from exc
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise InputError(f"{rest}: not a valid profile file ({exc})") from exc
    if kind == "remote" and rest:
        backend = RemoteBackend(rest, timeout=config.timeout)
        backend.healthcheck()
        return backend
    raise InputError(f"backend spec {spec!r} must be profile:<path> or remote:<url>")


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(
    out_dir: Path,
    command: str,
    config: RunConfig,
    inputs: dict[str, str],
    counts: dict[str, int],
    backend: Backend | None,
    started: float,
) -> None:
    manifest = {
        "command": command,
        "package_version": __version__,
        "config": asdict(config),
        "backend": backend.descriptor.as_dict() if backend else None,
        "inputs": {name: _digest(path) for name, path in inputs.items()},
        "counts": counts,
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    _atomic_write(out_dir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _fail(exc: VelmError):
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, DegenerateClasses):
        sys.exit(4)
    sys.exit(3 if isinstance(exc, BackendError) else 2)


def run_guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (InputError, BackendError, DegenerateClasses) as exc:
            _fail(exc)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


def config_options(fn):
    options = [
        click.option("--backend", help="profile:<path> or remote:<url> (env: VELM_BACKEND)"),
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False)),
        click.option("--min-stars", type=int, default=None),
        click.option("--max-length", type=int, default=None),
        click.option("--focus", type=click.Path(exists=True, dir_okay=False), default=None),
        click.option("--include-likely", is_flag=True, default=None),
        click.option("--parallelism", type=int, default=None),
        click.option("--cache-capacity", type=int, default=None),
        click.option("--out", default=None, help="output directory"),
        click.option("--seed", type=int, default=None),
        click.option(
            "--weighting",
            type=click.Choice(["total", "min_class", "uniform"]),
            default=None,
        ),
        click.option("--bins", type=int, default=None, help="histogram bin count"),
        click.option("--timeout", type=float, default=None, help="remote timeout (s)"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


@click.group()
@click.version_option(version=__version__, prog_name="velm")
def main():
    """Masked-marginal log-odds scoring of protein variants."""


@main.command("train-profile")
@click.argument("corpus_fasta", type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", type=float, default=1.0, show_default=True, help="pseudocount")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@run_guard
def cmd_train_profile(corpus_fasta: str, alpha: float, out_path: str):
    """Fit a per-position profile backend from an equal-length corpus."""
    with open(corpus_fasta, encoding="utf-8") as fh:
        corpus = list(load_fasta(fh).values())
    backend = train_profile(corpus, pseudocount=alpha)
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    backend.save(out_path)
    click.echo(
        f"trained {backend.descriptor.id} on {backend.corpus_size} sequences "
        f"of length {backend.length} -> {out_path}"
    )


def _load_sequences(fasta_path: str):
    with open(fasta_path, encoding="utf-8") as fh:
        return load_fasta(fh)


def _score_rows(
    rows: list[tuple[int, str, str, str]],
    sequences,
    backend: Backend,
    config: RunConfig,
):
    """Bind and score (row_number, gene_id, notation, raw) rows.

    Returns aligned scored results plus rejections for rows that failed
    parsing, binding or scoring.
    """
    rejections: list[Rejection] = []
    variants = []
    kept_rows = []
    for row_number, gene_id, notation, raw in rows:
        wildtype = sequences.get(gene_id)
        try:
            if wildtype is None:
                raise InputError(f"no sequence for gene {gene_id!r}")
            variant = parse_variant(notation, gene_id)
            bind_variant(wildtype, variant)
        except VelmError as exc:
            reason = "UnknownGene" if wildtype is None else type(exc).__name__
            rejections.append(Rejection(row_number, reason, raw))
            continue
        variants.append(variant)
        kept_rows.append((row_number, raw))
    cache = MarginalCache(config.cache_capacity)
    results = score_batch(
        sequences, variants, backend, cache, parallelism=config.parallelism
    )
    scored: list[VariantScore] = []
    for (row_number, raw), outcome in zip(kept_rows, results):
        if isinstance(outcome, VariantScore):
            scored.append(outcome)
        else:
            rejections.append(Rejection(row_number, type(outcome).__name__, raw))
    return scored, rejections


@main.command("score")
@click.argument("fasta", type=click.Path(exists=True, dir_okay=False))
@click.argument("variants_tsv", type=click.Path(exists=True, dir_okay=False))
@config_options
@run_guard
def cmd_score(fasta: str, variants_tsv: str, config_path: str | None, **flags):
    """Score a TSV of variants (columns: gene_id, variant)."""
    started = time.monotonic()
    config = resolve_config(config_path, **flags)
    backend = resolve_backend(config)
    sequences = _load_sequences(fasta)

    rows: list[tuple[int, str, str, str]] = []
    with open(variants_tsv, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header: list[str] | None = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if header is None:
            header = line.split("\t")
            for col in ("gene_id", "variant"):
                if col not in header:
                    raise InputError(f"{variants_tsv}: missing column {col!r}")
            continue
        fields = line.split("\t")
        if len(fields) != len(header):
            rows.append((lineno, "", "", line))
            continue
        record = dict(zip(header, fields))
        rows.append((lineno, record["gene_id"].strip(), record["variant"].strip(), line))

    scored, rejections = _score_rows(rows, sequences, backend, config)

    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    write_scores_tsv(buf, scored)
    _atomic_write(out_dir / "scores.tsv", buf.getvalue())
    buf = io.StringIO()
    write_rejections(buf, sorted(rejections, key=lambda r: r.row_number))
    _atomic_write(out_dir / "rejections.tsv", buf.getvalue())
    write_manifest(
        out_dir,
        "score",
        config,
        {"fasta": fasta, "variants": variants_tsv},
        {"rows_in": len(rows), "scored": len(scored), "rejected": len(rejections)},
        backend,
        started,
    )
    click.echo(f"scored {len(scored)} variants ({len(rejections)} rejected) -> {out_dir}")


@main.command("evaluate")
@click.argument("fasta", type=click.Path(exists=True, dir_okay=False))
@click.argument("labeled_tsv", type=click.Path(exists=True, dir_okay=False))
@config_options
@run_guard
def cmd_evaluate(fasta: str, labeled_tsv: str, config_path: str | None, **flags):
    """Evaluate scores against clinical labels: ROC/AUC, per-gene mAUC, histogram."""
    started = time.monotonic()
    config = resolve_config(config_path, **flags)
    backend = resolve_backend(config)
    sequences = _load_sequences(fasta)

    filter_config = EvalFilterConfig(
        min_stars=config.min_stars,
        max_length=config.max_length,
        focus_positions=(
            parse_focus_file(Path(config.focus).read_text(encoding="utf-8"))
            if config.focus
            else None
        ),
        include_likely=config.include_likely,
    )
    with open(labeled_tsv, encoding="utf-8") as fh:
        records, rejections = load_labeled_tsv(fh, sequences, filter_config)
    rows_in = len(records) + len(rejections)
    filtered = apply_filters(records, filter_config, sequences)
    rejections.extend(filtered.rejections)

    cache = MarginalCache(config.cache_capacity)
    results = score_batch(
        sequences,
        [record.variant for record in filtered.eval_set],
        backend,
        cache,
        parallelism=config.parallelism,
    )
    scored_rows: list[ScoredLabel] = []
    annotated: list[AnnotatedRecord] = []
    kept_scores: list[VariantScore] = []
    for record, outcome in zip(filtered.eval_set, results):
        if isinstance(outcome, VariantScore):
            kept_scores.append(outcome)
            scored_rows.append(
                ScoredLabel(record.variant.gene_id, outcome.score, record.label)
            )
            method_scores = {}
            for name, value in record.annotations.items():
                try:
                    method_scores[name] = float(value)
                except ValueError:
                    pass
            annotated.append(
                AnnotatedRecord(record.variant.gene_id, record.label, method_scores)
            )
        else:
            rejections.append(
                Rejection(record.row_number, type(outcome).__name__, record.raw_row)
            )

    if not scored_rows:
        raise DegenerateClasses("evaluation set is empty after filtering and scoring")
    curve = roc_auc(scored_rows)  # raises DegenerateClasses -> exit 4
    per_gene = per_gene_auc(scored_rows)
    mauc_rows = []
    for n in MAUC_LEVELS:
        try:
            mauc_rows.append(mean_auc(per_gene, n, config.weighting))
        except NoQualifyingGenes:
            pass
    hist = histogram(scored_rows, config.bins)
    methods = compare_methods(annotated, MAUC_LEVELS, config.weighting)
    report = build_report(curve, hist, per_gene, mauc_rows, methods)

    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write(out_dir / "report.json", dump_report_json(report))
    buf = io.StringIO()
    write_roc_csv(buf, curve)
    _atomic_write(out_dir / "roc.csv", buf.getvalue())
    buf = io.StringIO()
    write_histogram_csv(buf, hist)
    _atomic_write(out_dir / "histogram.csv", buf.getvalue())
    _atomic_write(out_dir / "roc.svg", render_roc_svg(curve))
    _atomic_write(out_dir / "histogram.svg", render_histogram_svg(hist))
    buf = io.StringIO()
    write_scores_tsv(buf, kept_scores)
    _atomic_write(out_dir / "scores.tsv", buf.getvalue())
    buf = io.StringIO()
    write_rejections(buf, sorted(rejections, key=lambda r: r.row_number))
    _atomic_write(out_dir / "rejections.tsv", buf.getvalue())

    inputs = {"fasta": fasta, "labeled": labeled_tsv}
    if config.focus:
        inputs["focus"] = config.focus
    write_manifest(
        out_dir,
        "evaluate",
        config,
        inputs,
        {
            "rows_in": rows_in,
            "eval_set": filtered.summary.variants,
            "scored": len(scored_rows),
            "rejected": len(rejections),
            "genes": filtered.summary.genes,
            "n_pathogenic": filtered.summary.n_pathogenic,
            "n_benign": filtered.summary.n_benign,
            "backend_queries": cache.misses,
        },
        backend,
        started,
    )
    click.echo(
        f"evaluated {len(scored_rows)} variants over {filtered.summary.genes} genes: "
        f"AUC {curve.auc:.4f} -> {out_dir}"
    )


@main.command("synth")
@click.option("--out", required=True, help="output directory")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--length", type=int, default=24, show_default=True)
@click.option("--depth", type=int, default=64, show_default=True)
@click.option("--n-pathogenic", type=int, default=300, show_default=True)
@click.option("--n-benign", type=int, default=300, show_default=True)
@run_guard
def cmd_synth(out: str, seed: int, length: int, depth: int, n_pathogenic: int, n_benign: int):
    """Write a seeded synthetic corpus, wildtype and labeled variant table."""
    dataset = synthetic.make_dataset(
        seed, length=length, depth=depth, n_pathogenic=n_pathogenic, n_benign=n_benign
    )
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write(out_dir / "corpus.fasta", format_fasta(dataset.corpus))
    _atomic_write(out_dir / "wildtype.fasta", format_fasta([dataset.wildtype]))
    _atomic_write(out_dir / "labeled.tsv", synthetic.labeled_tsv(dataset))
    _atomic_write(
        out_dir / "generator.json",
        json.dumps(
            {
                "seed": seed,
                "length": length,
                "depth": depth,
                "n_pathogenic": n_pathogenic,
                "n_benign": n_benign,
                "expected_auc": dataset.expected_auc,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
    )
    click.echo(f"synthetic dataset (expected AUC {dataset.expected_auc:.4f}) -> {out_dir}")


if __name__ == "__main__":
    main()
