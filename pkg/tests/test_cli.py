import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from velm.backend import ProfileBackend, train_profile
from velm.cli import main
from velm.sequence import ProteinSequence

from .conftest import TINY_CORPUS

WILDTYPE_FASTA = ">G1\nMRT\n"
CORPUS_FASTA = "".join(f">C{i}\n{seq}\n" for i, seq in enumerate(TINY_CORPUS))


@pytest.fixture(autouse=True)
def no_backend_env(monkeypatch):
    monkeypatch.delenv("VELM_BACKEND", raising=False)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def workspace(tmp_path, runner):
    (tmp_path / "corpus.fasta").write_text(CORPUS_FASTA)
    (tmp_path / "wildtype.fasta").write_text(WILDTYPE_FASTA)
    result = runner.invoke(
        main,
        ["train-profile", str(tmp_path / "corpus.fasta"), "--out", str(tmp_path / "profile.json")],
    )
    assert result.exit_code == 0, result.output
    return tmp_path


def backend_arg(workspace):
    return f"profile:{workspace / 'profile.json'}"


# -- train-profile -----------------------------------------------------------------

def test_trained_profile_answers_counting_example(workspace):
    reloaded = ProfileBackend.load(workspace / "profile.json")
    in_memory = train_profile(
        [ProteinSequence(f"C{i}", s) for i, s in enumerate(TINY_CORPUS)], 1.0
    )
    assert np.array_equal(reloaded.position_log_probs(2), in_memory.position_log_probs(2))
    assert reloaded.descriptor == in_memory.descriptor


def test_train_profile_rejects_bad_alpha(workspace, runner):
    result = runner.invoke(
        main,
        [
            "train-profile",
            str(workspace / "corpus.fasta"),
            "--alpha",
            "0",
            "--out",
            str(workspace / "p2.json"),
        ],
    )
    assert result.exit_code == 2


def test_train_profile_rejects_ragged(tmp_path, runner):
    (tmp_path / "ragged.fasta").write_text(">A\nMK\n>B\nMKT\n")
    result = runner.invoke(
        main,
        ["train-profile", str(tmp_path / "ragged.fasta"), "--out", str(tmp_path / "p.json")],
    )
    assert result.exit_code == 2


# -- score -------------------------------------------------------------------------

def test_score_three_variants(workspace, runner):
    (workspace / "variants.tsv").write_text(
        "gene_id\tvariant\nG1\tR2K\nG1\tR2A\nG1\tM1W\n"
    )
    out = workspace / "run"
    result = runner.invoke(
        main,
        [
            "score",
            str(workspace / "wildtype.fasta"),
            str(workspace / "variants.tsv"),
            "--backend",
            backend_arg(workspace),
            "--out",
            str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    lines = (out / "scores.tsv").read_text().splitlines()
    assert len(lines) == 4  # header + 3 rows
    r2k = lines[1].split("\t")
    assert float(r2k[2]) == pytest.approx(math.log(2), abs=1e-12)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "score"
    assert manifest["counts"]["scored"] == 3
    assert set(manifest["inputs"]) == {"fasta", "variants"}
    assert all(len(d) == 64 for d in manifest["inputs"].values())
    assert manifest["backend"]["kind"] == "profile"
    assert manifest["config"]["backend"] == backend_arg(workspace)


def test_score_partial_failure(workspace, runner):
    (workspace / "variants.tsv").write_text(
        "gene_id\tvariant\nG1\tR2K\nG1\tbroken\nG1\tM1W\n"
    )
    out = workspace / "run"
    result = runner.invoke(
        main,
        [
            "score",
            str(workspace / "wildtype.fasta"),
            str(workspace / "variants.tsv"),
            "--backend",
            backend_arg(workspace),
            "--out",
            str(out),
        ],
    )
    assert result.exit_code == 0
    assert len((out / "scores.tsv").read_text().splitlines()) == 3
    rejections = (out / "rejections.tsv").read_text().splitlines()
    assert len(rejections) == 2
    assert "UnrecognizedNotation" in rejections[1]


def test_score_unreachable_remote_exits_3_without_partial_output(workspace, runner):
    (workspace / "variants.tsv").write_text("gene_id\tvariant\nG1\tR2K\n")
    out = workspace / "run"
    result = runner.invoke(
        main,
        [
            "score",
            str(workspace / "wildtype.fasta"),
            str(workspace / "variants.tsv"),
            "--backend",
            "remote:http://127.0.0.1:9",
            "--out",
            str(out),
        ],
    )
    assert result.exit_code == 3
    assert not (out / "scores.tsv").exists()


def test_score_missing_backend_exits_2(workspace, runner):
    (workspace / "variants.tsv").write_text("gene_id\tvariant\nG1\tR2K\n")
    result = runner.invoke(
        main,
        ["score", str(workspace / "wildtype.fasta"), str(workspace / "variants.tsv")],
    )
    assert result.exit_code == 2


def test_backend_from_env(workspace, runner, monkeypatch):
    monkeypatch.setenv("VELM_BACKEND", backend_arg(workspace))
    (workspace / "variants.tsv").write_text("gene_id\tvariant\nG1\tR2K\n")
    result = runner.invoke(
        main,
        [
            "score",
            str(workspace / "wildtype.fasta"),
            str(workspace / "variants.tsv"),
            "--out",
            str(workspace / "run"),
        ],
    )
    assert result.exit_code == 0, result.output


def test_flag_overrides_config_file(workspace, runner):
    config = workspace / "config.json"
    config.write_text(json.dumps({"backend": "profile:/nonexistent", "out": "unused"}))
    (workspace / "variants.tsv").write_text("gene_id\tvariant\nG1\tR2K\n")
    result = runner.invoke(
        main,
        [
            "score",
            str(workspace / "wildtype.fasta"),
            str(workspace / "variants.tsv"),
            "--config",
            str(config),
            "--backend",
            backend_arg(workspace),
            "--out",
            str(workspace / "run"),
        ],
    )
    assert result.exit_code == 0, result.output
    manifest = json.loads((workspace / "run" / "manifest.json").read_text())
    assert manifest["config"]["backend"] == backend_arg(workspace)


def test_config_file_used_when_no_flag(workspace, runner):
    config = workspace / "config.json"
    config.write_text(json.dumps({"backend": backend_arg(workspace)}))
    (workspace / "variants.tsv").write_text("gene_id\tvariant\nG1\tR2K\n")
    result = runner.invoke(
        main,
        [
            "score",
            str(workspace / "wildtype.fasta"),
            str(workspace / "variants.tsv"),
            "--config",
            str(config),
            "--out",
            str(workspace / "run"),
        ],
    )
    assert result.exit_code == 0, result.output


def test_bad_config_file_exits_2(workspace, runner):
    config = workspace / "config.json"
    config.write_text("{not json")
    (workspace / "variants.tsv").write_text("gene_id\tvariant\nG1\tR2K\n")
    result = runner.invoke(
        main,
        [
            "score",
            str(workspace / "wildtype.fasta"),
            str(workspace / "variants.tsv"),
            "--config",
            str(config),
        ],
    )
    assert result.exit_code == 2

    config.write_text(json.dumps({"bogus_key": 1}))
    result = runner.invoke(
        main,
        [
            "score",
            str(workspace / "wildtype.fasta"),
            str(workspace / "variants.tsv"),
            "--config",
            str(config),
        ],
    )
    assert result.exit_code == 2


def test_missing_input_file_exits_2(workspace, runner):
    result = runner.invoke(
        main,
        ["score", str(workspace / "nope.fasta"), str(workspace / "nope.tsv")],
    )
    assert result.exit_code == 2


# -- evaluate ----------------------------------------------------------------------

LABELED = (
    "gene_id\tvariant\tlabel\tstars\n"
    "G1\tR2A\tpathogenic\t2\n"
    "G1\tR2W\tpathogenic\t1\n"
    "G1\tR2K\tbenign\t2\n"
    "G1\tM1W\tbenign\t1\n"
)


def run_evaluate(workspace, runner, out_name="eval", labeled=LABELED, extra=()):
    (workspace / "labeled.tsv").write_text(labeled)
    out = workspace / out_name
    result = runner.invoke(
        main,
        [
            "evaluate",
            str(workspace / "wildtype.fasta"),
            str(workspace / "labeled.tsv"),
            "--backend",
            backend_arg(workspace),
            "--out",
            str(out),
            *extra,
        ],
    )
    return result, out


def test_evaluate_produces_report(workspace, runner):
    result, out = run_evaluate(workspace, runner)
    assert result.exit_code == 0, result.output
    report = json.loads((out / "report.json").read_text())
    assert set(report) == {"aggregate", "roc", "histogram", "per_gene", "mauc", "methods"}
    assert report["per_gene"]["G1"]["n_path"] == 2
    assert report["aggregate"]["n_path"] == 2
    assert report["aggregate"]["n_ben"] == 2
    assert 0.0 <= report["aggregate"]["auc"] <= 1.0
    assert report["roc"][0] == [0.0, 0.0]
    assert report["roc"][-1] == [1.0, 1.0]
    for name in ("roc.csv", "histogram.csv", "roc.svg", "histogram.svg", "scores.tsv", "rejections.tsv", "manifest.json"):
        assert (out / name).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["counts"]["rows_in"] == 4
    assert manifest["counts"]["backend_queries"] >= 1


def test_evaluate_rerun_byte_identical(workspace, runner):
    result1, out1 = run_evaluate(workspace, runner, "eval1")
    result2, out2 = run_evaluate(workspace, runner, "eval2")
    assert result1.exit_code == 0 and result2.exit_code == 0
    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
    assert (out1 / "scores.tsv").read_bytes() == (out2 / "scores.tsv").read_bytes()


def test_evaluate_empty_after_filter_exits_4(workspace, runner):
    labeled = "gene_id\tvariant\tlabel\tstars\nG1\tR2K\tpathogenic\t0\n"
    result, _ = run_evaluate(workspace, runner, labeled=labeled)
    assert result.exit_code == 4


def test_evaluate_single_class_exits_4(workspace, runner):
    labeled = (
        "gene_id\tvariant\tlabel\tstars\n"
        "G1\tR2K\tpathogenic\t2\n"
        "G1\tR2A\tpathogenic\t2\n"
    )
    result, _ = run_evaluate(workspace, runner, labeled=labeled)
    assert result.exit_code == 4


def test_evaluate_method_columns(workspace, runner):
    labeled = (
        "gene_id\tvariant\tlabel\tstars\text\n"
        "G1\tR2A\tpathogenic\t2\t0.9\n"
        "G1\tR2W\tpathogenic\t1\t0.8\n"
        "G1\tR2K\tbenign\t2\t0.1\n"
        "G1\tM1W\tbenign\t1\t\n"
    )
    result, out = run_evaluate(workspace, runner, labeled=labeled)
    assert result.exit_code == 0, result.output
    report = json.loads((out / "report.json").read_text())
    assert report["methods"]["ext"]["n_rows"] == 3
    assert report["methods"]["ext"]["auc"] == 1.0


def test_evaluate_focus_filter_flag(workspace, runner):
    (workspace / "focus.tsv").write_text("G1\t2\n")
    result, out = run_evaluate(
        workspace, runner, extra=["--focus", str(workspace / "focus.tsv")]
    )
    assert result.exit_code == 0, result.output
    report = json.loads((out / "report.json").read_text())
    # M1W falls outside the focus set, leaving 2 pathogenic / 1 benign.
    assert report["aggregate"]["n_path"] == 2
    assert report["aggregate"]["n_ben"] == 1


# -- synth --------------------------------------------------------------------------

def test_synth_reproducible(tmp_path, runner):
    for name in ("a", "b"):
        result = runner.invoke(
            main,
            ["synth", "--out", str(tmp_path / name), "--seed", "5",
             "--n-pathogenic", "40", "--n-benign", "40"],
        )
        assert result.exit_code == 0, result.output
    for fname in ("corpus.fasta", "wildtype.fasta", "labeled.tsv", "generator.json"):
        assert (tmp_path / "a" / fname).read_bytes() == (tmp_path / "b" / fname).read_bytes()


def test_synth_pipeline_high_auc(tmp_path, runner):
    result = runner.invoke(
        main,
        ["synth", "--out", str(tmp_path), "--seed", "3",
         "--n-pathogenic", "60", "--n-benign", "60"],
    )
    assert result.exit_code == 0, result.output
    result = runner.invoke(
        main,
        ["train-profile", str(tmp_path / "corpus.fasta"), "--out", str(tmp_path / "p.json")],
    )
    assert result.exit_code == 0, result.output
    result = runner.invoke(
        main,
        [
            "evaluate",
            str(tmp_path / "wildtype.fasta"),
            str(tmp_path / "labeled.tsv"),
            "--backend",
            f"profile:{tmp_path / 'p.json'}",
            "--out",
            str(tmp_path / "eval"),
        ],
    )
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "eval" / "report.json").read_text())
    generator = json.loads((tmp_path / "generator.json").read_text())
    assert report["aggregate"]["auc"] >= 0.9
    assert abs(report["aggregate"]["auc"] - generator["expected_auc"]) < 0.05
