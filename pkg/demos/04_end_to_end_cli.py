"""The full pipeline through the CLI, on a synthetic dataset.

Generates a corpus and labeled variants with a fixed seed, trains a profile
backend, evaluates, and inspects the run artifacts. Everything lands in a
temporary directory; rerunning reproduces the report byte for byte.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path


def run(*args):
    print("+", " ".join(args))
    subprocess.run(args, check=True)


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    run(sys.executable, "-m", "velm.cli", "synth", "--out", str(tmp / "data"),
        "--seed", "11", "--n-pathogenic", "200", "--n-benign", "200")
    run(sys.executable, "-m", "velm.cli", "train-profile",
        str(tmp / "data" / "corpus.fasta"), "--out", str(tmp / "profile.json"))
    run(sys.executable, "-m", "velm.cli", "evaluate",
        str(tmp / "data" / "wildtype.fasta"), str(tmp / "data" / "labeled.tsv"),
        "--backend", f"profile:{tmp / 'profile.json'}",
        "--out", str(tmp / "eval"))

    report = json.loads((tmp / "eval" / "report.json").read_text())
    generator = json.loads((tmp / "data" / "generator.json").read_text())
    print("\naggregate AUC:", round(report["aggregate"]["auc"], 4))
    print("generator's enumerated AUC:", round(generator["expected_auc"], 4))
    print("mAUC rows:", report["mauc"])

    manifest = json.loads((tmp / "eval" / "manifest.json").read_text())
    print("\nmanifest inputs (sha256):")
    for name, digest in manifest["inputs"].items():
        print(f"  {name}: {digest[:16]}...")
    print("backend:", manifest["backend"]["id"])
    print("backend queries issued:", manifest["counts"]["backend_queries"],
          "for", manifest["counts"]["scored"], "variants")

    print("\nrun artifacts:")
    for p in sorted((tmp / "eval").iterdir()):
        print(f"  {p.name} ({p.stat().st_size} bytes)")
