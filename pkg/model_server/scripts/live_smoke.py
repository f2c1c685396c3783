"""Manual smoke test against a real pretrained masked LM (not CI).

Loads a HuggingFace checkpoint (default Rostlab/prot_bert), scores a small
set of clinically labeled variants of one gene by querying marginals through
the same handler the server uses, and checks that the pathogenic mean score
exceeds the benign mean. Scores are the summed log-odds
log P(wildtype) - log P(mutant) at the masked positions.

Usage:
    python scripts/live_smoke.py --fasta example_hbb/hbb.fasta \
        --variants example_hbb/variants.tsv [--model Rostlab/prot_bert]

The variants TSV needs columns gene_id, variant (short notation, 1-based
positions counting the initiator Met), label (pathogenic|benign). Needs the
``lm`` extra installed and ~2 GB of weights downloaded on first use.
"""

from __future__ import annotations

import argparse
import re
import statistics
import sys
import threading
import uuid
from pathlib import Path

from velm_model_server.models import load_model
from velm_model_server.server import handle_request

VARIANT_RE = re.compile(r"^([A-Z])(\d+)([A-Z])$")


def read_fasta_one(path: str) -> tuple[str, str]:
    gene, chunks = None, []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line.startswith(">"):
            if gene is not None:
                break
            gene = line[1:].split()[0]
        elif line:
            chunks.append(line.upper())
    if gene is None or not chunks:
        sys.exit(f"{path}: no FASTA record found")
    return gene, "".join(chunks)


def read_variants(path: str):
    rows = []
    lines = [
        line
        for line in Path(path).read_text().splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    header = lines[0].split("\t")
    for line in lines[1:]:
        record = dict(zip(header, line.split("\t")))
        rows.append((record["gene_id"], record["variant"], record["label"].lower()))
    return rows


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model", default="Rostlab/prot_bert")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--fasta", required=True)
    parser.add_argument("--variants", required=True)
    args = parser.parse_args()

    gene, sequence = read_fasta_one(args.fasta)
    rows = read_variants(args.variants)
    print(f"gene {gene}: {len(sequence)} residues; {len(rows)} labeled variants")
    print(f"loading {args.model} on {args.device} (this downloads weights on first use)")
    model = load_model(args.model, device=args.device, max_length=512)
    lock = threading.Lock()

    scores: dict[str, list[float]] = {"pathogenic": [], "benign": []}
    for row_gene, notation, label in rows:
        if row_gene != gene:
            sys.exit(f"variant {notation} is for {row_gene}, FASTA holds {gene}")
        match = VARIANT_RE.match(notation)
        if match is None:
            sys.exit(f"cannot parse variant {notation!r} (expected e.g. E7V)")
        wt, pos, mt = match.group(1), int(match.group(2)), match.group(3)
        if sequence[pos - 1] != wt:
            sys.exit(
                f"{notation}: FASTA has {sequence[pos - 1]} at position {pos}, "
                "check sequence and numbering"
            )
        masked = sequence[: pos - 1] + "?" + sequence[pos:]
        reply = handle_request(
            {
                "id": str(uuid.uuid4()),
                "protocol": 1,
                "sequence": masked,
                "positions": [pos],
            },
            model,
            lock,
        )
        if "error" in reply:
            sys.exit(f"{notation}: server error {reply['error']}")
        log_probs = reply["marginals"][0]["log_probs"]
        score = log_probs[wt] - log_probs[mt]
        scores.setdefault(label, []).append(score)
        print(f"  {notation:>8} {label:>10}  score {score:+.4f}")

    if not scores["pathogenic"] or not scores["benign"]:
        sys.exit("need at least one variant of each class; fill in the TSV")
    path_mean = statistics.mean(scores["pathogenic"])
    ben_mean = statistics.mean(scores["benign"])
    print(f"\npathogenic mean {path_mean:+.4f} vs benign mean {ben_mean:+.4f}")
    if path_mean > ben_mean:
        print("OK: pathogenic variants score higher on average")
        return 0
    print("FAIL: expected pathogenic mean > benign mean")
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
