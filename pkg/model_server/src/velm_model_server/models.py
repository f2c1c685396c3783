"""Marginal models the server can host.

A model answers one question: given a sequence with ``?`` at masked
positions, return for each requested position the log-probabilities of the
20 canonical residues, renormalized so the canonical entries sum to one
(vocabulary specials and non-canonical codes are dropped; their mass is
redistributed by the renormalization).

``StubModel`` is the CI stand-in: fully deterministic, context-sensitive
(its distributions depend on the whole masked sequence) and dependency-free.
``MaskedLMModel`` wraps a HuggingFace masked-LM checkpoint of the ProtBert
family; it needs the ``lm`` extra (torch + transformers) and real weights,
so it only loads on demand.
"""

from __future__ import annotations

import hashlib
from typing import Protocol, Sequence

import numpy as np

CANONICAL = "ACDEFGHIKLMNPQRSTVWY"
MASK = "?"


class MarginalModel(Protocol):
    id: str
    version: str
    max_length: int

    def marginals(self, sequence: str, positions: Sequence[int]) -> dict[int, dict[str, float]]:
        """Log-probs over the canonical alphabet for each 1-based position."""
        ...


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    return shifted - np.log(np.exp(shifted).sum())


class StubModel:
    """Deterministic pseudo-model for CI and protocol tests.

    Logits are derived from a hash of (masked sequence, position), so the
    answers are context-sensitive like a real LM's yet bit-reproducible
    across runs and platforms.
    """

    def __init__(self, max_length: int = 512, seed: int = 0):
        self.id = f"stub-lm-{seed}"
        self.version = "stub-1"
        self.max_length = max_length
        self.seed = seed

    def marginals(self, sequence: str, positions: Sequence[int]) -> dict[int, dict[str, float]]:
        out: dict[int, dict[str, float]] = {}
        for pos in positions:
            digest = hashlib.sha256(
                f"{self.seed}|{sequence}|{pos}".encode()
            ).digest()
            # 20 logits in [0, 4): two bytes of entropy per residue.
            raw = np.frombuffer(digest[:20], dtype=np.uint8).astype(np.float64)
            logits = raw / 256.0 * 4.0
            log_probs = _log_softmax(logits)
            out[pos] = {aa: float(lp) for aa, lp in zip(CANONICAL, log_probs)}
        return out


class MaskedLMModel:
    """A HuggingFace masked-LM checkpoint serving masked marginals.

    The sequence is tokenized one residue per token (the ProtBert
    convention), ``?`` becomes the model's mask token, and one forward pass
    answers all masked positions of a request. Per position, the canonical
    20 token logits are log-softmaxed against each other, which equals
    softmaxing the full vocabulary and renormalizing over the canonical
    entries.
    """

    def __init__(self, checkpoint: str, device: str = "cpu", max_length: int = 512):
        import torch
        from transformers import AutoModelForMaskedLM, AutoTokenizer

        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(checkpoint)
        self.model = AutoModelForMaskedLM.from_pretrained(checkpoint)
        self.model.eval()
        self.device = device
        self.model.to(device)
        self.id = checkpoint
        self.version = str(getattr(self.model.config, "transformers_version", "unknown"))
        self.max_length = max_length
        self._canonical_ids = [
            self.tokenizer.convert_tokens_to_ids(aa) for aa in CANONICAL
        ]
        unk = self.tokenizer.unk_token_id
        if any(i is None or i == unk for i in self._canonical_ids):
            raise ValueError(
                f"{checkpoint}: vocabulary lacks single-letter residue tokens"
            )

    def marginals(self, sequence: str, positions: Sequence[int]) -> dict[int, dict[str, float]]:
        torch = self._torch
        tokens = [
            self.tokenizer.mask_token if ch == MASK else ch for ch in sequence
        ]
        encoded = self.tokenizer(
            " ".join(tokens), return_tensors="pt", add_special_tokens=True
        ).to(self.device)
        # One leading special token (CLS) shifts residue i to token i+1.
        offset = 1 if self.tokenizer.cls_token_id is not None else 0
        with torch.no_grad():
            logits = self.model(**encoded).logits[0]
        out: dict[int, dict[str, float]] = {}
        for pos in positions:
            row = logits[pos - 1 + offset, self._canonical_ids]
            log_probs = torch.log_softmax(row.double(), dim=-1).cpu().numpy()
            out[pos] = {aa: float(lp) for aa, lp in zip(CANONICAL, log_probs)}
        return out


def load_model(spec: str, device: str = "cpu", max_length: int = 512) -> MarginalModel:
    """``stub`` (or ``stub:<seed>``) for the CI model, anything else is a
    HuggingFace checkpoint name."""
    if spec == "stub" or spec.startswith("stub:"):
        seed = int(spec.split(":", 1)[1]) if ":" in spec else 0
        return StubModel(max_length=max_length, seed=seed)
    return MaskedLMModel(spec, device=device, max_length=max_length)
