"""Likelihood backends: anything that answers masked-marginal queries.

A backend returns, for each queried masked position, a normalized
distribution over the 20 canonical residues conditioned on the unmasked
context. Two implementations ship here: a deterministic position-profile
backend (trainable from a corpus, context-free by design) and a client for
the remote wire protocol. Natural log throughout.

Wire protocol (version 1), same JSON body over HTTP POST ``/marginals`` or
line-delimited over a stream socket:

    request:  {"id": str, "protocol": 1, "sequence": "...?..", "positions": [int]}
    response: {"id": str, "marginals": [{"position": int,
                                         "log_probs": {"A": float, ..., "Y": float}}]}
    error:    {"id": str, "error": str}

``log_probs`` maps carry exactly 20 keys. Replies whose probabilities sum to
within 1e-3 of one are renormalized (softmax outputs pick up float noise
across a language boundary); anything further off is rejected.
"""

from __future__ import annotations

import hashlib
import json
import socket
import threading
import uuid
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence
from urllib.parse import urlparse

import numpy as np
import requests

from .alphabet import AA_INDEX, CANONICAL
from .errors import (
    BackendTimeout,
    BackendUnavailable,
    EmptyCorpus,
    InvalidResidue,
    NonNormalizedReply,
    NonPositivePseudocount,
    ProtocolError,
    RaggedCorpus,
    SequenceTooLong,
)
from .sequence import MaskedSequence, ProteinSequence

PROTOCOL_VERSION = 1

# Query-boundary normalization invariant; every backend's output must satisfy it.
NORMALIZATION_TOL = 1e-6
# Looser gate for raw remote replies, which are renormalized when inside it.
REMOTE_NORMALIZATION_TOL = 1e-3

PROFILE_FORMAT = "velm-profile"


@dataclass(frozen=True)
class BackendDescriptor:
    """Identity and limits of a backend."""

    id: str
    kind: str  # "profile" | "remote"
    max_length: int | None
    version: str

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "max_length": self.max_length,
            "version": self.version,
        }


@dataclass(frozen=True)
class MaskedQuery:
    """A masked sequence plus the masked positions whose marginals are wanted."""

    masked: MaskedSequence
    query_positions: tuple[int, ...]

    def __post_init__(self):
        ordered = tuple(sorted(set(self.query_positions)))
        if not ordered:
            raise ValueError("query_positions must be non-empty")
        if not set(ordered) <= set(self.masked.masked_positions):
            raise ValueError(
                f"query positions {ordered} are not all masked "
                f"(masked: {self.masked.masked_positions})"
            )
        object.__setattr__(self, "query_positions", ordered)


class MarginalDistribution:
    """Log-probabilities over the 20 canonical residues at one position.

    The vector follows the canonical alphabet order. Construction enforces
    the boundary invariant: exp of the entries sums to one within
    ``tolerance``, every entry finite and <= 0. With ``renormalize=True`` an
    off-by-float-noise vector inside the tolerance is shifted back onto the
    simplex first.
    """

    __slots__ = ("position", "_log_probs")

    def __init__(
        self,
        position: int,
        log_probs: np.ndarray | Sequence[float],
        *,
        tolerance: float = NORMALIZATION_TOL,
        renormalize: bool = False,
        validate: bool = True,
    ):
        # validate=False exists for deliberately de-normalized test doubles;
        # real backends always construct through the checked path.
        vec = np.array(log_probs, dtype=np.float64)
        if vec.shape != (len(CANONICAL),):
            raise ValueError(f"expected {len(CANONICAL)} log-probs, got shape {vec.shape}")
        if validate:
            with np.errstate(over="ignore"):
                total = float(np.sum(np.exp(vec)))
            if not np.isfinite(total) or abs(total - 1.0) > tolerance:
                raise NonNormalizedReply(
                    f"position {position}: probabilities sum to {total!r}, "
                    f"outside 1 +/- {tolerance}"
                )
            if renormalize:
                vec = vec - np.log(total)
            if not np.all(np.isfinite(vec)):
                raise NonNormalizedReply(f"position {position}: non-finite log-probability")
            vec = np.minimum(vec, 0.0)
        vec.flags.writeable = False
        self.position = position
        self._log_probs = vec

    def log_prob(self, residue: str) -> float:
        return float(self._log_probs[AA_INDEX[residue]])

    def as_array(self) -> np.ndarray:
        """Read-only view in canonical alphabet order."""
        return self._log_probs

    def as_dict(self) -> dict[str, float]:
        return {aa: float(self._log_probs[i]) for i, aa in enumerate(CANONICAL)}

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MarginalDistribution)
            and self.position == other.position
            and np.array_equal(self._log_probs, other._log_probs)
        )

    def __repr__(self) -> str:
        return f"MarginalDistribution(position={self.position})"


class Backend:
    """Interface all likelihood backends implement.

    ``single_flight`` declares that the backend must not see concurrent
    queries; the scoring engine then serializes access. Implementations left
    at the default must be safe for concurrent use.
    """

    single_flight: bool = False

    @property
    def descriptor(self) -> BackendDescriptor:
        raise NotImplementedError

    def query_marginals(self, query: MaskedQuery) -> list[MarginalDistribution]:
        """One normalized distribution per query position, in position order."""
        raise NotImplementedError

    def _check_length(self, query: MaskedQuery) -> None:
        bound = self.descriptor.max_length
        if bound is not None and len(query.masked) > bound:
            raise SequenceTooLong(
                f"sequence of length {len(query.masked)} exceeds backend bound {bound}"
            )


class ProfileBackend(Backend):
    """Per-position categorical profile with Laplace-style smoothing.

    Trained by counting residues column-wise over an equal-length corpus:
    P(a at i) = (count + alpha) / (N + 20*alpha). Context-free by design, so
    it ignores everything about a query except the positions; that makes it a
    deterministic reference backend (real sequence models are context
    sensitive, which is their whole appeal). Immutable after training and
    safe for concurrent queries.
    """

    kind = "profile"

    def __init__(self, counts: np.ndarray, pseudocount: float, corpus_size: int):
        if pseudocount <= 0:
            raise NonPositivePseudocount(f"pseudocount must be > 0, got {pseudocount}")
        counts = np.asarray(counts, dtype=np.float64)
        if counts.ndim != 2 or counts.shape[1] != len(CANONICAL):
            raise ValueError(f"counts must be (length, 20), got {counts.shape}")
        self._counts = counts
        self.pseudocount = float(pseudocount)
        self.corpus_size = int(corpus_size)
        denom = self.corpus_size + len(CANONICAL) * self.pseudocount
        self._log_matrix = np.log((counts + self.pseudocount) / denom)
        self._log_matrix.flags.writeable = False
        digest = hashlib.sha256(
            json.dumps(
                {"counts": counts.astype(int).tolist(), "alpha": self.pseudocount},
                sort_keys=True,
            ).encode()
        ).hexdigest()[:12]
        self._descriptor = BackendDescriptor(
            id=f"profile-{digest}",
            kind=self.kind,
            max_length=counts.shape[0],
            version="1",
        )

    @property
    def descriptor(self) -> BackendDescriptor:
        return self._descriptor

    @property
    def length(self) -> int:
        return self._counts.shape[0]

    def query_marginals(self, query: MaskedQuery) -> list[MarginalDistribution]:
        self._check_length(query)
        return [
            MarginalDistribution(pos, self._log_matrix[pos - 1])
            for pos in query.query_positions
        ]

    def position_log_probs(self, position: int) -> np.ndarray:
        """Read-only log-prob row for a 1-based position."""
        return self._log_matrix[position - 1]

    def save(self, path) -> None:
        """Write a versioned JSON profile; counts are stored exactly."""
        payload = {
            "format": PROFILE_FORMAT,
            "format_version": 1,
            "pseudocount": self.pseudocount,
            "corpus_size": self.corpus_size,
            "alphabet": CANONICAL,
            "counts": self._counts.astype(int).tolist(),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ProfileBackend":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != PROFILE_FORMAT:
            raise ValueError(f"{path}: not a {PROFILE_FORMAT} file")
        if payload.get("alphabet") != CANONICAL:
            raise ValueError(f"{path}: unexpected alphabet {payload.get('alphabet')!r}")
        return cls(
            np.array(payload["counts"], dtype=np.float64),
            payload["pseudocount"],
            payload["corpus_size"],
        )


def train_profile(
    corpus: Iterable[ProteinSequence], pseudocount: float = 1.0
) -> ProfileBackend:
    """Count residues column-wise over an equal-length, fully canonical corpus."""
    sequences = list(corpus)
    if not sequences:
        raise EmptyCorpus("profile training needs at least one sequence")
    if pseudocount <= 0:
        raise NonPositivePseudocount(f"pseudocount must be > 0, got {pseudocount}")
    length = len(sequences[0])
    counts = np.zeros((length, len(CANONICAL)), dtype=np.float64)
    for seq in sequences:
        if len(seq) != length:
            raise RaggedCorpus(
                f"{seq.gene_id}: length {len(seq)} differs from first sequence ({length})"
            )
        for i, ch in enumerate(seq.residues):
            idx = AA_INDEX.get(ch)
            if idx is None:
                raise InvalidResidue(ch, line=None, column=i + 1)
            counts[i, idx] += 1.0
    return ProfileBackend(counts, pseudocount, len(sequences))


class RemoteBackend(Backend):
    """Client for the wire protocol over HTTP (``http(s)://``) or a stream
    socket (``tcp://host:port``).

    Each request carries a fresh id the server must echo; replies are checked
    for shape (one marginal per requested position, exactly 20 residue keys)
    and normalization before anything reaches the scorer. Stateless between
    requests, so concurrent queries are fine.
    """

    kind = "remote"

    def __init__(self, url: str, timeout: float = 60.0):
        self.url = url.rstrip("/")
        self.timeout = timeout
        self._parsed = urlparse(self.url)
        if self._parsed.scheme not in ("http", "https", "tcp"):
            raise ValueError(f"unsupported backend url scheme {self._parsed.scheme!r}")
        self._descriptor: BackendDescriptor | None = None
        self._lock = threading.Lock()

    # -- transport ----------------------------------------------------------

    def _roundtrip_http(self, body: dict) -> dict:
        try:
            resp = requests.post(
                f"{self.url}/marginals", json=body, timeout=self.timeout
            )
        except requests.exceptions.Timeout as exc:
            raise BackendTimeout(f"{self.url}: no reply within {self.timeout}s") from exc
        except requests.exceptions.ConnectionError as exc:
            raise BackendUnavailable(f"{self.url}: {exc}") from exc
        try:
            return resp.json()
        except ValueError as exc:
            raise ProtocolError(f"{self.url}: reply is not JSON") from exc

    def _roundtrip_socket(self, body: dict) -> dict:
        host, port = self._parsed.hostname, self._parsed.port
        if host is None or port is None:
            raise ValueError(f"tcp backend url needs host:port, got {self.url!r}")
        try:
            with socket.create_connection((host, port), timeout=self.timeout) as conn:
                conn.settimeout(self.timeout)
                conn.sendall(json.dumps(body).encode() + b"\n")
                chunks = []
                while True:
                    data = conn.recv(65536)
                    if not data:
                        break
                    chunks.append(data)
                    if data.endswith(b"\n"):
                        break
        except socket.timeout as exc:
            raise BackendTimeout(f"{self.url}: no reply within {self.timeout}s") from exc
        except OSError as exc:
            raise BackendUnavailable(f"{self.url}: {exc}") from exc
        raw = b"".join(chunks)
        if not raw:
            raise ProtocolError(f"{self.url}: connection closed without a reply")
        try:
            return json.loads(raw.decode())
        except ValueError as exc:
            raise ProtocolError(f"{self.url}: reply is not JSON") from exc

    def _roundtrip(self, body: dict) -> dict:
        if self._parsed.scheme == "tcp":
            return self._roundtrip_socket(body)
        return self._roundtrip_http(body)

    # -- protocol -----------------------------------------------------------

    def healthcheck(self) -> BackendDescriptor:
        """Fetch the server's descriptor (HTTP ``GET /health`` or a
        ``{"health": true}`` request line on sockets)."""
        if self._parsed.scheme == "tcp":
            request_id = str(uuid.uuid4())
            reply = self._roundtrip_socket(
                {"id": request_id, "protocol": PROTOCOL_VERSION, "health": True}
            )
            if reply.get("id") != request_id or "descriptor" not in reply:
                raise ProtocolError(f"{self.url}: malformed health reply")
            payload = reply["descriptor"]
        else:
            try:
                resp = requests.get(f"{self.url}/health", timeout=self.timeout)
            except requests.exceptions.Timeout as exc:
                raise BackendTimeout(f"{self.url}: no reply within {self.timeout}s") from exc
            except requests.exceptions.ConnectionError as exc:
                raise BackendUnavailable(f"{self.url}: {exc}") from exc
            try:
                payload = resp.json()
            except ValueError as exc:
                raise ProtocolError(f"{self.url}: health reply is not JSON") from exc
        try:
            descriptor = BackendDescriptor(
                id=str(payload["id"]),
                kind="remote",
                max_length=payload.get("max_length"),
                version=str(payload.get("version", "")),
            )
        except (KeyError, TypeError) as exc:
            raise ProtocolError(f"{self.url}: malformed descriptor {payload!r}") from exc
        with self._lock:
            self._descriptor = descriptor
        return descriptor

    @property
    def descriptor(self) -> BackendDescriptor:
        with self._lock:
            cached = self._descriptor
        return cached if cached is not None else self.healthcheck()

    def query_marginals(self, query: MaskedQuery) -> list[MarginalDistribution]:
        self._check_length(query)
        request_id = str(uuid.uuid4())
        body = {
            "id": request_id,
            "protocol": PROTOCOL_VERSION,
            "sequence": query.masked.rendered,
            "positions": list(query.query_positions),
        }
        reply = self._roundtrip(body)
        return parse_marginals_reply(reply, request_id, query.query_positions)


def parse_marginals_reply(
    reply: Mapping, request_id: str, positions: Sequence[int]
) -> list[MarginalDistribution]:
    """Validate a wire reply against the protocol and the requested positions."""
    if not isinstance(reply, Mapping):
        raise ProtocolError(f"reply is not an object: {reply!r}")
    if reply.get("id") != request_id:
        raise ProtocolError(
            f"reply id {reply.get('id')!r} does not match request id {request_id!r}"
        )
    if "error" in reply:
        message = str(reply["error"])
        if "too long" in message.lower() or "sequence_too_long" in message.lower():
            raise SequenceTooLong(message)
        raise ProtocolError(f"server error: {message}")
    marginals = reply.get("marginals")
    if not isinstance(marginals, list):
        raise ProtocolError("reply carries no marginals list")
    by_position: dict[int, MarginalDistribution] = {}
    for entry in marginals:
        if not isinstance(entry, Mapping) or "position" not in entry:
            raise ProtocolError(f"malformed marginal entry: {entry!r}")
        pos = entry["position"]
        log_probs = entry.get("log_probs")
        if not isinstance(log_probs, Mapping):
            raise ProtocolError(f"position {pos}: missing log_probs map")
        if set(log_probs) != set(CANONICAL):
            raise ProtocolError(
                f"position {pos}: log_probs must carry exactly the 20 canonical "
                f"residues, got {sorted(log_probs)}"
            )
        try:
            vec = np.array([float(log_probs[aa]) for aa in CANONICAL], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"position {pos}: non-numeric log-prob") from exc
        by_position[pos] = MarginalDistribution(
            pos, vec, tolerance=REMOTE_NORMALIZATION_TOL, renormalize=True
        )
    missing = [pos for pos in positions if pos not in by_position]
    if missing:
        raise ProtocolError(f"reply lacks marginals for positions {missing}")
    extra = sorted(set(by_position) - set(positions))
    if extra:
        raise ProtocolError(f"reply carries marginals for unrequested positions {extra}")
    return [by_position[pos] for pos in positions]
