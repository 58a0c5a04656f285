"""Syllable embedding table and cosine-distance candidate queries.

Vectors are unit-normalized at load time and queries are exact: candidate
retrieval is a full scan over the table via one matrix-vector product, which
is the brute-force definition computed in bulk. At the ~10^4 vocabulary sizes
these tables have, exactness costs nothing, and downstream thresholding
depends on it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .segmentation import DEFAULT_POLICY, DelimiterPolicy

log = logging.getLogger(__name__)

TIBETAN_BLOCK = (0x0F00, 0x0FFF)


class EmbeddingError(Exception):
    """Raised for malformed embedding files or invalid table entries."""


@dataclass(frozen=True)
class EmbeddingTable:
    """Immutable token -> unit vector map."""

    tokens: tuple[str, ...]
    matrix: np.ndarray  # (size, dim) float64, rows unit-normalized
    _index: dict[str, int] = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.tokens):
            raise EmbeddingError("matrix shape does not match token count")
        if not self._index:
            object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})
        self.matrix.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.tokens)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def vector(self, token: str) -> np.ndarray:
        return self.matrix[self._index[token]]

    @classmethod
    def from_entries(
        cls,
        entries: list[tuple[str, np.ndarray]],
        policy: DelimiterPolicy = DEFAULT_POLICY,
    ) -> "EmbeddingTable":
        """Build a table from raw (token, vector) pairs, normalizing each vector."""
        if not entries:
            return cls((), np.zeros((0, 0), dtype=np.float64))
        dim = len(entries[0][1])
        tokens: list[str] = []
        rows = np.zeros((len(entries), dim), dtype=np.float64)
        seen: set[str] = set()
        for i, (token, vec) in enumerate(entries):
            _validate_token(token, policy)
            if token in seen:
                raise EmbeddingError(f"duplicate token {token!r}")
            seen.add(token)
            v = np.asarray(vec, dtype=np.float64)
            if v.shape != (dim,):
                raise EmbeddingError(f"vector for {token!r} has dim {v.shape}, expected ({dim},)")
            norm = float(np.linalg.norm(v))
            if norm == 0.0:
                raise EmbeddingError(f"zero-norm vector for {token!r}")
            tokens.append(token)
            rows[i] = v / norm
        return cls(tuple(tokens), rows)


def _validate_token(token: str, policy: DelimiterPolicy) -> None:
    if not token:
        raise EmbeddingError("empty token")
    if policy.contains_delimiter(token):
        raise EmbeddingError(f"token {token!r} contains a delimiter codepoint")


def load_vec(
    path: str,
    *,
    on_error: str = "raise",
    policy: DelimiterPolicy = DEFAULT_POLICY,
) -> EmbeddingTable:
    """Load a .vec text file: a "count dim" header, then one token per line.

    ``on_error="raise"`` fails fast naming the offending line; ``"skip"``
    drops bad lines with a warning. Vectors are unit-normalized.
    """
    if on_error not in ("raise", "skip"):
        raise ValueError(f"on_error must be 'raise' or 'skip', got {on_error!r}")

    def fail(lineno: int, message: str) -> bool:
        if on_error == "raise":
            raise EmbeddingError(f"{path}:{lineno}: {message}")
        log.warning("%s:%d: %s (skipped)", path, lineno, message)
        return False

    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise EmbeddingError(f"{path}:1: malformed header {header!r}, expected 'count dim'")
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise EmbeddingError(f"{path}:1: non-integer header fields {header!r}") from None
        if dim <= 0:
            raise EmbeddingError(f"{path}:1: non-positive dimension {dim}")

        tokens: list[str] = []
        rows: list[np.ndarray] = []
        index: dict[str, int] = {}
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            fields = line.split()
            token, comps = fields[0], fields[1:]
            if len(comps) != dim:
                fail(lineno, f"expected {dim} components, found {len(comps)}")
                continue
            try:
                vec = np.array(comps, dtype=np.float64)
            except ValueError:
                fail(lineno, "non-numeric component")
                continue
            try:
                _validate_token(token, policy)
            except EmbeddingError as exc:
                fail(lineno, str(exc))
                continue
            if token in index:
                fail(lineno, f"duplicate token {token!r}")
                continue
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                fail(lineno, f"zero-norm vector for {token!r}")
                continue
            index[token] = len(tokens)
            tokens.append(token)
            rows.append(vec / norm)

    if count != len(tokens):
        log.warning("%s: header count %d, loaded %d entries", path, count, len(tokens))
    matrix = np.vstack(rows) if rows else np.zeros((0, dim), dtype=np.float64)
    return EmbeddingTable(tuple(tokens), matrix, index)


def save_vec(table: EmbeddingTable, path: str) -> None:
    """Write the table in .vec text format, full float64 precision."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{table.size} {table.dim}\n")
        for token, row in zip(table.tokens, table.matrix):
            fh.write(token + " " + " ".join(repr(float(c)) for c in row) + "\n")


def clean(
    table: EmbeddingTable,
    allowed_ranges: tuple[tuple[int, int], ...] = (TIBETAN_BLOCK,),
) -> EmbeddingTable:
    """Keep only tokens whose every codepoint falls inside ``allowed_ranges``."""
    if not allowed_ranges:
        raise ValueError("allowed_ranges must be non-empty")

    def allowed(token: str) -> bool:
        return all(any(lo <= ord(c) <= hi for lo, hi in allowed_ranges) for c in token)

    keep = [i for i, t in enumerate(table.tokens) if allowed(t)]
    tokens = tuple(table.tokens[i] for i in keep)
    matrix = table.matrix[keep].copy() if keep else np.zeros((0, table.dim), dtype=np.float64)
    return EmbeddingTable(tokens, matrix)


def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """1 - a.b over unit vectors, clamped into [0, 2] against rounding."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = 1.0 - float(np.dot(a, b))
    return min(max(d, 0.0), 2.0)


@dataclass(frozen=True)
class CandidateSet:
    """Substitution candidates for one source token.

    ``pairs`` holds (token, distance) with 0 < distance <= d_max, ascending
    by distance, ties broken lexicographically. ``source_in_vocab`` is False
    when the source token has no embedding (the set is then empty).
    """

    source: str
    pairs: tuple[tuple[str, float], ...]
    d_max: float
    source_in_vocab: bool = True

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(t for t, _ in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)


def candidates(table: EmbeddingTable, token: str, d_max: float) -> CandidateSet:
    """All tokens within cosine distance (0, d_max] of ``token``.

    Tokens whose stored vector is bitwise equal to the source vector are
    excluded along with the source itself: the distance range is open at 0.
    Unknown source tokens yield an empty, flagged set.
    """
    if d_max <= 0:
        raise ValueError(f"d_max must be positive, got {d_max}")
    if token not in table:
        return CandidateSet(token, (), d_max, source_in_vocab=False)
    v = table.vector(token)
    dists = 1.0 - table.matrix @ v
    np.clip(dists, 0.0, 2.0, out=dists)
    found: list[tuple[float, str]] = []
    for i in np.nonzero((dists > 0.0) & (dists <= d_max))[0]:
        cand = table.tokens[i]
        if cand == token or np.array_equal(table.matrix[i], v):
            continue
        found.append((float(dists[i]), cand))
    found.sort()
    return CandidateSet(token, tuple((t, d) for d, t in found), d_max)
