"""Black-box classifier oracles: the query contract, accounting, and the HTTP client.

An oracle maps texts to class probability distributions and nothing else; the
attack never sees gradients or parameters. ``OracleSession`` wraps any oracle
with batch splitting and cumulative query accounting.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Protocol, Sequence

import requests

PROB_SUM_TOL = 1e-6
_PROB_EPS = 1e-9


class OracleError(Exception):
    """Base class for oracle failures; aborts the attack on the affected sample."""


class OracleTransportError(OracleError):
    """Oracle unreachable, timed out, or temporarily unavailable (retriable)."""


class OracleProtocolError(OracleError):
    """Oracle reachable but its response violates the wire contract."""


@dataclass(frozen=True)
class ProbabilityDistribution:
    """Class probabilities for one text, validated at construction."""

    probs: tuple[float, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        k = len(self.probs)
        if k < 2:
            raise ValueError(f"need at least 2 classes, got {k}")
        if len(self.labels) != k:
            raise ValueError(f"{k} probs but {len(self.labels)} labels")
        for p in self.probs:
            if not (-_PROB_EPS <= p <= 1.0 + _PROB_EPS):
                raise ValueError(f"probability {p} outside [0, 1]")
        total = sum(self.probs)
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @property
    def num_classes(self) -> int:
        return len(self.probs)


def predict_label(dist: ProbabilityDistribution) -> tuple[int, float]:
    """Index and probability of the argmax class; ties go to the lowest index."""
    best = 0
    for i in range(1, len(dist.probs)):
        if dist.probs[i] > dist.probs[best]:
            best = i
    return best, dist.probs[best]


class Oracle(Protocol):
    """Anything classify-able: a trained local model or a remote service."""

    labels: tuple[str, ...]
    max_batch: int

    def classify_batch(self, texts: Sequence[str]) -> list[ProbabilityDistribution]:
        ...


class OracleSession:
    """Batch-splitting front end with cumulative query accounting.

    ``query_count`` counts every text ever sent through this session and is
    safe to update from concurrent per-sample attack workers.
    """

    def __init__(self, oracle: Oracle, batch_limit: int | None = None):
        self.oracle = oracle
        limit = getattr(oracle, "max_batch", None)
        if batch_limit is not None:
            limit = batch_limit if limit is None else min(batch_limit, limit)
        if limit is None or limit < 1:
            raise ValueError(f"invalid batch limit {limit}")
        self.batch_limit = int(limit)
        self.query_count = 0
        self._lock = threading.Lock()

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.oracle.labels)

    def classify(self, texts: Sequence[str]) -> list[ProbabilityDistribution]:
        if not texts:
            return []
        results: list[ProbabilityDistribution] = []
        for start in range(0, len(texts), self.batch_limit):
            chunk = list(texts[start : start + self.batch_limit])
            results.extend(self.oracle.classify_batch(chunk))
        with self._lock:
            self.query_count += len(texts)
        if len(results) != len(texts):
            raise OracleProtocolError(f"oracle returned {len(results)} rows for {len(texts)} texts")
        return results


class RemoteVictim:
    """Client for the classification wire protocol.

    GET /info advertises classes, labels, and the server batch limit;
    POST /classify with {"texts": [...]} returns {"probabilities": [[...]]}
    in input row order. Responses are validated here so a misbehaving server
    surfaces as a protocol error, not silent garbage.
    """

    def __init__(self, base_url: str, *, timeout: float = 30.0, session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._http = session or requests.Session()
        info = self._get_info()
        try:
            self.labels = tuple(str(x) for x in info["labels"])
            self.max_batch = int(info["max_batch"])
            num_classes = int(info["num_classes"])
        except (KeyError, TypeError, ValueError) as exc:
            raise OracleProtocolError(f"malformed /info response: {info!r}") from exc
        if num_classes != len(self.labels) or num_classes < 2 or self.max_batch < 1:
            raise OracleProtocolError(f"inconsistent /info response: {info!r}")

    def _get_info(self) -> dict:
        try:
            resp = self._http.get(self.base_url + "/info", timeout=self.timeout)
        except requests.RequestException as exc:
            raise OracleTransportError(f"GET /info failed: {exc}") from exc
        if resp.status_code == 503:
            raise OracleTransportError("victim reports model not ready (503)")
        if resp.status_code != 200:
            raise OracleProtocolError(f"GET /info returned HTTP {resp.status_code}")
        try:
            return resp.json()
        except ValueError as exc:
            raise OracleProtocolError("GET /info returned non-JSON body") from exc

    def classify_batch(self, texts: Sequence[str]) -> list[ProbabilityDistribution]:
        if len(texts) > self.max_batch:
            raise ValueError(f"batch of {len(texts)} exceeds server limit {self.max_batch}")
        try:
            resp = self._http.post(
                self.base_url + "/classify",
                json={"texts": list(texts)},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise OracleTransportError(f"POST /classify failed: {exc}") from exc
        if resp.status_code == 503:
            raise OracleTransportError("victim reports model not ready (503)")
        if resp.status_code != 200:
            raise OracleProtocolError(f"POST /classify returned HTTP {resp.status_code}")
        try:
            rows = resp.json()["probabilities"]
        except (ValueError, KeyError) as exc:
            raise OracleProtocolError("malformed /classify response body") from exc
        if not isinstance(rows, list) or len(rows) != len(texts):
            raise OracleProtocolError(f"expected {len(texts)} probability rows, got {len(rows) if isinstance(rows, list) else type(rows)}")
        out = []
        for row in rows:
            try:
                out.append(ProbabilityDistribution(tuple(float(p) for p in row), self.labels))
            except (TypeError, ValueError) as exc:
                raise OracleProtocolError(f"invalid probability row {row!r}: {exc}") from exc
        return out
