import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from syllattack.oracle import (
    OracleProtocolError,
    OracleSession,
    OracleTransportError,
    ProbabilityDistribution,
    RemoteVictim,
    predict_label,
)


class FakeOracle:
    labels = ("a", "b", "c")
    max_batch = 4

    def __init__(self):
        self.calls = []

    def classify_batch(self, texts):
        self.calls.append(list(texts))
        return [ProbabilityDistribution((0.2, 0.3, 0.5), self.labels) for _ in texts]


def test_distribution_validation():
    with pytest.raises(ValueError):
        ProbabilityDistribution((1.0,), ("only",))
    with pytest.raises(ValueError):
        ProbabilityDistribution((0.7, 0.7), ("a", "b"))
    with pytest.raises(ValueError):
        ProbabilityDistribution((1.2, -0.2), ("a", "b"))
    with pytest.raises(ValueError):
        ProbabilityDistribution((0.5, 0.5), ("a", "b", "c"))


def test_predict_label_examples():
    d = ProbabilityDistribution((0.1, 0.7, 0.2), ("x", "y", "z"))
    assert predict_label(d) == (1, 0.7)
    tie = ProbabilityDistribution((0.5, 0.5), ("x", "y"))
    assert predict_label(tie) == (0, 0.5)
    k = 12
    uniform = ProbabilityDistribution(tuple([1 / k] * k), tuple(str(i) for i in range(k)))
    assert predict_label(uniform) == (0, 1 / k)


def test_session_batches_and_counts():
    oracle = FakeOracle()
    session = OracleSession(oracle)
    out = session.classify([f"t{i}" for i in range(10)])
    assert len(out) == 10
    assert session.query_count == 10
    assert [len(c) for c in oracle.calls] == [4, 4, 2]
    session.classify(["one more"])
    assert session.query_count == 11


def test_session_respects_tighter_override():
    oracle = FakeOracle()
    session = OracleSession(oracle, batch_limit=2)
    session.classify(["a", "b", "c"])
    assert [len(c) for c in oracle.calls] == [2, 1]


def test_session_empty_input():
    session = OracleSession(FakeOracle())
    assert session.classify([]) == []
    assert session.query_count == 0


class _Handler(BaseHTTPRequestHandler):
    behavior = "ok"

    def log_message(self, *args):
        pass

    def _send(self, code, payload):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/info":
            self._send(200, {"num_classes": 2, "labels": ["neg", "pos"], "max_batch": 8})
        else:
            self._send(404, {})

    def do_POST(self):
        if self.path != "/classify":
            self._send(404, {})
            return
        n = int(self.headers.get("Content-Length", 0))
        texts = json.loads(self.rfile.read(n))["texts"]
        mode = type(self).behavior
        if mode == "ok":
            self._send(200, {"probabilities": [[0.25, 0.75] for _ in texts]})
        elif mode == "short":
            self._send(200, {"probabilities": [[0.25, 0.75]]})
        elif mode == "bad-row":
            self._send(200, {"probabilities": [[2.0, -1.0] for _ in texts]})
        elif mode == "not-ready":
            self._send(503, {"error": "loading"})


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _Handler.behavior = "ok"
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def test_remote_victim_happy_path(stub_server):
    victim = RemoteVictim(stub_server)
    assert victim.labels == ("neg", "pos")
    assert victim.max_batch == 8
    rows = victim.classify_batch(["x", "y"])
    assert [r.probs for r in rows] == [(0.25, 0.75), (0.25, 0.75)]


def test_remote_victim_row_count_mismatch(stub_server):
    victim = RemoteVictim(stub_server)
    _Handler.behavior = "short"
    with pytest.raises(OracleProtocolError):
        victim.classify_batch(["x", "y"])


def test_remote_victim_invalid_probabilities(stub_server):
    victim = RemoteVictim(stub_server)
    _Handler.behavior = "bad-row"
    with pytest.raises(OracleProtocolError):
        victim.classify_batch(["x"])


def test_remote_victim_not_ready_is_retriable(stub_server):
    victim = RemoteVictim(stub_server)
    _Handler.behavior = "not-ready"
    with pytest.raises(OracleTransportError):
        victim.classify_batch(["x"])


def test_remote_victim_unreachable():
    with pytest.raises(OracleTransportError):
        RemoteVictim("http://127.0.0.1:1", timeout=0.5)
