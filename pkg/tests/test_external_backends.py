"""Wire-contract tests for the pluggable HTTP backends.

A throwaway in-process HTTP server stands in for an external encoder / NLI
model; the tests pin the request and response shapes both directions.
"""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from kimatch.embed import ExternalEmbedder, make_provider
from kimatch.labeler import BackendUnavailable, ExternalNLIBackend, Verdict


class _Handler(BaseHTTPRequestHandler):
    requests: list[dict] = []
    responder = staticmethod(lambda payload: {})

    def do_POST(self):
        length = int(self.headers["content-length"])
        payload = json.loads(self.rfile.read(length))
        type(self).requests.append({"path": self.path, "payload": payload})
        body = json.dumps(type(self).responder(payload)).encode()
        self.send_response(200)
        self.send_header("content-type", "application/json")
        self.send_header("content-length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture()
def http_backend():
    class Handler(_Handler):
        requests = []

    server = HTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}", Handler
    server.shutdown()


def test_external_embedder_contract(http_backend):
    url, handler = http_backend
    handler.responder = staticmethod(lambda payload: {"vector": [float(len(payload["text"]))] * 4})
    provider = ExternalEmbedder(endpoint=f"{url}/embed", dimension=4)
    vec = provider.embed("four")
    assert isinstance(vec, np.ndarray) and vec.shape == (4,)
    assert np.allclose(vec, 4.0)
    assert handler.requests[-1]["payload"] == {"text": "four"}


def test_external_embedder_truncates_long_input(http_backend):
    url, handler = http_backend
    handler.responder = staticmethod(lambda payload: {"vector": [1.0, 2.0]})
    provider = ExternalEmbedder(endpoint=f"{url}/embed", dimension=2, max_input_chars=10)
    with pytest.warns(UserWarning):
        provider.embed("x" * 50)
    assert len(handler.requests[-1]["payload"]["text"]) == 10


def test_external_embedder_dimension_check(http_backend):
    url, handler = http_backend
    handler.responder = staticmethod(lambda payload: {"vector": [1.0, 2.0, 3.0]})
    provider = ExternalEmbedder(endpoint=f"{url}/embed", dimension=8)
    with pytest.raises(ValueError):
        provider.embed("hello")


def test_make_provider_external_spec():
    provider = make_provider("external:http://127.0.0.1:9/embed", dimension=16)
    assert provider.dimension == 16


def test_external_nli_contract(http_backend):
    url, handler = http_backend
    handler.responder = staticmethod(lambda payload: {"verdict": "contradiction", "confidence": 0.83})
    backend = ExternalNLIBackend(endpoint=f"{url}/nli")
    verdict = backend.infer("premise text", "hypothesis text")
    assert verdict.verdict is Verdict.CONTRADICTION
    assert verdict.confidence == pytest.approx(0.83)
    assert handler.requests[-1]["payload"] == {"premise": "premise text", "hypothesis": "hypothesis text"}


def test_external_nli_unreachable_raises():
    backend = ExternalNLIBackend(endpoint="http://127.0.0.1:9/nli", timeout=0.2)
    with pytest.raises(BackendUnavailable):
        backend.infer("p", "h")
