"""Estimation backend: HTTP endpoints, durable record log, and hot model swap.

Endpoints (JSON request/response bodies):

* ``POST /v1/estimate``   evaluate the loaded model on raw parameters
* ``GET  /v1/stats``      label histogram over the persisted record log
* ``GET  /v1/model``      loaded model version and feature names
* ``POST /v1/model``      upload an artifact and hot-swap it atomically

The HTTP layer is a deliberately small asyncio protocol: requests are
parsed and answered synchronously inside the event loop (the model is a
dot-product, persistence is one append), which keeps per-request overhead
in the tens of microseconds and makes pipelined clients cheap to serve.
Every estimate is appended to the log, and flushed to the OS, before its
response bytes are queued.
"""

from __future__ import annotations

import asyncio
import json
import logging
import math
import os
import threading
import time
from bisect import bisect_right
from pathlib import Path

from .artifact import parse_artifact
from .errors import ArtifactError
from .metrics import GRADES
from .registry import PARAMETER_SET

logger = logging.getLogger("carbontag.service")

PROCESSING_BUDGET_SECONDS = 0.100
DEFAULT_SEGMENT_BYTES = 64 * 1024 * 1024

_JSON_HEADERS = b"\r\nContent-Type: application/json\r\nContent-Length: "
_STATUS_LINES = {
    200: b"HTTP/1.1 200 OK",
    400: b"HTTP/1.1 400 Bad Request",
    404: b"HTTP/1.1 404 Not Found",
    413: b"HTTP/1.1 413 Content Too Large",
    503: b"HTTP/1.1 503 Service Unavailable",
}


def _response(status: int, body: dict, keep_alive: bool = True) -> bytes:
    payload = json.dumps(body, separators=(",", ":")).encode("utf-8")
    head = _STATUS_LINES[status] + _JSON_HEADERS + str(len(payload)).encode()
    if not keep_alive:
        head += b"\r\nConnection: close"
    return head + b"\r\n\r\n" + payload


class PreparedModel:
    """A model artifact unpacked into flat evaluation structures."""

    __slots__ = (
        "version",
        "intercept",
        "terms",
        "required",
        "bin_edges",
        "artifact_bytes",
        "feature_names",
    )

    def __init__(self, artifact_bytes: bytes):
        artifact = parse_artifact(artifact_bytes)
        self.artifact_bytes = artifact_bytes
        self.version = artifact.model_version
        self.intercept = artifact.intercept
        self.terms = [
            (coef, spec.factors)
            for coef, spec in zip(artifact.coefficients, artifact.feature_specs)
        ]
        self.required = frozenset(
            factor for spec in artifact.feature_specs for factor in spec.factors
        )
        self.bin_edges = artifact.label_bins
        self.feature_names = [spec.name for spec in artifact.feature_specs]

    def evaluate(self, parameters: dict) -> float:
        # same association order as regression.predict, so the service and
        # the offline path agree bit for bit
        total = self.intercept
        for coef, factors in self.terms:
            value = 1.0
            for factor in factors:
                value *= parameters[factor]
            total += coef * value
        return total

    def label(self, estimate: float) -> str:
        if estimate < 0.0:
            return "A"
        return GRADES[bisect_right(self.bin_edges, estimate) - 1]


class RecordLog:
    """Append-only JSONL store with size-based segment rotation.

    Appends go through a single unbuffered file descriptor, so a record is
    in the kernel before append() returns; a killed process cannot lose an
    acknowledged record.
    """

    def __init__(self, directory, max_segment_bytes: int = DEFAULT_SEGMENT_BYTES):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.max_segment_bytes = max_segment_bytes
        existing = sorted(self.directory.glob("records-*.log"))
        self._segment_index = len(existing)
        if existing:
            last = existing[-1]
            if last.stat().st_size < max_segment_bytes:
                self._segment_index -= 1
        self._fd = None
        self._size = 0
        self._lock = threading.Lock()
        self._open_segment()

    def _segment_path(self) -> Path:
        return self.directory / f"records-{self._segment_index:06d}.log"

    def _open_segment(self):
        if self._fd is not None:
            os.close(self._fd)
        path = self._segment_path()
        self._fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_APPEND, 0o644)
        self._size = path.stat().st_size

    def append(self, line: bytes) -> None:
        with self._lock:
            if self._size >= self.max_segment_bytes:
                self._segment_index += 1
                self._open_segment()
            os.write(self._fd, line)
            self._size += len(line)

    def close(self):
        if self._fd is not None:
            os.close(self._fd)
            self._fd = None


def iter_record_lines(directory):
    """Yield raw JSONL lines from every log segment, oldest first."""
    for path in sorted(Path(directory).glob("records-*.log")):
        with open(path, "rb") as fh:
            yield from fh


def scan_stats(directory) -> dict:
    """Histogram the persisted records by grade and model version.

    Corrupt lines are skipped and counted, never fatal.
    """
    by_grade = {grade: 0 for grade in GRADES}
    by_version: dict[str, int] = {}
    total = 0
    skipped = 0
    for line in iter_record_lines(directory):
        try:
            record = json.loads(line)
            response = record["response"]
            grade = response["label"]
            version = response["model_version"]
            by_grade[grade] += 1
        except (ValueError, KeyError, TypeError):
            skipped += 1
            continue
        by_version[version] = by_version.get(version, 0) + 1
        total += 1
    return {
        "total": total,
        "by_grade": by_grade,
        "by_model_version": by_version,
        "skipped_lines": skipped,
    }


class EstimateService:
    """Request handlers plus the swappable model reference."""

    def __init__(self, log: RecordLog, prepared: PreparedModel | None = None):
        self.log = log
        self.prepared = prepared

    def load_model(self, artifact_bytes: bytes) -> PreparedModel:
        """Validate and atomically publish a new model; raises on bad bytes."""
        prepared = PreparedModel(artifact_bytes)
        self.prepared = prepared
        return prepared

    def handle(self, method: bytes, path: bytes, body: bytes) -> bytes:
        if path == b"/v1/estimate" and method == b"POST":
            return self._estimate(body)
        if path == b"/v1/stats" and method == b"GET":
            return _response(200, scan_stats(self.log.directory))
        if path == b"/v1/model" and method == b"GET":
            return self._model_info()
        if path == b"/v1/model" and method == b"POST":
            return self._swap_model(body)
        return _response(404, {"error": "not_found"})

    def _model_info(self) -> bytes:
        prepared = self.prepared
        if prepared is None:
            return _response(503, {"error": "model_not_loaded"})
        return _response(
            200,
            {"model_version": prepared.version, "features": prepared.feature_names},
        )

    def _swap_model(self, body: bytes) -> bytes:
        try:
            prepared = self.load_model(body)
        except ArtifactError as exc:
            return _response(400, {"error": "invalid_artifact", "detail": str(exc)})
        return _response(200, {"model_version": prepared.version})

    def _estimate(self, body: bytes) -> bytes:
        started = time.perf_counter()
        prepared = self.prepared
        if prepared is None:
            return _response(503, {"error": "model_not_loaded"})
        try:
            request = json.loads(body)
        except ValueError:
            return _response(400, {"error": "malformed_json"})
        if not isinstance(request, dict):
            return _response(400, {"error": "malformed_request"})
        parameters = request.get("parameters")
        if not isinstance(parameters, dict):
            return _response(400, {"error": "missing_parameter", "field": "parameters"})
        for field in ("ad_id", "tag_version"):
            if not isinstance(request.get(field), str):
                return _response(400, {"error": "missing_parameter", "field": field})
        for name, value in parameters.items():
            if name not in PARAMETER_SET:
                return _response(400, {"error": "unknown_parameter", "field": name})
            if (
                isinstance(value, bool)
                or not isinstance(value, (int, float))
                or not math.isfinite(value)
                or value < 0
            ):
                return _response(400, {"error": "invalid_parameter", "field": name})
        missing = prepared.required - parameters.keys()
        if missing:
            return _response(
                400, {"error": "missing_parameter", "field": sorted(missing)[0]}
            )

        estimate = prepared.evaluate(parameters)
        elapsed = time.perf_counter() - started
        response_body = {
            "nEad_estimate": estimate,
            "label": prepared.label(estimate),
            "model_version": prepared.version,
            "processing_time": int(elapsed * 1e6),
        }
        record = {"timestamp": time.time(), "request": request, "response": response_body}
        self.log.append((json.dumps(record, separators=(",", ":")) + "\n").encode("utf-8"))
        if time.perf_counter() - started > PROCESSING_BUDGET_SECONDS:
            return _response(503, {"error": "deadline_exceeded"})
        return _response(200, response_body)


_MAX_HEADER_BYTES = 16 * 1024
_MAX_BODY_BYTES = 8 * 1024 * 1024


class _HttpProtocol(asyncio.Protocol):
    """Minimal HTTP/1.1 with keep-alive; tolerates pipelined requests."""

    __slots__ = ("service", "transport", "buffer")

    def __init__(self, service: EstimateService):
        self.service = service
        self.buffer = b""

    def connection_made(self, transport):
        transport.set_write_buffer_limits(high=4 * 1024 * 1024)
        self.transport = transport

    def data_received(self, data: bytes):
        buffer = self.buffer + data
        out = []
        close = False
        while True:
            head_end = buffer.find(b"\r\n\r\n")
            if head_end < 0:
                if len(buffer) > _MAX_HEADER_BYTES:
                    out.append(_response(400, {"error": "headers_too_large"}, False))
                    close = True
                    buffer = b""
                break
            head = buffer[:head_end]
            request_line, _, header_block = head.partition(b"\r\n")
            parts = request_line.split(b" ")
            if len(parts) != 3:
                out.append(_response(400, {"error": "malformed_request_line"}, False))
                close = True
                buffer = b""
                break
            method, path, _ = parts
            lowered = header_block.lower()
            length = 0
            idx = lowered.find(b"content-length:")
            if idx >= 0:
                line_end = lowered.find(b"\r\n", idx)
                if line_end < 0:
                    line_end = len(lowered)
                try:
                    length = int(lowered[idx + 15 : line_end])
                except ValueError:
                    out.append(_response(400, {"error": "bad_content_length"}, False))
                    close = True
                    buffer = b""
                    break
            if length > _MAX_BODY_BYTES:
                out.append(_response(413, {"error": "body_too_large"}, False))
                close = True
                buffer = b""
                break
            body_start = head_end + 4
            if len(buffer) < body_start + length:
                break
            body = buffer[body_start : body_start + length]
            buffer = buffer[body_start + length :]
            out.append(self.service.handle(method, path, body))
            if b"connection: close" in lowered:
                close = True
                break
        self.buffer = buffer
        if out:
            self.transport.write(b"".join(out))
        if close:
            self.transport.close()

    def connection_lost(self, exc):
        self.buffer = b""


async def create_server(
    service: EstimateService, host: str, port: int
) -> asyncio.AbstractServer:
    loop = asyncio.get_running_loop()
    return await loop.create_server(lambda: _HttpProtocol(service), host, port)


def run_server(
    host: str,
    port: int,
    log_dir,
    artifact_path=None,
    max_segment_bytes: int = DEFAULT_SEGMENT_BYTES,
) -> None:
    """Blocking entry point used by the CLI serve command."""
    service = EstimateService(RecordLog(log_dir, max_segment_bytes))
    if artifact_path is not None:
        service.load_model(Path(artifact_path).read_bytes())
        logger.info("model loaded: %s", service.prepared.version)

    async def main():
        server = await create_server(service, host, port)
        bound = server.sockets[0].getsockname()
        print(f"carbontag service listening on {bound[0]}:{bound[1]}", flush=True)
        async with server:
            await server.serve_forever()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
    finally:
        service.log.close()


class ServerHandle:
    """Run the service on a background thread; used by tests and tools."""

    def __init__(self, log_dir, artifact_bytes: bytes | None = None, host="127.0.0.1"):
        self.host = host
        self.port = None
        self.service = EstimateService(RecordLog(log_dir))
        if artifact_bytes is not None:
            self.service.load_model(artifact_bytes)
        self._loop = None
        self._server = None
        self._thread = None

    def __enter__(self):
        ready = threading.Event()

        def run():
            self._loop = asyncio.new_event_loop()
            asyncio.set_event_loop(self._loop)
            self._server = self._loop.run_until_complete(
                create_server(self.service, self.host, 0)
            )
            self.port = self._server.sockets[0].getsockname()[1]
            ready.set()
            self._loop.run_forever()
            self._server.close()
            self._loop.run_until_complete(self._server.wait_closed())
            self._loop.close()

        self._thread = threading.Thread(target=run, daemon=True)
        self._thread.start()
        ready.wait()
        return self

    def __exit__(self, *exc_info):
        self._loop.call_soon_threadsafe(self._loop.stop)
        self._thread.join(timeout=10)
        self.service.log.close()
        return False
