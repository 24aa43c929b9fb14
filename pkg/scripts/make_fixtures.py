#!/usr/bin/env python3
"""Regenerate the checked-in test fixtures deterministically.

Outputs:
  tests/fixtures/model_eleven.json          eleven-feature model artifact
  tests/fixtures/model_eleven_alt.json      alternate model for hot-swap tests
  tests/fixtures/estimate_requests_10k.jsonl.gz   10,000 request payloads
  frontend/test/fixtures/parity_vectors.json     cross-component parity cases
"""

import gzip
import io
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

import carbontag as ct  # noqa: E402
from carbontag.service import PreparedModel  # noqa: E402

from conftest import ELEVEN_FEATURES, eleven_feature_config  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"
FRONTEND_FIXTURES = ROOT / "frontend" / "test" / "fixtures"


def build_models() -> tuple[bytes, bytes]:
    primary = ct.fit_ols(
        ct.generate_synthetic(eleven_feature_config(n=400), seed=11), ELEVEN_FEATURES
    )
    alternate = ct.fit_ols(
        ct.generate_synthetic(eleven_feature_config(n=300, noise_sigma=0.2), seed=99),
        ELEVEN_FEATURES,
    )
    return ct.export_artifact(primary), ct.export_artifact(alternate)


def build_requests(n: int = 10_000) -> list[dict]:
    dataset = ct.generate_synthetic(eleven_feature_config(n=n, noise_sigma=0.3), seed=1001)
    payloads = []
    for i, sample in enumerate(dataset):
        parameters = {name: round(value, 4) for name, value in sample.metrics.items()}
        payloads.append(
            {"ad_id": f"fx-{i:06d}", "parameters": parameters, "tag_version": "fixture-1"}
        )
    return payloads


def build_parity_vectors(artifact_bytes: bytes, n: int = 120) -> dict:
    prepared = PreparedModel(artifact_bytes)
    dataset = ct.generate_synthetic(eleven_feature_config(n=n, noise_sigma=0.3), seed=2002)
    cases = []
    for sample in dataset:
        parameters = {name: round(value, 4) for name, value in sample.metrics.items()}
        estimate = prepared.evaluate(parameters)
        cases.append(
            {
                "parameters": parameters,
                "expected": {"nEad_estimate": estimate, "label": prepared.label(estimate)},
            }
        )
    # deterministic edge cases: all-zero parameters, a bin boundary, a huge value
    zero = {name: 0.0 for name in ct.registry.PARAMETER_NAMES}
    for params in (zero,):
        estimate = prepared.evaluate(params)
        cases.append(
            {
                "parameters": params,
                "expected": {"nEad_estimate": estimate, "label": prepared.label(estimate)},
            }
        )
    # the artifact travels as its exact canonical text: verifiers digest the
    # payload byte range, so a re-serialized object would not round-trip
    return {"artifact_text": artifact_bytes.decode("ascii"), "cases": cases}


def deterministic_gzip(data: bytes) -> bytes:
    buffer = io.BytesIO()
    with gzip.GzipFile(fileobj=buffer, mode="wb", filename="", mtime=0) as fh:
        fh.write(data)
    return buffer.getvalue()


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    FRONTEND_FIXTURES.mkdir(parents=True, exist_ok=True)

    primary, alternate = build_models()
    (FIXTURES / "model_eleven.json").write_bytes(primary)
    (FIXTURES / "model_eleven_alt.json").write_bytes(alternate)
    print(f"model_eleven.json: {len(primary)} bytes")
    print(f"model_eleven_alt.json: {len(alternate)} bytes")

    payloads = build_requests()
    raw = "\n".join(json.dumps(p, separators=(",", ":")) for p in payloads) + "\n"
    packed = deterministic_gzip(raw.encode("utf-8"))
    (FIXTURES / "estimate_requests_10k.jsonl.gz").write_bytes(packed)
    print(f"estimate_requests_10k.jsonl.gz: {len(packed)} bytes ({len(payloads)} payloads)")

    vectors = build_parity_vectors(primary)
    text = json.dumps(vectors, indent=1, sort_keys=True) + "\n"
    (FRONTEND_FIXTURES / "parity_vectors.json").write_text(text)
    print(f"parity_vectors.json: {len(text)} bytes ({len(vectors['cases'])} cases)")


if __name__ == "__main__":
    main()
