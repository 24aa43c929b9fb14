"""Serverless model artifact: a compact, checksummed, canonical JSON document.

The canonical form is deterministic byte for byte: object keys sorted at
every level, no whitespace, floats rendered with 17 significant digits
(which round-trips any double exactly), and the checksum computed over the
canonical payload bytes. The full document is::

    {"checksum":"<32 hex>","format":"carbontag-model","payload":{...}}

The payload carries the model version, intercept, feature factor lists with
aligned coefficients, and the label bin edges, and must fit in 10240 bytes
so it can ride inside an ad tag.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from ._digest import fnv1a_128
from .errors import ConfigError, IntegrityError, SizeBudgetError, VersionError
from .features import FeatureSpec
from .metrics import LABEL_BIN_EDGES
from .regression import LinearModel

FORMAT_NAME = "carbontag-model"
FORMAT_VERSION = "1"
SUPPORTED_VERSIONS = (FORMAT_VERSION,)
SIZE_BUDGET_BYTES = 10240


def _format_number(value) -> str:
    if isinstance(value, bool):
        raise ConfigError("booleans are not valid artifact numbers")
    if isinstance(value, int):
        return str(value)
    if not math.isfinite(value):
        raise ConfigError(f"non-finite number in artifact: {value!r}")
    return format(value, ".17g")


def canonical_json_bytes(value) -> bytes:
    """Serialize to deterministic JSON bytes (sorted keys, 17-digit floats)."""
    parts: list[str] = []
    _encode(value, parts)
    return "".join(parts).encode("ascii")


def _encode(value, parts: list[str]) -> None:
    if value is None:
        parts.append("null")
    elif isinstance(value, bool):
        parts.append("true" if value else "false")
    elif isinstance(value, (int, float)):
        parts.append(_format_number(value))
    elif isinstance(value, str):
        parts.append(json.dumps(value, ensure_ascii=True))
    elif isinstance(value, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(value):
            if i:
                parts.append(",")
            _encode(item, parts)
        parts.append("]")
    elif isinstance(value, dict):
        parts.append("{")
        for i, key in enumerate(sorted(value)):
            if i:
                parts.append(",")
            if not isinstance(key, str):
                raise ConfigError(f"artifact object keys must be strings: {key!r}")
            parts.append(json.dumps(key, ensure_ascii=True))
            parts.append(":")
            _encode(value[key], parts)
        parts.append("}")
    else:
        raise ConfigError(f"value not serializable into an artifact: {value!r}")


@dataclass(frozen=True)
class ModelArtifact:
    """Structured view of the serialized artifact."""

    version: str
    model_version: str
    feature_specs: tuple[FeatureSpec, ...]
    intercept: float
    coefficients: tuple[float, ...]
    label_bins: tuple[float, ...]
    checksum: str

    @classmethod
    def from_model(
        cls, model: LinearModel, bins: tuple[float, ...] = LABEL_BIN_EDGES
    ) -> "ModelArtifact":
        specs = model.feature_order
        coefficients = tuple(model.coefficients[s] for s in specs)
        payload = _payload_dict(model.version, specs, model.intercept, coefficients, bins)
        return cls(
            version=FORMAT_VERSION,
            model_version=model.version,
            feature_specs=specs,
            intercept=model.intercept,
            coefficients=coefficients,
            label_bins=tuple(float(b) for b in bins),
            checksum=fnv1a_128(canonical_json_bytes(payload)),
        )

    def to_bytes(self) -> bytes:
        payload = _payload_dict(
            self.model_version,
            self.feature_specs,
            self.intercept,
            self.coefficients,
            self.label_bins,
        )
        document = {
            "checksum": self.checksum,
            "format": FORMAT_NAME,
            "payload": payload,
        }
        data = canonical_json_bytes(document)
        if len(data) > SIZE_BUDGET_BYTES:
            raise SizeBudgetError(len(data), SIZE_BUDGET_BYTES)
        return data

    def to_model(self) -> LinearModel:
        return LinearModel(
            intercept=float(self.intercept),
            coefficients={
                spec: float(coef)
                for spec, coef in zip(self.feature_specs, self.coefficients)
            },
            feature_order=self.feature_specs,
            version=self.model_version,
            trained_on=None,
        )


def _payload_dict(model_version, specs, intercept, coefficients, bins) -> dict:
    return {
        "version": FORMAT_VERSION,
        "model_version": model_version,
        "feature_specs": [list(spec.factors) for spec in specs],
        "intercept": intercept,
        "coefficients": list(coefficients),
        "label_bins": list(bins),
    }


def export_artifact(
    model: LinearModel, bins: tuple[float, ...] = LABEL_BIN_EDGES
) -> bytes:
    """Serialize a model to canonical artifact bytes (<= 10240 bytes)."""
    return ModelArtifact.from_model(model, bins).to_bytes()


def parse_artifact(data: bytes) -> ModelArtifact:
    """Parse and verify artifact bytes; checksum first, then version."""
    try:
        document = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IntegrityError(f"artifact is not valid JSON: {exc}") from None
    if not isinstance(document, dict) or document.get("format") != FORMAT_NAME:
        raise IntegrityError("artifact is missing the format marker")
    payload = document.get("payload")
    checksum = document.get("checksum")
    if not isinstance(payload, dict) or not isinstance(checksum, str):
        raise IntegrityError("artifact is missing payload or checksum")
    actual = fnv1a_128(canonical_json_bytes(payload))
    if actual != checksum.lower():
        raise IntegrityError(
            f"checksum mismatch: expected {checksum!r}, computed {actual!r}"
        )
    version = payload.get("version")
    if version not in SUPPORTED_VERSIONS:
        raise VersionError(f"unsupported artifact version: {version!r}")
    try:
        specs = tuple(
            FeatureSpec(tuple(factors)) for factors in payload["feature_specs"]
        )
        coefficients = tuple(float(c) for c in payload["coefficients"])
        intercept = float(payload["intercept"])
        bins = tuple(float(b) for b in payload["label_bins"])
        model_version = str(payload["model_version"])
    except (KeyError, TypeError, ValueError, ConfigError) as exc:
        raise IntegrityError(f"artifact payload is malformed: {exc}") from None
    if len(coefficients) != len(specs):
        raise IntegrityError("coefficients and feature_specs lengths differ")
    return ModelArtifact(
        version=version,
        model_version=model_version,
        feature_specs=specs,
        intercept=intercept,
        coefficients=coefficients,
        label_bins=bins,
        checksum=checksum.lower(),
    )


def import_artifact(data: bytes) -> tuple[LinearModel, tuple[float, ...]]:
    """Verify artifact bytes and rebuild the model plus its label bins."""
    artifact = parse_artifact(data)
    return artifact.to_model(), artifact.label_bins
