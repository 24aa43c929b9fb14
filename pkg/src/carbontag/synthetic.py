"""Seeded synthetic dataset generator with a configurable linear ground truth.

The generator draws every registry parameter from a configurable
distribution (log-normal for sizes and times, Poisson for counts by
default), then sets the target to

    nEad = intercept + sum(coef * feature) + Normal(0, noise_sigma)

clamped below at -1. A ``copy`` distribution duplicates another column,
which is how collinear fixtures are constructed.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import Dataset, LabeledSample, PROVENANCE_SYNTHETIC
from .errors import ConfigError
from .features import FeatureSpec, as_feature_spec
from .registry import KIND_COUNT, PARAMETER_KINDS, PARAMETER_NAMES

_KIND_DEFAULTS = {
    "count": {"kind": "poisson", "lam": 6.0},
    "time_ms": {"kind": "lognormal", "mean": 1.5, "sigma": 0.75},
    "size_bytes": {"kind": "lognormal", "mean": 9.0, "sigma": 1.0},
}
_FIELD_DEFAULTS = {
    "screen_size": {"kind": "poisson", "lam": 2_073_600.0},  # 1920x1080
}
_DISTRIBUTION_KINDS = ("lognormal", "poisson", "uniform", "constant", "copy")


@dataclass(frozen=True)
class DistributionSpec:
    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _DISTRIBUTION_KINDS:
            raise ConfigError(f"unknown distribution kind: {self.kind!r}")
        object.__setattr__(self, "params", dict(self.params))


@dataclass(frozen=True)
class SyntheticConfig:
    """Ground truth and sampling plan for one synthetic dataset."""

    n: int
    intercept: float = 0.0
    coefficients: Mapping[str, float] = field(default_factory=dict)
    noise_sigma: float = 0.0
    distributions: Mapping[str, DistributionSpec] = field(default_factory=dict)
    device_ids: tuple[str, ...] = ("synthetic-0",)

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n!r}")
        if self.noise_sigma < 0:
            raise ConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma!r}")
        if not self.device_ids:
            raise ConfigError("device_ids must not be empty")
        object.__setattr__(self, "coefficients", dict(self.coefficients))
        object.__setattr__(self, "distributions", dict(self.distributions))
        for name in self.coefficients:
            try:
                as_feature_spec(name)
            except ConfigError as exc:
                raise ConfigError(f"bad coefficient key {name!r}: {exc}") from None
        for name, dist in self.distributions.items():
            if name not in PARAMETER_KINDS:
                raise ConfigError(f"distribution for unknown field: {name!r}")
            if dist.kind == "copy":
                source = dist.params.get("source")
                if source not in PARAMETER_KINDS:
                    raise ConfigError(f"copy source for {name!r} is not registered: {source!r}")
                source_dist = self.distributions.get(source)
                if source_dist is not None and source_dist.kind == "copy":
                    raise ConfigError(f"copy source {source!r} may not itself be a copy")

    def ground_truth_specs(self) -> list[tuple[FeatureSpec, float]]:
        return [(as_feature_spec(name), coef) for name, coef in self.coefficients.items()]


def load_synthetic_config(source) -> SyntheticConfig:
    """Parse a SyntheticConfig from a JSON document, path, or mapping."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            document = json.load(fh)
    elif isinstance(source, Mapping):
        document = source
    else:
        document = json.load(source)
    if not isinstance(document, Mapping):
        raise ConfigError("synthetic config must be a JSON object")
    ground_truth = document.get("ground_truth", {})
    distributions = {}
    for name, spec in document.get("distributions", {}).items():
        if not isinstance(spec, Mapping) or "kind" not in spec:
            raise ConfigError(f"distribution for {name!r} must be an object with 'kind'")
        params = {k: v for k, v in spec.items() if k != "kind"}
        distributions[name] = DistributionSpec(kind=spec["kind"], params=params)
    try:
        return SyntheticConfig(
            n=int(document["n"]),
            intercept=float(ground_truth.get("intercept", 0.0)),
            coefficients=ground_truth.get("coefficients", {}),
            noise_sigma=float(document.get("noise_sigma", 0.0)),
            distributions=distributions,
            device_ids=tuple(document.get("device_ids", ("synthetic-0",))),
        )
    except KeyError as exc:
        raise ConfigError(f"synthetic config missing key: {exc.args[0]!r}") from None


def _draw(rng: np.random.Generator, dist: DistributionSpec, n: int) -> np.ndarray:
    params = dist.params
    if dist.kind == "lognormal":
        return rng.lognormal(params.get("mean", 0.0), params.get("sigma", 1.0), n)
    if dist.kind == "poisson":
        return rng.poisson(params.get("lam", 1.0), n).astype(float)
    if dist.kind == "uniform":
        return rng.uniform(params.get("low", 0.0), params.get("high", 1.0), n)
    if dist.kind == "constant":
        return np.full(n, float(params.get("value", 0.0)))
    raise ConfigError(f"unknown distribution kind: {dist.kind!r}")


def _default_distribution(name: str) -> DistributionSpec:
    raw = _FIELD_DEFAULTS.get(name) or _KIND_DEFAULTS[PARAMETER_KINDS[name]]
    params = {k: v for k, v in raw.items() if k != "kind"}
    return DistributionSpec(kind=raw["kind"], params=params)


def generate_synthetic(config: SyntheticConfig, seed: int) -> Dataset:
    """Generate a seeded dataset following the configured ground truth.

    Draw order is fixed (registry order, then copies, then noise) so one
    seed always yields byte-identical output.
    """
    rng = np.random.default_rng(seed)
    n = config.n
    columns: dict[str, np.ndarray] = {}
    copies: list[tuple[str, str]] = []
    for name in PARAMETER_NAMES:
        dist = config.distributions.get(name) or _default_distribution(name)
        if dist.kind == "copy":
            copies.append((name, dist.params["source"]))
            continue
        values = _draw(rng, dist, n)
        if name in PARAMETER_KINDS and PARAMETER_KINDS[name] == KIND_COUNT:
            values = np.rint(values)
        columns[name] = np.abs(values)
    for name, source in copies:
        columns[name] = columns[source].copy()

    nead = np.full(n, config.intercept, dtype=float)
    for spec, coef in config.ground_truth_specs():
        product = np.ones(n)
        for factor in spec.factors:
            product = product * columns[factor]
        nead += coef * product
    if config.noise_sigma > 0:
        nead += config.noise_sigma * rng.standard_normal(n)
    nead = np.maximum(nead, -1.0)

    samples = tuple(
        LabeledSample(
            ad_id=f"syn-{i:06d}",
            device_id=config.device_ids[i % len(config.device_ids)],
            metrics={name: float(columns[name][i]) for name in PARAMETER_NAMES},
            nead=float(nead[i]),
        )
        for i in range(n)
    )
    return Dataset(samples=samples, provenance=PROVENANCE_SYNTHETIC, seed=seed)
