"""Feature specifications and the per-feature statistics they are screened with.

A feature is either a single registered parameter or the product of two or
three distinct parameters. Product features canonicalize their factor order
so that equivalent products compare and hash equal.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._linalg import projection_r_squared
from .errors import (
    ConfigError,
    DomainError,
    FeatureResolutionError,
    UndefinedCorrelationError,
)
from .registry import is_registered

INTERACTION_JOINER = "×"  # multiplication sign
MAX_FACTORS = 3


@dataclass(frozen=True, order=True)
class FeatureSpec:
    """One model input: a base parameter or a product of 2-3 of them."""

    factors: tuple[str, ...]

    def __post_init__(self):
        if not self.factors or len(self.factors) > MAX_FACTORS:
            raise ConfigError(
                f"a feature needs 1 to {MAX_FACTORS} factors, got {self.factors!r}"
            )
        if len(set(self.factors)) != len(self.factors):
            raise ConfigError(f"duplicate factors in feature: {self.factors!r}")
        for factor in self.factors:
            if not is_registered(factor):
                raise ConfigError(f"unknown parameter in feature: {factor!r}")
        object.__setattr__(self, "factors", tuple(sorted(self.factors)))

    @property
    def name(self) -> str:
        return INTERACTION_JOINER.join(self.factors)

    @classmethod
    def of(cls, *factors: str) -> "FeatureSpec":
        return cls(tuple(factors))

    @classmethod
    def parse(cls, name: str) -> "FeatureSpec":
        return cls(tuple(name.split(INTERACTION_JOINER)))

    def __str__(self) -> str:
        return self.name


def as_feature_spec(feature: "FeatureSpec | str") -> FeatureSpec:
    if isinstance(feature, FeatureSpec):
        return feature
    return FeatureSpec.parse(feature)


def evaluate_feature(spec: FeatureSpec, metrics: Mapping[str, float]) -> float:
    """Evaluate a feature on a parameter mapping: the product of its factors."""
    value = 1.0
    for factor in spec.factors:
        try:
            value *= metrics[factor]
        except KeyError:
            raise FeatureResolutionError(factor) from None
    return float(value)


def feature_matrix(
    specs: Sequence[FeatureSpec], rows: Sequence[Mapping[str, float]]
) -> np.ndarray:
    """Evaluate each spec on each row, producing an (n_rows, n_specs) matrix."""
    out = np.empty((len(rows), len(specs)))
    for j, spec in enumerate(specs):
        for i, row in enumerate(rows):
            out[i, j] = evaluate_feature(spec, row)
    return out


def generate_interactions(
    fields: Sequence[str], max_order: int
) -> list[FeatureSpec]:
    """All single features plus every distinct 2..max_order-way product."""
    if max_order not in (1, 2, 3):
        raise ConfigError(f"max_order must be 1, 2, or 3, got {max_order!r}")
    if len(set(fields)) != len(fields):
        raise ConfigError("duplicate base names in interaction generation")
    specs = [FeatureSpec.of(f) for f in fields]
    for order in range(2, max_order + 1):
        specs.extend(FeatureSpec(combo) for combo in combinations(fields, order))
    return specs


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient, clamped into [-1, 1]."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.ndim != 1 or ya.ndim != 1:
        raise DomainError("pearson expects 1-d vectors")
    if xa.shape != ya.shape:
        raise DomainError(f"length mismatch: {xa.shape[0]} vs {ya.shape[0]}")
    if xa.shape[0] < 2:
        raise DomainError("pearson needs at least 2 observations")
    xc = xa - xa.mean()
    yc = ya - ya.mean()
    ssx = float(xc @ xc)
    ssy = float(yc @ yc)
    if ssx == 0.0 or ssy == 0.0:
        raise UndefinedCorrelationError("correlation undefined for a constant vector")
    r = float(xc @ yc) / math.sqrt(ssx * ssy)
    return min(max(r, -1.0), 1.0)


def variance(x: Sequence[float]) -> float:
    """Population variance (divide by n)."""
    xa = np.asarray(x, dtype=float)
    if xa.ndim != 1 or xa.size == 0:
        raise DomainError("variance needs a non-empty 1-d vector")
    if np.all(xa == xa[0]):
        return 0.0
    centered = xa - xa.mean()
    return float(centered @ centered) / xa.size


def vif(design: np.ndarray, j: int) -> float:
    """Variance inflation factor of column j within a design matrix.

    Defined as 1 / (1 - R2_j) where R2_j comes from regressing column j,
    with intercept, on every other column. Perfect collinearity returns
    +inf; a constant column j is a domain error.
    """
    a = np.asarray(design, dtype=float)
    if a.ndim != 2 or a.shape[1] < 2:
        raise DomainError("vif needs a 2-d design with at least 2 columns")
    n, p = a.shape
    if n <= p:
        raise DomainError(f"vif needs more rows than columns, got {n}x{p}")
    if not 0 <= j < p:
        raise DomainError(f"column index {j} out of range for {p} columns")
    target = a[:, j]
    if np.all(target == target[0]):
        raise DomainError(f"column {j} is constant; vif is undefined")
    others = np.delete(a, j, axis=1)
    r2 = projection_r_squared(target, others)
    if r2 >= 1.0 - 1e-12:
        return math.inf
    return 1.0 / (1.0 - r2)
