"""Ordinary least squares fitting, prediction, and validation scoring."""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from ._digest import fnv1a_128
from ._linalg import design_with_intercept, solve_least_squares
from .dataset import Dataset, dataset_csv_bytes
from .errors import ConfigError, DataError, DomainError, InsufficientDataError
from .features import FeatureSpec, as_feature_spec, evaluate_feature


@dataclass(frozen=True)
class TrainingProvenance:
    dataset_id: str
    n_samples: int
    timestamp: str


@dataclass(frozen=True)
class LinearModel:
    """An immutable fitted linear estimator of normalized ad energy."""

    intercept: float
    coefficients: Mapping[FeatureSpec, float]
    feature_order: tuple[FeatureSpec, ...]
    version: str
    trained_on: TrainingProvenance | None = None

    def __post_init__(self):
        object.__setattr__(self, "coefficients", dict(self.coefficients))
        if set(self.coefficients) != set(self.feature_order):
            raise ConfigError("coefficient keys must match feature_order")
        if len(set(self.feature_order)) != len(self.feature_order):
            raise ConfigError("feature_order contains duplicates")
        if not math.isfinite(self.intercept):
            raise ConfigError("intercept must be finite")
        for spec, value in self.coefficients.items():
            if not math.isfinite(value):
                raise ConfigError(f"coefficient for {spec.name!r} is not finite")

    def base_parameters(self) -> frozenset[str]:
        return frozenset(f for spec in self.feature_order for f in spec.factors)


@dataclass(frozen=True)
class ValidationReport:
    r2: float
    rmse: float
    n: int
    device_id: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "device_id": self.device_id,
            "r2": None if math.isinf(self.r2) else self.r2,
            "rmse": self.rmse,
            "n": self.n,
        }


def _canonical_features(features: Sequence[FeatureSpec | str]) -> tuple[FeatureSpec, ...]:
    specs = [as_feature_spec(f) for f in features]
    if not specs:
        raise ConfigError("at least one feature is required")
    if len(set(specs)) != len(specs):
        raise ConfigError("duplicate features requested")
    return tuple(sorted(specs, key=lambda s: s.name))


def _model_version(intercept: float, order: tuple[FeatureSpec, ...], coefs: Mapping) -> str:
    payload = repr((intercept, tuple((s.name, coefs[s]) for s in order)))
    return "lm-" + fnv1a_128(payload.encode("utf-8"))[:12]


def fit_ols(dataset: Dataset, features: Sequence[FeatureSpec | str]) -> LinearModel:
    """Fit intercept + coefficients minimizing the squared nEad residuals.

    Features are evaluated on the raw parameter scale (no standardization),
    so coefficients apply directly to evaluated feature products.
    """
    dataset.require_non_empty()
    order = _canonical_features(features)
    n, p = len(dataset), len(order)
    if n <= p:
        raise InsufficientDataError(
            f"need more samples than features: {n} samples, {p} features"
        )
    design = design_with_intercept(dataset.feature_matrix(order))
    names = ["intercept"] + [spec.name for spec in order]
    beta = solve_least_squares(design, dataset.targets(), names)
    intercept = float(beta[0])
    coefficients = {spec: float(beta[j + 1]) for j, spec in enumerate(order)}
    return LinearModel(
        intercept=intercept,
        coefficients=coefficients,
        feature_order=order,
        version=_model_version(intercept, order, coefficients),
        trained_on=TrainingProvenance(
            dataset_id=fnv1a_128(dataset_csv_bytes(dataset))[:16],
            n_samples=n,
            timestamp=datetime.now(timezone.utc).isoformat(),
        ),
    )


def predict(model: LinearModel, metrics: Mapping[str, float]) -> float:
    """Evaluate the model on one parameter mapping."""
    value = model.intercept
    for spec in model.feature_order:
        value += model.coefficients[spec] * evaluate_feature(spec, metrics)
    return value


def predict_dataset(model: LinearModel, dataset: Dataset) -> np.ndarray:
    return np.array([predict(model, s.metrics) for s in dataset.samples])


def _check_lengths(predicted, actual, minimum: int):
    p = np.asarray(predicted, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.ndim != 1:
        raise DomainError(f"length mismatch: {p.shape} vs {a.shape}")
    if p.size < minimum:
        raise DomainError(f"need at least {minimum} values, got {p.size}")
    return p, a


def r2(predicted: Sequence[float], actual: Sequence[float]) -> float:
    """Coefficient of determination, 1 - SS_res / SS_tot.

    A constant target yields 1 for a perfect fit and -inf otherwise.
    """
    p, a = _check_lengths(predicted, actual, 2)
    residual = a - p
    ss_res = float(residual @ residual)
    centered = a - a.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else -math.inf
    return 1.0 - ss_res / ss_tot


def rmse(predicted: Sequence[float], actual: Sequence[float]) -> float:
    p, a = _check_lengths(predicted, actual, 1)
    residual = a - p
    return math.sqrt(float(residual @ residual) / p.size)


def validate(model: LinearModel, dataset: Dataset) -> ValidationReport:
    """Score the model on a dataset (overall figures)."""
    dataset.require_non_empty()
    if len(dataset) < 2:
        raise DataError("validation needs at least 2 samples")
    predicted = predict_dataset(model, dataset)
    actual = dataset.targets()
    return ValidationReport(
        r2=r2(predicted, actual), rmse=rmse(predicted, actual), n=len(dataset)
    )


def validate_by_device(model: LinearModel, dataset: Dataset) -> list[ValidationReport]:
    """Overall report first, then one report per device in first-seen order."""
    reports = [validate(model, dataset)]
    for device_id in dataset.device_ids():
        subset = tuple(s for s in dataset.samples if s.device_id == device_id)
        device_ds = Dataset(samples=subset, provenance=dataset.provenance, seed=dataset.seed)
        per_device = validate(model, device_ds)
        reports.append(
            ValidationReport(
                r2=per_device.r2, rmse=per_device.rmse, n=per_device.n, device_id=device_id
            )
        )
    return reports


class AdEnergyRegressor(BaseEstimator, RegressorMixin):
    """Estimator-style wrapper around fit_ols / predict.

    features: the FeatureSpecs (or names) to regress on; None means every
    base parameter present in the registry candidate defaults is unsuitable
    here, so it must be provided explicitly or via a fitted FeatureSelector.
    """

    def __init__(self, features=None):
        self.features = features

    def fit(self, dataset: Dataset, y=None):
        if self.features is None:
            raise ConfigError("AdEnergyRegressor requires an explicit feature list")
        self.model_ = fit_ols(dataset, list(self.features))
        self.intercept_ = self.model_.intercept
        self.coef_ = np.array(
            [self.model_.coefficients[s] for s in self.model_.feature_order]
        )
        self.feature_names_ = [s.name for s in self.model_.feature_order]
        return self

    def predict(self, data):
        if not hasattr(self, "model_"):
            raise NotFittedError("AdEnergyRegressor is not fitted yet")
        if isinstance(data, Dataset):
            return predict_dataset(self.model_, data)
        if isinstance(data, Mapping):
            return predict(self.model_, data)
        return np.array([predict(self.model_, row) for row in data])

    def score(self, dataset: Dataset, y=None) -> float:
        return validate(self.model_, dataset).r2
