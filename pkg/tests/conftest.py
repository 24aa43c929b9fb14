"""Shared builders for the test suite.

The eleven-feature configuration below mirrors the production estimator
shape (seven base parameters plus four interaction products) and is reused
by the regression, artifact, service, and acceptance tests.
"""

from __future__ import annotations

from pathlib import Path

import pytest

import carbontag as ct
from carbontag.features import FeatureSpec
from carbontag.registry import PARAMETER_NAMES
from carbontag.synthetic import DistributionSpec, SyntheticConfig

FIXTURE_DIR = Path(__file__).parent / "fixtures"

ELEVEN_FEATURES = [
    FeatureSpec.of("ad_navigation_duration", "screen_size", "request_mean").name,
    FeatureSpec.of("ad_navigation_duration", "ad_navigation_onLoad").name,
    FeatureSpec.of("response_mean", "screen_size").name,
    FeatureSpec.of("ad_navigation_duration", "redirectTime_mean").name,
    "ad_navigation_duration",
    "screen_size",
    "tcp_mean",
    "request_mean",
    "response_mean",
    "it_xmlhttprequest",
    "redirectTime_mean",
]

# all positive, so the generator's clamp at -1 can never bite; sized so a
# sigma=0.5 noise level leaves the signal clearly dominant (R2 ~ 0.93)
ELEVEN_COEFFICIENTS = {
    ELEVEN_FEATURES[0]: 0.012,
    ELEVEN_FEATURES[1]: 0.09,
    ELEVEN_FEATURES[2]: 0.06,
    ELEVEN_FEATURES[3]: 0.048,
    "ad_navigation_duration": 0.72,
    "screen_size": 0.3,
    "tcp_mean": 0.54,
    "request_mean": 0.24,
    "response_mean": 0.18,
    "it_xmlhttprequest": 0.36,
    "redirectTime_mean": 0.42,
}

ELEVEN_INTERCEPT = 0.7

# Moderate scales keep the design matrix well conditioned even for the
# three-way products.
MODERATE_DISTRIBUTIONS = {
    "ad_navigation_duration": DistributionSpec("lognormal", {"mean": 0.8, "sigma": 0.4}),
    "ad_navigation_onLoad": DistributionSpec("lognormal", {"mean": 0.5, "sigma": 0.4}),
    "screen_size": DistributionSpec("lognormal", {"mean": 1.5, "sigma": 0.4}),
    "request_mean": DistributionSpec("lognormal", {"mean": 0.6, "sigma": 0.4}),
    "response_mean": DistributionSpec("lognormal", {"mean": 0.7, "sigma": 0.4}),
    "redirectTime_mean": DistributionSpec("lognormal", {"mean": 0.4, "sigma": 0.4}),
    "tcp_mean": DistributionSpec("lognormal", {"mean": 0.5, "sigma": 0.4}),
    "it_xmlhttprequest": DistributionSpec("poisson", {"lam": 5.0}),
}


def eleven_feature_config(n: int, noise_sigma: float = 0.0) -> SyntheticConfig:
    return SyntheticConfig(
        n=n,
        intercept=ELEVEN_INTERCEPT,
        coefficients=ELEVEN_COEFFICIENTS,
        noise_sigma=noise_sigma,
        distributions=MODERATE_DISTRIBUTIONS,
    )


def make_metrics(**overrides) -> dict[str, float]:
    """A full parameter mapping, zero everywhere except the overrides."""
    metrics = {name: 0.0 for name in PARAMETER_NAMES}
    metrics.update(overrides)
    return metrics


PLANTED_CANDIDATES = (
    "duration_mean",
    "response_mean",
    "tcp_mean",
    "dns_mean",
    "request_mean",
)


def planted_dataset(seed: int, n: int = 500) -> ct.Dataset:
    """One predictive feature (duration_mean), a duplicate of it under
    response_mean, and three independent noise fields."""
    config = SyntheticConfig(
        n=n,
        intercept=0.5,
        coefficients={"duration_mean": 2.0},
        noise_sigma=0.05,
        distributions={
            "duration_mean": DistributionSpec("lognormal", {"mean": 1.0, "sigma": 0.6}),
            "response_mean": DistributionSpec("copy", {"source": "duration_mean"}),
            "tcp_mean": DistributionSpec("lognormal", {"mean": 1.0, "sigma": 0.6}),
            "dns_mean": DistributionSpec("lognormal", {"mean": 1.0, "sigma": 0.6}),
            "request_mean": DistributionSpec("lognormal", {"mean": 1.0, "sigma": 0.6}),
        },
    )
    return ct.generate_synthetic(config, seed=seed)


def make_row(ad_id: str, device_id: str, sample_index: int, baseline: float,
             rendering: float, **metric_overrides) -> ct.MeasurementRow:
    return ct.MeasurementRow(
        ad_id=ad_id,
        device_id=device_id,
        sample_index=sample_index,
        baseline_energy=baseline,
        ad_rendering_energy=rendering,
        metrics=make_metrics(**metric_overrides),
    )


@pytest.fixture(scope="session")
def eleven_feature_model() -> ct.LinearModel:
    dataset = ct.generate_synthetic(eleven_feature_config(n=400), seed=11)
    return ct.fit_ols(dataset, ELEVEN_FEATURES)


@pytest.fixture(scope="session")
def eleven_feature_artifact(eleven_feature_model) -> bytes:
    return ct.export_artifact(eleven_feature_model)
