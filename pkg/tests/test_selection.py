"""Feature-selection pipeline tests against planted ground truths."""

import math

import pytest
from sklearn.exceptions import NotFittedError

import carbontag as ct
from carbontag.errors import ConfigError, EmptySelectionError
from carbontag.selection import (
    REASON_HIGH_VIF,
    REASON_LOW_CORRELATION,
    REASON_LOW_VARIANCE,
    SelectionConfig,
)
from carbontag.synthetic import DistributionSpec, SyntheticConfig


from conftest import PLANTED_CANDIDATES, planted_dataset


class TestPlantedGroundTruth:
    def test_only_planted_feature_selected(self):
        dataset = planted_dataset(seed=0)
        report = ct.select_features(
            dataset, SelectionConfig(candidate_fields=PLANTED_CANDIDATES)
        )
        assert [s.name for s in report.selected] == ["duration_mean"]
        reasons = {r.spec.name: r.reason for r in report.rejected}
        assert reasons["response_mean"] == REASON_HIGH_VIF
        for noise in ("tcp_mean", "dns_mean", "request_mean"):
            assert reasons[noise] == REASON_LOW_CORRELATION

    def test_duplicate_loses_vif_tie_by_name(self):
        # duration_mean < response_mean in canonical order, so the copy is
        # the one dropped when both have infinite VIF.
        dataset = planted_dataset(seed=1)
        report = ct.select_features(
            dataset,
            SelectionConfig(candidate_fields=("duration_mean", "response_mean")),
        )
        assert [s.name for s in report.selected] == ["duration_mean"]
        assert report.rejected[0].spec.name == "response_mean"
        assert report.rejected[0].reason == REASON_HIGH_VIF

    def test_report_covers_every_candidate_once(self):
        dataset = planted_dataset(seed=2)
        report = ct.select_features(
            dataset, SelectionConfig(candidate_fields=PLANTED_CANDIDATES)
        )
        accounted = [s.name for s in report.selected] + [
            r.spec.name for r in report.rejected
        ]
        assert sorted(accounted) == sorted(PLANTED_CANDIDATES)
        assert len(accounted) == len(set(accounted))

    def test_deterministic(self):
        dataset = planted_dataset(seed=3)
        config = SelectionConfig(candidate_fields=PLANTED_CANDIDATES)
        assert ct.select_features(dataset, config) == ct.select_features(dataset, config)


class TestFiltersDisabled:
    def test_everything_kept(self):
        config = SyntheticConfig(
            n=300,
            coefficients={"tcp_mean": 1.0},
            noise_sigma=0.3,
            distributions={
                name: DistributionSpec("lognormal", {"mean": 0.5, "sigma": 0.5})
                for name in ("tcp_mean", "dns_mean", "request_mean", "response_mean")
            },
        )
        dataset = ct.generate_synthetic(config, seed=4)
        report = ct.select_features(
            dataset,
            SelectionConfig(
                candidate_fields=("tcp_mean", "dns_mean", "request_mean", "response_mean"),
                corr_threshold=0.0,
                vif_threshold=math.inf,
                max_interaction_order=1,
            ),
        )
        assert len(report.selected) == 4
        assert report.rejected == ()


class TestInteractionStage:
    def test_interactions_generated_and_filtered(self):
        # nEad is driven by the product tcp*dns; with enough spread the
        # product is not collinear with its factors and must survive.
        config = SyntheticConfig(
            n=800,
            coefficients={"tcp_mean×dns_mean": 1.0},
            noise_sigma=0.05,
            distributions={
                "tcp_mean": DistributionSpec("lognormal", {"mean": 1.2, "sigma": 0.8}),
                "dns_mean": DistributionSpec("lognormal", {"mean": 1.2, "sigma": 0.8}),
            },
        )
        dataset = ct.generate_synthetic(config, seed=5)
        report = ct.select_features(
            dataset,
            SelectionConfig(
                candidate_fields=("tcp_mean", "dns_mean"),
                corr_threshold=0.5,
                vif_threshold=10.0,
                max_interaction_order=2,
            ),
        )
        names = [s.name for s in report.selected]
        assert "dns_mean×tcp_mean" in names

    def test_collinear_interaction_pruned(self):
        # With tightly spread factors the product is nearly linear in them,
        # so the combined VIF prune drops the interaction again.
        config = SyntheticConfig(
            n=800,
            coefficients={"tcp_mean×dns_mean": 1.0},
            noise_sigma=0.05,
            distributions={
                "tcp_mean": DistributionSpec("lognormal", {"mean": 1.2, "sigma": 0.4}),
                "dns_mean": DistributionSpec("lognormal", {"mean": 1.2, "sigma": 0.4}),
            },
        )
        dataset = ct.generate_synthetic(config, seed=5)
        report = ct.select_features(
            dataset,
            SelectionConfig(
                candidate_fields=("tcp_mean", "dns_mean"),
                corr_threshold=0.6,
                vif_threshold=10.0,
                max_interaction_order=2,
            ),
        )
        assert [s.name for s in report.selected] == ["dns_mean", "tcp_mean"]
        reasons = {r.spec.name: r.reason for r in report.rejected}
        assert reasons["dns_mean×tcp_mean"] == REASON_HIGH_VIF

    def test_selected_features_satisfy_reported_thresholds(self):
        dataset = planted_dataset(seed=6)
        config = SelectionConfig(candidate_fields=PLANTED_CANDIDATES)
        report = ct.select_features(dataset, config)
        target = dataset.targets()
        for spec in report.selected:
            column = dataset.feature_matrix([spec])[:, 0]
            assert abs(ct.pearson(column, target)) >= config.corr_threshold
            assert ct.variance(column) >= config.variance_threshold
            assert report.vif_table[spec] <= config.vif_threshold


class TestVarianceStage:
    def test_near_constant_feature_rejected(self):
        # dns_mean tracks the target closely (r ~ 0.9, VIF ~ 5) but spans a
        # tiny range, so it passes the correlation and VIF stages and falls
        # to the variance filter.
        import numpy as np

        from conftest import make_metrics

        rng = np.random.default_rng(71)
        n = 400
        base = rng.lognormal(1.0, 0.6, n)
        companion = base + rng.normal(0, 0.5 * base.std(), n)
        tiny = np.abs(companion) * 1e-3
        samples = tuple(
            ct.LabeledSample(
                ad_id=f"ad-{i}",
                device_id="dev",
                metrics=make_metrics(duration_mean=float(base[i]), dns_mean=float(tiny[i])),
                nead=float(base[i]),
            )
            for i in range(n)
        )
        dataset = ct.Dataset(samples, provenance="synthetic")
        report = ct.select_features(
            dataset,
            SelectionConfig(
                candidate_fields=("duration_mean", "dns_mean"),
                max_interaction_order=1,
            ),
        )
        assert [s.name for s in report.selected] == ["duration_mean"]
        reasons = {r.spec.name: r.reason for r in report.rejected}
        assert reasons["dns_mean"] == REASON_LOW_VARIANCE


class TestSingleCandidateAllRejected:
    def test_low_variance_only_candidate_raises(self):
        config = SyntheticConfig(
            n=200,
            coefficients={"dns_mean": 100.0},
            noise_sigma=0.01,
            distributions={
                "dns_mean": DistributionSpec("uniform", {"low": 0.0, "high": 0.05})
            },
        )
        dataset = ct.generate_synthetic(config, seed=7)
        with pytest.raises(EmptySelectionError):
            ct.select_features(
                dataset,
                SelectionConfig(candidate_fields=("dns_mean",), max_interaction_order=1),
            )


class TestEmptySelection:
    def test_all_rejected_raises(self):
        config = SyntheticConfig(
            n=200,
            coefficients={},
            noise_sigma=1.0,
            distributions={},
        )
        dataset = ct.generate_synthetic(config, seed=8)
        with pytest.raises(EmptySelectionError):
            ct.select_features(
                dataset, SelectionConfig(candidate_fields=("tcp_mean", "dns_mean"))
            )


class TestSelectionConfig:
    def test_defaults(self):
        config = SelectionConfig()
        assert config.corr_threshold == 0.8
        assert config.vif_threshold == 10.0
        assert config.variance_threshold == 0.01
        assert config.max_interaction_order == 3
        assert len(config.candidate_fields) == 15

    def test_loader(self, tmp_path):
        path = tmp_path / "selection.json"
        path.write_text('{"corr_threshold": 0.5, "candidate_fields": ["tcp_mean", "dns_mean"]}')
        config = ct.load_selection_config(path)
        assert config.corr_threshold == 0.5
        assert config.candidate_fields == ("tcp_mean", "dns_mean")

    def test_loader_rejects_unknown_keys(self, tmp_path):
        path = tmp_path / "selection.json"
        path.write_text('{"corr": 0.5}')
        with pytest.raises(ConfigError):
            ct.load_selection_config(path)

    def test_unknown_candidate(self):
        with pytest.raises(ConfigError):
            SelectionConfig(candidate_fields=("no_such_field",))


class TestReportSerialization:
    def test_json_round_trip(self):
        import json

        dataset = planted_dataset(seed=9)
        report = ct.select_features(
            dataset, SelectionConfig(candidate_fields=PLANTED_CANDIDATES)
        )
        document = json.loads(report.to_json())
        assert document["selected"][0]["name"] == "duration_mean"
        assert {r["reason"] for r in document["rejected"]} <= {
            REASON_LOW_CORRELATION,
            REASON_HIGH_VIF,
            REASON_LOW_VARIANCE,
        }
        assert "duration_mean" in document["vif"]


class TestFeatureSelectorEstimator:
    def test_fit_transform(self):
        dataset = planted_dataset(seed=10)
        selector = ct.FeatureSelector(candidate_fields=PLANTED_CANDIDATES)
        matrix = selector.fit_transform(dataset)
        assert matrix.shape == (len(dataset), 1)
        assert selector.get_feature_names_out() == ["duration_mean"]

    def test_get_params_round_trip(self):
        selector = ct.FeatureSelector(corr_threshold=0.5)
        params = selector.get_params()
        assert params["corr_threshold"] == 0.5
        clone = ct.FeatureSelector(**params)
        assert clone.get_params() == params

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            ct.FeatureSelector().transform(planted_dataset(seed=11))
