"""CSV ingestion, median aggregation, and split tests."""

import io

import numpy as np
import pytest

import carbontag as ct
from carbontag.dataset import (
    DATASET_HEADER,
    MEASUREMENT_HEADER,
    dataset_csv_bytes,
)
from carbontag.errors import DataError, DomainError, RowParseError, SchemaError
from carbontag.registry import PARAMETER_NAMES

from conftest import make_metrics, make_row


def rows_to_csv_bytes(rows) -> bytes:
    buffer = io.StringIO()
    ct.write_measurements_csv(rows, buffer)
    return buffer.getvalue().encode("utf-8")


class TestParseMeasurementCsv:
    def test_single_row(self):
        data = rows_to_csv_bytes([make_row("a1", "dev", 1, 1e-5, 2e-5, tcp_mean=3.0)])
        rows = ct.parse_measurement_csv(data)
        assert len(rows) == 1
        assert rows[0].ad_id == "a1"
        assert rows[0].metrics["tcp_mean"] == 3.0

    def test_missing_column_cited(self):
        header = ",".join(c for c in MEASUREMENT_HEADER if c != "tcp_mean")
        with pytest.raises(SchemaError, match="tcp_mean"):
            ct.parse_measurement_csv((header + "\n").encode())

    def test_unknown_column_rejected(self):
        header = ",".join(MEASUREMENT_HEADER + ("bogus",))
        with pytest.raises(SchemaError, match="bogus"):
            ct.parse_measurement_csv((header + "\n").encode())

    def test_empty_file(self):
        with pytest.raises(SchemaError):
            ct.parse_measurement_csv(b"")

    def test_five_samples_same_ad(self):
        rows_in = [
            make_row("a1", "dev", i, 1e-5, (1 + i) * 1e-5, tcp_mean=float(i))
            for i in range(1, 6)
        ]
        rows = ct.parse_measurement_csv(rows_to_csv_bytes(rows_in))
        assert len(rows) == 5
        assert len(ct.aggregate_samples(rows)) == 1

    def test_unparsable_cell_reports_line(self):
        data = rows_to_csv_bytes([make_row("a1", "dev", 1, 1e-5, 2e-5)])
        broken = data.replace(b"2e-05", b"not-a-number")
        with pytest.raises(RowParseError, match="line 2"):
            ct.parse_measurement_csv(broken)

    def test_row_count_preserved(self):
        rows_in = [
            make_row(f"a{i}", "dev", 1, 1e-5, 2e-5, entries=float(i)) for i in range(25)
        ]
        assert len(ct.parse_measurement_csv(rows_to_csv_bytes(rows_in))) == 25

    def test_fractional_count_rejected(self):
        data = rows_to_csv_bytes([make_row("a1", "dev", 1, 1e-5, 2e-5, entries=3.0)])
        broken = data.replace(b"3.0", b"3.5")
        with pytest.raises(RowParseError):
            ct.parse_measurement_csv(broken)


class TestAggregate:
    def test_median_robust_to_outlier(self):
        rows = [
            make_row("a1", "dev", i + 1, 1.0, 1.0 + v)
            for i, v in enumerate([1.0, 2.0, 3.0, 4.0, 100.0])
        ]
        dataset = ct.aggregate_samples(rows)
        assert dataset.samples[0].nead == 3.0

    def test_single_sample_identity(self):
        row = make_row("a1", "dev", 1, 1e-5, 2e-5, tcp_mean=7.0, entries=4.0)
        dataset = ct.aggregate_samples([row])
        sample = dataset.samples[0]
        assert sample.metrics == dict(row.metrics)
        assert sample.nead == 1.0

    def test_per_field_median_against_sort_oracle(self):
        rng = np.random.default_rng(9)
        rows = []
        for i in range(5):
            overrides = {
                name: float(np.rint(rng.uniform(0, 50)))
                for name in PARAMETER_NAMES
            }
            rows.append(make_row("a1", "dev", i + 1, 1e-5, 2e-5, **overrides))
        dataset = ct.aggregate_samples(rows)
        for name in PARAMETER_NAMES:
            values = sorted(r.metrics[name] for r in rows)
            assert dataset.samples[0].metrics[name] == values[2]

    def test_even_group_uses_mean_of_central_pair(self):
        rows = [
            make_row("a1", "dev", i + 1, 1.0, 1.0 + v)
            for i, v in enumerate([1.0, 2.0, 5.0, 10.0])
        ]
        dataset = ct.aggregate_samples(rows)
        assert dataset.samples[0].nead == 3.5

    def test_duplicate_sample_index_rejected(self):
        rows = [make_row("a1", "dev", 1, 1.0, 2.0), make_row("a1", "dev", 1, 1.0, 3.0)]
        with pytest.raises(DataError):
            ct.aggregate_samples(rows)

    def test_groups_keyed_by_ad_and_device(self):
        rows = [
            make_row("a1", "dev1", 1, 1.0, 2.0),
            make_row("a1", "dev2", 1, 1.0, 3.0),
            make_row("a2", "dev1", 1, 1.0, 4.0),
        ]
        dataset = ct.aggregate_samples(rows)
        assert len(dataset) == 3

    def test_idempotent(self):
        rows = [
            make_row("a1", "dev", i + 1, 1.0, 1.0 + v, tcp_mean=v)
            for i, v in enumerate([1.0, 2.0, 3.0])
        ]
        once = ct.aggregate_samples(rows)
        twice = ct.aggregate_dataset(once)
        assert once == twice


class TestDatasetCsvRoundTrip:
    def test_round_trip_exact(self):
        rng = np.random.default_rng(13)
        samples = []
        for i in range(20):
            metrics = {name: float(rng.lognormal(2, 1)) for name in PARAMETER_NAMES}
            samples.append(
                ct.LabeledSample(f"ad-{i}", "dev", metrics, float(rng.normal()))
            )
        dataset = ct.Dataset(tuple(samples), provenance="ingested")
        restored = ct.read_dataset_csv(dataset_csv_bytes(dataset))
        for original, copy in zip(dataset.samples, restored.samples):
            assert copy.nead == original.nead
            for name in PARAMETER_NAMES:
                assert copy.metrics[name] == original.metrics[name]

    def test_header_is_canonical(self):
        dataset = ct.Dataset(
            (ct.LabeledSample("a", "d", make_metrics(), 0.0),), provenance="ingested"
        )
        first_line = dataset_csv_bytes(dataset).split(b"\n", 1)[0].decode()
        assert first_line == ",".join(DATASET_HEADER)

    def test_duplicate_pair_rejected(self):
        sample = ct.LabeledSample("a", "d", make_metrics(), 0.0)
        with pytest.raises(DataError):
            ct.Dataset((sample, sample), provenance="ingested")


class TestSplit:
    def _dataset(self, n):
        samples = tuple(
            ct.LabeledSample(f"ad-{i}", "dev", make_metrics(entries=float(i)), float(i))
            for i in range(n)
        )
        return ct.Dataset(samples, provenance="synthetic", seed=0)

    def test_sizes(self):
        train, test = ct.split(self._dataset(10), 0.8, seed=1)
        assert (len(train), len(test)) == (8, 2)

    def test_partition_property(self):
        dataset = self._dataset(17)
        train, test = ct.split(dataset, 0.6, seed=2)
        combined = sorted(s.ad_id for s in list(train) + list(test))
        assert combined == sorted(s.ad_id for s in dataset)

    def test_deterministic_per_seed(self):
        dataset = self._dataset(30)
        first = ct.split(dataset, 0.5, seed=3)
        second = ct.split(dataset, 0.5, seed=3)
        assert first == second

    def test_seeds_produce_distinct_permutations(self):
        dataset = self._dataset(30)
        orders = {
            tuple(s.ad_id for s in ct.split(dataset, 0.5, seed=seed)[0])
            for seed in range(100)
        }
        assert len(orders) > 95

    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1, 1.5])
    def test_fraction_domain(self, fraction):
        with pytest.raises(DomainError):
            ct.split(self._dataset(10), fraction, seed=1)

    def test_minimum_size(self):
        with pytest.raises(DataError):
            ct.split(self._dataset(1), 0.5, seed=1)


class TestLoadDataset(object):
    def test_loads_raw_measurements(self, tmp_path):
        rows = [
            make_row("a1", "dev", i + 1, 1.0, 2.0 + i, tcp_mean=float(i))
            for i in range(3)
        ]
        path = tmp_path / "measurements.csv"
        ct.write_measurements_csv(rows, path)
        dataset = ct.load_dataset(path)
        assert len(dataset) == 1
        assert dataset.samples[0].nead == 2.0

    def test_loads_aggregated(self, tmp_path):
        dataset = ct.Dataset(
            (ct.LabeledSample("a", "d", make_metrics(), 1.5),), provenance="ingested"
        )
        path = tmp_path / "dataset.csv"
        ct.write_dataset_csv(dataset, path)
        assert ct.load_dataset(path).samples[0].nead == 1.5
