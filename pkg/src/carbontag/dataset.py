"""Measurement ingestion, median aggregation, and dataset containers.

Two CSV schemas exist side by side:

* measurement CSV: one row per (ad_id, device_id, sample_index) carrying the
  raw energy pair plus every registry parameter;
* dataset CSV: one row per (ad_id, device_id) carrying the median-aggregated
  parameters and the median normalized ad energy under the column ``nEad``.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from statistics import median

import numpy as np

from .errors import DataError, DomainError, RowParseError, SchemaError
from .features import FeatureSpec, feature_matrix
from .metrics import EnergyMeasurement, normalized_ad_energy
from .registry import PARAMETER_NAMES, validate_metrics

MEASUREMENT_ID_COLUMNS = (
    "ad_id",
    "device_id",
    "sample_index",
    "baseline_energy",
    "ad_rendering_energy",
)
MEASUREMENT_HEADER: tuple[str, ...] = MEASUREMENT_ID_COLUMNS + PARAMETER_NAMES

TARGET_COLUMN = "nEad"
DATASET_HEADER: tuple[str, ...] = ("ad_id", "device_id", TARGET_COLUMN) + PARAMETER_NAMES

PROVENANCE_INGESTED = "ingested"
PROVENANCE_SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class MeasurementRow(EnergyMeasurement):
    """One raw measurement sample: the energy pair plus its parameters."""

    metrics: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(
            self, "metrics", validate_metrics(self.metrics, integral_counts=True)
        )


@dataclass(frozen=True)
class LabeledSample:
    """Median-aggregated parameters and normalized ad energy for one ad."""

    ad_id: str
    device_id: str
    metrics: Mapping[str, float]
    nead: float


@dataclass(frozen=True)
class Dataset:
    samples: tuple[LabeledSample, ...]
    provenance: str
    seed: int | None = None

    def __post_init__(self):
        seen = set()
        for sample in self.samples:
            key = (sample.ad_id, sample.device_id)
            if key in seen:
                raise DataError(f"duplicate (ad_id, device_id) pair: {key!r}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def require_non_empty(self) -> "Dataset":
        if not self.samples:
            raise DataError("operation requires a non-empty dataset")
        return self

    def targets(self) -> np.ndarray:
        return np.array([s.nead for s in self.samples])

    def feature_matrix(self, specs: Sequence[FeatureSpec]) -> np.ndarray:
        return feature_matrix(specs, [s.metrics for s in self.samples])

    def device_ids(self) -> list[str]:
        ordered: list[str] = []
        for sample in self.samples:
            if sample.device_id not in ordered:
                ordered.append(sample.device_id)
        return ordered


def _open_text(source) -> io.TextIOBase:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, io.TextIOBase):
        return source
    # binary file object
    return io.TextIOWrapper(source, encoding="utf-8", newline="")

def _check_header(header: list[str] | None, required: Sequence[str]) -> dict[str, int]:
    if not header:
        raise SchemaError("empty file: no header row")
    positions: dict[str, int] = {}
    for idx, name in enumerate(header):
        if name in positions:
            raise SchemaError(f"duplicate column: {name!r}")
        positions[name] = idx
    for name in required:
        if name not in positions:
            raise SchemaError(f"missing required column: {name!r}")
    for name in positions:
        if name not in required:
            raise SchemaError(f"unknown column: {name!r}")
    return positions


def _parse_float(cell: str, column: str, line_number: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise RowParseError(
            line_number, f"column {column!r} is not numeric: {cell!r}"
        ) from None
    if not math.isfinite(value):
        raise RowParseError(line_number, f"column {column!r} is not finite: {cell!r}")
    return value


def parse_measurement_csv(source) -> list[MeasurementRow]:
    """Parse raw per-sample measurements from CSV bytes, a path, or a stream."""
    stream = _open_text(source)
    reader = csv.reader(stream)
    header = next(reader, None)
    positions = _check_header(header, MEASUREMENT_HEADER)
    rows: list[MeasurementRow] = []
    for line_number, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != len(positions):
            raise RowParseError(
                line_number, f"expected {len(positions)} cells, got {len(record)}"
            )
        sample_cell = record[positions["sample_index"]]
        try:
            sample_index = int(sample_cell)
        except ValueError:
            raise RowParseError(
                line_number, f"column 'sample_index' is not an integer: {sample_cell!r}"
            ) from None
        metrics = {
            name: _parse_float(record[positions[name]], name, line_number)
            for name in PARAMETER_NAMES
        }
        try:
            row = MeasurementRow(
                ad_id=record[positions["ad_id"]],
                device_id=record[positions["device_id"]],
                sample_index=sample_index,
                baseline_energy=_parse_float(
                    record[positions["baseline_energy"]], "baseline_energy", line_number
                ),
                ad_rendering_energy=_parse_float(
                    record[positions["ad_rendering_energy"]],
                    "ad_rendering_energy",
                    line_number,
                ),
                metrics=metrics,
            )
        except (DomainError, DataError) as exc:
            raise RowParseError(line_number, str(exc)) from None
        rows.append(row)
    return rows


def write_measurements_csv(rows: Sequence[MeasurementRow], target) -> None:
    """Write raw measurement rows in the canonical column order."""
    close, stream = _writable(target)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(MEASUREMENT_HEADER)
    for row in rows:
        writer.writerow(
            [
                row.ad_id,
                row.device_id,
                row.sample_index,
                repr(row.baseline_energy),
                repr(row.ad_rendering_energy),
            ]
            + [repr(row.metrics[name]) for name in PARAMETER_NAMES]
        )
    if close:
        stream.close()


def _writable(target):
    if isinstance(target, (str, Path)):
        return True, open(target, "w", encoding="utf-8", newline="")
    return False, target


def _group_pairs(keys_and_values: Iterable[tuple[tuple[str, str], object]]):
    groups: dict[tuple[str, str], list] = {}
    for key, value in keys_and_values:
        groups.setdefault(key, []).append(value)
    return groups


def _median_sample(
    key: tuple[str, str], metrics_list: list[Mapping[str, float]], neads: list[float]
) -> LabeledSample:
    aggregated = {
        name: float(median(m[name] for m in metrics_list)) for name in PARAMETER_NAMES
    }
    return LabeledSample(
        ad_id=key[0],
        device_id=key[1],
        metrics=aggregated,
        nead=float(median(neads)),
    )


def aggregate_samples(rows: Sequence[MeasurementRow]) -> Dataset:
    """Collapse repeated samples of one ad into per-field medians.

    Normalized ad energy is computed per sample first and its median taken,
    so the aggregate never mixes energies across samples. Even-sized groups
    use the mean of the two central values.
    """
    groups = _group_pairs(((r.ad_id, r.device_id), r) for r in rows)
    samples = []
    for key, group in groups.items():
        indices = [r.sample_index for r in group]
        if len(set(indices)) != len(indices):
            raise DataError(f"duplicate sample_index within group {key!r}")
        samples.append(
            _median_sample(
                key,
                [r.metrics for r in group],
                [normalized_ad_energy(r.ad_rendering_energy, r.baseline_energy) for r in group],
            )
        )
    return Dataset(samples=tuple(samples), provenance=PROVENANCE_INGESTED)


def aggregate_dataset(dataset: Dataset) -> Dataset:
    """Median-aggregate labeled samples sharing an (ad_id, device_id) key.

    Datasets are already unique per key, so this is the identity on any
    aggregated dataset; it exists so aggregation can be re-applied safely.
    """
    groups = _group_pairs(((s.ad_id, s.device_id), s) for s in dataset.samples)
    samples = [
        _median_sample(key, [s.metrics for s in group], [s.nead for s in group])
        for key, group in groups.items()
    ]
    return Dataset(
        samples=tuple(samples), provenance=dataset.provenance, seed=dataset.seed
    )


def write_dataset_csv(dataset: Dataset, target) -> None:
    close, stream = _writable(target)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(DATASET_HEADER)
    for sample in dataset.samples:
        writer.writerow(
            [sample.ad_id, sample.device_id, repr(sample.nead)]
            + [repr(sample.metrics[name]) for name in PARAMETER_NAMES]
        )
    if close:
        stream.close()


def dataset_csv_bytes(dataset: Dataset) -> bytes:
    buffer = io.StringIO()
    write_dataset_csv(dataset, buffer)
    return buffer.getvalue().encode("utf-8")


def read_dataset_csv(source) -> Dataset:
    """Read an aggregated dataset written by write_dataset_csv."""
    stream = _open_text(source)
    reader = csv.reader(stream)
    header = next(reader, None)
    positions = _check_header(header, DATASET_HEADER)
    samples = []
    for line_number, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != len(positions):
            raise RowParseError(
                line_number, f"expected {len(positions)} cells, got {len(record)}"
            )
        metrics = {
            name: _parse_float(record[positions[name]], name, line_number)
            for name in PARAMETER_NAMES
        }
        samples.append(
            LabeledSample(
                ad_id=record[positions["ad_id"]],
                device_id=record[positions["device_id"]],
                metrics=metrics,
                nead=_parse_float(record[positions[TARGET_COLUMN]], TARGET_COLUMN, line_number),
            )
        )
    return Dataset(samples=tuple(samples), provenance=PROVENANCE_INGESTED)


def load_dataset(path) -> Dataset:
    """Load either CSV schema, aggregating raw measurements when needed."""
    with open(path, "r", encoding="utf-8", newline="") as stream:
        first_line = stream.readline()
        stream.seek(0)
        if "sample_index" in first_line.split(","):
            return aggregate_samples(parse_measurement_csv(stream))
        return read_dataset_csv(stream)


def split(
    dataset: Dataset, train_fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Deterministic shuffled partition into ceil(n*f) train and the rest."""
    if not (0.0 < train_fraction < 1.0):
        raise DomainError(f"train_fraction must be in (0, 1), got {train_fraction!r}")
    n = len(dataset)
    if n < 2:
        raise DataError("split needs at least 2 samples")
    order = np.random.default_rng(seed).permutation(n)
    n_train = math.ceil(n * train_fraction)
    train = tuple(dataset.samples[i] for i in order[:n_train])
    test = tuple(dataset.samples[i] for i in order[n_train:])
    return (
        Dataset(samples=train, provenance=dataset.provenance, seed=dataset.seed),
        Dataset(samples=test, provenance=dataset.provenance, seed=dataset.seed),
    )
