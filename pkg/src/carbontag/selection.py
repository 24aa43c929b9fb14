"""The automated feature-selection pipeline.

Stages run in a fixed order:

1. keep base candidates whose |correlation| with the target clears the
   threshold (undefined correlations count as 0);
2. iteratively drop the highest-VIF feature until all VIFs are within
   bounds, breaking ties by canonical name;
3. generate 2- and 3-way products of the surviving bases, filter the new
   features by correlation, then re-run the VIF prune over the combined set;
4. drop near-constant features (variance below threshold).

Every candidate ends up either selected or rejected with a recorded reason,
so the resulting report is auditable.
"""

from __future__ import annotations

import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .dataset import Dataset
from .errors import ConfigError, DataError, EmptySelectionError, UndefinedCorrelationError
from .features import (
    FeatureSpec,
    feature_matrix,
    generate_interactions,
    pearson,
    variance,
    vif,
)
from .registry import DEFAULT_CANDIDATE_FIELDS, is_registered

RejectionReason = Literal["low_correlation", "high_vif", "low_variance"]

REASON_LOW_CORRELATION: RejectionReason = "low_correlation"
REASON_HIGH_VIF: RejectionReason = "high_vif"
REASON_LOW_VARIANCE: RejectionReason = "low_variance"


@dataclass(frozen=True)
class SelectionConfig:
    candidate_fields: tuple[str, ...] = DEFAULT_CANDIDATE_FIELDS
    corr_threshold: float = 0.8
    vif_threshold: float = 10.0
    variance_threshold: float = 0.01
    max_interaction_order: int = 3

    def __post_init__(self):
        object.__setattr__(self, "candidate_fields", tuple(self.candidate_fields))
        if not self.candidate_fields:
            raise ConfigError("candidate_fields must not be empty")
        if len(set(self.candidate_fields)) != len(self.candidate_fields):
            raise ConfigError("candidate_fields contains duplicates")
        for name in self.candidate_fields:
            if not is_registered(name):
                raise ConfigError(f"unknown candidate field: {name!r}")
        for attr in ("corr_threshold", "vif_threshold", "variance_threshold"):
            if getattr(self, attr) < 0:
                raise ConfigError(f"{attr} must be non-negative")
        if self.max_interaction_order not in (1, 2, 3):
            raise ConfigError(
                f"max_interaction_order must be 1, 2, or 3, got {self.max_interaction_order!r}"
            )


def load_selection_config(source) -> SelectionConfig:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            document = json.load(fh)
    elif isinstance(source, Mapping):
        document = source
    else:
        document = json.load(source)
    kwargs = {}
    for key in (
        "candidate_fields",
        "corr_threshold",
        "vif_threshold",
        "variance_threshold",
        "max_interaction_order",
    ):
        if key in document:
            kwargs[key] = document[key]
    unknown = set(document) - set(
        (
            "candidate_fields",
            "corr_threshold",
            "vif_threshold",
            "variance_threshold",
            "max_interaction_order",
        )
    )
    if unknown:
        raise ConfigError(f"unknown selection config keys: {sorted(unknown)!r}")
    return SelectionConfig(**kwargs)


@dataclass(frozen=True)
class Rejection:
    spec: FeatureSpec
    reason: RejectionReason


@dataclass(frozen=True)
class SelectionReport:
    selected: tuple[FeatureSpec, ...]
    rejected: tuple[Rejection, ...]
    vif_table: Mapping[FeatureSpec, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "vif_table", dict(self.vif_table))

    def to_json_dict(self) -> dict:
        return {
            "selected": [{"name": s.name, "factors": list(s.factors)} for s in self.selected],
            "rejected": [
                {"name": r.spec.name, "factors": list(r.spec.factors), "reason": r.reason}
                for r in self.rejected
            ],
            "vif": {spec.name: _json_number(value) for spec, value in self.vif_table.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def _json_number(value: float):
    return "inf" if math.isinf(value) else value


def _correlation(column: np.ndarray, target: np.ndarray) -> float:
    try:
        return pearson(column, target)
    except UndefinedCorrelationError:
        return 0.0


def _guarded_vif(design: np.ndarray, j: int) -> float:
    # A constant column inflates nothing; the variance stage deals with it.
    column = design[:, j]
    if np.all(column == column[0]):
        return 1.0
    return vif(design, j)


def _vif_prune(
    specs: list[FeatureSpec],
    columns: Mapping[FeatureSpec, np.ndarray],
    threshold: float,
) -> tuple[list[FeatureSpec], list[tuple[FeatureSpec, float]]]:
    """Drop the worst VIF offender until every VIF is within the threshold.

    Ties on the maximum (including +inf against +inf) are broken by
    dropping the feature whose canonical name sorts last, so the survivor
    set is deterministic.
    """
    kept = list(specs)
    dropped: list[tuple[FeatureSpec, float]] = []
    while len(kept) >= 2:
        design = np.column_stack([columns[s] for s in kept])
        n, p = design.shape
        if n <= p:
            raise DataError(
                f"VIF pruning needs more samples than features ({n} rows, {p} columns)"
            )
        vifs = [_guarded_vif(design, j) for j in range(p)]
        worst = max(vifs)
        if worst <= threshold:
            break
        victim = max(
            (spec for spec, value in zip(kept, vifs) if value == worst),
            key=lambda spec: spec.name,
        )
        dropped.append((victim, worst))
        kept.remove(victim)
    return kept, dropped


def select_features(dataset: Dataset, config: SelectionConfig) -> SelectionReport:
    """Run the full selection pipeline and account for every candidate."""
    dataset.require_non_empty()
    target = dataset.targets()
    rows = [s.metrics for s in dataset.samples]

    def columns_for(specs: Sequence[FeatureSpec]) -> dict[FeatureSpec, np.ndarray]:
        matrix = feature_matrix(specs, rows)
        return {spec: matrix[:, j] for j, spec in enumerate(specs)}

    base_specs = [FeatureSpec.of(name) for name in config.candidate_fields]
    columns = columns_for(base_specs)
    rejected: list[Rejection] = []
    vif_table: dict[FeatureSpec, float] = {}

    surviving_bases = []
    for spec in base_specs:
        if abs(_correlation(columns[spec], target)) >= config.corr_threshold:
            surviving_bases.append(spec)
        else:
            rejected.append(Rejection(spec, REASON_LOW_CORRELATION))

    surviving_bases, dropped = _vif_prune(surviving_bases, columns, config.vif_threshold)
    for spec, value in dropped:
        rejected.append(Rejection(spec, REASON_HIGH_VIF))
        vif_table[spec] = value

    selected = list(surviving_bases)
    if config.max_interaction_order >= 2 and len(surviving_bases) >= 2:
        base_names = [s.factors[0] for s in surviving_bases]
        interactions = [
            spec
            for spec in generate_interactions(base_names, config.max_interaction_order)
            if len(spec.factors) >= 2
        ]
        columns.update(columns_for(interactions))
        surviving_interactions = []
        for spec in interactions:
            if abs(_correlation(columns[spec], target)) >= config.corr_threshold:
                surviving_interactions.append(spec)
            else:
                rejected.append(Rejection(spec, REASON_LOW_CORRELATION))
        selected, dropped = _vif_prune(
            surviving_bases + surviving_interactions, columns, config.vif_threshold
        )
        for spec, value in dropped:
            rejected.append(Rejection(spec, REASON_HIGH_VIF))
            vif_table[spec] = value

    final = []
    for spec in selected:
        if variance(columns[spec]) < config.variance_threshold:
            rejected.append(Rejection(spec, REASON_LOW_VARIANCE))
            vif_table.pop(spec, None)
        else:
            final.append(spec)

    if not final:
        raise EmptySelectionError("every candidate feature was rejected")

    final.sort(key=lambda spec: spec.name)
    if len(final) == 1:
        vif_table[final[0]] = 1.0
    else:
        design = np.column_stack([columns[s] for s in final])
        for j, spec in enumerate(final):
            vif_table[spec] = _guarded_vif(design, j)
    return SelectionReport(
        selected=tuple(final), rejected=tuple(rejected), vif_table=vif_table
    )


class FeatureSelector(BaseEstimator, TransformerMixin):
    """Estimator-style wrapper around the selection pipeline.

    fit() runs the pipeline on a Dataset and stores the report; transform()
    evaluates the selected features (including products) into a matrix.
    """

    def __init__(
        self,
        candidate_fields=DEFAULT_CANDIDATE_FIELDS,
        corr_threshold=0.8,
        vif_threshold=10.0,
        variance_threshold=0.01,
        max_interaction_order=3,
    ):
        self.candidate_fields = candidate_fields
        self.corr_threshold = corr_threshold
        self.vif_threshold = vif_threshold
        self.variance_threshold = variance_threshold
        self.max_interaction_order = max_interaction_order

    def _config(self) -> SelectionConfig:
        return SelectionConfig(
            candidate_fields=tuple(self.candidate_fields),
            corr_threshold=self.corr_threshold,
            vif_threshold=self.vif_threshold,
            variance_threshold=self.variance_threshold,
            max_interaction_order=self.max_interaction_order,
        )

    def fit(self, dataset: Dataset, y=None):
        self.report_ = select_features(dataset, self._config())
        self.selected_ = list(self.report_.selected)
        return self

    def transform(self, dataset) -> np.ndarray:
        if not hasattr(self, "selected_"):
            raise NotFittedError("FeatureSelector is not fitted yet")
        if isinstance(dataset, Dataset):
            return dataset.feature_matrix(self.selected_)
        return feature_matrix(self.selected_, list(dataset))

    def get_feature_names_out(self) -> list[str]:
        if not hasattr(self, "selected_"):
            raise NotFittedError("FeatureSelector is not fitted yet")
        return [spec.name for spec in self.selected_]
