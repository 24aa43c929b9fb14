"""carbontag: estimate and label the energy consumption of online ad rendering."""

__version__ = "0.1.0"

from .artifact import ModelArtifact, export_artifact, import_artifact, parse_artifact
from .dataset import (
    Dataset,
    LabeledSample,
    MeasurementRow,
    aggregate_dataset,
    aggregate_samples,
    load_dataset,
    parse_measurement_csv,
    read_dataset_csv,
    split,
    write_dataset_csv,
    write_measurements_csv,
)
from .features import (
    FeatureSpec,
    evaluate_feature,
    feature_matrix,
    generate_interactions,
    pearson,
    variance,
    vif,
)
from .metrics import (
    LABEL_BIN_EDGES,
    LABEL_BINS,
    EnergyLabel,
    EnergyMeasurement,
    ImpactEstimate,
    ad_energy,
    assign_label,
    global_impact,
    normalized_ad_energy,
)
from .regression import (
    AdEnergyRegressor,
    LinearModel,
    ValidationReport,
    fit_ols,
    predict,
    predict_dataset,
    r2,
    rmse,
    validate,
    validate_by_device,
)
from .selection import (
    FeatureSelector,
    SelectionConfig,
    SelectionReport,
    load_selection_config,
    select_features,
)
from .synthetic import SyntheticConfig, generate_synthetic, load_synthetic_config

__all__ = [
    "__version__",
    "AdEnergyRegressor",
    "Dataset",
    "EnergyLabel",
    "EnergyMeasurement",
    "FeatureSelector",
    "FeatureSpec",
    "ImpactEstimate",
    "LABEL_BINS",
    "LABEL_BIN_EDGES",
    "LabeledSample",
    "LinearModel",
    "MeasurementRow",
    "ModelArtifact",
    "SelectionConfig",
    "SelectionReport",
    "SyntheticConfig",
    "ValidationReport",
    "ad_energy",
    "aggregate_dataset",
    "aggregate_samples",
    "assign_label",
    "evaluate_feature",
    "export_artifact",
    "feature_matrix",
    "fit_ols",
    "generate_interactions",
    "generate_synthetic",
    "global_impact",
    "import_artifact",
    "load_dataset",
    "load_selection_config",
    "load_synthetic_config",
    "normalized_ad_energy",
    "parse_artifact",
    "parse_measurement_csv",
    "pearson",
    "predict",
    "predict_dataset",
    "r2",
    "read_dataset_csv",
    "rmse",
    "select_features",
    "split",
    "validate",
    "validate_by_device",
    "variance",
    "vif",
    "write_dataset_csv",
    "write_measurements_csv",
]
