"""Command-line entry point orchestrating the full pipeline.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric or
singularity error, 5 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import __version__
from .artifact import export_artifact, parse_artifact
from .dataset import load_dataset, parse_measurement_csv, aggregate_samples, write_dataset_csv
from .errors import (
    ArtifactError,
    CarbonTagError,
    ConfigError,
    DataError,
    DomainError,
    EmptySelectionError,
    FeatureResolutionError,
    InsufficientDataError,
    SchemaError,
    SingularDesignError,
    UndefinedCorrelationError,
)
from .metrics import assign_label, global_impact
from .regression import fit_ols, validate_by_device
from .selection import SelectionConfig, load_selection_config, select_features
from .service import run_server, scan_stats
from .synthetic import generate_synthetic, load_synthetic_config

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4
EXIT_INTERNAL = 5

_DATA_ERRORS = (SchemaError, DataError, ConfigError, DomainError, ArtifactError,
                FeatureResolutionError, FileNotFoundError, IsADirectoryError)
_NUMERIC_ERRORS = (SingularDesignError, InsufficientDataError, EmptySelectionError,
                   UndefinedCorrelationError)


def _write_manifest(command: str, out_path: Path, *, seed=None, configs=None, outputs=None):
    manifest = {
        "command": command,
        "tool_version": __version__,
        "seed": seed,
        "config_paths": [str(p) for p in (configs or [])],
        "output_paths": [str(p) for p in (outputs or [out_path])],
    }
    manifest_path = out_path.with_suffix(".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest_path


def _emit(args, result: dict, human: str):
    if getattr(args, "json", False):
        print(json.dumps(result, sort_keys=True))
    else:
        print(human)


def cmd_ingest(args) -> int:
    rows = parse_measurement_csv(args.measurements)
    dataset = aggregate_samples(rows)
    out = Path(args.out)
    write_dataset_csv(dataset, out)
    _write_manifest("ingest", out, configs=[args.measurements])
    _emit(
        args,
        {"samples": len(dataset), "rows": len(rows), "out": str(out)},
        f"aggregated {len(rows)} rows into {len(dataset)} samples -> {out}",
    )
    return EXIT_OK


def cmd_synth(args) -> int:
    config = load_synthetic_config(args.config)
    dataset = generate_synthetic(config, args.seed)
    out = Path(args.out)
    write_dataset_csv(dataset, out)
    _write_manifest("synth", out, seed=args.seed, configs=[args.config])
    _emit(
        args,
        {"samples": len(dataset), "seed": args.seed, "out": str(out)},
        f"generated {len(dataset)} synthetic samples (seed {args.seed}) -> {out}",
    )
    return EXIT_OK


def cmd_train(args) -> int:
    dataset = load_dataset(args.data)
    config = load_selection_config(args.selection_config) if args.selection_config else SelectionConfig()
    report = select_features(dataset, config)
    model = fit_ols(dataset, report.selected)
    artifact = export_artifact(model)
    out = Path(args.out)
    out.write_bytes(artifact)
    selection_path = out.with_suffix(".selection.json")
    selection_path.write_text(report.to_json() + "\n")
    validation_path = out.with_suffix(".validation.json")
    reports = validate_by_device(model, dataset)
    validation_path.write_text(
        json.dumps([r.to_json_dict() for r in reports], indent=2, sort_keys=True) + "\n"
    )
    _write_manifest(
        "train",
        out,
        configs=[args.data] + ([args.selection_config] if args.selection_config else []),
        outputs=[out, selection_path, validation_path],
    )
    overall = reports[0]
    _emit(
        args,
        {
            "model_version": model.version,
            "features": [s.name for s in model.feature_order],
            "r2": overall.r2,
            "rmse": overall.rmse,
            "artifact_bytes": len(artifact),
            "out": str(out),
        },
        f"trained {model.version}: {len(model.feature_order)} features, "
        f"in-sample r2 {overall.r2:.4f}, rmse {overall.rmse:.4f}, "
        f"artifact {len(artifact)} bytes -> {out}",
    )
    return EXIT_OK


def cmd_validate(args) -> int:
    model, _ = _load_model(args.model)
    dataset = load_dataset(args.data)
    reports = validate_by_device(model, dataset)
    if args.json:
        print(json.dumps([r.to_json_dict() for r in reports], sort_keys=True))
        return EXIT_OK
    print(f"{'device':<20} {'r2':>8} {'rmse':>10} {'n':>8}")
    for report in reports:
        device = report.device_id if report.device_id is not None else "(overall)"
        r2_text = f"{report.r2:8.4f}" if math.isfinite(report.r2) else f"{'-inf':>8}"
        print(f"{device:<20} {r2_text} {report.rmse:10.4f} {report.n:8d}")
    return EXIT_OK


def _load_model(path):
    from .artifact import import_artifact

    return import_artifact(Path(path).read_bytes())


def cmd_label(args) -> int:
    if args.batch:
        values = [float(line) for line in Path(args.batch).read_text().split()]
    else:
        if not args.values:
            raise ConfigError("provide values or --batch FILE")
        values = [float(v) for v in args.values]
    labels = [assign_label(v) for v in values]
    if args.json:
        print(json.dumps([{"value": v, "grade": l.grade} for v, l in zip(values, labels)]))
    else:
        for label in labels:
            print(label.grade)
    return EXIT_OK


def cmd_export(args) -> int:
    data = Path(args.model).read_bytes()
    artifact = parse_artifact(data)
    canonical = artifact.to_bytes()
    out = Path(args.out)
    out.write_bytes(canonical)
    _write_manifest("export", out, configs=[args.model])
    _emit(
        args,
        {
            "model_version": artifact.model_version,
            "bytes": len(canonical),
            "checksum": artifact.checksum,
            "out": str(out),
        },
        f"artifact {artifact.model_version}: {len(canonical)} bytes, "
        f"checksum {artifact.checksum} -> {out}",
    )
    return EXIT_OK


def cmd_serve(args) -> int:
    host, _, port_text = args.listen.rpartition(":")
    if not host or not port_text.isdigit():
        raise ConfigError(f"--listen must be host:port, got {args.listen!r}")
    run_server(host, int(port_text), args.log_dir, args.model)
    return EXIT_OK


def cmd_impact(args) -> int:
    estimate = global_impact(args.per_ad, args.ads_per_day, args.users)
    result = {
        "per_user_daily_kwh": estimate.per_user_daily,
        "global_daily_kwh": estimate.global_daily,
        "global_yearly_kwh": estimate.global_yearly,
        "assumptions": {
            "per_ad_energy_kwh": estimate.assumptions.per_ad_energy,
            "ads_per_user_per_day": estimate.assumptions.ads_per_user_per_day,
            "user_count": estimate.assumptions.user_count,
        },
    }
    _emit(
        args,
        result,
        f"per-user daily: {estimate.per_user_daily:.6g} kWh\n"
        f"global daily:   {estimate.global_daily:.6g} kWh\n"
        f"global yearly:  {estimate.global_yearly:.6g} kWh",
    )
    return EXIT_OK


def cmd_stats(args) -> int:
    stats = scan_stats(args.log_dir)
    if args.json:
        print(json.dumps(stats, sort_keys=True))
        return EXIT_OK
    print(f"total records: {stats['total']}")
    for grade, count in stats["by_grade"].items():
        print(f"  {grade}: {count}")
    if stats["skipped_lines"]:
        print(f"skipped corrupt lines: {stats['skipped_lines']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carbontag",
        description="Estimate and label the energy consumption of online ad rendering.",
    )
    parser.add_argument("--version", action="version", version=f"carbontag {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="aggregate raw measurement CSV into a dataset")
    p.add_argument("--measurements", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="generate a seeded synthetic dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="select features, fit the model, export the artifact")
    p.add_argument("--data", required=True)
    p.add_argument("--selection-config")
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("validate", help="score a model on a dataset, per device")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("label", help="grade normalized ad energy values")
    p.add_argument("values", nargs="*")
    p.add_argument("--batch")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("export", help="verify an artifact and re-emit canonical bytes")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve", help="run the estimation service")
    p.add_argument("--listen", default="127.0.0.1:8080")
    p.add_argument("--model")
    p.add_argument("--log-dir", required=True)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("impact", help="project global energy impact")
    p.add_argument("--per-ad", type=float, required=True)
    p.add_argument("--ads-per-day", type=int, required=True)
    p.add_argument("--users", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_impact)

    p = sub.add_parser("stats", help="histogram the persisted estimate records")
    p.add_argument("--log-dir", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    level = os.environ.get("CARBONTAG_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except _NUMERIC_ERRORS as exc:
        print(f"carbontag: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _DATA_ERRORS as exc:
        print(f"carbontag: {exc}", file=sys.stderr)
        return EXIT_DATA
    except CarbonTagError as exc:
        print(f"carbontag: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
