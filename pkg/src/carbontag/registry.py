"""Canonical registry of the per-ad rendering parameters.

Every dataset column, model feature factor, and service request parameter
must use one of these names. The registry order is the canonical column
order for CSV files.
"""

from __future__ import annotations

import math
from collections.abc import Mapping

from .errors import DataError

# Field kinds drive validation (counts must be integral in raw measurements)
# and the default synthetic distributions (counts ~ Poisson, sizes and
# times ~ log-normal).
KIND_COUNT = "count"
KIND_TIME_MS = "time_ms"
KIND_SIZE_BYTES = "size_bytes"

PARAMETER_KINDS: dict[str, str] = {
    "usedJSHeapSize": KIND_SIZE_BYTES,
    "totalJSHeapSize": KIND_SIZE_BYTES,
    "entries": KIND_COUNT,
    "entries_requested": KIND_COUNT,
    "screen_size": KIND_COUNT,  # screen width x height, in pixels
    "et_element": KIND_COUNT,
    "et_navigation": KIND_COUNT,
    "et_resource": KIND_COUNT,
    "et_mark": KIND_COUNT,
    "et_measure": KIND_COUNT,
    "et_paint": KIND_COUNT,
    "et_longtask": KIND_COUNT,
    "it_element": KIND_COUNT,
    "it_css": KIND_COUNT,
    "it_embed": KIND_COUNT,
    "it_img": KIND_COUNT,
    "it_link": KIND_COUNT,
    "it_object": KIND_COUNT,
    "it_script": KIND_COUNT,
    "it_subdocument": KIND_COUNT,
    "it_svg": KIND_COUNT,
    "it_xmlhttprequest": KIND_COUNT,
    "it_navigation": KIND_COUNT,
    "it_other": KIND_COUNT,
    "duration_mean": KIND_TIME_MS,
    "transferSize_mean": KIND_SIZE_BYTES,
    "dedodedBodySize_mean": KIND_SIZE_BYTES,
    "redirectTime_mean": KIND_TIME_MS,
    "app_cache_mean": KIND_TIME_MS,
    "dns_mean": KIND_TIME_MS,
    "tcp_mean": KIND_TIME_MS,
    "request_mean": KIND_TIME_MS,
    "response_mean": KIND_TIME_MS,
    "ad_navigation_duration": KIND_TIME_MS,
    "ad_navigation_transferSize": KIND_SIZE_BYTES,
    "ad_navigation_decodedBodySize": KIND_SIZE_BYTES,
    "ad_navigation_app_cache": KIND_TIME_MS,
    "ad_navigation_dns": KIND_TIME_MS,
    "ad_navigation_tcp": KIND_TIME_MS,
    "ad_navigation_request": KIND_TIME_MS,
    "ad_navigation_response": KIND_TIME_MS,
    "ad_navigation_processing": KIND_TIME_MS,
    "ad_navigation_onLoad": KIND_TIME_MS,
}

PARAMETER_NAMES: tuple[str, ...] = tuple(PARAMETER_KINDS)
PARAMETER_SET: frozenset[str] = frozenset(PARAMETER_NAMES)
COUNT_FIELDS: frozenset[str] = frozenset(
    name for name, kind in PARAMETER_KINDS.items() if kind == KIND_COUNT
)

# Candidate variables used by default for automated feature selection
# (the manually pre-screened subset of the registry).
DEFAULT_CANDIDATE_FIELDS: tuple[str, ...] = (
    "screen_size",
    "totalJSHeapSize",
    "entries",
    "et_paint",
    "et_resource",
    "it_xmlhttprequest",
    "it_img",
    "it_script",
    "ad_navigation_duration",
    "ad_navigation_processing",
    "ad_navigation_onLoad",
    "duration_mean",
    "redirectTime_mean",
    "request_mean",
    "response_mean",
)


def is_registered(name: str) -> bool:
    return name in PARAMETER_SET


def validate_metrics(
    values: Mapping[str, float],
    *,
    require_all: bool = True,
    integral_counts: bool = False,
) -> dict[str, float]:
    """Validate a parameter mapping against the registry.

    Returns a plain dict of floats in canonical registry order. Raises
    DataError naming the offending field.
    """
    for name in values:
        if name not in PARAMETER_SET:
            raise DataError(f"unknown parameter: {name!r}")
    if require_all:
        for name in PARAMETER_NAMES:
            if name not in values:
                raise DataError(f"missing parameter: {name!r}")
    out: dict[str, float] = {}
    for name in PARAMETER_NAMES:
        if name not in values:
            continue
        raw = values[name]
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise DataError(f"parameter {name!r} is not numeric: {raw!r}")
        value = float(raw)
        if not math.isfinite(value):
            raise DataError(f"parameter {name!r} is not finite: {value!r}")
        if value < 0:
            raise DataError(f"parameter {name!r} is negative: {value!r}")
        if (
            integral_counts
            and name in COUNT_FIELDS
            and not value.is_integer()
        ):
            raise DataError(f"count parameter {name!r} is not integral: {value!r}")
        out[name] = value
    return out
