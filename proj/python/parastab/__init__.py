"""Python interface to the parastab C++ core."""

import json

from ._parastab import (
    Error,
    Exponents,
    __version__,
    catalog_ids,
    catalog_keys,
    curve_length,
    exponents,
    loglog_slope,
    normalize_config,
    rhs_shape,
    sensitivity,
    solve,
)
from . import _parastab


def run_suite(text, out_dir=None, threads=1):
    """Run a YAML suite given as text. Returns (report dict, CSV text)."""
    report, csv = _parastab.run_suite_json(text, out_dir, threads)
    return json.loads(report), csv


def estimate_lambda0(n, sizes, functions=16, seed=42, constants_only=False):
    """Largest sampled Poincare ratio over balls of the given measures."""
    return _parastab.poincare_estimate(n, list(sizes), functions, seed, constants_only)


__all__ = [
    "Error",
    "Exponents",
    "__version__",
    "catalog_ids",
    "catalog_keys",
    "curve_length",
    "estimate_lambda0",
    "exponents",
    "loglog_slope",
    "normalize_config",
    "rhs_shape",
    "run_suite",
    "sensitivity",
    "solve",
]
