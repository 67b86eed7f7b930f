"""Forward-selection Fama-MacBeth estimation of SDF models."""

import json

from ._core import (
    FsfmbError,
    __version__,
    commands,
    debias,
    estimate,
    expand,
    expand_terms,
    lemma_check,
    newey_west_lrv,
    ols,
    sample_covariances,
    select,
)
from ._core import run_config as _run_config


def _restore(value):
    # Reports spell non-finite numbers as strings.
    if isinstance(value, dict):
        return {k: _restore(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_restore(v) for v in value]
    if value in ("NaN", "Infinity", "-Infinity"):
        return float(value.replace("Infinity", "inf"))
    return value


def run(command, config):
    """Run a CLI stage from a TOML config and return the report as a dict."""
    return _restore(json.loads(_run_config(command, str(config))))


__all__ = [
    "FsfmbError",
    "__version__",
    "commands",
    "debias",
    "estimate",
    "expand",
    "expand_terms",
    "lemma_check",
    "newey_west_lrv",
    "ols",
    "run",
    "sample_covariances",
    "select",
]
