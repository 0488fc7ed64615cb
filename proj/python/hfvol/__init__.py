"""Volatility and noise-index estimation for the stochastic heat equation."""

import json

from . import _core
from ._core import (
    HfvolError,
    big_R,
    c0_constants,
    format_path_csv,
    gamma_weight,
    gamma_weight_n,
    gamma_weights,
    gaussian_abs_moment,
    parse_path_csv,
    simulate,
    tau_sq,
)

__all__ = [
    "HfvolError",
    "big_R",
    "c0_constants",
    "estimate_alpha",
    "estimate_vol_known",
    "estimate_vol_unknown",
    "format_path_csv",
    "gamma_weight",
    "gamma_weight_n",
    "gamma_weights",
    "gaussian_abs_moment",
    "parse_path_csv",
    "run_experiment",
    "simulate",
    "simulate_config",
    "tau_sq",
]


def _as_json(config):
    return config if isinstance(config, str) else json.dumps(config)


def estimate_alpha(levels, delta, **kwargs):
    """Noise-index estimate as a dict (estimate, std_error, ci, per_site, ...)."""
    return json.loads(_core.estimate_alpha(levels, delta, **kwargs))


def estimate_vol_known(levels, delta, alpha, **kwargs):
    """Integrated-volatility estimate with alpha known, as a dict."""
    return json.loads(_core.estimate_vol_known(levels, delta, alpha, **kwargs))


def estimate_vol_unknown(levels, delta, **kwargs):
    """Integrated-volatility estimate with alpha estimated first, as a dict."""
    return json.loads(_core.estimate_vol_unknown(levels, delta, **kwargs))


def run_experiment(config, workers=0):
    """Run a Monte Carlo experiment from a config dict or JSON string; returns the report dict."""
    return json.loads(_core.run_experiment(_as_json(config), workers))


def simulate_config(config, seed=0, replication=0):
    """simulate() accepting a dict config."""
    return simulate(_as_json(config), seed, replication)
