"""Worst-case robust estimation from scenario distributions."""

import json

from ._core import (
    Distribution,
    Error,
    Estimator,
    SolverError,
    audit,
    baseline,
    build_M,
    estimate_sampled,
    exact_worst_case,
    fit_regression,
    gen_importance,
    gen_selective,
    gen_snowball,
    round_certificate,
    schur_objective,
    sdp_upper_bound,
    solve_full,
    solve_schur,
    weights_from_certificate,
)
from ._core import run_experiment as _run_experiment


def run_experiment(spec):
    """Run an experiment spec given as a dict or JSON text; returns result rows."""
    if not isinstance(spec, str):
        spec = json.dumps(spec)
    return _run_experiment(spec)


__all__ = [
    "Distribution",
    "Error",
    "Estimator",
    "SolverError",
    "audit",
    "baseline",
    "build_M",
    "estimate_sampled",
    "exact_worst_case",
    "fit_regression",
    "gen_importance",
    "gen_selective",
    "gen_snowball",
    "round_certificate",
    "run_experiment",
    "schur_objective",
    "sdp_upper_bound",
    "solve_full",
    "solve_schur",
    "weights_from_certificate",
]
