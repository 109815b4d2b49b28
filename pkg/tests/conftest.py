"""Shared fixtures.

The efficiency-curve experiments dominate the suite's runtime, so each
(experiment, model, parameter) family is computed once per session and
shared between the feature tests and the acceptance checks. Wall-clock
time is recorded alongside the curves because the acceptance gate also
bounds runtime.
"""

import time

import pytest
from hypothesis import HealthCheck, settings

from wmlab.kriging import efficiency_curve_integral, efficiency_curve_point
from wmlab.model_config import builtin_model

settings.register_profile(
    "suite",
    max_examples=200,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

FIG1_DELTAS = (1.0, 10.0, 100.0)
FIG1_N_GRID = (10, 20, 50, 100, 200, 300, 400, 500)
POINT_N_GRID = tuple(range(10, 100, 10))
FIG2_BETAS = (1, 2, 3)


@pytest.fixture(scope="session")
def fig1_integral_data():
    """{(model_index, delta): EfficiencyCurve} at N=1000, plus runtime."""
    curves = {}
    t0 = time.perf_counter()
    for delta in FIG1_DELTAS:
        base = builtin_model("base41", 1, delta=delta)
        for k in (1, 2):
            missp = builtin_model(f"model{k}_41", 1, delta=delta)
            curves[(k, delta)] = efficiency_curve_integral(
                base, missp, N=1000, n_values=FIG1_N_GRID
            )
    return {"curves": curves, "elapsed": time.perf_counter() - t0}


@pytest.fixture(scope="session")
def fig1_point_data():
    """{(model_index, delta): EfficiencyCurve} for the point design."""
    curves = {}
    t0 = time.perf_counter()
    for delta in FIG1_DELTAS:
        base = builtin_model("base41", 1, delta=delta)
        for k in (1, 2):
            missp = builtin_model(f"model{k}_41", 1, delta=delta)
            curves[(k, delta)] = efficiency_curve_point(
                base, missp, N=1000, n_values=POINT_N_GRID, s0=0.5, delta_o=0.01
            )
    return {"curves": curves, "elapsed": time.perf_counter() - t0}


@pytest.fixture(scope="session")
def fig2_data():
    """{(model_index, beta): EfficiencyCurve} at N=1000, plus runtime."""
    curves = {}
    t0 = time.perf_counter()
    for beta in FIG2_BETAS:
        base = builtin_model("base42", beta)
        for k in (1, 2):
            missp = builtin_model(f"model{k}_42", beta)
            curves[(k, beta)] = efficiency_curve_integral(
                base, missp, N=1000, n_values=FIG1_N_GRID
            )
    return {"curves": curves, "elapsed": time.perf_counter() - t0}
