from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from cmcfol.errors import ConfigError
from cmcfol.ode import PowerLawMajorant, fit_asymptote, load_samples_csv


def test_exact_profile():
    t = np.linspace(1.0, 50.0, 40)
    fit = fit_asymptote(t, 2.0 + 5.0 / t**2, 2.0, 2.0, 4.0)
    assert fit.eta_prime == pytest.approx(5.0, abs=1e-10)
    assert fit.limit == 2.0
    assert np.all(fit.residuals == 0) and fit.satisfied


def test_linear_ode_solution_by_integration():
    # f' = -2f/t + 1/t, f(1) = 0, integrated numerically as an independent oracle
    t = np.geomspace(1.0, 200.0, 60)
    sol = solve_ivp(lambda s, f: -2 * f / s + 1 / s, (1.0, 200.0), [0.0], t_eval=t, rtol=1e-13, atol=1e-15)
    f = sol.y[0]
    assert np.allclose(f, 0.5 - 0.5 / t**2, atol=1e-11)
    fit = fit_asymptote(t, f, 2.0, 2.0, 1.0, abs_floor=1e-10)
    assert fit.limit == 0.5
    assert fit.eta_prime == pytest.approx(-0.5, abs=1e-8)


def test_oscillating_input_with_non_integrable_majorant():
    t = np.linspace(2.0, 60.0, 60)
    fit = fit_asymptote(t, 0.5 + np.sin(t) / t**3, 2.0, 2.0, 1.0, PowerLawMajorant([(1.5, 1.0)]))
    assert np.all(np.isinf(fit.bounds))
    assert fit.worst_ratio <= 1.0 and fit.satisfied


def test_oscillating_input_with_integrable_majorant():
    t = np.linspace(2.0, 60.0, 60)
    fit = fit_asymptote(t, 0.5 + np.sin(t) / t**4, 2.0, 2.0, 1.0, PowerLawMajorant([(2.0, 2.0)]))
    assert fit.satisfied
    assert 0 < fit.worst_ratio <= 1.0


def test_violation_is_diagnosed():
    t = np.linspace(2.0, 60.0, 60)
    fit = fit_asymptote(t, 0.5 + 1.0 / t, 2.0, 2.0, 1.0, PowerLawMajorant([(1.0, 2.0)]))
    assert not fit.satisfied
    assert fit.worst_ratio > 1
    assert fit.verdict.startswith("hypothesis not satisfied")
    assert fit.worst_t in t
    d = fit.to_dict()
    assert d["satisfied"] is False and d["worst_ratio"] == fit.worst_ratio


def test_small_epsilon_forces_zero_eta_prime():
    t = np.linspace(1.0, 30.0, 20)
    fit = fit_asymptote(t, 2.0 + 5.0 / t**2, 2.0, 1.0, 4.0, PowerLawMajorant([(20.0, 2.0)]))
    assert fit.eta_prime == 0.0
    assert fit.notes


@pytest.mark.parametrize(
    "args",
    [
        (np.linspace(1, 2, 7), np.ones(7), 1.0, 1.0, 1.0),
        (np.linspace(2, 1, 10), np.ones(10), 1.0, 1.0, 1.0),
        (np.linspace(0, 1, 10), np.ones(10), 1.0, 1.0, 1.0),
        (np.linspace(1, 2, 10), np.ones(10), 0.0, 1.0, 1.0),
        (np.linspace(1, 2, 10), np.ones(10), 1.0, -1.0, 1.0),
        (np.linspace(1, 2, 10), np.r_[np.ones(9), np.nan], 1.0, 1.0, 1.0),
        (np.linspace(1, 2, 10), np.ones(9), 1.0, 1.0, 1.0),
    ],
)
def test_input_errors(args):
    with pytest.raises(ConfigError):
        fit_asymptote(*args)


def test_majorant():
    h = PowerLawMajorant([(2.0, 3.0), (1.0, 2.0)])
    assert h(2.0) == pytest.approx(2 / 8 + 1 / 4)
    assert h.tail(2.0) == pytest.approx(2 / (2 * 4) + 1 / 2)
    assert PowerLawMajorant.zero().tail(5.0) == 0
    with pytest.raises(ConfigError):
        PowerLawMajorant([(-1.0, 2.0)])


@settings(max_examples=40, deadline=None)
@given(
    st.floats(0.5, 3.0),
    st.floats(-5.0, 5.0),
    st.floats(-5.0, 5.0),
    st.lists(st.floats(0.01, 3.0), min_size=8, max_size=30),
)
def test_exactness_any_spacing(delta, eta, eta_p, gaps):
    t = 1.0 + np.cumsum(gaps)
    f = eta / delta + eta_p * t ** (-delta)
    fit = fit_asymptote(t, f, delta, delta, eta)
    assert fit.eta_prime == pytest.approx(eta_p, abs=1e-12 * max(1.0, abs(eta_p), abs(eta / delta) * t[-1] ** delta))
    assert fit.satisfied


@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(-5.0, 5.0), st.floats(0.2, 5.0))
def test_scale_covariance(delta, eta_p, a):
    t = np.linspace(1.0, 40.0, 30)
    rng = np.random.default_rng(0)
    f = 1.0 + eta_p * t ** (-delta) + 1e-3 * rng.standard_normal(t.size) * t ** (-delta - 1)
    base = fit_asymptote(t, f, delta, delta, delta)
    scaled = fit_asymptote(a * t, f, delta, delta, delta)
    assert scaled.eta_prime == pytest.approx(base.eta_prime * a**delta, rel=1e-10, abs=1e-12)


def test_load_samples_csv(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("t,f\n# comment\n1.0,2.0\n2.0,3.5\n")
    t, f = load_samples_csv(p)
    assert list(t) == [1.0, 2.0] and list(f) == [2.0, 3.5]
    p.write_text("1.0,2.0\nx,y\n")
    with pytest.raises(ConfigError):
        load_samples_csv(p)
