import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frozen import TENT_JS_POWER2_S05
from oracles.tensor_oracle import j_s as tensor_js
from orlicz_frac.errors import InvalidParameter
from orlicz_frac.quadrature import DEFAULT_CONFIG
from orlicz_frac.seminorm import (frac_modular_1d, frac_modular_mc, frac_modular_radial,
                                  radial_identity_residual, shell_identity_residual)
from orlicz_frac.testfn import (make_constant, make_counterexample_v, make_exp_decay, make_tent,
                                make_zero, scale)
from orlicz_frac.young import make_expm1, make_polynomial, make_power


def test_tent_power2_against_mpmath():
    assert frac_modular_1d(make_tent(), make_power(2.0), 0.5).value == pytest.approx(
        TENT_JS_POWER2_S05, rel=1e-10)


@pytest.mark.parametrize("terms", [[(1.0, 2.0)], [(1.0, 2.0), (1.0, 3.0)], [(1.0, 1.5)]])
@pytest.mark.parametrize("s", [0.5, 0.1])
def test_1d_against_tensor_oracle(terms, s):
    A = make_polynomial(terms)
    res = frac_modular_1d(make_tent(), A, s)
    assert res.value == pytest.approx(tensor_js(terms, s), rel=1e-6)


def test_error_estimate_is_honest():
    res = frac_modular_1d(make_tent(), make_power(2.0), 0.5)
    assert abs(res.value - TENT_JS_POWER2_S05) <= res.abs_error_estimate


def test_trivial_inputs():
    assert frac_modular_1d(make_zero(), make_power(2.0), 0.3).value == 0.0
    assert frac_modular_1d(make_constant(3.0), make_power(2.0), 0.3).value == 0.0
    assert frac_modular_mc(make_zero(2), make_power(2.0), 0.3).value == 0.0


def test_invalid_s():
    for s in (0.0, 1.0, -0.1):
        with pytest.raises(InvalidParameter):
            frac_modular_1d(make_tent(), make_power(2.0), s)


def test_counterexample_runs_in_lower_bound_mode():
    from orlicz_frac.young import make_exp_counterexample
    res = frac_modular_1d(scale(make_counterexample_v(1), 1.5), make_exp_counterexample(2.0), 0.5)
    assert res.diagnostics["mode"] == "lower-bound"
    assert math.isnan(res.abs_error_estimate)
    assert res.value > 0


@settings(max_examples=8, deadline=None)
@given(p=st.floats(1.2, 3.0), c=st.floats(0.3, 3.0))
def test_power_homogeneity(p, c):
    A = make_power(p)
    base = frac_modular_1d(make_tent(), A, 0.5).value
    scaled = frac_modular_1d(scale(make_tent(), c), A, 0.5).value
    assert scaled == pytest.approx(base * c**-p, rel=1e-7)


def test_monte_carlo_1d_within_three_se():
    cfg = DEFAULT_CONFIG.replace(mc_samples=1_000_000, rng_seed=7)
    mc = frac_modular_mc(make_tent(), make_power(2.0), 0.5, cfg=cfg)
    assert abs(mc.value - TENT_JS_POWER2_S05) <= 3 * mc.standard_error


def test_monte_carlo_is_reproducible_and_thread_independent(monkeypatch):
    cfg = DEFAULT_CONFIG.replace(mc_samples=200_000, rng_seed=11)
    monkeypatch.setenv("ORLICZ_FRAC_THREADS", "1")
    a = frac_modular_mc(make_tent(), make_power(2.0), 0.4, cfg=cfg)
    monkeypatch.setenv("ORLICZ_FRAC_THREADS", "4")
    b = frac_modular_mc(make_tent(), make_power(2.0), 0.4, cfg=cfg)
    assert a.value == b.value and a.standard_error == b.standard_error


def test_monte_carlo_needs_samples():
    with pytest.raises(InvalidParameter):
        frac_modular_mc(make_tent(), make_power(2.0), 0.4, cfg=DEFAULT_CONFIG.replace(mc_samples=100))


def test_radial_n2_against_monte_carlo():
    u, A = make_exp_decay(2), make_power(2.0)
    det = frac_modular_radial(u, A, 0.5)
    mc = frac_modular_mc(u, A, 0.5, cfg=DEFAULT_CONFIG.replace(mc_samples=4_000_000, rng_seed=3))
    assert abs(mc.value - det.value) <= 3 * mc.standard_error + det.abs_error_estimate


def test_radial_rejects_wrong_dimension():
    with pytest.raises(InvalidParameter):
        frac_modular_radial(make_tent(), make_power(2.0), 0.5)


@pytest.mark.parametrize("u, A, s", [
    (make_tent(), make_power(2.0), 0.3),
    (make_exp_decay(2), make_power(1.0), 0.5),
    (make_exp_decay(1), make_expm1(), 0.4),
    (make_exp_decay(3), make_power(2.0), 0.2),
])
def test_shell_identity(u, A, s):
    assert shell_identity_residual(u, A, s) <= 1e-6


@pytest.mark.parametrize("A, rho, t, s, eps", [
    (make_power(1.0), 0.5, 1.0, 0.5, 0.0),
    (make_power(2.0), 1.0, 2.0, 0.3, 0.1),
    (make_expm1(), 0.7, 0.5, 0.2, 0.0),
])
def test_radial_identity(A, rho, t, s, eps):
    assert radial_identity_residual(A, rho, t, s, eps) <= 1e-8


@settings(max_examples=25, deadline=None)
@given(rho=st.floats(0.05, 5.0), t=st.floats(0.05, 5.0), s=st.floats(0.05, 0.95),
       eps=st.floats(0.0, 1.0))
def test_radial_identity_property(rho, t, s, eps):
    A = make_polynomial([(1.0, 2.0), (0.5, 3.0)])
    assert radial_identity_residual(A, rho, t, s, eps) <= 1e-8
