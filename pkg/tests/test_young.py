import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frozen import ABAR_EXPM1_1, LOG_ABAR_EXPCE_G2_T01
from orlicz_frac.errors import InvalidParameter
from orlicz_frac.young import (abar, abar_vec, check_young, delta2_diagnose, diagnose, log_abar,
                               make_custom, make_exp_counterexample, make_expm1, make_polynomial,
                               make_power, make_power_log, matuszewska_index)

FAMILIES = {
    "power1": lambda: make_power(1.0),
    "power2.5": lambda: make_power(2.5),
    "powerlog2": lambda: make_power_log(2.0),
    "poly23": lambda: make_polynomial([(1.0, 2.0), (1.0, 3.0)]),
    "expm1": lambda: make_expm1(),
    "expce2": lambda: make_exp_counterexample(2.0),
    "custom": lambda: make_custom([(0.0, "power", {"c": 1.0, "p": 2.0}),
                                   (1.0, "power", {"c": 1.0, "p": 3.0})]),
}


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_young_invariants(name):
    A = FAMILIES[name]()
    assert check_young(A, np.geomspace(1e-3, 50, 400)) == []


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_sandwich_in_log_space(name):
    A = FAMILIES[name]()
    for t in np.geomspace(1e-2, 1e2, 41):
        lab = log_abar(A, float(t))
        assert float(A.log_eval(t / 2)) <= lab + 1e-10
        assert lab <= float(A.log_eval(t)) + 1e-10


def test_abar_closed_forms():
    assert abar(make_power(3.0), 1.0) == pytest.approx(1 / 3, rel=1e-15)
    assert abar(make_polynomial([(1, 2), (1, 3)]), 1.0) == pytest.approx(1 / 2 + 1 / 3, rel=1e-14)
    assert abar(make_power(2.0), 0.0) == 0.0


def test_abar_expm1_against_mpmath():
    assert abar(make_expm1(), 1.0) == pytest.approx(ABAR_EXPM1_1, rel=1e-10)


def test_counterexample_abar_against_mpmath():
    A = make_exp_counterexample(2.0)
    assert log_abar(A, 0.1) == pytest.approx(LOG_ABAR_EXPCE_G2_T01, rel=1e-12)


def test_log_abar_matches_quadrature_where_representable():
    A = make_expm1()
    for t in (0.3, 2.0, 10.0):
        assert log_abar(A, t) == pytest.approx(math.log(abar(A, t)), abs=1e-9)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_delta2_power_constant(p):
    d = delta2_diagnose(make_power(p))
    assert abs(d.delta2_sup_ratio - 2**p) <= 1e-9
    assert not d.delta2_unbounded


def test_delta2_flags_counterexample():
    assert delta2_diagnose(make_exp_counterexample(2.0)).delta2_unbounded


def test_delta2_bounded_for_expm1_on_modest_grid():
    # e^t - 1 fails Δ2 at infinity; the flag must catch it on a wide enough grid
    assert delta2_diagnose(make_expm1(), 1e-6, 1e3).delta2_unbounded


@pytest.mark.parametrize("A, expected, tol", [
    (make_power(2.0), 2.0, 1e-9),
    (make_polynomial([(1, 2), (1, 3)]), 3.0, 1e-6),
    (make_power_log(2.0), 2.0, 0.05),
])
def test_matuszewska_index(A, expected, tol):
    idx, unbounded = matuszewska_index(A)
    assert not unbounded
    assert idx == pytest.approx(expected, abs=tol)


def test_index_unbounded_for_counterexample():
    assert matuszewska_index(make_exp_counterexample(2.0)) == (math.inf, True)


def test_diagnose_power3_report():
    d = diagnose(make_power(3.0))
    assert d.delta2_sup_ratio == pytest.approx(8.0, abs=1e-9)
    assert d.matuszewska_index == pytest.approx(3.0, abs=1e-9)


def test_counterexample_extension_is_disclosed():
    A = make_exp_counterexample(2.0)
    assert A.params["extension"] == "affine"
    t0 = A.params["t0"]
    # density continuous across t0 and constant beyond
    assert float(A.deriv(t0 * (1 - 1e-9))) == pytest.approx(A.params["a(t0)"], rel=1e-6)
    assert float(A.deriv(5.0)) == A.params["a(t0)"]


@pytest.mark.parametrize("bad", [
    lambda: make_power(0.5),
    lambda: make_exp_counterexample(1.0),
    lambda: make_exp_counterexample(2.0, t0=0.5),
    lambda: make_polynomial([]),
    lambda: make_custom([(0.0, "power", {"c": 1.0, "p": 3.0}), (1.0, "power", {"c": 1.0, "p": 2.0})]),
])
def test_invalid_constructions(bad):
    with pytest.raises(InvalidParameter):
        bad()


@settings(max_examples=40, deadline=None)
@given(p=st.floats(1.0, 4.0), t=st.floats(1e-3, 1e3))
def test_power_sandwich_property(p, t):
    A = make_power(p)
    ab = float(abar_vec(A, t))
    assert float(A.eval(t / 2)) <= ab * (1 + 1e-10)
    assert ab <= float(A.eval(t)) * (1 + 1e-10)


@settings(max_examples=25, deadline=None)
@given(p=st.floats(1.0, 4.0))
def test_power_delta2_property(p):
    assert abs(delta2_diagnose(make_power(p)).delta2_sup_ratio - 2**p) <= 1e-9 * 2**p


@settings(max_examples=25, deadline=None)
@given(t=st.floats(1e-2, 20.0), k=st.floats(0.5, 2.0))
def test_expm1_abar_monotone_and_sandwiched(t, k):
    A = make_expm1(k)
    a1, a2 = abar(A, t), abar(A, 1.1 * t)
    assert a1 < a2
    assert float(A.eval(t / 2)) <= a1 * (1 + 1e-9) and a1 <= float(A.eval(t)) * (1 + 1e-9)
