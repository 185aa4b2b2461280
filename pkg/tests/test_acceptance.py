"""Acceptance battery; each test records a PASS/FAIL line shown in the terminal summary."""

import math
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np

from oracles.tensor_oracle import j_s as tensor_js
from orlicz_frac.hardy import build_companion, hardy_check
from orlicz_frac.limits import counterexample_lower_bound, limit_study, ms_power_study
from orlicz_frac.modular import orlicz_modular
from orlicz_frac.quadrature import DEFAULT_CONFIG
from orlicz_frac.seminorm import (frac_modular_1d, frac_modular_mc, radial_identity_residual,
                                  shell_identity_residual)
from orlicz_frac.testfn import make_counterexample_v, make_exp_decay, make_tent, scale
from orlicz_frac.young import (abar, delta2_diagnose, log_abar, make_custom, make_exp_counterexample,
                               make_expm1, make_polynomial, make_power, make_power_log)

S_GRID = [0.2, 0.1, 0.05, 0.025]


def test_01_ms_limit_power_case(criterion):
    t0 = time.perf_counter()
    res = ms_power_study(make_tent(), 2.0, S_GRID, tol=0.02)
    elapsed = time.perf_counter() - t0
    rel = abs(res.extrapolated - 4 / 3) / (4 / 3)
    ok = rel <= 0.02 and elapsed < 60
    criterion(1, "MS limit, tent/power(2)", ok,
              f"extrapolated {res.extrapolated:.6f} vs 4/3 (rel {rel:.2%}), {elapsed:.1f}s")
    assert ok


def _closed_form_target(terms):
    # (2ω_1/1) ∫_{-1}^{1} Ā(1-|x|) dx with Ā(t) = Σ c t^p / p and ∫ (1-|x|)^p = 2/(p+1)
    return 4 * sum(Fraction(c) / p * Fraction(2, p + 1) for c, p in terms)


def test_02_orlicz_limit_non_power(criterion):
    terms = [(1, 2), (1, 3)]
    target = float(_closed_form_target(terms))
    t0 = time.perf_counter()
    res = limit_study(make_tent(), make_polynomial(terms), S_GRID, tol=0.03, target=target)
    elapsed = time.perf_counter() - t0
    rel = abs(res.extrapolated - target) / target
    ok = rel <= 0.03 and elapsed < 120
    criterion(2, "Orlicz limit, A=t²+t³", ok,
              f"extrapolated {res.extrapolated:.6f} vs {target} (rel {rel:.2%}), {elapsed:.1f}s")
    assert ok


def test_03_shell_identity(criterion):
    r1 = shell_identity_residual(make_tent(), make_power(2.0), 0.3, 1)
    r2 = shell_identity_residual(make_exp_decay(2), make_power(1.0), 0.5, 2)
    ok = r1 <= 1e-6 and r2 <= 1e-6
    criterion(3, "Exact shell identity", ok, f"residuals {r1:.2e}, {r2:.2e}")
    assert ok


def test_04_radial_identity(criterion):
    # first case: ∫_1^∞ 0.5 r^{-1/2} dr/r = 1 = Ā(0.5)/0.5
    assert abar(make_power(1.0), 0.5) / 0.5 == 1.0
    battery = [(make_power(1.0), 0.5, 1.0, 0.5, 0.0), (make_power(2.0), 1.0, 2.0, 0.3, 0.1),
               (make_expm1(), 0.7, 0.5, 0.2, 0.0)]
    res = [radial_identity_residual(*case) for case in battery]
    ok = max(res) <= 1e-8
    criterion(4, "Radial identity", ok, "residuals " + ", ".join(f"{r:.2e}" for r in res))
    assert ok


def test_05_sandwich(criterion):
    families = [make_power(1.0), make_power(2.0), make_power(3.5), make_power_log(2.0),
                make_polynomial([(1, 2), (1, 3)]), make_expm1(), make_exp_counterexample(2.0),
                make_custom([(0.0, "power", {"c": 1.0, "p": 2.0}), (1.0, "power", {"c": 1.0, "p": 3.0})])]
    t = np.geomspace(1e-3, 1e3, 1000)
    slack = math.log1p(1e-10)
    violations = 0
    for A in families:
        lo, hi = np.asarray(A.log_eval(t / 2)), np.asarray(A.log_eval(t))
        lab = np.array([log_abar(A, float(x)) for x in t])
        violations += int(np.sum(lo > lab + slack) + np.sum(lab > hi + slack))
    ok = violations == 0
    criterion(5, "Sandwich A(t/2) <= Ā(t) <= A(t)", ok,
              f"{violations} violations over {len(families)} families x {len(t)} points")
    assert ok


def test_06_hardy_companion(criterion):
    comp = build_companion(make_power(2.0), 0.1, 1)
    t = np.geomspace(1e-2, 1e2, 401)
    ratio = comp.B(t) / t**2
    spread = float(ratio.max() / ratio.min())
    chk = hardy_check(make_tent(), make_power(2.0), 0.1, 1, [1, 2, 4, 8, 16, 32], companion=comp)
    ok = spread <= 2 and chk.found
    criterion(6, "Hardy companion, power(2)", ok, f"B/t² spread {spread:.6f}, C = {chk.constant}")
    assert ok


def test_07_counterexample_divergence(criterion):
    t0 = time.perf_counter()
    vals = [counterexample_lower_bound(s, 2.0, 1.5, 0.9, 1e6, 1.0) for s in S_GRID]
    mod = orlicz_modular(scale(make_counterexample_v(1), 1.5), make_exp_counterexample(2.0))
    elapsed = time.perf_counter() - t0
    monotone = all(b > a for a, b in zip(vals, vals[1:]))
    factor = vals[-1] / vals[0]
    ok = monotone and factor >= 10 and math.isfinite(mod.value) and elapsed < 30
    criterion(7, "Counterexample divergence trend", ok,
              f"growth x{factor:.3g}, monotone={monotone}, ∫A(|v/λ|)={mod.value:.4g}, {elapsed:.1f}s")
    assert ok


def test_08_delta2_dichotomy(criterion):
    consts = [delta2_diagnose(make_power(p)).delta2_sup_ratio for p in (1, 2, 3)]
    exact = all(abs(c - 2**p) <= 1e-9 for c, p in zip(consts, (1, 2, 3)))
    flagged = delta2_diagnose(make_exp_counterexample(2.0)).delta2_unbounded
    ok = exact and flagged
    criterion(8, "Δ2 dichotomy", ok, f"constants {consts}, counterexample flagged={flagged}")
    assert ok


def test_09_oracle_equivalence(criterion):
    worst = 0.0
    for terms in ([(1.0, 2.0)], [(1.0, 1.5)], [(1.0, 3.0)], [(1.0, 2.0), (1.0, 3.0)]):
        A = make_polynomial(terms)
        for s in (0.5, 0.2, 0.05):
            det = frac_modular_1d(make_tent(), A, s).value
            worst = max(worst, abs(det - tensor_js(terms, s)) / tensor_js(terms, s))
    cfg = DEFAULT_CONFIG.replace(mc_samples=1_000_000, rng_seed=42)
    det = frac_modular_1d(make_tent(), make_power(2.0), 0.5).value
    mc = frac_modular_mc(make_tent(), make_power(2.0), 0.5, cfg=cfg)
    z = abs(mc.value - det) / mc.standard_error
    ok = worst <= 1e-4 and z <= 3
    criterion(9, "Oracle equivalence", ok, f"tensor rel gap {worst:.2e}, MC {z:.2f} SE from deterministic")
    assert ok


def test_10_cli_determinism(criterion, tmp_path):
    runs = {
        "limit": ["limit", "--family", "power", "--p", "2", "--testfn", "tent", "--s", "0.2,0.1,0.05"],
        "mc": ["seminorm", "--family", "power", "--p", "2", "--testfn", "tent", "--s", "0.5,0.3",
               "--method", "mc", "--rng-seed", "9", "--mc-samples", "200000"],
    }
    same = True
    for name, argv in runs.items():
        bodies = []
        for k in range(2):
            prefix = str(tmp_path / f"{name}{k}")
            proc = subprocess.run([sys.executable, "-m", "orlicz_frac", *argv, "--out", prefix],
                                  capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            bodies.append((tmp_path / f"{name}{k}.csv").read_bytes())
        same &= bodies[0] == bodies[1]
    criterion(10, "CLI determinism", same, "byte-identical CSV bodies" if same else "CSV bodies differ")
    assert same
