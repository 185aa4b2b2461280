"""Small-s studies of s·J_s(u) and the counterexample's divergence lower bound."""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParameter, NumericFailure, OrliczFracError, StudyFailure
from .modular import integrate_gauge, limit_constant, limit_target
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, log_integral
from .seminorm import _worker_count, frac_modular_1d, frac_modular_mc, frac_modular_radial
from .testfn import TestFunction
from .young import YoungFunction, delta2_diagnose, make_power

log = logging.getLogger(__name__)

CONVERGES, DIVERGES, INCONCLUSIVE = "ConvergesToTarget", "DivergenceTrend", "Inconclusive"
DIVERGENCE_FACTOR = 5.0
EXTRAPOLATION_MODEL = "linear least squares v(s) = v0 + c*s (working hypothesis; no rate is known)"
LOWER_BOUND_CONSTANT = "C_{sigma,n}: unevaluated positive constant"


@dataclass
class StudyRow:
    s: float
    value: Optional[float]
    abs_err: Optional[float]
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.value is not None


@dataclass
class LimitStudyResult:
    rows: list
    target: float
    extrapolated: float
    verdict: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        s = [r.s for r in self.rows]
        if s != sorted(s, reverse=True):
            raise ValueError("rows must be sorted by decreasing s")
        if any(r.ok and r.value < 0 for r in self.rows):
            raise ValueError("s*J_s values are nonnegative")

    def csv_rows(self):
        return [(repr(r.s), repr(r.value) if r.ok else "nan",
                 repr(r.abs_err) if r.ok and r.abs_err is not None else "nan") for r in self.rows]

    def write_csv(self, path: str):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["s", "value", "abs_err"])
            w.writerows(self.csv_rows())

    def to_json(self) -> dict:
        fin = lambda x: x if x is not None and math.isfinite(x) else None
        return {
            "target": fin(self.target),
            "extrapolated": fin(self.extrapolated),
            "verdict": self.verdict,
            "rows": [{"s": r.s, "value": fin(r.value), "abs_err": fin(r.abs_err), "note": r.note}
                     for r in self.rows],
            "metadata": self.metadata,
        }


def _seminorm(u: TestFunction, A: YoungFunction, s: float, cfg: QuadratureConfig):
    if u.dim == 1:
        return frac_modular_1d(u, A, s, cfg)
    if u.profile is not None:
        return frac_modular_radial(u, A, s, cfg=cfg)
    return frac_modular_mc(u, A, s, cfg=cfg)


def _row(u, A, s, cfg) -> StudyRow:
    try:
        res = _seminorm(u, A, s, cfg)
    except OrliczFracError as exc:
        log.warning("row s=%g failed: %s", s, exc)
        return StudyRow(s, None, None, note=f"{exc.code}: {exc}")
    err = res.standard_error * 3 if res.method == "MonteCarlo" else res.abs_error_estimate
    note = res.diagnostics.get("mode", "") if res.diagnostics else ""
    return StudyRow(s, s * res.value, s * err if err is not None else None, note=note)


def linear_extrapolation(s: Sequence[float], v: Sequence[float]) -> float:
    """Intercept of the least-squares line through (s, v)."""
    coef = np.polynomial.polynomial.polyfit(np.asarray(s, float), np.asarray(v, float), 1)
    return float(coef[0])


def _verdict(rows, target, extrapolated, tol, delta2_flagged):
    vals = [r.value for r in rows]
    increasing = all(b > a for a, b in zip(vals, vals[1:]))
    if increasing and vals[0] > 0 and vals[-1] >= DIVERGENCE_FACTOR * vals[0]:
        return DIVERGES
    if delta2_flagged or not math.isfinite(target):
        return INCONCLUSIVE
    scale = abs(target) if target != 0 else 1.0
    errs = [r.abs_err for r in rows]
    errors_admit = all(e is not None and math.isfinite(e) and e <= tol * scale for e in errs)
    if abs(extrapolated - target) <= tol * scale and errors_admit:
        return CONVERGES
    return INCONCLUSIVE


def limit_study(u: TestFunction, A: YoungFunction, s_list: Sequence[float],
                cfg: QuadratureConfig = DEFAULT_CONFIG, tol: float = 0.02,
                target: Optional[float] = None) -> LimitStudyResult:
    """Compute s·J_s(u) on ``s_list`` and compare with the small-s limit target.

    ``tol`` is relative to the target (absolute when the target is 0).
    """
    s_list = [float(s) for s in s_list]
    if len(s_list) < 3:
        raise InvalidParameter("need at least three s values")
    if any(not 0 < s < 1 for s in s_list):
        raise InvalidParameter("s values must lie in (0, 1)")
    if any(b >= a for a, b in zip(s_list, s_list[1:])):
        raise InvalidParameter("s values must be strictly decreasing")
    if not tol > 0:
        raise InvalidParameter("tol must be positive")

    flagged = delta2_diagnose(A).delta2_unbounded
    if flagged:
        log.warning("A fails the Δ2 test on the grid; the limit theorem does not apply")

    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        rows = list(pool.map(lambda s: _row(u, A, s, cfg), s_list))
    good = [r for r in rows if r.ok]
    if len(good) < 3:
        raise StudyFailure(f"only {len(good)} of {len(rows)} rows succeeded")

    if target is None:
        try:
            target = limit_target(u, A, cfg)
        except NumericFailure as exc:
            log.warning("limit target not computable: %s", exc)
            target = math.inf
    extrapolated = linear_extrapolation([r.s for r in good], [r.value for r in good])
    verdict = _verdict(good, target, extrapolated, tol, flagged)
    meta = {
        "testfn": u.describe(),
        "young": A.describe(),
        "s_list": s_list,
        "tol": tol,
        "config": cfg.to_dict(),
        "extrapolation_model": EXTRAPOLATION_MODEL,
        "delta2_unbounded": flagged,
        "failed_rows": [r.s for r in rows if not r.ok],
        "limit_constant": limit_constant(u.dim),
    }
    return LimitStudyResult(rows, target, extrapolated, verdict, meta)


def power_target(u: TestFunction, p: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``(2|S^(n-1)|/p) ∫|u|^p``."""
    if u.is_zero:
        return 0.0
    return limit_constant(u.dim) / p * integrate_gauge(u, lambda t: t**p, cfg).value


def ms_power_study(u: TestFunction, p: float, s_list: Sequence[float],
                   cfg: QuadratureConfig = DEFAULT_CONFIG, tol: float = 0.02) -> LimitStudyResult:
    if not p >= 1:
        raise InvalidParameter("p must be >= 1")
    A = make_power(p)
    direct = power_target(u, p, cfg)
    via_abar = limit_target(u, A, cfg)
    if abs(direct - via_abar) > 1e-10 * max(abs(direct), 1e-300):
        raise NumericFailure(f"target routes disagree: {direct!r} vs {via_abar!r}")
    res = limit_study(u, A, s_list, cfg, tol, target=direct)
    res.metadata["target_via_abar"] = via_abar
    return res


def _check_lower_bound_params(s, gamma, lam, sigma, kappa, alpha, n):
    if not 0 < s < 1:
        raise InvalidParameter("s must lie in (0, 1)")
    if not gamma > 1:
        raise InvalidParameter("gamma must exceed 1")
    if not 1 < lam < 2:
        raise InvalidParameter("lambda must lie in (1, 2)")
    if not lam / 2 < sigma < 1:
        raise InvalidParameter("sigma must lie in (lambda/2, 1)")
    if not kappa > 1:
        raise InvalidParameter("kappa must exceed 1")
    if not 0 < alpha < 2:
        raise InvalidParameter("alpha must lie in (0, 2)")
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise InvalidParameter("n must be a positive integer")


def lower_bound_log_integrand(tau, s, gamma, lam, sigma, kappa):
    """log of ``t^(1/s) (κ + t^(1/s))^(-(λ/(2σ))^γ t^γ)`` at ``t = e^τ``."""
    c = (lam / (2 * sigma)) ** gamma
    return tau / s - c * np.exp(gamma * tau) * np.logaddexp(math.log(kappa), tau / s)


def log_counterexample_lower_bound(s: float, gamma: float = 2.0, lam: float = 1.5,
                                   sigma: float = 0.9, kappa: float = 1e6, alpha: float = 1.0,
                                   n: int = 1, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Natural log of :func:`counterexample_lower_bound`; finite even when the value underflows."""
    _check_lower_bound_params(s, gamma, lam, sigma, kappa, alpha, n)
    g = lambda tau: float(lower_bound_log_integrand(tau, s, gamma, lam, sigma, kappa))
    lo = s * math.log(4.0 / (2.0 - alpha))
    # the integrand is eventually super-exponentially small; stop 800 e-folds below its peak
    grid = np.linspace(lo, lo + 50.0, 5001)
    vals = np.array([g(x) for x in grid])
    peak = vals.max()
    below = np.nonzero((vals < peak - 800) & (grid > grid[np.argmax(vals)]))[0]
    if len(below) == 0:
        raise NumericFailure("lower-bound integrand does not decay on the search window")
    hi = float(grid[below[0]])
    cfg = cfg.replace(rel_tol=max(cfg.rel_tol, 1e-10))
    logI, _ = log_integral(g, lo, hi, cfg)
    return n * math.log(alpha) - math.log(s) + logI


def counterexample_lower_bound(s: float, gamma: float = 2.0, lam: float = 1.5, sigma: float = 0.9,
                               kappa: float = 1e6, alpha: float = 1.0, n: int = 1,
                               cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``(αⁿ/s) ∫_{(4/(2-α))^s}^∞ t^(1/s) (κ + t^(1/s))^(-(λ/(2σ))^γ t^γ) dt/t``.

    Up to the unevaluated constant ``C_{σ,n}`` this bounds the fractional
    modular of the counterexample from below.  The value can underflow for
    large s and γ; :func:`log_counterexample_lower_bound` stays finite.
    """
    return math.exp(log_counterexample_lower_bound(s, gamma, lam, sigma, kappa, alpha, n, cfg))
