"""Orlicz modulars, Luxemburg norms and the small-s limit target."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import InvalidParameter, NumericFailure, UnboundedNorm
from .geometry import sphere_area, unit_ball_volume
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, Tally, quad
from .testfn import TestFunction
from .young import YoungFunction, abar_vec


@dataclass
class ModularResult:
    value: float
    abs_error_estimate: float
    truncation_radius: float
    evaluations: int
    method: str = "Deterministic"
    standard_error: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method == "MonteCarlo" and self.standard_error is None:
            raise ValueError("Monte Carlo results carry a standard error")

    def to_json(self) -> dict:
        out = {
            "value": self.value,
            "abs_error_estimate": self.abs_error_estimate,
            "truncation_radius": self.truncation_radius,
            "evaluations": self.evaluations,
            "method": self.method,
        }
        if self.standard_error is not None:
            out["standard_error"] = self.standard_error
        if self.diagnostics:
            out["diagnostics"] = self.diagnostics
        return out


def shell_tail_bound(G: Callable[[float], float], envelope: Callable[[float], float],
                     R: float, n: int, max_terms: int = 4000, rel: float = 1e-3) -> float:
    """Upper bound for ``∫_{|x|>R} G(|u(x)|) dx`` from dyadic shells.

    Uses ``G(envelope(2^k R))`` times the shell volume; the sum stops once the
    remaining terms are dominated by a geometric series below ``rel`` of the
    partial sum.  Returns ``inf`` when the terms refuse to decay.
    """
    omega = unit_ball_volume(n)
    total, prev = 0.0, None
    r = R
    for k in range(max_terms):
        g = envelope(r)
        term = G(g) * omega * ((2 * r) ** n - r**n) if g > 0 else 0.0
        if not math.isfinite(term):
            return math.inf
        total += term
        if term == 0.0:
            return total
        if prev is not None and prev > 0:
            ratio = term / prev
            if ratio < 0.95 and term * ratio / (1 - ratio) <= rel * total:
                return total + term * ratio / (1 - ratio)
        prev = term
        r *= 2.0
        if r > 1e300:
            break
    return math.inf


def _integrate_line(u: TestFunction, G, cfg: QuadratureConfig, tally: Tally):
    """∫_R G(|u(x)|) dx in one dimension."""
    f = lambda x: G(abs(float(u.eval(x))))
    if u.support_radius is not None and u.support_radius <= 1e3:
        R = u.support_radius
        quad(f, -R, R, cfg, points=u.breakpoints, tally=tally)
        return R, 0.0
    if u.tail_envelope is None:
        raise InvalidParameter(f"{u.name}: no support or tail envelope to truncate with")
    x0 = max([1.0] + [abs(b) for b in u.breakpoints])
    quad(f, -x0, x0, cfg, points=u.breakpoints, tally=tally)
    tol = max(cfg.abs_tol, cfg.rel_tol * abs(tally.value))
    R = max(x0 * 16.0, 16.0)
    while True:
        tail = shell_tail_bound(G, u.tail_envelope, R, 1)
        if tail <= tol or R >= cfg.outer_truncation:
            break
        R = min(R * 16.0, cfg.outer_truncation)
    if not tail <= tol:
        raise NumericFailure(f"{u.name}: tail bound {tail:.3g} above tolerance at R={R:.3g}",
                             partial=tally.value, error_bound=tail)
    for sign in (1.0, -1.0):
        g = lambda s, sign=sign: f(sign * math.exp(s)) * math.exp(s)
        quad(g, math.log(x0), math.log(R), cfg, tally=tally)
    return R, tail


def _integrate_radial(u: TestFunction, G, cfg: QuadratureConfig, tally: Tally):
    """n ω_n ∫_0^∞ G(|profile(r)|) r^(n-1) dr."""
    n = u.dim
    area = sphere_area(n)
    f = lambda r: area * G(abs(float(u.profile(r)))) * r ** (n - 1)
    return _radial_like(u, f, G, cfg, tally)


def _integrate_axial(u: TestFunction, G, cfg: QuadratureConfig, tally: Tally):
    """Integrate over (r, θ) for functions of |x| and x_1/|x|."""
    n = u.dim
    ring = sphere_area(n - 1)

    def f(r):
        inner = lambda th: G(abs(float(u.axial(r, math.cos(th))))) * math.sin(th) ** (n - 2)
        v, _ = quad(inner, 0.0, math.pi, cfg)
        return ring * v * r ** (n - 1)

    return _radial_like(u, f, G, cfg, tally)


def _radial_like(u, f, G, cfg, tally):
    r0 = 1.0 if u.support_radius is None else min(1.0, u.support_radius)
    quad(f, 0.0, r0, cfg, tally=tally)
    if u.support_radius is not None and u.support_radius <= r0:
        return r0, 0.0
    if u.support_radius is not None:
        quad(lambda s: f(math.exp(s)) * math.exp(s), 0.0, math.log(u.support_radius), cfg, tally=tally)
        return u.support_radius, 0.0
    tol = max(cfg.abs_tol, cfg.rel_tol * abs(tally.value))
    R = 16.0
    while True:
        tail = shell_tail_bound(G, u.tail_envelope, R, u.dim)
        if tail <= tol or R >= cfg.outer_truncation:
            break
        R = min(R * 16.0, cfg.outer_truncation)
    if not tail <= tol:
        raise NumericFailure(f"{u.name}: tail bound {tail:.3g} above tolerance at R={R:.3g}",
                             partial=tally.value, error_bound=tail)
    quad(lambda s: f(math.exp(s)) * math.exp(s), 0.0, math.log(R), cfg, tally=tally)
    return R, tail


def integrate_gauge(u: TestFunction, G: Callable[[float], float],
                    cfg: QuadratureConfig = DEFAULT_CONFIG) -> ModularResult:
    """``∫_{R^n} G(|u(x)|) dx`` for a non-decreasing ``G`` with ``G(0) = 0``."""
    if u.is_zero:
        return ModularResult(0.0, 0.0, 0.0, 0)
    tally = Tally()
    if u.dim == 1:
        R, tail = _integrate_line(u, G, cfg, tally)
    elif u.profile is not None:
        R, tail = _integrate_radial(u, G, cfg, tally)
    elif u.axial is not None:
        R, tail = _integrate_axial(u, G, cfg, tally)
    else:
        raise InvalidParameter("deterministic integration needs n = 1, radial or axial structure")
    return ModularResult(tally.value, tally.error + tail, R, tally.evaluations,
                         diagnostics={"tail_bound": tail})


def orlicz_modular(u: TestFunction, A: YoungFunction, lam: float = 1.0,
                   cfg: QuadratureConfig = DEFAULT_CONFIG) -> ModularResult:
    """``∫ A(|u(x)|/λ) dx``."""
    if not lam > 0:
        raise InvalidParameter("lambda must be positive")
    return integrate_gauge(u, lambda t: float(A.eval(t / lam)), cfg)


def luxemburg_norm(u: TestFunction, A: YoungFunction, cfg: QuadratureConfig = DEFAULT_CONFIG,
                   rel_width: float = 1e-8, max_doublings: int = 200) -> float:
    """``inf{λ > 0 : ∫ A(|u|/λ) <= 1}`` by exponential bracketing and bisection."""
    if u.is_zero:
        return 0.0

    def modular(lam):
        try:
            return orlicz_modular(u, A, lam, cfg).value
        except NumericFailure:
            return math.inf  # tail not summable: modular is infinite at this scale

    lam = u.sup_norm if u.sup_norm else 1.0
    m = modular(lam)
    if m <= 1.0:
        hi = lam
        lo = lam / 2.0
        for _ in range(max_doublings):
            if modular(lo) > 1.0:
                break
            hi, lo = lo, lo / 2.0
        else:
            raise NumericFailure("modular stays <= 1 as lambda -> 0")
    else:
        lo = lam
        hi = lam * 2.0
        for _ in range(max_doublings):
            if modular(hi) <= 1.0:
                break
            lo, hi = hi, hi * 2.0
        else:
            raise UnboundedNorm("modular exceeds 1 for every lambda up to the bracket cap",
                                partial=hi)
    while (hi - lo) > rel_width * hi:
        mid = 0.5 * (lo + hi)
        if modular(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def limit_constant(n: int) -> float:
    """Prefactor of ``∫ Ā(|u|)`` in the small-s limit: twice the sphere area."""
    return 2.0 * sphere_area(n)


def limit_target(u: TestFunction, A: YoungFunction, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``2|S^(n-1)| ∫ Ā(|u(x)|) dx`` (for n = 1 this is ``(2ω_1/1)∫Ā``)."""
    if u.is_zero:
        return 0.0
    res = integrate_gauge(u, lambda t: float(abar_vec(A, t, cfg)), cfg)
    return limit_constant(u.dim) * res.value
