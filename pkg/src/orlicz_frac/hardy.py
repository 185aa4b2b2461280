"""Hardy companion Young function and the fractional Hardy inequality check.

Given A with density a, s ∈ (0, 1) and n, the companion B = ∫ b has

    b⁻¹(r) = ( ∫_{a⁻¹(r)}^∞ Φ(t)^(-n/s) a(t)^(-n/(n-s)) dt )^(s/(s-n)),
    Φ(t)   = ∫_0^t a(ρ)^(-s/(n-s)) dρ,

where a⁻¹(r) = inf{t : a(t) >= r}.  Everything is tabulated on a grid in
σ = log t and handled in log space.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConstructionFailure, InvalidParameter, NumericFailure
from .geometry import sphere_area
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, log_integral, quad
from .seminorm import effective_radius, frac_modular_1d
from .testfn import TestFunction, scale
from .young import YoungFunction

HOLDS, FAILS, INCONCLUSIVE = "holds", "fails", "inconclusive"
INVERSE_CONVENTION = "a^-1(r) = inf{t : a(t) >= r}, +inf above sup a"


@dataclass
class ConditionReport:
    """Verdicts for ∫_0 (t/A)^q < ∞ (``small_t``) and ∫^∞ (t/A)^q = ∞ (``large_t``)."""

    small_t: str
    large_t: str
    method: str
    exponent: float

    @property
    def both_hold(self) -> bool:
        return self.small_t == HOLDS and self.large_t == HOLDS


def _classify(log_pieces: Sequence[float], want_convergent: bool) -> str:
    """Classify a sum of dyadic pieces from the trend of their logs."""
    tail = np.asarray(log_pieces, dtype=float)[-8:]
    d = np.diff(tail)
    if np.isnan(tail).any():
        return INCONCLUSIVE
    if np.isposinf(tail).any():
        converges = False
    elif np.isneginf(tail[-1]):
        converges = True
    elif np.all(d <= math.log(0.99)):
        converges = True
    elif np.all(d >= -1e-3):
        converges = False
    else:
        return INCONCLUSIVE
    return HOLDS if converges == want_convergent else FAILS


def check_conditions(A: YoungFunction, s: float, n: int) -> ConditionReport:
    if not (0 < s < 1 and s < n):
        raise InvalidParameter("need 0 < s < min(1, n)")
    q = s / (n - s)
    if A.asymptotics is not None:
        p0, pinf = A.asymptotics
        small = HOLDS if (p0 - 1.0) * q < 1.0 else FAILS
        large = HOLDS if (pinf - 1.0) * q <= 1.0 else FAILS
        return ConditionReport(small, large, "asymptotic", q)

    cfg = DEFAULT_CONFIG.replace(rel_tol=1e-8)
    # (t/A)^q dt in σ = log t
    log_phi = lambda sg: q * (sg - float(A.log_eval(math.exp(sg)))) + sg
    step = math.log(2.0)

    def piece(a, b):
        v, _ = log_integral(log_phi, a, b, cfg, grid=65)
        if v == -math.inf:
            # quadrature lost an extremely narrow peak; fall back to the sampled maximum
            v = max(log_phi(a), log_phi(b)) + math.log(b - a)
        return v

    lows = [piece(-(k + 1) * step, -k * step) for k in range(40)]
    highs = [piece(k * step, (k + 1) * step) for k in range(40)]
    return ConditionReport(_classify(lows, True), _classify(highs, False), "numeric-probe", q)


@dataclass
class HardyCompanion:
    source: YoungFunction
    s: float
    n: int
    r_grid: np.ndarray
    b_inverse_values: np.ndarray
    condition_report: ConditionReport
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        t, r = self.b_inverse_values, self.r_grid
        self._lt, self._lr = np.log(t), np.log(r)
        # ∫ b over [t_i, t_{i+1}] assuming b is a power of t on each segment
        k = np.diff(self._lr) / np.diff(self._lt)
        seg = (r[1:] * t[1:] - r[:-1] * t[:-1]) / (k + 1.0)
        head = r[0] * t[0] / (k[0] + 1.0)
        self._k = k
        self._cum = np.concatenate([[head], head + np.cumsum(seg)])

    def b_inverse(self, r):
        return np.exp(self._interp(np.log(r), self._lr, self._lt))

    def b(self, t):
        return np.exp(self._interp(np.log(t), self._lt, self._lr))

    def B(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        pos = t > 0
        lt = np.log(t[pos])
        i = np.clip(np.searchsorted(self._lt, lt) - 1, 0, len(self._lt) - 2)
        k = self._k[i]
        ti, ri = np.exp(self._lt[i]), np.exp(self._lr[i])
        bt = ri * np.exp(k * (lt - self._lt[i]))
        part = (bt * t[pos] - ri * ti) / (k + 1.0)
        below = lt < self._lt[0]
        val = self._cum[i] + part
        # below the table: the head segment integrates from 0
        val = np.where(below, bt * t[pos] / (k + 1.0), val)
        out[pos] = val
        return out if out.shape else float(out)

    @staticmethod
    def _interp(x, xs, ys):
        x = np.asarray(x, dtype=float)
        inner = np.interp(x, xs, ys)
        lo = ys[0] + (x - xs[0]) * (ys[1] - ys[0]) / (xs[1] - xs[0])
        hi = ys[-1] + (x - xs[-1]) * (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        return np.where(x < xs[0], lo, np.where(x > xs[-1], hi, inner))

    def tables(self, t_points: Optional[np.ndarray] = None):
        t_points = self.b_inverse_values if t_points is None else t_points
        return (list(zip(self.r_grid.tolist(), self.b_inverse_values.tolist())),
                list(zip(np.asarray(t_points).tolist(), np.atleast_1d(self.B(t_points)).tolist())))

    def write_csv(self, prefix: str):
        inv, big = self.tables()
        with open(f"{prefix}_b_inverse.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "b_inverse"])
            w.writerows((repr(a), repr(b)) for a, b in inv)
        with open(f"{prefix}_B.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "B"])
            w.writerows((repr(a), repr(b)) for a, b in big)


def generalized_inverse(a, r: float, t_hi: float = 1e300, iters: int = 200) -> float:
    """``inf{t >= 0 : a(t) >= r}`` for non-decreasing ``a``; inf if never reached."""
    with np.errstate(over="ignore"):
        return _bisect_inverse(a, r, t_hi, iters)


def _bisect_inverse(a, r, t_hi, iters):
    if float(a(0.0)) >= r:
        return 0.0
    if float(a(t_hi)) < r:
        return math.inf
    lo, hi = 0.0, 1.0
    while float(a(hi)) < r:
        lo, hi = hi, hi * 2.0
    if lo == 0.0:
        lo = hi
        while lo > 1e-300 and float(a(lo)) >= r:
            hi, lo = lo, lo / 2.0
    for _ in range(iters):
        mid = math.sqrt(lo * hi) if lo > 0 else 0.5 * hi
        if float(a(mid)) >= r:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * hi:
            break
    return hi


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def _log_panel_integrals(log_f, edges):
    """log ∫ over each [edges[i], edges[i+1]] of exp(log_f)."""
    a, b = edges[:-1, None], edges[1:, None]
    x = 0.5 * (b - a) * _GL_X + 0.5 * (b + a)
    lv = log_f(x) + np.log(0.5 * (b - a) * _GL_W)
    m = np.max(lv, axis=1, keepdims=True)
    return (m + np.log(np.sum(np.exp(lv - m), axis=1, keepdims=True)))[:, 0]


def _tabulate(A: YoungFunction, s: float, n: int, sig: np.ndarray, span: int):
    """Cumulative log Φ and reverse-cumulative log of the outer integral on ``sig``.

    Both improper ends are closed by a power law fitted over ``span`` grid
    steps (one decade) at that end.
    """
    q = s / (n - s)
    log_a = lambda x: np.log(np.asarray(A.deriv(np.exp(x)), dtype=float))

    log_phi_integrand = lambda x: x - q * log_a(x)
    la0 = log_phi_integrand(sig[[0, span]])
    k0 = (la0[1] - la0[0]) / (sig[span] - sig[0])
    if not k0 > 0:
        raise ConstructionFailure("∫_0 a^(-s/(n-s)) does not converge at the grid's left end")
    log_head = la0[0] - math.log(k0)
    panels = _log_panel_integrals(log_phi_integrand, sig)
    log_Phi = np.logaddexp.accumulate(np.concatenate([[log_head], panels]))
    spline = CubicSpline(sig, log_Phi)

    log_outer_integrand = lambda x: x - (n / s) * spline(x) - (n / (n - s)) * log_a(x)
    lb = log_outer_integrand(sig[[-1 - span, -1]])
    k1 = (lb[1] - lb[0]) / (sig[-1] - sig[-1 - span])
    if not k1 < 0:
        raise ConstructionFailure("outer integral is not decaying at the grid's right end")
    log_tail = lb[1] - math.log(-k1)
    panels = _log_panel_integrals(log_outer_integrand, sig)
    rev = np.logaddexp.accumulate(np.concatenate([[log_tail], panels[::-1]]))[::-1]
    return CubicSpline(sig, rev), log_a


def build_companion(A: YoungFunction, s: float, n: int, cfg: QuadratureConfig = DEFAULT_CONFIG,
                    t_range: tuple[float, float] = (1e-3, 1e3), points_per_decade: int = 24,
                    margin_decades: float = 4.0) -> HardyCompanion:
    """Tabulate b⁻¹, b and B so that B is available on ``t_range``."""
    report = check_conditions(A, s, n)
    if report.small_t == FAILS or report.large_t == FAILS:
        raise ConstructionFailure(f"integrability conditions not met: {report}")
    lo, hi = math.log10(t_range[0]), math.log10(t_range[1])
    for _ in range(6):
        d0, d1 = lo - margin_decades, hi + margin_decades
        sig = np.linspace(d0, d1, int((d1 - d0) * points_per_decade) + 1) * math.log(10)
        log_O, log_a = _tabulate(A, s, n, sig, points_per_decade)
        T = np.exp(sig[1:-1])
        r = np.asarray(A.deriv(T), dtype=float)
        r, keep = np.unique(r, return_index=True)
        inv = np.array([generalized_inverse(A.deriv, ri) for ri in r])
        ok = (inv > np.exp(sig[0])) & (inv < np.exp(sig[-1])) & (r > 0)
        r, inv = r[ok], inv[ok]
        log_binv = (s / (s - n)) * log_O(np.log(inv))
        binv = np.exp(log_binv)
        if np.any(np.diff(binv) < -1e-9 * binv[1:]):
            raise NumericFailure("b^-1 is not monotone on the grid")
        if binv[0] <= t_range[0] and binv[-1] >= t_range[1]:
            break
        margin_decades += 4.0
    else:
        raise NumericFailure("could not cover t_range with the b^-1 table")
    binv = np.maximum.accumulate(binv)
    keep = np.concatenate([[True], np.diff(binv) > 0])
    return HardyCompanion(A, s, n, r[keep], binv[keep], report,
                          metadata={"inverse_convention": INVERSE_CONVENTION,
                                    "points_per_decade": points_per_decade})


def weighted_modular(u: TestFunction, G, s: float, lam: float = 1.0,
                     cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``∫ G(|u(x)| / (λ|x|^s)) dx`` for a Young function (or companion) ``G``."""
    if not lam > 0:
        raise InvalidParameter("lambda must be positive")
    n = u.dim
    R = effective_radius(u, level=cfg.abs_tol * 1e-6)
    if R is None:
        raise NumericFailure("weighted modular needs compact or fast-decaying u")
    Gf = lambda t: float(G(t))
    if n == 1:
        h = lambda x: Gf(abs(float(u.eval(x))) / (lam * abs(x) ** s)) if x != 0 else 0.0
        pts = list(u.breakpoints)
        a, _ = quad(h, -R, 0.0, cfg, points=pts)
        b, _ = quad(h, 0.0, R, cfg, points=pts)
        return a + b
    if u.profile is None:
        raise InvalidParameter("weighted modular in n >= 2 needs a radial u")
    S = sphere_area(n)
    v, _ = quad(lambda r: S * r ** (n - 1) * Gf(abs(float(u.profile(r))) / (lam * r**s)) if r > 0 else 0.0,
                0.0, R, cfg)
    return v


def hardy_lhs(u: TestFunction, comp: HardyCompanion, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``∫ B(|u(x)| / |x|^s) dx``."""
    return weighted_modular(u, comp.B, comp.s, 1.0, cfg)


@dataclass
class HardyCheckResult:
    constant: Optional[float]
    lhs: float
    rhs: dict

    @property
    def found(self) -> bool:
        return self.constant is not None


def hardy_check(u: TestFunction, A: YoungFunction, s: float, n: int, C_grid: Sequence[float],
                cfg: QuadratureConfig = DEFAULT_CONFIG,
                companion: Optional[HardyCompanion] = None) -> HardyCheckResult:
    """Least C in ``C_grid`` with ``∫B(|u|/|x|^s) <= (1-s) J_s(C u)``."""
    grid = sorted(C_grid)
    if not grid or grid[0] <= 0:
        raise InvalidParameter("C_grid must hold positive values")
    if u.dim != n:
        raise InvalidParameter("dimension mismatch")
    if u.is_zero:
        return HardyCheckResult(grid[0], 0.0, {grid[0]: 0.0})
    if n != 1:
        raise InvalidParameter("the seminorm side is evaluated for n = 1 only")
    comp = companion or build_companion(A, s, n, cfg)
    lhs = hardy_lhs(u, comp, cfg)
    rhs = {}
    for C in grid:
        J = frac_modular_1d(scale(u, 1.0 / C), A, s, cfg).value
        rhs[C] = (1.0 - s) * J
        if lhs <= rhs[C] * (1 + 1e-3):
            return HardyCheckResult(C, lhs, rhs)
    return HardyCheckResult(None, lhs, rhs)
