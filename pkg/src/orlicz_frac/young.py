"""Young functions and their analytic attributes.

A Young function is stored through callables for ``A``, its density ``a``
and ``log A``.  Every evaluator accepts scalars or numpy arrays.  The log
form matters for the exp-type counterexample family, whose values drop
below the float range for small arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateInput, InvalidParameter, NumericFailure
from .quadrature import (DEFAULT_CONFIG, QuadratureConfig, Tally, log_exp1, log_integral,
                         quad)

CONVEXITY_WINDOW = 1.0 / (2.0 * math.e)

Fn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class YoungFunction:
    eval: Fn
    deriv: Fn
    log_eval: Fn
    family_tag: str
    params: dict = field(default_factory=dict)
    abar_closed_form: Optional[Fn] = None
    log_abar_closed_form: Optional[Fn] = None
    asymptotics: Optional[tuple[float, float]] = None
    breakpoints: tuple[float, ...] = ()

    def __call__(self, t):
        return self.eval(t)

    def describe(self) -> dict:
        return {"family": self.family_tag, **self.params}


@dataclass
class YoungDiagnostics:
    delta2_sup_ratio: Optional[float] = None
    delta2_log_sup: Optional[float] = None
    delta2_unbounded: bool = False
    matuszewska_index: Optional[float] = None
    index_unbounded: bool = False
    growth_constant: Optional[float] = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _asarray(t):
    return np.asarray(t, dtype=float)


def _safe_log(x):
    x = _asarray(x)
    with np.errstate(divide="ignore"):
        return np.log(x)


def make_power(p: float) -> YoungFunction:
    """``A(t) = t**p`` for ``p >= 1``."""
    if not p >= 1:
        raise InvalidParameter(f"power exponent must be >= 1, got {p}")
    p = float(p)

    def deriv(t):
        t = _asarray(t)
        if p == 1.0:
            return np.ones_like(t)
        return p * t ** (p - 1.0)

    return YoungFunction(
        eval=lambda t: _asarray(t) ** p,
        deriv=deriv,
        log_eval=lambda t: p * _safe_log(t),
        family_tag="Power",
        params={"p": p},
        abar_closed_form=lambda t: _asarray(t) ** p / p,
        log_abar_closed_form=lambda t: p * _safe_log(t) - math.log(p),
        asymptotics=(p, p),
    )


def make_power_log(p: float) -> YoungFunction:
    """``A(t) = t**p * log(e + t)``; Δ₂ with index p, not a pure power."""
    if not p >= 1:
        raise InvalidParameter(f"power exponent must be >= 1, got {p}")
    p = float(p)

    def ev(t):
        t = _asarray(t)
        return t**p * np.log(math.e + t)

    def deriv(t):
        t = _asarray(t)
        return p * t ** (p - 1.0) * np.log(math.e + t) + t**p / (math.e + t)

    return YoungFunction(
        eval=ev,
        deriv=deriv,
        log_eval=lambda t: p * _safe_log(t) + np.log(np.log(math.e + _asarray(t))),
        family_tag="PowerLog",
        params={"p": p},
        asymptotics=(p, p),
    )


def make_polynomial(terms: Sequence[tuple[float, float]]) -> YoungFunction:
    """``A(t) = sum(c * t**p)`` over ``(c, p)`` pairs with ``c >= 0, p >= 1``."""
    terms = [(float(c), float(p)) for c, p in terms]
    if not terms or any(c < 0 or p < 1 for c, p in terms) or all(c == 0 for c, _ in terms):
        raise InvalidParameter("polynomial terms need c >= 0, p >= 1 and one c > 0")
    terms = [(c, p) for c, p in terms if c > 0]

    def ev(t):
        t = _asarray(t)
        return sum(c * t**p for c, p in terms)

    def deriv(t):
        t = _asarray(t)
        return sum(c * p * (t ** (p - 1.0) if p != 1.0 else np.ones_like(t)) for c, p in terms)

    def abar(t):
        t = _asarray(t)
        return sum(c * t**p / p for c, p in terms)

    ps = [p for _, p in terms]
    return YoungFunction(
        eval=ev,
        deriv=deriv,
        log_eval=lambda t: _safe_log(ev(t)),
        family_tag="Polynomial",
        params={"terms": [list(x) for x in terms]},
        abar_closed_form=abar,
        log_abar_closed_form=lambda t: _safe_log(abar(t)),
        asymptotics=(min(ps), max(ps)),
    )


def make_expm1(k: float = 1.0) -> YoungFunction:
    """``A(t) = exp(k t) - 1``; convex, Δ₂ fails at infinity."""
    if not k > 0:
        raise InvalidParameter("rate must be positive")
    k = float(k)

    def log_eval(t):
        t = _asarray(t)
        with np.errstate(divide="ignore"):
            small = np.log(np.expm1(np.minimum(k * t, 30.0)))
        return np.where(k * t < 30.0, small, k * t + np.log1p(-np.exp(-k * t)))

    return YoungFunction(
        eval=_expm1_eval(k),
        deriv=lambda t: k * np.exp(k * _asarray(t)),
        log_eval=log_eval,
        family_tag="ExpM1",
        params={"k": k},
    )


def _expm1_eval(k):
    def ev(t):
        with np.errstate(over="ignore"):
            return np.expm1(k * _asarray(t))
    return ev


def make_exp_counterexample(gamma: float, t0: float = CONVEXITY_WINDOW) -> YoungFunction:
    """``A(t) = exp(-t**-gamma)`` on ``(0, t0]``, affine with slope ``a(t0)`` beyond.

    The affine continuation is the cheapest finite convex extension; it is
    reported in ``params`` so results disclose which extension was used.
    """
    if not gamma > 1:
        raise InvalidParameter(f"gamma must exceed 1, got {gamma}")
    window = min(CONVEXITY_WINDOW, (gamma / (gamma + 1.0)) ** (1.0 / gamma))
    if not 0 < t0 <= window * (1 + 1e-12):
        raise InvalidParameter(f"t0 must lie in (0, {window}], got {t0}")
    g = float(gamma)
    t0 = float(t0)
    log_A0 = -(t0**-g)
    A0 = math.exp(log_A0)
    a0 = g * t0 ** (-g - 1.0) * A0
    abar_t0 = math.exp(log_exp1(t0**-g)) / g

    def log_eval(t):
        t = _asarray(t)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            inner = np.where(t > 0, -np.power(np.where(t > 0, t, 1.0), -g), -np.inf)
            outer = np.log(A0 + a0 * (t - t0))
        return np.where(t <= t0, inner, outer)

    def ev(t):
        return np.exp(log_eval(t))

    def deriv(t):
        t = _asarray(t)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            ts = np.where(t > 0, t, 1.0)
            inner = np.where(t > 0, g * np.exp(-(ts**-g) - (g + 1.0) * np.log(ts)), 0.0)
        return np.where(t <= t0, inner, a0)

    def log_abar(t):
        t = _asarray(t)
        out = np.empty(t.shape)
        for idx, tv in np.ndenumerate(t):
            if tv <= 0:
                out[idx] = -math.inf
            elif tv <= t0:
                out[idx] = log_exp1(tv**-g) - math.log(g)
            else:
                out[idx] = math.log(abar_t0 + (A0 - a0 * t0) * math.log(tv / t0) + a0 * (tv - t0))
        return out if out.shape else float(out)

    return YoungFunction(
        eval=ev,
        deriv=deriv,
        log_eval=log_eval,
        family_tag="ExpCounterexample",
        params={"gamma": g, "t0": t0, "extension": "affine", "A(t0)": A0, "a(t0)": a0},
        abar_closed_form=lambda t: np.exp(log_abar(t)),
        log_abar_closed_form=log_abar,
        asymptotics=None,
        breakpoints=(t0,),
    )


# Piecewise descriptors for configuration-defined Young functions.
# Each piece is (start, tag, params); tags give A on [start, next start).
_PIECE_TAGS = {
    "power": (lambda t, c, p: c * t**p, lambda t, c, p: c * p * t ** (p - 1.0)),
    "powerlog": (
        lambda t, c, p: c * t**p * np.log(math.e + t),
        lambda t, c, p: c * (p * t ** (p - 1.0) * np.log(math.e + t) + t**p / (math.e + t)),
    ),
    "expm1": (lambda t, c, k: c * np.expm1(k * t), lambda t, c, k: c * k * np.exp(k * t)),
}


def make_custom(pieces: Sequence[tuple[float, str, dict]], rtol: float = 1e-9) -> YoungFunction:
    """Build ``A`` from piecewise descriptors.

    Supported tags: ``power`` (c, p), ``powerlog`` (c, p), ``expm1`` (c, k) and
    ``affine`` (no parameters: continues the previous piece with its slope at
    the breakpoint). Continuity and a non-decreasing density are checked at
    every breakpoint.
    """
    if not pieces or pieces[0][0] != 0:
        raise InvalidParameter("first piece must start at 0")
    starts = [float(p[0]) for p in pieces]
    if any(b <= a for a, b in zip(starts, starts[1:])):
        raise InvalidParameter("piece starts must be strictly increasing")

    funcs = []
    for i, (start, tag, prm) in enumerate(pieces):
        if tag == "affine":
            if i == 0:
                raise InvalidParameter("affine piece needs a predecessor")
            f_prev, d_prev = funcs[-1]
            v0, s0 = float(f_prev(start)), float(d_prev(start))
            funcs.append((lambda t, v0=v0, s0=s0, b=start: v0 + s0 * (t - b),
                          lambda t, s0=s0: s0 + 0.0 * t))
            continue
        if tag not in _PIECE_TAGS:
            raise InvalidParameter(f"unknown piece tag {tag!r}")
        f, d = _PIECE_TAGS[tag]
        kw = {k: float(v) for k, v in prm.items()}
        funcs.append((lambda t, f=f, kw=kw: f(_asarray(t), **kw),
                      lambda t, d=d, kw=kw: d(_asarray(t), **kw)))

    for i in range(1, len(pieces)):
        b = starts[i]
        left, right = float(funcs[i - 1][0](b)), float(funcs[i][0](b))
        if abs(left - right) > rtol * max(abs(left), 1e-300):
            raise InvalidParameter(f"A is discontinuous at breakpoint {b}")
        if float(funcs[i][1](b)) < float(funcs[i - 1][1](b)) * (1 - rtol):
            raise InvalidParameter(f"density decreases at breakpoint {b}")
    if float(funcs[0][0](0.0)) != 0.0:
        raise InvalidParameter("A(0) must vanish")

    edges = np.asarray(starts)

    def pick(t, which):
        t = _asarray(t)
        idx = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(funcs) - 1)
        out = np.zeros(t.shape)
        for i, fd in enumerate(funcs):
            m = idx == i
            if np.any(m):
                out[m] = fd[which](t[m])
        return out if out.shape else float(out)

    return YoungFunction(
        eval=lambda t: pick(t, 0),
        deriv=lambda t: pick(t, 1),
        log_eval=lambda t: _safe_log(pick(t, 0)),
        family_tag="Custom",
        params={"pieces": [[s, tag, dict(prm)] for s, tag, prm in pieces]},
        breakpoints=tuple(starts[1:]),
    )


def abar(A: YoungFunction, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``Ā(t) = ∫_0^t A(τ)/τ dτ``.

    Without a closed form, integrate ``A(e^σ)`` in ``σ = log τ``.  The part
    below ``τ_lo`` is at most ``A(τ_lo)`` because ``A(τ)/τ`` is
    non-decreasing, so ``τ_lo`` is pushed down until that bound is negligible.
    """
    if t < 0:
        raise InvalidParameter("abar needs t >= 0")
    if t == 0:
        return 0.0
    if A.abar_closed_form is not None:
        return float(A.abar_closed_form(t))
    return _abar_quadrature(A, t, cfg)


def _abar_quadrature(A: YoungFunction, t: float, cfg: QuadratureConfig):
    At = float(A.eval(t))
    if At == 0.0:
        return 0.0
    target = min(cfg.abs_tol, cfg.rel_tol * At) * 1e-3
    tau_lo = t
    while True:
        tau_lo *= 1e-3
        if float(A.eval(tau_lo)) <= target or tau_lo < 1e-300:
            break
    tally = Tally()
    pts = [math.log(b) for b in A.breakpoints if 0 < b < t]
    quad(lambda s: float(A.eval(math.exp(s))), math.log(tau_lo), math.log(t), cfg,
         points=pts, tally=tally, epsabs=target, strict=False)
    tail = float(A.eval(tau_lo))
    if tally.error > max(cfg.abs_tol, cfg.rel_tol * abs(tally.value)) * 10:
        raise NumericFailure("abar quadrature did not converge",
                             partial=tally.value, error_bound=tally.error + tail)
    return tally.value


def log_abar(A: YoungFunction, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``log Ā(t)``, integrating in log space when no closed form exists."""
    if t <= 0:
        return -math.inf
    if A.log_abar_closed_form is not None:
        return float(A.log_abar_closed_form(t))
    log_At = float(A.log_eval(t))
    if not math.isfinite(log_At):
        return -math.inf
    log_floor = log_At + math.log(cfg.rel_tol * 1e-3)
    tau_lo = t
    while True:
        tau_lo *= 1e-3
        if float(A.log_eval(tau_lo)) <= log_floor or tau_lo < 1e-300:
            break
    pts = [math.log(b) for b in A.breakpoints if tau_lo < b < t]
    val, _ = log_integral(lambda s: A.log_eval(np.exp(s)), math.log(tau_lo),
                          math.log(t), cfg, points=pts)
    return val


def abar_vec(A: YoungFunction, t, cfg: QuadratureConfig = DEFAULT_CONFIG) -> np.ndarray:
    t = _asarray(t)
    if A.abar_closed_form is not None:
        return np.asarray(A.abar_closed_form(t), dtype=float)
    return np.vectorize(lambda v: abar(A, float(v), cfg), otypes=[float])(t)


def _edge_growth(values: np.ndarray, edge: str, span: int) -> float:
    """Change of ``values`` across the ``span`` points nearest an edge."""
    if edge == "low":
        return float(values[0] - values[min(span, len(values) - 1)])
    return float(values[-1] - values[max(len(values) - 1 - span, 0)])


def delta2_diagnose(A: YoungFunction, t_min: float = 1e-6, t_max: float = 1e6,
                    grid_points: int = 1001) -> YoungDiagnostics:
    """Sup of ``A(2t)/A(t)`` over a log grid, with an unboundedness flag.

    The flag is raised when the ratio keeps rising monotonically towards an
    end of the grid by more than a factor 10³ over the last decade.
    """
    if not 0 < t_min < t_max:
        raise InvalidParameter("need 0 < t_min < t_max")
    if grid_points < 16:
        raise InvalidParameter("grid_points must be >= 16")
    t = np.geomspace(t_min, t_max, grid_points)
    la, la2 = np.asarray(A.log_eval(t)), np.asarray(A.log_eval(2 * t))
    if not np.all(np.isfinite(la[1:-1])):
        raise DegenerateInput("A vanishes on the interior of the grid")
    lr = la2 - la
    log_sup = float(np.max(lr))
    per_decade = int(np.ceil((grid_points - 1) / math.log10(t_max / t_min)))
    unbounded = False
    for edge in ("low", "high"):
        seg = lr[: per_decade + 1] if edge == "low" else lr[-per_decade - 1:]
        steps = np.diff(seg)
        monotone = np.all(steps <= 0) if edge == "low" else np.all(steps >= 0)
        if monotone and _edge_growth(lr, edge, per_decade) > math.log(1e3):
            unbounded = True
    sup = math.exp(log_sup) if log_sup < 709 else math.inf
    return YoungDiagnostics(delta2_sup_ratio=sup, delta2_log_sup=log_sup,
                            delta2_unbounded=unbounded)


DEFAULT_LAMBDAS = tuple(2.0**k for k in range(10, 15))


def _index_sequence(A, lambdas, t):
    la = np.asarray(A.log_eval(t))
    if not np.all(np.isfinite(la)):
        raise DegenerateInput("A vanishes on the index grid")
    per_decade = max(int(len(t) / math.log10(t[-1] / t[0])), 1)
    values, unbounded = [], False
    for lam in lambdas:
        lr = (np.asarray(A.log_eval(lam * t)) - la) / math.log(lam)
        values.append(float(np.max(lr)))
        k = int(np.argmax(lr))
        # sup attained at an edge while still moving by > 1e-3 there
        if k == 0 and _edge_growth(lr, "low", per_decade) > 1e-3:
            unbounded = True
        if k == len(lr) - 1 and _edge_growth(lr, "high", per_decade) > 1e-3:
            unbounded = True
    return np.asarray(values), unbounded


def matuszewska_index(A: YoungFunction, lambdas: Sequence[float] = DEFAULT_LAMBDAS,
                      t_grid: Optional[np.ndarray] = None) -> tuple[float, bool]:
    """Estimate the upper Matuszewska–Orlicz index.

    Returns ``(index, unbounded)``; ``index`` is ``inf`` when the sup over the
    grid is still growing at a grid edge.  The finite-λ sequence is
    extrapolated to ``λ → ∞`` by least squares in ``L = log λ`` with the model
    ``I + b/L + c·log(L)/L`` (linear ``I + b/L`` with fewer than 4 λ's); the
    ``log L`` term absorbs slowly varying factors such as ``log(e+t)``.
    """
    lambdas = np.asarray(sorted(lambdas), dtype=float)
    if np.any(lambdas <= 1) or len(lambdas) < 2:
        raise InvalidParameter("need at least two lambdas, all > 1")
    if t_grid is None:
        t_grid = np.geomspace(1e-8, 1e8, 4001)
    t_grid = np.asarray(t_grid, dtype=float)
    vals, unbounded = _index_sequence(A, lambdas, t_grid)
    if unbounded:
        return math.inf, True
    if np.ptp(vals) <= 1e-12 * max(1.0, abs(vals[0])):
        return float(np.mean(vals)), False
    L = np.log(lambdas)
    cols = [np.ones_like(L), 1 / L]
    if len(L) >= 4:
        cols.append(np.log(L) / L)
    coef = np.linalg.lstsq(np.column_stack(cols), vals, rcond=None)[0]
    return float(coef[0]), False


def growth_constant(A: YoungFunction, index: float, exponent_slack: float = 0.0,
                    t_grid: Optional[np.ndarray] = None, lam_max: float = 2.0**10,
                    lam_points: int = 41) -> float:
    """Smallest C with ``A(λt) <= C λ^(index+1+slack) A(t)`` on the grid."""
    if not math.isfinite(index):
        return math.inf
    if t_grid is None:
        t_grid = np.geomspace(1e-6, 1e6, 1201)
    la = np.asarray(A.log_eval(t_grid))
    worst = -math.inf
    for lam in np.geomspace(1.0, lam_max, lam_points):
        lr = np.asarray(A.log_eval(lam * t_grid)) - la - (index + 1 + exponent_slack) * math.log(lam)
        worst = max(worst, float(np.max(lr)))
    return math.exp(worst) if worst < 709 else math.inf


def diagnose(A: YoungFunction, t_min: float = 1e-6, t_max: float = 1e6,
             grid_points: int = 1001) -> YoungDiagnostics:
    d = delta2_diagnose(A, t_min, t_max, grid_points)
    idx, unb = matuszewska_index(A)
    d.matuszewska_index = idx
    d.index_unbounded = unb
    d.growth_constant = growth_constant(A, idx)
    return d


def check_young(A: YoungFunction, t_grid: np.ndarray, cfg: QuadratureConfig = DEFAULT_CONFIG,
                rtol: float = 1e-9) -> list[str]:
    """List violated Young-function invariants on ``t_grid`` (empty if none)."""
    problems = []
    t = np.sort(np.asarray(t_grid, dtype=float))
    if float(A.eval(0.0)) != 0.0:
        problems.append("A(0) != 0")
    a = np.asarray(A.deriv(t))
    if np.any(np.diff(a) < -rtol * np.abs(a[1:])):
        problems.append("density decreasing")
    if not np.any(a > 0):
        problems.append("density identically zero")
    v = np.asarray(A.eval(t))
    mid = np.asarray(A.eval(0.5 * (t[:-1] + t[1:])))
    if np.any(mid > 0.5 * (v[:-1] + v[1:]) * (1 + rtol) + 1e-300):
        problems.append("midpoint convexity")
    for tv, av in zip(t[:: max(len(t) // 20, 1)], v[:: max(len(t) // 20, 1)]):
        pts = [b for b in A.breakpoints if 0 < b < tv]
        val, _ = quad(lambda x: float(A.deriv(x)), 0.0, float(tv), cfg, points=pts)
        if abs(val - av) > 1e-7 * max(abs(av), 1e-300) + cfg.abs_tol:
            problems.append(f"A(t) != ∫a at t={tv}")
    return problems
