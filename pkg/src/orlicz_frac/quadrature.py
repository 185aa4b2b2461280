"""Quadrature configuration and small integration helpers.

Adaptive 1-D integration is delegated to :func:`scipy.integrate.quad`; the
helpers here add log-space integration for integrands that under/overflow.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import integrate, special

from .errors import InvalidParameter, NumericFailure


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    log_radius_window: tuple[float, float] | None = None
    outer_truncation: float = 1e60
    mc_samples: int = 1_000_000
    rng_seed: int = 42

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise InvalidParameter("rel_tol and abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise InvalidParameter("max_subdivisions must be >= 1")
        if self.log_radius_window is not None:
            lo, hi = self.log_radius_window
            if not lo < hi:
                raise InvalidParameter("log_radius_window needs tau_minus < tau_plus")
        if not self.outer_truncation > 0:
            raise InvalidParameter("outer_truncation must be positive")
        if self.mc_samples < 1:
            raise InvalidParameter("mc_samples must be positive")
        if not 0 <= self.rng_seed < 2**64:
            raise InvalidParameter("rng_seed must fit in 64 unsigned bits")

    def replace(self, **changes) -> "QuadratureConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["log_radius_window"] is not None:
            d["log_radius_window"] = list(d["log_radius_window"])
        return d


DEFAULT_CONFIG = QuadratureConfig()


@dataclass
class Tally:
    """Running (value, error, evaluation count) accumulator."""

    value: float = 0.0
    error: float = 0.0
    evaluations: int = 0
    notes: list = field(default_factory=list)

    def add(self, value, error=0.0, evaluations=0):
        self.value += value
        self.error += error
        self.evaluations += evaluations


def quad(f, a, b, cfg: QuadratureConfig, points=None, tally: Tally | None = None,
         epsabs=None, epsrel=None, strict=False):
    """``scipy.integrate.quad`` with config tolerances and breakpoint hygiene.

    Breakpoints outside (a, b) are dropped. Infinite limits are passed through
    (breakpoints are then ignored, as quad requires).
    """
    if a == b:
        return 0.0, 0.0
    epsabs = cfg.abs_tol if epsabs is None else epsabs
    epsrel = cfg.rel_tol if epsrel is None else epsrel
    kw = dict(epsabs=epsabs, epsrel=epsrel, limit=cfg.max_subdivisions, full_output=1)
    if points is not None and math.isfinite(a) and math.isfinite(b):
        lo, hi = min(a, b), max(a, b)
        pts = sorted({p for p in points if lo < p < hi})
        if pts:
            kw["points"] = pts
    out = integrate.quad(f, a, b, **kw)
    val, err, info = out[0], out[1], out[2]
    if len(out) > 3 and strict:
        raise NumericFailure(f"quad did not converge on [{a}, {b}]: {out[3]}",
                             partial=val, error_bound=err)
    if tally is not None:
        tally.add(val, err, info["neval"])
    return val, err


def log_integral(log_f, a, b, cfg: QuadratureConfig, points=None, grid=2049):
    """Return ``log`` of ``∫_a^b exp(log_f(x)) dx`` for finite a < b.

    The peak of ``log_f`` is located on a grid and factored out before
    integrating, so integrands far below the float range are handled.
    """
    xs = np.linspace(a, b, grid)
    try:
        lv = np.asarray(log_f(xs), dtype=float)
    except (TypeError, ValueError):
        lv = None
    if lv is None or lv.shape != xs.shape:
        lv = np.array([log_f(x) for x in xs])
    peak = float(np.max(lv))
    if not math.isfinite(peak):
        return -math.inf, 0.0
    k = int(np.argmax(lv))
    pts = list(points or []) + [float(xs[k])]
    val, err = quad(lambda x: math.exp(float(log_f(x)) - peak), a, b, cfg, points=pts,
                    epsabs=0.0, epsrel=cfg.rel_tol)
    if val <= 0:
        return -math.inf, 0.0
    return peak + math.log(val), err / val


def log_exp1(x: float) -> float:
    """log E1(x) for x > 0 without underflow."""
    if x < 600:
        return math.log(special.exp1(x))
    return -x + math.log(special.hyperu(1.0, 1.0, x))
