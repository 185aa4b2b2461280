"""Library of test functions on R^n with decay and Lipschitz certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import InvalidParameter
from .geometry import unit_ball_volume

DEFAULT_KAPPA = 1e6


@dataclass(frozen=True)
class TestFunction:
    """A real function on R^n plus the metadata the integrators rely on.

    ``eval`` takes points of shape ``(..., n)`` (or ``(...)`` when n = 1).
    ``profile(r)`` is set for radial functions, ``axial(r, c)`` for functions
    of ``|x|`` and ``c = x_1/|x|``.  ``tail_envelope(r)`` bounds ``|u|`` on
    ``{|x| >= r}`` and is non-increasing.
    """

    __test__ = False  # keep pytest from collecting this class

    dim: int
    eval: Callable
    decay_certificate: Callable[[float], float]
    structure: str
    name: str
    lipschitz_constant: Optional[float] = None
    sup_norm: Optional[float] = None
    support_radius: Optional[float] = None
    profile: Optional[Callable] = None
    axial: Optional[Callable] = None
    tail_envelope: Optional[Callable[[float], float]] = None
    breakpoints: tuple[float, ...] = ()
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.eval(x)

    @property
    def is_zero(self) -> bool:
        return self.sup_norm == 0.0

    def describe(self) -> dict:
        return {"testfn": self.name, "n": self.dim, "structure": self.structure, **self.params}


def _radius(x, n):
    x = np.asarray(x, dtype=float)
    return np.abs(x) if n == 1 else np.linalg.norm(x, axis=-1)


def _first_coord(x, n):
    x = np.asarray(x, dtype=float)
    return x if n == 1 else x[..., 0]


def _check_dim(n, lo=1, hi=3):
    if not (isinstance(n, (int, np.integer)) and lo <= n <= hi):
        raise InvalidParameter(f"dimension must be an integer in [{lo}, {hi}], got {n}")


def make_zero(n: int = 1) -> TestFunction:
    _check_dim(n)
    return TestFunction(
        dim=n,
        eval=lambda x: np.zeros(np.shape(_radius(x, n))),
        decay_certificate=lambda t: 0.0,
        structure="Compact",
        name="zero",
        lipschitz_constant=0.0,
        sup_norm=0.0,
        support_radius=0.0,
        profile=lambda r: np.zeros(np.shape(r)),
        tail_envelope=lambda r: 0.0,
    )


def make_constant(c: float, n: int = 1) -> TestFunction:
    """Constant function; not in the decaying class, so no support is claimed."""
    _check_dim(n)
    c = float(c)
    return TestFunction(
        dim=n,
        eval=lambda x: np.full(np.shape(_radius(x, n)), c),
        decay_certificate=lambda t: 0.0 if t >= abs(c) else math.inf,
        structure="General",
        name="constant",
        lipschitz_constant=0.0,
        sup_norm=abs(c),
        profile=lambda r: np.full(np.shape(r), c),
        tail_envelope=lambda r: abs(c),
        params={"c": c},
    )


def make_tent() -> TestFunction:
    """``u(x) = max(0, 1 - |x|)`` on the line."""
    return TestFunction(
        dim=1,
        eval=lambda x: np.maximum(0.0, 1.0 - np.abs(np.asarray(x, dtype=float))),
        decay_certificate=lambda t: 0.0 if t >= 1 else 2.0 * (1.0 - max(t, 0.0)),
        structure="Compact",
        name="tent",
        lipschitz_constant=1.0,
        sup_norm=1.0,
        support_radius=1.0,
        profile=lambda r: np.maximum(0.0, 1.0 - np.asarray(r, dtype=float)),
        tail_envelope=lambda r: max(0.0, 1.0 - r),
        breakpoints=(-1.0, 0.0, 1.0),
    )


def make_exp_decay(n: int = 1) -> TestFunction:
    """``u(x) = exp(-|x|)`` in dimension 1 to 3."""
    _check_dim(n)
    omega = unit_ball_volume(n)

    def cert(t):
        if t >= 1:
            return 0.0
        return omega * math.log(1.0 / t) ** n

    return TestFunction(
        dim=n,
        eval=lambda x: np.exp(-_radius(x, n)),
        decay_certificate=cert,
        structure="Radial",
        name="exp_decay",
        lipschitz_constant=1.0,
        sup_norm=1.0,
        profile=lambda r: np.exp(-np.asarray(r, dtype=float)),
        tail_envelope=lambda r: math.exp(-max(r, 0.0)),
        breakpoints=(0.0,) if n == 1 else (),
    )


def make_counterexample_v(n: int = 1, gamma: float = 2.0, kappa: float = DEFAULT_KAPPA) -> TestFunction:
    """``v(x) = x_1 / (|x| log^(1/γ)(κ+|x|))`` outside the unit ball, linear inside."""
    _check_dim(n)
    if not gamma > 1:
        raise InvalidParameter("gamma must exceed 1")
    if not kappa > 1:
        raise InvalidParameter("kappa must exceed 1")
    g, k = float(gamma), float(kappa)
    inv_g = 1.0 / g
    l1 = math.log(k + 1.0) ** inv_g
    omega = unit_ball_volume(n)

    def axial(r, c):
        r = np.asarray(r, dtype=float)
        outer = c / np.log(k + np.maximum(r, 1.0)) ** inv_g
        return np.where(r < 1.0, c * r / l1, outer)

    def ev(x):
        r = _radius(x, n)
        x1 = _first_coord(x, n)
        with np.errstate(invalid="ignore", divide="ignore"):
            outer = x1 / (np.where(r > 0, r, 1.0) * np.log(k + r) ** inv_g)
        return np.where(r < 1.0, x1 / l1, outer)

    def log_radius(t):
        # {|v| > t} lies in the ball of radius max(1, e^(t^-γ) - κ)
        e = t**-g
        if e > 700:
            return e + math.log1p(-k * math.exp(-e))
        return math.log(max(1.0, math.exp(e) - k))

    def cert(t):
        if t >= 1.0 / l1:
            return 0.0
        log_c = math.log(omega) + n * log_radius(t)
        return math.exp(log_c) if log_c < 709 else math.inf

    # |∇(x_1/|x|)| <= 1/|x| and |d/dr log^(-1/γ)(κ+r)| is largest at r = 1
    lip = 1.0 / l1 + inv_g / ((k + 1.0) * math.log(k + 1.0) ** (1.0 + inv_g))
    return TestFunction(
        dim=n,
        eval=ev,
        decay_certificate=cert,
        structure="Counterexample",
        name="counterexample_v",
        lipschitz_constant=lip,
        sup_norm=1.0 / l1,
        axial=axial,
        tail_envelope=lambda r: 1.0 / math.log(k + max(r, 1.0)) ** inv_g,
        breakpoints=(-1.0, 1.0) if n == 1 else (),
        params={"gamma": g, "kappa": k},
    )


def kappa_threshold(gamma: float, lam: float) -> float:
    """Smallest κ with ``1/(λ log^(1/γ)(κ+1)) < 1/(2e)``; inf if not representable."""
    e = (2 * math.e / lam) ** gamma
    return math.expm1(e) if e < 709 else math.inf


def scale(u: TestFunction, lam: float) -> TestFunction:
    """``u / lam`` with certificates rescaled accordingly."""
    if not lam > 0:
        raise InvalidParameter("scale factor must be positive")
    lam = float(lam)
    if lam == 1.0:
        return u

    def div(f):
        return None if f is None else (lambda *a: np.asarray(f(*a)) / lam)

    return replace(
        u,
        eval=lambda x: np.asarray(u.eval(x)) / lam,
        decay_certificate=lambda t: u.decay_certificate(lam * t),
        lipschitz_constant=None if u.lipschitz_constant is None else u.lipschitz_constant / lam,
        sup_norm=None if u.sup_norm is None else u.sup_norm / lam,
        profile=div(u.profile),
        axial=div(u.axial),
        tail_envelope=None if u.tail_envelope is None else (lambda r: u.tail_envelope(r) / lam),
        params={**u.params, "scale": lam * u.params.get("scale", 1.0)},
    )


BUILDERS = {
    "tent": lambda n=1, **kw: make_tent(),
    "exp_decay": lambda n=1, **kw: make_exp_decay(n),
    "counterexample_v": lambda n=1, gamma=2.0, kappa=DEFAULT_KAPPA, **kw: make_counterexample_v(n, gamma, kappa),
    "zero": lambda n=1, **kw: make_zero(n),
}
