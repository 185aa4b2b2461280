"""Fractional Orlicz modular

    J_s(u) = ∫∫ A(|u(x) - u(y)| / |x-y|^s) dx dy / |x-y|^n

by deterministic quadrature (n = 1, radial n = 2, 3) and Monte Carlo, plus
exact identities used to gauge quadrature quality.

The kernel is handled in ``τ = log r`` (``r = |x - y|``), which turns
``dr/r`` into ``dτ``.  For a function supported in a ball ``K`` of radius R,
pairs with one point outside ``K`` are summed in closed form through

    ∫_d^∞ A(c / r^s) dr/r = Ā(c / d^s) / s,

so only ``K × K`` needs numerical integration.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import InvalidParameter, NumericFailure
from .geometry import sphere_area
from .modular import ModularResult
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, Tally, quad
from .testfn import TestFunction
from .young import YoungFunction, abar

MC_BATCH = 1 << 16
RESIDUAL_FLOOR = 1e-300


def _check_s(s):
    if not 0 < s < 1:
        raise InvalidParameter(f"s must lie in (0, 1), got {s}")


def _scalar(A: YoungFunction):
    return lambda t: float(A.eval(t))


def _abar_fn(A: YoungFunction, cfg):
    return lambda t: abar(A, t, cfg) if t > 0 else 0.0


def effective_radius(u: TestFunction, level: float, r_max: float = 1e3):
    """Radius beyond which ``|u| <= level``; None if not reached by ``r_max``."""
    if u.support_radius is not None:
        return u.support_radius
    if u.tail_envelope is None:
        return None
    r = 1.0
    while r <= r_max:
        if u.tail_envelope(r) <= level:
            return r
        r *= 1.25
    return None


def lower_window(A: YoungFunction, s: float, lip: float, budget: float, cfg) -> float:
    """τ₋ with ``Ā(L e^{(1-s)τ₋}) / (1-s) <= budget``.

    For ``r < e^{τ₋}`` the difference quotient is at most ``L r^(1-s)``, so
    this bounds the discarded near-diagonal piece per unit of outer measure.
    """
    if lip == 0:
        return -1.0
    tau = 0.0
    ab = _abar_fn(A, cfg)
    while ab(lip * math.exp((1 - s) * tau)) / (1 - s) > budget:
        tau -= 1.0
        if tau < -700:
            raise NumericFailure("near-diagonal bound does not fall below tolerance")
    return tau


def frac_modular_1d(u: TestFunction, A: YoungFunction, s: float,
                    cfg: QuadratureConfig = DEFAULT_CONFIG) -> ModularResult:
    """J_s(u) on the line.

    Three regimes, chosen from the test function's metadata:

    * compact support (or an envelope that is negligible within |x| <= 10³):
      K × K by nested quadrature plus the closed-form exterior term;
    * otherwise (slowly decaying u such as the counterexample): only
      ``K × K`` with ``K = [-X, X]``, ``X = cfg.outer_truncation``, is
      integrated; the result is a lower bound and is flagged as such.
    """
    _check_s(s)
    if u.dim != 1:
        raise InvalidParameter("frac_modular_1d needs n = 1")
    if u.is_zero or u.lipschitz_constant == 0:
        return ModularResult(0.0, 0.0, 0.0, 0, diagnostics={"mode": "trivial"})
    if u.lipschitz_constant is None:
        raise InvalidParameter("deterministic engine needs a Lipschitz constant")
    R = effective_radius(u, level=cfg.abs_tol * 1e-3)
    lower_bound = R is None
    if lower_bound:
        R = cfg.outer_truncation
    L = u.lipschitz_constant
    Af, ab = _scalar(A), _abar_fn(A, cfg)
    breaks = sorted(u.breakpoints)
    if cfg.log_radius_window is not None:
        tau_lo = cfg.log_radius_window[0]
    else:
        tau_lo = lower_window(A, s, L, cfg.abs_tol / (16.0 * min(R, 1e3)), cfg)
    left_tail = ab(L * math.exp((1 - s) * tau_lo)) / (1 - s)
    uf = lambda x: float(u.eval(x))
    tally = Tally()

    def core_inner(x):
        hi = math.log(R - x) if R - x > 0 else -math.inf
        if hi <= tau_lo:
            return 0.0
        ux = uf(x)
        f = lambda t: Af(abs(ux - uf(x + math.exp(t))) * math.exp(-s * t))
        pts = [math.log(b - x) for b in breaks if b > x]
        if lower_bound and abs(x) > 1:
            pts.append(math.log(abs(x)))  # partner crosses the origin
        v, _ = quad(f, tau_lo, hi, cfg, points=pts, tally=tally)
        return v

    def exterior(x):
        ux = abs(uf(x))
        if ux == 0.0:
            return 0.0
        return (ab(ux / (R - x) ** s) + ab(ux / (R + x) ** s)) / s

    if lower_bound:
        core = _outer_log_line(core_inner, R, breaks, cfg)
        value = 2.0 * core
        err = math.nan
        diag = {"mode": "lower-bound", "outer_truncation": R}
    else:
        outer_pts = breaks
        core, core_err = quad(core_inner, -R, R, cfg, points=outer_pts)
        ext, ext_err = quad(exterior, -R, R, cfg, points=outer_pts)
        value = 2.0 * core + 2.0 * ext
        err = 2.0 * (core_err + ext_err) + 2.0 * (2 * R) * left_tail
        if u.support_radius is None:
            err += _truncation_error(u, A, s, R, cfg)
        diag = {"mode": "compact" if u.support_radius is not None else "effective-support",
                "tau_minus": tau_lo, "near_diagonal_bound": 2.0 * (2 * R) * left_tail}
    return ModularResult(value, err, R, tally.evaluations, diagnostics=diag)


def _outer_log_line(g, X, breaks, cfg):
    """∫_{-X}^{X} g, with x = ±e^σ outside [-1, 1]."""
    x0 = max([1.0] + [abs(b) for b in breaks])
    total, _ = quad(g, -x0, x0, cfg, points=breaks)
    for sign in (1.0, -1.0):
        h = lambda sg, sign=sign: g(sign * math.exp(sg)) * math.exp(sg)
        v, _ = quad(h, math.log(x0), math.log(X), cfg)
        total += v
    return total


def _truncation_error(u, A, s, R, cfg):
    """Crude size of what replacing u by u·1_K changes, from the envelope at R."""
    eps = u.tail_envelope(R)
    if eps == 0:
        return 0.0
    # pairs touching the exterior see differences of at most 2·eps
    return 4.0 * (2 * R) * abar(A, 2 * eps, cfg) / s + 4.0 * eps * R


def frac_modular_radial(u: TestFunction, A: YoungFunction, s: float, n: int | None = None,
                        cfg: QuadratureConfig = DEFAULT_CONFIG, theta_nodes: int = 32) -> ModularResult:
    """J_s(u) for radial u in n = 2, 3 by nested (ρ, τ, θ) quadrature.

    With ``y = x + rω`` and θ the angle between ω and x, the partner radius is
    ``ρ' = sqrt(ρ² + r² + 2ρr cos θ)``; the θ integral is done with
    Gauss–Legendre, split where ρ' crosses the truncation radius.
    """
    _check_s(s)
    n = u.dim if n is None else n
    if n not in (2, 3) or u.dim != n:
        raise InvalidParameter("frac_modular_radial needs n in {2, 3} matching u")
    if u.is_zero or u.lipschitz_constant == 0:
        return ModularResult(0.0, 0.0, 0.0, 0, diagnostics={"mode": "trivial"})
    if u.profile is None:
        raise InvalidParameter("frac_modular_radial needs a radial test function")
    R = effective_radius(u, level=cfg.abs_tol * 1e-3)
    if R is None:
        raise NumericFailure("radial engine needs compact or fast-decaying u")
    L = u.lipschitz_constant
    S_n, S_nm1 = sphere_area(n), sphere_area(n - 1)
    ab = _abar_fn(A, cfg)
    if cfg.log_radius_window is not None:
        tau_lo = cfg.log_radius_window[0]
    else:
        tau_lo = lower_window(A, s, L, cfg.abs_tol / (16.0 * R**n), cfg)
    gx, gw = np.polynomial.legendre.leggauss(theta_nodes)
    prof = lambda r: np.asarray(u.profile(r), dtype=float)
    tally = Tally()

    def theta_integral(rho, uro, r):
        # split [0, π] where ρ' = R
        cut = (R * R - rho * rho - r * r) / (2 * rho * r) if rho > 0 else 2.0
        edges = [0.0, math.pi]
        if -1 < cut < 1:
            edges = [0.0, math.acos(cut), math.pi]
        total = 0.0
        for a, b in zip(edges, edges[1:]):
            th = 0.5 * (b - a) * gx + 0.5 * (b + a)
            w = 0.5 * (b - a) * gw
            rp = np.sqrt(np.maximum(rho * rho + r * r + 2 * rho * r * np.cos(th), 0.0))
            inside = rp <= R
            up = np.where(inside, prof(np.minimum(rp, R)), 0.0)
            vals = np.asarray(A.eval(np.abs(uro - up) * r ** (-s)))
            vals = np.where(inside, vals, 2.0 * vals)
            if n == 3:
                vals = vals * np.sin(th)
            total += float(np.dot(w, vals))
        return S_nm1 * total

    def H(rho):
        uro = float(prof(rho))
        hi = math.log(R + rho)
        f = lambda t: theta_integral(rho, uro, math.exp(t))
        pts = [math.log(R - rho)] if R - rho > 0 and math.log(R - rho) > tau_lo else []
        if rho > 0 and math.log(rho) > tau_lo:
            pts.append(math.log(rho))
        v, _ = quad(f, tau_lo, hi, cfg, points=pts, tally=tally)
        far = 2.0 * S_n * ab(abs(uro) / (R + rho) ** s) / s
        return v + far

    value, err = quad(lambda rho: S_n * rho ** (n - 1) * H(rho), 0.0, R, cfg)
    left_tail = ab(L * math.exp((1 - s) * tau_lo)) / (1 - s)
    err += S_n * S_n * R**n / n * left_tail
    if u.support_radius is None:
        eps = u.tail_envelope(R)
        err += 4.0 * S_n * R**n * abar(A, 2 * eps, cfg) / s
    return ModularResult(value, err, R, tally.evaluations,
                         diagnostics={"mode": "radial", "tau_minus": tau_lo, "theta_nodes": theta_nodes})


def _worker_count():
    try:
        return max(1, int(os.environ.get("ORLICZ_FRAC_THREADS", "1")))
    except ValueError:
        return 1


def mc_window(u: TestFunction, A: YoungFunction, s: float, R: float, cfg: QuadratureConfig):
    """Auto-sized (τ₋, τ₊) so each discarded tail is below abs_tol/4."""
    if cfg.log_radius_window is not None:
        return cfg.log_radius_window
    n = u.dim
    vol = (2 * R) ** n
    budget = cfg.abs_tol / 4.0
    tau_lo = lower_window(A, s, u.lipschitz_constant, budget / (vol * sphere_area(n)), cfg)
    ab = _abar_fn(A, cfg)
    M = u.sup_norm
    tau_hi = math.log(2 * R) + 1.0
    # beyond τ₊ the quotient is at most 2M e^{-sτ}
    while vol * sphere_area(n) * 2.0 * ab(2 * M * math.exp(-s * tau_hi)) / s > budget:
        tau_hi += 1.0
        if tau_hi > 700:
            break
    return tau_lo, tau_hi


def frac_modular_mc(u: TestFunction, A: YoungFunction, s: float, n: int | None = None,
                    cfg: QuadratureConfig = DEFAULT_CONFIG) -> ModularResult:
    """Monte Carlo estimate of J_s(u).

    ``z = y - x`` is drawn with log-uniform radius on ``[e^τ₋, e^τ₊]`` and a
    uniform direction, so the density cancels the kernel ``|z|^-n``; ``x`` is
    uniform on the box ``[-R, R]^n`` around the (effective) support ``K``.
    Pairs with ``y ∉ K`` get weight 2 to account for the mirrored pairs with
    ``x ∉ K``.  Batches use independent child seeds of ``cfg.rng_seed`` so
    the result does not depend on the thread count.
    """
    _check_s(s)
    n = u.dim if n is None else n
    if u.dim != n or n > 3:
        raise InvalidParameter("frac_modular_mc needs n <= 3 matching u")
    if cfg.mc_samples < 10_000:
        raise InvalidParameter("Monte Carlo needs mc_samples >= 1e4")
    if u.is_zero or u.lipschitz_constant == 0:
        return ModularResult(0.0, 0.0, 0.0, 0, method="MonteCarlo", standard_error=0.0)
    if u.sup_norm is None:
        raise InvalidParameter("Monte Carlo needs a sup-norm bound")
    R = effective_radius(u, level=cfg.abs_tol * 1e-3)
    if R is None:
        R = cfg.outer_truncation
        if R > 1e6:
            raise NumericFailure("Monte Carlo box too large for a slowly decaying function")
    tau_lo, tau_hi = mc_window(u, A, s, R, cfg)
    weight = (2 * R) ** n * (tau_hi - tau_lo) * sphere_area(n)

    def radius(x):
        return np.abs(x[:, 0]) if n == 1 else np.linalg.norm(x, axis=1)

    def ev(x):
        return np.asarray(u.eval(x[:, 0] if n == 1 else x), dtype=float)

    def batch(seed_seq, size):
        rng = np.random.Generator(np.random.PCG64(seed_seq))
        x = rng.uniform(-R, R, size=(size, n))
        tau = rng.uniform(tau_lo, tau_hi, size=size)
        d = rng.standard_normal(size=(size, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = np.exp(tau)
        y = x + r[:, None] * d
        in_x = radius(x) <= R
        in_y = radius(y) <= R
        ux = np.where(in_x, ev(x), 0.0)
        uy = np.where(in_y, ev(y), 0.0)
        with np.errstate(under="ignore"):
            vals = np.asarray(A.eval(np.abs(ux - uy) * np.exp(-s * tau)), dtype=float)
        vals = np.where(in_x, np.where(in_y, vals, 2.0 * vals), 0.0)
        return math.fsum(vals), math.fsum(vals * vals)

    total = cfg.mc_samples
    sizes = [MC_BATCH] * (total // MC_BATCH)
    if total % MC_BATCH:
        sizes.append(total % MC_BATCH)
    seeds = np.random.SeedSequence(cfg.rng_seed).spawn(len(sizes))
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(batch, seeds, sizes))
    else:
        parts = [batch(sq, sz) for sq, sz in zip(seeds, sizes)]
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / total
    var = max(s2 / total - mean * mean, 0.0)
    value = weight * mean
    se = weight * math.sqrt(var / total)
    diag = {"tau_window": [tau_lo, tau_hi], "box_half_width": R}
    if value > 0 and se / value > cfg.rel_tol:
        diag["warning"] = "relative standard error above rel_tol"
    return ModularResult(value, 3.0 * se, R, total, method="MonteCarlo", standard_error=se,
                         diagnostics=diag)


def _radial_outer(u: TestFunction, h, cfg: QuadratureConfig):
    """``∫_{R^n} h(x) dx`` for h depending on |x| (and u), singular-safe at 0."""
    n = u.dim
    R = effective_radius(u, level=cfg.abs_tol * 1e-6)
    if R is None:
        raise NumericFailure("identity check needs compact or fast-decaying u")
    if n == 1:
        pts = [b for b in u.breakpoints]
        left, e1 = quad(lambda x: h(x), -R, 0.0, cfg, points=pts)
        right, e2 = quad(lambda x: h(x), 0.0, R, cfg, points=pts)
        return left + right, e1 + e2
    S = sphere_area(n)
    v, e = quad(lambda r: S * h(r) * r ** (n - 1), 0.0, R, cfg)
    return v, e


def _value_at(u: TestFunction, x):
    if u.dim == 1:
        return abs(float(u.eval(x)))
    return abs(float(u.profile(abs(x))))


def shell_identity_residual(u: TestFunction, A: YoungFunction, s: float, n: int | None = None,
                            cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Relative gap between the two sides of the exact shell identity

    ``∫∫_{|x-y|>2|x|} A(|u(x)|/|x-y|^s) dy/|x-y|^n dx
      = (|S^(n-1)|/s) ∫ Ā(|u(x)|/(2^s |x|^s)) dx``.

    The left side integrates ``A(|u(x)| e^{-sτ})`` over ``τ > log 2|x|``
    numerically; the right side uses Ā directly.
    """
    _check_s(s)
    n = u.dim if n is None else n
    if n != u.dim or (n > 1 and u.profile is None):
        raise InvalidParameter("shell identity needs n = 1 or a radial u")
    if u.is_zero:
        return 0.0
    S = sphere_area(n)
    Af, ab = _scalar(A), _abar_fn(A, cfg)
    inner_cfg = cfg.replace(abs_tol=cfg.abs_tol * 1e-3)

    def lhs_inner(x):
        c = _value_at(u, x)
        rx = abs(x)
        if c == 0.0 or rx == 0.0:
            return 0.0
        # A(t) <= t·A(c)/c on [0, c]: the tail past τ_hi is at most A(c) e^{-sτ_hi}/s
        t0 = math.log(2 * rx)
        tau_hi = t0 + 1.0
        Ac = Af(c)
        while Ac * math.exp(-s * tau_hi) / s > inner_cfg.abs_tol * 1e-3 and tau_hi < t0 + 4000 / s:
            tau_hi += 5.0
        v, _ = quad(lambda t: Af(c * math.exp(-s * t)), t0, tau_hi, inner_cfg)
        return S * v

    def rhs_inner(x):
        c = _value_at(u, x)
        rx = abs(x)
        if c == 0.0 or rx == 0.0:
            return 0.0
        return S / s * ab(c / (2.0 * rx) ** s)

    lhs, _ = _radial_outer(u, lhs_inner, cfg)
    rhs, _ = _radial_outer(u, rhs_inner, cfg)
    return abs(lhs - rhs) / max(rhs, RESIDUAL_FLOOR)


def radial_identity_residual(A: YoungFunction, rho: float, t: float, s: float, eps: float = 0.0,
                             cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Relative gap in ``∫_t^∞ A((1+ε)ρ/r^s) dr/r = Ā((1+ε)ρ/t^s) / s``."""
    _check_s(s)
    if not (rho > 0 and t > 0 and eps >= 0):
        raise InvalidParameter("need rho > 0, t > 0, eps >= 0")
    c = (1.0 + eps) * rho
    Af = _scalar(A)
    lhs, _ = quad(lambda tau: Af(c * math.exp(-s * tau)), math.log(t), math.inf, cfg,
                  epsabs=0.0, epsrel=min(cfg.rel_tol, 1e-12))
    rhs = abar(A, c / t**s, cfg) / s
    return abs(lhs - rhs) / max(rhs, RESIDUAL_FLOOR)
