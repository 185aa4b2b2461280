"""mpmath reference values; run as a script to regenerate ``frozen.py``.

Every quantity here is computed from its defining integral or a special
function identity, independently of the package.
"""

import mpmath as mp

mp.mp.dps = 30


def abar_expm1(t):
    # ∫_0^t (e^τ - 1)/τ dτ = Ei(t) - γ_E - log t
    return mp.ei(t) - mp.euler - mp.log(t)


def log_abar_exp_counterexample(gamma, t):
    # Ā(t) = E1(t^-γ)/γ below the convexity window
    return mp.log(mp.e1(t ** -gamma) / gamma)


def counterexample_lower_bound(s, gamma=2, lam=1.5, sigma=0.9, kappa=1e6, alpha=1, n=1):
    c = (mp.mpf(lam) / (2 * mp.mpf(sigma))) ** gamma
    s = mp.mpf(s)
    lo = s * mp.log(4 / (2 - mp.mpf(alpha)))
    f = lambda tau: mp.exp(tau / s - c * mp.exp(gamma * tau) * mp.log(kappa + mp.exp(tau / s)))
    # the integrand is negligible past τ = 5 for these parameters
    return mp.mpf(alpha) ** n / s * mp.quad(f, mp.linspace(lo, 5, 40))


def v_value(x1, gamma=2, kappa=1e6):
    return x1 / (abs(x1) * mp.log(kappa + abs(x1)) ** (1 / mp.mpf(gamma)))


def modular_v_over_lambda(lam=1.5, gamma=2, kappa=1e6):
    # n = 1; inside |x| < 1 the argument stays below the convexity window
    l1 = mp.log(kappa + 1) ** (1 / mp.mpf(gamma))
    inner = mp.quad(lambda x: mp.exp(-((lam * l1 / x) ** gamma)), [0, 0.5, 1])
    # outside: A(v/λ) = (κ + x)^(-λ^γ), integrated in closed form
    e = mp.mpf(lam) ** gamma
    outer = (kappa + 1) ** (1 - e) / (e - 1)
    return 2 * (inner + outer)


def hardy_power2_binv_slope(s=mp.mpf("0.1")):
    # a = 2t, n = 1: every integral in the construction is a power
    q = s / (1 - s)
    Phi_c = 2 ** (-q) / (1 - q)              # Φ(t) = Phi_c t^(1-q)
    e = -(1 - q) / s - 1 / (1 - s)          # outer integrand ∝ t^e
    outer_c = Phi_c ** (-1 / s) * 2 ** (-1 / (1 - s)) / (-(e + 1))
    # b⁻¹(r) = (outer_c T^(e+1))^(s/(s-1)), T = r/2
    return (outer_c * mp.mpf(2) ** (-(e + 1))) ** (s / (s - 1))


def tent_js_power2(s):
    # 2 ∫_0^∞ G(h) dh/h^(1+2s), G(h) = ∫ |u(x+h)-u(x)|² dx; G = 4/3 for h >= 2
    s = mp.mpf(s)
    G = lambda h: mp.quad(lambda x: (max(0, 1 - abs(x + h)) - max(0, 1 - abs(x))) ** 2,
                          sorted({-1 - h, -h, -h / 2, 1 - h, -1, 0, 1}))
    body = mp.quad(lambda h: G(h) * h ** (-1 - 2 * s), [0, 1, 2, 3])
    tail = mp.mpf(4) / 3 * 3 ** (-2 * s) / (2 * s)
    return 2 * (body + tail)


VALUES = {
    "ABAR_EXPM1_1": lambda: abar_expm1(1),
    "LOG_ABAR_EXPCE_G2_T01": lambda: log_abar_exp_counterexample(2, mp.mpf("0.1")),
    "LOWER_BOUND_S020": lambda: counterexample_lower_bound(mp.mpf("0.2")),
    "LOWER_BOUND_S010": lambda: counterexample_lower_bound(mp.mpf("0.1")),
    "LOWER_BOUND_S005": lambda: counterexample_lower_bound(mp.mpf("0.05")),
    "LOWER_BOUND_S0025": lambda: counterexample_lower_bound(mp.mpf("0.025")),
    "V_AT_2": lambda: v_value(2),
    "MODULAR_V_LAMBDA_1_5": modular_v_over_lambda,
    "HARDY_P2_S01_SLOPE": hardy_power2_binv_slope,
    "TENT_JS_POWER2_S05": lambda: tent_js_power2("0.5"),
}

if __name__ == "__main__":
    print('"""Frozen reference values produced by tests/oracles/mp_oracles.py."""\n')
    for name, fn in VALUES.items():
        print(f"{name} = {mp.nstr(fn(), 17)}")
