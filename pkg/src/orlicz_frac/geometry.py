"""Unit-ball volumes and sphere areas without a general Gamma function."""

import math


def unit_ball_volume(n: int) -> float:
    """ω_n via ω_n = (2π/n)·ω_(n-2), starting from ω_0 = 1 and ω_1 = 2."""
    if n < 0:
        raise ValueError("dimension must be >= 0")
    w = 1.0 if n % 2 == 0 else 2.0
    for k in range(2 + n % 2, n + 1, 2):
        w *= 2.0 * math.pi / k
    return w


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n, equal to n·ω_n."""
    return n * unit_ball_volume(n)
