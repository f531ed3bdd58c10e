"""Reproducible admissible test profiles.

The generator is the 64-bit linear congruential recurrence

    state <- (6364136223846793005 * state + 1442695040888963407) mod 2^64

with uniforms taken from the top 53 bits, so the same seed yields the same
profiles in any language.
"""

import numpy as np

from .profiles import RadialProfile

_A = 6364136223846793005
_C = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg64:
    def __init__(self, seed):
        self.state = int(seed) & _MASK

    def next_u64(self):
        self.state = (_A * self.state + _C) & _MASK
        return self.state

    def uniform(self):
        """Uniform on [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) / float(1 << 53)

    def uniform_in(self, lo, hi):
        return lo + (hi - lo) * self.uniform()


def polynomial_profile(R, s, c1, c2, label=None):
    """p(r) = (R - r) r^s (1 + c1 x + c2 x^2) with x = r/R."""

    def value(r):
        r = np.asarray(r, dtype=float)
        x = r / R
        return (R - r) * r ** s * (1 + c1 * x + c2 * x * x)

    def derivative(r):
        r = np.asarray(r, dtype=float)
        x = r / R
        poly = 1 + c1 * x + c2 * x * x
        dpoly = (c1 + 2 * c2 * x) / R
        rs = r ** s
        drs = s * r ** (s - 1) if s != 0 else np.zeros_like(r)
        return -rs * poly + (R - r) * (drs * poly + rs * dpoly)

    # the same in x = exp(-sigma), sigma = -log(r/R); x underflows to 0 harmlessly
    scale = R ** (1 + s)

    def log_value(sigma):
        x = np.exp(-np.asarray(sigma, dtype=float))
        return scale * (1 - x) * x ** s * (1 + c1 * x + c2 * x * x)

    def log_slope(sigma):
        x = np.exp(-np.asarray(sigma, dtype=float))
        poly = 1 + c1 * x + c2 * x * x
        xpoly = c1 * x + 2 * c2 * x * x
        xs = x ** s
        return scale * (-x * xs * poly + (1 - x) * xs * (s * poly + xpoly))

    return RadialProfile(
        value=value,
        derivative=derivative,
        domain=(0.0, R),
        log_value=log_value,
        log_slope=log_slope,
        label=label or f"poly[s={s},c1={c1:.6g},c2={c2:.6g}]",
        zero_at_right_endpoint=True,
        value_at_origin=float(R) if s == 0 else 0.0,
    )


def seeded_profiles(R, count, rng, powers=(1, 2)):
    """``count`` polynomial profiles; s drawn from ``powers``, c1, c2 from [-1/2, 1/2]."""
    out = []
    for _ in range(count):
        s = powers[min(int(rng.uniform() * len(powers)), len(powers) - 1)]
        c1 = rng.uniform_in(-0.5, 0.5)
        c2 = rng.uniform_in(-0.5, 0.5)
        out.append(polynomial_profile(R, s, c1, c2))
    return out
