"""Sub-Riemannian geodesics from the origin: multiplicities and lengths.

For k = 1 the geodesics ending at (x', t) correspond to the positive roots of
mu(tau) = |t| / |x'|^2, with lengths sqrt(nu(tau) (|x'|^2 + |t|)).  For k = 2
only the t-axis lengths and the count bounds are available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .special import STEP_FOUR_MODULUS, complete_elliptic_K, q_constant

POLE_GUARD = 1e-9
SMALL = 1e-4


@dataclass(frozen=True)
class GeodesicSolution:
    branch_index: int
    tau: float
    length: float


def _scalar(val):
    return val[()] if val.ndim == 0 else val


def mu_fn(z):
    """z / sin^2 z - cot z, with the removable singularity at 0 filled in."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < SMALL
    if np.any(~small & (np.abs(z - np.pi * np.round(z / np.pi)) < 1e-12)):
        raise ValueError("mu has a pole at nonzero multiples of pi")
    zs = np.where(small, 1.0, z)
    s = np.sin(zs)
    return _scalar(np.where(small, 2 * z / 3 + 4 * z**3 / 45, zs / s**2 - np.cos(zs) / s))


def mu_prime(z):
    """2 (sin z - z cos z) / sin^3 z."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < SMALL
    zs = np.where(small, 1.0, z)
    s = np.sin(zs)
    return _scalar(np.where(small, 2 / 3 + 4 * z**2 / 15, 2 * (s - zs * np.cos(zs)) / s**3))


def nu_fn(z):
    """z^2 / (z + sin^2 z - sin z cos z), equal to 1 at z = 0."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < SMALL
    zs = np.where(small, 1.0, z)
    s, c = np.sin(zs), np.cos(zs)
    denom = zs + s * s - s * c
    if np.any(~small & (np.abs(denom) < 1e-14)):
        raise ValueError("nu denominator vanishes")
    series = 1 / (1 + 2 * z / 3 - z**2 / 3 - 2 * z**3 / 15)
    return _scalar(np.where(small, series, zs * zs / denom))


def critical_point(m: int) -> float:
    """The minimiser x_m of mu on (m pi, (m+1) pi), i.e. the root of tan x = x there."""
    if m < 1:
        raise ValueError("m must be >= 1")
    lo, hi = m * math.pi + 1e-12, m * math.pi + math.pi / 2
    return brentq(lambda x: math.sin(x) - x * math.cos(x), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def mu_root_brackets(ratio: float, m_max: int | None = None):
    """Intervals, each holding exactly one positive root of mu(tau) = ratio.

    One root lies in (0, pi); each later interval (m pi, (m+1) pi) contributes
    two roots when ratio exceeds its minimum mu(x_m) = x_m, one when equal.
    ``ratio == 0`` returns the degenerate root as the interval (0, 0).
    """
    if ratio < 0 or not math.isfinite(ratio):
        raise ValueError("ratio must be finite and non-negative")
    if ratio == 0:
        return [(0.0, 0.0)]
    brackets = [(0.0, math.pi - POLE_GUARD)]
    m = 1
    while m * math.pi < ratio and (m_max is None or m <= m_max):
        xm = critical_point(m)
        low = float(mu_fn(xm))
        if ratio > low:
            brackets.append((m * math.pi + POLE_GUARD, xm))
            brackets.append((xm, (m + 1) * math.pi - POLE_GUARD))
        elif ratio == low:
            brackets.append((xm, xm))
        m += 1
    return brackets


def _solve_in(lo, hi, ratio):
    if lo == hi:
        return lo
    f = lambda x: float(mu_fn(x)) - ratio
    return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def solve_geodesics_k1(x_prime, t: float, m_max: int | None = None):
    """Geodesics from the origin to (x', t), sorted by length (shortest first).

    Without ``m_max`` every root is returned; their number grows like
    |t| / (pi |x'|^2), so near the t-axis pass ``m_max`` to keep only the
    intervals (m pi, (m+1) pi) with m <= m_max.
    """
    r2 = float(x_prime[0]) ** 2 + float(x_prime[1]) ** 2
    if r2 == 0:
        raise ValueError("x' = 0 lies on the t-axis; use taxis_lengths_k1")
    ratio = abs(t) / r2
    taus = [_solve_in(lo, hi, ratio) for lo, hi in mu_root_brackets(ratio, m_max)]
    lengths = [math.sqrt(float(nu_fn(tau)) * (r2 + abs(t))) for tau in taus]
    order = np.argsort(lengths, kind="stable")
    return [GeodesicSolution(i + 1, taus[j], lengths[j]) for i, j in enumerate(order)]


def taxis_lengths_k1(t: float, m_max: int = 50, with_geometry: bool = False):
    """Lengths sqrt(m pi |t|); optionally also projected circle radii and enclosed areas."""
    if t == 0:
        raise ValueError("t must be nonzero")
    m = np.arange(1, m_max + 1)
    lengths = np.sqrt(m * math.pi * abs(t))
    if not with_geometry:
        return lengths
    radii = 0.5 * np.sqrt(abs(t) / (m * math.pi))
    areas = abs(t) / (4 * m)
    return lengths, radii, areas


def cc_distance_k1(x_prime, t: float) -> float:
    r2 = float(x_prime[0]) ** 2 + float(x_prime[1]) ** 2
    if r2 == 0:
        if t == 0:
            raise ValueError("distance to the origin itself")
        return math.sqrt(math.pi * abs(t))
    # every length equals |x'| tau / |sin tau| >= |x'| tau, so branches beyond
    # tau = d(first root) / |x'| cannot be shorter
    r = math.sqrt(r2)
    first = solve_geodesics_k1(x_prime, t, m_max=0)[0].length
    return solve_geodesics_k1(x_prime, t, m_max=int(first / (r * math.pi)) + 1)[0].length


def _action_on_imaginary_axis(phi, r2, t):
    """f(x, i phi) through the complex formula tau (-i t + coth(2 tau) |x'|^2)."""
    if abs(phi) < 1e-8:
        return r2 / 2 + phi * t
    tau = 1j * phi
    return complex(tau * (-1j * t + r2 / np.tanh(2 * tau)))


def _action_slope(phi, r2, t):
    """d/dphi of phi (t + cot(2 phi) |x'|^2)."""
    two = 2 * phi
    return t + r2 * (math.cos(two) / math.sin(two) - two / math.sin(two) ** 2)


def action_identity_check(x_prime, t: float, solutions) -> float:
    """max_j |f(x, i phi_j) - d_j^2 / 2| with phi_j the critical points of f on the imaginary axis.

    Each phi_j is found by its own root solve of df/dphi, started from the
    bracket around sign(t) tau_j / 2.
    """
    r2 = float(x_prime[0]) ** 2 + float(x_prime[1]) ** 2
    worst = 0.0
    sign = 1.0 if t >= 0 else -1.0
    for sol in solutions:
        guess = sign * sol.tau / 2
        phi = guess
        if abs(guess) > 1e-8:
            width = 1e-7 * max(1.0, abs(guess))
            lo, hi = guess - width, guess + width
            if _action_slope(lo, r2, t) * _action_slope(hi, r2, t) < 0:
                phi = brentq(_action_slope, lo, hi, args=(r2, t), xtol=1e-16, rtol=4 * np.finfo(float).eps)
        value = _action_on_imaginary_axis(phi, r2, t)
        worst = max(worst, abs(value - 0.5 * sol.length**2))
    return worst


# k = 2 -----------------------------------------------------------------------

def k2_constants():
    """The pair (K, Q) entering the step-four formulas."""
    return complete_elliptic_K(STEP_FOUR_MODULUS), q_constant()


def k2_taxis_lengths(t: float, m_max: int = 50):
    if t == 0:
        raise ValueError("t must be nonzero")
    K, Q = k2_constants()
    m = np.arange(1, m_max + 1)
    return (m**3 * K**4 * abs(t) / (4 * Q)) ** 0.25


def k2_count_bounds(x_prime, t: float):
    """(m, lower, upper) with (m - 1/2) Q < (3/4) |t| / |x'|^4 <= (m + 1/2) Q."""
    r2 = float(x_prime[0]) ** 2 + float(x_prime[1]) ** 2
    if r2 == 0 or t == 0:
        raise ValueError("need x' != 0 and t != 0")
    Q = q_constant()
    scaled = 0.75 * abs(t) / r2**2 / Q
    if scaled <= 0.5:
        raise ValueError("ratio below the first interval (m would be 0)")
    m = math.ceil(scaled - 0.5)
    return m, 2 * m - 1, 2 * m + 1
