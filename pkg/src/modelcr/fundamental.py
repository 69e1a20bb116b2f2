"""Fundamental solutions of the sub-Laplacian on the boundary of the model domain.

k = 1 has a closed form.  For general k the kernel is a double integral over
[0, 1]^2.  Two independent quadratures are provided:

* ``k_lambda_integral``: tanh-sinh in u = s^(1/k), valid for complex lambda;
* ``k0_integral``: Gauss-Jacobi in u with dyadic grading near the diagonal,
  lambda = 0 only.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import BoundaryPoint, KernelParams
from .special import (
    gamma_complex,
    gauss_jacobi_graded_rule,
    gauss_jacobi_rule,
    principal_pow,
    tanh_sinh_rule,
)

NEAR_DIAGONAL = 1e-6
GRADING_THRESHOLD = 0.1


class SingularityError(ValueError):
    """Evaluation requested at (or numerically on top of) the kernel singularity."""


class ConvergenceError(RuntimeError):
    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved relative change {achieved:.3e})")
        self.achieved = achieved


def a_fund_arrays(z, t, w, s, k: int):
    return 0.5 * (np.abs(z) ** (2 * k) + np.abs(w) ** (2 * k) - 1j * (np.asarray(t) - s))


def p_fund_arrays(z, t, w, s, k: int):
    a = a_fund_arrays(z, t, w, s, k)
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    zero_w = w == 0
    if np.any((a == 0) & ~zero_w):
        raise SingularityError("A vanishes with w != 0")
    root = principal_pow(np.where(a == 0, 1.0, a), 1.0 / k)
    return np.where(zero_w, 0.0, z * np.conj(w) / root)


def a_fund(p: BoundaryPoint, q: BoundaryPoint, k: int) -> complex:
    return complex(a_fund_arrays(p.z1, p.t, q.z1, q.t, k))


def p_fund(p: BoundaryPoint, q: BoundaryPoint, k: int) -> complex:
    return complex(p_fund_arrays(p.z1, p.t, q.z1, q.t, k))


def k_lambda_closed_k1(x_prime, t, lam: complex = 0.0):
    """Closed-form kernel as a function of a single point (x', t) != 0."""
    x1, x2 = (np.asarray(c, dtype=float) for c in x_prime)
    t = np.asarray(t, dtype=float)
    r2 = x1 * x1 + x2 * x2
    if np.any((r2 == 0) & (t == 0)):
        raise SingularityError("closed form is singular at the origin")
    lam = complex(lam)
    const = gamma_complex((1 + lam) / 2) * gamma_complex((1 - lam) / 2) / (4 * math.pi**2)
    val = -const * principal_pow(r2 - 1j * t, -(1 + lam) / 2) * principal_pow(r2 + 1j * t, -(1 - lam) / 2)
    return val[()] if np.ndim(val) == 0 else val


def fundamental_solution_k1_arrays(z, t, w, s, lam: complex = 0.0):
    """Closed form as a kernel with pole at (w, s), oriented so Delta_lambda annihilates it."""
    rel_z = np.asarray(z) - w
    rel_t = np.asarray(t) - s + 2 * np.imag(np.asarray(z) * np.conj(w))
    return k_lambda_closed_k1((rel_z.real, rel_z.imag), -rel_t, lam)


def fundamental_solution_k1(p: BoundaryPoint, q: BoundaryPoint, lam: complex = 0.0) -> complex:
    return complex(fundamental_solution_k1_arrays(p.z1, p.t, q.z1, q.t, lam))


# Double integral ------------------------------------------------------------

def _coupling(pp2, u, v, k):
    """prod_{l=1}^{k-1} (1 - e^{2 pi i l / k} |P|^2 u v)^{-1} on the u x v grid."""
    x = pp2 * np.multiply.outer(u, v)
    out = np.ones_like(x, dtype=complex)
    for ell in range(1, k):
        out /= 1 - np.exp(2j * math.pi * ell / k) * x
    return out


def _contract(f1, f2, pp2, u, v, k):
    if k == 1 or pp2 == 0:
        return np.sum(f1) * np.sum(f2)
    return f1 @ _coupling(pp2, u, v, k) @ f2


def _geometric_sum(u, k):
    return sum(u**j for j in range(k))


def _tanh_sinh_integral(P, lam, k, rule):
    a1, b1 = -(1 + lam) / 2, -(1 - lam) / 2
    u, log_u, log_c = rule.nodes, rule.log_nodes, rule.log_complements
    comp = rule.complements
    log_geo = np.log(_geometric_sum(u, k))

    def axis(a, b, pole):
        shape = k * np.exp((k * (a + 1) - 1) * log_u + b * (log_c + log_geo))
        return rule.weights * shape / ((1 - pole) + pole * comp)

    f1 = axis(a1, b1, P)
    f2 = axis(b1, a1, np.conj(P))
    return _contract(f1, f2, abs(P) ** 2, u, u, k)


def _tail_reach(lam, k):
    """Half-width of the tanh-sinh grid so both endpoint tails fall below ~1e-20."""
    decay = min(k * (1 - abs(lam.real)) / 2, (1 - abs(lam.real)) / 2)
    return min(6.5, math.asinh(46.0 / (math.pi * max(decay, 1e-3))))


def _prefactor(a, lam, k):
    g = gamma_complex((1 + lam) / 2) * gamma_complex((1 - lam) / 2)
    return principal_pow(a, -(1 - lam) / 2) * principal_pow(np.conj(a), -(1 + lam) / 2) / (4 * k * math.pi**2 * g)


def _pair_data(z, t, w, s, k):
    a = complex(a_fund_arrays(z, t, w, s, k))
    if a == 0:
        raise SingularityError("coincident points")
    P = complex(p_fund_arrays(z, t, w, s, k))
    if abs(1 - P) < NEAR_DIAGONAL:
        raise SingularityError(f"|1 - P| = {abs(1 - P):.2e} is below the near-diagonal cutoff")
    return a, P


def k_lambda_value(z, t, w, s, lam, k, step):
    """Double-integral kernel with a fixed tanh-sinh step (no refinement)."""
    lam = complex(lam)
    a, P = _pair_data(z, t, w, s, k)
    rule = tanh_sinh_rule(step, _tail_reach(lam, k))
    return complex(_prefactor(a, lam, k) * _tanh_sinh_integral(P, lam, k, rule))


def k_lambda_integral(
    p: BoundaryPoint,
    q: BoundaryPoint,
    params: KernelParams = KernelParams(),
    tol: float = 1e-8,
    max_halvings: int = 7,
    return_error: bool = False,
):
    """Double-integral fundamental solution with pole at q, refined until the relative change is below tol."""
    params.check_integral_range()
    lam, k = params.lam, params.k
    a, P = _pair_data(p.z1, p.t, q.z1, q.t, k)
    pref = _prefactor(a, lam, k)
    reach = _tail_reach(lam, k)
    step = 0.5
    prev = pref * _tanh_sinh_integral(P, lam, k, tanh_sinh_rule(step, reach))
    change = math.inf
    for _ in range(max_halvings):
        step /= 2
        cur = pref * _tanh_sinh_integral(P, lam, k, tanh_sinh_rule(step, reach))
        change = abs(cur - prev) / max(abs(cur), 1e-300)
        prev = cur
        if change <= tol:
            break
    else:
        raise ConvergenceError("k_lambda_integral did not converge", change)
    value = complex(prev)
    return (value, change * abs(value)) if return_error else value


def _chebyshev_rule(order, k, P):
    alpha, beta = k / 2 - 1, -0.5
    if abs(1 - P) < GRADING_THRESHOLD:
        return gauss_jacobi_graded_rule(order, alpha, beta, abs(1 - P))
    return gauss_jacobi_rule(order, alpha, beta)


def _chebyshev_integral(P, k, order):
    rule = _chebyshev_rule(order, k, P)
    u, comp = rule.nodes, rule.complements
    shape = rule.weights * k * _geometric_sum(u, k) ** -0.5
    f1 = shape / ((1 - P) + P * comp)
    f2 = shape / ((1 - np.conj(P)) + np.conj(P) * comp)
    return _contract(f1, f2, abs(P) ** 2, u, u, k)


def k0_value(z, t, w, s, k, order):
    """lambda = 0 kernel with a fixed Gauss-Jacobi order per panel (no refinement)."""
    a, P = _pair_data(z, t, w, s, k)
    return complex(_chebyshev_integral(P, k, order) / (4 * k * math.pi**3 * abs(a)))


def k0_integral(
    p: BoundaryPoint,
    q: BoundaryPoint,
    k: int = 1,
    tol: float = 1e-8,
    start_order: int = 16,
    max_order: int = 1024,
    return_error: bool = False,
):
    """lambda = 0 fundamental solution with Chebyshev weights, refined by order doubling."""
    a, P = _pair_data(p.z1, p.t, q.z1, q.t, k)
    scale = 1.0 / (4 * k * math.pi**3 * abs(a))
    order = start_order
    prev = scale * _chebyshev_integral(P, k, order)
    change = math.inf
    while order < max_order:
        order *= 2
        cur = scale * _chebyshev_integral(P, k, order)
        change = abs(cur - prev) / max(abs(cur), 1e-300)
        prev = cur
        if change <= tol:
            break
    else:
        raise ConvergenceError("k0_integral did not converge", change)
    value = complex(prev)
    return (value, change * abs(value)) if return_error else value


def converged_k0_order(p: BoundaryPoint, q: BoundaryPoint, k: int, tol: float = 1e-13) -> int:
    """Smallest doubling order at which k0 changes by less than tol; used to freeze a rule for stencils."""
    a, P = _pair_data(p.z1, p.t, q.z1, q.t, k)
    order = 16
    prev = _chebyshev_integral(P, k, order)
    while order < 1024:
        cur = _chebyshev_integral(P, k, 2 * order)
        if abs(cur - prev) <= tol * abs(cur):
            return 2 * order
        order *= 2
        prev = cur
    raise ConvergenceError("no stable order found", abs(cur - prev) / abs(cur))
