"""Principal-branch powers, Gamma/Beta, Jacobi-weighted rules and the elliptic K."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sc


def principal_log(base):
    """Log with argument in (-pi, pi]; a negative real with signed zero imaginary part maps to +pi."""
    b = np.asarray(base, dtype=complex)
    arg = np.angle(b)
    arg = np.where(arg == -np.pi, np.pi, arg)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(b)) + 1j * arg


def principal_pow(base, exponent):
    """``exp(exponent * Log base)`` on the principal branch.

    A zero base gives 0 when Re(exponent) > 0 and raises otherwise.
    """
    b, e = np.broadcast_arrays(np.asarray(base, dtype=complex), np.asarray(exponent, dtype=complex))
    zero = b == 0
    if np.any(zero & (e.real <= 0)):
        raise ValueError("zero base with non-positive real exponent")
    out = np.where(zero, 0.0, np.exp(e * principal_log(np.where(zero, 1.0, b))))
    return out[()] if out.ndim == 0 else out


def gamma_complex(zc):
    z = np.asarray(zc, dtype=complex)
    pole = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(pole):
        raise ValueError("Gamma has a pole at non-positive integers")
    out = sc.gamma(z)
    return out[()] if out.ndim == 0 else out


def beta_complex(a, b):
    return gamma_complex(a) * gamma_complex(b) / gamma_complex(np.asarray(a) + np.asarray(b))


def q_constant() -> float:
    """``Gamma(1/6) / Gamma(2/3) * sqrt(pi) / 4``."""
    return 0.25 * math.gamma(1 / 6) / math.gamma(2 / 3) * math.sqrt(math.pi)


def complete_elliptic_K(modulus: float) -> float:
    """Complete elliptic integral of the first kind in the modulus convention."""
    if not 0 <= modulus < 1:
        raise ValueError("modulus must lie in [0, 1)")
    return float(sc.ellipk(modulus * modulus))


STEP_FOUR_MODULUS = math.sqrt(2) / 4 * (math.sqrt(3) - 1)


# Quadrature rules on [0, 1] ------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """``sum(weights * g(nodes))`` approximates ``int_0^1 x^alpha (1-x)^beta g(x) dx``.

    ``complements`` holds 1 - nodes computed without cancellation.
    """

    nodes: np.ndarray
    weights: np.ndarray
    alpha: float
    beta: float
    order: int
    complements: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.complements is None:
            object.__setattr__(self, "complements", 1.0 - self.nodes)

    def integrate(self, g):
        return np.sum(self.weights * g(self.nodes))


def _check_exponents(alpha, beta):
    if not (alpha > -1 and beta > -1):
        raise ValueError("Jacobi exponents must exceed -1")


def gauss_jacobi_rule(order: int, alpha: float, beta: float) -> QuadratureRule:
    """Gauss rule for weight ``x^alpha (1-x)^beta`` on [0, 1]; exact to degree 2*order-1."""
    _check_exponents(alpha, beta)
    if order < 1:
        raise ValueError("order must be >= 1")
    with np.errstate(invalid="ignore", divide="ignore"):
        # scipy's weight is (1-y)^a (1+y)^b on [-1, 1]; y = 2x - 1 puts beta at x = 1.
        y, w = sc.roots_jacobi(order, beta, alpha)
    nodes = (1 + y) / 2
    complements = (1 - y) / 2
    return QuadratureRule(nodes, w / 2 ** (alpha + beta + 1), alpha, beta, order, complements)


def gauss_jacobi_graded_rule(order: int, alpha: float, beta: float, gap: float) -> QuadratureRule:
    """Composite rule with dyadic panels toward x = 1.

    The last panel has width of order ``gap`` (the distance of a nearby
    singularity from x = 1); each panel uses ``order`` points, Jacobi on the two
    end panels and Legendre in between.
    """
    _check_exponents(alpha, beta)
    levels = max(1, int(math.ceil(math.log2(1.0 / max(gap, 1e-300)))))
    nodes, weights, comps = [], [], []

    first = gauss_jacobi_rule(order, alpha, 0.0)
    # [0, 1/2]: x = s/2
    nodes.append(first.nodes / 2)
    comps.append(1 - first.nodes / 2)
    weights.append(first.weights * 0.5 ** (alpha + 1) * (1 - first.nodes / 2) ** beta)

    legendre = gauss_jacobi_rule(order, 0.0, 0.0)
    for j in range(1, levels):
        left_gap, width = 0.5**j, 0.5 ** (j + 1)
        c = left_gap - width * legendre.nodes  # 1 - x on the panel
        x = 1 - c
        nodes.append(x)
        comps.append(c)
        weights.append(legendre.weights * width * x**alpha * c**beta)

    last = gauss_jacobi_rule(order, 0.0, beta)
    delta = 0.5**levels
    c = delta * last.complements
    x = 1 - c
    nodes.append(x)
    comps.append(c)
    weights.append(last.weights * delta ** (beta + 1) * x**alpha)

    return QuadratureRule(
        np.concatenate(nodes), np.concatenate(weights), alpha, beta, order, np.concatenate(comps)
    )


@dataclass(frozen=True)
class TanhSinhRule:
    """Double-exponential rule on [0, 1] with endpoint data kept in log space.

    ``log_nodes`` and ``log_complements`` let callers form x^a (1-x)^b for
    complex a, b without underflow; ``weights`` are dx/dt * step.
    """

    log_nodes: np.ndarray
    log_complements: np.ndarray
    weights: np.ndarray
    step: float

    @property
    def nodes(self):
        return np.exp(self.log_nodes)

    @property
    def complements(self):
        return np.exp(self.log_complements)


def tanh_sinh_rule(step: float, t_max: float = 6.0) -> TanhSinhRule:
    """x = 1 / (1 + exp(-pi sinh s)), s on a uniform grid of the given step."""
    count = int(math.ceil(t_max / step))
    s = step * np.arange(-count, count + 1)
    g = np.pi * np.sinh(s)
    log_x = -np.logaddexp(0.0, -g)
    log_c = -np.logaddexp(0.0, g)
    log_w = math.log(step) + np.log(np.pi * np.cosh(s)) + log_x + log_c
    return TanhSinhRule(log_x, log_c, np.exp(log_w), step)
