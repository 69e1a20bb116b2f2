"""Boundary coordinates, the Heisenberg group law, horizontal fields and the quasi-metric.

Points on the boundary of the model domain are stored as ``(z, t)`` with ``z``
complex.  Functions named ``*_arrays`` take broadcastable numpy arrays and are
what the verification sweeps use for large clouds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class BoundaryPoint:
    z: np.ndarray
    t: float

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.z, dtype=complex))
        if z.ndim != 1 or z.size < 1:
            raise ValueError("z must be a non-empty vector")
        if not (np.all(np.isfinite(z)) and np.isfinite(self.t)):
            raise ValueError("boundary point components must be finite")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def from_real(cls, x1: float, x2: float, t: float) -> "BoundaryPoint":
        return cls(np.array([complex(x1, x2)]), t)

    @property
    def n(self) -> int:
        return self.z.size

    @property
    def z1(self) -> complex:
        """The single horizontal coordinate of an n = 1 point."""
        if self.n != 1:
            raise ValueError("expected a point with n = 1")
        return complex(self.z[0])


@dataclass(frozen=True)
class KernelParams:
    k: int = 1
    n: int = 1
    lam: complex = 0.0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be an integer >= 1")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be an integer >= 1")
        object.__setattr__(self, "lam", complex(self.lam))

    def check_integral_range(self):
        if not abs(self.lam.real) < 1:
            raise ValueError("integral kernels need |Re lambda| < 1")


@dataclass(frozen=True)
class QuasiMetricParts:
    sigma: float
    rho: float
    h: float
    d: float


def heisenberg_multiply(x: BoundaryPoint, y: BoundaryPoint) -> BoundaryPoint:
    """Group product; the twist is 2 Im(z . conj(w)) = 2 sum(x_{n+j} y_j - x_j y_{n+j})."""
    if x.n != y.n:
        raise ValueError("dimension mismatch")
    twist = 2.0 * float(np.sum(_im_z_wbar(x.z, y.z)))
    return BoundaryPoint(x.z + y.z, x.t + y.t + twist)


def heisenberg_inverse(x: BoundaryPoint) -> BoundaryPoint:
    return BoundaryPoint(-x.z, -x.t)


def relative_point(p: BoundaryPoint, q: BoundaryPoint) -> BoundaryPoint:
    """``q^{-1} o p``, the position of p seen from q."""
    return heisenberg_multiply(heisenberg_inverse(q), p)


def dilate(p: BoundaryPoint, r: float, k: int = 1) -> BoundaryPoint:
    return BoundaryPoint(r * p.z, r ** (2 * k) * p.t)


def _im_z_wbar(z, w):
    # spelled out in real parts so the diagonal z = w gives exactly zero
    z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
    return z.imag * w.real - z.real * w.imag


def sigma_arrays(z, t, w, s, k: int):
    z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
    if k == 1:
        return t - s + 2.0 * _im_z_wbar(z, w)
    zk, wk = z**k, w**k
    return t - s + 2.0 * _im_z_wbar(zk, wk)


def quasi_metric_arrays(z, t, w, s, k: int):
    """Vectorised ``(sigma, rho, h, d)``; coincident points give zeros."""
    z, t, w, s = np.broadcast_arrays(*(np.asarray(a) for a in (z, t, w, s)))
    sigma = sigma_arrays(z, t, w, s, k)
    rho = np.abs(z) + np.abs(w) + np.abs(sigma) ** (1.0 / (2 * k))
    gap = np.abs(z - w) ** 2
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        h = gap * rho ** (2 * k - 2) + np.abs(sigma)
        # d = h^2 rho^(2-2k) regrouped so tiny rho cannot produce 0 * inf
        root_d = gap * rho ** (k - 1) + np.where(sigma == 0, 0.0, np.abs(sigma) * rho ** (1 - k))
        d = np.where(rho > 0, root_d**2, 0.0)
    h = np.where(rho > 0, h, 0.0)
    return sigma, rho, h, d


def sigma_twist(p: BoundaryPoint, q: BoundaryPoint, k: int) -> float:
    return float(sigma_arrays(p.z1, p.t, q.z1, q.t, k))


def quasi_metric(p: BoundaryPoint, q: BoundaryPoint, k: int) -> QuasiMetricParts:
    parts = quasi_metric_arrays(p.z1, p.t, q.z1, q.t, k)
    return QuasiMetricParts(*(float(v) for v in parts))


# Horizontal fields and finite differences ---------------------------------

FIELDS = ("X1", "X2")


def horizontal_field_coeffs(which: str, x1, x2, k: int):
    """Coefficients ``(d/dx1, d/dx2, d/dt)`` of X1 or X2 at (x1, x2)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    radial = (x1 * x1 + x2 * x2) ** (k - 1) if k > 1 else np.ones_like(x1)
    if which == "X1":
        return np.ones_like(x1), np.zeros_like(x1), 2 * k * x2 * radial
    if which == "X2":
        return np.zeros_like(x1), np.ones_like(x1), -2 * k * x1 * radial
    raise ValueError(f"unknown field {which!r}; expected X1 or X2")


def _check_step(h, points):
    scale = max(1.0, float(np.max(np.abs(points))))
    if not h >= 1e-7 * scale:
        raise ValueError(f"finite-difference step {h} too small for scale {scale}")


def _shift(which, pts, h, k, sign):
    c1, c2, ct = horizontal_field_coeffs(which, pts[..., 0], pts[..., 1], k)
    return pts + sign * h * np.stack([c1, c2, ct], axis=-1)


def apply_field_fd(which: str, f: Callable, x, h: float, k: int = 1):
    """Central difference of ``f(x1, x2, t)`` along the field direction at x."""
    x = np.asarray(x, dtype=float)
    _check_step(h, x)
    plus = _shift(which, x, h, k, +1)
    minus = _shift(which, x, h, k, -1)
    return (f(*np.moveaxis(plus, -1, 0)) - f(*np.moveaxis(minus, -1, 0))) / (2 * h)


def second_field_fd(first: str, second: str, f: Callable, points, h: float, k: int = 1):
    """``first(second f)`` at each row of ``points`` by composed central differences.

    The inner field is re-evaluated at the shifted points, so the result is the
    true composition, not a product of constant-coefficient differences.
    """
    pts = np.asarray(points, dtype=float)
    _check_step(h, pts)
    outer = np.stack([_shift(first, pts, h, k, +1), _shift(first, pts, h, k, -1)])
    inner = np.stack([_shift(second, outer, h, k, +1), _shift(second, outer, h, k, -1)])
    vals = f(*np.moveaxis(inner, -1, 0))
    inner_diff = (vals[0] - vals[1]) / (2 * h)
    return (inner_diff[0] - inner_diff[1]) / (2 * h)


def commutator_fd(f: Callable, points, h: float, k: int = 1):
    return second_field_fd("X1", "X2", f, points, h, k) - second_field_fd("X2", "X1", f, points, h, k)


def delta_lambda_fd(f: Callable, points, h: float, k: int = 1, lam: complex = 0.0):
    """Finite-difference ``1/2 (X1^2 + X2^2) f - (i lam / 2) [X1, X2] f``."""
    sub_laplacian = second_field_fd("X1", "X1", f, points, h, k) + second_field_fd("X2", "X2", f, points, h, k)
    return 0.5 * sub_laplacian - 0.5j * lam * commutator_fd(f, points, h, k)
