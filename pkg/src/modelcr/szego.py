"""Cauchy-Szego kernels for the model domains, the ellipsoid, approximants and projection."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .geometry import BoundaryPoint
from .special import principal_log, principal_pow


class SzegoSingularityError(ValueError):
    pass


@dataclass(frozen=True)
class SiegelPoint:
    """A point ``(z, z_last)`` of C^{n+1}."""

    z: np.ndarray
    z_last: complex

    def __post_init__(self):
        object.__setattr__(self, "z", np.atleast_1d(np.asarray(self.z, dtype=complex)))
        object.__setattr__(self, "z_last", complex(self.z_last))

    @property
    def n(self) -> int:
        return self.z.size

    def height(self, k: int) -> float:
        return self.z_last.imag - float(np.sum(np.abs(self.z) ** 2)) ** k

    @classmethod
    def lift(cls, point: BoundaryPoint, k: int, height: float = 0.0) -> "SiegelPoint":
        """Boundary point raised to the given height above the boundary."""
        r2k = float(np.sum(np.abs(point.z) ** 2)) ** k
        return cls(point.z, complex(point.t, r2k + height))


def a_szego(p: SiegelPoint, q: SiegelPoint) -> complex:
    return 0.5j * (np.conj(q.z_last) - p.z_last)


def _szego_from_parts(a, inner, n, k):
    root = principal_pow(a, 1.0 / k)
    bracket = root - inner
    if np.any(bracket == 0):
        raise SzegoSingularityError("Szego kernel is singular at this configuration")
    const = math.factorial(n) / (4 * math.pi ** (n + 1))
    return const * principal_pow(a, (1.0 - k) / k) / bracket ** (n + 1)


def szego_full(p: SiegelPoint, q: SiegelPoint, n: int, k: int) -> complex:
    if p.n != n or q.n != n:
        raise ValueError("dimension mismatch")
    a = a_szego(p, q)
    if a == 0:
        raise SzegoSingularityError("A vanishes")
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        value = complex(_szego_from_parts(a, np.sum(p.z * np.conj(q.z)), n, k))
    if not cmath.isfinite(value):
        raise SzegoSingularityError("kernel overflows this close to the singularity")
    return value


def szego_boundary(pb: BoundaryPoint, qb: BoundaryPoint, n: int, k: int) -> complex:
    if pb.n != n or qb.n != n:
        raise ValueError("dimension mismatch")
    if np.array_equal(pb.z, qb.z) and pb.t == qb.t:
        raise SzegoSingularityError("coincident boundary points")
    return szego_full(SiegelPoint.lift(pb, k), SiegelPoint.lift(qb, k), n, k)


def szego_boundary_arrays(z, t, w, s, k: int):
    """Vectorised n = 1 boundary kernel."""
    a = 0.5 * (np.abs(z) ** (2 * k) + np.abs(w) ** (2 * k) - 1j * (np.asarray(t) - s))
    return _szego_from_parts(a, np.asarray(z) * np.conj(w), 1, k)


def szego_factorized(pb: BoundaryPoint, qb: BoundaryPoint, k: int) -> complex:
    """n = 1 boundary kernel written as A^{-(k+1)/k} (1 - P)^{-2} / (4 pi^2)."""
    z, w = pb.z1, qb.z1
    a = 0.5 * (abs(z) ** (2 * k) + abs(w) ** (2 * k) - 1j * (pb.t - qb.t))
    P = z * np.conj(w) / principal_pow(a, 1.0 / k)
    return complex(principal_pow(a, -(k + 1) / k) * (1 - P) ** -2 / (4 * math.pi**2))


def szego_heisenberg_alt(p: SiegelPoint, q: SiegelPoint) -> complex:
    """k = 1 kernel in the form with 2^(n-1) n! / pi^(n+1) and the factor 2 inside the bracket."""
    n = p.n
    bracket = 1j * (np.conj(q.z_last) - p.z_last) - 2 * np.sum(p.z * np.conj(q.z))
    return complex(2 ** (n - 1) * math.factorial(n) / math.pi ** (n + 1) * bracket ** (-n - 1))


def s_rho(z, t: float, rho: float, n: int = 1) -> complex:
    """Approximant obtained by lifting the first point to height rho^2 (k = 1)."""
    r2 = float(np.sum(np.abs(np.atleast_1d(z)) ** 2))
    if rho < 0 or (rho == 0 and r2 == 0 and t == 0):
        raise SzegoSingularityError("s_rho needs rho > 0 or a point off the origin")
    const = 2 ** (n - 1) * math.factorial(n) / math.pi ** (n + 1)
    return complex(const * principal_pow(rho * rho + r2 - 1j * t, -n - 1))


def psi_relative(z, t: float, n: int = 1) -> complex:
    r2 = float(np.sum(np.abs(np.atleast_1d(z)) ** 2))
    if r2 == 0 and t == 0:
        raise SzegoSingularityError("psi is singular at the origin")
    const = 2 ** (n - 2) * math.factorial(n - 1) / math.pi ** (n + 1)
    log_factor = principal_log((r2 - 1j * t) / (r2 + 1j * t))
    return complex(const * log_factor * principal_pow(r2 - 1j * t, -n))


# Cayley transform and the ellipsoid -----------------------------------------

def cayley_transform(w, w_last: complex, k: int):
    """Ellipsoid coordinates to the unbounded model domain."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    if w_last == -1:
        raise ValueError("w_last = -1 is mapped to infinity")
    z = w / principal_pow(1 + w_last, 1.0 / k)
    return z, 1j * (1 - w_last) / (1 + w_last)


def inverse_cayley_transform(z, z_last: complex, k: int):
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z_last == -1j:
        raise ValueError("z_last = -i has no preimage")
    w_last = (1j - z_last) / (1j + z_last)
    return z * principal_pow(1 + w_last, 1.0 / k), w_last


def szego_ellipsoid(zp: SiegelPoint, wp: SiegelPoint, n: int, k: int) -> complex:
    base = 1 - zp.z_last * np.conj(wp.z_last)
    if base == 0:
        raise SzegoSingularityError("singular ellipsoid configuration")
    bracket = principal_pow(base, 1.0 / k) - np.sum(zp.z * np.conj(wp.z))
    if bracket == 0:
        raise SzegoSingularityError("singular ellipsoid configuration")
    const = math.factorial(n) / (4 * math.pi ** (n + 1))
    return complex(const * bracket ** (-(n + 1)) * principal_pow(base, -(k - 1) / k))


# Discrete projection on the Heisenberg boundary -----------------------------

@dataclass(frozen=True)
class BoundaryGrid:
    """Tensor grid on [-R, R]^2 x [-T, T] with one spacing for all axes."""

    radius: float = 6.0
    height: float = 30.0
    spacing: float = 0.1

    @property
    def x(self):
        m = int(round(self.radius / self.spacing))
        return self.spacing * np.arange(-m, m + 1)

    @property
    def t(self):
        m = int(round(self.height / self.spacing))
        return self.spacing * np.arange(-m, m + 1)

    def sample(self, func):
        """Evaluate ``func(z, t)`` on the grid; returns shape (nx, nx, nt)."""
        x, t = self.x, self.t
        z = x[:, None] + 1j * x[None, :]
        return func(z[:, :, None], t[None, None, :])


@dataclass(frozen=True)
class ProjectionResult:
    values: np.ndarray
    values_rho: np.ndarray
    values_half_rho: np.ndarray
    error_bound: np.ndarray
    rho: float


def _trapezoid_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return w


def _half_spectrum(samples, grid, chunk=16):
    """Fourier transform in t (positive frequencies only), zero padded to twice the length."""
    t = grid.t
    nt = t.size
    m = 2 * nt
    xi = 2 * math.pi * np.fft.fftfreq(m, d=grid.spacing)
    keep = xi > 0
    phase = np.exp(-1j * xi[keep] * t[0]) * grid.spacing
    out = np.empty(samples.shape[:2] + (int(keep.sum()),), dtype=complex)
    for i in range(0, samples.shape[0], chunk):
        out[i : i + chunk] = np.fft.fft(samples[i : i + chunk], n=m, axis=2)[..., keep] * phase
    return xi[keep], out, 1.0 / (m * grid.spacing)


def _check_rho(rho, grid):
    if rho / 2 < grid.spacing:
        raise ValueError("rho/2 must not be below the grid spacing")


def szego_project(samples, grid: BoundaryGrid, eval_points, rho: float | None = None, xi_chunk: int = 64):
    """Szego projection of boundary samples on a Heisenberg grid, at the requested points.

    The convolution with S_rho is taken exactly in t via the transform
    (2 xi / pi) exp(-(rho^2 + |z|^2) xi) on xi > 0, and by the trapezoidal rule
    in the horizontal variables.  Values at rho and rho/2 are combined by
    Richardson extrapolation in rho^2.

    ``eval_points`` is a sequence of ``(z, t)`` pairs.
    """
    rho = 2 * grid.spacing if rho is None else rho
    _check_rho(rho, grid)
    samples = np.asarray(samples, dtype=complex)
    x = grid.x
    if samples.shape != (x.size, x.size, grid.t.size):
        raise ValueError("samples do not match the grid")
    xi, spectrum, inv_norm = _half_spectrum(samples, grid)
    area = np.outer(_trapezoid_weights(x.size, grid.spacing), _trapezoid_weights(x.size, grid.spacing))
    spectrum = spectrum * area[:, :, None]
    y1, y2 = np.meshgrid(x, x, indexing="ij")

    inner = np.empty((len(eval_points), xi.size), dtype=complex)
    for row, (z, _) in enumerate(eval_points):
        z = complex(z)
        dist2 = (y1 - z.real) ** 2 + (y2 - z.imag) ** 2
        twist = z.imag * y1 - z.real * y2
        expo = -dist2 + 2j * twist
        for j in range(0, xi.size, xi_chunk):
            sl = slice(j, j + xi_chunk)
            inner[row, sl] = np.einsum("abm,abm->m", np.exp(expo[:, :, None] * xi[sl]), spectrum[:, :, sl])

    t_eval = np.array([float(tt) for _, tt in eval_points])
    base = np.exp(1j * np.outer(t_eval, xi)) * (2 * xi / math.pi) * inner * inv_norm
    full = base @ np.exp(-rho * rho * xi)
    half = base @ np.exp(-rho * rho * xi / 4)
    extrapolated = (4 * half - full) / 3
    leak = max(
        np.abs(samples[[0, -1]]).max(),
        np.abs(samples[:, [0, -1]]).max(),
        np.abs(samples[:, :, [0, -1]]).max(),
    )
    bound = np.abs(extrapolated - half) + leak
    return ProjectionResult(extrapolated, full, half, bound, rho)


def szego_project_grid(samples, grid: BoundaryGrid, rho: float | None = None) -> ProjectionResult:
    """Projection evaluated at every grid node (cost grows like nx^4 per frequency; desk scale only)."""
    rho = 2 * grid.spacing if rho is None else rho
    _check_rho(rho, grid)
    samples = np.asarray(samples, dtype=complex)
    x, t = grid.x, grid.t
    xi, spectrum, inv_norm = _half_spectrum(samples, grid)
    wx = _trapezoid_weights(x.size, grid.spacing)
    spectrum = spectrum * np.outer(wx, wx)[:, :, None]
    diff2 = (x[:, None] - x[None, :]) ** 2

    proj_hat = np.empty_like(spectrum)
    for m, frequency in enumerate(xi):
        gauss = np.exp(-frequency * diff2)
        twist = np.exp(2j * frequency * np.outer(x, x))
        proj_hat[:, :, m] = _twisted_contract(gauss, twist, spectrum[:, :, m])
    phases = np.exp(1j * np.outer(xi, t)) * inv_norm
    weight = (2 * xi / math.pi)[:, None] * phases
    full = np.tensordot(proj_hat, weight * np.exp(-rho * rho * xi)[:, None], axes=([2], [0]))
    half = np.tensordot(proj_hat, weight * np.exp(-rho * rho * xi / 4)[:, None], axes=([2], [0]))
    extrapolated = (4 * half - full) / 3
    return ProjectionResult(extrapolated, full, half, np.abs(extrapolated - half), rho)


def _twisted_contract(gauss, twist, f_hat):
    """sum_{b1,b2} g[a1,b1] g[a2,b2] e^{2i xi (a2 b1 - a1 b2)} f[b1,b2] for all (a1, a2)."""
    inner = np.einsum("cd,ad,bd->acb", gauss, np.conj(twist), f_hat, optimize=True)
    return np.einsum("ab,cb,acb->ac", gauss, twist, inner, optimize=True)
