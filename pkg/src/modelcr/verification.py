"""Numerical certification sweeps.

Every sweep is a pure function of its inputs and a seed, and reduces results
in sample-index order so reports are reproducible bit for bit.  Sweeps only
call the public evaluation functions of the other modules.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .fundamental import (
    a_fund_arrays,
    converged_k0_order,
    fundamental_solution_k1_arrays,
    k0_value,
    k_lambda_value,
    p_fund_arrays,
)
from .geometry import BoundaryPoint, delta_lambda_fd, quasi_metric_arrays
from .szego import BoundaryGrid, szego_boundary_arrays, szego_project

DEFAULT_H_FRACTIONS = (1e-3, 5e-4, 2.5e-4, 1.25e-4)
ROUNDOFF_MARGIN = 10.0


@dataclass
class SweepReport:
    name: str
    samples: int
    statistic: float
    threshold: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return _plain(asdict(self))


def _plain(obj):
    """Convert numpy scalars and arrays into JSON-ready Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


# Sampling -------------------------------------------------------------------

def log_uniform_pairs(rng: np.random.Generator, count: int, k: int, near_fraction: float = 1 / 3):
    """Pairs (z, t), (w, s) with |z|, |w|, |t - s|^(1/2k) log-uniform on [1e-2, 1e2].

    A fraction of the pairs is drawn close to the diagonal so the two-sided
    comparisons are exercised where the kernel is large.
    """
    def modulus(size):
        return 10 ** rng.uniform(-2, 2, size)

    def phase(size):
        return np.exp(2j * math.pi * rng.random(size))

    def signs(size):
        return rng.choice([-1.0, 1.0], size)

    z = modulus(count) * phase(count)
    w = modulus(count) * phase(count)
    s = signs(count) * modulus(count) ** (2 * k)
    dt = signs(count) * modulus(count) ** (2 * k)
    near = int(count * near_fraction)
    if near:
        eps = 10 ** rng.uniform(-4, 0, near)
        w[:near] = z[:near] * (1 + eps * phase(near))
        twist = 2 * np.imag(z[:near] ** k * np.conj(w[:near]) ** k)
        dt[:near] = signs(near) * (eps * rng.random(near) * np.abs(z[:near])) ** (2 * k) - twist * rng.random(near)
    t = s + dt
    keep = (z != w) | (t != s)
    return z[keep], t[keep], w[keep], s[keep]


def admissible_triples(rng: np.random.Generator, count: int, k: int, c: float = 0.01):
    """Triples (p, q0, q1) with d(q1, q0) <= c d(p, q0), by rejection sampling."""
    zs, ts, ws, ss, w1s, s1s = ([] for _ in range(6))
    have = 0
    while have < count:
        batch = 2 * (count - have) + 64
        z, t, w, s = log_uniform_pairs(rng, batch, k)
        _, rho, _, _ = quasi_metric_arrays(z, t, w, s, k)
        eps = 10 ** rng.uniform(-6, -0.5, z.size) * rho
        w1 = w + eps * rng.random(z.size) * np.exp(2j * math.pi * rng.random(z.size))
        s1 = s + rng.choice([-1.0, 1.0], z.size) * (eps * rng.random(z.size)) ** (2 * k)
        d_far = quasi_metric_arrays(z, t, w, s, k)[3]
        d_near = quasi_metric_arrays(w1, s1, w, s, k)[3]
        ok = (d_near <= c * d_far) & (d_near > 0)
        for arr, src in ((zs, z), (ts, t), (ws, w), (ss, s), (w1s, w1), (s1s, s1)):
            arr.append(src[ok])
        have += int(ok.sum())
    cat = [np.concatenate(a)[:count] for a in (zs, ts, ws, ss, w1s, s1s)]
    return tuple(cat)


# Sweeps -----------------------------------------------------------------------

def size_estimate_sweep(k: int, z, t, w, s, band: float = 1e3) -> SweepReport:
    """sup and inf of |S(p; q)| d(p, q); passes when sup/inf < band."""
    d = quasi_metric_arrays(z, t, w, s, k)[3]
    prod = np.abs(szego_boundary_arrays(z, t, w, s, k)) * d
    lo, hi = float(prod.min()), float(prod.max())
    ratio = hi / lo if lo > 0 else math.inf
    return SweepReport(
        f"size_estimate_k{k}",
        int(prod.size),
        ratio,
        band,
        bool(math.isfinite(ratio) and ratio < band),
        {"inf": lo, "sup": hi, "argmin": int(prod.argmin()), "argmax": int(prod.argmax())},
    )


def _envelope_slope(x, y, bins=12, min_count=5):
    """Slope of the upper envelope of y against x (per-bin maxima, least squares)."""
    if x.size < 3 * min_count:
        return math.nan
    edges = np.linspace(x.min(), x.max(), bins + 1)
    idx = np.clip(np.digitize(x, edges) - 1, 0, bins - 1)
    cx, cy = [], []
    for b in range(bins):
        sel = idx == b
        if sel.sum() >= min_count:
            j = np.argmax(np.where(sel, y, -np.inf))
            cx.append(x[j])
            cy.append(y[j])
    if len(cx) < 3:
        return math.nan
    return float(np.polyfit(cx, cy, 1)[0])


def holder_estimate_sweep(k: int, z, t, w0, s0, w1, s1, c: float = 0.01, argument: str = "second") -> SweepReport:
    """Hoelder regularity of S in one argument for triples with d(q1, q0) <= c d(p, q0).

    For ``argument="first"`` the roles are mirrored: the perturbed point is the
    first argument and the fixed point the second.
    """
    d_far = quasi_metric_arrays(z, t, w0, s0, k)[3]
    d_near = quasi_metric_arrays(w1, s1, w0, s0, k)[3]
    if np.any(d_near > c * d_far):
        raise ValueError("triple constraint d(q1, q0) <= c d(p, q0) violated")
    if argument == "second":
        diff = szego_boundary_arrays(z, t, w1, s1, k) - szego_boundary_arrays(z, t, w0, s0, k)
    elif argument == "first":
        diff = szego_boundary_arrays(w1, s1, z, t, k) - szego_boundary_arrays(w0, s0, z, t, k)
    else:
        raise ValueError("argument must be 'first' or 'second'")
    exponent = 1.0 / (2 * k + 2)
    ratio = d_near / d_far
    scaled = np.abs(diff) * d_far
    positive = scaled > 0
    stat = np.zeros_like(scaled)
    stat[positive] = scaled[positive] / ratio[positive] ** exponent
    slope = _envelope_slope(np.log10(ratio[positive]), np.log10(scaled[positive]))
    sup = float(stat.max())
    ok = math.isfinite(sup) and math.isfinite(slope) and slope >= exponent - 0.05
    return SweepReport(
        f"holder_estimate_k{k}_{argument}",
        int(stat.size),
        slope,
        exponent - 0.05,
        bool(ok),
        {"sup": sup, "target_exponent": exponent, "c": c},
    )


COMPARABILITY_RATIOS = (
    ("zk_minus_wk_sq_over_h", "upper"),
    ("h_over_rho2k", "upper"),
    ("rho2k_over_absA", "band"),
    ("one_minus_P_absA_over_h", "band"),
)


def comparability_ratio_sweep(k: int, z, t, w, s, upper: float = 1e2, band: float = 1e2) -> SweepReport:
    """The four comparisons between h, rho, A and P; 'upper' ratios need a finite sup, 'band' ones sup/inf < band."""
    _, rho, h, _ = quasi_metric_arrays(z, t, w, s, k)
    abs_a = np.abs(a_fund_arrays(z, t, w, s, k))
    one_minus_p = np.abs(1 - p_fund_arrays(z, t, w, s, k))
    values = {
        "zk_minus_wk_sq_over_h": np.abs(z**k - w**k) ** 2 / h,
        "h_over_rho2k": h / rho ** (2 * k),
        "rho2k_over_absA": rho ** (2 * k) / abs_a,
        "one_minus_P_absA_over_h": one_minus_p * abs_a / h,
    }
    details, ok, worst = {}, True, 0.0
    for name, kind in COMPARABILITY_RATIOS:
        v = values[name]
        lo, hi = float(v.min()), float(v.max())
        entry = {"inf": lo, "sup": hi, "kind": kind}
        if kind == "upper":
            good = math.isfinite(hi) and hi < upper
        else:
            entry["band"] = hi / lo if lo > 0 else math.inf
            good = lo > 0 and entry["band"] < band
            worst = max(worst, entry["band"])
        entry["passed"] = bool(good)
        ok &= good
        details[name] = entry
    return SweepReport(f"comparability_k{k}", int(z.size), worst, band, bool(ok), details)


def _kernel_for(k, lam, q):
    """Callable (x1, x2, t) -> K(p, q) frozen to one quadrature rule."""
    w, s = q.z1, q.t
    if k == 1:
        return lambda x1, x2, t: fundamental_solution_k1_arrays(x1 + 1j * x2, t, w, s, lam)
    if lam == 0:
        cache = {}

        def k0(x1, x2, t):
            out = np.empty(np.shape(x1), dtype=complex)
            for idx in np.ndindex(out.shape):
                p = BoundaryPoint.from_real(x1[idx], x2[idx], t[idx])
                order = cache.setdefault("order", converged_k0_order(p, q, k))
                out[idx] = k0_value(p.z1, p.t, w, s, k, order)
            return out

        return k0

    def klam(x1, x2, t):
        out = np.empty(np.shape(x1), dtype=complex)
        for idx in np.ndindex(out.shape):
            out[idx] = k_lambda_value(complex(x1[idx], x2[idx]), t[idx], w, s, lam, k, 2.0**-6)
        return out

    return klam


def pde_residual_sweep(k: int, lam: complex, base: BoundaryPoint, samples, h_fractions=DEFAULT_H_FRACTIONS,
                       slope_band=(1.7, 2.3), terminal: float = 1e-4, min_separation: float = 0.1) -> SweepReport:
    """Finite-difference Delta_lambda applied to K(., base) at each sample.

    Steps are ``h_fraction * delta`` with delta = d(p, base)^(1/(2k+2)) the
    homogeneous distance; the residual is measured relative to |K(p)| / delta^2.  A sample passes when the log-log slope of residual
    against h lies in ``slope_band`` and the smallest-step residual is below
    ``terminal``.  The slope is fitted over steps whose residual clears the
    rounding floor of the stencil; fewer than two such steps fails the sample.
    """
    lam = complex(lam)
    slopes, terminals = [], []
    for p in samples:
        _, rho, _, d = (float(v) for v in quasi_metric_arrays(p.z1, p.t, base.z1, base.t, k))
        delta = d ** (1 / (2 * k + 2))
        if delta < min_separation * rho:
            raise ValueError("sample too close to the singularity")
        kernel = _kernel_for(k, lam, base)  # quadrature rule frozen per sample
        point = np.array([[p.z1.real, p.z1.imag, p.t]])
        scale = abs(complex(kernel(point[:, 0], point[:, 1], point[:, 2])[0])) / delta**2
        hs = np.array(h_fractions) * delta
        res = np.array([abs(complex(delta_lambda_fd(kernel, point, h, k, lam)[0])) / scale for h in hs])
        # second differences lose about eps / f^2 to rounding; residuals below that are noise
        usable = res > ROUNDOFF_MARGIN * np.finfo(float).eps / np.array(h_fractions) ** 2
        if usable.sum() >= 2:
            slopes.append(float(np.polyfit(np.log(hs[usable]), np.log(res[usable]), 1)[0]))
        else:
            slopes.append(math.nan)
        terminals.append(float(res[-1]))
    slopes = np.array(slopes)
    terminals = np.array(terminals)
    good = (slopes >= slope_band[0]) & (slopes <= slope_band[1]) & (terminals < terminal)
    return SweepReport(
        f"pde_residual_k{k}_lambda{lam.real:g}{lam.imag:+g}i",
        len(slopes),
        float(terminals.max()),
        terminal,
        bool(good.all()),
        {
            "slope_min": float(np.nanmin(slopes)) if np.isfinite(slopes).any() else math.nan,
            "slope_max": float(np.nanmax(slopes)) if np.isfinite(slopes).any() else math.nan,
            "slope_band": list(slope_band),
            "failed_samples": [int(i) for i in np.flatnonzero(~good)],
        },
    )


def pde_sample_cloud(rng: np.random.Generator, base: BoundaryPoint, count: int, k: int, min_separation: float = 0.1):
    """Points at moderate distance from base, rejecting those closer than min_separation * rho."""
    out = []
    while len(out) < count:
        r = 10 ** rng.uniform(-0.3, 0.3)
        z = base.z1 + r * rng.uniform(0.2, 1.0) * np.exp(2j * math.pi * rng.random())
        t = base.t + rng.uniform(-1, 1) * r ** (2 * k)
        _, rho, _, d = quasi_metric_arrays(z, t, base.z1, base.t, k)
        if d ** (1 / (2 * k + 2)) >= min_separation * rho:
            out.append(BoundaryPoint([z], t))
    return out


# Reproducing property -------------------------------------------------------

TEST_FUNCTIONS = {
    "inv_sq_shift1": lambda z2: (z2 + 1j) ** -2,
    "inv_cube_shift2": lambda z2: (z2 + 2j) ** -3,
}


def boundary_values(func, k: int = 1):
    """Boundary restriction (z, t) -> F(t + i |z|^(2k)) of a function of z_2 alone."""
    return lambda z, t: func(t + 1j * np.abs(z) ** (2 * k))


def interior_test_points(rng: np.random.Generator, count: int = 10, radius: float = 0.7, height: float = 1.5):
    return [
        (complex(*rng.uniform(-radius, radius, 2)), float(rng.uniform(-height, height)))
        for _ in range(count)
    ]


def reproducing_sweep(grid: BoundaryGrid, points, functions=None, tol: float = 0.01, anti_tol: float = 0.02) -> SweepReport:
    """Relative sup-norm error of the discrete projection on holomorphic inputs, and leakage of their conjugates."""
    functions = TEST_FUNCTIONS if functions is None else functions
    details, worst, ok = {}, 0.0, True
    for name, func in functions.items():
        bv = boundary_values(func)
        samples = grid.sample(bv)
        exact = np.array([bv(z, t) for z, t in points])
        scale = np.abs(exact).max()
        proj = szego_project(samples, grid, points)
        err = float(np.abs(proj.values - exact).max() / scale)
        anti = szego_project(np.conj(samples), grid, points)
        leak = float(np.abs(anti.values).max() / scale)
        details[name] = {
            "relative_error": err,
            "relative_error_rho": float(np.abs(proj.values_rho - exact).max() / scale),
            "relative_error_half_rho": float(np.abs(proj.values_half_rho - exact).max() / scale),
            "error_bound": float(proj.error_bound.max() / scale),
            "anti_holomorphic_leak": leak,
        }
        worst = max(worst, err)
        ok &= err < tol and leak < anti_tol
    return SweepReport("reproducing", len(points), worst, tol, bool(ok), details)


# Suites -----------------------------------------------------------------------

SUITES = ("pde", "size", "holder", "comparability", "reproducing")


def _rng(seed, tag):
    return np.random.default_rng([seed, sum(ord(c) for c in tag)])


def run_suite(name: str = "all", seed: int = 0, scale: float = 1.0, grid: BoundaryGrid | None = None):
    """Run one named suite (or ``all``) with default sample sizes times ``scale``."""
    names = SUITES if name == "all" else (name,)
    unknown = set(names) - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suite {sorted(unknown)}")
    reports = []
    n_pairs = max(10, int(100_000 * scale))
    n_triples = max(10, int(10_000 * scale))
    for suite in names:
        if suite == "pde":
            base = BoundaryPoint([0.3 + 0.2j], 0.1)
            for k, lam in ((1, 0.0), (1, 0.4), (2, 0.0)):
                cloud = pde_sample_cloud(_rng(seed, f"pde{k}{lam}"), base, max(2, int(20 * min(scale, 1))), k)
                reports.append(pde_residual_sweep(k, lam, base, cloud))
        elif suite == "size":
            for k in (1, 2, 3):
                reports.append(size_estimate_sweep(k, *log_uniform_pairs(_rng(seed, f"size{k}"), n_pairs, k)))
        elif suite == "holder":
            for k in (1, 2, 3):
                triple = admissible_triples(_rng(seed, f"holder{k}"), n_triples, k)
                reports.append(holder_estimate_sweep(k, *triple, argument="second"))
                reports.append(holder_estimate_sweep(k, *triple, argument="first"))
        elif suite == "comparability":
            for k in (1, 2, 3):
                reports.append(comparability_ratio_sweep(k, *log_uniform_pairs(_rng(seed, f"comparability{k}"), n_pairs, k)))
        elif suite == "reproducing":
            points = interior_test_points(_rng(seed, "reproducing"))
            reports.append(reproducing_sweep(grid or BoundaryGrid(), points))
    return reports
