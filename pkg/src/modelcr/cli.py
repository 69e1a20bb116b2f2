"""Command-line front end.

    modelcr kernel   --k 1 --lambda 0 --point 1,0,0
    modelcr szego    --k 2 --point 1,0,0 --base 0,0,1
    modelcr geodesic --k 1 --x 0,0 --t 3.14159 --m-max 3
    modelcr verify   --suite all --seed 7 --out report.json

Exit codes: 0 success, 1 evaluation error, 2 verification FAIL, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import fundamental, geodesics, szego, verification
from .geometry import BoundaryPoint, KernelParams

EXIT_OK, EXIT_EVAL, EXIT_FAIL, EXIT_USAGE = 0, 1, 2, 64
COMMANDS = ("kernel", "szego", "geodesic", "verify")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str = "kernel"
    k: int = 1
    n: int = 1
    lambda_re: float = 0.0
    lambda_im: float = 0.0
    points: list = field(default_factory=list)
    grid: str | None = None
    base: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    method: str = "auto"
    x: list = field(default_factory=lambda: [1.0, 0.0])
    t: float = 0.0
    m_max: int = 50
    suite: str = "all"
    seed: int = 0
    scale: float = 1.0
    tol: float = 1e-8
    out: str | None = None
    format: str = "csv"

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise UsageError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"command must be one of {COMMANDS}")
        if self.format not in ("csv", "json"):
            raise UsageError("format must be csv or json")
        if self.k < 1 or self.n < 1 or self.m_max < 1:
            raise UsageError("k, n and m-max must be positive")
        if self.method not in ("auto", "closed", "integral"):
            raise UsageError("method must be auto, closed or integral")
        if not self.tol > 0:
            raise UsageError("tol must be positive")
        if self.command in ("kernel", "szego") and not self.points and not self.grid:
            raise UsageError(f"{self.command} needs --point or --grid")
        return self

    @property
    def lam(self) -> complex:
        return complex(self.lambda_re, self.lambda_im)


# Parsing ----------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text, count=None):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot parse numbers from {text!r}") from exc
    if count is not None and len(vals) != count:
        raise UsageError(f"expected {count} comma-separated numbers, got {text!r}")
    return vals


def _parse_lambda(text):
    vals = _floats(text)
    if len(vals) not in (1, 2):
        raise UsageError("--lambda takes re or re,im")
    return vals[0], vals[1] if len(vals) == 2 else 0.0


def _grid_points(text):
    """``a:b:n`` ranges for x1, x2, t separated by commas."""
    axes = []
    for part in text.split(","):
        try:
            a, b, n = part.split(":")
            axes.append(np.linspace(float(a), float(b), int(n)))
        except ValueError as exc:
            raise UsageError(f"bad grid axis {part!r}; expected a:b:n") from exc
    if len(axes) != 3:
        raise UsageError("grid needs three axes x1, x2, t")
    mesh = np.meshgrid(*axes, indexing="ij")
    return [list(map(float, p)) for p in zip(*(m.ravel() for m in mesh))]


def build_parser():
    parser = _Parser(prog="modelcr", description="Kernels, geodesics and verification sweeps on model domains.")
    parser.add_argument("--config", help="JSON RunConfig; command-line flags given explicitly override it")
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--k", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--tol", type=float)

    for name in ("kernel", "szego"):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--n", type=int)
        p.add_argument("--lambda", dest="lam")
        p.add_argument("--point", action="append", help="x1,x2,t (repeatable)")
        p.add_argument("--grid", help="x1a:x1b:n,x2a:x2b:n,ta:tb:n")
        p.add_argument("--base", help="pole / second point w1,w2,s (default origin)")
        if name == "kernel":
            p.add_argument("--method", choices=("auto", "closed", "integral"))

    p = sub.add_parser("geodesic")
    common(p)
    p.add_argument("--x", help="x1,x2")
    p.add_argument("--t", type=float)
    p.add_argument("--m-max", dest="m_max", type=int)

    p = sub.add_parser("verify")
    common(p)
    p.add_argument("--suite", choices=("all",) + verification.SUITES)
    p.add_argument("--seed", type=int)
    p.add_argument("--scale", type=float, help="multiplies the default sample counts")
    return parser


def config_from_args(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
    if args.command:
        data["command"] = args.command
    elif "command" not in data:
        raise UsageError("a command is required")
    given = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "command")}
    if "lam" in given:
        data["lambda_re"], data["lambda_im"] = _parse_lambda(given.pop("lam"))
    if "point" in given:
        data["points"] = [_floats(p, 3) for p in given.pop("point")]
    if "base" in given:
        data["base"] = _floats(given.pop("base"), 3)
    if "x" in given:
        data["x"] = _floats(given.pop("x"), 2)
    data.update(given)
    try:
        cfg = RunConfig.from_dict(data)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc
    return cfg.validate()


# Commands -----------------------------------------------------------------------

def _threads():
    raw = os.environ.get("MODELCR_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise UsageError("MODELCR_THREADS must be a positive integer") from exc
    if value < 1:
        raise UsageError("MODELCR_THREADS must be a positive integer")
    return value


def _record(inputs, value=None, error_estimate=0.0, error=None):
    rec = {"inputs": inputs}
    if error is None:
        rec.update(value_re=float(value.real), value_im=float(value.imag), error_estimate=float(error_estimate))
    else:
        rec.update(value_re=None, value_im=None, error_estimate=None, error=error)
    return rec


def _evaluate_kernel(cfg, point):
    p = BoundaryPoint.from_real(*point)
    q = BoundaryPoint.from_real(*cfg.base)
    inputs = {"x1": point[0], "x2": point[1], "t": point[2], "w1": cfg.base[0], "w2": cfg.base[1], "s": cfg.base[2]}
    method = cfg.method
    if method == "auto":
        method = "closed" if cfg.k == 1 else "integral"
    if method == "closed" and cfg.k != 1:
        raise UsageError("the closed form exists only for k = 1")
    try:
        if method == "closed":
            if any(cfg.base):
                value = fundamental.fundamental_solution_k1(p, q, cfg.lam)
            else:
                value = fundamental.k_lambda_closed_k1(point[:2], point[2], cfg.lam)
            return _record(inputs, complex(value))
        value, err = fundamental.k_lambda_integral(
            p, q, KernelParams(cfg.k, 1, cfg.lam), tol=cfg.tol, return_error=True
        )
        return _record(inputs, value, err)
    except (ValueError, ArithmeticError, fundamental.ConvergenceError) as exc:
        return _record(inputs, error=str(exc))


def _evaluate_szego(cfg, point):
    p = BoundaryPoint.from_real(*point)
    q = BoundaryPoint.from_real(*cfg.base)
    inputs = {"x1": point[0], "x2": point[1], "t": point[2], "w1": cfg.base[0], "w2": cfg.base[1], "s": cfg.base[2]}
    try:
        return _record(inputs, szego.szego_boundary(p, q, 1, cfg.k))
    except (ValueError, ArithmeticError) as exc:
        return _record(inputs, error=str(exc))


def _pointwise(cfg, fn):
    points = list(cfg.points) + (_grid_points(cfg.grid) if cfg.grid else [])
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        records = list(pool.map(lambda pt: fn(cfg, pt), points))
    status = EXIT_EVAL if any("error" in r for r in records) else EXIT_OK
    return records, status


def _geodesic(cfg):
    x1, x2 = cfg.x
    t = cfg.t
    base = {"x1": x1, "x2": x2, "t": t}
    try:
        if cfg.k == 1:
            if x1 == 0 and x2 == 0:
                lengths, radii, areas = geodesics.taxis_lengths_k1(t, cfg.m_max, with_geometry=True)
                return [
                    _record({**base, "m": m + 1, "radius": float(radii[m]), "area": float(areas[m])}, complex(lengths[m]))
                    for m in range(cfg.m_max)
                ], EXIT_OK
            sols = geodesics.solve_geodesics_k1((x1, x2), t, m_max=cfg.m_max)
            r2 = x1 * x1 + x2 * x2
            return [
                _record(
                    {**base, "m": s.branch_index, "tau": s.tau},
                    complex(s.length),
                    abs(abs(t) - float(geodesics.mu_fn(s.tau)) * r2),
                )
                for s in sols
            ], EXIT_OK
        if cfg.k == 2:
            if x1 == 0 and x2 == 0:
                lengths = geodesics.k2_taxis_lengths(t, cfg.m_max)
                return [_record({**base, "m": m + 1}, complex(lengths[m])) for m in range(cfg.m_max)], EXIT_OK
            m, lo, hi = geodesics.k2_count_bounds((x1, x2), t)
            return [_record({**base, "m": m, "count_lower": lo, "count_upper": hi}, complex(m))], EXIT_OK
        raise UsageError("geodesic supports k = 1 and k = 2")
    except ValueError as exc:
        return [_record(base, error=str(exc))], EXIT_EVAL


def _verify(cfg):
    reports = verification.run_suite(cfg.suite, cfg.seed, cfg.scale)
    payload = {
        "suite": cfg.suite,
        "seed": cfg.seed,
        "scale": cfg.scale,
        "passed": all(r.passed for r in reports),
        "reports": [r.to_dict() for r in reports],
    }
    return payload, EXIT_OK if payload["passed"] else EXIT_FAIL


# Output -------------------------------------------------------------------------

def _flatten(rec):
    row = dict(rec["inputs"])
    row.update({k: v for k, v in rec.items() if k != "inputs"})
    return row


def render(cfg, payload) -> str:
    if cfg.format == "json":
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    if cfg.command == "verify":
        rows = [
            {"name": r["name"], "samples": r["samples"], "statistic": r["statistic"],
             "threshold": r["threshold"], "passed": r["passed"]}
            for r in payload["reports"]
        ]
    else:
        rows = [_flatten(r) for r in payload]
    columns = []
    for row in rows:
        columns.extend(c for c in row if c not in columns)
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: ("" if row.get(c) is None else row.get(c)) for c in columns})
    return buf.getvalue()


def run(cfg: RunConfig):
    """Execute a validated config; returns (rendered text, exit status)."""
    if cfg.command == "kernel":
        payload, status = _pointwise(cfg, _evaluate_kernel)
    elif cfg.command == "szego":
        payload, status = _pointwise(cfg, _evaluate_szego)
    elif cfg.command == "geodesic":
        payload, status = _geodesic(cfg)
    else:
        payload, status = _verify(cfg)
    text = render(cfg, payload)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text, status


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = config_from_args(argv)
        _, status = run(cfg)
        return status
    except UsageError as exc:
        sys.stderr.write(f"modelcr: usage error: {exc}\n")
        build_parser().print_usage(sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - any evaluation failure maps to exit 1
        sys.stderr.write(f"modelcr: evaluation error: {exc}\n")
        return EXIT_EVAL


if __name__ == "__main__":
    sys.exit(main())
