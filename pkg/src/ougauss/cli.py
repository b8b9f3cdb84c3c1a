"""Command-line front end: ``ougauss COMMAND [options]``.

Options can also come from a JSON file (``--config``) whose keys are the
``RunConfig`` field names; flags given on the command line win. Exit status is
0 on success, 2 on invalid input and 3 when a numerical method fails, in which
case a JSON error object is written to stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import analyzer, catalog, kernels, majorants, transform
from .errors import ConvergenceError, OUGaussError, ValidationError
from .sampling import DEFAULT_SEED, SamplerSpec

COMMANDS = ("kernel", "transform", "certify", "seminorm", "equivalence", "catalog")
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


def _default_threads() -> int:
    env = os.environ.get("OUGAUSS_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"OUGAUSS_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


@dataclass
class RunConfig:
    command: str = ""
    n: int = 1
    alpha: float = 0.5
    f: str = "CONST:1"
    t: list = field(default_factory=lambda: [1.0])
    x: list = field(default_factory=lambda: [0.0])
    y: list = field(default_factory=lambda: [0.0])
    part: str = "p"
    index: int | None = None
    bound: str = "PROP21"
    samples: int = 10_000
    c: float = 0.05
    seed: int = DEFAULT_SEED
    sampler: str = "sobol"
    radius: float = 2.0
    rel_tol: float = 1e-8
    abs_tol: float = 1e-14
    max_subdivisions: int = 200
    t_min: float = 1e-2
    t_max: float = 1e2
    t_points: int = 25
    x_box_radius: float = 6.0
    x_points_per_axis: int = 25
    refine: bool = False
    estimator: str = "poisson"
    n_pairs: int = 4096
    doubling_steps: int = 3
    trace: str | None = None
    output: str | None = None
    format: str = "json"
    threads: int | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        for name in ("n", "samples", "seed", "max_subdivisions", "t_points", "x_points_per_axis", "n_pairs",
                     "doubling_steps"):
            setattr(self, name, _coerce_int(name, getattr(self, name)))
        for name in ("alpha", "c", "radius", "rel_tol", "abs_tol", "t_min", "t_max", "x_box_radius"):
            setattr(self, name, _coerce_float(name, getattr(self, name)))
        for name in ("t", "x", "y"):
            v = getattr(self, name)
            v = v if isinstance(v, (list, tuple)) else [v]
            setattr(self, name, [_coerce_float(name, a) for a in v])
        if not 1 <= self.n <= 3:
            raise ValidationError(f"n must be in 1..3, got {self.n}")
        if self.format not in ("json", "csv"):
            raise ValidationError(f"format must be json or csv, got {self.format!r}")
        if self.estimator not in ("poisson", "holder"):
            raise ValidationError(f"estimator must be poisson or holder, got {self.estimator!r}")
        if self.sampler not in ("sobol", "grid"):
            raise ValidationError(f"sampler must be sobol or grid, got {self.sampler!r}")
        if self.index is not None:
            self.index = _coerce_int("index", self.index)
        if self.threads is None:
            self.threads = _default_threads()
        self.threads = _coerce_int("threads", self.threads)
        if self.threads < 1:
            raise ValidationError("threads must be at least 1")

    def quadrature(self) -> kernels.QuadratureSpec:
        return kernels.QuadratureSpec(rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                                      max_subdivisions=self.max_subdivisions)

    def point(self, name: str) -> np.ndarray:
        v = np.asarray(getattr(self, name), dtype=float)
        if v.size != self.n:
            raise ValidationError(f"--{name} needs {self.n} coordinate(s), got {v.size}")
        return v

    def field_(self):
        return catalog.ScalarField.parse(self.f, self.n)

    def grid(self) -> analyzer.SweepGrid:
        return analyzer.SweepGrid(self.t_min, self.t_max, self.t_points, self.x_box_radius,
                                  self.x_points_per_axis, self.refine)


FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def _coerce_int(name, v):
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ValidationError(f"{name} must be an integer, got {v!r}")
    try:
        f = float(v)
    except ValueError:
        raise ValidationError(f"{name} must be an integer, got {v!r}") from None
    if not f.is_integer():
        raise ValidationError(f"{name} must be an integer, got {v!r}")
    return int(f)


def _coerce_float(name, v):
    if isinstance(v, bool):
        raise ValidationError(f"{name} must be a number, got {v!r}")
    try:
        f = float(v)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a number, got {v!r}") from None
    if not math.isfinite(f):
        raise ValidationError(f"{name} must be finite")
    return f


def canonical_json(obj) -> str:
    """Sorted keys, fixed indentation, no NaN: identical inputs give identical bytes."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) for v in r])
    return buf.getvalue()


def _axes(prefix, n):
    return [f"{prefix}{i + 1}" for i in range(n)]


def run_kernel(cfg: RunConfig):
    x, y = cfg.point("x"), cfg.point("y")
    t = np.asarray(cfg.t, dtype=float)
    if cfg.part not in kernels.PARTS:
        raise ValidationError(f"part must be one of {kernels.PARTS}")
    out = kernels.kernel_values(t, x, y, (cfg.part,), cfg.quadrature())
    vals, errs = out[cfg.part], out[cfg.part + "_err"]
    index = None
    if cfg.part in ("dx", "dtdx"):
        index = 1 if cfg.index is None else cfg.index
        k = kernels._check_index(index, cfg.n)
        vals, errs = vals[:, k], errs[:, k]
    results = [{"t": float(tt), "x": x.tolist(), "y": y.tolist(), "value": float(v), "error": float(e)}
               for tt, v, e in zip(t, vals, errs)]
    doc = {"command": "kernel", "part": cfg.part, "index": index, "n": cfg.n, "results": results}
    rows = [(tt, *x, *y, v) for tt, v in zip(t, vals)]
    return doc, (["t", *_axes("x", cfg.n), *_axes("y", cfg.n), "value"], rows)


def run_transform(cfg: RunConfig):
    f = cfg.field_()
    x = cfg.point("x")
    if len(cfg.t) != 1:
        raise ValidationError("transform takes a single --t")
    t = cfg.t[0]
    q = cfg.quadrature()
    report = transform.admissibility(f, q)
    index = None
    if cfg.part == "p":
        v = transform.poisson_integral(f, t, x, q)
    elif cfg.part == "dt":
        v = transform.poisson_integral_dt(f, t, x, q)
    elif cfg.part in ("dx", "dtdx"):
        index = 1 if cfg.index is None else cfg.index
        fn = transform.poisson_integral_dx if cfg.part == "dx" else transform.poisson_integral_dtdx
        v = fn(f, index, t, x, q)
    else:
        raise ValidationError(f"part must be one of {kernels.PARTS}")
    doc = {"command": "transform", "f": str(f), "n": cfg.n, "t": t, "x": x.tolist(), "part": cfg.part,
           "index": index, "value": float(v), "admissibility": report.to_dict()}
    return doc, (["t", *_axes("x", cfg.n), "value"], [(t, *x, v)])


def run_certify(cfg: RunConfig):
    sampler = SamplerSpec(kind=cfg.sampler, seed=cfg.seed, t_min=cfg.t_min, t_max=cfg.t_max,
                          x_radius=cfg.x_box_radius, y_radius=cfg.x_box_radius)
    cert = majorants.certify(cfg.bound, sampler, cfg.samples, majorants.ExpStarConfig(cfg.c), cfg.quadrature(),
                             cfg.n, cfg.radius, cfg.threads)
    return cert.to_dict(), None


def run_seminorm(cfg: RunConfig):
    f = cfg.field_()
    trace = [] if (cfg.trace or cfg.format == "csv") and cfg.estimator == "poisson" else None
    if cfg.estimator == "poisson":
        est = analyzer.seminorm_poisson(f, cfg.alpha, cfg.grid(), cfg.quadrature(), cfg.threads, trace)
    else:
        sampler = analyzer.PairSampler(cfg.x_box_radius, cfg.seed)
        est = analyzer.seminorm_holder(f, cfg.alpha, sampler, cfg.n_pairs)
    table = None
    if trace is not None:
        table = (["t", *_axes("x", cfg.n), "objective"], trace)
        if cfg.trace:
            _write(cfg.trace, _csv_text(*table))
    return est.to_dict(), table


def run_equivalence(cfg: RunConfig):
    f = cfg.field_()
    sampler = analyzer.PairSampler(cfg.x_box_radius, cfg.seed)
    rep = analyzer.equivalence_report(f, cfg.alpha, cfg.grid(), sampler, cfg.quadrature(), cfg.n_pairs,
                                      cfg.doubling_steps, cfg.threads)
    return rep.to_dict(), None


def run_catalog(cfg: RunConfig):
    funcs = [{"name": name, "parameter": catalog._SPECS[name][0]} for name in catalog.NAMES]
    return {"command": "catalog", "functions": funcs}, None


RUNNERS = {
    "kernel": run_kernel,
    "transform": run_transform,
    "certify": run_certify,
    "seminorm": run_seminorm,
    "equivalence": run_equivalence,
    "catalog": run_catalog,
}


def dispatch(cfg: RunConfig) -> str:
    """Run the command and return the text artifact (also written to ``cfg.output``)."""
    doc, table = RUNNERS[cfg.command](cfg)
    if cfg.format == "csv":
        if table is None:
            raise ValidationError(f"{cfg.command} emits JSON only")
        text = _csv_text(*table)
    else:
        text = canonical_json(doc)
    if cfg.output:
        _write(cfg.output, text)
    return text


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ougauss", argument_default=argparse.SUPPRESS,
                                description="Ornstein-Uhlenbeck Poisson kernels, transforms, "
                                            "majorant certificates and Gaussian Lipschitz seminorms.")
    p.add_argument("command", nargs="?", choices=COMMANDS, default=None)
    p.add_argument("--config", help="JSON file with RunConfig fields")
    p.add_argument("--n", type=int, help="dimension (1 to 3)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--f", help="catalog function NAME:param, e.g. LOG_ALPHA:0.5")
    p.add_argument("--t", type=float, nargs="+")
    p.add_argument("--x", type=float, nargs="+", help="point coordinates")
    p.add_argument("--y", type=float, nargs="+", help="point coordinates")
    p.add_argument("--part", choices=kernels.PARTS)
    p.add_argument("--index", type=int, help="1-based coordinate for dx/dtdx")
    p.add_argument("--bound", choices=[b.value for b in majorants.BoundId])
    p.add_argument("--samples", type=int)
    p.add_argument("--c", type=float, help="exponent constant in exp*(-X) = exp(-cX)")
    p.add_argument("--seed", type=int)
    p.add_argument("--sampler", choices=("sobol", "grid"))
    p.add_argument("--radius", type=float, help="|x| bound for local certificates")
    p.add_argument("--rel-tol", dest="rel_tol", type=float)
    p.add_argument("--abs-tol", dest="abs_tol", type=float)
    p.add_argument("--max-subdivisions", dest="max_subdivisions", type=int)
    p.add_argument("--t-min", dest="t_min", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--t-points", dest="t_points", type=int)
    p.add_argument("--x-box-radius", dest="x_box_radius", type=float)
    p.add_argument("--x-points-per-axis", dest="x_points_per_axis", type=int)
    p.add_argument("--refine", action="store_true")
    p.add_argument("--estimator", choices=("poisson", "holder"))
    p.add_argument("--n-pairs", dest="n_pairs", type=int)
    p.add_argument("--doubling-steps", dest="doubling_steps", type=int)
    p.add_argument("--trace", help="CSV path for the sweep trace")
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--threads", type=int)
    return p


def load_config(argv=None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    merged = {}
    path = args.pop("config", None)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ValidationError("config file must hold a JSON object")
        unknown = sorted(set(data) - FIELDS)
        if unknown:
            raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
        merged.update(data)
    merged.update({k: v for k, v in args.items() if v is not None})
    if "command" not in merged:
        raise ValidationError("no command given")
    return RunConfig(**merged)


def _fail(code, payload):
    sys.stderr.write(canonical_json(payload))
    return code


def main(argv=None) -> int:
    try:
        cfg = load_config(argv)
        text = dispatch(cfg)
    except ValidationError as exc:
        return _fail(EXIT_INVALID, {"error": "validation", "message": str(exc)})
    except ConvergenceError as exc:
        return _fail(EXIT_NUMERIC, exc.to_dict())
    except majorants.CertificationViolation as exc:
        return _fail(EXIT_NUMERIC, exc.to_dict())
    except OUGaussError as exc:
        return _fail(EXIT_NUMERIC, {"error": "convergence", "message": str(exc)})
    if not cfg.output:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
