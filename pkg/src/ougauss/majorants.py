"""Majorant kernels and empirical certification of the kernel inequalities.

``exp*(-X)`` stands for ``exp(-c X)`` with an unspecified ``c > 0``; here ``c``
is an explicit configuration value (:class:`ExpStarConfig`).

A certificate records the largest observed ratio LHS/RHS over a deterministic
sample. It is evidence for the existence of the constant ``C``, never a proof.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, OUGaussError, ValidationError
from .geometry import _split_arrays
from .kernels import DEFAULT_SPEC, QuadratureSpec, kernel_values
from .sampling import SamplerSpec

STABILITY_DRIFT = 0.10
MAX_SKIP_FRACTION = 0.01
BLOCK = 2048


class BoundId(str, enum.Enum):
    PROP21 = "PROP21"
    LEMMA31 = "LEMMA31"
    LEMMA32A = "LEMMA32A"
    LEMMA32B = "LEMMA32B"
    LOCAL_UNIFORM = "LOCAL_UNIFORM"


class CertificationViolation(OUGaussError):
    """A sample with LHS > 0 where the majorant vanishes."""

    def __init__(self, message, sample):
        super().__init__(message)
        self.sample = sample

    def to_dict(self):
        return {"error": "violation", "message": str(self), "sample": self.sample}


@dataclass(frozen=True)
class ExpStarConfig:
    c: float = 0.05

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValidationError(f"exp* constant must be positive, got {self.c}")


def _expstar(cfg, X):
    return np.exp(-cfg.c * X)


def majorant_terms(t, x, y, cfg: ExpStarConfig = ExpStarConfig()):
    """Return ``(K1, K2, K3~, K4)``; broadcasts over stacks of points.

    Terms outside their indicator support are exactly 0.
    """
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise ValidationError("t must be positive")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    x, y = np.broadcast_arrays(x, y)
    n = x.shape[1]
    t = np.broadcast_to(t, x.shape[:1])
    y_par, y_perp, sign = _split_arrays(x, y)
    nx = np.linalg.norm(x, axis=1)
    npar = np.linalg.norm(y_par, axis=1)
    nperp2 = np.sum(y_perp ** 2, axis=1)
    dot = np.sum(x * y, axis=1)
    dxy2 = np.sum((x - y) ** 2, axis=1)
    dpar = np.linalg.norm(x - y_par, axis=1)

    k1 = t / (t * t + dxy2) ** ((n + 1) / 2) * _expstar(cfg, t * (1 + nx))

    supp2 = (nx > 1) & (dot > 0) & (npar >= nx / 2) & (npar < nx)
    safe_x = np.where(nx > 0, nx, 1.0)
    num = (t * t + nperp2) * nx
    with np.errstate(divide="ignore", invalid="ignore"):
        expo = np.where(dpar > 0, num / np.where(dpar > 0, dpar, 1.0), np.where(num > 0, np.inf, 0.0))
    base2 = (t / safe_x) * (t * t + dpar / safe_x + nperp2) ** (-(n + 2) / 2)
    k2 = np.where(supp2, base2 * _expstar(cfg, expo), 0.0)

    k3 = np.minimum(1.0, t / np.sqrt(np.log(math.e + nx))) * _expstar(cfg, np.sum(y * y, axis=1))

    supp4 = (dot > 0) & (npar > 1) & (npar < nx / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.log(np.where(supp4, nx / np.where(npar > 0, npar, 1.0), 2.0))
        base4 = t / np.where(supp4, npar, 1.0) * lg ** -1.5 * _expstar(cfg, t * t / lg) * _expstar(cfg, nperp2)
    k4 = np.where(supp4, base4, 0.0)
    return k1, k2, k3, k4


def _restrict(bound, sampler, radius):
    if bound in (BoundId.LEMMA32A, BoundId.LEMMA32B, BoundId.LOCAL_UNIFORM):
        sampler = sampler.replace(x_radius=min(sampler.x_radius, radius * (1 - 1e-12)))
    if bound is BoundId.LEMMA32B:
        sampler = sampler.replace(t_min=max(sampler.t_min, 1.0))
    if bound is BoundId.LOCAL_UNIFORM:
        sampler = sampler.replace(t_min=max(sampler.t_min, 0.5), t_max=min(sampler.t_max, 2.0))
    if not sampler.t_min < sampler.t_max:
        raise ValidationError(f"sampler t-range is empty for {bound.value}")
    return sampler


def _sides(bound, t, x, y, cfg, q):
    """LHS, RHS and convergence mask for one block of samples."""
    n = x.shape[1]
    yy = np.sum(y * y, axis=1)
    if bound is BoundId.PROP21:
        kv = kernel_values(t, x, y, ("p", "dt", "dx"), q, strict=False)
        lhs = kv["p"] + np.abs(t * kv["dt"]) + np.max(np.abs(t[:, None] * kv["dx"]), axis=1)
        k1, k2, k3, k4 = majorant_terms(t, x, y, cfg)
        if np.any((k2 > 0) & (k4 > 0)):
            raise OUGaussError("K2 and K4 supports overlap; majorant evaluation is broken")
        return lhs, k1 + k2 + k3 + k4, kv["converged"]
    if bound is BoundId.LOCAL_UNIFORM:
        kv = kernel_values(t, x, y, ("p",), q, strict=False)
        return kv["p"], np.exp(-yy) / np.sqrt(np.log(math.e + np.sqrt(yy))), kv["converged"]
    if bound is BoundId.LEMMA32B:
        kv = kernel_values(t, x, y, ("dx",), q, strict=False)
        rhs = t ** -0.5 * np.exp(-yy) * np.log(math.e + np.sqrt(yy)) ** -0.75
        return np.max(np.abs(kv["dx"]), axis=1), rhs, kv["converged"]
    half = kernel_values(t / 2, x, y, ("p",), q, strict=False)
    if bound is BoundId.LEMMA31:
        kv = kernel_values(t, x, y, ("dt",), q, strict=False)
        return np.abs(kv["dt"]), half["p"] / t, kv["converged"] & half["converged"]
    kv = kernel_values(t, x, y, ("dx",), q, strict=False)
    rhs = (1.0 + t ** (-4.0 - n)) * half["p"]
    return np.max(np.abs(kv["dx"]), axis=1), rhs, kv["converged"] & half["converged"]


def _argmax_lex(ratio, t, x, y):
    best = np.nanmax(ratio)
    ties = np.flatnonzero(ratio == best)
    if ties.size == 1:
        return int(ties[0])
    keys = [y[ties, d] for d in range(y.shape[1] - 1, -1, -1)]
    keys += [x[ties, d] for d in range(x.shape[1] - 1, -1, -1)]
    keys.append(t[ties])
    return int(ties[np.lexsort(keys)[0]])


@dataclass(frozen=True)
class Certificate:
    bound_id: BoundId
    c_used: float
    n_samples: int
    max_ratio: float
    argmax: dict
    stable: bool
    skipped: int = 0
    max_ratio_doubled: float = float("nan")
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "bound_id": self.bound_id.value,
            "c": self.c_used,
            "n_samples": self.n_samples,
            "max_ratio": self.max_ratio,
            "argmax": self.argmax,
            "skipped": self.skipped,
            "stable": self.stable,
        }


@dataclass
class SampleEvaluation:
    """Per-sample LHS/RHS for the doubled sample set, kept for reuse across ``c`` values."""

    bound: BoundId
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    ok: np.ndarray


def evaluate_samples(bound, sampler: SamplerSpec, n: int, count: int, cfg: ExpStarConfig,
                     q: QuadratureSpec = DEFAULT_SPEC, radius: float = 2.0, threads: int = 1) -> SampleEvaluation:
    bound = BoundId(bound)
    sampler = _restrict(bound, sampler, radius)
    t, x, y = sampler.draw(n, count)
    blocks = [slice(i, i + BLOCK) for i in range(0, count, BLOCK)]
    job = lambda sl: _sides(bound, t[sl], x[sl], y[sl], cfg, q)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(job, blocks))
    else:
        parts = [job(sl) for sl in blocks]
    lhs = np.concatenate([p[0] for p in parts])
    rhs = np.concatenate([p[1] for p in parts])
    ok = np.concatenate([p[2] for p in parts])
    return SampleEvaluation(bound, t, x, y, lhs, rhs, ok)


def certificate_from(ev: SampleEvaluation, n_samples: int, c: float, config=None) -> Certificate:
    """Reduce per-sample evaluations to a certificate (fixed-order, deterministic)."""
    ok = ev.ok
    evaluated = ok.size
    skipped_all = int((~ok).sum())
    if skipped_all > MAX_SKIP_FRACTION * evaluated:
        raise ConvergenceError(
            f"{skipped_all} of {evaluated} samples failed kernel quadrature (limit {MAX_SKIP_FRACTION:.0%})")
    bad = ok & (ev.rhs <= 0) & (ev.lhs > 0)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise CertificationViolation(
            f"{ev.bound.value}: majorant vanishes where LHS = {ev.lhs[i]:.3e} > 0",
            {"t": float(ev.t[i]), "x": ev.x[i].tolist(), "y": ev.y[i].tolist()})
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(ok & (ev.rhs > 0), ev.lhs / ev.rhs, np.nan)
    ratio = np.where(ok & (ev.rhs <= 0), 0.0, ratio)
    first = ratio[:n_samples]
    if np.all(np.isnan(first)):
        raise ConvergenceError("no usable samples")
    i = _argmax_lex(first, ev.t[:n_samples], ev.x[:n_samples], ev.y[:n_samples])
    m1 = float(first[i])
    m2 = float(np.nanmax(ratio))
    stable = abs(m2 - m1) <= STABILITY_DRIFT * m1
    argmax = {"t": float(ev.t[i]), "x": ev.x[i].tolist(), "y": ev.y[i].tolist()}
    return Certificate(ev.bound, float(c), int(n_samples), m1, argmax, bool(stable),
                       int((~ok[:n_samples]).sum()), m2, dict(config or {}))


def certify(bound_id, sampler: SamplerSpec = SamplerSpec(), n_samples: int = 10_000,
            cfg: ExpStarConfig = ExpStarConfig(), q: QuadratureSpec = DEFAULT_SPEC, n: int = 1,
            radius: float = 2.0, threads: int = 1) -> Certificate:
    """Empirical constant for one kernel inequality.

    ``n_samples`` points are scored and ``n_samples`` more (a nested
    continuation of the same sequence) decide ``stable``: the maximum may move
    by at most 10% when the sample is doubled. ``radius`` is the bound on
    ``|x|`` used by the local bounds.
    """
    bound = BoundId(bound_id)
    if int(n_samples) != n_samples or n_samples < 100:
        raise ValidationError(f"n_samples must be an integer >= 100, got {n_samples}")
    if not radius > 0:
        raise ValidationError("radius must be positive")
    ev = evaluate_samples(bound, sampler, n, 2 * int(n_samples), cfg, q, radius, threads)
    config = {"sampler": sampler.__dict__, "n": n, "radius": radius,
              "rel_tol": q.rel_tol, "abs_tol": q.abs_tol}
    return certificate_from(ev, int(n_samples), cfg.c, config)


def rescore(ev: SampleEvaluation, n_samples: int, cfg: ExpStarConfig) -> Certificate:
    """Certificate for a different ``c`` reusing the kernel evaluations (PROP21 only)."""
    if ev.bound is not BoundId.PROP21:
        return certificate_from(ev, n_samples, cfg.c)
    k1, k2, k3, k4 = majorant_terms(ev.t, ev.x, ev.y, cfg)
    return certificate_from(SampleEvaluation(ev.bound, ev.t, ev.x, ev.y, ev.lhs, k1 + k2 + k3 + k4, ev.ok),
                            n_samples, cfg.c)


def zero_mean_residuals(t, x, q: QuadratureSpec = DEFAULT_SPEC):
    """``int d/dt P_t(x, y) dy`` for each ``(t, x)`` pair; should vanish."""
    from .catalog import ScalarField
    from .transform import poisson_integral_dt

    x = np.atleast_2d(np.asarray(x, dtype=float))
    one = ScalarField("CONST", (1.0,), x.shape[1])
    return np.array([poisson_integral_dt(one, float(tt), xx, q) for tt, xx in zip(np.atleast_1d(t), x)])
