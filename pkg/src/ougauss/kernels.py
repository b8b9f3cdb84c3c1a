"""Mehler kernel and the Ornstein-Uhlenbeck Poisson kernel with its derivatives.

The Poisson kernel has no closed form. It is the subordination integral

    P_t(x, y) = 1 / (2 pi^((n+1)/2)) * int_0^inf t s^(-3/2) exp(-t^2 / 4s)
                * (1 - e^(-2s))^(-n/2) exp(-|y - e^(-s) x|^2 / (1 - e^(-2s))) ds

evaluated after the substitution ``s = e^v``. Derivatives in ``t`` and ``x_i``
are obtained by differentiating under the integral sign; they share the
integrand's exponential factor, so all requested parts come out of one
adaptive pass.

Internally the integrand is multiplied by ``exp(|y|^2)``. That keeps the
integral of order one for large ``|y|``, where the raw kernel would sink below
the absolute tolerance floor, and the factor is divided out at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import ConvergenceError, KernelRangeError, ValidationError
from .geometry import as_point, as_points
from .quadrature import cubature

PARTS = ("p", "dt", "dx", "dtdx")

# Beyond s = TAIL_START the Mehler factor equals exp(-|y|^2) up to O(e^-s);
# that stretch is integrated in closed form.
TAIL_START = 40.0
# Extra margin (in e-folds) beyond ln(1/abs_tol) for the lower s cut.
LOW_CUT_MARGIN = 20.0
NEAR_DIAGONAL = 1e-12
CHUNK = 512


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and truncation limits for every integral in the package.

    ``s_cut_low`` and ``s_cut_high`` clamp the ``v = ln s`` range of the
    subordination integral; the analytic cuts are used whenever they are tighter.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-14
    max_subdivisions: int = 200
    s_cut_low: float = -60.0
    s_cut_high: float = 60.0

    def __post_init__(self):
        if not 0 < self.abs_tol <= self.rel_tol < 1:
            raise ValidationError("need 0 < abs_tol <= rel_tol < 1")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise ValidationError("max_subdivisions must be a positive integer")
        if not self.s_cut_low < self.s_cut_high:
            raise ValidationError("s_cut_low must be below s_cut_high")

    def replace(self, **kw) -> "QuadratureSpec":
        return QuadratureSpec(**{**self.__dict__, **kw})


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class KernelPoint:
    t: float
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        t = float(self.t)
        if not (math.isfinite(t) and t > 0):
            raise ValidationError(f"t must be finite and positive, got {self.t}")
        x = as_point(self.x)
        y = as_point(self.y, x.size)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.size


def mehler(r: float, x, y) -> float:
    """Mehler kernel ``(1-r^2)^(-n/2) exp(-|y - r x|^2 / (1-r^2))`` for ``0 < r < 1``."""
    if not 0.0 < r < 1.0:
        raise ValidationError(f"r must lie in (0, 1), got {r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValidationError("dimension mismatch")
    n = x.shape[-1]
    om = 1.0 - r * r
    d2 = np.sum((y - r * x) ** 2, axis=-1)
    v = np.exp(-d2 / om - 0.5 * n * math.log(om))
    return float(v) if np.ndim(v) == 0 else v


def _v_range(t, n, q):
    u = math.log(1.0 / q.abs_tol) + LOW_CUT_MARGIN
    s_low = t * t / (4.0 * u)
    v_lo = max(math.log(float(np.min(s_low))), q.s_cut_low)
    v_hi = min(math.log(max(TAIL_START, 2.0 * float(np.max(s_low)))), q.s_cut_high)
    if v_hi <= v_lo:
        v_hi = v_lo + 1.0
    return v_lo, v_hi


def _integrand(v, t, x, y, yy, parts):
    # v: (N,), member arrays t (m,), x/y (m, n); returns (N, m * width)
    s = np.exp(v)[:, None]
    em1 = -np.expm1(-s)                      # 1 - e^-s
    om = -np.expm1(-2.0 * s)                 # 1 - e^-2s
    n = x.shape[1]
    diff = (y - x)[None, :, :] + em1[:, :, None] * x[None, :, :]   # y - e^-s x
    d2 = np.sum(diff * diff, axis=2)
    tt = t[None, :]
    logb = np.log(tt) - 0.5 * np.log(s) - tt * tt / (4.0 * s) - 0.5 * n * np.log(om) - d2 / om + yy[None, :]
    base = np.exp(logb)
    cols = []
    dt_fac = None
    if "dt" in parts or "dtdx" in parts:
        dt_fac = (1.0 - tt * tt / (2.0 * s)) / tt
    if "p" in parts:
        cols.append(base[:, :, None])
    if "dt" in parts:
        cols.append((base * dt_fac)[:, :, None])
    if "dx" in parts or "dtdx" in parts:
        dx_fac = 2.0 * (np.exp(-s) / om)[:, :, None] * diff
        if "dx" in parts:
            cols.append(base[:, :, None] * dx_fac)
        if "dtdx" in parts:
            cols.append((base * dt_fac)[:, :, None] * dx_fac)
    out = np.concatenate(cols, axis=2)
    return out.reshape(out.shape[0], -1)


def _layout(parts, n):
    spans, k = {}, 0
    for p in PARTS:
        if p in parts:
            w = n if p in ("dx", "dtdx") else 1
            spans[p] = (k, k + w)
            k += w
    return spans, k


def _chunk(t, x, y, parts, q):
    m, n = x.shape
    yy = np.sum(y * y, axis=1)
    v_lo, v_hi = _v_range(t, n, q)
    nb = max(2, int(math.ceil((v_hi - v_lo) / 2.0)))
    bps = np.linspace(v_lo, v_hi, nb + 1)[1:-1]
    res = cubature(lambda v: _integrand(v[:, 0], t, x, y, yy, parts), [v_lo], [v_hi],
                   rel_tol=q.rel_tol, abs_tol=q.abs_tol, max_subdivisions=q.max_subdivisions,
                   breakpoints=[bps], strict=False)
    spans, width = _layout(parts, n)
    val = res.value.reshape(m, width)
    err = res.error.reshape(m, width)
    ok = res.converged.reshape(m, width).all(axis=1)
    big_s = math.exp(v_hi)
    pref = 1.0 / (2.0 * math.pi ** ((n + 1) / 2))
    scale = pref * np.exp(-yy)
    out = {}
    for p, (a, b) in spans.items():
        v = val[:, a:b].copy()
        if p == "p":
            v[:, 0] += 2.0 * math.sqrt(math.pi) * erf(t / (2.0 * math.sqrt(big_s)))
        elif p == "dt":
            v[:, 0] += 2.0 * np.exp(-t * t / (4.0 * big_s)) / math.sqrt(big_s)
        v *= scale[:, None]
        e = err[:, a:b] * scale[:, None]
        if p in ("p", "dt"):
            v, e = v[:, 0], e[:, 0]
        out[p] = v
        out[p + "_err"] = e
    out["converged"] = ok
    return out


def kernel_values(t, x, y, parts=("p",), q: QuadratureSpec = DEFAULT_SPEC, strict=True):
    """Batched kernel evaluation.

    ``t`` is a scalar or ``(m,)`` array, ``x`` and ``y`` broadcast to ``(m, n)``.
    Returns a dict with one ``(m,)`` array per scalar part (``p``, ``dt``) and
    an ``(m, n)`` array per gradient part (``dx``, ``dtdx``), plus ``*_err``
    error bounds and a boolean ``converged`` mask. With ``strict`` any
    unconverged member raises :class:`ConvergenceError`.
    """
    parts = tuple(parts)
    bad = set(parts) - set(PARTS)
    if bad or not parts:
        raise ValidationError(f"unknown kernel parts {sorted(bad)}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if y.ndim == 1:
        y = y[None, :]
    if x.shape[1] != y.shape[1]:
        raise ValidationError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    m = max(x.shape[0], y.shape[0], np.size(t))
    x = np.broadcast_to(x, (m, x.shape[1]))
    y = np.broadcast_to(y, (m, y.shape[1]))
    as_points(x)
    as_points(y)
    t = np.broadcast_to(np.asarray(t, dtype=float), (m,)).copy()
    if not np.all(np.isfinite(t) & (t > 0)):
        raise ValidationError("t must be finite and positive")
    near = t * t + np.sum((x - y) ** 2, axis=1)
    if np.any(near < NEAR_DIAGONAL):
        raise KernelRangeError("t^2 + |x-y|^2 below 1e-12: kernel is not reliably computable")
    pieces = [_chunk(t[i:i + CHUNK], x[i:i + CHUNK], y[i:i + CHUNK], parts, q)
              for i in range(0, m, CHUNK)]
    out = {k: np.concatenate([pc[k] for pc in pieces]) for k in pieces[0]}
    if strict and not out["converged"].all():
        first = parts[0]
        raise ConvergenceError(
            f"kernel quadrature missed rel_tol={q.rel_tol} within {q.max_subdivisions} subdivisions",
            estimate=out[first], error=out[first + "_err"])
    return out


def _single(part, p: KernelPoint, q, index=None):
    out = kernel_values(p.t, p.x, p.y, (part,), q)
    v = out[part][0]
    return float(v if index is None else v[index])


def poisson_kernel(p: KernelPoint, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``P_t(x, y)``; strictly positive."""
    return _single("p", p, q)


def poisson_kernel_dt(p: KernelPoint, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``d/dt P_t(x, y)``."""
    return _single("dt", p, q)


def _check_index(i, n):
    if int(i) != i or not 1 <= i <= n:
        raise ValidationError(f"coordinate index must be in 1..{n}, got {i}")
    return int(i) - 1


def poisson_kernel_dx(i: int, p: KernelPoint, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``d/dx_i P_t(x, y)`` with a 1-based coordinate index ``i``."""
    return _single("dx", p, q, _check_index(i, p.n))


def poisson_kernel_dtdx(i: int, p: KernelPoint, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Mixed derivative ``d/dt d/dx_i P_t(x, y)``."""
    return _single("dtdx", p, q, _check_index(i, p.n))
