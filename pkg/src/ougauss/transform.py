"""Admissibility and the Poisson integrals ``P_t f``, ``d/dt P_t f``, ``d/dx_i P_t f``.

Two independent routes are provided.

* Kernel route (:func:`poisson_integral` and friends): quadrature over ``y`` of
  the kernel from :mod:`ougauss.kernels` against ``f``.
* Subordination route (:func:`subordinated`): the heat semigroup ``T_s f(x)``
  is computed first by a Gaussian-weighted rule in ``y``, then integrated
  against the subordinator in ``s``. The ``s``-nodes are shared by every
  ``(t, x)`` pair, which makes whole sweeps cheap. The analyzer uses it.

The two routes share no code beyond the adaptive driver, so each checks the other.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf, roots_legendre

from .catalog import FieldSum, ScalarField
from .errors import InadmissibleFieldError, ValidationError
from .geometry import as_point, as_points
from .kernels import DEFAULT_SPEC, LOW_CUT_MARGIN, TAIL_START, QuadratureSpec, kernel_values
from .quadrature import cubature


class VerdictBasis(str, enum.Enum):
    CONVERGED = "CONVERGED"
    DIVERGENCE_DETECTED = "DIVERGENCE_DETECTED"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    partial_integrals: tuple = field(default_factory=tuple)
    verdict_basis: VerdictBasis = VerdictBasis.INCONCLUSIVE

    def to_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "partial_integrals": [[r, v] for r, v in self.partial_integrals],
            "verdict_basis": self.verdict_basis.value,
        }


def _log_weight(f, pts):
    r = np.linalg.norm(pts, axis=-1)
    return -r * r - 0.5 * np.log(np.log(math.e + r)) + f.log_abs(pts)


def _shell(f, r0, r1, q):
    n = f.n
    tol = dict(rel_tol=q.rel_tol, abs_tol=q.abs_tol, max_subdivisions=q.max_subdivisions)
    if n == 1:
        g = lambda p: np.exp(_log_weight(f, p)) + np.exp(_log_weight(f, -p))
        return cubature(g, [r0], [r1], **tol).value
    if n == 2:
        def g(p):
            rho, th = p[:, 0], p[:, 1]
            pts = np.stack([rho * np.cos(th), rho * np.sin(th)], axis=1)
            return rho * np.exp(_log_weight(f, pts))
        return cubature(g, [r0, 0.0], [r1, 2 * math.pi], **tol).value

    def g(p):
        rho, th, ph = p[:, 0], p[:, 1], p[:, 2]
        st = np.sin(th)
        pts = np.stack([rho * st * np.cos(ph), rho * st * np.sin(ph), rho * np.cos(th)], axis=1)
        return rho * rho * st * np.exp(_log_weight(f, pts))
    return cubature(g, [r0, 0.0, 0.0], [r1, math.pi, 2 * math.pi], **tol).value


@functools.lru_cache(maxsize=256)
def admissibility(f, q: QuadratureSpec = DEFAULT_SPEC, r_max: float = 64.0) -> AdmissibilityReport:
    """Check the growth condition on nested balls of radius 2, 4, 8, ..., ``r_max``.

    Converged: the last shell adds at most ``rel_tol`` of the total.
    Divergence: the shell increments grow over the last three shells.
    """
    if r_max < 8:
        raise ValidationError("r_max must be at least 8")
    radii = [2.0]
    while radii[-1] * 2 < r_max:
        radii.append(radii[-1] * 2)
    if radii[-1] < r_max:
        radii.append(float(r_max))
    incs, total, partial, prev = [], 0.0, [], 0.0
    for r in radii:
        inc = float(_shell(f, prev, r, q))
        total += inc
        incs.append(inc)
        partial.append((r, total))
        prev = r
    if incs[-1] <= max(q.abs_tol, q.rel_tol * total):
        basis = VerdictBasis.CONVERGED
    elif len(incs) >= 4 and incs[-1] > incs[-2] > incs[-3] > 0:
        basis = VerdictBasis.DIVERGENCE_DETECTED
    else:
        basis = VerdictBasis.INCONCLUSIVE
    return AdmissibilityReport(basis is VerdictBasis.CONVERGED, tuple(partial), basis)


def require_admissible(f) -> None:
    """Reject fields that fail the growth condition before any integration starts."""
    if not isinstance(f, (ScalarField, FieldSum)):
        raise ValidationError(f"expected a catalog field, got {type(f).__name__}")
    if not f.admissible:
        raise InadmissibleFieldError(f"{f} violates the growth condition; its Poisson integral does not exist")


def truncation_radius(x, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    return max(float(np.linalg.norm(x)), 1.0) + math.sqrt(math.log(1.0 / q.abs_tol)) + 4.0


def _kernel_route(f, t, x, part, index, q, radius=None):
    require_admissible(f)
    x = as_point(x, f.n)
    t = float(t)
    if not (math.isfinite(t) and t > 0):
        raise ValidationError("t must be finite and positive")
    n = f.n
    R = truncation_radius(x, q) if radius is None else float(radius)
    bps = [sorted({0.0, float(x[d]), *f.kinks[d]}) for d in range(n)]

    def g(y):
        kv = kernel_values(t, x, y, (part,), q)[part]
        if index is not None:
            kv = kv[:, index]
        return kv * f(y)

    res = cubature(g, [-R] * n, [R] * n, rel_tol=q.rel_tol, abs_tol=q.abs_tol,
                   max_subdivisions=q.max_subdivisions * 2 ** (n - 1), breakpoints=bps)
    return float(res.value)


def _index(i, n):
    if int(i) != i or not 1 <= i <= n:
        raise ValidationError(f"coordinate index must be in 1..{n}, got {i}")
    return int(i) - 1


def poisson_integral(f, t: float, x, q: QuadratureSpec = DEFAULT_SPEC, radius=None) -> float:
    """``P_t f(x)`` by quadrature of the kernel over a truncated ``y``-box."""
    return _kernel_route(f, t, x, "p", None, q, radius)


def poisson_integral_dt(f, t: float, x, q: QuadratureSpec = DEFAULT_SPEC, radius=None) -> float:
    """``d/dt P_t f(x)``."""
    return _kernel_route(f, t, x, "dt", None, q, radius)


def poisson_integral_dx(f, i: int, t: float, x, q: QuadratureSpec = DEFAULT_SPEC, radius=None) -> float:
    """``d/dx_i P_t f(x)`` with a 1-based index."""
    return _kernel_route(f, t, x, "dx", _index(i, f.n), q, radius)


def poisson_integral_dtdx(f, i: int, t: float, x, q: QuadratureSpec = DEFAULT_SPEC, radius=None) -> float:
    """``d/dx_i d/dt P_t f(x)`` computed from the mixed kernel derivative."""
    return _kernel_route(f, t, x, "dtdx", _index(i, f.n), q, radius)


# ---------------------------------------------------------------------------
# Subordination route

Z_MAX = 8.5


@dataclass(frozen=True)
class HeatRule:
    """Composite Gauss-Legendre rule on ``[-Z_MAX, Z_MAX]`` per axis for the heat integral.

    Each segment between kinks is cut into ``pieces`` uniform panels; the two
    end panels are further cut into ``levels`` geometrically shrinking panels
    (ratio ``grading``) so cusps and cone points at kinks keep fast convergence.
    """

    pieces: int = 8
    order: int = 10
    levels: int = 8
    grading: float = 0.15

    @classmethod
    def for_dim(cls, n):
        # the tensor product costs (nodes per axis)^n, so coarsen with dimension
        return {1: cls(), 2: cls(6, 8, 6)}.get(n, cls(4, 8, 3))

    def fractions(self) -> np.ndarray:
        uniform = np.linspace(0.0, 1.0, self.pieces + 1)
        if self.levels == 0:
            return uniform
        h = uniform[1]
        inner = h * self.grading ** np.arange(self.levels, 0, -1.0)
        return np.concatenate([[0.0], inner, uniform[1:-1], 1.0 - inner[::-1], [1.0]])


def _axis_rule(kinks, r, sigma, xd, rule):
    # kinks of f along this axis, mapped to z and used as panel edges
    k = np.asarray(kinks, dtype=float)
    zk = (k[None, None, :] - r[:, None, None] * xd[None, :, None]) / sigma[:, None, None]
    zk = np.clip(zk, -Z_MAX, Z_MAX)
    shape = zk.shape[:2]
    lo = np.full(shape + (1,), -Z_MAX)
    hi = np.full(shape + (1,), Z_MAX)
    edges = np.sort(np.concatenate([lo, zk, hi], axis=2), axis=2)
    frac = rule.fractions()
    a, b = edges[..., :-1], edges[..., 1:]
    sub = a[..., None] + (b - a)[..., None] * frac
    sa, sb = sub[..., :-1], sub[..., 1:]
    xi, w = roots_legendre(rule.order)
    half = 0.5 * (sb - sa)
    z = (0.5 * (sa + sb))[..., None] + half[..., None] * xi
    wz = half[..., None] * w
    return z.reshape(shape + (-1,)), wz.reshape(shape + (-1,))


def heat_values(f, s, x, grad=False, rule: HeatRule | None = None):
    """Heat semigroup ``T_s f(x)`` (and optionally its ``x``-gradient).

    ``s`` has shape ``(N,)`` and ``x`` shape ``(K, n)``; the result has shape
    ``(N, K)`` (gradient ``(N, K, n)``). Uses ``y = e^-s x + sqrt(1 - e^-2s) z``
    so the Mehler weight becomes ``exp(-|z|^2)``.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    x = as_points(x, f.n)
    n = f.n
    rule = rule or HeatRule.for_dim(n)
    r = np.exp(-s)
    sigma = np.sqrt(-np.expm1(-2.0 * s))
    axes = [_axis_rule(f.kinks[d], r, sigma, x[:, d], rule) for d in range(n)]
    norm = math.pi ** (-n / 2)
    N, K = s.size, x.shape[0]
    if n == 1:
        z, w = axes[0]
        y = r[:, None, None] * x[None, :, 0, None] + sigma[:, None, None] * z
        fw = w * np.exp(-z * z) * f(y[..., None])
        val = norm * fw.sum(axis=2)
        if not grad:
            return val, None
        g = norm * np.sum(fw * (2.0 * r[:, None, None] / sigma[:, None, None]) * z, axis=2)
        return val, g[..., None]
    # tensor product over axes: broadcast each axis into its own trailing slot
    Q = axes[0][0].shape[2]
    pts, wt, zs = [], np.ones((N, K) + (Q,) * n), []
    for d, (z, w) in enumerate(axes):
        shp = (N, K) + tuple(Q if e == d else 1 for e in range(n))
        zd = z.reshape(shp)
        wt = wt * (w.reshape(shp) * np.exp(-zd * zd))
        pts.append(r.reshape((N, 1) + (1,) * n) * x[:, d].reshape((1, K) + (1,) * n)
                   + sigma.reshape((N, 1) + (1,) * n) * zd)
        zs.append(zd)
    y = np.stack(np.broadcast_arrays(*pts), axis=-1)
    fw = wt * f(y)
    axes_sum = tuple(range(2, 2 + n))
    val = norm * fw.sum(axis=axes_sum)
    if not grad:
        return val, None
    fac = (2.0 * r / sigma).reshape((N, 1) + (1,) * n)
    g = np.stack([norm * np.sum(fw * fac * zs[d], axis=axes_sum) for d in range(n)], axis=-1)
    return val, g


SUB_PARTS = ("p", "dt", "dx")


def subordinated(f, t, x, parts=("dt",), q: QuadratureSpec = DEFAULT_SPEC, rule: HeatRule | None = None,
                 strict=True):
    """``P_t f``, ``d/dt P_t f`` and ``grad P_t f`` for every pair in ``t x x``.

    ``t`` is ``(T,)`` and ``x`` is ``(K, n)``. Returns a dict with arrays of
    shape ``(K, T)`` for ``p`` and ``dt`` and ``(K, T, n)`` for ``dx``, plus a
    ``converged`` flag.
    """
    require_admissible(f)
    parts = tuple(p for p in SUB_PARTS if p in parts)
    if not parts:
        raise ValidationError("no valid parts requested")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if not np.all(np.isfinite(t) & (t > 0)):
        raise ValidationError("t must be finite and positive")
    x = as_points(x, f.n)
    n, K, T = f.n, x.shape[0], t.size
    u = math.log(1.0 / q.abs_tol) + LOW_CUT_MARGIN
    s_low = t * t / (4.0 * u)
    v_lo = max(math.log(s_low.min()), q.s_cut_low)
    v_hi = min(math.log(max(TAIL_START, 2.0 * s_low.max())), q.s_cut_high)
    want_grad = "dx" in parts
    c0 = 1.0 / (2.0 * math.sqrt(math.pi))

    def g(v):
        v = v[:, 0]
        s = np.exp(v)[:, None]
        H, G = heat_values(f, s[:, 0], x, grad=want_grad, rule=rule)
        e = np.exp(-t[None, :] ** 2 / (4.0 * s)) / np.sqrt(s)
        cols = []
        if "p" in parts:
            cols.append((H[:, :, None] * (c0 * t * e)[:, None, :]).reshape(v.size, -1))
        if "dt" in parts:
            wdt = c0 * e * (1.0 - t[None, :] ** 2 / (2.0 * s))
            cols.append((H[:, :, None] * wdt[:, None, :]).reshape(v.size, -1))
        if want_grad:
            cols.append((G[:, :, None, :] * (c0 * t * e)[:, None, :, None]).reshape(v.size, -1))
        return np.concatenate(cols, axis=1)

    nb = max(2, int(math.ceil((v_hi - v_lo) / 2.0)))
    bps = np.linspace(v_lo, v_hi, nb + 1)[1:-1]
    res = cubature(g, [v_lo], [v_hi], rel_tol=q.rel_tol, abs_tol=q.abs_tol,
                   max_subdivisions=q.max_subdivisions, breakpoints=[bps], strict=strict)
    big_s = math.exp(v_hi)
    H_inf, _ = heat_values(f, [big_s], x, rule=rule)
    H_inf = H_inf[0][:, None]
    out, k = {}, 0
    if "p" in parts:
        out["p"] = res.value[k:k + K * T].reshape(K, T) + erf(t / (2 * math.sqrt(big_s)))[None, :] * H_inf
        k += K * T
    if "dt" in parts:
        tail = np.exp(-t * t / (4 * big_s)) / math.sqrt(math.pi * big_s)
        out["dt"] = res.value[k:k + K * T].reshape(K, T) + tail[None, :] * H_inf
        k += K * T
    if want_grad:
        out["dx"] = res.value[k:k + K * T * n].reshape(K, T, n)
    out["converged"] = bool(np.all(res.converged))
    return out
