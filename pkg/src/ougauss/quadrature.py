"""Vectorised adaptive Gauss-Kronrod cubature on boxes.

The integrand may be vector valued: every member shares one panel mesh, and a
panel is bisected while any member still misses its tolerance there. Each
round evaluates all new panels in one call, so the Python loop count stays
small even when thousands of panels are needed.

Member ``j`` converges when its summed error estimate is at most
``max(abs_tol, rel_tol * int |g_j|)``. Using the L1 norm as the scale keeps the
criterion meaningful for integrals that cancel to zero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

# 15-point Kronrod rule with its embedded 7-point Gauss rule (QUADPACK qk15).
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
KRONROD_W = np.concatenate([_WK[:-1], _WK[::-1]])
GAUSS_W = np.zeros(15)
GAUSS_W[1:7:2] = _WG[:3]
GAUSS_W[7] = _WG[3]
GAUSS_W[9:14:2] = _WG[2::-1]


@dataclass
class CubatureResult:
    value: np.ndarray
    error: np.ndarray
    l1: np.ndarray
    converged: np.ndarray
    n_panels: int
    n_subdivisions: int

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))


def _tensor_rule(n):
    idx = np.array(list(itertools.product(range(15), repeat=n)))
    nodes = NODES[idx]
    wk = np.prod(KRONROD_W[idx], axis=1)
    wg = np.prod(GAUSS_W[idx], axis=1)
    return nodes, wk, wg


_RULES = {}


def _rule(n):
    if n not in _RULES:
        _RULES[n] = _tensor_rule(n)
    return _RULES[n]


def _initial_boxes(lower, upper, breakpoints):
    edges = []
    for d, (a, b) in enumerate(zip(lower, upper)):
        extra = [] if breakpoints is None else breakpoints[d]
        cuts = sorted({a, b, *(float(c) for c in extra if a < c < b)})
        edges.append(np.array(cuts))
    lo, hi = [], []
    for cell in itertools.product(*(range(len(e) - 1) for e in edges)):
        lo.append([edges[d][k] for d, k in enumerate(cell)])
        hi.append([edges[d][k + 1] for d, k in enumerate(cell)])
    return np.array(lo, dtype=float), np.array(hi, dtype=float)


def _split(lo, hi):
    n = lo.shape[1]
    mid = 0.5 * (lo + hi)
    new_lo, new_hi = [], []
    for corner in itertools.product((0, 1), repeat=n):
        c = np.array(corner, dtype=bool)
        new_lo.append(np.where(c, mid, lo))
        new_hi.append(np.where(c, hi, mid))
    return np.concatenate(new_lo), np.concatenate(new_hi)


def cubature(func, lower, upper, *, rel_tol=1e-8, abs_tol=1e-14, max_subdivisions=200,
             breakpoints=None, strict=True) -> CubatureResult:
    """Integrate ``func`` over the box ``[lower, upper]``.

    ``func`` maps an ``(N, n)`` array of nodes to ``(N,)`` or ``(N, m)`` values.
    ``breakpoints`` lists, per dimension, interior coordinates where the
    integrand is not smooth; they seed the initial partition.
    ``max_subdivisions`` bounds the number of panel splits. With ``strict`` a
    member that misses its tolerance raises :class:`ConvergenceError`.
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    n = lower.size
    nodes, wk, wg = _rule(n)
    lo, hi = _initial_boxes(lower, upper, breakpoints)

    est_k = est_g = est_a = None
    scalar = False
    n_split = 0
    while True:
        half = 0.5 * (hi - lo)
        center = 0.5 * (hi + lo)
        pts = center[:, None, :] + half[:, None, :] * nodes[None, :, :]
        vals = np.asarray(func(pts.reshape(-1, n)), dtype=float)
        if vals.ndim == 1:
            scalar = True
            vals = vals[:, None]
        vals = vals.reshape(lo.shape[0], nodes.shape[0], -1)
        if not np.all(np.isfinite(vals)):
            raise ConvergenceError("integrand returned non-finite values")
        vol = np.prod(half, axis=1)[:, None]
        k = vol * np.einsum("pkm,k->pm", vals, wk)
        g = vol * np.einsum("pkm,k->pm", vals, wg)
        a = vol * np.einsum("pkm,k->pm", np.abs(vals), wk)
        if est_k is None:
            est_k, est_g, est_a, plo, phi = k, g, a, lo, hi
        else:
            est_k = np.concatenate([est_k, k])
            est_g = np.concatenate([est_g, g])
            est_a = np.concatenate([est_a, a])
            plo = np.concatenate([plo, lo])
            phi = np.concatenate([phi, hi])

        err = np.abs(est_k - est_g)
        total_err = err.sum(axis=0)
        tol = np.maximum(abs_tol, rel_tol * est_a.sum(axis=0))
        failing = total_err > tol
        if not failing.any() or n_split >= max_subdivisions:
            break
        n_panels = err.shape[0]
        badness = np.max(err[:, failing] / tol[failing], axis=1)
        pick = badness > 1.0 / n_panels
        budget = max_subdivisions - n_split
        if pick.sum() > budget:
            order = np.argsort(-badness, kind="stable")[:budget]
            pick = np.zeros_like(pick)
            pick[order] = True
        n_split += int(pick.sum())
        lo, hi = _split(plo[pick], phi[pick])
        keep = ~pick
        est_k, est_g, est_a = est_k[keep], est_g[keep], est_a[keep]
        plo, phi = plo[keep], phi[keep]

    value = est_k.sum(axis=0)
    res = CubatureResult(value, total_err, est_a.sum(axis=0), ~failing, est_k.shape[0], n_split)
    if scalar:
        res.value, res.error, res.l1, res.converged = value[0], total_err[0], res.l1[0], ~failing[0]
    if strict and not res.all_converged:
        raise ConvergenceError(
            f"tolerance not met after {n_split} subdivisions", estimate=res.value, error=res.error)
    return res


def integrate(func, a: float, b: float, **kw) -> CubatureResult:
    """One-dimensional front end: ``func`` takes a 1-D array of nodes."""
    bp = kw.pop("breakpoints", None)
    return cubature(lambda p: func(p[:, 0]), [a], [b],
                    breakpoints=None if bp is None else [bp], **kw)
