"""Points, the parallel/orthogonal split, the Gaussian distance and the Lipschitz moduli.

Everything here is closed form. Functions accept either single points
(shape ``(n,)``) or stacks of points (shape ``(m, n)``) and broadcast.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

MAX_DIM = 3


class ModulusKind(str, enum.Enum):
    GGLIP = "GGLIP"
    GLIP = "GLIP"


def as_point(x, n: int | None = None) -> np.ndarray:
    """Validate and return a 1-D float array of length ``n`` (1 to 3)."""
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1:
        raise ValidationError(f"a point must be one-dimensional, got shape {p.shape}")
    if not 1 <= p.size <= MAX_DIM:
        raise ValidationError(f"dimension must be in 1..{MAX_DIM}, got {p.size}")
    if n is not None and p.size != n:
        raise ValidationError(f"dimension mismatch: expected {n}, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise ValidationError("point coordinates must be finite")
    return p


def as_points(x, n: int | None = None) -> np.ndarray:
    """Validate a stack of points; a single point becomes shape ``(1, n)``."""
    p = np.asarray(x, dtype=float)
    if p.ndim == 1:
        p = p[None, :] if n is None or p.size == n else p[:, None]
    if p.ndim != 2 or not 1 <= p.shape[1] <= MAX_DIM:
        raise ValidationError(f"expected points of shape (m, n<= {MAX_DIM}), got {p.shape}")
    if n is not None and p.shape[1] != n:
        raise ValidationError(f"dimension mismatch: expected {n}, got {p.shape[1]}")
    if not np.all(np.isfinite(p)):
        raise ValidationError("point coordinates must be finite")
    return p


def _check_pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValidationError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("point coordinates must be finite")
    return x, y


@dataclass(frozen=True)
class ParallelSplit:
    y_par: np.ndarray
    y_perp: np.ndarray
    sign: np.ndarray | int


def _split_arrays(x, y):
    x, y = _check_pair(x, y)
    x, y = np.broadcast_arrays(x, y)
    n = x.shape[-1]
    dot = np.sum(x * y, axis=-1)
    sign = np.where(dot < 0, -1, 1)
    xx = np.sum(x * x, axis=-1)
    if n == 1:
        return y.copy(), np.zeros_like(y), sign
    safe = np.where(xx > 0, xx, 1.0)
    y_par = (dot / safe)[..., None] * x
    degenerate = (xx == 0)[..., None]
    y_par = np.where(degenerate, y, y_par)
    y_perp = np.where(degenerate, 0.0, y - y_par)
    return y_par, y_perp, sign


def decompose(x, y) -> ParallelSplit:
    """Split ``y`` into components parallel and orthogonal to ``x``.

    For ``x = 0`` or ``n = 1`` the whole of ``y`` counts as parallel.
    ``sign`` is the sign of ``<x, y>`` with ``sgn 0 = +1``.
    """
    y_par, y_perp, sign = _split_arrays(x, y)
    if np.ndim(sign) == 0:
        sign = int(sign)
    return ParallelSplit(y_par, y_perp, sign)


def _phi(a):
    a = np.asarray(a, dtype=float)
    return np.where(a < 0, -1.0, 1.0) * np.log1p(np.abs(a))


def gauss_dist_1d(a, b):
    """Distance ``|int_a^b dxi / (1 + |xi|)|`` via its closed form."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValidationError("gauss_dist_1d needs finite arguments")
    d = np.abs(_phi(a) - _phi(b))
    return float(d) if d.ndim == 0 else d


def _dist_par(x, y, split=None):
    y_par, _, sign = split if split is not None else _split_arrays(x, y)
    nx = np.linalg.norm(x, axis=-1)
    npar = np.linalg.norm(y_par, axis=-1)
    return np.abs(np.log1p(nx) - sign * np.log1p(npar))


def gauss_dist_par(x, y):
    """Gaussian distance from ``x`` to ``y_x`` measured along the line through ``x``."""
    x, y = _check_pair(x, y)
    d = _dist_par(x, y)
    return float(d) if np.ndim(d) == 0 else d


def _pow(r, alpha):
    # r**alpha through exp(alpha*log r), with r == 0 sent to 0
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.exp(alpha * np.log(r))
    return np.where(r > 0, out, 0.0)


def modulus(kind, alpha: float, x, y):
    """Lipschitz modulus of the global space (``GGLIP``) or its bounded variant (``GLIP``).

    GGLIP: ``min(|x-y|^a, d(x, y_x)^(a/2) + |y'_x|^a)``; GLIP caps that at 1.
    """
    kind = ModulusKind(kind)
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    x, y = _check_pair(x, y)
    x, y = np.broadcast_arrays(x, y)
    split = _split_arrays(x, y)
    near = _pow(np.linalg.norm(x - y, axis=-1), alpha)
    far = _pow(_dist_par(x, y, split), alpha / 2) + _pow(np.linalg.norm(split[1], axis=-1), alpha)
    m = np.minimum(near, far)
    if kind is ModulusKind.GLIP:
        m = np.minimum(1.0, m)
    return float(m) if m.ndim == 0 else m


def gaussian_density(x):
    """Density ``pi^(-n/2) exp(-|x|^2)`` of the Gaussian measure."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    v = math.pi ** (-n / 2) * np.exp(-np.sum(x * x, axis=-1))
    return float(v) if np.ndim(v) == 0 else v


def comparability_constant(x, y) -> float:
    """Empirical constant ``c0`` with ``d(x, y_x) (1 + |x|) / |x - y_x|`` in ``[1/c0, c0]``.

    Only pairs with ``<x, y> > 0``, ``1/2 < |x|/|y_x| < 2`` and ``y_x != x`` are
    used. Raises if none qualify.
    """
    x, y = _check_pair(np.atleast_2d(x), np.atleast_2d(y))
    x, y = np.broadcast_arrays(x, y)
    split = _split_arrays(x, y)
    nx = np.linalg.norm(x, axis=-1)
    npar = np.linalg.norm(split[0], axis=-1)
    gap = np.linalg.norm(x - split[0], axis=-1)
    dot = np.sum(x * y, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = nx / npar
    ok = (dot > 0) & (q > 0.5) & (q < 2.0) & (gap > 0)
    if not ok.any():
        raise ValidationError("no pair satisfies the comparability conditions")
    r = _dist_par(x[ok], y[ok], tuple(a[ok] for a in split)) * (1 + nx[ok]) / gap[ok]
    return float(max(r.max(), 1.0 / r.min()))
