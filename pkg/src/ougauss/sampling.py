"""Deterministic low-discrepancy and grid samplers shared by certification and sweeps."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .errors import ValidationError

DEFAULT_SEED = 20150413


def sobol(dim: int, count: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """First ``count`` points of a scrambled Sobol sequence in ``[0, 1)^dim``.

    The prefix property holds: ``sobol(d, m)`` equals ``sobol(d, 2m)[:m]``.
    """
    if count < 1:
        raise ValidationError("sample count must be positive")
    eng = qmc.Sobol(dim, scramble=True, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return eng.random(count)


def grid(dim: int, count: int) -> np.ndarray:
    """Tensor grid of cell midpoints with about ``count`` points, in lexicographic order."""
    if count < 1:
        raise ValidationError("sample count must be positive")
    k = max(2, int(math.ceil(count ** (1.0 / dim))))
    axis = (np.arange(k) + 0.5) / k
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)[:count]


def cube_to_ball(u: np.ndarray, radius: float) -> np.ndarray:
    """Map ``[0,1)^n`` onto the closed ball of the given radius (radial rescaling of the cube)."""
    c = 2.0 * u - 1.0
    if c.shape[1] == 1:
        return radius * c
    inf = np.max(np.abs(c), axis=1, keepdims=True)
    two = np.linalg.norm(c, axis=1, keepdims=True)
    scale = np.where(two > 0, inf / np.where(two > 0, two, 1.0), 0.0)
    return radius * c * scale


@dataclass(frozen=True)
class SamplerSpec:
    """Quasi-random (or grid) sampler over ``(t, x, y)``.

    ``t`` is log-uniform on ``[t_min, t_max]``; ``x`` and ``y`` fill balls of the
    given radii.
    """

    kind: str = "sobol"
    seed: int = DEFAULT_SEED
    t_min: float = 1e-2
    t_max: float = 1e2
    x_radius: float = 6.0
    y_radius: float = 6.0

    def __post_init__(self):
        if self.kind not in ("sobol", "grid"):
            raise ValidationError(f"sampler kind must be 'sobol' or 'grid', got {self.kind!r}")
        if not 0 < self.t_min < self.t_max or not math.isfinite(self.t_max):
            raise ValidationError("need 0 < t_min < t_max < inf")
        if not (self.x_radius > 0 and self.y_radius > 0):
            raise ValidationError("sampling radii must be positive")

    def replace(self, **kw) -> "SamplerSpec":
        return SamplerSpec(**{**self.__dict__, **kw})

    def draw(self, n: int, count: int):
        """Return ``(t, x, y)`` arrays with ``count`` rows for dimension ``n``."""
        u = sobol(1 + 2 * n, count, self.seed) if self.kind == "sobol" else grid(1 + 2 * n, count)
        lt = math.log(self.t_min) + u[:, 0] * (math.log(self.t_max) - math.log(self.t_min))
        t = np.exp(lt)
        x = cube_to_ball(u[:, 1:1 + n], self.x_radius)
        y = cube_to_ball(u[:, 1 + n:], self.y_radius)
        return t, x, y
