"""Closed catalog of test functions.

Names and parameters are fixed so that admissibility verdicts and expected
transforms stay auditable. Coordinate indices are 1-based, matching the
textual form ``COORD:1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# name -> (parameter kind, parameter count)
_SPECS = {
    "CONST": ("value", 1),
    "COORD": ("index", 1),
    "HERMITE2": ("index", 1),
    "LOG_ALPHA": ("alpha", 1),
    "SINE": ("index", 1),
    "EXP_GAUSS": ("value", 1),
    "ABS_ALPHA": ("alpha", 1),
}

NAMES = tuple(_SPECS)


@dataclass(frozen=True)
class ScalarField:
    name: str
    params: tuple = ()
    n: int = 1

    def __post_init__(self):
        name = str(self.name).upper()
        if name not in _SPECS:
            raise ValidationError(f"unknown catalog function {self.name!r}; choose from {', '.join(NAMES)}")
        object.__setattr__(self, "name", name)
        kind, count = _SPECS[name]
        params = tuple(float(p) for p in np.atleast_1d(self.params))
        if len(params) != count:
            raise ValidationError(f"{name} takes {count} parameter(s), got {len(params)}")
        if not 1 <= int(self.n) <= 3:
            raise ValidationError(f"dimension must be in 1..3, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        p = params[0]
        if not math.isfinite(p):
            raise ValidationError("parameters must be finite")
        if kind == "index":
            if p != int(p) or not 1 <= p <= self.n:
                raise ValidationError(f"{name} index must be in 1..{self.n}, got {p}")
            params = (float(int(p)),)
        if kind == "alpha" and not 0 < p < 1:
            raise ValidationError(f"{name} exponent must lie in (0, 1), got {p}")
        object.__setattr__(self, "params", params)

    @classmethod
    def parse(cls, text: str, n: int = 1) -> "ScalarField":
        """Parse ``NAME:param`` (e.g. ``LOG_ALPHA:0.5``)."""
        name, _, arg = str(text).partition(":")
        if not arg:
            raise ValidationError(f"expected NAME:param, got {text!r}")
        try:
            value = float(arg)
        except ValueError:
            raise ValidationError(f"bad parameter in {text!r}") from None
        return cls(name, (value,), n)

    def __str__(self):
        p = self.params[0]
        arg = str(int(p)) if _SPECS[self.name][0] == "index" else repr(p)
        return f"{self.name}:{arg}"

    @property
    def _i(self):
        return int(self.params[0]) - 1

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if pts.shape[-1] != self.n:
            raise ValidationError(f"{self} is {self.n}-dimensional, got points of dimension {pts.shape[-1]}")
        p = self.params[0]
        name = self.name
        if name == "CONST":
            return np.full(pts.shape[:-1], p)
        if name == "COORD":
            return pts[..., self._i].copy()
        if name == "HERMITE2":
            return pts[..., self._i] ** 2 - 0.5
        if name == "SINE":
            return np.sin(pts[..., self._i])
        r = np.linalg.norm(pts, axis=-1)
        if name == "LOG_ALPHA":
            return np.log(math.e + r) ** (p / 2)
        if name == "EXP_GAUSS":
            return np.exp(p * r * r)
        # ABS_ALPHA
        with np.errstate(divide="ignore"):
            return np.minimum(1.0, np.where(r > 0, np.exp(p * np.log(r)), 0.0))

    def log_abs(self, pts) -> np.ndarray:
        """``log|f|`` without overflow for the Gaussian-growth probes."""
        pts = np.asarray(pts, dtype=float)
        if self.name == "EXP_GAUSS":
            return self.params[0] * np.sum(pts * pts, axis=-1)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self(pts)))

    @property
    def admissible(self) -> bool:
        """Static verdict on the growth condition; every member is decided analytically."""
        if self.name == "EXP_GAUSS":
            return self.params[0] < 1.0
        return True

    @property
    def kinks(self) -> tuple:
        """Per-axis coordinates where ``f`` fails to be smooth (seed quadrature breakpoints)."""
        if self.name == "LOG_ALPHA":
            return ((0.0,),) * self.n
        if self.name == "ABS_ALPHA":
            return ((-1.0, 0.0, 1.0),) * self.n
        return ((),) * self.n

    @property
    def continuous(self) -> bool:
        return True

    def __mul__(self, c: float) -> "FieldSum":
        return FieldSum(((float(c), self),))

    __rmul__ = __mul__

    def __add__(self, other) -> "FieldSum":
        return FieldSum(((1.0, self),)) + other


@dataclass(frozen=True)
class FieldSum:
    """Finite linear combination of catalog members, used for linearity checks."""

    terms: tuple

    def __post_init__(self):
        dims = {f.n for _, f in self.terms}
        if len(dims) != 1:
            raise ValidationError("cannot combine fields of different dimensions")

    @property
    def n(self) -> int:
        return self.terms[0][1].n

    def __call__(self, pts):
        return sum(c * f(pts) for c, f in self.terms)

    def log_abs(self, pts):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self(pts)))

    @property
    def admissible(self) -> bool:
        return all(f.admissible for _, f in self.terms)

    @property
    def kinks(self) -> tuple:
        return tuple(tuple(sorted({k for _, f in self.terms for k in f.kinks[d]})) for d in range(self.n))

    def __mul__(self, c: float) -> "FieldSum":
        return FieldSum(tuple((float(c) * a, f) for a, f in self.terms))

    __rmul__ = __mul__

    def __add__(self, other) -> "FieldSum":
        if isinstance(other, ScalarField):
            other = FieldSum(((1.0, other),))
        return FieldSum(self.terms + other.terms)

    def __str__(self):
        return " + ".join(f"{c!r}*{f}" for c, f in self.terms)
