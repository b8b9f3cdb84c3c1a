"""Estimators for the two equivalent Lipschitz seminorms, plus growth diagnostics.

Both estimators are maxima over finite sets, hence lower bounds for the true
suprema. Membership verdicts are operational: an estimate counts as finite if
it is stable under refinement and does not keep growing when the domain is
doubled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ValidationError
from .geometry import ModulusKind, as_point, modulus
from .kernels import DEFAULT_SPEC, QuadratureSpec
from .sampling import DEFAULT_SEED, sobol
from .transform import poisson_integral, require_admissible, subordinated

REFINE_DRIFT = 0.10
GROWTH_FACTOR = 1.05
X_CHUNK = {1: 64, 2: 4, 3: 1}


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")


@dataclass(frozen=True)
class SweepGrid:
    t_min: float = 1e-2
    t_max: float = 1e2
    t_points: int = 25
    x_box_radius: float = 6.0
    x_points_per_axis: int = 25
    refine: bool = False

    def __post_init__(self):
        if not 0 < self.t_min < self.t_max:
            raise ValidationError("need 0 < t_min < t_max")
        if self.t_points < 5 or self.x_points_per_axis < 5:
            raise ValidationError("need at least 5 points per axis")
        if not self.x_box_radius > 0:
            raise ValidationError("x_box_radius must be positive")

    def t_values(self) -> np.ndarray:
        return np.geomspace(self.t_min, self.t_max, self.t_points)

    def x_points(self, n: int) -> np.ndarray:
        axis = np.linspace(-self.x_box_radius, self.x_box_radius, self.x_points_per_axis)
        mesh = np.meshgrid(*([axis] * n), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def refined(self) -> "SweepGrid":
        """Double the resolution; the new grid contains the old one."""
        return SweepGrid(self.t_min, self.t_max, 2 * self.t_points - 1, self.x_box_radius,
                         2 * self.x_points_per_axis - 1, self.refine)

    def widened(self, factor: int = 2) -> "SweepGrid":
        """Grow the box by ``factor`` at unchanged spacing (nested when points are odd)."""
        pts = (self.x_points_per_axis - 1) * factor + 1
        return SweepGrid(self.t_min, self.t_max, self.t_points, self.x_box_radius * factor, pts, self.refine)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class SeminormEstimate:
    value: float
    arg_t: float | None
    arg_x: list
    grid: object
    alpha: float
    arg_y: list | None = None
    kind: str = "poisson"

    def to_dict(self) -> dict:
        grid = self.grid.to_dict() if hasattr(self.grid, "to_dict") else self.grid
        return {
            "kind": self.kind,
            "value": self.value,
            "arg_t": self.arg_t,
            "arg_x": list(self.arg_x),
            "arg_y": None if self.arg_y is None else list(self.arg_y),
            "alpha": self.alpha,
            "grid": grid,
        }


def _lex_first(values, keys):
    """Index of the maximum of ``values``; ties go to the lexicographically smallest key row."""
    best = np.max(values)
    ties = np.flatnonzero(values == best)
    if ties.size == 1:
        return int(ties[0])
    k = keys[ties]
    return int(ties[np.lexsort(k.T[::-1])[0]])


def _map_chunks(fn, chunks, threads):
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, chunks))
    return [fn(c) for c in chunks]


def sweep(f, t, x, part="dt", q: QuadratureSpec = DEFAULT_SPEC, threads: int = 1) -> np.ndarray:
    """Subordination-route values of ``part`` on the grid ``x`` (rows) by ``t`` (columns)."""
    n = x.shape[1]
    step = X_CHUNK[n]
    chunks = [x[i:i + step] for i in range(0, x.shape[0], step)]
    out = _map_chunks(lambda c: subordinated(f, t, c, (part,), q)[part], chunks, threads)
    return np.concatenate(out, axis=0)


def _objective_grid(f, alpha, grid, q, threads):
    t = grid.t_values()
    x = grid.x_points(f.n)
    dt = sweep(f, t, x, "dt", q, threads)
    return t, x, t[None, :] ** (1 - alpha) * np.abs(dt)


def seminorm_poisson(f, alpha: float, grid: SweepGrid = SweepGrid(), q: QuadratureSpec = DEFAULT_SPEC,
                     threads: int = 1, trace: list | None = None) -> SeminormEstimate:
    """Grid maximum of ``t^(1-alpha) |d/dt P_t f(x)|``.

    With ``grid.refine`` a golden-section search in ``log t`` polishes the
    maximum at the best ``x``. Rows ``(t, x..., objective)`` are appended to
    ``trace`` when a list is passed.
    """
    _check_alpha(alpha)
    require_admissible(f)
    t, x, obj = _objective_grid(f, alpha, grid, q, threads)
    if trace is not None:
        for k in range(x.shape[0]):
            for j in range(t.size):
                trace.append((float(t[j]), *map(float, x[k]), float(obj[k, j])))
    flat = obj.ravel()
    keys = np.column_stack([np.repeat(x, t.size, axis=0), np.tile(t, x.shape[0])])
    i = _lex_first(flat, keys)
    kx, jt = divmod(i, t.size)
    value, arg_t, arg_x = float(flat[i]), float(t[jt]), x[kx]
    if grid.refine and 0 < jt < t.size - 1:
        def neg(lt):
            tt = math.exp(lt)
            d = subordinated(f, [tt], arg_x[None, :], ("dt",), q)["dt"][0, 0]
            return -(tt ** (1 - alpha) * abs(d))

        res = minimize_scalar(neg, bracket=(math.log(t[jt - 1]), math.log(t[jt]), math.log(t[jt + 1])),
                              method="golden", options={"xtol": 1e-4})
        if -res.fun > value and t[jt - 1] <= math.exp(res.x) <= t[jt + 1]:
            value, arg_t = float(-res.fun), float(math.exp(res.x))
    return SeminormEstimate(value, arg_t, arg_x.tolist(), grid, alpha)


@dataclass(frozen=True)
class PairSampler:
    """Quasi-random pairs in a box, always mixed with adversarial families.

    The families probe the regimes that separate the modulus branches:
    collinear far pairs, pairs through the origin, opposite-sign pairs,
    orthogonal offsets and near-diagonal pairs.
    """

    radius: float = 6.0
    seed: int = DEFAULT_SEED
    adversarial: bool = True

    def __post_init__(self):
        if not self.radius > 0:
            raise ValidationError("pair sampler radius must be positive")

    def to_dict(self):
        return asdict(self)

    def pairs(self, n: int, count: int):
        if count < 1:
            raise ValidationError("pair count must be positive")
        u = sobol(2 * n, count, self.seed)
        X = self.radius * (2 * u[:, :n] - 1)
        Y = self.radius * (2 * u[:, n:] - 1)
        if not self.adversarial:
            return X, Y
        R = self.radius
        fam_x, fam_y = [X], [Y]
        dirs = [np.eye(n)[0]]
        if n > 1:
            dirs.append(np.ones(n) / math.sqrt(n))
        rho = np.linspace(R / 2, R, 65)
        for e in dirs:
            for delta in (math.pi / 4, math.pi / 2, 2.0, math.pi):
                fam_x.append(np.outer(rho - delta, e))
                fam_y.append(np.outer(rho, e))
            fam_x.append(np.zeros((rho.size, n)))
            fam_y.append(np.outer(rho, e))
            fam_x.append(np.outer(rho, e))
            fam_y.append(np.outer(-rho / 2, e))
        if n > 1:
            e1, e2 = np.eye(n)[0], np.eye(n)[1]
            for h in (0.1, 1.0, 3.0):
                fam_x.append(np.outer(rho, e1))
                fam_y.append(np.outer(rho, e1) + h * e2)
        base = X[:64]
        for eps in (1e-3, 1e-2, 1e-1):
            fam_x.append(base)
            fam_y.append(base + eps * np.eye(n)[0])
        return np.concatenate(fam_x), np.concatenate(fam_y)


def _ratio_max(num, den, X, Y):
    keep = den > 0
    if not keep.any():
        raise ValidationError("every pair has zero modulus")
    r = np.where(keep, num / np.where(keep, den, 1.0), -np.inf)
    i = _lex_first(r, np.column_stack([X, Y]))
    return float(r[i]), X[i], Y[i]


def seminorm_holder(f, alpha: float, sampler: PairSampler = PairSampler(), n_pairs: int = 4096,
                    extra_pairs=None) -> SeminormEstimate:
    """Maximum of ``|f(x) - f(y)| / modulus(GGLIP, alpha, x, y)`` over sampled pairs."""
    _check_alpha(alpha)
    if int(n_pairs) != n_pairs or n_pairs < 100:
        raise ValidationError("n_pairs must be an integer >= 100")
    X, Y = sampler.pairs(f.n, int(n_pairs))
    if extra_pairs is not None:
        ex, ey = (np.asarray(a, dtype=float).reshape(-1, f.n) for a in extra_pairs)
        X, Y = np.concatenate([X, ex]), np.concatenate([Y, ey])
    num = np.abs(f(X) - f(Y))
    den = modulus(ModulusKind.GGLIP, alpha, X, Y)
    value, ax, ay = _ratio_max(num, np.atleast_1d(den), X, Y)
    return SeminormEstimate(value, None, ax.tolist(), {"sampler": sampler.to_dict(), "n_pairs": int(n_pairs)},
                            alpha, ay.tolist(), kind="holder")


def holder_ratio(f, alpha: float, sampler: PairSampler = PairSampler(), n_pairs: int = 4096) -> float:
    """Largest ``|f(x) - f(y)| / |x - y|^alpha`` over the pair sample."""
    _check_alpha(alpha)
    X, Y = sampler.pairs(f.n, n_pairs)
    d = np.linalg.norm(X - Y, axis=1)
    return _ratio_max(np.abs(f(X) - f(Y)), d ** alpha, X, Y)[0]


def _growing(values):
    return all(b > GROWTH_FACTOR * a for a, b in zip(values, values[1:]))


@dataclass(frozen=True)
class DoublingReport:
    radii: tuple
    A_values: tuple
    K_values: tuple
    A_divergent: bool
    K_divergent: bool

    @staticmethod
    def _exponent(v):
        # log2 of the last growth factor: about 1 for linear growth, 0 for a plateau
        return math.log2(v[-1] / v[-2]) if v[-2] > 0 and v[-1] > 0 else 0.0

    @property
    def A_growth_exponent(self) -> float:
        return self._exponent(self.A_values)

    @property
    def K_growth_exponent(self) -> float:
        return self._exponent(self.K_values)


def domain_doubling(f, alpha, grid: SweepGrid = SweepGrid(), sampler: PairSampler = PairSampler(),
                    q: QuadratureSpec = DEFAULT_SPEC, n_pairs: int = 4096, steps: int = 3,
                    threads: int = 1) -> DoublingReport:
    """Both estimators on boxes of radius ``R, 2R, 4R, ...`` (``steps`` of them).

    The ``x``-grids keep their spacing so each contains the previous one. A
    sequence counts as divergent when every doubling raises it by more than 5%.
    """
    if steps < 2:
        raise ValidationError("domain doubling needs at least two radii")
    radii, A, K = [], [], []
    for k in range(steps):
        g = grid.widened(2 ** k) if k else grid
        s = PairSampler(sampler.radius * 2 ** k, sampler.seed, sampler.adversarial)
        radii.append(g.x_box_radius)
        A.append(seminorm_poisson(f, alpha, g, q, threads).value)
        K.append(seminorm_holder(f, alpha, s, n_pairs).value)
    return DoublingReport(tuple(radii), tuple(A), tuple(K), _growing(A), _growing(K))


@dataclass(frozen=True)
class EquivalenceReport:
    A_est: float
    K_est: float
    ratio: float | None
    both_finite: bool
    A_refined: float
    K_refined: float
    A_stable: bool
    K_stable: bool
    doubling: DoublingReport | None = None

    def to_dict(self) -> dict:
        d = {
            "A_est": self.A_est,
            "K_est": self.K_est,
            "ratio": self.ratio,
            "both_finite": self.both_finite,
            "A_refined": self.A_refined,
            "K_refined": self.K_refined,
            "A_stable": self.A_stable,
            "K_stable": self.K_stable,
        }
        if self.doubling is not None:
            d["doubling"] = {
                "radii": list(self.doubling.radii),
                "A_values": list(self.doubling.A_values),
                "K_values": list(self.doubling.K_values),
                "A_divergent": self.doubling.A_divergent,
                "K_divergent": self.doubling.K_divergent,
                "A_growth_exponent": self.doubling.A_growth_exponent,
                "K_growth_exponent": self.doubling.K_growth_exponent,
            }
        return d


def _stable(a, b):
    if a == 0.0:
        return b == 0.0
    return abs(b - a) <= REFINE_DRIFT * abs(a)


def equivalence_report(f, alpha: float, grid: SweepGrid = SweepGrid(), sampler: PairSampler = PairSampler(),
                       q: QuadratureSpec = DEFAULT_SPEC, n_pairs: int = 4096, doubling_steps: int = 3,
                       threads: int = 1) -> EquivalenceReport:
    """Run both estimators, their refinements and the domain-doubling test.

    ``both_finite`` holds when both estimates are stable under refinement.
    Growth under domain doubling is reported separately for each estimator,
    because functions at the edge of the space (slowly growing ones) approach
    their supremum only logarithmically in the box radius.
    """
    A = seminorm_poisson(f, alpha, grid, q, threads).value
    K = seminorm_holder(f, alpha, sampler, n_pairs).value
    A2 = seminorm_poisson(f, alpha, grid.refined(), q, threads).value
    K2 = seminorm_holder(f, alpha, sampler, 2 * n_pairs).value
    dbl = None
    if doubling_steps > 1:
        dbl = domain_doubling(f, alpha, grid, sampler, q, n_pairs, doubling_steps, threads)
    a_ok, k_ok = _stable(A, A2), _stable(K, K2)
    ratio = A / K if A > 0 and K > 0 else None
    return EquivalenceReport(A, K, ratio, bool(a_ok and k_ok), A2, K2, a_ok, k_ok, dbl)


@dataclass(frozen=True)
class GrowthReport:
    passes: bool
    fitted_C: float
    drift: float
    radii: tuple
    constants: tuple

    def to_dict(self):
        return asdict(self)


def _sphere(n, count=64):
    if n == 1:
        return np.array([[1.0], [-1.0]])
    g = sobol(n, count, DEFAULT_SEED)
    from scipy.stats import norm
    v = norm.ppf(np.clip(g, 1e-12, 1 - 1e-12))
    v = np.concatenate([v, np.eye(n), -np.eye(n)])
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def growth_check(f, alpha: float, radii=(math.e ** 2, math.e ** 4, math.e ** 8)) -> GrowthReport:
    """Fit ``max_{|x|=r} |f| <= C (ln r)^(alpha/2)`` on spheres of increasing radius.

    ``fitted_C`` is the constant at the largest radius. The check passes when it
    has not drifted upward by more than 10% from the previous radius.
    """
    _check_alpha(alpha)
    radii = tuple(float(r) for r in radii)
    if len(radii) < 3 or any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 1:
        raise ValidationError("need at least three increasing radii above 1")
    dirs = _sphere(f.n)
    consts = []
    for r in radii:
        consts.append(float(np.max(np.abs(f(r * dirs)))) / math.log(r) ** (alpha / 2))
    prev, last = consts[-2], consts[-1]
    drift = (last - prev) / prev if prev > 0 else (0.0 if last == 0 else math.inf)
    return GrowthReport(bool(drift <= REFINE_DRIFT), last, drift, radii, tuple(consts))


def gradient_sweep(f, alpha: float, grid: SweepGrid = SweepGrid(), q: QuadratureSpec = DEFAULT_SPEC,
                   variant: str = "i", threads: int = 1) -> float:
    """Scale-consistency objectives for the gradient of ``P_t f``.

    ``"i"``: max of ``t^(1-alpha) |d/dx_i P_t f(x)|`` over the grid and all ``i``.
    ``"ii"``: along ``x = (x_1, 0, ...)`` with ``x_1 >= 0``, max of
    ``t^(2-alpha) (1 + x_1) |d/dx_1 P_t f(x)|``.
    """
    _check_alpha(alpha)
    t = grid.t_values()
    if variant == "i":
        x = grid.x_points(f.n)
        g = sweep(f, t, x, "dx", q, threads)
        return float(np.max(t[None, :, None] ** (1 - alpha) * np.abs(g)))
    if variant != "ii":
        raise ValidationError("variant must be 'i' or 'ii'")
    x1 = np.linspace(0.0, grid.x_box_radius, grid.x_points_per_axis)
    x = np.zeros((x1.size, f.n))
    x[:, 0] = x1
    g = sweep(f, t, x, "dx", q, threads)[:, :, 0]
    return float(np.max(t[None, :] ** (2 - alpha) * (1 + x1)[:, None] * np.abs(g)))


@dataclass(frozen=True)
class BoundaryReport:
    x: list
    errors: list
    decreasing: bool
    fitted_C: float
    stable: bool


def boundary_convergence(f, x, alpha: float, t_values=(0.2, 0.1, 0.05, 0.025),
                         q: QuadratureSpec = DEFAULT_SPEC) -> BoundaryReport:
    """Track ``|P_t f(x) - f(x)|`` as ``t`` decreases (kernel route).

    ``fitted_C = max err/t^alpha``; ``stable`` means the last ratio did not rise
    more than 10% above the one before.
    """
    _check_alpha(alpha)
    x = as_point(x, f.n)
    fx = float(f(x[None, :])[0])
    errs = [abs(poisson_integral(f, t, x, q) - fx) for t in t_values]
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    ratios = [e / t ** alpha for e, t in zip(errs, t_values)]
    stable = ratios[-1] <= (1 + REFINE_DRIFT) * ratios[-2]
    return BoundaryReport(x.tolist(), errs, decreasing, max(ratios), bool(stable))
