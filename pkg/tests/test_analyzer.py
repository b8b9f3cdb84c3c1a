from __future__ import annotations

import math

import numpy as np
import pytest

from ougauss.analyzer import (PairSampler, SweepGrid, boundary_convergence, domain_doubling, equivalence_report,
                              gradient_sweep, growth_check, holder_ratio, seminorm_holder, seminorm_poisson)
from ougauss.catalog import ScalarField
from ougauss.errors import InadmissibleFieldError, ValidationError
from ougauss.geometry import modulus
from oracles import coord_poisson_objective_max

LOGA = ScalarField("LOG_ALPHA", 0.5)
COORD = ScalarField("COORD", 1)
SINE = ScalarField("SINE", 1)
CONST = ScalarField("CONST", 1.0)
SMALL = SweepGrid(t_points=9, x_points_per_axis=9)


def test_grid_validation():
    with pytest.raises(ValidationError):
        SweepGrid(t_min=0.0)
    with pytest.raises(ValidationError):
        SweepGrid(t_points=4)
    with pytest.raises(ValidationError):
        SweepGrid(x_points_per_axis=3)


def test_refined_and_widened_grids_are_nested():
    g = SweepGrid()
    r, w = g.refined(), g.widened()
    for small, big in ((g.t_values(), r.t_values()), ):
        assert np.all(np.min(np.abs(small[:, None] - big[None, :]), axis=1) < 1e-12 * small)
    for big in (r.x_points(1), w.x_points(1)):
        assert np.all(np.min(np.abs(g.x_points(1) - big.T), axis=1) < 1e-12)
    assert w.x_box_radius == 12.0


def test_const_estimates_vanish():
    assert seminorm_poisson(CONST, 0.5, SMALL).value <= 1e-12
    assert seminorm_holder(CONST, 0.5).value == 0.0
    rep = equivalence_report(CONST, 0.5, SMALL, doubling_steps=0)
    assert rep.K_est == 0.0 and rep.ratio is None and rep.both_finite


def test_coord_matches_closed_form():
    for R in (6.0, 12.0):
        g = SweepGrid(x_box_radius=R, refine=True)
        est = seminorm_poisson(COORD, 0.5, g)
        assert est.value == pytest.approx(coord_poisson_objective_max(R, 0.5), rel=1e-6)
        assert est.arg_t == pytest.approx(0.5, rel=1e-3)
        assert abs(est.arg_x[0]) == R


def test_estimate_value_matches_objective_at_argmax():
    from ougauss.transform import subordinated
    est = seminorm_poisson(LOGA, 0.5, SMALL)
    d = subordinated(LOGA, [est.arg_t], np.array([est.arg_x]), ("dt",))["dt"][0, 0]
    assert est.value == pytest.approx(est.arg_t ** 0.5 * abs(d), rel=1e-12)


def test_poisson_estimator_monotone_under_refinement():
    # grid values carry quadrature error up to rel_tol, and the adaptive mesh is
    # shared within a batch, so equal grid points agree only to that level
    a = seminorm_poisson(SINE, 0.5, SMALL).value
    b = seminorm_poisson(SINE, 0.5, SMALL.refined()).value
    assert b >= a * (1 - 1e-8)


def test_holder_estimator_monotone_in_pairs():
    vals = [seminorm_holder(LOGA, 0.5, n_pairs=k).value for k in (256, 1024, 4096)]
    assert vals[0] <= vals[1] <= vals[2]


def test_holder_value_matches_ratio_at_argmax():
    est = seminorm_holder(SINE, 0.5)
    x, y = np.array(est.arg_x), np.array(est.arg_y)
    ratio = abs(SINE(x[None])[0] - SINE(y[None])[0]) / modulus("GGLIP", 0.5, x, y)
    assert est.value == pytest.approx(ratio, rel=1e-14)


def test_sine_adversarial_pairs_grow():
    vals = []
    for R in (10.0, 20.0, 40.0, 80.0):
        est = seminorm_holder(SINE, 0.5, PairSampler(adversarial=False), n_pairs=100,
                              extra_pairs=([[R]], [[R + math.pi]]))
        vals.append(est.value)
        ref = 2 * abs(math.sin(R)) / math.log((1 + R + math.pi) / (1 + R)) ** 0.25
        assert est.value >= ref * (1 - 1e-12)
    # growth like (R / pi)^(alpha/2) * 2|sin R|; compare the envelope at R = 80 and 10
    assert vals[-1] > vals[0]


def test_log_alpha_collinear_same_sign_pairs():
    # on collinear same-sign pairs the log term alone is dominated by the modulus
    rho = np.linspace(1, 60, 400)
    X = rho[:-1, None]
    Y = rho[1:, None] * 1.7
    num = np.abs(LOGA(X) - LOGA(Y))
    d = np.abs(np.log1p(X[:, 0]) - np.log1p(Y[:, 0])) ** 0.25
    assert np.all(num <= d * (1 + 1e-12))


def test_scaling_leaves_argmax():
    g = 3.0 * LOGA
    a, b = seminorm_poisson(LOGA, 0.5, SMALL), seminorm_poisson(g, 0.5, SMALL)
    assert b.value == pytest.approx(3 * a.value, rel=1e-10)
    assert (b.arg_t, b.arg_x) == (a.arg_t, a.arg_x)
    h1, h3 = seminorm_holder(LOGA, 0.5), seminorm_holder(g, 0.5)
    assert h3.value == pytest.approx(3 * h1.value, rel=1e-12)
    assert (h3.arg_x, h3.arg_y) == (h1.arg_x, h1.arg_y)


def test_inadmissible_and_alpha_rejected():
    with pytest.raises(InadmissibleFieldError):
        seminorm_poisson(ScalarField("EXP_GAUSS", 1.5), 0.5, SMALL)
    with pytest.raises(ValidationError):
        seminorm_poisson(LOGA, 1.0, SMALL)
    with pytest.raises(ValidationError):
        seminorm_holder(LOGA, 0.5, n_pairs=10)
    with pytest.raises(ValidationError):
        PairSampler(radius=0.0)


def test_trace_rows():
    trace = []
    est = seminorm_poisson(LOGA, 0.5, SMALL, trace=trace)
    assert len(trace) == 81 and len(trace[0]) == 3
    assert max(r[-1] for r in trace) == est.value


def test_coord_diverges_under_doubling():
    rep = domain_doubling(COORD, 0.5, SMALL, steps=3)
    assert rep.A_divergent and rep.K_divergent
    np.testing.assert_allclose(np.array(rep.A_values[1:]) / rep.A_values[:-1], 2.0, rtol=1e-6)
    assert rep.A_growth_exponent == pytest.approx(1.0, abs=1e-6)


def test_threads_do_not_change_results():
    a = seminorm_poisson(SINE, 0.5, SMALL, threads=1)
    b = seminorm_poisson(SINE, 0.5, SMALL, threads=4)
    assert a.to_dict() == b.to_dict()


def test_growth_check_examples():
    for a in (0.3, 0.5, 0.7):
        r = growth_check(ScalarField("LOG_ALPHA", a), a)
        assert r.passes and r.fitted_C == pytest.approx(1.0, abs=1e-3)
    assert not growth_check(COORD, 0.5).passes
    assert growth_check(ScalarField("CONST", 5.0), 0.5).passes
    with pytest.raises(ValidationError):
        growth_check(LOGA, 0.5, radii=(3.0, 5.0))
    with pytest.raises(ValidationError):
        growth_check(LOGA, 0.5, radii=(10.0, 5.0, 20.0))


def test_growth_check_two_dimensional():
    r = growth_check(ScalarField("LOG_ALPHA", 0.5, 2), 0.5)
    assert r.passes
    assert not growth_check(ScalarField("COORD", 2, 2), 0.5).passes


def test_gradient_scale_consistency():
    for variant in ("i", "ii"):
        a = gradient_sweep(LOGA, 0.5, SweepGrid(), variant=variant)
        b = gradient_sweep(LOGA, 0.5, SweepGrid().refined(), variant=variant)
        assert math.isfinite(a) and b >= a * (1 - 1e-8) and b <= 1.1 * a
    with pytest.raises(ValidationError):
        gradient_sweep(LOGA, 0.5, SMALL, variant="iii")


def test_holder_euclidean_ratio_bounded():
    a = holder_ratio(LOGA, 0.5, n_pairs=1024)
    b = holder_ratio(LOGA, 0.5, n_pairs=4096)
    c = holder_ratio(LOGA, 0.5, PairSampler(radius=24.0), n_pairs=4096)
    assert 0 < a <= b < 1.0 and c < 1.0


def test_boundary_convergence_report():
    rep = boundary_convergence(LOGA, [1.1], 0.5)
    assert rep.decreasing and rep.stable
    assert rep.errors[-1] <= rep.fitted_C * 0.025 ** 0.5
