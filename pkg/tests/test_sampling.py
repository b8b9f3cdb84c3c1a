from __future__ import annotations

import numpy as np
import pytest

from ougauss.errors import ValidationError
from ougauss.sampling import DEFAULT_SEED, SamplerSpec, cube_to_ball, sobol


def test_sobol_is_prefix_nested_and_reproducible():
    a = sobol(3, 1000)
    b = sobol(3, 2000)
    np.testing.assert_array_equal(a, b[:1000])
    np.testing.assert_array_equal(a, sobol(3, 1000, DEFAULT_SEED))
    assert not np.array_equal(a, sobol(3, 1000, DEFAULT_SEED + 1))


def test_draw_ranges():
    s = SamplerSpec()
    t, x, y = s.draw(2, 4096)
    assert t.min() >= 1e-2 and t.max() <= 1e2
    assert np.linalg.norm(x, axis=1).max() <= 6 + 1e-12
    assert np.linalg.norm(y, axis=1).max() <= 6 + 1e-12
    # log-uniform in t: median near the geometric midpoint
    assert abs(np.log10(np.median(t))) < 0.1


def test_cube_to_ball_radius():
    u = np.random.default_rng(0).random((1000, 3))
    b = cube_to_ball(u, 2.0)
    assert np.linalg.norm(b, axis=1).max() <= 2.0 + 1e-12


def test_grid_sampler_deterministic():
    s = SamplerSpec(kind="grid")
    a = s.draw(1, 300)
    b = s.draw(1, 300)
    for u, v in zip(a, b):
        np.testing.assert_array_equal(u, v)


def test_bad_sampler_rejected():
    with pytest.raises(ValidationError):
        SamplerSpec(kind="random")
    with pytest.raises(ValidationError):
        SamplerSpec(t_min=0.0)
