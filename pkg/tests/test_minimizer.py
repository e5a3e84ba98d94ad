import numpy as np
import pytest

import oracles
from gcrlab.catalog import catalog_embedding
from gcrlab.errors import ConfigurationError, DivergenceError
from gcrlab.gcr import ImmersionFields
from gcrlab.geometry import geometry_from_spec
from gcrlab.grid import build_grid
from gcrlab.metric import MetricSpec
from gcrlab.minimizer import (
    MinimizeConfig,
    constraint_penalty,
    gradient,
    merit,
    minimize,
    objective,
    random_fields,
)
from gcrlab.weaklab import FrameworkSpec, make_framework_sequence

from conftest import TWO_PI


def _geom(spec, n=8, lengths=TWO_PI):
    return geometry_from_spec(build_grid(3, lengths, n), spec)


def test_zero_fields_objective_zero():
    geom = _geom(MetricSpec("flat"))
    assert objective(ImmersionFields.zeros(geom.grid, 3), geom) == 0.0


def test_constant_h_objective():
    geom = _geom(MetricSpec("flat"), lengths=1.0)
    h = np.zeros((1, 3, 3) + geom.grid.shape)
    h[0, 0, 0] = 2.0  # h.h = 4
    f = ImmersionFields.from_dense(geom.grid, h, np.zeros((1, 3, 1) + geom.grid.shape))
    assert objective(f, geom, 4) == pytest.approx(16.0, rel=1e-14)


def test_objective_matches_oracle(rng):
    geom = _geom(MetricSpec("graph", {"amp": 0.3}))
    h, k = oracles.random_symmetric_fields(rng, 3, 3, geom.grid.shape, 0.5)
    f = ImmersionFields.from_dense(geom.grid, h, k)
    for p in (3.0, 4.0, 5.5):
        expected = oracles.objective(h, k, geom.sqrt_det, geom.grid.cell_volume, p)
        assert objective(f, geom, p) == pytest.approx(expected, rel=1e-12)


def test_objective_homogeneity(rng):
    geom = _geom(MetricSpec("conformal", {"amp": 0.2}))
    f = random_fields(geom.grid, 3, 0.5, seed=3)
    assert objective(f.scaled(2.0), geom, 4) == pytest.approx(16 * objective(f, geom, 4), rel=1e-12)


def test_p_must_exceed_two():
    geom = _geom(MetricSpec("flat"))
    with pytest.raises(ConfigurationError, match="p > 2"):
        objective(ImmersionFields.zeros(geom.grid, 3), geom, 2.0)
    with pytest.raises(ConfigurationError, match="p > 2"):
        MinimizeConfig(p=2)


def test_penalty_matches_oracle(rng):
    geom = _geom(MetricSpec("diag-of-revolution", {"R": 2.5, "r": 0.8}))
    grid = geom.grid
    h, k = oracles.smooth_random_fields(rng, 2, 3, grid)
    g = geom.metric.full()
    gam = oracles.christoffel(g, grid.spacing)
    riem = oracles.riemann(g, gam, grid.spacing)
    expected = oracles.penalty(h, k, g, gam, riem, grid.spacing, grid.cell_volume)
    assert constraint_penalty(ImmersionFields.from_dense(grid, h, k), geom) == pytest.approx(expected, rel=1e-12)


def test_penalty_zero_fields_is_curvature_norm():
    grid = build_grid(3, TWO_PI, 8)
    sc = catalog_embedding("torus-product", {}, grid)
    geom = geometry_from_spec(grid, sc.metric)
    riem = geom.riemann.full()
    expected = float(np.sum(riem**2 * geom.weights))
    assert constraint_penalty(ImmersionFields.zeros(grid, 3), geom) == pytest.approx(expected, rel=1e-12)


def test_flat_zero_gradient_vanishes():
    geom = _geom(MetricSpec("flat"))
    g = gradient(ImmersionFields.zeros(geom.grid, 3), geom, 4, 1.0)
    assert np.all(g.to_vector() == 0.0)


@pytest.mark.parametrize(
    "spec",
    [MetricSpec("flat"), MetricSpec("graph", {"amp": 0.3}), MetricSpec("diag-of-revolution", {"R": 2.5, "r": 0.8})],
)
def test_gradient_matches_finite_differences(spec):
    geom = _geom(spec)
    rng = np.random.default_rng(7)
    h, k = oracles.smooth_random_fields(rng, 3, 3, geom.grid, scale=0.3)
    f = ImmersionFields.from_dense(geom.grid, h, k)
    x = f.to_vector()
    g = gradient(f, geom, 4.0, 1.0).to_vector()
    step = 1e-5
    for _ in range(10):
        v = rng.standard_normal(x.size)
        fp = merit(f.from_vector(x + step * v), geom, 4.0, 1.0)
        fm = merit(f.from_vector(x - step * v), geom, 4.0, 1.0)
        fd = (fp - fm) / (2 * step)
        an = float(g @ v)
        assert abs(fd - an) <= 1e-6 * abs(an)


def test_gradient_single_normal():
    geom = _geom(MetricSpec("graph", {"amp": 0.3}))
    f = random_fields(geom.grid, 1, 0.3, seed=2)
    g = gradient(f, geom, 3.0, 2.0)
    assert g.kappa.data.shape[0] == 0
    v = np.random.default_rng(0).standard_normal(f.n_params)
    x = f.to_vector()
    fd = (merit(f.from_vector(x + 1e-5 * v), geom, 3.0, 2.0) - merit(f.from_vector(x - 1e-5 * v), geom, 3.0, 2.0)) / 2e-5
    assert fd == pytest.approx(float(g.to_vector() @ v), rel=1e-6)


def test_random_fields_reproducible():
    grid = build_grid(3, TWO_PI, 8)
    a = random_fields(grid, 3, 0.1, seed=5).to_vector()
    b = random_fields(grid, 3, 0.1, seed=5).to_vector()
    assert np.array_equal(a, b)
    assert np.max(np.abs(a)) <= 0.1


def test_minimize_zero_start_on_flat_is_converged():
    geom = _geom(MetricSpec("flat"))
    res = minimize(geom, MinimizeConfig(outer_iterations=2, max_inner=5))
    assert res.reason == "converged"
    assert res.objective == 0.0


def test_minimize_decreases_merit_and_keeps_symmetry():
    geom = _geom(MetricSpec("flat"))
    init = random_fields(geom.grid, 3, 0.1, seed=0)
    res = minimize(geom, MinimizeConfig(outer_iterations=1, max_inner=40), init)
    trace = res.merit_trace
    assert all(b < a for a, b in zip(trace, trace[1:]))
    assert res.objective < res.initial_objective
    assert res.fields.symmetry_defect() == 0.0
    for rec in res.history:
        assert rec.inner_reason in ("gradient", "line-search", "stalled", "max-inner")


def test_laminate_start_descends():
    grid = build_grid(3, TWO_PI, 8)
    lam = make_framework_sequence(FrameworkSpec(eta=(0, 0, 1)), 1, grid)
    geom = geometry_from_spec(grid, MetricSpec("flat"))
    res = minimize(geom, MinimizeConfig(outer_iterations=1, max_inner=50), lam)
    # (2 pi)^3 * mean(sin^4) = (2 pi)^3 * 3 / 8
    assert res.initial_objective == pytest.approx(TWO_PI**3 * 3 / 8, rel=1e-12)
    assert res.objective < res.initial_objective


def test_non_finite_merit_aborts_with_history():
    geom = _geom(MetricSpec("flat"))
    init = random_fields(geom.grid, 3, 1e200, seed=0)
    with np.errstate(all="ignore"), pytest.raises(DivergenceError, match="mu = 1"):
        minimize(geom, MinimizeConfig(outer_iterations=1, max_inner=3), init)
