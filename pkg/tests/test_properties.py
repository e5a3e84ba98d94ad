import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from gcrlab import kernels
from gcrlab.divcurl import IDENTITIES, pairing_identities
from gcrlab.gcr import ImmersionFields, residuals
from gcrlab.geometry import geometry_from_spec
from gcrlab.grid import build_grid
from gcrlab.metric import MetricSpec
from gcrlab.minimizer import gradient, merit, objective
from gcrlab.tensor import SYMMETRIC, TensorField
from gcrlab.weaklab import weak_pairing, test_function as make_test_function

from conftest import TWO_PI

seeds = st.integers(0, 2**32 - 1)
small = settings(max_examples=15, deadline=None)


def _random(seed, n_co, d=3, n=8, scale=1.0):
    rng = np.random.default_rng(seed)
    grid = build_grid(d, TWO_PI, n)
    h, k = oracles.random_symmetric_fields(rng, n_co, d, grid.shape, scale)
    return grid, ImmersionFields.from_dense(grid, h, k)


@small
@given(seeds, st.integers(1, 3), st.integers(2, 3))
def test_stored_fields_satisfy_index_symmetries(seed, n_co, d):
    _, f = _random(seed, n_co, d)
    h, k = f.h.full(), f.kappa.full()
    assert np.array_equal(h, h.swapaxes(1, 2))
    assert np.array_equal(k, -k.swapaxes(0, 2))
    assert f.symmetry_defect() == 0.0


@small
@given(seeds, st.integers(1, 3))
def test_pairing_identities_hold(seed, n_co):
    _, f = _random(seed, n_co)
    report = pairing_identities(f)
    for name in IDENTITIES:
        assert report.relative_discrepancy(name) <= 1e-12


@small
@given(seeds, st.integers(1, 3))
def test_residual_blocks_are_antisymmetric(seed, n_co):
    grid, f = _random(seed, n_co)
    geom = geometry_from_spec(grid, MetricSpec("graph", {"amp": 0.2}))
    rep = residuals(f, geom)
    g = rep.gauss
    assert np.max(np.abs(g + g.swapaxes(1, 2))) <= 1e-12 * max(1.0, np.max(np.abs(g)))
    c = rep.codazzi.full()
    assert np.array_equal(c, -c.swapaxes(2, 3))
    r = rep.ricci.full()
    assert np.array_equal(r, -r.swapaxes(2, 3))


@small
@given(seeds, st.floats(2.5, 6.0), st.floats(0.1, 3.0))
def test_objective_is_p_homogeneous(seed, p, t):
    grid, f = _random(seed, 2, scale=0.5)
    geom = geometry_from_spec(grid, MetricSpec("flat"))
    assert np.isclose(objective(f.scaled(t), geom, p), t**p * objective(f, geom, p), rtol=1e-11)


@small
@given(seeds, st.integers(0, 7), st.integers(0, 7), st.integers(0, 7))
def test_residuals_commute_with_grid_translation(seed, s1, s2, s3):
    grid, f = _random(seed, 2)
    geom = geometry_from_spec(grid, MetricSpec("flat"))
    shifted = ImmersionFields.from_dense(
        grid,
        np.roll(f.h.full(), (s1, s2, s3), axis=(3, 4, 5)),
        np.roll(f.kappa.full(), (s1, s2, s3), axis=(3, 4, 5)),
    )
    a = residuals(f, geom).norms["total"]["l2"]
    b = residuals(shifted, geom).norms["total"]["l2"]
    assert np.isclose(a, b, rtol=1e-12)


@settings(max_examples=8, deadline=None)
@given(seeds)
def test_gradient_is_directional_derivative(seed):
    grid, f = _random(seed, 2, scale=0.3)
    geom = geometry_from_spec(grid, MetricSpec("conformal", {"amp": 0.1}))
    rng = np.random.default_rng(seed + 1)
    v = rng.standard_normal(f.n_params)
    x = f.to_vector()
    g = gradient(f, geom, 4.0, 1.0).to_vector()
    fd = (merit(f.from_vector(x + 1e-5 * v), geom, 4.0, 1.0)
          - merit(f.from_vector(x - 1e-5 * v), geom, 4.0, 1.0)) / 2e-5
    assert abs(fd - g @ v) <= 1e-6 * abs(g @ v)


@small
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3), seeds)
def test_weak_pairing_is_linear(coefs, seed):
    grid = build_grid(3, TWO_PI, 8)
    rng = np.random.default_rng(seed)
    f1, f2 = rng.standard_normal((2,) + grid.shape)
    phi = make_test_function()
    a, b, _ = coefs
    lhs = weak_pairing(a * f1 + b * f2, phi, grid)
    rhs = a * weak_pairing(f1, phi, grid) + b * weak_pairing(f2, phi, grid)
    assert np.isclose(lhs, rhs, rtol=1e-10, atol=1e-10)


@small
@given(seeds)
def test_backends_give_same_residuals(seed):
    if "compiled" not in kernels.available_backends():
        return
    grid, f = _random(seed, 3)
    geom = geometry_from_spec(grid, MetricSpec("diag-of-revolution", {"R": 2.0, "r": 1.0}))
    previous = kernels.backend_name()
    try:
        kernels.use_backend("python")
        a = residuals(f, geom).norms["total"]["l2"]
        ga = gradient(f, geom).to_vector()
        kernels.use_backend("compiled")
        b = residuals(f, geom).norms["total"]["l2"]
        gb = gradient(f, geom).to_vector()
    finally:
        kernels.use_backend(previous)
    assert np.isclose(a, b, rtol=1e-12)
    assert np.max(np.abs(ga - gb)) <= 1e-11 * np.max(np.abs(ga))


@small
@given(seeds, st.integers(2, 3))
def test_symmetric_projection_is_idempotent(seed, d):
    grid = build_grid(d, 1.0, 8)
    dense = np.random.default_rng(seed).standard_normal((d, d) + grid.shape)
    sym = ((SYMMETRIC, 0, 1),)
    once = TensorField.from_dense(grid, "ij", dense, sym)
    twice = TensorField.from_dense(grid, "ij", once.full(), sym)
    assert np.array_equal(once.data, twice.data)
