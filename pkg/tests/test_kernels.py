import numpy as np
import pytest

from gcrlab import kernels

BACKENDS = kernels.available_backends()
SHAPE = (5, 4, 6)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return kernels.get_backend(request.param)


def _arrays(rng, n_co=3, d=3):
    return {
        "h": rng.standard_normal((n_co, d, d) + SHAPE),
        "kappa": rng.standard_normal((n_co, d, n_co) + SHAPE),
        "gamma": rng.standard_normal((d, d, d) + SHAPE),
        "ginv": rng.standard_normal((d, d) + SHAPE),
    }


def test_python_backend_always_available():
    assert "python" in BACKENDS


def test_auto_prefers_compiled():
    expected = "compiled" if kernels.compiled_available() else "python"
    assert kernels.get_backend("auto") is kernels.get_backend(expected)


def test_unknown_backend():
    with pytest.raises(ImportError):
        kernels.use_backend("fortran")


@pytest.mark.skipif(not kernels.compiled_available(), reason="compiled extension not built")
@pytest.mark.parametrize("n_co", [1, 2, 3])
def test_backends_agree(rng, n_co):
    a = _arrays(rng, n_co)
    py, cc = kernels.get_backend("python"), kernels.get_backend("compiled")
    h, k, gm, gi = a["h"], a["kappa"], a["gamma"], a["ginv"]
    s4 = rng.standard_normal((3, 3, 3, 3) + SHAPE)
    sc = rng.standard_normal((n_co, 3, 3, 3) + SHAPE)
    sr = rng.standard_normal((n_co, n_co, 3, 3) + SHAPE)
    pairs = [
        (py.central_diff(h, 4, 0.3), cc.central_diff(h, 4, 0.3)),
        (py.gauss_quadratic(h), cc.gauss_quadratic(h)),
        (py.codazzi_algebra(h, k, gm), cc.codazzi_algebra(h, k, gm)),
        (py.ricci_algebra(h, k, gi), cc.ricci_algebra(h, k, gi)),
        (py.gauss_adjoint(s4, h), cc.gauss_adjoint(s4, h)),
        (py.power_density(h, 3, 4.5), cc.power_density(h, 3, 4.5)),
        (py.codazzi_adjoint(sc, h, k, gm), cc.codazzi_adjoint(sc, h, k, gm)),
        (py.ricci_adjoint(sr, h, k, gi), cc.ricci_adjoint(sr, h, k, gi)),
    ]
    for x, y in pairs:
        xs, ys = (x, y) if isinstance(x, tuple) else ((x,), (y,))
        for u, v in zip(xs, ys):
            assert u.shape == v.shape
            assert np.max(np.abs(u - v)) <= 1e-12 * max(1.0, np.max(np.abs(u)))


def _directional(fn, args, i, direction, t=1e-3):
    plus = list(args)
    minus = list(args)
    plus[i] = args[i] + t * direction
    minus[i] = args[i] - t * direction
    return (fn(*plus) - fn(*minus)) / (2 * t)


def test_adjoints_are_transposes(backend, rng):
    a = _arrays(rng)
    h, k, gm, gi = a["h"], a["kappa"], a["gamma"], a["ginv"]
    dh = rng.standard_normal(h.shape)
    dk = rng.standard_normal(k.shape)

    s = rng.standard_normal((3, 3, 3, 3) + SHAPE)
    quad = lambda hh: np.einsum("aji...,akl...->ijkl...", hh, hh)  # noqa: E731
    lhs = np.sum(s * _directional(quad, [h], 0, dh))
    assert lhs == pytest.approx(np.sum(backend.gauss_adjoint(s, h) * dh), rel=1e-10)

    s = rng.standard_normal((3, 3, 3, 3) + SHAPE)
    gh, gk = backend.codazzi_adjoint(s, h, k, gm)
    lhs_h = np.sum(s * _directional(backend.codazzi_algebra, [h, k, gm], 0, dh))
    lhs_k = np.sum(s * _directional(backend.codazzi_algebra, [h, k, gm], 1, dk))
    assert lhs_h == pytest.approx(np.sum(gh * dh), rel=1e-10)
    assert lhs_k == pytest.approx(np.sum(gk * dk), rel=1e-10)

    gh, gk = backend.ricci_adjoint(s, h, k, gi)
    lhs_h = np.sum(s * _directional(backend.ricci_algebra, [h, k, gi], 0, dh))
    lhs_k = np.sum(s * _directional(backend.ricci_algebra, [h, k, gi], 1, dk))
    assert lhs_h == pytest.approx(np.sum(gh * dh), rel=1e-10)
    assert lhs_k == pytest.approx(np.sum(gk * dk), rel=1e-10)


def test_power_density_gradient(backend, rng):
    v = rng.standard_normal((2, 3) + SHAPE)
    dv = rng.standard_normal(v.shape)
    dens, fac = backend.power_density(v, 2, 3.5)
    fd = _directional(lambda x: backend.power_density(x, 2, 3.5)[0], [v], 0, dv, 1e-6)
    assert np.allclose(fd, np.sum(fac * v * dv, axis=(0, 1)), rtol=1e-6, atol=1e-8)


def test_central_diff_periodic_wrap(backend):
    x = np.arange(8, dtype=float).reshape(1, 8)
    out = backend.central_diff(x, 1, 1.0)
    assert out[0, 0] == (1.0 - 7.0) / 2.0
    assert out[0, 7] == (0.0 - 6.0) / 2.0
