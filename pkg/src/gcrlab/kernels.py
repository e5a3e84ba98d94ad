"""Backend selection for the hot pointwise kernels.

The compiled extension (``gcrlab._kernels``, built from Cython) is used when
it imports; otherwise the numpy implementations in ``_kernels_py`` are used.
Set ``GCRLAB_BACKEND`` to ``python`` or ``compiled`` to force one of them
(``compiled`` raises if the extension is missing).
"""

import os

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

KERNEL_NAMES = (
    "central_diff",
    "gauss_quadratic",
    "codazzi_algebra",
    "ricci_algebra",
    "gauss_adjoint",
    "codazzi_adjoint",
    "ricci_adjoint",
    "power_density",
)


def compiled_available():
    return _compiled is not None


class _CompiledAdapter:
    """Flattens trailing grid axes so the extension sees ``(..., N)`` arrays."""

    def __init__(self, module):
        self._m = module

    @staticmethod
    def _flat(x, ncomp):
        x = np.ascontiguousarray(x, dtype=np.float64)
        return x.reshape(x.shape[:ncomp] + (-1,)), x.shape[ncomp:]

    def central_diff(self, values, axis, dx):
        values = np.ascontiguousarray(values, dtype=np.float64)
        shape = values.shape
        pre = int(np.prod(shape[:axis], dtype=np.int64))
        post = int(np.prod(shape[axis + 1:], dtype=np.int64))
        out = self._m.central_diff(values.reshape(pre, shape[axis], post), 1.0 / (2.0 * dx))
        return np.asarray(out).reshape(shape)

    def gauss_quadratic(self, h):
        hf, grid = self._flat(h, 3)
        d = h.shape[1]
        return np.asarray(self._m.gauss_quadratic(hf)).reshape((d,) * 4 + grid)

    def codazzi_algebra(self, h, kappa, gamma):
        hf, grid = self._flat(h, 3)
        out = self._m.codazzi_algebra(hf, self._flat(kappa, 3)[0], self._flat(gamma, 3)[0])
        n_co, d = h.shape[0], h.shape[1]
        return np.asarray(out).reshape((n_co, d, d, d) + grid)

    def ricci_algebra(self, h, kappa, ginv):
        hf, grid = self._flat(h, 3)
        out = self._m.ricci_algebra(hf, self._flat(kappa, 3)[0], self._flat(ginv, 2)[0])
        n_co, d = h.shape[0], h.shape[1]
        return np.asarray(out).reshape((n_co, n_co, d, d) + grid)

    def gauss_adjoint(self, s, h):
        hf, grid = self._flat(h, 3)
        out = self._m.gauss_adjoint(self._flat(s, 4)[0], hf)
        return np.asarray(out).reshape(h.shape)

    def codazzi_adjoint(self, s, h, kappa, gamma):
        hf, grid = self._flat(h, 3)
        gh, gk = self._m.codazzi_adjoint(
            self._flat(s, 4)[0], hf, self._flat(kappa, 3)[0], self._flat(gamma, 3)[0]
        )
        return np.asarray(gh).reshape(h.shape), np.asarray(gk).reshape(kappa.shape)

    def ricci_adjoint(self, s, h, kappa, ginv):
        hf, grid = self._flat(h, 3)
        gh, gk = self._m.ricci_adjoint(
            self._flat(s, 4)[0], hf, self._flat(kappa, 3)[0], self._flat(ginv, 2)[0]
        )
        return np.asarray(gh).reshape(h.shape), np.asarray(gk).reshape(kappa.shape)

    def power_density(self, values, ncomp, p):
        vf, grid = self._flat(values, ncomp)
        vf = vf.reshape(-1, vf.shape[-1])
        dens, fac = self._m.power_density(vf, float(p))
        return np.asarray(dens).reshape(grid), np.asarray(fac).reshape(grid)


_backends = {"python": _kernels_py}
if _compiled is not None:
    _backends["compiled"] = _CompiledAdapter(_compiled)

_active = None
_active_name = None


def use_backend(name):
    """Switch every kernel to ``name`` (``auto``, ``python`` or ``compiled``)."""
    global _active, _active_name
    if name == "auto":
        name = "compiled" if "compiled" in _backends else "python"
    if name not in _backends:
        raise ImportError(
            f"kernel backend {name!r} unavailable (have: {', '.join(sorted(_backends))})"
        )
    _active = _backends[name]
    _active_name = name


def backend_name():
    return _active_name


def available_backends():
    return sorted(_backends)


def get_backend(name):
    if name == "auto":
        name = "compiled" if "compiled" in _backends else "python"
    return _backends[name]


use_backend(os.environ.get("GCRLAB_BACKEND", "auto"))


def central_diff(values, axis, dx):
    return _active.central_diff(values, axis, dx)


def gauss_quadratic(h):
    return _active.gauss_quadratic(h)


def codazzi_algebra(h, kappa, gamma):
    return _active.codazzi_algebra(h, kappa, gamma)


def ricci_algebra(h, kappa, ginv):
    return _active.ricci_algebra(h, kappa, ginv)


def gauss_adjoint(s, h):
    return _active.gauss_adjoint(s, h)


def codazzi_adjoint(s, h, kappa, gamma):
    return _active.codazzi_adjoint(s, h, kappa, gamma)


def ricci_adjoint(s, h, kappa, ginv):
    return _active.ricci_adjoint(s, h, kappa, ginv)


def power_density(values, ncomp, p):
    return _active.power_density(values, ncomp, p)
