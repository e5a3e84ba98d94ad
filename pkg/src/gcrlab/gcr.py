"""Unknowns of the Gauss-Codazzi-Ricci system and their residuals.

Repeated indices are summed: ``a`` in the Gauss equations, ``b, c, m, n`` in
the Codazzi and Ricci equations.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import ShapeMismatchError
from .grid import gradient
from .reductions import total
from .tensor import ANTISYMMETRIC, SYMMETRIC, TensorField

H_SYMMETRY = ((SYMMETRIC, 1, 2),)
KAPPA_SYMMETRY = ((ANTISYMMETRIC, 0, 2),)
GAUSS_SYMMETRY = ((ANTISYMMETRIC, 1, 2),)
CODAZZI_SYMMETRY = ((ANTISYMMETRIC, 2, 3),)
RICCI_SYMMETRY = ((ANTISYMMETRIC, 0, 1), (ANTISYMMETRIC, 2, 3))


class ImmersionFields:
    """Second fundamental form ``h^a_ij`` and normal connection ``kappa^a_lb``.

    ``h`` is stored symmetric in ``(i, j)`` and ``kappa`` antisymmetric in
    ``(a, b)``, so ``kappa^a_la == 0`` comes for free.
    """

    def __init__(self, h, kappa):
        if h.signature != "aij" or h.symmetry != H_SYMMETRY:
            raise ShapeMismatchError("h must be an 'aij' field symmetric in (i, j)")
        if kappa.signature != "alb" or kappa.symmetry != KAPPA_SYMMETRY:
            raise ShapeMismatchError("kappa must be an 'alb' field antisymmetric in (a, b)")
        h.grid.check_same(kappa.grid)
        if h.n_co != kappa.n_co:
            raise ShapeMismatchError("h and kappa disagree on the codimension")
        self.h = h
        self.kappa = kappa

    @property
    def grid(self):
        return self.h.grid

    @property
    def n_co(self):
        return self.h.n_co

    @classmethod
    def from_dense(cls, grid, h, kappa):
        n_co = h.shape[0]
        return cls(
            TensorField.from_dense(grid, "aij", h, H_SYMMETRY, n_co),
            TensorField.from_dense(grid, "alb", kappa, KAPPA_SYMMETRY, n_co),
        )

    @classmethod
    def zeros(cls, grid, n_co):
        return cls(
            TensorField.zeros(grid, "aij", H_SYMMETRY, n_co),
            TensorField.zeros(grid, "alb", KAPPA_SYMMETRY, n_co),
        )

    # flat parameter vector used by the minimizer
    @property
    def n_params(self):
        return self.h.data.size + self.kappa.data.size

    def to_vector(self):
        return np.concatenate([self.h.data.ravel(), self.kappa.data.ravel()])

    def from_vector(self, vec):
        nh = self.h.data.size
        return ImmersionFields(
            self.h.with_data(vec[:nh].reshape(self.h.data.shape)),
            self.kappa.with_data(vec[nh:].reshape(self.kappa.data.shape)),
        )

    def scaled(self, factor):
        return ImmersionFields(self.h * factor, self.kappa * factor)

    def __add__(self, other):
        return ImmersionFields(self.h + other.h, self.kappa + other.kappa)

    def __sub__(self, other):
        return ImmersionFields(self.h - other.h, self.kappa - other.kappa)

    def symmetry_defect(self):
        return max(self.h.symmetry_defect(), self.kappa.symmetry_defect())


def _check(fields, geom):
    fields.grid.check_same(geom.grid)


def gauss_residual(fields, geom):
    """``sum_a (h^a_ji h^a_kl - h^a_ki h^a_jl) - R_ijkl``, dense ``[i, j, k, l]``."""
    _check(fields, geom)
    return kernels.gauss_quadratic(fields.h.full()) - geom.riemann.full()


def codazzi_dense(fields, geom):
    h = fields.h.full()
    dh = gradient(h, fields.grid)  # dh[k, a, l, j]
    half = np.einsum("kalj...->ajkl...", dh) + kernels.codazzi_algebra(
        h, fields.kappa.full(), geom.christoffel.full()
    )
    return half - half.swapaxes(2, 3)


def ricci_dense(fields, geom):
    kappa = fields.kappa.full()
    dk = gradient(kappa, fields.grid)  # dk[k, a, l, b]
    half = np.einsum("kalb...->abkl...", dk) + kernels.ricci_algebra(
        fields.h.full(), kappa, geom.g_inv.full()
    )
    return half - half.swapaxes(2, 3)


def codazzi_residual(fields, geom):
    """Residual of the Codazzi equations, stored for ``k < l``.

    ``d_k h^a_lj - d_l h^a_kj + G^m_lj h^a_km - G^m_kj h^a_lm
    + kappa^a_kb h^b_lj - kappa^a_lb h^b_kj``, signature ``(a, j, k, l)``.
    """
    _check(fields, geom)
    return TensorField.from_dense(
        fields.grid, "ajkl", codazzi_dense(fields, geom), CODAZZI_SYMMETRY, fields.n_co
    )


def ricci_residual(fields, geom):
    """Residual of the Ricci equations, signature ``(a, b, k, l)``.

    ``d_k kappa^a_lb - d_l kappa^a_kb - g^mn (h^a_ml h^b_kn - h^a_mk h^b_ln)
    + kappa^a_kc kappa^c_lb - kappa^a_lc kappa^c_kb``.
    """
    _check(fields, geom)
    return TensorField.from_dense(
        fields.grid, "abkl", ricci_dense(fields, geom), RICCI_SYMMETRY, fields.n_co
    )


@dataclass
class ResidualReport:
    grid: object
    gauss: np.ndarray  # dense [i, j, k, l]
    codazzi: TensorField
    ricci: TensorField
    weights: np.ndarray

    def gauss_field(self):
        return TensorField(self.grid, "ijkl", _gauss_canonical(self.grid, self.gauss), GAUSS_SYMMETRY)

    def blocks(self):
        """Per-block arrays of shape ``(n_tuples,) + grid.shape`` entering the norms.

        Gauss: every ``(i, j, k, l)``; Codazzi: ``(a, j, k<l)``; Ricci: every
        ``(a, b)`` with ``k < l``.
        """
        d = self.grid.d
        g = self.grid.shape
        codazzi = self.codazzi.data
        ricci_dense = self.ricci.full()
        ku, lu = np.triu_indices(d, 1)
        ricci = ricci_dense[:, :, ku, lu].reshape((-1,) + g)
        return {
            "gauss": self.gauss.reshape((-1,) + g),
            "codazzi": codazzi.reshape((-1,) + g),
            "ricci": ricci,
        }

    @cached_property
    def norms(self):
        return residual_norms(self)


def _gauss_canonical(grid, dense):
    from .tensor import layout

    lay = layout((grid.d,) * 4, GAUSS_SYMMETRY)
    return dense[tuple(lay.canonical.T)]


def residuals(fields, geom):
    """Evaluate all three residual blocks."""
    return ResidualReport(
        fields.grid,
        gauss_residual(fields, geom),
        codazzi_residual(fields, geom),
        ricci_residual(fields, geom),
        geom.weights,
    )


def block_norms(block, weights):
    """``(L2, Linf)`` of a stacked block; L2 uses the ``sqrt|g|`` volume weights."""
    if block.size == 0:
        return 0.0, 0.0
    l2sq = weighted_square_sum(block, weights)
    linf = float(np.max(np.abs(block)))
    return float(np.sqrt(l2sq)), linf


def weighted_square_sum(block, weights):
    """``sum_tuples sum_nodes w r^2`` under the active summation policy."""
    return total(block * block * weights)


def residual_norms(report):
    """Per-equation ``l2``/``linf`` norms plus a ``total`` entry.

    The total L2 is the root of the summed squares, the total Linf the max.
    """
    out = {}
    l2sq = 0.0
    linf = 0.0
    for name, block in report.blocks().items():
        b_l2, b_linf = block_norms(block, report.weights)
        out[name] = {"l2": b_l2, "linf": b_linf}
        l2sq += b_l2 * b_l2
        linf = max(linf, b_linf)
    out["total"] = {"l2": float(np.sqrt(l2sq)), "linf": linf}
    return out
