"""Metric, inverse metric, Christoffel symbols and Riemann tensor on a grid."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import MetricError, ShapeMismatchError
from .grid import gradient
from .tensor import ANTISYMMETRIC, SYMMETRIC, TensorField

SYM_IJ = ((SYMMETRIC, 0, 1),)
GAMMA_SYMMETRY = ((SYMMETRIC, 1, 2),)
RIEMANN_SYMMETRY = ((ANTISYMMETRIC, 1, 2),)
INVERSE_TOLERANCE = 1e-12


class MetricField:
    """Symmetric positive-definite ``g_ij``, checked node by node on construction."""

    def __init__(self, g):
        if g.signature != "ij" or g.symmetry != SYM_IJ:
            raise ShapeMismatchError("metric must be a symmetric 'ij' tensor field")
        self.g = g
        self.grid = g.grid
        _check_positive_definite(self.grid, g.full())

    @classmethod
    def from_dense(cls, grid, dense):
        return cls(TensorField.from_dense(grid, "ij", dense, SYM_IJ))

    @classmethod
    def from_spec(cls, grid, spec):
        return cls.from_dense(grid, spec.evaluate(grid))

    def full(self):
        return self.g.full()


def _node_matrices(grid, dense):
    d = grid.d
    return np.moveaxis(dense.reshape((d, d, -1)), -1, 0)  # (N, d, d)


def _check_positive_definite(grid, dense):
    mats = _node_matrices(grid, dense)
    for k in range(1, grid.d + 1):
        minors = np.linalg.det(mats[:, :k, :k])
        bad = np.flatnonzero(~(minors > 0))
        if bad.size:
            node = np.unravel_index(int(bad[0]), grid.shape)
            coords = grid.node_coords(node)
            value = float(minors[bad[0]])
            raise MetricError(
                f"metric is not positive-definite at node {tuple(int(i) for i in node)} "
                f"(x = {coords}): leading minor {k} = {value:.6g}",
                node=node,
                coords=coords,
                minor=k,
                value=value,
            )


def invert_metric(metric):
    """Per-node inverse ``g^kl`` (symmetric TensorField) and determinant ``|g|``."""
    grid = metric.grid
    d = grid.d
    mats = _node_matrices(grid, metric.full())
    inv = np.linalg.inv(mats)
    eye = np.eye(d)
    if np.max(np.abs(mats @ inv - eye), initial=0.0) > INVERSE_TOLERANCE:
        inv = inv + inv @ (eye - mats @ inv)  # one Newton-Schulz refinement
    det = np.linalg.det(mats)
    dense_inv = np.moveaxis(inv, 0, -1).reshape((d, d) + grid.shape)
    g_inv = TensorField.from_dense(grid, "ij", dense_inv, SYM_IJ)
    return g_inv, det.reshape(grid.shape)


def inverse_defect(metric, g_inv):
    """Max-norm deviation of ``g g^-1`` from the identity over all nodes."""
    grid = metric.grid
    prod = np.einsum("ij...,jk...->ik...", metric.full(), g_inv.full())
    eye = np.eye(grid.d).reshape((grid.d, grid.d) + (1,) * grid.d)
    return float(np.max(np.abs(prod - eye), initial=0.0))


def christoffel(metric, g_inv):
    """``Gamma^k_ij = 1/2 g^kl (d_j g_il + d_i g_jl - d_l g_ij)``, indexed ``[k, i, j]``."""
    grid = metric.grid
    dg = gradient(metric.full(), grid)  # dg[l, i, j] = d_l g_ij
    lower = (
        np.einsum("jil...->lij...", dg)
        + np.einsum("ijl...->lij...", dg)
        - dg
    )
    dense = 0.5 * np.einsum("kl...,lij...->kij...", g_inv.full(), lower)
    return TensorField.from_dense(grid, "kij", dense, GAMMA_SYMMETRY)


def riemann(metric, gamma):
    """``R_ijkl = g_lm (d_k G^m_ij - d_j G^m_ik + G^n_ij G^m_nk - G^n_ik G^m_nj)``.

    Evaluated as ``T_ijkl - T_ikjl`` with ``T_ijkl = g_lm (d_k G^m_ij + G^n_ij G^m_nk)``,
    which makes the antisymmetry in ``(j, k)`` exact.
    """
    grid = metric.grid
    gam = gamma.full()
    dgam = gradient(gam, grid)  # dgam[k, m, i, j] = d_k Gamma^m_ij
    a = np.einsum("kmij...->mijk...", dgam) + np.einsum("nij...,mnk...->mijk...", gam, gam)
    t = np.einsum("lm...,mijk...->ijkl...", metric.full(), a)
    dense = t - t.swapaxes(1, 2)
    return TensorField.from_dense(grid, "ijkl", dense, RIEMANN_SYMMETRY)


@dataclass(frozen=True)
class GeometryBundle:
    metric: MetricField
    g_inv: TensorField
    det: np.ndarray
    christoffel: TensorField
    riemann: TensorField

    @property
    def grid(self):
        return self.metric.grid

    @property
    def d(self):
        return self.grid.d

    @cached_property
    def sqrt_det(self):
        return np.sqrt(self.det)

    @cached_property
    def weights(self):
        """Quadrature weights ``sqrt|g| * prod dx_i`` per node."""
        return self.sqrt_det * self.grid.cell_volume


def build_geometry(metric):
    g_inv, det = invert_metric(metric)
    gamma = christoffel(metric, g_inv)
    return GeometryBundle(metric, g_inv, det, gamma, riemann(metric, gamma))


def geometry_from_spec(grid, spec):
    return build_geometry(MetricField.from_spec(grid, spec))
