"""Tensor fields on a grid with exact index symmetries.

A :class:`TensorField` stores only one canonical representative per orbit
of its declared symmetry group. Dense views are produced by a gather with
signs, so ``h[a, i, j] == h[a, j, i]`` and ``kappa[a, l, b] == -kappa[b, l, a]``
hold bitwise, never approximately.

Index roles are single letters. ``i j k l m n`` are tangential (range d),
``a b c`` are normal (range n_co).
"""

from dataclasses import dataclass
from functools import lru_cache
import itertools

import numpy as np

from .errors import ShapeMismatchError

TANGENTIAL = frozenset("ijklmn")
NORMAL = frozenset("abc")
SYMMETRIC = "sym"
ANTISYMMETRIC = "antisym"


@dataclass(frozen=True)
class IndexLayout:
    """Canonical enumeration for component dims under pairwise symmetries.

    ``symmetry`` is a tuple of ``(kind, p, q)`` with ``p < q`` axis positions.
    """

    dims: tuple
    symmetry: tuple
    canonical: np.ndarray  # (n_canonical, rank) index tuples
    position: np.ndarray  # dense index -> canonical slot
    sign: np.ndarray  # dense index -> +1, -1 or 0

    @property
    def size(self):
        return len(self.canonical)


def _is_canonical(idx, symmetry):
    for kind, p, q in symmetry:
        if kind == SYMMETRIC and idx[p] > idx[q]:
            return False
        if kind == ANTISYMMETRIC and idx[p] >= idx[q]:
            return False
    return True


def _reduce(idx, symmetry):
    """Map a dense index tuple to (canonical tuple, sign)."""
    idx = list(idx)
    sign = 1
    for kind, p, q in symmetry:
        if idx[p] == idx[q] and kind == ANTISYMMETRIC:
            return None, 0
        if idx[p] > idx[q]:
            idx[p], idx[q] = idx[q], idx[p]
            if kind == ANTISYMMETRIC:
                sign = -sign
    return tuple(idx), sign


@lru_cache(maxsize=None)
def layout(dims, symmetry=()):
    dims = tuple(int(x) for x in dims)
    symmetry = tuple(tuple(s) for s in symmetry)
    for kind, p, q in symmetry:
        if kind not in (SYMMETRIC, ANTISYMMETRIC):
            raise ValueError(f"unknown symmetry kind {kind!r}")
        if not (0 <= p < q < len(dims)) or dims[p] != dims[q]:
            raise ShapeMismatchError(f"symmetry pair ({p}, {q}) invalid for dims {dims}")
    full = list(itertools.product(*(range(n) for n in dims)))
    canonical = [idx for idx in full if _is_canonical(idx, symmetry)]
    slot = {idx: s for s, idx in enumerate(canonical)}
    position = np.zeros(dims, dtype=np.intp)
    sign = np.zeros(dims, dtype=float)
    for idx in full:
        rep, sgn = _reduce(idx, symmetry)
        if sgn:
            position[idx] = slot[rep]
            sign[idx] = sgn
    canonical = np.array(canonical, dtype=np.intp).reshape(len(canonical), len(dims))
    return IndexLayout(dims, symmetry, canonical, position, sign)


def index_dims(signature, d, n_co):
    dims = []
    for role in signature:
        if role in TANGENTIAL:
            dims.append(d)
        elif role in NORMAL:
            dims.append(n_co)
        else:
            raise ValueError(f"unknown index role {role!r}")
    return tuple(dims)


class TensorField:
    """Immutable tensor field in canonical storage.

    Parameters
    ----------
    grid : Grid
    signature : str
        Index roles, e.g. ``"aij"`` for the second fundamental form.
    data : ndarray
        Canonical components, shape ``(n_canonical,) + grid.shape``.
    symmetry : tuple of (kind, p, q)
    n_co : int
        Range of the normal indices (ignored if the signature has none).
    """

    __slots__ = ("grid", "signature", "symmetry", "n_co", "layout", "data", "_dense")

    def __init__(self, grid, signature, data, symmetry=(), n_co=0):
        self.grid = grid
        self.signature = signature
        self.symmetry = tuple(tuple(s) for s in symmetry)
        self.n_co = int(n_co)
        self.layout = layout(index_dims(signature, grid.d, n_co), self.symmetry)
        data = np.asarray(data, dtype=float).view()
        expected = (self.layout.size,) + grid.shape
        if data.shape != expected:
            raise ShapeMismatchError(f"canonical data has shape {data.shape}, expected {expected}")
        data.setflags(write=False)
        self.data = data
        self._dense = None

    @classmethod
    def from_dense(cls, grid, signature, dense, symmetry=(), n_co=0):
        """Project a dense array onto the declared symmetries.

        Each canonical entry is the signed average over its orbit, so inputs
        that already satisfy the symmetries come back bitwise unchanged.
        """
        symmetry = tuple(tuple(s) for s in symmetry)
        lay = layout(index_dims(signature, grid.d, n_co), symmetry)
        dense = np.asarray(dense, dtype=float)
        if dense.shape != lay.dims + grid.shape:
            raise ShapeMismatchError(f"dense array has shape {dense.shape}, expected {lay.dims + grid.shape}")
        # one exact projection per pair; (x + x)/2 == x so symmetric inputs are untouched
        for kind, p, q in symmetry:
            swapped = np.swapaxes(dense, p, q)
            dense = 0.5 * (dense + swapped) if kind == SYMMETRIC else 0.5 * (dense - swapped)
        data = dense[tuple(lay.canonical.T)]
        return cls(grid, signature, data, symmetry, n_co)

    @classmethod
    def zeros(cls, grid, signature, symmetry=(), n_co=0):
        lay = layout(index_dims(signature, grid.d, n_co), tuple(tuple(s) for s in symmetry))
        return cls(grid, signature, np.zeros((lay.size,) + grid.shape), symmetry, n_co)

    def with_data(self, data):
        return TensorField(self.grid, self.signature, data, self.symmetry, self.n_co)

    @property
    def dims(self):
        return self.layout.dims

    @property
    def rank(self):
        return len(self.signature)

    def full(self):
        """Dense array of shape ``dims + grid.shape`` (cached, read-only)."""
        if self._dense is None:
            lay = self.layout
            sign = lay.sign.reshape(lay.dims + (1,) * self.grid.d)
            if self.data.shape[0]:
                dense = self.data[lay.position] * sign
            else:
                dense = np.zeros(lay.dims + self.grid.shape)
            dense.setflags(write=False)
            self._dense = dense
        return self._dense

    def component(self, *index):
        """Field of one component; ``index`` is 1-based as in the formulas."""
        if len(index) != self.rank:
            raise ShapeMismatchError(f"expected {self.rank} indices, got {len(index)}")
        idx = tuple(int(i) - 1 for i in index)
        for i, n in zip(idx, self.dims):
            if not 0 <= i < n:
                raise IndexError(f"index {tuple(index)} out of range for dims {self.dims}")
        sgn = self.layout.sign[idx]
        if sgn == 0:
            return np.zeros(self.grid.shape)
        return sgn * self.data[self.layout.position[idx]]

    def symmetry_defect(self):
        """Max violation of the declared symmetries in the dense view (0.0 by construction)."""
        dense = self.full()
        worst = 0.0
        for kind, p, q in self.symmetry:
            swapped = np.swapaxes(dense, p, q)
            other = swapped if kind == SYMMETRIC else -swapped
            worst = max(worst, float(np.max(np.abs(dense - other), initial=0.0)))
        return worst

    def __add__(self, other):
        self._check_compatible(other)
        return self.with_data(self.data + other.data)

    def __sub__(self, other):
        self._check_compatible(other)
        return self.with_data(self.data - other.data)

    def __mul__(self, scalar):
        return self.with_data(self.data * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_data(-self.data)

    def _check_compatible(self, other):
        if not isinstance(other, TensorField):
            return NotImplemented
        self.grid.check_same(other.grid)
        if (self.signature, self.symmetry, self.n_co) != (other.signature, other.symmetry, other.n_co):
            raise ShapeMismatchError("tensor fields have different index signatures")

    def __repr__(self):
        sym = ",".join(f"{k}({p},{q})" for k, p, q in self.symmetry) or "none"
        return f"TensorField({self.signature!r}, dims={self.dims}, symmetry={sym})"


def pullback_gradient(layout_, dense_grad, grid_ndim):
    """Gradient with respect to canonical components from a dense gradient.

    Transpose of the signed gather in :meth:`TensorField.full`: each
    canonical slot collects the signed sum of its orbit's dense entries.
    """
    dense_grad = np.asarray(dense_grad, dtype=float)
    grid_shape = dense_grad.shape[len(layout_.dims):]
    flat = dense_grad.reshape((-1,) + grid_shape)
    out = np.zeros((layout_.size,) + grid_shape)
    pos = layout_.position.ravel()
    sgn = layout_.sign.ravel()
    for dense_idx in range(flat.shape[0]):
        if sgn[dense_idx] != 0:
            out[pos[dense_idx]] += sgn[dense_idx] * flat[dense_idx]
    return out
