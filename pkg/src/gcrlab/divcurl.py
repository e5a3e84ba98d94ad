"""Div/curl form of the Codazzi and Ricci equations and the pairing identities.

For ``k < l`` the Codazzi principal part is the divergence of the vector with
``h^a_lj`` in slot ``k`` and ``-h^a_kj`` in slot ``l``, and the curl of the
column ``(h^a_1j, ..., h^a_dj)``. The Ricci equations have the same shape in
``kappa``. Scalar products of a div-vector with a curl-vector reproduce the
quadratic terms of the system exactly, node by node:

* Codazzi-div ``(a, j, k, l)`` . Codazzi-curl ``(b, i)``
  = ``h^a_lj h^b_ki - h^a_kj h^b_li``
* Ricci-div ``(b, c, k, l)`` . Ricci-curl ``(a, b)``
  = ``kappa^a_kb kappa^b_lc - kappa^a_lb kappa^b_kc``
* Codazzi-div ``(b, i, k, l)`` . Ricci-curl ``(a, b)``
  = ``kappa^a_kb h^b_li - kappa^a_lb h^b_ki``

Indices passed to the builders are 1-based.
"""

from dataclasses import dataclass, field
import itertools

import numpy as np

from .errors import ConfigurationError
from .grid import diff

CODAZZI_DIV = "codazzi-div"
CODAZZI_CURL = "codazzi-curl"
RICCI_DIV = "ricci-div"
RICCI_CURL = "ricci-curl"

IDENTITIES = ("qq1", "qq2", "qq3")


@dataclass(frozen=True)
class StructuredVectorField:
    """``d`` components per node plus the tag of the equation that produced it."""

    grid: object
    components: np.ndarray  # (d,) + grid.shape
    tag: tuple

    def dot(self, other):
        return np.sum(self.components * other.components, axis=0)


def numeric_div(w):
    """``sum_i d_i w_i`` with periodic central differences."""
    comps = w.components
    grid = w.grid
    out = np.zeros(grid.shape)
    for i in range(grid.d):
        out = out + diff(comps[i], grid, i + 1)
    return out


def numeric_curl(w):
    """``(curl w)_ij = d_j w_i - d_i w_j``, a ``(d, d)`` matrix per node."""
    grid = w.grid
    comps = w.components
    d = grid.d
    jac = np.empty((d, d) + grid.shape)  # jac[i, j] = d_j w_i
    for i in range(d):
        for j in range(d):
            jac[i, j] = diff(comps[i], grid, j + 1)
    return jac - jac.swapaxes(0, 1)


def _check_range(name, value, upper):
    if not 1 <= value <= upper:
        raise ConfigurationError(f"index {name}={value} out of range 1..{upper}")


def _check_pair(k, l, d):
    _check_range("k", k, d)
    _check_range("l", l, d)
    if not k < l:
        raise ConfigurationError(f"div-fields need k < l, got k={k}, l={l}")


def _div_vector(grid, upper, lower, k, l):
    comps = np.zeros((grid.d,) + grid.shape)
    comps[k - 1] = upper
    comps[l - 1] = -lower
    return comps


def build_codazzi_fields(fields, a, j, k, l):
    """Div-field ``(.., h^a_lj @k, .., -h^a_kj @l, ..)`` and curl-field ``(h^a_1j, .., h^a_dj)``."""
    grid = fields.grid
    d = grid.d
    _check_range("a", a, fields.n_co)
    _check_range("j", j, d)
    _check_pair(k, l, d)
    h = fields.h.full()
    div = StructuredVectorField(
        grid, _div_vector(grid, h[a - 1, l - 1, j - 1], h[a - 1, k - 1, j - 1], k, l), (CODAZZI_DIV, a, j, k, l)
    )
    curl = StructuredVectorField(grid, np.array(h[a - 1, :, j - 1]), (CODAZZI_CURL, a, j))
    return div, curl


def build_ricci_fields(fields, a, b, k, l):
    """Div-field with ``kappa^a_lb`` in slot ``k``, ``-kappa^a_kb`` in slot ``l``; curl-field ``kappa^a_.b``."""
    grid = fields.grid
    d = grid.d
    _check_range("a", a, fields.n_co)
    _check_range("b", b, fields.n_co)
    _check_pair(k, l, d)
    kap = fields.kappa.full()
    div = StructuredVectorField(
        grid,
        _div_vector(grid, kap[a - 1, l - 1, b - 1], kap[a - 1, k - 1, b - 1], k, l),
        (RICCI_DIV, a, b, k, l),
    )
    curl = StructuredVectorField(grid, np.array(kap[a - 1, :, b - 1]), (RICCI_CURL, a, b))
    return div, curl


def codazzi_curl_field(fields, a, j):
    h = fields.h.full()
    return StructuredVectorField(fields.grid, np.array(h[a - 1, :, j - 1]), (CODAZZI_CURL, a, j))


def ricci_curl_field(fields, a, b):
    kap = fields.kappa.full()
    return StructuredVectorField(fields.grid, np.array(kap[a - 1, :, b - 1]), (RICCI_CURL, a, b))


def codazzi_div_field(fields, a, j, k, l):
    return build_codazzi_fields(fields, a, j, k, l)[0]


def ricci_div_field(fields, a, b, k, l):
    return build_ricci_fields(fields, a, b, k, l)[0]


@dataclass
class PairingEntry:
    identity: str
    index: tuple  # 1-based, labelled per identity (see PAIRING_LABELS)
    discrepancy: float
    target_max: float
    pairing: np.ndarray = None
    target: np.ndarray = None


PAIRING_LABELS = {
    "qq1": ("a", "b", "i", "j", "k", "l"),
    "qq2": ("a", "b", "c", "k", "l"),
    "qq3": ("a", "b", "i", "k", "l"),
}


@dataclass
class PairingReport:
    entries: list = field(default_factory=list)
    scale: float = 1.0

    def max_discrepancy(self, identity=None):
        vals = [e.discrepancy for e in self.entries if identity in (None, e.identity)]
        return max(vals, default=0.0)

    def relative_discrepancy(self, identity=None):
        return self.max_discrepancy(identity) / self.scale

    def count(self, identity=None):
        return sum(1 for e in self.entries if identity in (None, e.identity))

    def summary(self):
        return {
            name: {
                "tuples": self.count(name),
                "max_abs_discrepancy": self.max_discrepancy(name),
                "max_rel_discrepancy": self.relative_discrepancy(name),
                "max_abs_target": max((e.target_max for e in self.entries if e.identity == name), default=0.0),
            }
            for name in IDENTITIES
        }


def _scale(h, kap):
    mh = float(np.max(np.abs(h), initial=0.0))
    mk = float(np.max(np.abs(kap), initial=0.0))
    s = (mh + mk) ** 2
    return s if s > 0 else 1.0


def pairing_identities(fields, keep_fields=False):
    """Check all three pairing identities over every index tuple.

    ``qq1`` runs over ``(a, b, i, j, k<l)``, ``qq2`` over ``(a, b, c, k<l)``
    and ``qq3`` over ``(a, b, i, k<l)``. The target side is evaluated straight
    from the component formula, the pairing side from the structured vectors.
    """
    grid = fields.grid
    d = grid.d
    n_co = fields.n_co
    h = fields.h.full()
    kap = fields.kappa.full()
    report = PairingReport(scale=_scale(h, kap))
    pairs = [(k, l) for k in range(1, d + 1) for l in range(k + 1, d + 1)]
    normals = range(1, n_co + 1)
    tangents = range(1, d + 1)

    def add(identity, index, pairing, target):
        disc = float(np.max(np.abs(pairing - target), initial=0.0))
        entry = PairingEntry(identity, index, disc, float(np.max(np.abs(target), initial=0.0)))
        if keep_fields:
            entry.pairing, entry.target = pairing, target
        report.entries.append(entry)

    c_curl = {(b, i): codazzi_curl_field(fields, b, i) for b in normals for i in tangents}
    r_curl = {(a, b): ricci_curl_field(fields, a, b) for a in normals for b in normals}

    for a, j, (k, l) in itertools.product(normals, tangents, pairs):
        div = codazzi_div_field(fields, a, j, k, l)
        for b, i in itertools.product(normals, tangents):
            target = h[a - 1, l - 1, j - 1] * h[b - 1, k - 1, i - 1] - h[a - 1, k - 1, j - 1] * h[b - 1, l - 1, i - 1]
            add("qq1", (a, b, i, j, k, l), div.dot(c_curl[b, i]), target)

    for b, c, (k, l) in itertools.product(normals, normals, pairs):
        div = ricci_div_field(fields, b, c, k, l)
        for a in normals:
            target = (
                kap[a - 1, k - 1, b - 1] * kap[b - 1, l - 1, c - 1]
                - kap[a - 1, l - 1, b - 1] * kap[b - 1, k - 1, c - 1]
            )
            add("qq2", (a, b, c, k, l), div.dot(r_curl[a, b]), target)

    for b, i, (k, l) in itertools.product(normals, tangents, pairs):
        div = codazzi_div_field(fields, b, i, k, l)
        for a in normals:
            target = (
                kap[a - 1, k - 1, b - 1] * h[b - 1, l - 1, i - 1]
                - kap[a - 1, l - 1, b - 1] * h[b - 1, k - 1, i - 1]
            )
            add("qq3", (a, b, i, k, l), div.dot(r_curl[a, b]), target)

    return report
