"""Exact embeddings with closed-form ``(h, kappa)``, used as residual oracles.

Conventions: ``h^a_ij = n^a . d_i d_j x`` for an explicit immersion ``x`` and
orthonormal normals ``n^a``; unused normal slots carry zeros.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .gcr import ImmersionFields
from .metric import MetricSpec, graph_function

CATALOG = {
    "flat-zero": "flat metric, h = 0, kappa = 0 (any d)",
    "flat-torus-T3": "product of three unit circles in R^6: h^a_ij = -delta_ai delta_aj, kappa = 0 (d = 3)",
    "graph": "graph x = (u, f(u)) with f = amp*prod sin(theta_i): h^1 = Hess f / sqrt(1 + |grad f|^2)",
    "torus-product": "torus of revolution in R^3 times a unit circle in R^2: g = diag(r^2, 1, (R + r cos x_1)^2) (d = 3)",
}

DEFAULT_N_CO = 3


@dataclass(frozen=True)
class EmbeddingScene:
    name: str
    metric: MetricSpec
    fields: ImmersionFields
    provenance: str


def _require_periodic(grid, name):
    if not all(grid.periodic):
        raise ConfigurationError(f"catalog scene {name!r} needs a fully periodic grid")


def _require_two_pi(grid, name):
    if not np.allclose(grid.lengths, 2.0 * np.pi, rtol=0, atol=1e-12):
        raise ConfigurationError(f"catalog scene {name!r} needs a (2*pi)^d box, got {grid.lengths}")


def _fields(grid, n_co, h):
    return ImmersionFields.from_dense(grid, h, np.zeros((n_co, grid.d, n_co) + grid.shape))


def catalog_embedding(name, params=None, grid=None):
    """Metric spec plus exact ``(h, kappa)`` of the named catalog embedding."""
    params = dict(params or {})
    if name not in CATALOG:
        raise ConfigurationError(f"unknown catalog scene {name!r}; expected one of {', '.join(CATALOG)}")
    if grid is None:
        raise ConfigurationError("catalog_embedding needs a grid")
    _require_periodic(grid, name)
    d = grid.d
    n_co = int(params.pop("n_co", DEFAULT_N_CO))
    if n_co < 1:
        raise ConfigurationError("codimension n_co must be at least 1")
    h = np.zeros((n_co, d, d) + grid.shape)

    if name == "flat-zero":
        if params:
            raise ConfigurationError(f"flat-zero takes no parameters besides n_co, got {sorted(params)}")
        return EmbeddingScene(name, MetricSpec("flat"), _fields(grid, n_co, h), CATALOG[name])

    if name == "flat-torus-T3":
        if d != 3 or n_co < 3:
            raise ConfigurationError("flat-torus-T3 needs d = 3 and n_co >= 3")
        _require_two_pi(grid, name)
        for a in range(3):
            h[a, a, a] = -1.0
        return EmbeddingScene(name, MetricSpec("flat"), _fields(grid, n_co, h), CATALOG[name])

    if name == "graph":
        f = graph_function(params, d)
        df = f.grad(grid)
        hess = f.hessian(grid)
        w = np.sqrt(1.0 + np.sum(df * df, axis=0))
        h[0] = hess / w
        return EmbeddingScene(name, MetricSpec("graph", params), _fields(grid, n_co, h), CATALOG[name])

    # torus-product
    if d != 3 or n_co < 2:
        raise ConfigurationError("torus-product needs d = 3 and n_co >= 2")
    _require_two_pi(grid, name)
    R = float(params.get("R", 2.0))
    r = float(params.get("r", 1.0))
    unknown = set(params) - {"R", "r"}
    if unknown:
        raise ConfigurationError(f"torus-product got unknown parameters {sorted(unknown)}")
    x1 = grid.phase([1, 0, 0])
    # torus (u = x_1, v = x_3) with outward normal; circle x_2 with outward normal
    h[0, 0, 0] = -r
    h[0, 2, 2] = -(R + r * np.cos(x1)) * np.cos(x1)
    h[1, 1, 1] = -1.0
    metric = MetricSpec("diag-of-revolution", {"R": R, "r": r, "source_axis": 1, "target_axis": 3})
    return EmbeddingScene(name, metric, _fields(grid, n_co, h), CATALOG[name])
