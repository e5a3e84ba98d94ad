"""Builtin metric families and coefficient-table metrics.

Every builder returns the dense metric array ``g[i, j]`` sampled on the grid.
Angles are the normalized coordinates ``theta_i = 2*pi*x_i/L_i``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .trig import TrigPolynomial

BUILTIN_METRICS = ("flat", "diag-of-revolution", "conformal", "graph")


class ProductSine:
    """``f = amp * prod_i sin(theta_i)`` with analytic derivatives."""

    def __init__(self, amp):
        self.amp = float(amp)

    def _factors(self, grid):
        thetas = [grid.phase([1 if j == i else 0 for j in range(grid.d)]) for i in range(grid.d)]
        scales = [2.0 * np.pi / L for L in grid.lengths]
        return [np.sin(t) for t in thetas], [np.cos(t) for t in thetas], scales

    def value(self, grid):
        s, _, _ = self._factors(grid)
        out = np.full(grid.shape, self.amp)
        for si in s:
            out = out * si
        return out

    def grad(self, grid):
        s, c, w = self._factors(grid)
        out = np.empty((grid.d,) + grid.shape)
        for i in range(grid.d):
            term = np.full(grid.shape, self.amp * w[i]) * c[i]
            for j in range(grid.d):
                if j != i:
                    term = term * s[j]
            out[i] = term
        return out

    def hessian(self, grid):
        s, c, w = self._factors(grid)
        d = grid.d
        out = np.empty((d, d) + grid.shape)
        for i in range(d):
            for j in range(d):
                term = np.full(grid.shape, self.amp * w[i] * w[j])
                for m in range(d):
                    if m == i and m == j:
                        term = -term * s[m]
                    elif m == i or m == j:
                        term = term * c[m]
                    else:
                        term = term * s[m]
                out[i, j] = term
        return out


class TrigGraphFunction:
    """Graph function given as a trig polynomial."""

    def __init__(self, poly):
        self.poly = poly

    def value(self, grid):
        return self.poly.evaluate(grid)

    def grad(self, grid):
        return np.stack([self.poly.derivative(grid, i) for i in range(1, grid.d + 1)])

    def hessian(self, grid):
        d = grid.d
        out = np.zeros((d, d) + grid.shape)
        scales = [2.0 * np.pi / L for L in grid.lengths]
        for t in self.poly.terms:
            ph = grid.phase(t.wave)
            base = np.sin(ph) if t.fn == "sin" else np.cos(ph)
            for i in range(d):
                for j in range(d):
                    kk = t.wave[i] * t.wave[j] * scales[i] * scales[j]
                    if kk:
                        out[i, j] = out[i, j] - t.coef * kk * base
        return out


def graph_function(params, d):
    if "f" in params:
        return TrigGraphFunction(TrigPolynomial.from_dict(params["f"], d))
    return ProductSine(params.get("amp", 0.3))


@dataclass(frozen=True)
class MetricSpec:
    """Either a builtin ``name`` with ``params`` or per-component tables."""

    name: str = "flat"
    params: dict = field(default_factory=dict)
    components: dict = None

    def evaluate(self, grid):
        if self.components is not None:
            return _from_components(self.components, grid)
        builder = _BUILDERS.get(self.name)
        if builder is None:
            raise ConfigurationError(
                f"unknown metric {self.name!r}; expected one of {', '.join(BUILTIN_METRICS)}"
            )
        return builder(grid, dict(self.params))

    def to_dict(self):
        if self.components is not None:
            return {"components": self.components}
        return {"name": self.name, "params": dict(self.params)}


def _identity(grid):
    g = np.zeros((grid.d, grid.d) + grid.shape)
    for i in range(grid.d):
        g[i, i] = 1.0
    return g


def _flat(grid, params):
    g = _identity(grid)
    diag = params.get("diag")
    if diag is not None:
        if len(diag) != grid.d:
            raise ConfigurationError(f"flat metric diag needs {grid.d} entries")
        for i, v in enumerate(diag):
            g[i, i] = float(v)
    return g


def _axis_param(params, key, default, d):
    axis = int(params.get(key, default))
    if not 1 <= axis <= d:
        raise ConfigurationError(f"{key} must be in 1..{d}, got {axis}")
    return axis


def _revolution(grid, params):
    """``g_ss = r^2``, ``g_tt = (R + r cos theta_s)^2``, identity elsewhere."""
    d = grid.d
    s = _axis_param(params, "source_axis", 1, d)
    t = _axis_param(params, "target_axis", d, d)
    if s == t:
        raise ConfigurationError("source_axis and target_axis must differ")
    R = float(params.get("R", 2.0))
    r = float(params.get("r", 1.0))
    if not R > abs(r) > 0:
        raise ConfigurationError("surface of revolution needs R > |r| > 0")
    theta = grid.phase([1 if i == s - 1 else 0 for i in range(d)])
    g = _identity(grid)
    g[s - 1, s - 1] = r * r
    g[t - 1, t - 1] = (R + r * np.cos(theta)) ** 2
    return g


def conformal_factor(grid, params):
    if "phi" in params:
        return TrigPolynomial.from_dict(params["phi"], grid.d)
    axis = _axis_param(params, "axis", 1, grid.d)
    wave = [1 if i == axis - 1 else 0 for i in range(grid.d)]
    return TrigPolynomial.from_dict(
        {"const": 0.0, "terms": [{"coef": params.get("amp", 0.1), "fn": "sin", "k": wave}]}, grid.d
    )


def _conformal(grid, params):
    phi = conformal_factor(grid, params).evaluate(grid)
    return _identity(grid) * np.exp(2.0 * phi)


def _graph(grid, params):
    df = graph_function(params, grid.d).grad(grid)
    return _identity(grid) + np.einsum("i...,j...->ij...", df, df)


def _from_components(tables, grid):
    d = grid.d
    g = _identity(grid)
    for key, spec in tables.items():
        if len(key) != 2 or not key.isdigit():
            raise ConfigurationError(f"metric component key must be two digits like '12', got {key!r}")
        i, j = int(key[0]) - 1, int(key[1]) - 1
        if not (0 <= i < d and 0 <= j < d):
            raise ConfigurationError(f"metric component {key} out of range for d={d}")
        values = TrigPolynomial.from_dict(spec, d).evaluate(grid)
        g[i, j] = values
        g[j, i] = values
    return g


_BUILDERS = {
    "flat": _flat,
    "diag-of-revolution": _revolution,
    "conformal": _conformal,
    "graph": _graph,
}
