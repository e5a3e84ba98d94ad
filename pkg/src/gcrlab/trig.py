"""Finite trigonometric polynomials on periodic boxes.

A term ``coef * fn(k . theta)`` uses integer wave numbers ``k`` and the
normalized angles ``theta_i = 2*pi*x_i/L_i``; on a ``(2*pi)^d`` box the angle
is just the coordinate. Used for test functions, metric component tables and
oscillation profiles.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

_FUNCS = {"sin": np.sin, "cos": np.cos}


@dataclass(frozen=True)
class TrigTerm:
    coef: float
    fn: str
    wave: tuple

    def __post_init__(self):
        if self.fn not in _FUNCS:
            raise ConfigurationError(f"trig term function must be 'sin' or 'cos', got {self.fn!r}")
        if not np.isfinite(self.coef):
            raise ConfigurationError("trig term coefficient must be finite")


@dataclass(frozen=True)
class TrigPolynomial:
    const: float = 0.0
    terms: tuple = field(default_factory=tuple)

    @classmethod
    def from_dict(cls, spec, d):
        """Build from ``{"const": c, "terms": [{"coef", "fn", "k"}, ...]}``."""
        terms = []
        for t in spec.get("terms", []):
            wave = tuple(int(x) for x in t["k"])
            if len(wave) != d:
                raise ConfigurationError(f"wave vector {wave} has wrong length for d={d}")
            terms.append(TrigTerm(float(t["coef"]), t["fn"], wave))
        return cls(float(spec.get("const", 0.0)), tuple(terms))

    def to_dict(self):
        return {
            "const": self.const,
            "terms": [{"coef": t.coef, "fn": t.fn, "k": list(t.wave)} for t in self.terms],
        }

    @property
    def bound(self):
        """Upper bound on ``max |p|``."""
        return abs(self.const) + sum(abs(t.coef) for t in self.terms)

    def evaluate(self, grid):
        out = np.full(grid.shape, float(self.const))
        for t in self.terms:
            out = out + t.coef * _FUNCS[t.fn](grid.phase(t.wave))
        return out

    def derivative(self, grid, axis):
        """Analytic ``d/dx_axis`` sampled on the grid (1-based axis)."""
        scale = 2.0 * np.pi / grid.lengths[axis - 1]
        out = np.zeros(grid.shape)
        for t in self.terms:
            k = t.wave[axis - 1]
            if k == 0:
                continue
            ph = grid.phase(t.wave)
            if t.fn == "sin":
                out = out + t.coef * k * scale * np.cos(ph)
            else:
                out = out - t.coef * k * scale * np.sin(ph)
        return out

    def mean(self):
        """Box average: the constant plus any ``cos(0)`` terms."""
        return self.const + sum(t.coef for t in self.terms if t.fn == "cos" and not any(t.wave))


def constant(value):
    return TrigPolynomial(float(value), ())
