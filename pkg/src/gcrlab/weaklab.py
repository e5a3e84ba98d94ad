"""Numerical weak-convergence experiments for oscillating sequences.

Oscillations are ``P(m * eta . theta)`` with an integer direction ``eta``,
``eps = 1/m`` and a mean-zero profile ``P``. Grid-aligned wave numbers make
the discrete quadrature of every resolved Fourier mode exact, so weak limits
are computed without quadrature noise and the only thing left to observe is
whether the quadratic terms pass to the limit.

H^{-1} compactness of the derivative combinations cannot be checked
directly; the experiments report their L2 norms instead, which stay bounded
(here: vanish) for admissible sequences and blow up like ``1/eps`` otherwise.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import ceil

import numpy as np

from . import kernels
from .catalog import catalog_embedding
from .errors import ConfigurationError
from .gcr import ImmersionFields, codazzi_dense, ricci_dense
from .geometry import geometry_from_spec
from .grid import Grid, gradient
from .reductions import batched_total, deterministic_mode, is_deterministic, total
from .trig import TrigPolynomial

PROFILES = {"sin": np.sin, "cos": np.cos, "zero": np.zeros_like}
PROFILE_MEAN_SQUARE = {"sin": 0.5, "cos": 0.5, "zero": 0.0}
MIN_POINTS_PER_PERIOD = 8


@dataclass(frozen=True)
class TestFunction(TrigPolynomial):
    """Trig-polynomial test function with an optional declared sup bound."""

    __test__ = False

    declared_bound: float = None

    def __post_init__(self):
        if self.declared_bound is not None and self.bound > self.declared_bound:
            raise ConfigurationError(
                f"test function coefficients allow |phi| up to {self.bound}, above the declared bound {self.declared_bound}"
            )

    @classmethod
    def from_dict(cls, spec, d):
        poly = TrigPolynomial.from_dict(spec, d)
        return cls(poly.const, poly.terms, spec.get("bound"))


def test_function(const=1.0, terms=(), d=3):
    return TestFunction.from_dict({"const": const, "terms": list(terms)}, d)


test_function.__test__ = False


def weak_pairing(f, phi, grid):
    """``sum_nodes f * phi * prod(dx)``; exact for resolved trig modes."""
    values = phi.evaluate(grid) if isinstance(phi, TrigPolynomial) else np.asarray(phi, dtype=float)
    f = np.asarray(f, dtype=float)
    if f.shape != grid.shape or values.shape != grid.shape:
        raise ConfigurationError(f"weak_pairing: field shape {f.shape} / test function shape {values.shape} do not match grid {grid.shape}")
    return total(f * values) * grid.cell_volume


def _pair_blocks(blocks, phi_values, grid):
    """Weak pairing of every leading-index slice of ``blocks`` with ``phi``."""
    lead = blocks.ndim - grid.d
    return batched_total(blocks * phi_values, lead) * grid.cell_volume


def _profile(name):
    if name not in PROFILES:
        raise ConfigurationError(f"profile must be one of {sorted(PROFILES)}, got {name!r}")
    return PROFILES[name]


def eps_to_inverse(eps):
    m = round(1.0 / eps)
    if m < 1 or abs(1.0 / eps - m) > 1e-9 * m:
        raise ConfigurationError(f"eps must be 1/m for an integer m, got {eps}")
    return int(m)


@dataclass(frozen=True)
class EpsSchedule:
    """Strictly decreasing ``eps = 1/m`` values and their grid policy.

    ``policy="fixed"`` keeps the scene grid and requires every oscillation
    period to be an integer number of at least ``points_per_period`` cells;
    ``policy="refine"`` raises the resolution of the oscillating axes per eps.
    """

    inverse: tuple
    points_per_period: int = MIN_POINTS_PER_PERIOD
    policy: str = "fixed"

    def __post_init__(self):
        inv = tuple(int(m) for m in self.inverse)
        if not inv:
            raise ConfigurationError("eps schedule is empty")
        if any(m < 1 for m in inv) or any(b <= a for a, b in zip(inv, inv[1:])):
            raise ConfigurationError(f"eps must be strictly decreasing values 1/m, got m = {inv}")
        if self.policy not in ("fixed", "refine"):
            raise ConfigurationError(f"eps policy must be 'fixed' or 'refine', got {self.policy!r}")
        if self.points_per_period < MIN_POINTS_PER_PERIOD:
            raise ConfigurationError(f"points_per_period must be at least {MIN_POINTS_PER_PERIOD}")
        object.__setattr__(self, "inverse", inv)

    @classmethod
    def from_eps(cls, eps_values, **kw):
        return cls(tuple(eps_to_inverse(e) for e in eps_values), **kw)

    @property
    def eps(self):
        return tuple(1.0 / m for m in self.inverse)

    def resolution_for(self, grid, eta, m):
        res = list(grid.resolution)
        for axis, e in enumerate(eta):
            if e == 0:
                continue
            periods = m * abs(int(e))
            n = res[axis]
            if self.policy == "refine":
                res[axis] = periods * max(self.points_per_period, ceil(n / periods))
                continue
            if n % periods:
                raise ConfigurationError(
                    f"oscillation period does not divide grid: eps = 1/{m} along axis {axis + 1} "
                    f"needs resolution divisible by {periods}, got {n}"
                )
            if n // periods < self.points_per_period:
                raise ConfigurationError(
                    f"oscillation under-resolved: eps = 1/{m} along axis {axis + 1} has "
                    f"{n // periods} points per period (< {self.points_per_period})"
                )
        return tuple(res)

    def grid_for(self, grid, eta, m):
        return Grid(grid.lengths, self.resolution_for(grid, eta, m), grid.periodic)

    def validate(self, grid, eta):
        for m in self.inverse:
            self.resolution_for(grid, eta, m)


def _check_direction(eta, d):
    eta = tuple(int(e) for e in eta)
    if len(eta) != d:
        raise ConfigurationError(f"direction eta must have {d} integer entries")
    if not any(eta):
        raise ConfigurationError("direction eta must be nonzero")
    return eta


def _run(fn, items, threads):
    if threads and threads > 1 and len(items) > 1:
        flag = is_deterministic()

        def task(x):
            # the summation policy is thread-local; carry it into the worker
            with deterministic_mode(flag):
                return fn(x)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(task, items))
    return [fn(x) for x in items]


# --- Div-Curl lemma -------------------------------------------------------


@dataclass(frozen=True)
class PairSpec:
    """``u = U + B(m eta.theta) w`` with ``w . eta = 0``; ``v = V + C(m eta.theta) eta``."""

    eta: tuple
    w: tuple
    U: tuple = None
    V: tuple = None
    profile_u: str = "sin"
    profile_v: str = "sin"

    def __post_init__(self):
        d = len(self.eta)
        eta = _check_direction(self.eta, d)
        w = tuple(float(x) for x in self.w)
        if len(w) != d:
            raise ConfigurationError(f"amplitude w must have {d} entries")
        if abs(float(np.dot(w, eta))) > 1e-12 * max(1.0, float(np.linalg.norm(w))) * float(np.linalg.norm(eta)):
            raise ConfigurationError(f"amplitude w = {w} is not orthogonal to eta = {eta}")
        U = tuple(float(x) for x in (self.U if self.U is not None else (0.0,) * d))
        V = tuple(float(x) for x in (self.V if self.V is not None else (0.0,) * d))
        if len(U) != d or len(V) != d:
            raise ConfigurationError(f"macroscopic parts U, V must have {d} entries")
        _profile(self.profile_u)
        _profile(self.profile_v)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)

    @property
    def d(self):
        return len(self.eta)


@dataclass
class OscillatoryPair:
    grid: Grid
    m: int
    u: np.ndarray
    v: np.ndarray
    u_limit: np.ndarray
    v_limit: np.ndarray

    @property
    def eps(self):
        return 1.0 / self.m


def _constant_vector(grid, values):
    out = np.empty((grid.d,) + grid.shape)
    for i, v in enumerate(values):
        out[i] = v
    return out


def make_oscillatory_pair(spec, m, grid):
    if spec.d != grid.d:
        raise ConfigurationError("pair spec and grid disagree on d")
    phase = grid.phase([m * e for e in spec.eta])
    bu = _profile(spec.profile_u)(phase)
    cv = _profile(spec.profile_v)(phase)
    U = _constant_vector(grid, spec.U)
    V = _constant_vector(grid, spec.V)
    u = U + np.stack([bu * wi for wi in spec.w])
    v = V + np.stack([cv * float(ei) for ei in spec.eta])
    return OscillatoryPair(grid, m, u, v, U, V)


def pair_compactness_norms(pair):
    """L2 norms of ``div u`` and ``curl v`` (both vanish for the oscillatory parts)."""
    from .divcurl import StructuredVectorField, numeric_curl, numeric_div

    grid = pair.grid
    div = numeric_div(StructuredVectorField(grid, pair.u, ("u",)))
    curl = numeric_curl(StructuredVectorField(grid, pair.v, ("v",)))
    vol = grid.cell_volume
    return float(np.sqrt(total(div * div) * vol)), float(np.sqrt(total(curl * curl) * vol))


@dataclass
class DivCurlRow:
    eps: float
    m: int
    resolution: tuple
    phi: int
    gap: float
    violation_pairing: float
    violation_expected: float
    violation_gap: float
    div_norm: float
    curl_norm: float

    @property
    def violation_rel_error(self):
        if self.violation_expected == 0:
            return abs(self.violation_gap)
        return abs(self.violation_gap - self.violation_expected) / abs(self.violation_expected)


def divcurl_experiment(spec, schedule, phis, grid, threads=1):
    """Gap ``|<u.v, phi> - <U.V, phi>|`` per eps for the admissible pair, and the
    same gap for the inadmissible ``u = v = B(m eta.theta) eta``, whose
    limit is ``mean(B^2) |eta|^2 <1, phi>`` instead of 0.
    """
    schedule.validate(grid, spec.eta)
    eta_sq = float(np.dot(spec.eta, spec.eta))
    mean_sq = PROFILE_MEAN_SQUARE[spec.profile_u]

    def one(m):
        g = schedule.grid_for(grid, spec.eta, m)
        pair = make_oscillatory_pair(spec, m, g)
        div_norm, curl_norm = pair_compactness_norms(pair)
        prod = np.sum(pair.u * pair.v, axis=0)
        prod_lim = np.sum(pair.u_limit * pair.v_limit, axis=0)
        b = _profile(spec.profile_u)(g.phase([m * e for e in spec.eta]))
        viol = b * b * eta_sq
        rows = []
        for idx, phi in enumerate(phis):
            gap = abs(weak_pairing(prod, phi, g) - weak_pairing(prod_lim, phi, g))
            v_pair = weak_pairing(viol, phi, g)
            expected = mean_sq * eta_sq * weak_pairing(np.ones(g.shape), phi, g)
            rows.append(DivCurlRow(1.0 / m, m, g.resolution, idx, gap, v_pair, expected, abs(v_pair), div_norm, curl_norm))
        return rows

    return [row for rows in _run(one, list(schedule.inverse), threads) for row in rows]


# --- Framework sequences ---------------------------------------------------


@dataclass(frozen=True)
class FrameworkSpec:
    """Rank-one laminate perturbation of a catalog solution.

    ``h^a_ij += amp_a P_ij B_a(m eta.theta)`` with ``P = eta (x) eta`` (or the
    matrix ``c`` when ``violation`` is set) and
    ``kappa^a_lb += eta_l M_ab C(m eta.theta)`` with ``M`` antisymmetric.
    """

    eta: tuple
    base: str = "flat-zero"
    base_params: dict = field(default_factory=dict)
    n_co: int = 3
    profiles_h: tuple = ("sin",)
    amplitudes_h: tuple = (1.0,)
    kappa_matrix: tuple = None
    profile_kappa: str = "cos"
    violation: bool = False
    c: tuple = None

    def __post_init__(self):
        d = len(self.eta)
        object.__setattr__(self, "eta", _check_direction(self.eta, d))
        n_co = int(self.n_co)
        profiles = tuple(self.profiles_h) + (None,) * (n_co - len(self.profiles_h))
        amps = tuple(float(a) for a in self.amplitudes_h)
        amps = amps + (1.0,) * (n_co - len(amps))
        if len(profiles) != n_co or len(amps) != n_co:
            raise ConfigurationError(f"per-normal profiles/amplitudes exceed n_co = {n_co}")
        for p in profiles:
            if p is not None and p != "zero":
                _profile(p)
        profiles = tuple(None if p == "zero" else p for p in profiles)
        mat = np.zeros((n_co, n_co)) if self.kappa_matrix is None else np.array(self.kappa_matrix, dtype=float)
        if mat.shape != (n_co, n_co):
            raise ConfigurationError(f"kappa amplitude matrix must be {n_co}x{n_co}")
        if np.any(mat + mat.T != 0):
            raise ConfigurationError("kappa amplitude matrix must be antisymmetric")
        _profile(self.profile_kappa)
        if self.violation:
            c = np.eye(d) if self.c is None else np.array(self.c, dtype=float)
            if self.c is None:
                c[-1, -1] = 0.0
            if c.shape != (d, d) or np.any(c != c.T):
                raise ConfigurationError(f"violation amplitude c must be a symmetric {d}x{d} matrix")
            object.__setattr__(self, "c", tuple(map(tuple, c)))
        object.__setattr__(self, "n_co", n_co)
        object.__setattr__(self, "profiles_h", profiles)
        object.__setattr__(self, "amplitudes_h", amps)
        object.__setattr__(self, "kappa_matrix", tuple(map(tuple, mat)))

    @property
    def d(self):
        return len(self.eta)

    def shape_tensor(self):
        eta = np.array(self.eta, dtype=float)
        return np.array(self.c) if self.violation else np.outer(eta, eta)

    def amplitude_norm_sq(self):
        """Box-mean of the squared perturbation, ``sum amp^2 P^2 mean(B^2) + ...``."""
        p = self.shape_tensor()
        total_sq = 0.0
        for prof, amp in zip(self.profiles_h, self.amplitudes_h):
            if prof is not None:
                total_sq += amp * amp * float(np.sum(p * p)) * PROFILE_MEAN_SQUARE[prof]
        mat = np.array(self.kappa_matrix)
        eta = np.array(self.eta, dtype=float)
        total_sq += float(np.sum(mat * mat)) * float(eta @ eta) * PROFILE_MEAN_SQUARE[self.profile_kappa]
        return total_sq


def framework_base(spec, grid):
    params = dict(spec.base_params)
    params.setdefault("n_co", spec.n_co)
    return catalog_embedding(spec.base, params, grid)


def make_framework_sequence(spec, m, grid, base=None):
    """Fields of the sequence at ``eps = 1/m`` on ``grid`` (base scene added)."""
    if spec.d != grid.d:
        raise ConfigurationError("framework spec and grid disagree on d")
    base = base if base is not None else framework_base(spec, grid)
    phase = grid.phase([m * e for e in spec.eta])
    n_co, d = spec.n_co, grid.d
    shape = spec.shape_tensor()
    h = np.array(base.fields.h.full())
    for a, (prof, amp) in enumerate(zip(spec.profiles_h, spec.amplitudes_h)):
        if prof is None or amp == 0:
            continue
        osc = amp * _profile(prof)(phase)
        for i in range(d):
            for j in range(d):
                if shape[i, j] != 0:
                    h[a, i, j] = h[a, i, j] + shape[i, j] * osc
    kappa = np.array(base.fields.kappa.full())
    mat = np.array(spec.kappa_matrix)
    if np.any(mat):
        cos = _profile(spec.profile_kappa)(phase)
        for a in range(n_co):
            for b in range(n_co):
                if mat[a, b] == 0:
                    continue
                for l in range(d):
                    if spec.eta[l]:
                        kappa[a, l, b] = kappa[a, l, b] + (spec.eta[l] * mat[a, b]) * cos
    return ImmersionFields.from_dense(grid, h, kappa)


def quadratic_terms(h, kappa):
    """The quadratic quantities with every index explicit (nothing summed).

    ``q1[a,b,i,j,k,l] = h^a_lj h^b_ki - h^a_kj h^b_li``
    ``q2[a,b,c,k,l] = kappa^a_kb kappa^b_lc - kappa^a_lb kappa^b_kc``
    ``q3[a,b,i,k,l] = kappa^a_kb h^b_li - kappa^a_lb h^b_ki``
    plus ``gauss[i,j,k,l]``, the summed Gauss quadratic.
    """
    x = np.einsum("alj...,bki...->abijkl...", h, h)
    y = np.einsum("akb...,blc...->abckl...", kappa, kappa)
    z = np.einsum("akb...,bli...->abikl...", kappa, h)
    return {
        "q1": x - x.swapaxes(4, 5),
        "q2": y - y.swapaxes(3, 4),
        "q3": z - z.swapaxes(3, 4),
        "gauss": kernels.gauss_quadratic(h),
    }


def a2_combinations(fields):
    """``d_k h^a_lj - d_l h^a_kj`` over ``(a, j, k<l)`` and the kappa analogue over ``(a, b, k<l)``."""
    grid = fields.grid
    d = grid.d
    ku, lu = np.triu_indices(d, 1)
    dh = gradient(fields.h.full(), grid)  # [k, a, l, j]
    ch = np.einsum("kalj...->ajkl...", dh)
    ch = (ch - ch.swapaxes(2, 3))[:, :, ku, lu]
    dk = gradient(fields.kappa.full(), grid)  # [k, a, l, b]
    ck = np.einsum("kalb...->abkl...", dk)
    ck = (ck - ck.swapaxes(2, 3))[:, :, ku, lu]
    return ch, ck


def _l2(block, weights):
    return float(np.sqrt(total(block * block * weights)))


@dataclass
class FrameworkRow:
    eps: float
    m: int
    resolution: tuple
    phi: int
    l2_norm: float
    lp_norm: float
    strong_defect: float
    defect_ratio: float
    a2_h: float
    a2_kappa: float
    o1: float
    o2: float
    o3: float
    gap_q1: float
    gap_q2: float
    gap_q3: float
    gap_gauss: float
    weak_defect: float

    @property
    def max_quadratic_gap(self):
        return max(self.gap_q1, self.gap_q2, self.gap_q3, self.gap_gauss)


def _max_abs(x):
    return float(np.max(np.abs(x), initial=0.0))


def framework_experiment(spec, schedule, phis, grid, p=4.0, threads=1):
    """Per eps and test function: norms, surrogate-compactness norms,
    equation-error pairings and quadratic-term gaps against the base solution.
    """
    schedule.validate(grid, spec.eta)
    amp_sq = spec.amplitude_norm_sq()

    def one(m):
        g = schedule.grid_for(grid, spec.eta, m)
        base = framework_base(spec, g)
        geom = geometry_from_spec(g, base.metric)
        fields = make_framework_sequence(spec, m, g, base)
        w = geom.weights
        h, kap = fields.h.full(), fields.kappa.full()
        h0, k0 = base.fields.h.full(), base.fields.kappa.full()
        hh = np.sum(h * h, axis=(0, 1, 2))
        kk = np.sum(kap * kap, axis=(0, 1, 2))
        l2 = float(np.sqrt(total((hh + kk) * w)))
        lp = total(w * (hh ** (0.5 * p) + kk ** (0.5 * p))) ** (1.0 / p)
        dh, dk = h - h0, kap - k0
        defect = float(np.sqrt(total((np.sum(dh * dh, axis=(0, 1, 2)) + np.sum(dk * dk, axis=(0, 1, 2))) * w)))
        expected = np.sqrt(amp_sq * total(w))
        ratio = float(defect / expected) if expected > 0 else float("nan")
        ch, ck = a2_combinations(fields)
        a2_h, a2_k = _l2(ch, w), _l2(ck, w)

        o1 = codazzi_dense(fields, geom)
        o2 = ricci_dense(fields, geom)
        o3 = kernels.gauss_quadratic(h) - geom.riemann.full()
        q_eps = quadratic_terms(h, kap)
        q_lim = quadratic_terms(h0, k0)
        rows = []
        for idx, phi in enumerate(phis):
            phv = phi.evaluate(g)
            gaps = {
                name: _max_abs(_pair_blocks(q_eps[name], phv, g) - _pair_blocks(q_lim[name], phv, g))
                for name in q_eps
            }
            weak = max(_max_abs(_pair_blocks(dh, phv, g)), _max_abs(_pair_blocks(dk, phv, g)))
            rows.append(
                FrameworkRow(
                    1.0 / m, m, g.resolution, idx, l2, lp, defect, ratio, a2_h, a2_k,
                    _max_abs(_pair_blocks(o1, phv, g)),
                    _max_abs(_pair_blocks(o2, phv, g)),
                    _max_abs(_pair_blocks(o3, phv, g)),
                    gaps["q1"], gaps["q2"], gaps["q3"], gaps["gauss"], weak,
                )
            )
        return rows

    return [row for rows in _run(one, list(schedule.inverse), threads) for row in rows]
