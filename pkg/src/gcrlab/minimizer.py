"""Weighted L^p selection problem solved by quadratic-penalty continuation.

Minimize ``J(h, kappa) = int sqrt|g| ((h.h)^(p/2) + (kappa.kappa)^(p/2))``
subject to the Gauss, Codazzi and Ricci equations, relaxed to
``J + mu * P`` with ``P`` the squared weighted L2 norm of all residual
blocks. Each ``mu`` stage runs gradient descent with Armijo backtracking on
the canonical (symmetry-reduced) parameters, so every iterate satisfies the
index symmetries exactly.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import ConfigurationError, DivergenceError
from .gcr import ImmersionFields, residuals
from .grid import diff
from .reductions import total
from .tensor import pullback_gradient

TERMINATION_REASONS = ("converged", "max-outer", "stalled")


@dataclass(frozen=True)
class MinimizeConfig:
    """Exponent, penalty schedule and descent parameters.

    ``step_expand`` scales the last accepted step to form the next trial step
    so the step length can grow when the landscape flattens.
    """

    p: float = 4.0
    mu0: float = 1.0
    mu_growth: float = 10.0
    outer_iterations: int = 6
    max_inner: int = 500
    grad_tol: float = 1e-12
    inner_rtol: float = 1e-12
    initial_step: float = 1e-2
    step_shrink: float = 0.5
    step_expand: float = 2.0
    armijo: float = 1e-4
    max_backtracks: int = 60
    tol_r: float = 1e-6
    obj_rtol: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if not self.p > 2:
            raise ConfigurationError(f"exponent p must satisfy p > 2, got p = {self.p}")
        if not self.mu_growth > 1:
            raise ConfigurationError(f"penalty growth factor must exceed 1, got {self.mu_growth}")
        if not 0 < self.step_shrink < 1:
            raise ConfigurationError("step_shrink must lie in (0, 1)")
        if not self.step_expand >= 1:
            raise ConfigurationError("step_expand must be at least 1")
        if not 0 < self.armijo < 1:
            raise ConfigurationError("armijo constant must lie in (0, 1)")
        for name in ("mu0", "grad_tol", "inner_rtol", "initial_step", "tol_r", "obj_rtol"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        for name in ("outer_iterations", "max_inner", "max_backtracks"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be at least 1")


@dataclass
class OuterRecord:
    outer: int
    mu: float
    objective: float
    penalty: float
    merit: float
    residual_l2: float
    inner_steps: int
    inner_reason: str
    step: float


@dataclass
class MinimizeResult:
    fields: ImmersionFields
    objective: float
    penalty: float
    norms: dict
    history: list = field(default_factory=list)
    merit_trace: list = field(default_factory=list)
    reason: str = ""
    initial_objective: float = 0.0
    initial_penalty: float = 0.0


def _check_p(p):
    if not p > 2:
        raise ConfigurationError(f"exponent p must satisfy p > 2, got p = {p}")


def objective(fields, geom, p=4.0):
    """``sum_nodes w ((sum h^2)^(p/2) + (sum kappa^2)^(p/2))``."""
    _check_p(p)
    fields.grid.check_same(geom.grid)
    dh, _ = kernels.power_density(fields.h.full(), 3, p)
    dk, _ = kernels.power_density(fields.kappa.full(), 3, p)
    return total(geom.weights * (dh + dk))


def constraint_penalty(fields, geom):
    """Sum of squared weighted L2 norms of the Gauss, Codazzi and Ricci blocks."""
    report = residuals(fields, geom)
    return sum(v["l2"] ** 2 for k, v in report.norms.items() if k != "total")


def _penalty_terms(fields, geom):
    report = residuals(fields, geom)
    norms = report.norms
    pen = sum(norms[k]["l2"] ** 2 for k in ("gauss", "codazzi", "ricci"))
    return report, pen


def _dense_gradient(fields, geom, p, mu, report=None):
    """Gradient with respect to the dense ``h`` and ``kappa`` arrays."""
    grid = fields.grid
    w = geom.weights
    h = fields.h.full()
    kap = fields.kappa.full()
    _, fh = kernels.power_density(h, 3, p)
    _, fk = kernels.power_density(kap, 3, p)
    gh = (w * fh) * h
    gk = (w * fk) * kap
    if mu == 0:
        return gh, gk
    report = report if report is not None else residuals(fields, geom)

    # Gauss: d/dv of sum w r^2 with r = v - v^(jk) - R
    wr = w * report.gauss
    s = 2.0 * (wr - wr.swapaxes(1, 2))
    gh = gh + mu * kernels.gauss_adjoint(s, h)

    # Codazzi: stored for k < l, so the multiplier on the half residual is 2 w r
    s = 2.0 * w * report.codazzi.full()
    ah, ak = kernels.codazzi_adjoint(s, h, kap, geom.christoffel.full())
    dterm = np.zeros_like(h)
    for k in range(grid.d):
        # transpose of d_k is -d_k on a periodic grid
        dterm -= np.einsum("ajl...->alj...", diff(s[:, :, k], grid, k + 1))
    gh = gh + mu * (ah + dterm)
    gk = gk + mu * ak

    # Ricci: every (a, b) with k < l
    s = 2.0 * w * report.ricci.full()
    ah, ak = kernels.ricci_adjoint(s, h, kap, geom.g_inv.full())
    dterm = np.zeros_like(kap)
    for k in range(grid.d):
        dterm -= np.einsum("abl...->alb...", diff(s[:, :, k], grid, k + 1))
    gh = gh + mu * ah
    gk = gk + mu * (ak + dterm)
    return gh, gk


def gradient(fields, geom, p=4.0, mu=1.0, report=None):
    """Gradient of ``objective + mu * penalty`` in canonical storage.

    Returned as an :class:`ImmersionFields` whose canonical data are the
    partial derivatives with respect to the canonical parameters.
    """
    _check_p(p)
    fields.grid.check_same(geom.grid)
    gh, gk = _dense_gradient(fields, geom, p, mu, report)
    nd = fields.grid.d
    return ImmersionFields(
        fields.h.with_data(pullback_gradient(fields.h.layout, gh, nd)),
        fields.kappa.with_data(pullback_gradient(fields.kappa.layout, gk, nd)),
    )


def merit(fields, geom, p, mu):
    return objective(fields, geom, p) + mu * constraint_penalty(fields, geom)


def random_fields(grid, n_co, amplitude=0.1, seed=0):
    """Uniform ``[-amplitude, amplitude]`` canonical data from a seeded generator."""
    rng = np.random.default_rng(seed)
    base = ImmersionFields.zeros(grid, n_co)
    vec = rng.uniform(-amplitude, amplitude, base.n_params)
    return base.from_vector(vec)


class _Evaluator:
    def __init__(self, geom, p, template):
        self.geom = geom
        self.p = p
        self.template = template

    def fields(self, x):
        return self.template.from_vector(x)

    def value(self, x, mu):
        f = self.fields(x)
        report, pen = _penalty_terms(f, self.geom)
        obj = objective(f, self.geom, self.p)
        return obj + mu * pen, obj, pen, report

    def grad(self, x, mu, report):
        return gradient(self.fields(x), self.geom, self.p, mu, report).to_vector()


def _inner(ev, x, mu, cfg, step, trace):
    """Armijo gradient descent at fixed ``mu``. Returns the new state and a reason."""
    F, obj, pen, report = ev.value(x, mu)
    F_start = F
    steps = 0
    reason = "max-inner"
    for steps in range(1, cfg.max_inner + 1):
        g = ev.grad(x, mu, report)
        gg = float(g @ g)
        if not np.isfinite(gg):
            raise DivergenceError(f"non-finite gradient at mu = {mu}", history=list(trace))
        if np.sqrt(gg) <= cfg.grad_tol:
            reason = "gradient"
            steps -= 1
            break
        t = step * cfg.step_expand
        for _ in range(cfg.max_backtracks):
            trial = x - t * g
            Ft, objt, pent, rept = ev.value(trial, mu)
            if np.isfinite(Ft) and Ft <= F - cfg.armijo * t * gg:
                break
            t *= cfg.step_shrink
        else:
            reason = "line-search"
            steps -= 1
            break
        decrease = F - Ft
        x, F, obj, pen, report, step = trial, Ft, objt, pent, rept, t
        trace.append(F)
        if decrease <= cfg.inner_rtol * max(abs(F), np.finfo(float).tiny):
            reason = "stalled"
            break
    if not np.isfinite(F) or F > F_start:
        raise DivergenceError(
            f"objective + mu * penalty increased over the inner loop at mu = {mu} ({F_start} -> {F})",
            history=list(trace),
        )
    return x, F, obj, pen, report, steps, reason, step


def minimize(geom, config=None, initial=None, n_co=3):
    """Penalty continuation from ``initial`` (zeros when omitted)."""
    cfg = config or MinimizeConfig()
    if initial is None:
        initial = ImmersionFields.zeros(geom.grid, n_co)
    initial.grid.check_same(geom.grid)
    ev = _Evaluator(geom, cfg.p, initial)
    x = initial.to_vector()
    obj0 = objective(initial, geom, cfg.p)
    pen0 = constraint_penalty(initial, geom)
    history, trace = [], []
    mu = cfg.mu0
    step = cfg.initial_step / cfg.step_expand
    prev_obj = obj0
    reason = "max-outer"
    report = None
    obj, pen = obj0, pen0
    for outer in range(1, cfg.outer_iterations + 1):
        x, F, obj, pen, report, steps, inner_reason, step = _inner(ev, x, mu, cfg, step, trace)
        res_l2 = report.norms["total"]["l2"]
        history.append(OuterRecord(outer, mu, obj, pen, F, res_l2, steps, inner_reason, step))
        rel = abs(obj - prev_obj) / max(abs(prev_obj), np.finfo(float).tiny)
        if res_l2 <= cfg.tol_r and (rel <= cfg.obj_rtol or obj == 0.0):
            reason = "converged"
            break
        prev_obj = obj
        mu *= cfg.mu_growth
        # a larger penalty stiffens the problem; restart the step from the new scale
        step = min(step, cfg.initial_step / mu) / cfg.step_expand
    fields = ev.fields(x)
    if report is None:
        report = residuals(fields, geom)
    return MinimizeResult(fields, obj, pen, report.norms, history, trace, reason, obj0, pen0)


def with_overrides(config, **kw):
    return replace(config, **kw)
