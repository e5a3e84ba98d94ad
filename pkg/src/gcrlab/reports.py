"""Run a scene's experiment and write its JSON summary and CSV tables.

Reports never contain wall-clock data in deterministic mode, floats are
written with ``repr`` (shortest round-tripping form) and JSON keys are
sorted, so repeated deterministic runs produce identical bytes.
"""

import csv
import json
import platform
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .divcurl import pairing_identities
from .gcr import residuals
from .geometry import inverse_defect
from .minimizer import minimize, objective
from .reductions import deterministic_mode
from .weaklab import divcurl_experiment, framework_experiment


class Table:
    def __init__(self, header):
        self.header = list(header)
        self.rows = []

    def add(self, *values):
        self.rows.append(list(values))


def _f(x):
    return float(x)


def _max_abs(x):
    return float(np.max(np.abs(x), initial=0.0))


def _geometry(scene, grid, threads):
    geom, spec = scene.build_geometry(grid)
    gam = geom.christoffel.full()
    riem = geom.riemann.full()
    summary = {
        "metric": spec.to_dict(),
        "inverse_defect": inverse_defect(geom.metric, geom.g_inv),
        "det_min": _f(np.min(geom.det)),
        "det_max": _f(np.max(geom.det)),
        "christoffel_max_abs": _max_abs(gam),
        "christoffel_symmetry_defect": _max_abs(gam - gam.swapaxes(1, 2)),
        "riemann_max_abs": _max_abs(riem),
        "riemann_antisymmetry_defect": _max_abs(riem + riem.swapaxes(1, 2)),
    }
    table = Table(["quantity", "value"])
    for key in sorted(k for k in summary if k != "metric"):
        table.add(key, summary[key])
    return summary, {"geometry": table}, None


def _residuals(scene, grid, threads):
    geom, spec = scene.build_geometry(grid)
    fields = scene.build_fields(grid)
    norms = residuals(fields, geom).norms
    table = Table(["block", "l2", "linf"])
    for block in ("gauss", "codazzi", "ricci", "total"):
        table.add(block, norms[block]["l2"], norms[block]["linf"])
    summary = {"metric": spec.to_dict(), "norms": norms, "symmetry_defect": fields.symmetry_defect()}
    return summary, {"residuals": table}, None


def _divcurl(scene, grid, threads):
    fields = scene.build_fields(grid)
    report = pairing_identities(fields)
    summary = {"scale": report.scale, "identities": report.summary()}
    table = Table(["identity", "index", "max_abs_discrepancy", "max_abs_target"])
    for e in report.entries:
        table.add(e.identity, "-".join(str(i) for i in e.index), e.discrepancy, e.target_max)
    return summary, {"pairings": table}, None


def _weaklab(scene, grid, threads):
    exp = scene.experiment
    schedule = scene.eps_schedule()
    phis = scene.test_functions(grid.d)
    if exp["mode"] == "divcurl":
        rows = divcurl_experiment(scene.pair_spec(), schedule, phis, grid, threads=threads)
        table = Table(["eps", "m", "resolution", "phi", "gap", "violation_gap", "violation_expected",
                       "violation_rel_error", "div_l2", "curl_l2"])
        for r in rows:
            table.add(r.eps, r.m, "x".join(map(str, r.resolution)), r.phi, r.gap, r.violation_gap,
                      r.violation_expected, r.violation_rel_error, r.div_norm, r.curl_norm)
        last = [r for r in rows if r.m == schedule.inverse[-1]]
        summary = {
            "mode": "divcurl",
            "max_gap": max(r.gap for r in rows),
            "final_eps_violation_gap": [r.violation_gap for r in last],
            "final_eps_violation_rel_error": [r.violation_rel_error for r in last],
        }
        return summary, {"weaklab": table}, None

    spec = scene.framework_spec()
    rows = framework_experiment(spec, schedule, phis, grid, p=exp.get("p", 4.0), threads=threads)
    cols = ["eps", "m", "resolution", "phi", "l2_norm", "lp_norm", "strong_defect", "defect_ratio",
            "a2_h", "a2_kappa", "o1", "o2", "o3", "gap_q1", "gap_q2", "gap_q3", "gap_gauss", "weak_defect"]
    table = Table(cols)
    for r in rows:
        table.add(*[("x".join(map(str, r.resolution)) if c == "resolution" else getattr(r, c)) for c in cols])
    by_eps = {}
    for r in rows:
        by_eps.setdefault(r.m, r)
    ms = list(schedule.inverse)
    a2 = [max(by_eps[m].a2_h, by_eps[m].a2_kappa) for m in ms]
    summary = {
        "mode": "framework",
        "violation": spec.violation,
        "l2_norms": [by_eps[m].l2_norm for m in ms],
        "a2_norms": a2,
        "a2_ratios": [a2[i + 1] / a2[i] if a2[i] > 0 else None for i in range(len(a2) - 1)],
        "max_quadratic_gap": max(r.max_quadratic_gap for r in rows),
        "final_eps_gauss_gap": [r.gap_gauss for r in rows if r.m == ms[-1]],
        "defect_ratio": [by_eps[m].defect_ratio for m in ms],
    }
    return summary, {"weaklab": table}, None


def _minimize(scene, grid, threads):
    geom, spec = scene.build_geometry(grid)
    init = scene.build_fields(grid)
    cfg = scene.minimize_config()
    result = minimize(geom, cfg, init)
    hist = Table(["outer", "mu", "objective", "penalty", "merit", "residual_l2", "inner_steps", "inner_reason", "step"])
    for h in result.history:
        hist.add(h.outer, h.mu, h.objective, h.penalty, h.merit, h.residual_l2, h.inner_steps, h.inner_reason, h.step)
    trace = Table(["step", "merit"])
    for i, v in enumerate(result.merit_trace, start=1):
        trace.add(i, v)
    summary = {
        "metric": spec.to_dict(),
        "p": cfg.p,
        "seed": scene.seed(),
        "initial_objective": result.initial_objective,
        "initial_penalty": result.initial_penalty,
        "objective": result.objective,
        "penalty": result.penalty,
        "norms": result.norms,
        "termination": result.reason,
        "outer_iterations": len(result.history),
        "symmetry_defect": result.fields.symmetry_defect(),
        "objective_check": objective(result.fields, geom, cfg.p),
    }
    return summary, {"history": hist, "merit": trace}, result.fields


RUNNERS = {
    "geometry": _geometry,
    "residuals": _residuals,
    "divcurl-verify": _divcurl,
    "weaklab": _weaklab,
    "minimize": _minimize,
}


def run_experiment(scene, threads=1, deterministic=False):
    """Execute the scene; returns ``(summary, tables, fields_or_None)``."""
    grid = scene.build_grid()
    started = time.perf_counter()
    with deterministic_mode(deterministic):
        summary, tables, fields = RUNNERS[scene.experiment["kind"]](scene, grid, threads)
    report = {
        "experiment": scene.experiment["kind"],
        "name": scene.doc.get("name"),
        "grid": {"d": grid.d, "lengths": list(grid.lengths), "resolution": list(grid.resolution)},
        "results": summary,
        "provenance": provenance(scene, deterministic),
    }
    if not deterministic:
        report["provenance"]["elapsed_seconds"] = time.perf_counter() - started
        report["provenance"]["created"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    return report, tables, fields


def provenance(scene, deterministic):
    seed = scene.seed() if scene.fields_block["kind"] == "random" else None
    return {
        "tool": "gcrlab",
        "version": __version__,
        "scene_sha256": scene.sha256,
        "seed": seed,
        "deterministic": bool(deterministic),
        "kernel_backend": kernels.backend_name(),
        "numpy": np.__version__,
        "python": platform.python_version(),
    }


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return "" if v is None else str(v)


def write_json(path, report):
    Path(path).write_text(json.dumps(_clean(report), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_csv(path, table):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.header)
        for row in table.rows:
            writer.writerow([_cell(v) for v in row])


def write_reports(out_dir, prefix, report, tables, fields=None):
    """Write ``<prefix>.json``, ``<prefix>_<table>.csv`` and an optional field dump."""
    from .fielddump import write_fields

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    files = {}
    for name, table in sorted(tables.items()):
        path = out / f"{prefix}_{name}.csv"
        write_csv(path, table)
        files[name] = path.name
        written.append(path)
    if fields is not None:
        dump, side = write_fields(out / f"{prefix}_fields.gcrf", fields,
                                  {"scene_sha256": report["provenance"]["scene_sha256"]})
        files["fields"] = dump.name
        written += [dump, side]
    report = dict(report, files=files)
    path = out / f"{prefix}.json"
    write_json(path, report)
    return [path] + written
