"""Acceptance criteria 1-7, one test each.

Every test prints ``CRITERION <n> PASS|FAIL: <measurements>`` before its
assertion, so ``pytest -s tests/test_acceptance.py`` (or running this file
directly) gives one line per criterion. Tolerances and runtime budgets are
the ones stated in the criteria.
"""

import contextlib
import io
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from gcrlab.catalog import catalog_embedding
from gcrlab.cli import main
from gcrlab.divcurl import IDENTITIES, pairing_identities
from gcrlab.gcr import residuals
from gcrlab.geometry import geometry_from_spec
from gcrlab.grid import build_grid
from gcrlab.metric import MetricSpec
from gcrlab.minimizer import MinimizeConfig, gradient, merit, minimize, objective, random_fields
from gcrlab.weaklab import (
    EpsSchedule,
    FrameworkSpec,
    PairSpec,
    divcurl_experiment,
    framework_experiment,
    make_framework_sequence,
    test_function as make_test_function,
)

TWO_PI = 2.0 * np.pi
HALF_BOX = 0.5 * TWO_PI**3
SCENES = Path(__file__).resolve().parents[1] / "scenes"


def _report(n, ok, detail):
    print(f"CRITERION {n} {'PASS' if ok else 'FAIL'}: {detail}", flush=True)
    return ok


def _catalog(name, n):
    grid = build_grid(3, TWO_PI, n)
    sc = catalog_embedding(name, {}, grid)
    return sc.fields, geometry_from_spec(grid, sc.metric)


def _criterion_1():
    t0 = time.perf_counter()
    exact = {}
    for name in ("flat-zero", "flat-torus-T3"):
        norms = residuals(*_catalog(name, 16)).norms
        exact[name] = max(norms[b][k] for b in ("gauss", "codazzi", "ricci") for k in ("l2", "linf"))
    ratios = {}
    for name in ("graph", "torus-product"):
        lin = [residuals(*_catalog(name, n)).norms["total"]["linf"] for n in (16, 32)]
        ratios[name] = lin[0] / lin[1]
    elapsed = time.perf_counter() - t0
    ok = all(v <= 1e-12 for v in exact.values()) and all(r >= 3.7 for r in ratios.values()) and elapsed <= 60
    detail = ", ".join(f"{k} max norm {v:.3g}" for k, v in exact.items())
    detail += ", " + ", ".join(f"{k} Linf ratio {v:.3f}" for k, v in ratios.items())
    return _report(1, ok, f"{detail}, {elapsed:.1f} s")


def _criterion_2():
    t0 = time.perf_counter()
    grid = build_grid(3, TWO_PI, 8)
    worst = {name: 0.0 for name in IDENTITIES}
    for seed in range(5):
        report = pairing_identities(random_fields(grid, 3, 1.0, seed))
        for name in IDENTITIES:
            worst[name] = max(worst[name], report.relative_discrepancy(name))
    elapsed = time.perf_counter() - t0
    ok = all(v <= 1e-12 for v in worst.values()) and elapsed <= 10
    detail = ", ".join(f"{k} {v:.3g}" for k, v in worst.items())
    return _report(2, ok, f"max relative discrepancy {detail}, {elapsed:.1f} s")


def _criterion_3():
    t0 = time.perf_counter()
    grid = build_grid(3, TWO_PI, (8, 128, 8))
    rows = divcurl_experiment(PairSpec(eta=(0, 1, 0), w=(1, 0, 0)),
                              EpsSchedule.from_eps([1 / 4, 1 / 8, 1 / 16]), [make_test_function()], grid)
    gap = max(r.gap for r in rows)
    viol = max(abs(r.violation_gap - HALF_BOX) / HALF_BOX for r in rows)
    elapsed = time.perf_counter() - t0
    ok = gap <= 1e-10 and viol <= 0.01 and elapsed <= 30
    return _report(3, ok, f"admissible gap {gap:.3g}, violation rel. error {viol:.3g}, {elapsed:.1f} s")


def _criterion_4():
    t0 = time.perf_counter()
    grid = build_grid(3, TWO_PI, (8, 8, 256))
    inv = (4, 8, 16)
    phis = [make_test_function()]
    adm = framework_experiment(
        FrameworkSpec(eta=(0, 0, 1), kappa_matrix=((0, 0.5, 0), (-0.5, 0, 0), (0, 0, 0))), EpsSchedule(inv), phis, grid
    )
    l2 = [r.l2_norm for r in adm]
    l2_spread = max(l2) - min(l2)
    a2 = max(max(r.a2_h, r.a2_kappa) for r in adm)
    defect = min(r.defect_ratio for r in adm)
    qgap = max(r.max_quadratic_gap for r in adm)
    vio = framework_experiment(FrameworkSpec(eta=(0, 0, 1), violation=True), EpsSchedule(inv), phis, grid)
    va2 = [max(r.a2_h, r.a2_kappa) for r in vio]
    ratio_err = max(abs(va2[i + 1] / va2[i] - inv[i + 1] / inv[i]) / (inv[i + 1] / inv[i]) for i in range(2))
    ggap = max(abs(r.gap_gauss - HALF_BOX) / HALF_BOX for r in vio)
    elapsed = time.perf_counter() - t0
    ok = (l2_spread <= 1e-12 and a2 <= 1e-10 and defect >= 0.9 and qgap <= 1e-10
          and ratio_err <= 0.1 and ggap <= 0.01 and elapsed <= 60)
    return _report(
        4, ok,
        f"L2 spread {l2_spread:.3g}, A2 {a2:.3g}, defect ratio {defect:.4f}, quadratic gap {qgap:.3g}; "
        f"violation A2 ratio error {ratio_err:.3g}, Gauss gap rel. error {ggap:.3g}, {elapsed:.1f} s",
    )


def _criterion_5():
    t0 = time.perf_counter()
    grid = build_grid(3, TWO_PI, 8)
    geom = geometry_from_spec(grid, MetricSpec("graph", {"amp": 0.3}))
    f = random_fields(grid, 3, 0.3, seed=11)
    x = f.to_vector()
    g = gradient(f, geom, 4.0, 1.0).to_vector()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(10):
        v = rng.standard_normal(x.size)
        fd = (merit(f.from_vector(x + 1e-5 * v), geom, 4.0, 1.0)
              - merit(f.from_vector(x - 1e-5 * v), geom, 4.0, 1.0)) / 2e-5
        worst = max(worst, abs(fd - g @ v) / abs(g @ v))
    elapsed = time.perf_counter() - t0
    return _report(5, worst <= 1e-6 and elapsed <= 30, f"max relative error {worst:.3g}, {elapsed:.1f} s")


def _criterion_6():
    t0 = time.perf_counter()
    cfg = MinimizeConfig()
    grid = build_grid(3, TWO_PI, 8)
    flat = geometry_from_spec(grid, MetricSpec("flat"))

    a = minimize(flat, cfg, random_fields(grid, 3, 0.1, cfg.seed))
    ok_a = a.objective <= 1e-8 and a.norms["total"]["l2"] <= 1e-6

    lam = make_framework_sequence(FrameworkSpec(eta=(0, 0, 1)), 1, grid)
    closed_form = TWO_PI**3 * 3.0 / 8.0
    b = minimize(flat, cfg, lam)
    ok_b = abs(b.initial_objective - closed_form) <= 1e-12 * closed_form and b.objective < closed_form

    fields, geom = _catalog("torus-product", 8)
    reference = objective(fields, geom, cfg.p)
    c = minimize(geom, cfg, fields)
    obj_err = abs(c.objective - reference) / reference
    ok_c = c.norms["total"]["l2"] <= 1e-4 and obj_err <= 0.1

    elapsed = time.perf_counter() - t0
    ok = ok_a and ok_b and ok_c and elapsed <= 600
    return _report(
        6, ok,
        f"flat random: objective {a.objective:.3g}, residual L2 {a.norms['total']['l2']:.3g} "
        f"[{'ok' if ok_a else 'miss'}]; laminate: {b.initial_objective:.6g} -> {b.objective:.3g} "
        f"[{'ok' if ok_b else 'miss'}]; torus-product: residual L2 {c.norms['total']['l2']:.3g}, "
        f"objective {c.objective:.6g} vs reference {reference:.6g} [{'ok' if ok_c else 'miss'}]; {elapsed:.1f} s",
    )


def _criterion_7(tmp):
    cases = [
        (SCENES / "minimize_flat_random.yaml", ["--override", "experiment.max_inner=20"]),
        (SCENES / "weaklab_divcurl.yaml", ["--threads", "2"]),
        (SCENES / "graph_residuals.yaml", []),
    ]
    mismatched = []
    for scene, extra in cases:
        outs = []
        for i in range(2):
            out = Path(tmp) / f"{scene.stem}_{i}"
            with contextlib.redirect_stdout(io.StringIO()):
                code = main(["run", "--scene", str(scene), "--out", str(out), "--deterministic"] + extra)
            if code != 0:
                mismatched.append(f"{scene.stem} exit {code}")
            outs.append(out)
        names = sorted(p.name for p in outs[0].iterdir())
        if names != sorted(p.name for p in outs[1].iterdir()):
            mismatched.append(f"{scene.stem} file set")
        mismatched += [f"{scene.stem}/{n}" for n in names if (outs[0] / n).read_bytes() != (outs[1] / n).read_bytes()]
    detail = "all report files identical" if not mismatched else "differences: " + ", ".join(mismatched)
    return _report(7, not mismatched, f"{len(cases)} scenes run twice, {detail}")


def test_criterion_1_exact_solution_residuals():
    assert _criterion_1()


def test_criterion_2_pairing_identities():
    assert _criterion_2()


def test_criterion_3_div_curl_lemma():
    assert _criterion_3()


def test_criterion_4_framework_sequences():
    assert _criterion_4()


def test_criterion_5_gradient():
    assert _criterion_5()


def test_criterion_6_minimization():
    assert _criterion_6()


def test_criterion_7_determinism(tmp_path):
    assert _criterion_7(tmp_path)


if __name__ == "__main__":
    with tempfile.TemporaryDirectory() as tmp:
        results = [_criterion_1(), _criterion_2(), _criterion_3(), _criterion_4(), _criterion_5(),
                   _criterion_6(), _criterion_7(tmp)]
    sys.exit(0 if all(results) else 1)
