"""Acceptance criteria 1-9, each at its stated tolerance and runtime budget.

Every test prints one ``CRITERION n: PASS|FAIL`` line to the terminal (also
under output capture) and then asserts the same verdict.
"""

import math
import time

import numpy as np
import pytest

from gqconc import cli
from gqconc.analysis import limit_t1_gq
from gqconc.catalog import antisymmetric_333, family_422, family_422_c2, l_q_bound, m_and_mq_422, q0_bracket
from gqconc.measures import concurrence_pure
from gqconc.monogamy import MONOGAMY_TOL, HierarchySpec, compare_sc_sgqc, hierarchy_terms, residual_from_values
from gqconc.qcore import derive_seed, haar_random_pure
from gqconc.roof import RoofConfig

pytestmark = pytest.mark.slow


def run_command(*argv):
    cfg = cli.resolve_config(cli.build_parser().parse_args(list(argv)))
    t0 = time.perf_counter()
    report = cli.COMMANDS[argv[0]](cfg)
    return report, time.perf_counter() - t0


def failed_checks(report):
    return [c["check"] for c in report.checks if not c["passed"]]


def verdict(capsys, number, ok, elapsed, budget, detail):
    within = elapsed < budget
    passed = ok and within
    line = (f"CRITERION {number}: {'PASS' if passed else 'FAIL'}  {detail}  "
            f"[{elapsed:.1f} s, budget {budget:g} s{'' if within else ' EXCEEDED'}]")
    with capsys.disabled():
        print("\n" + line)
    assert passed, line


def test_criterion_1_table(capsys):
    report, elapsed = run_command("table1")
    worst = max(abs(r["delta"]) for r in report.rows)
    ok = len(report.rows) == 30 and worst <= 1.5e-4
    verdict(capsys, 1, ok, elapsed, 1.0, f"30 cells, max |delta| = {worst:.3e} (tol 1.5e-4)")


def test_criterion_2_residuals_from_values(capsys):
    t0 = time.perf_counter()
    sc, sg = residual_from_values(0.76, [0.27, 0.27, 0.27], 1.5)
    elapsed = time.perf_counter() - t0
    # -0.05 has no exact double; the float subtraction lands a few ulp from it
    ok = abs(sc + 0.05) <= 1e-15 and abs(sg - 0.0229) <= 5e-4
    verdict(capsys, 2, ok, elapsed, 1.0, f"SC = {sc!r}, SGqC = {sg:.6f} (delta {sg - 0.0229:+.2e}, tol 5e-4)")


def test_criterion_3_antisymmetric(capsys):
    t0 = time.perf_counter()
    rows = compare_sc_sgqc(antisymmetric_333(), HierarchySpec(3, 3), [1.1])
    sc = rows[0].sc_residual
    l2 = l_q_bound(2.0)
    lo, hi = q0_bracket(1e-12)
    q0 = 0.5 * (lo + hi)
    elapsed = time.perf_counter() - t0
    ok = abs(sc + 2 / 3) <= 1e-10 and abs(l2 + 1 / 3) <= 1e-15 and 1.20 < q0 < 1.22 and abs(l_q_bound(q0)) <= 1e-10
    verdict(capsys, 3, ok, elapsed, 1.0,
            f"SC + 2/3 = {sc + 2 / 3:.1e}, l_2 + 1/3 = {l2 + 1 / 3:.1e}, q0 = {q0:.12f}")


def test_criterion_4_family_422(capsys):
    t0 = time.perf_counter()
    thetas = np.linspace(0.0, math.pi / 2, 33)
    m_err = 0.0
    for th in thetas:
        c2 = family_422_c2(th)
        direct = concurrence_pure(family_422(th), (0,)) ** 2 - c2["AB"] - c2["AC"]
        m_err = max(m_err, abs(direct - (-2 * math.sin(th) ** 2 * math.cos(th) ** 2)))
    qs = np.linspace(1.0, 1.5, 19)
    mq_min = min(m_and_mq_422(th, q)[1] for th in thetas for q in qs)
    m1 = max(abs(m_and_mq_422(th, 1.0)[1]) for th in thetas)
    elapsed = time.perf_counter() - t0
    ok = m_err <= 1e-10 and mq_min >= -1e-12 and m1 <= 1e-12
    verdict(capsys, 4, ok, elapsed, 5.0, f"max M error {m_err:.1e}, min M_q {mq_min:.1e} on 33x19, max |M_1| {m1:.1e}")


def test_criterion_5_roof_oracles(capsys):
    report, elapsed = run_command("roof-verify")
    worst = {}
    for r in report.rows:
        key = (r["dims"], r["q"])
        worst[key] = max(worst.get(key, 0.0), r["residual"])
    counts = {d: len({r["seed"] for r in report.rows if r["dims"] == d}) for d in ("2x2", "2x3")}
    over = sum(1 for s in {r["seed"] for r in report.rows if r["dims"] == "2x3"}
               if max(r["residual"] for r in report.rows if r["seed"] == s) >= 5e-3)
    parts = [f"{d}: n={counts[d]}, max " + ", ".join(f"q={q:g}:{worst[(d, q)]:.1e}" for q in cli.THEOREM1_Q)
             for d in ("2x2", "2x3")]
    ok = report.passed and counts["2x2"] >= 100 and counts["2x3"] >= 20
    verdict(capsys, 5, ok, elapsed, 300.0,
            "; ".join(parts) + f"; 2x3 states over 5e-3: {over}; failed: {failed_checks(report) or 'none'}")


def test_criterion_6_hierarchy_sweep(capsys):
    total, worst, half, fails = 0.0, math.inf, 0.0, []
    for n in (3, 4, 5):
        report, elapsed = run_command("sweep", "--n-qubits", str(n), "--samples", "500")
        total += elapsed
        worst = min(worst, min(report.extra["min_residual"].values()))
        half = max(half, next(c["max_err"] for c in report.checks if c["check"].startswith("q=2")))
        fails += [f"N={n}: {c}" for c in failed_checks(report)]
    ok = not fails and worst >= -1e-9 and half <= 1e-10
    verdict(capsys, 6, ok, total, 600.0,
            f"N=3,4,5 x 500 states, all k, q=1.1..2.0: min residual {worst:.3e}, max |tau(q=2) - SC/2| {half:.1e}")


def test_criterion_7_alpha_powers(capsys):
    t0 = time.perf_counter()
    worst = math.inf
    for n in (3, 4):
        for i in range(100):
            psi = haar_random_pure((2,) * n, derive_seed(0, i))
            for k in range(3, n + 1):
                terms = hierarchy_terms(psi, HierarchySpec(n, k), cli.SWEEP_ROOF)
                for q in (1.3, 1.7):
                    for a in (2.0, 2.5, 3.0):
                        worst = min(worst, terms.alpha_residual(q, a))
    elapsed = time.perf_counter() - t0
    verdict(capsys, 7, worst >= -1e-9, elapsed, 120.0,
            f"3 and 4 qubits x 100 states, alpha in {{2, 2.5, 3}}, q in {{1.3, 1.7}}: min residual {worst:.3e}")


def test_criterion_8_scans_and_limits(capsys):
    report, elapsed = run_command("lemmas")
    scans = [r for r in report.rows if r.get("item", "").startswith("lemma")]
    points = [r["points"] for r in scans]
    violations = sum(r["violations"] for r in scans)
    verdict(capsys, 8, report.passed, elapsed, 30.0,
            f"scan points {points}, violations {violations}, "
            f"limit_t1_gq(2) = {limit_t1_gq(2.0)!r}; failed: {failed_checks(report) or 'none'}")


def test_criterion_9_comparator(capsys):
    t0 = time.perf_counter()
    ex3 = compare_sc_sgqc(antisymmetric_333(), HierarchySpec(3, 3), [1.1])[0].classification
    ex4 = compare_sc_sgqc(family_422(math.pi / 4), HierarchySpec(3, 3), [1.25])[0].classification
    anomalies, rechecked, counts = [], 0, {}
    cfg = RoofConfig()
    for dims in ((2, 2, 2), (2, 3, 3)):
        for i in range(200):
            psi = haar_random_pure(dims, derive_seed(0, i))
            for row in compare_sc_sgqc(psi, HierarchySpec(3, 3), [1.2, 1.5, 1.8], cfg, recheck_factor=5):
                counts[row.classification] = counts.get(row.classification, 0) + 1
                rechecked += row.rechecked
                if row.classification == "SC-only":
                    anomalies.append((dims, i, row.q))
    elapsed = time.perf_counter() - t0
    ok = ex3 == "SGqC-only" and ex4 == "SGqC-only" and not anomalies
    verdict(capsys, 9, ok, elapsed, 600.0,
            f"antisymmetric q=1.1: {ex3}; 4x2x2 pi/4 q=1.25: {ex4}; 2x2x2 and 2x3x3 x 200 states: {counts}, "
            f"rechecked {rechecked}, SC-only after recheck {len(anomalies)} (tol {MONOGAMY_TOL:g})")
