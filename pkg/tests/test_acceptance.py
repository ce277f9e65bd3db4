"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL] criterion N: ...`` line (also
collected in the terminal summary) and then asserts the same verdict.
"""

import math
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from qcorrlab.cavityfeedback import (
    FeedbackConfig,
    concavity_decrement_check,
    cumulative_success_probability,
    nonlocal_method1,
    nonlocal_method2,
)
from qcorrlab.channels import contraction_suite, monotonicity_suite
from qcorrlab.infomeasures import entropy_property_suite, vn_mutual_information
from qcorrlab.localec import error_sweep, verify_entanglement_preserved
from qcorrlab.qecc import (
    check_general_conditions,
    check_strict_conditions,
    enumerate_error_indices,
    repetition_code,
    shor_code,
)
from qcorrlab.qstate import CompositeSpace, StateVector, density_from_pure

TWO_LN2 = 2 * math.log(2)


def verdict(number: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_01_epr_value():
    start = time.perf_counter()
    space = CompositeSpace.of(A=2, B=2)
    s = 1 / math.sqrt(2)
    equal = vn_mutual_information(density_from_pure(StateVector(np.array([0, s, s, 0]), space)), ["A"])
    product = vn_mutual_information(density_from_pure(StateVector(np.array([0, 1.0, 0, 0]), space)), ["A"])
    elapsed = time.perf_counter() - start
    ok = abs(equal - TWO_LN2) <= 1e-9 and abs(product) <= 1e-12 and elapsed < 1
    verdict(1, ok, f"I_N(equal)={equal:.12f} (2 ln 2={TWO_LN2:.12f}), I_N(beta=0)={product:.1e}, {elapsed:.3f}s")


def test_criterion_02_entropy_suite():
    start = time.perf_counter()
    report = entropy_property_suite(seed=2024, trials=1000, dims=(2, 2, 2))
    elapsed = time.perf_counter() - start
    counts = {c.name: (c.trials, c.violations) for c in report.checks.values()}
    needed = ("additivity", "concavity", "strong_subadditivity", "araki_lieb")
    ok = all(counts[k] == (1000, 0) for k in needed) and report.violations == 0 and elapsed < 30
    verdict(2, ok, f"{counts} in {elapsed:.2f}s")


def test_criterion_03_monotonicity():
    start = time.perf_counter()
    reports = [monotonicity_suite(seed=1, trials=1000, dims=d) for d in ((2, 2), (2, 3))]
    elapsed = time.perf_counter() - start
    worst_gain = max(r["i_after"] - r["i_before"] for rep in reports for r in rep.records)
    worst_spectator = max(r["spectator_deviation"] for rep in reports for r in rep.records)
    ok = (
        all(len(rep.records) == 1000 for rep in reports)
        and worst_gain <= 1e-8
        and worst_spectator <= 1e-10
        and elapsed < 60
    )
    verdict(3, ok, f"max(I_after-I_before)={worst_gain:.2e}, max spectator change={worst_spectator:.1e}, {elapsed:.2f}s")


def test_criterion_04_classical_contraction():
    start = time.perf_counter()
    report = contraction_suite(seed=4, trials=1000, dims=(2, 2))
    elapsed = time.perf_counter() - start
    worst = max(r["d_after"] - r["d_before"] for r in report.records)
    ok = len(report.records) == 1000 and worst <= 1e-8 and elapsed < 30
    verdict(4, ok, f"max(D_after-D_before)={worst:.2e} over 1000 trials, {elapsed:.2f}s")


def test_criterion_05_feedback_limit():
    details, ok = [], True
    for beta2 in (0.1, 0.2, 0.3, 0.45):
        start = time.perf_counter()
        curve = cumulative_success_probability(FeedbackConfig.from_weight(1 - beta2, max_atoms=60), 60)
        elapsed = time.perf_counter() - start
        p = np.array(curve.probabilities)
        monotone = bool(np.all(np.diff(p) >= 0))
        below_one = bool(np.all(p < 1))
        close = abs(p[-1] - 2 * beta2) <= 1e-3
        ok &= monotone and below_one and close and elapsed < 10
        details.append(f"|b|^2={beta2}: P60={p[-1]:.10f} vs {2 * beta2} ({elapsed:.2f}s)")
    verdict(5, ok, "; ".join(details))


def test_criterion_06_concavity_decrement():
    start = time.perf_counter()
    details, ok = [], True
    for alpha2 in (0.6, 0.7, 0.9):
        rep = concavity_decrement_check(FeedbackConfig.from_weight(alpha2))
        margin = rep.s_initial - rep.s_ground
        ok &= margin > 1e-6 and rep.equality_residual <= 1e-9
        details.append(f"a^2={alpha2}: margin={margin:.4f}, equality residual={rep.equality_residual:.1e}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 5
    verdict(6, ok, "; ".join(details) + f" ({elapsed:.2f}s)")


def test_criterion_07_nonlocal_methods():
    r0 = 1.0
    start = time.perf_counter()
    # b_0(t) = -i sin(R_0 t / 2) = 0 first at t = 2 pi / R_0
    _, method1 = nonlocal_method1(2 * math.pi / r0, r0)
    _, method2 = nonlocal_method2(math.pi / (2 * r0), math.pi / r0, r0)
    elapsed = time.perf_counter() - start
    ok = abs(method1 - TWO_LN2) <= 1e-9 and abs(method2 - TWO_LN2) <= 1e-9 and elapsed < 1
    verdict(7, ok, f"method 1 (b_0=0): I_N={method1:.3e}; method 2: I_N={method2:.12f}; target {TWO_LN2:.12f}; {elapsed:.3f}s")


def test_criterion_08_code_checker():
    rep = repetition_code()
    amp_general = check_general_conditions(rep, "amplitude")
    amp_strict = check_strict_conditions(rep, "amplitude")
    full = check_general_conditions(rep, "all")
    phase_named = any(v.first.phase != "000" or v.second.phase != "000" for v in full.violations)
    start = time.perf_counter()
    shor = shor_code()
    shor_general = check_general_conditions(shor, "all")
    shor_strict = check_strict_conditions(shor, "all")
    elapsed = time.perf_counter() - start
    ok = (
        amp_general.passed and amp_strict.passed
        and amp_general.checked_tuples == 16
        and not full.passed and phase_named
        and shor_general.passed and not shor_strict.passed
        and elapsed < 60
    )
    first = full.violations[0] if full.violations else None
    cert = f"({first.first.label()}, {first.second.label()})" if first else "none"
    verdict(
        8, ok,
        f"repetition amplitude general/strict={amp_general.passed}/{amp_strict.passed}, "
        f"with phases general={full.passed} e.g. {cert}; 9-qubit general/strict="
        f"{shor_general.passed}/{shor_strict.passed} over {shor_general.checked_tuples} pairs, {elapsed:.2f}s",
    )


def test_criterion_09_end_to_end_correction():
    start = time.perf_counter()
    alpha, beta = math.sqrt(0.7), math.sqrt(0.3)
    cases = error_sweep(alpha, beta, c1_weights=(0.1, 0.5, 1.0))
    elapsed = time.perf_counter() - start
    min_fid = min(c.min_fidelity for c in cases)
    info_gap = max(c.max_info_gap for c in cases)
    branches = sum(len(c.branches) for c in cases)
    ok = len(cases) == 18 and min_fid >= 1 - 1e-9 and info_gap <= 1e-8 and elapsed < 10
    verdict(9, ok, f"18 cases, {branches} branches: min fidelity={min_fid:.15f}, max |dI_N|={info_gap:.1e}, {elapsed:.2f}s")


def test_criterion_10_entropy_cross_check():
    start = time.perf_counter()
    alpha, beta = math.sqrt(0.7), math.sqrt(0.3)
    fixtures = [(repetition_code(), "amplitude"), (repetition_code(), "all"), (shor_code(), "all")]
    checked, worst, passing = 0, 0.0, []
    for code, kinds in fixtures:
        if not check_general_conditions(code, kinds).passed:
            continue
        passing.append(f"{code.name}/{kinds}")
        errors = enumerate_error_indices(code.n, code.d, kinds)
        for e_i in errors:
            for e_j in errors:
                res = verify_entanglement_preserved(code, (e_i, e_j), alpha, beta)
                worst = max(worst, abs(res.s_after - res.s_before), abs(res.cross_term))
                checked += 1
    elapsed = time.perf_counter() - start
    ok = len(passing) == 2 and worst <= 1e-9 and elapsed < 60
    verdict(10, ok, f"fixtures {passing}: {checked} error pairs, max deviation={worst:.1e}, {elapsed:.2f}s")
