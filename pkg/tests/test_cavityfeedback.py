import math

import numpy as np
import pytest

from qcorrlab.cavityfeedback import (
    EXCITED,
    FeedbackConfig,
    GROUND,
    block_unitary,
    concavity_decrement_check,
    cumulative_success_probability,
    decisive_first_atom,
    first_positive_root,
    jc_coefficients,
    jc_unitary,
    method2_intermediate,
    nonlocal_method1,
    nonlocal_method2,
    run_feedback_protocol,
    solve_time_excited,
    solve_time_ground,
    update_amplitudes_ground_branch,
    apply_jc,
)
from qcorrlab.errors import SolverError, TruncationError, ValidationError
from qcorrlab.infomeasures import trial_rng
from qcorrlab.qstate import CompositeSpace, StateVector, check_unitary

TWO_LN2 = 2 * math.log(2)


# -- scalar oracle -------------------------------------------------------------------
# Field amplitudes only; a_k = cos(R_k t/2), |b_k| = |sin(R_k t/2)|, R_k = sqrt(k+1).


def oracle_root(f, t_max=400.0, step=1e-3):
    t, ft = step, f(step)
    while t < t_max:
        t2 = t + step
        f2 = f(t2)
        if ft == 0 or (ft > 0) != (f2 > 0):
            lo, hi = t, t2
            for _ in range(100):
                mid = (lo + hi) / 2
                if (f(mid) > 0) == (ft > 0):
                    lo = mid
                else:
                    hi = mid
            return (lo + hi) / 2
        t, ft = t2, f2
    raise AssertionError("oracle found no root")


def oracle_curve(beta2: float, n: int, n_prime: int, atoms: int) -> list[float]:
    """Cumulative probability of an |e> detection along the all-|g> branch."""
    x, y = math.sqrt(1 - beta2), math.sqrt(beta2)
    wn, wp = math.sqrt(n + 1) / 2, math.sqrt(n_prime + 1) / 2
    survive, out, raised = 1.0, [], False
    for _ in range(atoms):
        if y * y < 1e-14:
            out.append(out[-1])
            continue
        if raised:
            t = oracle_root(lambda t: x * math.sin(wn * t) - y * math.sin(wp * t))
            keep_x, keep_y = x * math.cos(wn * t), y * math.cos(wp * t)
        else:
            t = oracle_root(lambda t: x * math.cos(wn * t) - y * math.cos(wp * t))
            keep_x, keep_y = x * math.sin(wn * t), y * math.sin(wp * t)
        pg = keep_x**2 + keep_y**2
        survive *= pg
        out.append(1 - survive)
        x, y = abs(keep_x) / math.sqrt(pg), abs(keep_y) / math.sqrt(pg)
        raised = True
    return out


# frozen from the oracle above, |beta|^2 = 0.2, (n, n') = (0, 1)
FROZEN_CURVE_02 = [0.3849643138025264, 0.3998092708566746, 0.3999881198686178]


class TestJcPrimitives:
    def test_coefficients(self):
        c = jc_coefficients(3, 0.7, 1.3)
        r = 1.3 * 2
        assert c.a == pytest.approx(math.cos(r * 0.7 / 2))
        assert c.b == pytest.approx(-1j * math.sin(r * 0.7 / 2))

    def test_block_unitary_is_unitary_and_freezes_edges(self):
        u = block_unitary(5, lambda k: jc_coefficients(k, 0.9, 1.0))
        check_unitary(u, 1e-12)
        # |g,0> (index 0) and |e,top> (index 2*4+1) untouched
        assert u[0, 0] == 1 and u[9, 9] == 1

    def test_excited_atom_emits_into_vacuum(self):
        space = CompositeSpace((("A", 3), ("atom", 2)))
        psi = apply_jc(StateVector.basis(space, [0, EXCITED]), "A", "atom", math.pi / 2, 1.0)
        t = psi.tensor()
        assert abs(t[0, EXCITED]) ** 2 == pytest.approx(0.5)
        assert abs(t[1, GROUND]) ** 2 == pytest.approx(0.5)

    def test_truncation_guard(self):
        space = CompositeSpace((("A", 2), ("atom", 2)))
        with pytest.raises(TruncationError):
            apply_jc(StateVector.basis(space, [1, EXCITED]), "A", "atom", 0.5, 1.0)

    def test_jc_unitary_checked(self):
        space = CompositeSpace((("A", 4), ("atom", 2)))
        check_unitary(jc_unitary(space, "A", "atom", 2.1, 0.8), 1e-12)


class TestSolvers:
    @pytest.mark.parametrize("alpha2", [0.6, 0.8, 0.95])
    def test_excited_root_equalizes(self, alpha2):
        a, b = math.sqrt(alpha2), math.sqrt(1 - alpha2)
        t = solve_time_excited(a, b, 0, 1, 1.0)
        assert a * math.cos(t / 2) == pytest.approx(b * math.cos(math.sqrt(2) * t / 2), abs=1e-12)
        assert t == pytest.approx(oracle_root(lambda s: a * math.cos(s / 2) - b * math.cos(math.sqrt(2) * s / 2)), abs=1e-9)

    def test_ground_root_skips_origin(self):
        t = solve_time_ground(0.9, math.sqrt(0.19), 0, 1, 1.0)
        assert t > 0.1

    def test_no_root_raises(self):
        with pytest.raises(SolverError):
            first_positive_root(lambda t: 1.0 + t, 0.1, 1.0)

    def test_requires_unequal_levels(self):
        with pytest.raises(ValidationError):
            solve_time_excited(0.8, 0.6, 1, 1, 1.0)

    def test_update_amplitudes(self):
        c_n, c_np = jc_coefficients(0, 1.0, 1.0), jc_coefficients(1, 1.0, 1.0)
        x, y = update_amplitudes_ground_branch(0.8, 0.6, c_n, c_np)
        assert abs(x) ** 2 + abs(y) ** 2 == pytest.approx(1)
        assert abs(x / y) == pytest.approx(0.8 * math.sin(0.5) / (0.6 * math.sin(math.sqrt(2) / 2)))


class TestConfig:
    def test_requires_alpha_larger(self):
        with pytest.raises(ValidationError):
            FeedbackConfig.from_weight(0.4)

    def test_cutoff_default_and_floor(self):
        assert FeedbackConfig.from_weight(0.8, max_atoms=10).fock_cutoff == 12
        with pytest.raises(ValidationError):
            FeedbackConfig.from_weight(0.8, max_atoms=10, fock_cutoff=5)

    def test_initial_field_with_atom(self):
        cfg = FeedbackConfig.from_weight(0.7)
        f = cfg.initial_field().tensor()
        assert f[0, 1] == pytest.approx(math.sqrt(0.7)) and f[1, 0] == pytest.approx(math.sqrt(0.3))


class TestProtocol:
    def test_decisive_first_atom_probability(self):
        step = decisive_first_atom(FeedbackConfig.from_weight(0.8))
        assert step.p_excited == pytest.approx(0.4, abs=1e-12)

    @pytest.mark.parametrize("seed", range(6))
    def test_trajectories(self, seed):
        cfg = FeedbackConfig.from_weight(0.8, max_atoms=30)
        trace = run_feedback_protocol(cfg, trial_rng(seed, 0))
        assert trace.status in ("maximally-entangled", "disentangled")
        last = trace.initial_mutual_information
        for rec in trace.records:
            assert rec.spectator_deviation < 1e-12
            if rec.outcome == "e":
                assert rec.mutual_information == pytest.approx(TWO_LN2, abs=1e-9)
            else:
                assert rec.mutual_information < last
            # averaged over both outcomes no gain is possible
            assert rec.ensemble_mutual_information <= last + 1e-9
            last = rec.mutual_information

    def test_same_seed_same_trajectory(self):
        cfg = FeedbackConfig.from_weight(0.7, max_atoms=20)
        a = run_feedback_protocol(cfg, trial_rng(4, 2)).records
        b = run_feedback_protocol(cfg, trial_rng(4, 2)).records
        assert a == b


class TestSuccessCurve:
    def test_matches_frozen_oracle(self):
        curve = cumulative_success_probability(FeedbackConfig.from_weight(0.8), 3)
        assert np.allclose(curve.probabilities, FROZEN_CURVE_02, atol=1e-10)

    @pytest.mark.parametrize("beta2", [0.1, 0.3, 0.45])
    def test_matches_scalar_oracle(self, beta2):
        curve = cumulative_success_probability(FeedbackConfig.from_weight(1 - beta2, max_atoms=12), 12)
        assert np.allclose(curve.probabilities, oracle_curve(beta2, 0, 1, 12), atol=1e-9)

    def test_other_levels(self):
        cfg = FeedbackConfig.from_weight(0.75, n=1, n_prime=3, max_atoms=20)
        curve = cumulative_success_probability(cfg, 20)
        assert np.allclose(curve.probabilities, oracle_curve(0.25, 1, 3, 20), atol=1e-9)
        assert curve.residual < 1e-3


class TestConcavity:
    def test_initial_entropy(self):
        rep = concavity_decrement_check(FeedbackConfig.from_weight(0.7))
        assert rep.s_initial == pytest.approx(0.610864302, abs=1e-9)

    @pytest.mark.parametrize("alpha2", [0.6, 0.7, 0.9])
    def test_bound_and_decrement(self, alpha2):
        rep = concavity_decrement_check(FeedbackConfig.from_weight(alpha2))
        assert rep.equality_residual < 1e-9
        assert rep.s_excited == pytest.approx(math.log(2), abs=1e-9)
        assert rep.decrement >= rep.bound - 1e-12
        assert rep.s_ground < rep.s_initial


class TestNonlocal:
    def test_method1_vacuum_exchange_time(self):
        _, i_n = nonlocal_method1(math.pi)
        assert i_n == pytest.approx(TWO_LN2, abs=1e-9)

    def test_method1_without_exchange_leaves_fields_empty(self):
        state, i_n = nonlocal_method1(2 * math.pi)
        assert i_n < 1e-9
        t = state.tensor()
        assert abs(t[EXCITED, GROUND, 0, 0]) ** 2 + abs(t[GROUND, EXCITED, 0, 0]) ** 2 == pytest.approx(1)

    def test_method2(self):
        mid = method2_intermediate(math.pi / 2).tensor()
        assert abs(mid[EXCITED, 0, 0]) ** 2 == pytest.approx(0.5)
        assert abs(mid[GROUND, 1, 0]) ** 2 == pytest.approx(0.5)
        state, i_n = nonlocal_method2(math.pi / 2, math.pi)
        assert i_n == pytest.approx(TWO_LN2, abs=1e-9)
        assert np.sum(np.abs(state.tensor()[EXCITED]) ** 2) < 1e-20
