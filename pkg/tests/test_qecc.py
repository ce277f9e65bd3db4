import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcorrlab.errors import ValidationError
from qcorrlab.qecc import (
    CodeFileError,
    CodeSpec,
    PauliErrorIndex,
    apply_pauli,
    check_general_conditions,
    check_strict_conditions,
    enumerate_error_indices,
    errors_from_labels,
    format_code,
    load_code,
    parse_code,
    pauli_error_operator,
    random_code,
    repetition_code,
    shor_code,
)

X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])


def brute_force_indices(n: int, d: int) -> set[tuple[str, str]]:
    """Every (amp, phase) pair of bit strings, filtered by union weight."""
    out = set()
    for amp in itertools.product("01", repeat=n):
        for phase in itertools.product("01", repeat=n):
            if sum(a == "1" or p == "1" for a, p in zip(amp, phase)) <= d:
                out.add(("".join(amp), "".join(phase)))
    return out


def brute_general(code: CodeSpec, errors) -> bool:
    """Dense-operator oracle for the scalar-matrix condition."""
    ops = [pauli_error_operator(e, code.n) for e in errors]
    words = np.array(code.codewords)
    for a in ops:
        for b in ops:
            m = words.conj() @ a.conj().T @ b @ words.T
            if not np.allclose(m, m[0, 0] * np.eye(len(words)), atol=1e-9):
                return False
    return True


class TestPauli:
    def test_identity(self):
        assert np.array_equal(pauli_error_operator(PauliErrorIndex("000", "000"), 3), np.eye(8))

    def test_amplitude_on_first_qubit(self):
        op = pauli_error_operator(PauliErrorIndex("10", "00"), 2)
        assert np.array_equal(op, np.kron(X, np.eye(2)))
        assert op[0b10, 0b00] == 1

    def test_phase_subscript_convention(self):
        op = pauli_error_operator(PauliErrorIndex("0000", "1001"), 4)
        want = np.kron(np.kron(np.kron(Z, np.eye(2)), np.eye(2)), Z)
        assert np.array_equal(op, want)

    def test_combined_is_x_times_z(self):
        op = pauli_error_operator(PauliErrorIndex("1", "1"), 1)
        assert np.array_equal(op, X @ Z)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            pauli_error_operator(PauliErrorIndex("10", "01"), 3)
        with pytest.raises(ValidationError):
            PauliErrorIndex("10", "1")

    @settings(max_examples=60, deadline=None)
    @given(n=st.integers(1, 5), data=st.data())
    def test_fast_apply_matches_dense_and_squares_to_sign(self, n, data):
        amp = data.draw(st.text("01", min_size=n, max_size=n))
        phase = data.draw(st.text("01", min_size=n, max_size=n))
        idx = PauliErrorIndex(amp, phase)
        op = pauli_error_operator(idx, n)
        v = np.random.default_rng(n).standard_normal(2**n) + 0j
        assert np.allclose(apply_pauli(idx, v), op @ v)
        sq = op @ op
        assert np.allclose(sq, np.eye(2**n)) or np.allclose(sq, -np.eye(2**n))
        assert np.allclose(op.conj().T @ op, np.eye(2**n))

    def test_labels(self):
        assert PauliErrorIndex("010", "011").label() == "XZ2 Z3"
        assert errors_from_labels(3, ["XZ2 Z3", "I"]) == [PauliErrorIndex("010", "011"), PauliErrorIndex("000", "000")]


class TestEnumeration:
    def test_weight_zero(self):
        assert enumerate_error_indices(3, 0) == [PauliErrorIndex("000", "000")]

    def test_single_qubit_basis(self):
        assert {(e.amp, e.phase) for e in enumerate_error_indices(1, 1)} == {("0", "0"), ("1", "0"), ("0", "1"), ("1", "1")}

    @pytest.mark.parametrize("n,d", [(3, 1), (3, 2), (4, 2), (5, 1)])
    def test_matches_brute_force(self, n, d):
        got = enumerate_error_indices(n, d)
        assert {(e.amp, e.phase) for e in got} == brute_force_indices(n, d)
        assert len(got) == sum(math.comb(n, w) * 3**w for w in range(d + 1))
        assert got == sorted(got)

    def test_range(self):
        with pytest.raises(ValidationError):
            enumerate_error_indices(3, 4)


class TestCodeSpec:
    def test_orthonormality(self):
        v = np.zeros(8)
        v[0] = 1
        with pytest.raises(ValidationError):
            CodeSpec(3, 1, (v, v), 1)

    def test_codeword_count(self):
        with pytest.raises(ValidationError):
            CodeSpec(3, 1, (np.eye(8)[0],), 1)


class TestConditions:
    def test_repetition_amplitude_passes_both(self):
        code = repetition_code()
        g = check_general_conditions(code, "amplitude")
        s = check_strict_conditions(code, "amplitude")
        assert g.passed and s.passed and g.checked_tuples == 16
        for (a, b), y in g.y_values.items():
            assert y == pytest.approx(1.0 if a == b else 0.0)

    def test_repetition_fails_with_phase_errors(self):
        g = check_general_conditions(repetition_code(), "all")
        assert not g.passed
        identity = PauliErrorIndex("000", "000")
        z1 = PauliErrorIndex("000", "100")
        hit = [v for v in g.violations if {v.first, v.second} == {identity, z1}]
        assert hit and np.allclose(np.diag(hit[0].matrix), [1, -1])
        assert hit[0].classification == "non-uniform-diagonal"

    def test_shor_is_degenerate(self):
        code = shor_code()
        g, s = check_general_conditions(code), check_strict_conditions(code)
        assert g.passed and not s.passed
        assert g.checked_tuples == 28 * 28
        degenerate = g.degenerate_tuples()
        z1, z2 = errors_from_labels(9, ["Z1", "Z2"])
        assert (z1, z2) in degenerate
        assert g.conjugate_symmetric

    def test_matches_dense_oracle(self):
        for code, kinds in ((repetition_code(), "amplitude"), (repetition_code(), "all"), (repetition_code(5, 2), "amplitude")):
            errors = enumerate_error_indices(code.n, code.d, kinds)
            assert check_general_conditions(code, kinds).passed == brute_general(code, errors)

    def test_strict_implies_general_on_random_codes(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            code = random_code(3, 1, 1, rng)
            if check_strict_conditions(code, "amplitude").passed:
                assert check_general_conditions(code, "amplitude").passed
        for code, kinds in ((repetition_code(), "amplitude"), (shor_code(), "all")):
            if check_strict_conditions(code, kinds).passed:
                assert check_general_conditions(code, kinds).passed

    def test_report_json_is_deterministic(self):
        a = check_general_conditions(repetition_code(), "all").to_json()
        b = check_general_conditions(repetition_code(), "all").to_json()
        assert a == b


class TestCodeFile:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "shor9.code"
        path.write_text(format_code(shor_code()))
        code = load_code(path)
        assert code.n == 9 and code.q == 1 and code.d == 1
        for a, b in zip(code.codewords, shor_code().codewords):
            assert np.allclose(a, b, atol=1e-15)

    def test_comments_and_blank_lines(self):
        text = "# repetition\nn=3 q=1 d=1\n000 1 0\n\n\n111 0 1\n"
        code = parse_code(text)
        assert code.codewords[1][7] == 1j

    @pytest.mark.parametrize(
        "text,line",
        [
            ("n=3 q=1\n000 1 0\n", 1),
            ("n=3 q=1 d=1\n000 1 0\n\n11 1 0\n", 4),
            ("n=3 q=1 d=1\n000 one 0\n", 2),
            ("n=3 q=1 d=1\n000 1 0\n000 1 0\n", 3),
            ("n=3 q=1 d=1\n000 1\n", 2),
        ],
    )
    def test_errors_report_line(self, text, line):
        with pytest.raises(CodeFileError) as info:
            parse_code(text)
        assert info.value.line == line

    def test_non_orthogonal_file(self):
        with pytest.raises(CodeFileError):
            parse_code("n=2 q=1 d=1\n00 1 0\n\n00 1 0\n")
