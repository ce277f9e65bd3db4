"""Local encoding of an entangled cavity pair against single amplitude errors.

Each cavity is a two-level register (Fock 0/1) and carries two atoms
(``g`` = 0, ``e`` = 1).  Encoding is two Control-Nots from the cavity to its
atoms, which is the three-qubit repetition code on each side.  Errors are
injected as a unitary coupling to a fresh environment qubit, so that the
corrupted state keeps an explicit record of which branch occurred.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PreconditionError, ProtocolError, ValidationError
from .infomeasures import von_neumann_entropy
from .qecc import CodeSpec, PauliErrorIndex, apply_pauli, repetition_code, tuple_condition
from .qstate import (
    CompositeSpace,
    StateVector,
    apply_unitary,
    measurement_branches,
    reduced_density,
)

SIDES = ("A", "B")
SITES = ("cavityA", "atomA1", "atomA2", "cavityB", "atomB1", "atomB2")
GROUND_TOL = 1e-12
FIDELITY_TOL = 1e-9

NOT = np.array([[0, 1], [1, 0]], dtype=complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)  # control first


@dataclass(frozen=True)
class RegisterLayout:
    n_env: int = 1

    def __post_init__(self):
        if self.n_env < 1:
            raise ValidationError("need at least one environment qubit")

    @staticmethod
    def cavity(side: str) -> str:
        return f"cavity{side}"

    @staticmethod
    def atoms(side: str) -> tuple[str, str]:
        return (f"atom{side}1", f"atom{side}2")

    @property
    def env_labels(self) -> tuple[str, ...]:
        return tuple(f"env{i}" for i in range(1, self.n_env + 1))

    @property
    def labels(self) -> tuple[str, ...]:
        return SITES + self.env_labels

    @property
    def space(self) -> CompositeSpace:
        return CompositeSpace(tuple((lab, 2) for lab in self.labels))

    @property
    def cavities(self) -> list[str]:
        return [self.cavity(s) for s in SIDES]

    @property
    def all_atoms(self) -> list[str]:
        return [a for s in SIDES for a in self.atoms(s)]


def cavity_pair(alpha: complex, beta: complex) -> StateVector:
    """``alpha |0>_A |1>_B + beta |1>_A |0>_B`` on the two cavities alone."""
    amps = np.zeros(4, dtype=complex)
    amps[0b01], amps[0b10] = alpha, beta
    return StateVector(amps, CompositeSpace((("cavityA", 2), ("cavityB", 2))))


def initial_state(alpha: complex, beta: complex, layout: RegisterLayout = RegisterLayout()) -> StateVector:
    """The cavity pair with all atoms in ``g`` and all environment qubits in ``|0>``."""
    space = layout.space
    rest = [0] * layout.n_env
    a_then_b = [(0, 1, alpha), (1, 0, beta)]  # (cavityA, cavityB, amplitude)
    amps = sum(
        amp * StateVector.basis(space, [ca, 0, 0, cb, 0, 0, *rest]).amplitudes for ca, cb, amp in a_then_b
    )
    return StateVector(amps, space)


def excited_population(state: StateVector, label: str) -> float:
    rho = reduced_density(state, [label])
    return float(rho.matrix[1, 1].real)


def _cnot_network(state: StateVector, order: Sequence[tuple[str, str]]) -> StateVector:
    for control, target in order:
        state = apply_unitary(state, CNOT, [control, target])
    return state


def gate_order(layout: RegisterLayout = RegisterLayout(), reverse: bool = False) -> list[tuple[str, str]]:
    pairs = [(layout.cavity(s), a) for s in SIDES for a in layout.atoms(s)]
    return pairs[::-1] if reverse else pairs


def encode(
    state: StateVector,
    layout: RegisterLayout = RegisterLayout(),
    order: Sequence[tuple[str, str]] | None = None,
) -> StateVector:
    """Two Control-Nots per side, cavity controlling each of its atoms."""
    for atom in layout.all_atoms:
        if excited_population(state, atom) > GROUND_TOL:
            raise PreconditionError(f"{atom} is not in the ground state")
    return _cnot_network(state, order or gate_order(layout))


def decode(
    state: StateVector,
    layout: RegisterLayout = RegisterLayout(),
    order: Sequence[tuple[str, str]] | None = None,
) -> StateVector:
    """The encoding network again; it is its own inverse."""
    return _cnot_network(state, order or gate_order(layout))


def error_unitary(c0: complex, c1: complex) -> np.ndarray:
    """Site (x) env unitary sending ``|psi>|0>`` to ``c0|psi>|0> + c1 X|psi>|1>``."""
    if abs(abs(c0) ** 2 + abs(c1) ** 2 - 1.0) > 1e-12:
        raise ValidationError(f"|c0|^2 + |c1|^2 = {abs(c0) ** 2 + abs(c1) ** 2!r}, expected 1")
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    up = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0| on env
    eye = np.eye(2, dtype=complex)
    return (
        c0 * np.kron(eye, p0)
        + c1 * np.kron(NOT, up)
        - np.conj(c1) * np.kron(NOT, up.T)
        + np.conj(c0) * np.kron(eye, p1)
    )


def inject_amplitude_error(state: StateVector, site: str, env: str, c0: complex, c1: complex) -> StateVector:
    """Entangle an amplitude error on ``site`` with the environment qubit ``env``."""
    if site == env:
        raise ValidationError("site and environment must differ")
    if excited_population(state, env) > GROUND_TOL:
        raise ProtocolError(f"environment qubit {env} has already recorded an error")
    return apply_unitary(state, error_unitary(c0, c1), [site, env])


@dataclass(frozen=True)
class CorrectionOutcome:
    syndrome: dict[str, tuple[int, int]]
    corrected: dict[str, bool]
    atom_error: dict[str, bool]
    probability: float
    fidelity: float
    i_before: float
    i_after: float

    def __post_init__(self):
        if not -FIDELITY_TOL <= self.fidelity <= 1 + FIDELITY_TOL:
            raise ValidationError(f"fidelity {self.fidelity!r} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "syndrome": {s: "".join("ge"[b] for b in v) for s, v in self.syndrome.items()},
            "corrected": dict(self.corrected),
            "atom_error": dict(self.atom_error),
            "probability": self.probability,
            "fidelity": self.fidelity,
            "i_before": self.i_before,
            "i_after": self.i_after,
        }


def cavity_mutual_information(state: StateVector) -> float:
    """``I_N`` between the two cavities with atoms and environment traced out."""
    rho = reduced_density(state, ["cavityA", "cavityB"])
    return max(
        0.0,
        von_neumann_entropy(reduced_density(state, ["cavityA"]))
        + von_neumann_entropy(reduced_density(state, ["cavityB"]))
        - von_neumann_entropy(rho),
    )


def side_mutual_information(state: StateVector, layout: RegisterLayout = RegisterLayout()) -> float:
    """``I_N`` between side A (cavity plus atoms) and side B, environment traced out."""
    side_a = [layout.cavity("A"), *layout.atoms("A")]
    side_b = [layout.cavity("B"), *layout.atoms("B")]
    return max(
        0.0,
        von_neumann_entropy(reduced_density(state, side_a))
        + von_neumann_entropy(reduced_density(state, side_b))
        - von_neumann_entropy(reduced_density(state, side_a + side_b)),
    )


def fidelity(state: StateVector, target: StateVector) -> float:
    """``<t| rho_cav |t>`` with ``rho_cav`` the reduced state of the cavities."""
    rho = reduced_density(state, list(target.space.labels)).matrix
    t = target.amplitudes
    return float(np.vdot(t, rho @ t).real)


# one projector per joint outcome of the four atoms, A1 A2 B1 B2 as bits 3..0
ATOM_PROJECTORS = [np.diag(row).astype(complex) for row in np.eye(16)]


def _correct_branch(
    collapsed: StateVector, outcome: int, prob: float, target: StateVector, i_before: float, layout: RegisterLayout
) -> tuple[CorrectionOutcome, StateVector]:
    bits = [(outcome >> (3 - k)) & 1 for k in range(4)]
    syndrome = {"A": (bits[0], bits[1]), "B": (bits[2], bits[3])}
    corrected, atom_error = {}, {}
    state = collapsed
    for side, pattern in syndrome.items():
        # both atoms excited: the cavity was flipped; one excited: that atom was
        corrected[side] = pattern == (1, 1)
        atom_error[side] = pattern in ((0, 1), (1, 0))
        if corrected[side]:
            state = apply_unitary(state, NOT, [layout.cavity(side)])
    out = CorrectionOutcome(
        syndrome=syndrome,
        corrected=corrected,
        atom_error=atom_error,
        probability=prob,
        fidelity=fidelity(state, target),
        i_before=i_before,
        i_after=cavity_mutual_information(state),
    )
    return out, state


def correction_branches(
    state: StateVector, target: StateVector, layout: RegisterLayout = RegisterLayout()
) -> list[tuple[CorrectionOutcome, StateVector]]:
    """Every nonzero syndrome outcome of a decoded state, each corrected."""
    i_before = cavity_mutual_information_of(target)
    branches = measurement_branches(state, ATOM_PROJECTORS, layout.all_atoms)
    return [
        _correct_branch(collapsed, k, prob, target, i_before, layout)
        for k, (prob, collapsed) in enumerate(branches)
        if collapsed is not None
    ]


def syndrome_correct(
    state: StateVector,
    rng: np.random.Generator,
    target: StateVector,
    layout: RegisterLayout = RegisterLayout(),
) -> tuple[CorrectionOutcome, StateVector]:
    """Measure the four atoms, flip each cavity whose atoms are both excited."""
    branches = measurement_branches(state, ATOM_PROJECTORS, layout.all_atoms)
    probs = np.array([p if s is not None else 0.0 for p, s in branches])
    k = int(rng.choice(len(branches), p=probs / probs.sum()))
    prob, collapsed = branches[k]
    return _correct_branch(collapsed, k, prob, target, cavity_mutual_information_of(target), layout)


def cavity_mutual_information_of(pair: StateVector) -> float:
    a, b = pair.space.labels
    return von_neumann_entropy(reduced_density(pair, [a])) + von_neumann_entropy(reduced_density(pair, [b]))


@dataclass(frozen=True)
class SweepCase:
    site: str
    c1_weight: float
    branches: tuple[CorrectionOutcome, ...]

    @property
    def min_fidelity(self) -> float:
        return min(b.fidelity for b in self.branches)

    @property
    def max_info_gap(self) -> float:
        return max(abs(b.i_after - b.i_before) for b in self.branches)

    @property
    def recovered(self) -> bool:
        return self.min_fidelity >= 1 - FIDELITY_TOL and self.max_info_gap <= 1e-8


def run_pipeline(
    alpha: complex,
    beta: complex,
    site: str | None,
    c0: complex = 0.0,
    c1: complex = 1.0,
    layout: RegisterLayout = RegisterLayout(),
) -> list[tuple[CorrectionOutcome, StateVector]]:
    """encode -> optional error -> decode -> every syndrome branch corrected."""
    target = cavity_pair(alpha, beta)
    state = encode(initial_state(alpha, beta, layout), layout)
    if site is not None:
        state = inject_amplitude_error(state, site, layout.env_labels[0], c0, c1)
    return correction_branches(decode(state, layout), target, layout)


def error_sweep(
    alpha: complex,
    beta: complex,
    c1_weights: Sequence[float] = (0.1, 0.5, 1.0),
    sites: Sequence[str] = SITES,
) -> list[SweepCase]:
    """Every single-site amplitude error at every mixing weight ``|c1|^2``."""
    cases = []
    for site, w in itertools.product(sites, c1_weights):
        c1 = np.sqrt(w)
        c0 = np.sqrt(1.0 - w)
        outcomes = run_pipeline(alpha, beta, site, c0, c1)
        cases.append(SweepCase(site, float(w), tuple(o for o, _ in outcomes)))
    return cases


# -- code-level check ---------------------------------------------------------------


def side_code() -> CodeSpec:
    """The per-side code used above: cavity plus two atoms, ``|000>`` and ``|111>``."""
    return repetition_code(3, d=1)


@dataclass(frozen=True)
class EntanglementCheck:
    s_before: float
    s_after: float
    cross_term: complex
    diagonal_gap: float
    compression_residual: float

    @property
    def preserved(self) -> bool:
        return abs(self.s_after - self.s_before) <= 1e-9


def _compressed_entropy(rho: np.ndarray, support: np.ndarray) -> tuple[float, float]:
    """Entropy of ``rho`` through its restriction to ``span(support)``.

    Returns the entropy and ``max |rho - P rho P|``, the part of ``rho`` the
    compression misses; a nonzero residual falls back to the full spectrum.
    """
    q, _ = np.linalg.qr(support)
    small = q.conj().T @ rho @ q
    residual = float(np.max(np.abs(rho - q @ small @ q.conj().T)))
    if residual > 1e-10:
        return von_neumann_entropy((rho + rho.conj().T) / 2), residual
    return von_neumann_entropy((small + small.conj().T) / 2), residual


def _reduced_first(alpha: complex, beta: complex, k0, k1, l0, l1) -> np.ndarray:
    """``tr_B`` of ``alpha |k0>|l1> + beta |k1>|l0>``.

    The amplitude matrix factors as ``M = K C L^T`` with ``K = [k0 k1]``,
    ``L = [l0 l1]``, so ``M M^dagger = K C (L^T conj(L)) C^dagger K^dagger``.
    """
    k = np.stack([k0, k1], axis=1)
    l = np.stack([l0, l1], axis=1)
    c = np.array([[0, alpha], [beta, 0]], dtype=complex)
    inner = c @ (l.T @ l.conj()) @ c.conj().T
    return (k @ inner) @ k.conj().T


def verify_entanglement_preserved(
    code: CodeSpec,
    errors: tuple[PauliErrorIndex, PauliErrorIndex],
    alpha: complex,
    beta: complex,
) -> EntanglementCheck:
    """Entropy of side A before and after ``E_i (x) E_j`` on the encoded pair.

    The encoded pair is ``alpha |C0>|C1> + beta |C1>|C0>``.  The pair must
    satisfy the general code condition; otherwise a ``PreconditionError``
    names the offending tuple.
    """
    if code.q != 1:
        raise ValidationError("the encoded pair needs a single logical qubit per side")
    norm = np.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    if norm < 1e-12:
        raise ValidationError("alpha and beta are both zero")
    alpha, beta = alpha / norm, beta / norm
    e_i, e_j = errors
    for a, b in ((e_i, e_i), (e_i, e_j), (e_j, e_i), (e_j, e_j)):
        ok, m = tuple_condition(code, a, b)
        if not ok:
            raise PreconditionError(
                f"code condition fails for ({a.label()}, {b.label()}): M = {np.round(m, 12).tolist()}"
            )
    c0, c1 = code.codewords
    a0, a1 = apply_pauli(e_i, c0), apply_pauli(e_i, c1)
    b0, b1 = apply_pauli(e_j, c0), apply_pauli(e_j, c1)
    s_before, _ = _compressed_entropy(_reduced_first(alpha, beta, c0, c1, c0, c1), np.stack([c0, c1], axis=1))
    s_after, residual = _compressed_entropy(_reduced_first(alpha, beta, a0, a1, b0, b1), np.stack([a0, a1], axis=1))
    cross = complex(np.vdot(a0, apply_pauli(e_j, c1)))
    gap = abs(np.vdot(a0, apply_pauli(e_j, c0)) - np.vdot(a1, b1))
    return EntanglementCheck(s_before, s_after, cross, float(gap), residual)
