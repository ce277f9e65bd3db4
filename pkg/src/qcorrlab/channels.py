"""Kraus channels, their Stinespring origin, and local-operation trials.

A channel acts on a labeled subset of a state's factors and as the
identity on the rest.  The trial functions return the raw numbers; the
``*_suite`` functions drive them over seeded random instances and collect
violations with enough context to reproduce them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import LabelError, ValidationError
from .infomeasures import trial_rng, von_neumann_entropy, vn_mutual_information
from .qstate import (
    CompositeSpace,
    DensityMatrix,
    StateVector,
    apply_operator,
    apply_unitary,
    check_unitary,
    partial_trace,
    random_density,
    random_unitary,
    tensor_density,
    density_from_pure,
)

COMPLETENESS_TOL = 1e-9
INVARIANCE_TOL = 1e-10
MONOTONE_TOL = 1e-8


@dataclass(frozen=True)
class KrausChannel:
    operators: tuple[np.ndarray, ...]
    target: tuple[str, ...]
    source_dim: int

    def __post_init__(self):
        ops = []
        for a in self.operators:
            a = np.array(a, dtype=complex)
            a.setflags(write=False)
            ops.append(a)
        if not ops:
            raise ValidationError("a channel needs at least one operator")
        d = int(self.source_dim)
        for a in ops:
            if a.shape != (d, d):
                raise ValidationError(f"operator shape {a.shape}, expected {(d, d)}")
        dev = self.completeness_deviation_of(ops)
        if dev > COMPLETENESS_TOL:
            raise ValidationError(f"operators are not complete (deviation {dev:.3e})")
        object.__setattr__(self, "operators", tuple(ops))
        object.__setattr__(self, "target", tuple(self.target))
        object.__setattr__(self, "source_dim", d)

    @staticmethod
    def completeness_deviation_of(ops) -> float:
        d = ops[0].shape[0]
        total = sum(a.conj().T @ a for a in ops)
        return float(np.max(np.abs(total - np.eye(d))))

    def completeness_deviation(self) -> float:
        return self.completeness_deviation_of(self.operators)

    @classmethod
    def identity(cls, target: Sequence[str], dim: int) -> "KrausChannel":
        return cls((np.eye(dim),), tuple(target), dim)

    @classmethod
    def unitary(cls, u: np.ndarray, target: Sequence[str]) -> "KrausChannel":
        u = check_unitary(u)
        return cls((u,), tuple(target), u.shape[0])

    def to_dict(self) -> dict:
        return {
            "target": list(self.target),
            "operators": [[[[z.real, z.imag] for z in row] for row in a] for a in self.operators],
        }


def _as_vector(v) -> np.ndarray:
    if isinstance(v, StateVector):
        return v.amplitudes
    return np.asarray(v, dtype=complex).ravel()


def kraus_from_unitary(
    u_se: np.ndarray,
    env_init,
    env_basis=None,
    *,
    target: Sequence[str],
) -> KrausChannel:
    """Operators ``A_i = <phi_i|_E U_SE |psi>_E`` of a system+environment unitary.

    ``u_se`` acts on system (x) environment, system first.  ``env_basis`` is a
    sequence of orthonormal environment vectors (or a matrix whose columns
    are); the computational basis is used when omitted.
    """
    u = check_unitary(u_se)
    psi = _as_vector(env_init)
    de = psi.shape[0]
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise ValidationError("environment initial state is not normalized")
    if u.shape[0] % de:
        raise ValidationError(f"unitary dimension {u.shape[0]} is not divisible by {de}")
    ds = u.shape[0] // de
    if env_basis is None:
        basis = np.eye(de, dtype=complex)
    elif isinstance(env_basis, np.ndarray) and env_basis.ndim == 2:
        basis = env_basis.astype(complex)
    else:
        basis = np.column_stack([_as_vector(b) for b in env_basis])
    if basis.shape != (de, de):
        raise ValidationError(f"environment basis has shape {basis.shape}, expected {(de, de)}")
    if np.max(np.abs(basis.conj().T @ basis - np.eye(de))) > 1e-9:
        raise ValidationError("environment basis is not orthonormal")
    t = u.reshape(ds, de, ds, de)
    ops = np.einsum("ei,aebf,f->iab", basis.conj(), t, psi)
    return KrausChannel(tuple(ops), tuple(target), ds)


def _check_targets(rho: DensityMatrix, ch: KrausChannel):
    for lab in ch.target:
        if lab not in rho.space.labels:
            raise LabelError(f"channel target {lab!r} not in {rho.space.labels}")
    if rho.space.dim_of(ch.target) != ch.source_dim:
        raise ValidationError("channel dimension does not match its targets")


def apply_channel(rho: DensityMatrix, ch: KrausChannel) -> DensityMatrix:
    """``sum_i (A_i (x) I) rho (A_i (x) I)^dagger``."""
    _check_targets(rho, ch)
    out = sum(apply_operator(rho, a, ch.target) for a in ch.operators)
    return DensityMatrix((out + out.conj().T) / 2, rho.space)


def dilation_output(rho: DensityMatrix, u_se: np.ndarray, env_init, target: Sequence[str]) -> DensityMatrix:
    """``Tr_E[U (rho (x) |psi_E><psi_E|) U^dagger]`` computed explicitly."""
    psi = _as_vector(env_init)
    env_space = CompositeSpace((("__env__", psi.shape[0]),))
    env = density_from_pure(StateVector(psi, env_space))
    big = tensor_density([rho, env])
    big = apply_unitary(big, u_se, list(target) + ["__env__"])
    return partial_trace(big, rho.space.labels)


def _other_side(space: CompositeSpace, target: Sequence[str]) -> list[str]:
    rest = [lab for lab in space.labels if lab not in target]
    if not rest:
        raise ValidationError("the channel acts on every subsystem; no spectator side")
    return rest


def reduced_invariance_trial(rho: DensityMatrix, ch: KrausChannel) -> float:
    """Max-entry change of the spectator's reduced state under ``ch``."""
    rest = _other_side(rho.space, ch.target)
    before = partial_trace(rho, rest).matrix
    after = partial_trace(apply_channel(rho, ch), rest).matrix
    return float(np.max(np.abs(after - before)))


def monotonicity_trial(rho: DensityMatrix, ch: KrausChannel) -> tuple[float, float]:
    """Mutual information across (channel side | rest) before and after."""
    _check_targets(rho, ch)
    side = list(ch.target)
    _other_side(rho.space, side)
    before = vn_mutual_information(rho, side)
    after = vn_mutual_information(apply_channel(rho, ch), side)
    return before, after


@dataclass(frozen=True)
class DilationResult:
    i_before: float
    i_after: float
    ssa_slack: float
    spectator_entropy_change: float
    total_entropy_change: float


def dilation_trial(rho: DensityMatrix, u_se: np.ndarray, env_init, target: Sequence[str]) -> DilationResult:
    """Three-party picture: spectator, interacting side, explicit environment C.

    Strong subadditivity is evaluated on the joint state at the final time
    with the spectator in the role of the untouched party and the target
    side as the middle system.  Returns the bookkeeping identities used to
    chain it into the mutual-information inequality.
    """
    target = list(target)
    rest = _other_side(rho.space, target)
    psi = _as_vector(env_init)
    env_space = CompositeSpace((("__env__", psi.shape[0]),))
    env = density_from_pure(StateVector(psi, env_space))
    t0 = tensor_density([rho, env])
    t1 = apply_unitary(t0, u_se, target + ["__env__"])

    def s(state, labels):
        return von_neumann_entropy(partial_trace(state, labels))

    every = list(rho.space.labels) + ["__env__"]
    slack = (
        s(t1, rest + target) + s(t1, target + ["__env__"]) - s(t1, every) - s(t1, target)
    )
    after = partial_trace(t1, rho.space.labels)
    return DilationResult(
        i_before=vn_mutual_information(rho, target),
        i_after=vn_mutual_information(after, target),
        ssa_slack=slack,
        spectator_entropy_change=abs(s(t1, rest) - s(t0, rest)),
        total_entropy_change=abs(s(t1, every) - s(t0, every)),
    )


def _diagonal(m) -> np.ndarray:
    m = m.matrix if isinstance(m, DensityMatrix) else np.asarray(m)
    return np.clip(np.real(np.diag(m)), 0.0, None)


def _diag_divergence(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0
    if np.any(q[mask] <= 0):
        return float("inf")
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def classical_contraction_trial(rho: DensityMatrix, ref: DensityMatrix, ch: KrausChannel) -> tuple[float, float]:
    """Divergence of diagonal distributions before and after the channel.

    Returns ``(D_before, D_after)`` where ``D = sum_i rho_ii ln(rho_ii / a_ii)``
    in the computational product basis and the reference is transported by
    the same channel.  Contraction is guaranteed when the channel moves the
    diagonal by a stochastic matrix (see :func:`acts_classically`); for
    channels that convert coherences into populations it can fail.
    """
    if rho.space.dim != ref.space.dim:
        raise ValidationError("state and reference differ in dimension")
    before = _diag_divergence(_diagonal(rho), _diagonal(ref))
    after = _diag_divergence(_diagonal(apply_channel(rho, ch)), _diagonal(apply_channel(ref, ch)))
    return before, after


def acts_classically(ch: KrausChannel, tol: float = 1e-12) -> bool:
    """True when each Kraus operator has at most one nonzero entry per row.

    Then output populations depend on input populations only, through a
    stochastic matrix.
    """
    return all(np.all(np.sum(np.abs(a) > tol, axis=1) <= 1) for a in ch.operators)


def random_channel(target: Sequence[str], dim: int, rng: np.random.Generator, env_dim: int | None = None) -> KrausChannel:
    """Channel from a Haar unitary on system (x) environment, environment in |0>."""
    if env_dim is None:
        env_dim = int(rng.integers(2, 5))
    u = random_unitary(dim * env_dim, rng)
    env = np.zeros(env_dim, dtype=complex)
    env[0] = 1.0
    return kraus_from_unitary(u, env, target=target)


def random_classical_channel(target: Sequence[str], dim: int, rng: np.random.Generator) -> KrausChannel:
    """Channel ``K_ij = sqrt(T_ij) e^{i phi_ij} |i><j|`` for a random column-stochastic ``T``."""
    t = rng.dirichlet(np.ones(dim), size=dim).T  # column j is the law of j -> i
    phases = np.exp(2j * np.pi * rng.random((dim, dim)))
    ops = []
    for i in range(dim):
        for j in range(dim):
            a = np.zeros((dim, dim), dtype=complex)
            a[i, j] = np.sqrt(t[i, j]) * phases[i, j]
            ops.append(a)
    return KrausChannel(tuple(ops), tuple(target), dim)


@dataclass
class SuiteReport:
    name: str
    seed: int
    trials: int
    records: list[dict] = field(default_factory=list)
    violations: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def _bipartite(dims: tuple[int, int]) -> CompositeSpace:
    return CompositeSpace((("A", dims[0]), ("B", dims[1])))


def monotonicity_suite(seed: int, trials: int, dims: tuple[int, int] = (2, 2)) -> SuiteReport:
    """Random local channels on A: mutual information, spectator invariance, dilation agreement."""
    space = _bipartite(dims)
    report = SuiteReport("monotonicity", seed, trials)
    for k in range(trials):
        rng = trial_rng(seed, k)
        rho = random_density(space, rng)
        env_dim = int(rng.integers(2, 5))
        u = random_unitary(dims[0] * env_dim, rng)
        env = np.zeros(env_dim, dtype=complex)
        env[0] = 1.0
        ch = kraus_from_unitary(u, env, target=["A"])
        i_before, i_after = monotonicity_trial(rho, ch)
        invariance = reduced_invariance_trial(rho, ch)
        dil = dilation_output(rho, u, env, ["A"])
        agreement = float(np.max(np.abs(dil.matrix - apply_channel(rho, ch).matrix)))
        rec = {
            "trial": k,
            "i_before": i_before,
            "i_after": i_after,
            "spectator_deviation": invariance,
            "dilation_deviation": agreement,
        }
        report.records.append(rec)
        if i_after > i_before + MONOTONE_TOL or invariance > INVARIANCE_TOL or agreement > INVARIANCE_TOL:
            report.violations.append(
                dict(rec, seed=seed, state=_matrix_repr(rho.matrix), channel=ch.to_dict())
            )
    return report


def contraction_suite(seed: int, trials: int, dims: tuple[int, int] = (2, 2)) -> SuiteReport:
    """Diagonal-divergence contraction with the product of marginals as reference.

    Channels are local on A and act classically on populations.
    """
    space = _bipartite(dims)
    report = SuiteReport("contraction", seed, trials)
    for k in range(trials):
        rng = trial_rng(seed, k)
        rho = random_density(space, rng)
        ref = tensor_density([partial_trace(rho, ["A"]), partial_trace(rho, ["B"])])
        ch = random_classical_channel(["A"], dims[0], rng)
        before, after = classical_contraction_trial(rho, ref, ch)
        rec = {"trial": k, "d_before": before, "d_after": after}
        report.records.append(rec)
        if after > before + MONOTONE_TOL:
            report.violations.append(
                dict(rec, seed=seed, state=_matrix_repr(rho.matrix), channel=ch.to_dict())
            )
    return report


def _matrix_repr(m: np.ndarray) -> list:
    return [[[z.real, z.imag] for z in row] for row in np.asarray(m)]
