"""Dense state-vector / density-matrix engine over labeled tensor factors.

Basis ordering is row-major Kronecker: the leftmost factor is the most
significant digit of a flat index.  All objects are immutable; every
operation returns a new object.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import LabelError, ValidationError

VALIDATION_TOL = 1e-9
IDENTITY_TOL = 1e-12
ZERO_PROB = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CompositeSpace:
    """Ordered factorization of a Hilbert space into labeled subsystems."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(lab), int(d)) for lab, d in self.factors)
        if not factors:
            raise ValidationError("a space needs at least one factor")
        labels = [lab for lab, _ in factors]
        if len(set(labels)) != len(labels):
            raise LabelError(f"duplicate labels in {labels}")
        for lab, d in factors:
            if d < 2:
                raise ValidationError(f"factor {lab!r} has dimension {d} < 2")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, **dims: int) -> "CompositeSpace":
        return cls(tuple(dims.items()))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LabelError(f"unknown label {label!r}; space has {self.labels}") from None

    def indices(self, labels: Iterable[str]) -> list[int]:
        return [self.index(lab) for lab in labels]

    def dim_of(self, labels: Iterable[str]) -> int:
        return int(np.prod([self.dims[i] for i in self.indices(labels)]))

    def subspace(self, labels: Iterable[str]) -> "CompositeSpace":
        """Sub-factorization for ``labels``, kept in this space's order."""
        wanted = set(labels)
        for lab in wanted:
            self.index(lab)
        return CompositeSpace(tuple(f for f in self.factors if f[0] in wanted))

    def concat(self, other: "CompositeSpace") -> "CompositeSpace":
        return CompositeSpace(self.factors + other.factors)


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    space: CompositeSpace

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.shape[0] != self.space.dim:
            raise ValidationError(
                f"{amps.shape[0]} amplitudes for a space of dimension {self.space.dim}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > VALIDATION_TOL:
            raise ValidationError(f"state norm {norm!r} differs from 1")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes, space: CompositeSpace) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm < ZERO_PROB:
            raise ValidationError("cannot normalize a zero vector")
        return cls(amps / norm, space)

    @classmethod
    def basis(cls, space: CompositeSpace, digits: Sequence[int]) -> "StateVector":
        """Computational basis ket with one digit per factor."""
        amps = np.zeros(space.dim, dtype=complex)
        amps[np.ravel_multi_index(tuple(digits), space.dims)] = 1.0
        return cls(amps, space)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.space.dims)

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    space: CompositeSpace

    def __post_init__(self):
        m = _frozen(self.matrix)
        d = self.space.dim
        if m.shape != (d, d):
            raise ValidationError(f"matrix shape {m.shape} does not match dimension {d}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > VALIDATION_TOL:
            raise ValidationError(f"matrix is not Hermitian (deviation {herm:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > VALIDATION_TOL:
            raise ValidationError(f"trace {tr!r} differs from 1")
        low = np.linalg.eigvalsh(m).min()
        if low < -VALIDATION_TOL:
            raise ValidationError(f"negative eigenvalue {low:.3e}")
        object.__setattr__(self, "matrix", m)

    def eigenvalues(self) -> np.ndarray:
        """Spectrum in ascending order, drift below zero clamped to 0."""
        w = np.linalg.eigvalsh(self.matrix)
        return np.clip(w, 0.0, None)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def tensor(parts: Sequence[StateVector]) -> StateVector:
    """Kronecker product of states; factor lists are concatenated."""
    if not parts:
        raise ValidationError("tensor of an empty sequence")
    amps = parts[0].amplitudes
    space = parts[0].space
    for p in parts[1:]:
        amps = np.kron(amps, p.amplitudes)
        space = space.concat(p.space)
    return StateVector(amps, space)


def tensor_density(parts: Sequence[DensityMatrix]) -> DensityMatrix:
    if not parts:
        raise ValidationError("tensor of an empty sequence")
    m = parts[0].matrix
    space = parts[0].space
    for p in parts[1:]:
        m = np.kron(m, p.matrix)
        space = space.concat(p.space)
    return DensityMatrix(m, space)


def density_from_pure(psi: StateVector) -> DensityMatrix:
    a = psi.amplitudes
    return DensityMatrix(np.outer(a, a.conj()), psi.space)


def _trace_letters(n: int) -> tuple[list[str], list[str]]:
    import string

    letters = string.ascii_letters
    if 2 * n > len(letters):
        raise ValidationError(f"too many factors ({n}) for einsum partial trace")
    return list(letters[:n]), list(letters[n : 2 * n])


def partial_trace(rho: DensityMatrix, keep: Iterable[str]) -> DensityMatrix:
    """Trace out every factor not listed in ``keep``.

    The kept factors stay in the order of ``rho.space``.
    """
    keep = set(keep)
    if not keep:
        raise LabelError("keep must name at least one subsystem")
    space = rho.space
    keep_idx = sorted(space.indices(keep))
    if len(keep_idx) == len(space.factors):
        return rho
    n = len(space.factors)
    rows, cols = _trace_letters(n)
    for i in range(n):
        if i not in keep_idx:
            cols[i] = rows[i]
    out = "".join(rows[i] for i in keep_idx) + "".join(cols[i] for i in keep_idx)
    t = rho.matrix.reshape(space.dims + space.dims)
    red = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    sub = space.subspace(keep)
    d = sub.dim
    red = red.reshape(d, d)
    return DensityMatrix((red + red.conj().T) / 2, sub)


def reduced_density(psi: StateVector, keep: Iterable[str]) -> DensityMatrix:
    """Reduced state of a pure state without forming the full projector."""
    keep = set(keep)
    if not keep:
        raise LabelError("keep must name at least one subsystem")
    space = psi.space
    keep_idx = sorted(space.indices(keep))
    rest = [i for i in range(len(space.factors)) if i not in keep_idx]
    sub = space.subspace(keep)
    m = np.transpose(psi.tensor(), keep_idx + rest).reshape(sub.dim, -1)
    red = m @ m.conj().T
    return DensityMatrix((red + red.conj().T) / 2, sub)


def reorder(rho: DensityMatrix, labels: Sequence[str]) -> DensityMatrix:
    """Permute the factors of ``rho`` into the order given by ``labels``."""
    space = rho.space
    perm = space.indices(labels)
    if sorted(perm) != list(range(len(space.factors))):
        raise LabelError(f"{list(labels)} is not a permutation of {space.labels}")
    n = len(perm)
    t = rho.matrix.reshape(space.dims + space.dims)
    t = np.transpose(t, perm + [p + n for p in perm])
    new = CompositeSpace(tuple(space.factors[p] for p in perm))
    return DensityMatrix(t.reshape(new.dim, new.dim), new)


def apply_local(tensor_: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract ``op`` into the given axes of a ket-like tensor.

    ``op`` must be square with dimension equal to the product of the axis
    sizes; axis order inside ``op`` follows ``axes``.
    """
    axes = list(axes)
    shape = tensor_.shape
    sub = [shape[a] for a in axes]
    k = len(axes)
    t = np.moveaxis(tensor_, axes, list(range(k)))
    moved_shape = t.shape
    t = op @ t.reshape(int(np.prod(sub)), -1)
    t = t.reshape(moved_shape)
    return np.moveaxis(t, list(range(k)), axes)


def check_unitary(u: np.ndarray, tol: float = VALIDATION_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValidationError(f"unitary must be square, got shape {u.shape}")
    dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if dev > tol:
        raise ValidationError(f"matrix is not unitary (deviation {dev:.3e})")
    return u


def apply_operator(state, op: np.ndarray, targets: Sequence[str]):
    """Apply an arbitrary square operator on ``targets`` (no validation of ``op``).

    For a :class:`StateVector` the raw vector ``op|psi>`` is returned as an
    ndarray since it need not be normalized; for a density matrix the raw
    ``op rho op^dagger`` array is returned.
    """
    space = state.space
    axes = space.indices(targets)
    op = np.asarray(op, dtype=complex)
    if op.shape != (space.dim_of(targets),) * 2:
        raise ValidationError(
            f"operator shape {op.shape} does not match targets {list(targets)}"
        )
    if isinstance(state, StateVector):
        return apply_local(state.tensor(), op, axes).reshape(-1)
    n = len(space.factors)
    t = state.matrix.reshape(space.dims + space.dims)
    t = apply_local(t, op, axes)
    t = apply_local(t, op.conj(), [a + n for a in axes])
    return t.reshape(space.dim, space.dim)


def apply_unitary(state, u: np.ndarray, targets: Sequence[str]):
    """Apply unitary ``u`` on ``targets`` and identity elsewhere."""
    u = check_unitary(u)
    out = apply_operator(state, u, targets)
    if isinstance(state, StateVector):
        return StateVector(out, state.space)
    return DensityMatrix((out + out.conj().T) / 2, state.space)


def _embed_projectors(projectors, space, targets):
    ps = [np.asarray(p, dtype=complex) for p in projectors]
    if not ps:
        raise ValidationError("empty projector set")
    d = space.dim if targets is None else space.dim_of(targets)
    for p in ps:
        if p.shape != (d, d):
            raise ValidationError(f"projector shape {p.shape}, expected {(d, d)}")
    if all(np.max(np.abs(p)) < ZERO_PROB for p in ps):
        raise ValidationError("all projectors vanish")
    total = sum(ps)
    if np.max(np.abs(total - np.eye(d))) > VALIDATION_TOL:
        raise ValidationError("projectors do not sum to the identity")
    for i, p in enumerate(ps):
        if np.max(np.abs(p @ p - p)) > VALIDATION_TOL:
            raise ValidationError(f"operator {i} is not idempotent")
        for q in ps[i + 1 :]:
            if np.max(np.abs(p @ q)) > VALIDATION_TOL:
                raise ValidationError("projectors are not mutually orthogonal")
    return ps


def measurement_branches(
    state: StateVector, projectors, targets: Sequence[str] | None = None
) -> list[tuple[float, StateVector | None]]:
    """All outcomes of a projective measurement, as ``(probability, collapsed)``.

    Branches with probability below 1e-12 carry ``None`` instead of a state.
    """
    ps = _embed_projectors(projectors, state.space, targets)
    out = []
    for p in ps:
        if targets is None:
            v = p @ state.amplitudes
        else:
            v = apply_operator(state, p, targets)
        prob = float(np.vdot(v, v).real)
        if prob < ZERO_PROB:
            out.append((prob, None))
        else:
            out.append((prob, StateVector(v / np.sqrt(prob), state.space)))
    total = sum(pr for pr, _ in out)
    if abs(total - 1.0) > VALIDATION_TOL:
        raise ValidationError(f"branch probabilities sum to {total!r}")
    return out


def projective_measure(
    state: StateVector,
    projectors,
    rng: np.random.Generator,
    targets: Sequence[str] | None = None,
) -> tuple[int, StateVector, float]:
    """Sample one outcome; returns ``(index, collapsed state, probability)``."""
    branches = measurement_branches(state, projectors, targets)
    probs = np.array([pr if s is not None else 0.0 for pr, s in branches])
    k = int(rng.choice(len(branches), p=probs / probs.sum()))
    prob, collapsed = branches[k]
    return k, collapsed, prob


def basis_projectors(dim: int) -> list[np.ndarray]:
    eye = np.eye(dim, dtype=complex)
    return [np.outer(eye[k], eye[k]) for k in range(dim)]


def random_pure(space: CompositeSpace, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    v = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    return StateVector(v / np.linalg.norm(v), space)


def random_density(space: CompositeSpace, rng: np.random.Generator) -> DensityMatrix:
    """Full-rank random state ``G G^dagger / Tr(G G^dagger)``."""
    d = space.dim
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    return DensityMatrix((m + m.conj().T) / 2, space)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary from the QR decomposition of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases
