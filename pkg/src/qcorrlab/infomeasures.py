"""Classical and quantum entropy functionals (natural log, nats).

Relative entropies use the nonnegative convention
``D(p||q) = sum p ln(p/q)`` and ``D(rho||sigma) = Tr rho (ln rho - ln sigma)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .qstate import (
    CompositeSpace,
    DensityMatrix,
    StateVector,
    partial_trace,
    random_density,
    random_pure,
    reduced_density,
    reorder,
    tensor_density,
    density_from_pure,
)

SUPPORT_TOL = 1e-12
SUITE_TOL = 1e-8


@dataclass(frozen=True)
class ProbabilityDistribution:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size == 0:
            raise ValidationError("empty distribution")
        if np.any(w < 0):
            raise ValidationError("negative probability weight")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValidationError(f"weights sum to {w.sum()!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


def _weights(p) -> np.ndarray:
    if isinstance(p, ProbabilityDistribution):
        return p.weights
    return ProbabilityDistribution(p).weights


def _xlogx(w: np.ndarray) -> float:
    w = w[w > 0]
    return float(np.sum(w * np.log(w)))


def shannon_entropy(p) -> float:
    """``H = -sum p ln p`` with ``0 ln 0 = 0``."""
    return max(0.0, -_xlogx(_weights(p)))


def shannon_relative_entropy(p, q) -> float:
    """``sum p ln(p/q)``; ``inf`` when ``p`` has mass where ``q`` has none."""
    pw, qw = _weights(p), _weights(q)
    if pw.shape != qw.shape:
        raise ValidationError(f"length mismatch {pw.shape} vs {qw.shape}")
    mask = pw > 0
    if np.any(qw[mask] == 0):
        return float("inf")
    return max(0.0, float(np.sum(pw[mask] * np.log(pw[mask] / qw[mask]))))


def _joint(joint) -> np.ndarray:
    j = np.array(joint, dtype=float)
    if j.ndim != 2:
        raise ValidationError("joint distribution must be a matrix")
    ProbabilityDistribution(j.ravel())
    return j


def shannon_mutual_information(joint) -> float:
    """``H(rows) + H(cols) - H(joint)`` for a joint probability matrix."""
    j = _joint(joint)
    val = shannon_entropy(j.sum(axis=1)) + shannon_entropy(j.sum(axis=0)) - shannon_entropy(j.ravel())
    return max(0.0, val)


def shannon_mutual_information_relative(joint) -> float:
    """Same quantity as a relative entropy to the product of the marginals."""
    j = _joint(joint)
    prod = np.outer(j.sum(axis=1), j.sum(axis=0))
    return shannon_relative_entropy(j.ravel(), prod.ravel())


def _spectrum(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.eigenvalues()
    return np.clip(np.linalg.eigvalsh(np.asarray(rho)), 0.0, None)


def von_neumann_entropy(rho) -> float:
    """``S = -Tr rho ln rho`` from the Hermitian eigenvalues."""
    return max(0.0, -_xlogx(_spectrum(rho)))


def vn_relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """``Tr rho (ln rho - ln sigma)`` or ``inf`` if supp rho is not in supp sigma."""
    a = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    b = sigma.matrix if isinstance(sigma, DensityMatrix) else np.asarray(sigma)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch {a.shape} vs {b.shape}")
    lam, u = np.linalg.eigh(a)
    mu, v = np.linalg.eigh(b)
    lam = np.clip(lam, 0.0, None)
    overlap = np.abs(u.conj().T @ v) ** 2  # |<a_i|b_j>|^2
    weight_on_b = lam @ overlap  # mass of rho along each eigvector of sigma
    null = mu <= SUPPORT_TOL
    if np.any(weight_on_b[null] > SUPPORT_TOL):
        return float("inf")
    cross = float(np.sum(weight_on_b[~null] * np.log(mu[~null])))
    return max(0.0, _xlogx(lam) - cross)


def _check_cut(space: CompositeSpace, side_a: Sequence[str], side_b: Sequence[str] | None):
    a = list(side_a)
    b = [lab for lab in space.labels if lab not in a] if side_b is None else list(side_b)
    for lab in a + b:
        space.index(lab)
    if not a or not b:
        raise ValidationError("both sides of the cut must be nonempty")
    if set(a) & set(b):
        raise ValidationError(f"sides overlap: {set(a) & set(b)}")
    if set(a) | set(b) != set(space.labels):
        raise ValidationError("the cut must partition every label of the space")
    return a, b


def vn_mutual_information(
    rho: DensityMatrix, side_a: Sequence[str], side_b: Sequence[str] | None = None
) -> float:
    """``S(rho_A) + S(rho_B) - S(rho_AB)`` across the given bipartition."""
    a, b = _check_cut(rho.space, side_a, side_b)
    val = (
        von_neumann_entropy(partial_trace(rho, a))
        + von_neumann_entropy(partial_trace(rho, b))
        - von_neumann_entropy(rho)
    )
    return max(0.0, val)


def vn_mutual_information_relative(
    rho: DensityMatrix, side_a: Sequence[str], side_b: Sequence[str] | None = None
) -> float:
    """Mutual information as ``D(rho_AB || rho_A (x) rho_B)``."""
    a, b = _check_cut(rho.space, side_a, side_b)
    ra, rb = partial_trace(rho, a), partial_trace(rho, b)
    joint = reorder(rho, list(ra.space.labels) + list(rb.space.labels))
    return vn_relative_entropy(joint, tensor_density([ra, rb]))


def pure_mutual_information(psi: StateVector, side_a: Sequence[str]) -> float:
    """Mutual information of a pure state, ``S(rho_A) + S(rho_B)``.

    Avoids forming the full projector, which matters for large registers.
    """
    a, b = _check_cut(psi.space, side_a, None)
    return von_neumann_entropy(reduced_density(psi, a)) + von_neumann_entropy(reduced_density(psi, b))


@dataclass
class PropertyCheck:
    name: str
    trials: int = 0
    violations: int = 0
    min_slack: float = float("inf")
    certificates: list = field(default_factory=list)

    def record(self, trial: int, seed, slack: float, tol: float = SUITE_TOL):
        self.trials += 1
        self.min_slack = min(self.min_slack, slack)
        if slack < -tol:
            self.violations += 1
            self.certificates.append({"trial": trial, "seed": seed, "slack": slack})


@dataclass
class EntropySuiteReport:
    seed: int
    trials: int
    checks: dict[str, PropertyCheck]

    @property
    def violations(self) -> int:
        return sum(c.violations for c in self.checks.values())

    def as_records(self) -> list[dict]:
        return [
            {"property": c.name, "trials": c.trials, "violations": c.violations, "min_slack": c.min_slack}
            for c in self.checks.values()
        ]


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Per-trial generator; results do not depend on execution order."""
    return np.random.default_rng([seed, trial])


def entropy_property_suite(seed: int, trials: int, dims: tuple[int, int, int] = (2, 2, 2)) -> EntropySuiteReport:
    """Randomized check of additivity, concavity, subadditivity and Araki-Lieb.

    Slack is defined so that a satisfied inequality has slack >= 0; additivity
    is an equality and records ``-|residual|``.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    names = ["additivity", "concavity", "strong_subadditivity", "weak_subadditivity", "araki_lieb"]
    checks = {n: PropertyCheck(n) for n in names}
    da, db, dc = dims
    abc = CompositeSpace((("A", da), ("B", db), ("C", dc)))
    for k in range(trials):
        rng = trial_rng(seed, k)
        ra = random_density(abc.subspace(["A"]), rng)
        rb = random_density(abc.subspace(["B"]), rng)
        s_prod = von_neumann_entropy(tensor_density([ra, rb]))
        checks["additivity"].record(
            k, seed, -abs(s_prod - von_neumann_entropy(ra) - von_neumann_entropy(rb))
        )

        m = int(rng.integers(2, 5))
        lam = rng.dirichlet(np.ones(m))
        parts = [
            random_density(abc, rng) if rng.random() < 0.5 else density_from_pure(random_pure(abc, rng))
            for _ in range(m)
        ]
        mix = DensityMatrix(sum(w * p.matrix for w, p in zip(lam, parts)), abc)
        checks["concavity"].record(
            k, seed, von_neumann_entropy(mix) - sum(w * von_neumann_entropy(p) for w, p in zip(lam, parts))
        )

        rho = random_density(abc, rng) if k % 2 else density_from_pure(random_pure(abc, rng))
        s = {
            key: von_neumann_entropy(partial_trace(rho, list(key)))
            for key in ["ABC", "AB", "BC", "B", "A"]
        }
        checks["strong_subadditivity"].record(k, seed, s["AB"] + s["BC"] - s["ABC"] - s["B"])
        checks["weak_subadditivity"].record(k, seed, s["A"] + s["B"] - s["AB"])
        checks["araki_lieb"].record(k, seed, s["AB"] - abs(s["A"] - s["B"]))
    return EntropySuiteReport(seed=seed, trials=trials, checks=checks)
