"""Jaynes-Cummings simulation of local feedback on two entangled cavities.

Atoms are sent through cavity ``A`` only.  The field starts in
``alpha|n>_A|m>_B + beta|n'>_A|m'>_B``; each atom interacts for a time
tuned so that detecting it in ``|e>`` leaves the two field branches with
equal weight (a maximally entangled field), otherwise the ground-branch
field is fed to the next atom.

Conventions:

* atom basis ``|g> = 0``, ``|e> = 1``;
* Rabi frequency of the ``|e,k> <-> |g,k+1>`` doublet is ``R_k = R0 sqrt(k+1)``;
* ``a_k(t) = cos(R_k t / 2)``, ``b_k(t) = -i sin(R_k t / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateBranchError, SolverError, TruncationError, ValidationError
from .infomeasures import (
    pure_mutual_information,
    von_neumann_entropy,
    vn_mutual_information,
)
from .qstate import (
    CompositeSpace,
    DensityMatrix,
    StateVector,
    apply_unitary,
    basis_projectors,
    measurement_branches,
    reduced_density,
    tensor,
)

ROOT_TOL = 1e-12
GUARD_TOL = 1e-12
DISENTANGLED_WEIGHT = 1e-14

GROUND, EXCITED = 0, 1


@dataclass(frozen=True)
class JcCoefficients:
    a: complex
    b: complex

    def __post_init__(self):
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > 1e-12:
            raise ValidationError(f"|a|^2 + |b|^2 != 1 for {self!r}")


def rabi_frequency(n: int, r0: float) -> float:
    return r0 * math.sqrt(n + 1)


def jc_coefficients(n: int, t: float, r0: float) -> JcCoefficients:
    if n < 0 or t < 0:
        raise ValidationError("Fock level and time must be nonnegative")
    phase = rabi_frequency(n, r0) * t / 2
    return JcCoefficients(complex(math.cos(phase)), -1j * math.sin(phase))


def block_unitary(cutoff: int, coeffs: Callable[[int], JcCoefficients]) -> np.ndarray:
    """Unitary on cavity (x) atom built from one 2x2 rotation per doublet.

    The doublet ``{|e,k>, |g,k+1>}`` evolves as ``[[a_k, b_k], [b_k, a_k]]``
    for ``k < cutoff - 1``.  ``|g,0>`` and the top state ``|e,cutoff-1>``
    are left unchanged.
    """
    dim = 2 * cutoff
    u = np.zeros((dim, dim), dtype=complex)
    u[0, 0] = 1.0  # |g,0>
    top = 2 * (cutoff - 1) + EXCITED
    u[top, top] = 1.0
    for k in range(cutoff - 1):
        c = coeffs(k)
        e_k = 2 * k + EXCITED
        g_k1 = 2 * (k + 1) + GROUND
        u[e_k, e_k] = c.a
        u[g_k1, e_k] = c.b
        u[e_k, g_k1] = c.b
        u[g_k1, g_k1] = c.a
    return u


def jc_unitary(space: CompositeSpace, cavity: str, atom: str, t: float, r0: float) -> np.ndarray:
    """Resonant JC evolution on ``cavity (x) atom`` (in that order) for time ``t``."""
    if space.dims[space.index(atom)] != 2:
        raise ValidationError(f"atom factor {atom!r} must be two-dimensional")
    cutoff = space.dims[space.index(cavity)]
    return block_unitary(cutoff, lambda k: jc_coefficients(k, t, r0))


def top_level_population(state: StateVector, cavity: str, atom: str) -> float:
    space = state.space
    ic, ia = space.index(cavity), space.index(atom)
    t = np.moveaxis(state.tensor(), [ic, ia], [0, 1])
    return float(np.sum(np.abs(t[-1, EXCITED]) ** 2))


def apply_block(state: StateVector, u: np.ndarray, cavity: str, atom: str) -> StateVector:
    """Apply a cavity-atom block unitary after checking the truncation guard."""
    pop = top_level_population(state, cavity, atom)
    if pop > GUARD_TOL:
        raise TruncationError(
            f"population {pop:.3e} in |e, top Fock level> of {cavity!r}; raise the cutoff"
        )
    return apply_unitary(state, u, [cavity, atom])


def apply_jc(state: StateVector, cavity: str, atom: str, t: float, r0: float) -> StateVector:
    return apply_block(state, jc_unitary(state.space, cavity, atom, t, r0), cavity, atom)


# -- interaction-time solvers ------------------------------------------------


def _scan_step(n: int, n_prime: int, r0: float) -> float:
    return math.pi / (50 * r0 * math.sqrt(max(n, n_prime) + 1))


def _scan_window(n: int, n_prime: int, r0: float) -> float:
    beat = 4 * math.pi / abs(rabi_frequency(n, r0) - rabi_frequency(n_prime, r0))
    return 4 * beat


def _bisect(f: Callable[[float], float], lo: float, hi: float, f_lo: float) -> float:
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, hi):
            break
    return lo if abs(f(lo)) <= abs(f(hi)) else hi


def first_positive_root(f: Callable[[float], float], step: float, window: float) -> float:
    """Smallest ``t > 0`` with ``f(t) = 0``, by grid scan then bisection.

    The scan starts at the first grid point so that a root at ``t = 0`` is
    never reported.
    """
    t_lo = step
    f_lo = f(t_lo)
    while t_lo < window:
        if abs(f_lo) < ROOT_TOL:
            return t_lo
        t_hi = t_lo + step
        f_hi = f(t_hi)
        if (f_lo > 0) != (f_hi > 0):
            return _bisect(f, t_lo, t_hi, f_lo)
        t_lo, f_lo = t_hi, f_hi
    raise SolverError(f"no root in (0, {window:.4g}] with step {step:.3g}")


def _check_tuning_inputs(alpha, beta, n, n_prime):
    if n == n_prime:
        raise ValidationError("n == n': the field is not entangled")
    if not abs(alpha) > abs(beta) > 0:
        raise ValidationError("requires |alpha| > |beta| > 0")


def solve_time_excited(alpha: complex, beta: complex, n: int, n_prime: int, r0: float) -> float:
    """Interaction time with ``|alpha| a_n(t) = |beta| a_n'(t)`` (excited atom)."""
    _check_tuning_inputs(alpha, beta, n, n_prime)
    ra, rb = abs(alpha), abs(beta)
    wn, wp = rabi_frequency(n, r0) / 2, rabi_frequency(n_prime, r0) / 2

    def f(t):
        return ra * math.cos(wn * t) - rb * math.cos(wp * t)

    t = first_positive_root(f, _scan_step(n, n_prime, r0), _scan_window(n, n_prime, r0))
    if abs(f(t)) >= ROOT_TOL:
        raise SolverError(f"residual {abs(f(t)):.3e} above tolerance at t={t!r}")
    return t


def solve_time_ground(alpha: complex, beta: complex, n: int, n_prime: int, r0: float) -> float:
    """Interaction time with ``|alpha| |b_n(t)| = |beta| |b_n'(t)|`` (ground atom, raised field).

    The sine factors carry their sign, so the first root after ``t = 0`` is
    the first nontrivial crossing.
    """
    _check_tuning_inputs(alpha, beta, n, n_prime)
    ra, rb = abs(alpha), abs(beta)
    wn, wp = rabi_frequency(n, r0) / 2, rabi_frequency(n_prime, r0) / 2

    def f(t):
        return ra * math.sin(wn * t) - rb * math.sin(wp * t)

    t = first_positive_root(f, _scan_step(n, n_prime, r0), _scan_window(n, n_prime, r0))
    if abs(f(t)) >= ROOT_TOL:
        raise SolverError(f"residual {abs(f(t)):.3e} above tolerance at t={t!r}")
    return t


def update_amplitudes_ground_branch(
    alpha: complex,
    beta: complex,
    coeffs_n: JcCoefficients,
    coeffs_n_prime: JcCoefficients,
    atom: str = "e",
) -> tuple[complex, complex]:
    """Renormalized field amplitudes after detecting the atom in ``|g>``.

    For an excited atom the surviving branch carries the ``b`` factors, for
    a ground atom on the raised field it carries the ``a`` factors.
    """
    if atom == "e":
        x, y = alpha * coeffs_n.b, beta * coeffs_n_prime.b
    elif atom == "g":
        x, y = alpha * coeffs_n.a, beta * coeffs_n_prime.a
    else:
        raise ValidationError(f"atom must be 'e' or 'g', got {atom!r}")
    norm = math.sqrt(abs(x) ** 2 + abs(y) ** 2)
    if norm < 1e-12:
        raise DegenerateBranchError("ground branch has zero weight")
    return x / norm, y / norm


# -- protocol ------------------------------------------------------------------


@dataclass(frozen=True)
class FeedbackConfig:
    n: int
    n_prime: int
    m: int
    m_prime: int
    alpha: complex
    beta: complex
    r0: float = 1.0
    max_atoms: int = 60
    fock_cutoff: int | None = None
    seed: int = 0

    def __post_init__(self):
        for name in ("n", "n_prime", "m", "m_prime"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1.0) > 1e-9:
            raise ValidationError("|alpha|^2 + |beta|^2 must equal 1")
        if not abs(self.alpha) > abs(self.beta):
            raise ValidationError("requires |alpha| > |beta|")
        if self.n == self.n_prime:
            raise ValidationError("n == n': the cavities are not entangled")
        if self.max_atoms < 1:
            raise ValidationError("max_atoms must be >= 1")
        if self.r0 <= 0:
            raise ValidationError("r0 must be positive")
        need = max(self.n, self.n_prime) + self.max_atoms + 1
        if self.fock_cutoff is None:
            object.__setattr__(self, "fock_cutoff", need)
        elif self.fock_cutoff < need:
            raise ValidationError(f"fock_cutoff must be >= {need}")

    @classmethod
    def from_weight(cls, alpha2: float, n: int = 0, n_prime: int = 1, m: int = 1, m_prime: int = 0, **kw):
        """Real amplitudes with ``|alpha|^2 = alpha2``."""
        return cls(n, n_prime, m, m_prime, math.sqrt(alpha2), math.sqrt(1 - alpha2), **kw)

    @property
    def field_space(self) -> CompositeSpace:
        return CompositeSpace((("A", self.fock_cutoff), ("B", max(self.m, self.m_prime, 1) + 1)))

    def initial_field(self) -> StateVector:
        space = self.field_space
        t = np.zeros(space.dims, dtype=complex)
        t[self.n, self.m] += self.alpha
        t[self.n_prime, self.m_prime] += self.beta
        return StateVector(t.ravel(), space)


ATOM_SPACE = CompositeSpace((("atom", 2),))


def atom_state(kind: str) -> StateVector:
    return StateVector.basis(ATOM_SPACE, [EXCITED if kind == "e" else GROUND])


@dataclass(frozen=True)
class StepResult:
    """Both measurement branches of one atom passage."""

    joint: StateVector  # field (x) atom after the interaction
    p_excited: float
    p_ground: float
    field_excited: StateVector | None
    field_ground: StateVector | None
    spectator_deviation: float  # max |rho_B' - rho_B| before selection


def _field_branch(joint: StateVector, outcome: int) -> tuple[float, StateVector | None]:
    t = joint.tensor()[..., outcome]
    prob = float(np.sum(np.abs(t) ** 2))
    if prob < 1e-300:
        return prob, None
    space = joint.space.subspace(["A", "B"])
    return prob, StateVector(t.ravel() / math.sqrt(prob), space)


def atom_passage(field_state: StateVector, kind: str, unitary: np.ndarray) -> StepResult:
    """Send one atom prepared in ``kind`` through cavity A and resolve both outcomes."""
    joint = tensor([field_state, atom_state(kind)])
    joint = apply_block(joint, unitary, "A", "atom")
    before = reduced_density(field_state, ["B"]).matrix
    after = reduced_density(joint, ["B"]).matrix
    deviation = float(np.max(np.abs(after - before)))
    # full projective measurement bookkeeping on the atom
    measurement_branches(joint, basis_projectors(2), ["atom"])
    pg, fg = _field_branch(joint, GROUND)
    pe, fe = _field_branch(joint, EXCITED)
    return StepResult(joint, pe, pg, fe, fg, deviation)


def branch_amplitudes(field_state: StateVector, cfg: FeedbackConfig, raised: bool) -> tuple[complex, complex]:
    shift = 1 if raised else 0
    t = field_state.tensor()
    return complex(t[cfg.n + shift, cfg.m]), complex(t[cfg.n_prime + shift, cfg.m_prime])


def field_mutual_information(field_state: StateVector) -> float:
    return pure_mutual_information(field_state, ["A"])


def tuned_step(field_state: StateVector, cfg: FeedbackConfig, raised: bool) -> tuple[str, float, StepResult]:
    """Choose the atom and its tuned time from the current field, then interact.

    On the base levels ``(n, n')`` an excited atom is used; on the raised
    levels ``(n+1, n'+1)`` a ground atom, which can only remove a photon.
    """
    alpha, beta = branch_amplitudes(field_state, cfg, raised)
    if raised:
        kind, t = "g", solve_time_ground(alpha, beta, cfg.n, cfg.n_prime, cfg.r0)
    else:
        kind, t = "e", solve_time_excited(alpha, beta, cfg.n, cfg.n_prime, cfg.r0)
    u = jc_unitary(field_state.space.concat(ATOM_SPACE), "A", "atom", t, cfg.r0)
    return kind, t, atom_passage(field_state, kind, u)


@dataclass(frozen=True)
class AtomRecord:
    index: int
    atom: str
    time: float
    outcome: str
    probability: float
    p_excited: float
    p_ground: float
    alpha: complex
    beta: complex
    mutual_information: float
    ensemble_mutual_information: float
    spectator_deviation: float


@dataclass
class ProtocolTrace:
    config: FeedbackConfig
    initial_mutual_information: float
    records: list[AtomRecord] = field(default_factory=list)
    status: str = "running"
    final_field: StateVector | None = None


def _is_disentangled(alpha: complex, beta: complex) -> bool:
    return min(abs(alpha) ** 2, abs(beta) ** 2) < DISENTANGLED_WEIGHT


def run_feedback_protocol(cfg: FeedbackConfig, rng: np.random.Generator | None = None) -> ProtocolTrace:
    """Simulate one trajectory of the one-sided feedback protocol.

    Terminal status is ``maximally-entangled`` (an atom was detected in
    ``|e>``), ``disentangled`` (the smaller field weight dropped below
    1e-14) or ``max-atoms-reached``.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    field_state = cfg.initial_field()
    trace = ProtocolTrace(cfg, field_mutual_information(field_state))
    raised = False
    for k in range(cfg.max_atoms):
        try:
            kind, t, step = tuned_step(field_state, cfg, raised)
        except (SolverError, TruncationError) as exc:
            raise type(exc)(f"atom {k}: {exc}") from exc
        i_e = field_mutual_information(step.field_excited) if step.field_excited is not None else 0.0
        i_g = field_mutual_information(step.field_ground) if step.field_ground is not None else 0.0
        ensemble = step.p_excited * i_e + step.p_ground * i_g
        detected = rng.random() < step.p_excited
        if detected:
            field_state, outcome, prob, mi = step.field_excited, "e", step.p_excited, i_e
        else:
            field_state, outcome, prob, mi = step.field_ground, "g", step.p_ground, i_g
        # a detected |e> leaves the field on (n, n'); a |g> on (n+1, n'+1)
        raised = not detected
        alpha, beta = branch_amplitudes(field_state, cfg, raised)
        trace.records.append(
            AtomRecord(k, kind, t, outcome, prob, step.p_excited, step.p_ground,
                       alpha, beta, mi, ensemble, step.spectator_deviation)
        )
        if detected:
            trace.status = "maximally-entangled"
            break
        if _is_disentangled(alpha, beta):
            trace.status = "disentangled"
            break
    else:
        trace.status = "max-atoms-reached"
    trace.final_field = field_state
    return trace


@dataclass(frozen=True)
class SuccessCurve:
    probabilities: tuple[float, ...]  # entry k: success within k+1 atoms
    ground_probabilities: tuple[float, ...]
    limit: float  # 2 |beta|^2

    @property
    def residual(self) -> float:
        return abs(self.probabilities[-1] - self.limit)


def cumulative_success_probability(cfg: FeedbackConfig, n_atoms: int) -> SuccessCurve:
    """``1 - prod_i P_i(g)`` along the all-ground branch, evaluated exactly.

    Once the ground branch is disentangled no later atom can succeed, so the
    remaining entries repeat the last value.
    """
    if n_atoms < 1:
        raise ValidationError("need at least one atom")
    field_state = cfg.initial_field()
    raised = False
    survive = 1.0
    probs, grounds = [], []
    for _ in range(n_atoms):
        alpha, beta = branch_amplitudes(field_state, cfg, raised)
        if _is_disentangled(alpha, beta):
            grounds.append(1.0)
            probs.append(1.0 - survive)
            continue
        _, _, step = tuned_step(field_state, cfg, raised)
        survive *= step.p_ground
        grounds.append(step.p_ground)
        probs.append(1.0 - survive)
        if step.field_ground is None:
            break
        field_state, raised = step.field_ground, True
    while len(probs) < n_atoms:
        grounds.append(1.0)
        probs.append(probs[-1])
    return SuccessCurve(tuple(probs), tuple(grounds), 2 * abs(cfg.beta) ** 2)


def decisive_first_atom(cfg: FeedbackConfig) -> StepResult:
    """First atom with the ideal doublet rotations that settle the outcome at once.

    The ``n'`` doublet is left untouched (``a_n' = 1``) while the ``n``
    doublet has ``|a_n| = |beta / alpha|``; the ground branch is then a
    product state and the excited branch is maximally entangled.
    """
    ratio = abs(cfg.beta) / abs(cfg.alpha)
    ideal = {
        cfg.n: JcCoefficients(complex(ratio), -1j * math.sqrt(1 - ratio**2)),
        cfg.n_prime: JcCoefficients(1.0 + 0j, 0j),
    }
    u = block_unitary(cfg.fock_cutoff, lambda k: ideal.get(k, JcCoefficients(1.0 + 0j, 0j)))
    return atom_passage(cfg.initial_field(), "e", u)


@dataclass(frozen=True)
class ConcavityReport:
    s_initial: float  # S(rho) before the atom
    s_mixture: float  # S(p rho_1' + (1-p) rho_2') after, before selection
    s_excited: float  # S(rho_1')
    s_ground: float  # S(rho_2')
    delta: float  # s_excited - s_initial
    p: float  # probability of detecting |e>

    @property
    def bound(self) -> float:
        return self.p * self.delta / (1 - self.p)

    @property
    def equality_residual(self) -> float:
        return abs(self.s_initial - self.s_mixture)

    @property
    def decrement(self) -> float:
        return self.s_initial - self.s_ground


def concavity_decrement_check(cfg: FeedbackConfig) -> ConcavityReport:
    """Entropy bookkeeping of the tuned first atom.

    The field entanglement of each branch is measured on cavity B, the side
    no atom touches, so the pre-selection mixture equals the initial reduced
    state exactly.
    """
    field0 = cfg.initial_field()
    _, _, step = tuned_step(field0, cfg, raised=False)
    p = step.p_excited
    if step.field_excited is None or step.field_ground is None or p < 1e-12 or p > 1 - 1e-12:
        raise DegenerateBranchError(f"degenerate mixture with p = {p!r}")
    rho_1 = reduced_density(step.field_excited, ["B"])
    rho_2 = reduced_density(step.field_ground, ["B"])
    mixture = DensityMatrix(p * rho_1.matrix + (1 - p) * rho_2.matrix, rho_1.space)
    s0 = von_neumann_entropy(reduced_density(field0, ["B"]))
    s1 = von_neumann_entropy(rho_1)
    return ConcavityReport(
        s_initial=s0,
        s_mixture=von_neumann_entropy(mixture),
        s_excited=s1,
        s_ground=von_neumann_entropy(rho_2),
        delta=s1 - s0,
        p=p,
    )


# -- non-local preparation --------------------------------------------------------

NONLOCAL_CUTOFF = 3


def _cavity_mi(state: StateVector, cavities: Sequence[str]) -> tuple[DensityMatrix, float]:
    rho = reduced_density(state, cavities)
    return rho, vn_mutual_information(rho, [cavities[0]])


def nonlocal_method1(t: float, r0: float = 1.0) -> tuple[StateVector, float]:
    """Entangled atom pair ``(|e g> + |g e>)/sqrt 2``, one atom per cavity, both for ``t``.

    Returns the final atoms+fields state and the mutual information of the
    two cavity fields.
    """
    space = CompositeSpace(
        (("atom_A", 2), ("atom_B", 2), ("A", NONLOCAL_CUTOFF), ("B", NONLOCAL_CUTOFF))
    )
    amps = np.zeros(space.dims, dtype=complex)
    amps[EXCITED, GROUND, 0, 0] = amps[GROUND, EXCITED, 0, 0] = 1 / math.sqrt(2)
    state = StateVector(amps.ravel(), space)
    state = apply_jc(state, "A", "atom_A", t, r0)
    state = apply_jc(state, "B", "atom_B", t, r0)
    return state, _cavity_mi(state, ["A", "B"])[1]


def nonlocal_method2(t1: float, t2: float, r0: float = 1.0) -> tuple[StateVector, float]:
    """One excited atom through cavity A for ``t1`` then cavity B for ``t2``."""
    space = CompositeSpace((("atom", 2), ("A", NONLOCAL_CUTOFF), ("B", NONLOCAL_CUTOFF)))
    state = StateVector.basis(space, [EXCITED, 0, 0])
    state = apply_jc(state, "A", "atom", t1, r0)
    state = apply_jc(state, "B", "atom", t2, r0)
    return state, _cavity_mi(state, ["A", "B"])[1]


def method2_intermediate(t1: float, r0: float = 1.0) -> StateVector:
    """State after the first cavity in method 2."""
    space = CompositeSpace((("atom", 2), ("A", NONLOCAL_CUTOFF), ("B", NONLOCAL_CUTOFF)))
    return apply_jc(StateVector.basis(space, [EXCITED, 0, 0]), "A", "atom", t1, r0)
