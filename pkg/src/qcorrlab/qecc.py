"""Error-correcting-code conditions over a Pauli error basis.

An error index pairs an amplitude bit string with a phase bit string; the
operator is ``X^amp Z^phase`` on every qubit (phase first, then amplitude),
with qubit 1 the leftmost character.  For two indices ``e1 = (alpha,
beta)`` and ``e2 = (gamma, delta)`` the code matrix is

    M_kl = <C^k| E_e1^dagger E_e2 |C^l>

The general condition asks every ``M`` to be a scalar multiple of the
identity; the strict condition asks ``M = delta_{e1,e2} I``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

CONDITION_TOL = 1e-9

ERROR_KINDS = ("all", "amplitude", "phase")


@dataclass(frozen=True, order=True)
class PauliErrorIndex:
    amp: str
    phase: str

    def __post_init__(self):
        if len(self.amp) != len(self.phase):
            raise ValidationError(f"bit strings differ in length: {self.amp!r} / {self.phase!r}")
        if set(self.amp + self.phase) - {"0", "1"}:
            raise ValidationError("error indices must be bit strings")

    @property
    def n(self) -> int:
        return len(self.amp)

    @property
    def support(self) -> set[int]:
        return {i for i, (a, p) in enumerate(zip(self.amp, self.phase)) if a == "1" or p == "1"}

    @property
    def weight(self) -> int:
        return len(self.support)

    @classmethod
    def identity(cls, n: int) -> "PauliErrorIndex":
        return cls("0" * n, "0" * n)

    def label(self) -> str:
        """Readable form such as ``X1 Z2 XZ3`` (``I`` for the identity)."""
        parts = []
        for i, (a, p) in enumerate(zip(self.amp, self.phase), start=1):
            tag = ("X" if a == "1" else "") + ("Z" if p == "1" else "")
            if tag:
                parts.append(f"{tag}{i}")
        return " ".join(parts) or "I"

    def __str__(self) -> str:
        return f"A{self.amp}P{self.phase}"


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def pauli_error_operator(idx: PauliErrorIndex, n: int) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of ``prod_i X_i^{amp_i} Z_i^{phase_i}``."""
    if idx.n != n:
        raise ValidationError(f"index has length {idx.n}, expected {n}")
    op = np.ones((1, 1), dtype=complex)
    for a, p in zip(idx.amp, idx.phase):
        local = np.eye(2, dtype=complex)
        if p == "1":
            local = _Z @ local
        if a == "1":
            local = _X @ local
        op = np.kron(op, local)
    return op


def apply_pauli(idx: PauliErrorIndex, vec: np.ndarray) -> np.ndarray:
    """``E|v>`` by index arithmetic: ``E|i> = (-1)^{|i & phase|} |i xor amp>``."""
    n = idx.n
    if vec.shape[0] != 2**n:
        raise ValidationError(f"vector of length {vec.shape[0]} for {n} qubits")
    amp, phase = int(idx.amp, 2), int(idx.phase, 2)
    i = np.arange(2**n)
    masked = i & phase
    parity = np.zeros(2**n, dtype=np.int64)
    for b in range(n):
        parity ^= (masked >> b) & 1
    out = np.empty_like(vec, dtype=complex)
    out[i ^ amp] = np.where(parity, -1.0, 1.0) * vec
    return out


def enumerate_error_indices(n: int, d: int, kinds: str = "all") -> list[PauliErrorIndex]:
    """Every index of weight at most ``d``, sorted by ``(amp, phase)``.

    ``kinds`` restricts the single-qubit factors: ``amplitude`` (X only),
    ``phase`` (Z only) or ``all`` (X, Z and XZ).
    """
    if not 0 <= d <= n:
        raise ValidationError(f"need 0 <= d <= n, got d={d}, n={n}")
    if kinds not in ERROR_KINDS:
        raise ValidationError(f"kinds must be one of {ERROR_KINDS}")
    local = {"all": [("1", "0"), ("0", "1"), ("1", "1")], "amplitude": [("1", "0")], "phase": [("0", "1")]}[kinds]
    out = set()
    for w in range(d + 1):
        for positions in itertools.combinations(range(n), w):
            for choice in itertools.product(local, repeat=w):
                amp, phase = ["0"] * n, ["0"] * n
                for pos, (a, p) in zip(positions, choice):
                    amp[pos], phase[pos] = a, p
                out.add(PauliErrorIndex("".join(amp), "".join(phase)))
    return sorted(out)


@dataclass(frozen=True)
class CodeSpec:
    n: int
    q: int
    codewords: tuple[np.ndarray, ...]
    d: int
    name: str = "code"

    def __post_init__(self):
        words = []
        for w in self.codewords:
            w = np.array(w, dtype=complex).ravel()
            if w.shape[0] != 2**self.n:
                raise ValidationError(f"codeword of length {w.shape[0]} for n={self.n}")
            w.setflags(write=False)
            words.append(w)
        if self.q < 0 or self.q > self.n:
            raise ValidationError("need 0 <= q <= n")
        if len(words) != 2**self.q:
            raise ValidationError(f"{len(words)} codewords for q={self.q}, expected {2**self.q}")
        if not 0 <= self.d <= self.n:
            raise ValidationError("need 0 <= d <= n")
        gram = np.array([[np.vdot(a, b) for b in words] for a in words])
        dev = np.max(np.abs(gram - np.eye(len(words))))
        if dev > CONDITION_TOL:
            raise ValidationError(f"codewords are not orthonormal (deviation {dev:.3e})")
        object.__setattr__(self, "codewords", tuple(words))


@dataclass(frozen=True)
class Violation:
    first: PauliErrorIndex
    second: PauliErrorIndex
    matrix: np.ndarray
    classification: str

    def to_dict(self) -> dict:
        return {
            "first": str(self.first),
            "second": str(self.second),
            "first_label": self.first.label(),
            "second_label": self.second.label(),
            "classification": self.classification,
            "matrix": [[[z.real, z.imag] for z in row] for row in self.matrix],
        }


@dataclass
class ConditionReport:
    condition: str
    code: str
    kinds: str
    d: int
    checked_tuples: int = 0
    violations: list[Violation] = field(default_factory=list)
    y_values: dict[tuple[PauliErrorIndex, PauliErrorIndex], complex] = field(default_factory=dict)
    conjugate_symmetric: bool = True

    @property
    def passed(self) -> bool:
        return not self.violations

    def degenerate_tuples(self) -> list[tuple[PauliErrorIndex, PauliErrorIndex]]:
        """Tuples with ``e1 != e2`` but nonzero scalar ``y``."""
        return [k for k, y in self.y_values.items() if k[0] != k[1] and abs(y) > CONDITION_TOL]

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "code": self.code,
            "kinds": self.kinds,
            "d": self.d,
            "passed": self.passed,
            "checked_tuples": self.checked_tuples,
            "conjugate_symmetric": self.conjugate_symmetric,
            "violations": [v.to_dict() for v in self.violations],
            "y_values": [
                {"first": str(a), "second": str(b), "y": [y.real, y.imag]}
                for (a, b), y in self.y_values.items()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _error_images(code: CodeSpec, indices: Sequence[PauliErrorIndex]) -> np.ndarray:
    """Array ``[e, k, :]`` holding ``E_e |C^k>``."""
    return np.array([[apply_pauli(e, w) for w in code.codewords] for e in indices])


def code_matrices(code: CodeSpec, indices: Sequence[PauliErrorIndex]) -> np.ndarray:
    """``M[e1, e2, k, l] = <C^k| E_e1^dagger E_e2 |C^l>`` for all index pairs."""
    images = _error_images(code, indices)
    return np.einsum("akx,blx->abkl", images.conj(), images)


def _check(code: CodeSpec, kinds: str, strict: bool) -> ConditionReport:
    indices = enumerate_error_indices(code.n, code.d, kinds)
    mats = code_matrices(code, indices)
    k = len(code.codewords)
    eye = np.eye(k)
    report = ConditionReport("strict" if strict else "general", code.name, kinds, code.d)
    for i, e1 in enumerate(indices):
        for j, e2 in enumerate(indices):
            m = mats[i, j]
            report.checked_tuples += 1
            diag = np.diag(m)
            y = complex(diag.mean())
            report.y_values[(e1, e2)] = y
            off = np.max(np.abs(m - np.diag(diag))) if k > 1 else 0.0
            spread = np.max(np.abs(diag - y))
            cls = None
            if strict:
                want = eye if i == j else np.zeros_like(eye)
                if np.max(np.abs(m - want)) > CONDITION_TOL:
                    if off > CONDITION_TOL or spread > CONDITION_TOL:
                        cls = "not-scalar"
                    elif i == j:
                        cls = "wrong-norm"
                    else:
                        cls = "overlapping-error-spaces"
            elif off > CONDITION_TOL:
                cls = "off-diagonal"
            elif spread > CONDITION_TOL:
                cls = "non-uniform-diagonal"
            if cls:
                report.violations.append(Violation(e1, e2, m.copy(), cls))
    for (e1, e2), y in report.y_values.items():
        if abs(report.y_values[(e2, e1)] - np.conj(y)) > CONDITION_TOL:
            report.conjugate_symmetric = False
            break
    return report


def check_general_conditions(code: CodeSpec, kinds: str = "all") -> ConditionReport:
    """Every code matrix must be ``y I`` for some complex ``y``."""
    return _check(code, kinds, strict=False)


def check_strict_conditions(code: CodeSpec, kinds: str = "all") -> ConditionReport:
    """Every code matrix must be ``I`` for equal indices and zero otherwise."""
    return _check(code, kinds, strict=True)


def tuple_condition(code: CodeSpec, e1: PauliErrorIndex, e2: PauliErrorIndex) -> tuple[bool, np.ndarray]:
    """Check the general condition for a single pair; returns ``(ok, M)``."""
    m = code_matrices(code, [e1, e2])[0, 1]
    diag = np.diag(m)
    off = np.max(np.abs(m - np.diag(diag)))
    ok = off <= CONDITION_TOL and np.max(np.abs(diag - diag.mean())) <= CONDITION_TOL
    return bool(ok), m


# -- fixtures -----------------------------------------------------------------


def _basis(n: int, bits: str) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def repetition_code(n: int = 3, d: int = 1) -> CodeSpec:
    """``|0...0>, |1...1>``: protects against ``(n-1)//2`` amplitude errors."""
    return CodeSpec(n, 1, (_basis(n, "0" * n), _basis(n, "1" * n)), d, name=f"repetition{n}")


def shor_code(d: int = 1) -> CodeSpec:
    """Nine-qubit code ``(|000> +/- |111>)^{(x)3} / 2^{3/2}``; degenerate under ``Z_i Z_j``."""
    plus = (_basis(3, "000") + _basis(3, "111")) / np.sqrt(2)
    minus = (_basis(3, "000") - _basis(3, "111")) / np.sqrt(2)
    zero = np.kron(np.kron(plus, plus), plus)
    one = np.kron(np.kron(minus, minus), minus)
    return CodeSpec(9, 1, (zero, one), d, name="shor9")


# -- codeword files -------------------------------------------------------------


class CodeFileError(ValidationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def parse_code(text: str, name: str = "code") -> CodeSpec:
    """Parse the codeword format.

    The first non-comment line is ``n=<int> q=<int> d=<int>``.  Each codeword
    is a block of ``<bitstring> <real> <imag>`` lines; blocks are separated
    by blank lines.  Lines starting with ``#`` are ignored.
    """
    lines = text.splitlines()
    header = None
    blocks: list[dict[int, complex]] = []
    current: dict[int, complex] | None = None
    n = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if header is None:
            if not line:
                continue
            try:
                fields = dict(tok.split("=", 1) for tok in line.split())
                header = {key: int(fields[key]) for key in ("n", "q", "d")}
            except (ValueError, KeyError):
                raise CodeFileError(f"bad header {line!r}; expected 'n=<int> q=<int> d=<int>'", lineno) from None
            n = header["n"]
            continue
        if not line:
            current = None
            continue
        parts = line.split()
        if len(parts) != 3:
            raise CodeFileError(f"expected '<bitstring> <real> <imag>', got {line!r}", lineno)
        bits, re_, im_ = parts
        if len(bits) != n or set(bits) - {"0", "1"}:
            raise CodeFileError(f"{bits!r} is not a {n}-bit string", lineno)
        try:
            amp = complex(float(re_), float(im_))
        except ValueError:
            raise CodeFileError(f"non-numeric amplitude in {line!r}", lineno) from None
        if current is None:
            current = {}
            blocks.append(current)
        idx = int(bits, 2)
        if idx in current:
            raise CodeFileError(f"basis state {bits} repeated within a codeword", lineno)
        current[idx] = amp
    if header is None:
        raise CodeFileError("missing header")
    words = []
    for block in blocks:
        v = np.zeros(2**n, dtype=complex)
        for idx, amp in block.items():
            v[idx] = amp
        words.append(v)
    try:
        return CodeSpec(n, header["q"], tuple(words), header["d"], name=name)
    except ValidationError as exc:
        raise CodeFileError(str(exc)) from None


def load_code(path: str | Path) -> CodeSpec:
    path = Path(path)
    return parse_code(path.read_text(), name=path.stem)


def format_code(code: CodeSpec) -> str:
    out = [f"n={code.n} q={code.q} d={code.d}"]
    for k, w in enumerate(code.codewords):
        if k:
            out.append("")
        for idx in np.flatnonzero(np.abs(w) > 0):
            out.append(f"{idx:0{code.n}b} {float(w[idx].real)!r} {float(w[idx].imag)!r}")
    return "\n".join(out) + "\n"


def random_code(n: int, q: int, d: int, rng: np.random.Generator) -> CodeSpec:
    """Random orthonormal codeword set (columns of a Haar isometry)."""
    dim, k = 2**n, 2**q
    z = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    qmat, _ = np.linalg.qr(z)
    return CodeSpec(n, q, tuple(qmat.T), d, name="random")


def error_indices_for(code: CodeSpec, kinds: str = "all") -> list[PauliErrorIndex]:
    return enumerate_error_indices(code.n, code.d, kinds)


def errors_from_labels(n: int, labels: Iterable[str]) -> list[PauliErrorIndex]:
    """Parse labels like ``X1``, ``Z3``, ``XZ2``, ``I`` (single-qubit factors, joined by spaces)."""
    out = []
    for label in labels:
        amp, phase = ["0"] * n, ["0"] * n
        for tok in label.split():
            if tok == "I":
                continue
            kind, pos = tok.rstrip("0123456789"), tok[len(tok.rstrip("0123456789")):]
            i = int(pos) - 1
            if kind not in ("X", "Z", "XZ") or not 0 <= i < n:
                raise ValidationError(f"bad error label {tok!r}")
            amp[i] = "1" if "X" in kind else amp[i]
            phase[i] = "1" if "Z" in kind else phase[i]
        out.append(PauliErrorIndex("".join(amp), "".join(phase)))
    return out
