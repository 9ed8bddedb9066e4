"""Two-qubit Pauli-word Hamiltonians and shot-cost conversions.

Qubit convention: the leftmost factor of a word acts on qubit 0. Basis index
``b`` of a statevector or measurement outcome encodes ``b = 2*q1 + q0``, so
bit ``k`` of ``b`` reports qubit ``k`` and the Z eigenvalue on qubit ``k`` is
``(-1)**bit_k``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "PauliWord",
    "PauliTerm",
    "MeasurementGroup",
    "Hamiltonian",
    "Z_BASIS",
    "X_BASIS",
    "H2_COEFFICIENTS",
    "h2_hamiltonian",
    "shots_for_accuracy",
    "accuracy_for_shots",
    "exact_spectrum",
    "ground_state",
]

Z_BASIS = "Z"
X_BASIS = "X"

# c0..c3 for H2 at 0.725 Angstrom, Hartree
H2_COEFFICIENTS = (-1.05016, 0.40421, 0.01135, 0.18038)

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliWord:
    factors: str

    def __post_init__(self):
        if not isinstance(self.factors, str) or len(self.factors) != 2:
            raise InvalidArgumentError(f"Pauli word must have exactly 2 factors, got {self.factors!r}")
        bad = set(self.factors) - set(_PAULI)
        if bad:
            raise InvalidArgumentError(f"unknown Pauli labels {sorted(bad)} in {self.factors!r}")

    @property
    def is_identity(self) -> bool:
        return self.factors == "II"

    def matrix(self) -> np.ndarray:
        # index b = 2*q1 + q0, so qubit 1 is the slow (left) kron factor
        return np.kron(_PAULI[self.factors[1]], _PAULI[self.factors[0]])

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalue of each outcome ``b = 0..3`` in the word's own product basis."""
        out = np.ones(4)
        for qubit, label in enumerate(self.factors):
            if label != "I":
                bits = (np.arange(4) >> qubit) & 1
                out *= 1 - 2 * bits
        return out

    def __str__(self) -> str:
        return self.factors


@dataclass(frozen=True)
class PauliTerm:
    word: PauliWord
    coefficient: float

    def __post_init__(self):
        if not math.isfinite(self.coefficient):
            raise InvalidArgumentError(f"coefficient must be finite, got {self.coefficient!r}")


@dataclass(frozen=True)
class MeasurementGroup:
    """Terms measured together in a single basis setting."""

    basis_label: str
    terms: tuple[PauliTerm, ...]

    def __post_init__(self):
        if self.basis_label not in (Z_BASIS, X_BASIS):
            raise InvalidArgumentError(f"unsupported basis {self.basis_label!r}")
        allowed = {"I", self.basis_label}
        for term in self.terms:
            if not set(term.word.factors) <= allowed:
                raise InvalidArgumentError(
                    f"{term.word} is not diagonal in the {self.basis_label} basis"
                )

    @property
    def weight(self) -> float:
        # identity terms carry no variance
        return math.sqrt(sum(t.coefficient**2 for t in self.terms if not t.word.is_identity))

    @cached_property
    def outcome_energies(self) -> np.ndarray:
        """Group energy contribution of each outcome ``b = 0..3`` in this basis."""
        out = np.zeros(4)
        for t in self.terms:
            out += t.coefficient * t.word.eigenvalues()
        return out


@dataclass(frozen=True)
class Hamiltonian:
    terms: tuple[PauliTerm, ...]
    groups: tuple[MeasurementGroup, ...] = field(default=())

    def __post_init__(self):
        if not self.groups:
            object.__setattr__(self, "groups", _group_by_basis(self.terms))
        grouped = sorted(
            (t.word.factors, t.coefficient) for g in self.groups for t in g.terms
        )
        expected = sorted(
            (t.word.factors, t.coefficient) for t in self.terms if not t.word.is_identity
        )
        if grouped != expected:
            raise InvalidArgumentError("groups must partition the non-identity terms")

    @property
    def constant(self) -> float:
        return sum(t.coefficient for t in self.terms if t.word.is_identity)

    @property
    def total_weight(self) -> float:
        return sum(g.weight for g in self.groups)

    def matrix(self) -> np.ndarray:
        return self.dense.copy()

    @cached_property
    def dense(self) -> np.ndarray:
        out = np.zeros((4, 4), dtype=complex)
        for t in self.terms:
            out += t.coefficient * t.word.matrix()
        out.setflags(write=False)
        return out

    @classmethod
    def from_terms(cls, pairs: Iterable[tuple[str, float]]) -> "Hamiltonian":
        return cls(tuple(PauliTerm(PauliWord(w), float(c)) for w, c in pairs))

    def to_json(self) -> list[dict]:
        return [{"word": t.word.factors, "coeff": t.coefficient} for t in self.terms]

    @classmethod
    def from_json(cls, doc: str | Sequence[dict]) -> "Hamiltonian":
        if isinstance(doc, str):
            doc = json.loads(doc)
        if not isinstance(doc, list):
            raise InvalidArgumentError("Hamiltonian JSON must be a list of {word, coeff} objects")
        try:
            pairs = [(item["word"], item["coeff"]) for item in doc]
        except (KeyError, TypeError) as exc:
            raise InvalidArgumentError(f"malformed Hamiltonian entry: {exc}") from None
        for _, coeff in pairs:
            if isinstance(coeff, bool) or not isinstance(coeff, (int, float)):
                raise InvalidArgumentError(f"coefficient must be a number, got {coeff!r}")
        return cls.from_terms(pairs)


def _group_by_basis(terms: Sequence[PauliTerm]) -> tuple[MeasurementGroup, ...]:
    # Z-words and X-words only; no general commutation grouping
    by_basis: dict[str, list[PauliTerm]] = {Z_BASIS: [], X_BASIS: []}
    for t in terms:
        if t.word.is_identity:
            continue
        labels = set(t.word.factors) - {"I"}
        if len(labels) != 1 or next(iter(labels)) not in by_basis:
            raise InvalidArgumentError(f"cannot assign {t.word} to the Z or X measurement group")
        by_basis[labels.pop()].append(t)
    return tuple(MeasurementGroup(b, tuple(ts)) for b, ts in by_basis.items() if ts)


def h2_hamiltonian() -> Hamiltonian:
    """Two-qubit H2 Hamiltonian at 0.725 Angstrom."""
    c0, c1, c2, c3 = H2_COEFFICIENTS
    return Hamiltonian.from_terms(
        [("II", c0), ("ZI", c1), ("IZ", c1), ("ZZ", c2), ("XX", c3)]
    )


def shots_for_accuracy(h: Hamiltonian, epsilon: float) -> int:
    """Shots needed so the energy estimate has standard error ``epsilon``.

    Cross-term covariances are taken as zero and every Pauli variance is
    bounded by 1, so the cost is ``(sum_i sqrt(sum_j c_ij**2))**2 / eps**2``.
    """
    if not epsilon > 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon!r}")
    return max(1, math.ceil(h.total_weight**2 / epsilon**2))


def accuracy_for_shots(h: Hamiltonian, m: int) -> float:
    """Standard error reached with ``m`` shots; inverse of :func:`shots_for_accuracy`."""
    if m < 1:
        raise InvalidArgumentError(f"need at least one shot, got {m!r}")
    return math.sqrt(h.total_weight**2 / m)


def exact_spectrum(h: Hamiltonian) -> np.ndarray:
    """Ascending eigenvalues of the dense 4x4 Hamiltonian matrix."""
    return np.linalg.eigvalsh(h.matrix())


def ground_state(h: Hamiltonian) -> tuple[float, np.ndarray]:
    """Lowest eigenvalue and its eigenvector, phase fixed so the largest amplitude is real positive."""
    values, vectors = np.linalg.eigh(h.matrix())
    vec = vectors[:, 0]
    k = np.argmax(np.abs(vec))
    vec = vec * (abs(vec[k]) / vec[k])
    return float(values[0]), vec
