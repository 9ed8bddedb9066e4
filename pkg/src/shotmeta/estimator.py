"""Shot-based energy estimation from simulated measurement counts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientDataError, InvalidArgumentError
from .pauli import X_BASIS, Z_BASIS, Hamiltonian, accuracy_for_shots
from .qsim import basis_probabilities, prepare_ansatz, sample_counts

__all__ = [
    "EnergyEstimate",
    "allocate_shots",
    "term_expectations",
    "expectation_from_counts",
    "estimate_energy",
    "final_estimate",
]


@dataclass(frozen=True)
class EnergyEstimate:
    value: float
    shots_used: int
    epsilon: Optional[float] = None

    def to_json(self) -> dict:
        out = {"value": self.value, "shots_used": self.shots_used}
        if self.epsilon is not None:
            out["epsilon"] = self.epsilon
        return out

    @classmethod
    def from_json(cls, doc: dict) -> "EnergyEstimate":
        return cls(float(doc["value"]), int(doc["shots_used"]), doc.get("epsilon"))


def allocate_shots(h: Hamiltonian, total: int, proportional: bool = True) -> list[int]:
    """Split ``total`` shots across measurement groups.

    Shares are proportional to group weight (``equal`` split if
    ``proportional`` is false), rounded by largest remainder with every group
    guaranteed at least one shot.
    """
    k = len(h.groups)
    if total < k:
        raise InvalidArgumentError(f"need at least {k} shots for {k} groups, got {total}")
    if proportional:
        weights = np.array([g.weight for g in h.groups])
        if weights.sum() == 0:
            weights = np.ones(k)
    else:
        weights = np.ones(k)
    quotas = total * weights / weights.sum()
    alloc = np.floor(quotas).astype(int)
    leftover = int(total - alloc.sum())
    # stable sort keeps earlier groups first on equal remainders
    order = np.argsort(-(quotas - alloc), kind="stable")
    alloc[order[:leftover]] += 1
    for i in np.flatnonzero(alloc == 0):
        alloc[np.argmax(alloc)] -= 1
        alloc[i] = 1
    return [int(a) for a in alloc]


def term_expectations(counts: np.ndarray, group) -> dict[str, float]:
    """Frequency-weighted eigenvalue average for each word in ``group``."""
    counts = np.asarray(counts)
    total = counts.sum()
    if total < 1:
        raise InsufficientDataError(f"no shots recorded for the {group.basis_label} group")
    freqs = counts / total
    return {str(t.word): float(freqs @ t.word.eigenvalues()) for t in group.terms}


def expectation_from_counts(
    counts_z: Sequence[int], counts_x: Sequence[int], h: Hamiltonian
) -> float:
    """Energy estimate ``constant + sum_j c_j <O_j>`` from per-basis counts."""
    by_basis = {Z_BASIS: counts_z, X_BASIS: counts_x}
    energy = h.constant
    for group in h.groups:
        counts = np.asarray(by_basis[group.basis_label])
        total = counts.sum()
        if total < 1:
            raise InsufficientDataError(f"no shots recorded for the {group.basis_label} group")
        energy += float(counts @ group.outcome_energies) / total
    return energy


def _sampled_energy(state: np.ndarray, h: Hamiltonian, total_shots: int, rng) -> float:
    energy = h.constant
    for group, shots in zip(h.groups, allocate_shots(h, total_shots)):
        probs = basis_probabilities(state, group.basis_label)
        counts = sample_counts(probs, shots, rng)
        energy += float(counts @ group.outcome_energies) / shots
    return energy


def estimate_energy(theta, h: Hamiltonian, total_shots: int, rng: np.random.Generator) -> EnergyEstimate:
    """Prepare the ansatz at ``theta`` and estimate its energy from ``total_shots`` shots."""
    state = prepare_ansatz(theta)
    return EnergyEstimate(_sampled_energy(state, h, total_shots, rng), int(total_shots))


def final_estimate(theta, h: Hamiltonian, m: int, rng: np.random.Generator) -> EnergyEstimate:
    """Same sampling path as :func:`estimate_energy`, tagged with its standard error."""
    est = estimate_energy(theta, h, m, rng)
    return EnergyEstimate(est.value, est.shots_used, accuracy_for_shots(h, m))
