"""Dense two-qubit statevector simulation of the Ry-Rz ansatz.

Amplitude index ``b`` is ``2*q1 + q0`` (see :mod:`shotmeta.pauli`). States are
plain complex numpy arrays of length 4; parameters are float arrays of length 8.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError
from .pauli import X_BASIS, Z_BASIS, Hamiltonian

__all__ = [
    "N_PARAMS",
    "as_params",
    "ry",
    "rz",
    "prepare_ansatz",
    "exact_expectation",
    "basis_probabilities",
    "sample_counts",
    "equal_up_to_phase",
]

N_PARAMS = 8

_HADAMARD2 = np.kron(*(2 * [np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)]))
# CNOT, control q0 -> target q1: swaps |q1 q0> = |01> and |11>, i.e. b=1 and b=3
_CNOT_PERM = np.array([0, 3, 2, 1])


def as_params(theta: Sequence[float]) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (N_PARAMS,):
        raise InvalidArgumentError(f"expected {N_PARAMS} angles, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise InvalidArgumentError("ansatz angles must be finite")
    return theta


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _layer(theta_y: float, theta_z: float) -> np.ndarray:
    return rz(theta_z) @ ry(theta_y)


def prepare_ansatz(theta: Sequence[float]) -> np.ndarray:
    """Statevector produced by the Ry-Rz ansatz from ``|00>``.

    Gate order: Ry(t0) q0, Ry(t1) q1; Rz(t2) q0, Rz(t3) q1; CNOT q0 -> q1;
    Ry(t4) q0, Ry(t5) q1; Rz(t6) q0, Rz(t7) q1.
    """
    t = as_params(theta)
    u0, u1 = _layer(t[0], t[2]), _layer(t[1], t[3])
    # product state; reshape(2, 2) indexes [q1, q0]
    state = np.outer(u1[:, 0], u0[:, 0]).reshape(4)[_CNOT_PERM]
    v0, v1 = _layer(t[4], t[6]), _layer(t[5], t[7])
    return (v1 @ state.reshape(2, 2) @ v0.T).reshape(4)


def _check_normalized(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.shape != (4,):
        raise InvalidArgumentError(f"expected a 2-qubit statevector, got shape {state.shape}")
    norm = np.vdot(state, state).real
    if abs(norm - 1.0) > 1e-6:
        raise InvalidArgumentError(f"state is not normalized (norm^2 = {norm:.3g})")
    return state


def exact_expectation(state: np.ndarray, h: Hamiltonian) -> float:
    """``<psi|H|psi>`` by dense matrix-vector product."""
    state = _check_normalized(state)
    value = np.vdot(state, h.dense @ state)
    if abs(value.imag) > 1e-10:
        raise ArithmeticError(f"expectation has imaginary part {value.imag:.3g}")
    return float(value.real)


def basis_probabilities(state: np.ndarray, basis: str) -> np.ndarray:
    """Outcome probabilities for ``b = 0..3`` when measuring in the given basis.

    The X basis is measured by applying H on both qubits before a Z readout.
    """
    state = _check_normalized(state)
    if basis == Z_BASIS:
        amps = state
    elif basis == X_BASIS:
        amps = _HADAMARD2 @ state
    else:
        raise InvalidArgumentError(f"unsupported basis {basis!r}")
    probs = np.abs(amps) ** 2
    return probs / probs.sum()


def sample_counts(probs: Sequence[float], shots: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial draw of ``shots`` outcomes; returns counts ordered ``b = 0..3``."""
    probs = np.asarray(probs, dtype=float)
    if shots < 0:
        raise InvalidArgumentError(f"shots must be non-negative, got {shots!r}")
    if np.any(probs < -1e-12):
        raise InvalidArgumentError("probabilities must be non-negative")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise InvalidArgumentError(f"probabilities sum to {probs.sum():.12g}, not 1")
    probs = np.clip(probs, 0.0, None)
    return rng.multinomial(shots, probs / probs.sum())


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    return bool(abs(abs(np.vdot(a, b)) - 1.0) <= atol)
