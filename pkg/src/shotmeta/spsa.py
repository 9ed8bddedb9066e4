"""Simultaneous perturbation stochastic approximation with shot accounting.

The objective may return a plain float (zero shot cost, e.g. an exact
statevector energy) or an :class:`~shotmeta.estimator.EnergyEstimate`, whose
``shots_used`` is charged to the run.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import InvalidArgumentError
from .estimator import EnergyEstimate

__all__ = [
    "SpsaConfig",
    "SpsaResult",
    "SpsaAborted",
    "gain_sequences",
    "calibrate_step_scale",
    "spsa_minimize",
    "shots_per_run",
    "shots_per_eval_for_budget",
]

Objective = Callable[[np.ndarray], Union[float, EnergyEstimate]]


class SpsaAborted(FloatingPointError):
    """The objective returned a non-finite value."""


@dataclass(frozen=True)
class SpsaConfig:
    """SPSA hyperparameters.

    ``a0=None`` means the step scale is calibrated from ``calibration_steps``
    probe gradients so the first update has magnitude ``target_magnitude``.
    ``s_gamma`` is the decay exponent of the perturbation size.
    """

    maxiter: int = 100
    a0: Optional[float] = None
    c0: float = 0.2
    A: float = 0.0
    alpha: float = 0.602
    s_gamma: float = 0.101
    shots_per_eval: int = 1000
    calibration_steps: int = 10
    target_magnitude: float = 2 * math.pi / 10

    def __post_init__(self):
        if not isinstance(self.maxiter, int) or self.maxiter < 1:
            raise InvalidArgumentError(f"maxiter must be a positive integer, got {self.maxiter!r}")
        if self.a0 is not None and not self.a0 > 0:
            raise InvalidArgumentError(f"a0 must be positive, got {self.a0!r}")
        if not self.c0 > 0:
            raise InvalidArgumentError(f"c0 must be positive, got {self.c0!r}")
        if not self.A >= 0:
            raise InvalidArgumentError(f"A must be non-negative, got {self.A!r}")
        if not 0 < self.alpha <= 1:
            raise InvalidArgumentError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not 0 < self.s_gamma < 1:
            raise InvalidArgumentError(f"s_gamma must lie in (0, 1), got {self.s_gamma!r}")
        if self.shots_per_eval < 0:
            raise InvalidArgumentError(f"shots_per_eval must be non-negative, got {self.shots_per_eval!r}")
        if self.calibration_steps < 0:
            raise InvalidArgumentError("calibration_steps must be non-negative")
        if self.a0 is None and self.calibration_steps < 1:
            raise InvalidArgumentError("a0 must be given when calibration is disabled")
        if not self.target_magnitude > 0:
            raise InvalidArgumentError("target_magnitude must be positive")

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, doc: dict) -> "SpsaConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise InvalidArgumentError(f"unknown SPSA settings: {sorted(unknown)}")
        return cls(**doc)

    def replace(self, **changes) -> "SpsaConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class SpsaResult:
    final_params: np.ndarray
    shots_used: int
    a0: float
    calibration_shots: int = 0
    trace: Optional[list] = field(default=None, repr=False)


def gain_sequences(config: SpsaConfig, k: int, a0: Optional[float] = None) -> tuple[float, float]:
    """Step size ``a_k`` and perturbation size ``c_k`` at iteration ``k`` (from 0)."""
    if k < 0:
        raise InvalidArgumentError(f"iteration index must be non-negative, got {k}")
    a0 = config.a0 if a0 is None else a0
    a_k = a0 / (k + 1 + config.A) ** config.alpha if a0 is not None else math.nan
    c_k = config.c0 / (k + 1) ** config.s_gamma
    return a_k, c_k


def _call(objective: Objective, theta: np.ndarray) -> tuple[float, int]:
    y = objective(theta)
    if isinstance(y, EnergyEstimate):
        value, shots = y.value, y.shots_used
    else:
        value, shots = float(y), 0
    if not math.isfinite(value):
        raise SpsaAborted(f"objective returned {value!r} at theta={theta.tolist()}")
    return value, shots


def calibrate_step_scale(
    objective: Objective, theta: np.ndarray, config: SpsaConfig, rng: np.random.Generator
) -> tuple[float, int]:
    """Choose ``a0`` so the expected first update has magnitude ``target_magnitude``.

    Returns ``(a0, shots spent on probes)``.
    """
    shots = 0
    magnitude = 0.0
    c = config.c0
    for _ in range(config.calibration_steps):
        delta = 2.0 * rng.integers(0, 2, size=theta.shape) - 1.0
        y_plus, s_plus = _call(objective, theta + c * delta)
        y_minus, s_minus = _call(objective, theta - c * delta)
        shots += s_plus + s_minus
        magnitude += abs(y_plus - y_minus) / (2 * c)
    magnitude /= config.calibration_steps
    scale = (1 + config.A) ** config.alpha
    if magnitude < 1e-12:
        # flat landscape; fall back to unit gradient
        magnitude = 1.0
    return config.target_magnitude * scale / magnitude, shots


def spsa_minimize(
    objective: Objective,
    start,
    config: SpsaConfig,
    rng: np.random.Generator,
    keep_trace: bool = False,
) -> SpsaResult:
    """Minimize ``objective`` from ``start``; returns the last iterate.

    Raises :class:`SpsaAborted` if the objective yields a non-finite value.
    """
    theta = np.array(start, dtype=float)
    calibration_shots = 0
    a0 = config.a0
    if a0 is None:
        a0, calibration_shots = calibrate_step_scale(objective, theta, config, rng)
    shots = calibration_shots
    trace = [] if keep_trace else None
    for k in range(config.maxiter):
        a_k, c_k = gain_sequences(config, k, a0)
        delta = 2.0 * rng.integers(0, 2, size=theta.shape) - 1.0
        y_plus, s_plus = _call(objective, theta + c_k * delta)
        y_minus, s_minus = _call(objective, theta - c_k * delta)
        shots += s_plus + s_minus
        theta = theta - a_k * (y_plus - y_minus) / (2 * c_k * delta)
        if trace is not None:
            trace.append((theta.copy(), 0.5 * (y_plus + y_minus)))
    return SpsaResult(theta, shots, a0, calibration_shots, trace)


def shots_per_run(config: SpsaConfig) -> int:
    """Shots one run consumes, calibration probes included."""
    probes = config.calibration_steps if config.a0 is None else 0
    return 2 * (config.maxiter + probes) * config.shots_per_eval


def shots_per_eval_for_budget(config: SpsaConfig, n: int) -> int:
    """Largest ``shots_per_eval`` whose full run (probes included) fits in ``n`` shots."""
    probes = config.calibration_steps if config.a0 is None else 0
    return int(n // (2 * (config.maxiter + probes)))
