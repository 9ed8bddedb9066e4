"""Benchmark the shot-limited optimizer and fit its success-probability curve.

Success probability as a function of total shots ``n`` is modelled as
``p_s(n) = a * (1 - exp(-b n)) + c``.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InsufficientDataError, InvalidArgumentError
from .estimator import estimate_energy
from .pauli import Hamiltonian, exact_spectrum
from .qsim import N_PARAMS, exact_expectation, prepare_ansatz
from .spsa import SpsaAborted, SpsaConfig, spsa_minimize

__all__ = [
    "CHEMICAL_PRECISION",
    "ACCURACY_LEVELS",
    "TrialRecord",
    "SuccessSample",
    "SuccessCurve",
    "derive_seed",
    "run_trial",
    "run_benchmark",
    "write_records",
    "read_records",
    "success_fraction",
    "aggregate_samples",
    "fit_success_curve",
    "eval_curve",
]

CHEMICAL_PRECISION = 0.0015
ACCURACY_LEVELS = tuple(k * CHEMICAL_PRECISION for k in range(1, 6))

B_GRID = (1e-8, 1e-3)


def derive_seed(master: int, *key: int) -> int:
    """Child seed for ``key`` under ``master``; depends only on the key, not on scheduling."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


@dataclass
class TrialRecord:
    seed: int
    config: SpsaConfig
    shots_used: int
    final_params: np.ndarray
    true_energy: float
    a0: float = math.nan
    calibration_shots: int = 0
    statevector: bool = False
    timestamp: float = field(default_factory=time.time)

    @property
    def aborted(self) -> bool:
        return math.isinf(self.true_energy)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "config": self.config.to_json(),
            "statevector": self.statevector,
            "shots_used": self.shots_used,
            "calibration_shots": self.calibration_shots,
            "a0": None if math.isnan(self.a0) else self.a0,
            "final_params": [float(x) for x in self.final_params],
            # JSON has no infinity; aborted runs carry null
            "true_energy": None if self.aborted else self.true_energy,
            "aborted": self.aborted,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "TrialRecord":
        energy = doc["true_energy"]
        return cls(
            seed=int(doc["seed"]),
            config=SpsaConfig.from_json(doc["config"]),
            shots_used=int(doc["shots_used"]),
            final_params=np.array(doc["final_params"], dtype=float),
            true_energy=math.inf if energy is None else float(energy),
            a0=math.nan if doc.get("a0") is None else float(doc["a0"]),
            calibration_shots=int(doc.get("calibration_shots", 0)),
            statevector=bool(doc.get("statevector", False)),
            timestamp=float(doc.get("timestamp", 0.0)),
        )


def run_trial(config: SpsaConfig, h: Hamiltonian, seed: int, statevector: bool = False) -> TrialRecord:
    """One SPSA run from a uniformly random start, graded by its exact energy.

    With ``statevector=True`` the objective is the exact energy and costs no shots.
    """
    rng = np.random.default_rng(seed)
    start = rng.uniform(-np.pi, np.pi, N_PARAMS)
    if statevector:
        def objective(theta):
            return exact_expectation(prepare_ansatz(theta), h)
    else:
        if config.shots_per_eval < len(h.groups):
            raise InvalidArgumentError(
                f"shots_per_eval must be at least {len(h.groups)}, got {config.shots_per_eval}"
            )

        def objective(theta):
            return estimate_energy(theta, h, config.shots_per_eval, rng)

    try:
        result = spsa_minimize(objective, start, config, rng)
    except (SpsaAborted, FloatingPointError):
        return TrialRecord(seed, config, 0, start, math.inf, statevector=statevector)
    try:
        energy = exact_expectation(prepare_ansatz(result.final_params), h)
    except (ValueError, ArithmeticError):
        energy = math.inf
    return TrialRecord(
        seed, config, result.shots_used, result.final_params, energy,
        a0=result.a0, calibration_shots=result.calibration_shots, statevector=statevector,
    )


def _trial_job(args):
    return run_trial(*args)


def run_benchmark(
    config: SpsaConfig,
    h: Hamiltonian,
    shots_schedule: Sequence[int],
    trials: int,
    master_seed: int,
    workers: int = 1,
    statevector: bool = False,
) -> list[TrialRecord]:
    """``trials`` runs at each ``shots_per_eval`` value in ``shots_schedule``.

    Trial ``i`` at schedule point ``j`` uses ``derive_seed(master_seed, j, i)``,
    so output is identical for any worker count. With ``statevector=True``
    the schedule is ignored and a single batch of exact-objective runs is made.
    """
    if trials < 1:
        raise InvalidArgumentError("trials must be positive")
    if statevector:
        jobs = [(config, h, derive_seed(master_seed, 0, i), True) for i in range(trials)]
    else:
        jobs = [
            (config.replace(shots_per_eval=int(spe)), h, derive_seed(master_seed, j, i), False)
            for j, spe in enumerate(shots_schedule)
            for i in range(trials)
        ]
    if workers <= 1:
        return [_trial_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_job, jobs, chunksize=max(1, len(jobs) // (8 * workers))))


def write_records(path, records: Iterable[TrialRecord], meta: Optional[dict] = None) -> None:
    """Append records as JSON lines; a metadata line heads a new file."""
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    with path.open("a") as fh:
        if fresh and meta is not None:
            fh.write(json.dumps({"meta": meta}, sort_keys=True) + "\n")
        for rec in records:
            fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")


def read_records(path) -> list[TrialRecord]:
    records = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            if "meta" in doc:
                continue
            records.append(TrialRecord.from_json(doc))
    return records


def success_fraction(records: Sequence[TrialRecord], d: float, e0: float) -> tuple[float, float]:
    """Fraction of runs within ``d`` of ``e0`` and its binomial standard error."""
    if not records:
        raise InvalidArgumentError("no records")
    if not d > 0:
        raise InvalidArgumentError(f"accuracy must be positive, got {d!r}")
    hits = int(sum(abs(r.true_energy - e0) <= d for r in records))
    p = hits / len(records)
    return p, math.sqrt(p * (1 - p) / len(records))


@dataclass
class SuccessSample:
    n: int
    trials: int
    successes: dict[float, int]

    def fraction(self, d: float) -> float:
        return self.successes[_level_key(self.successes, d)] / self.trials

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "successes": [[d, k] for d, k in sorted(self.successes.items())],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SuccessSample":
        return cls(int(doc["n"]), int(doc["trials"]), {float(d): int(k) for d, k in doc["successes"]})


def _level_key(successes: dict[float, int], d: float) -> float:
    for key in successes:
        if math.isclose(key, d, rel_tol=1e-9, abs_tol=1e-15):
            return key
    raise InsufficientDataError(f"no success counts recorded at accuracy {d!r}")


def aggregate_samples(
    records: Sequence[TrialRecord], levels: Sequence[float], e0: Optional[float] = None, h: Optional[Hamiltonian] = None
) -> list[SuccessSample]:
    """Group finite-shot records by ``shots_used`` and count successes per level."""
    if e0 is None:
        if h is None:
            raise InvalidArgumentError("need either e0 or a Hamiltonian")
        e0 = float(exact_spectrum(h)[0])
    by_n: dict[int, list[TrialRecord]] = {}
    for rec in records:
        if not rec.statevector:
            by_n.setdefault(rec.shots_used, []).append(rec)
    samples = []
    for n in sorted(by_n):
        group = by_n[n]
        hits = {float(d): sum(abs(r.true_energy - e0) <= d for r in group) for d in levels}
        samples.append(SuccessSample(n, len(group), hits))
    return samples


@dataclass
class SuccessCurve:
    a: float
    b: float
    c: float
    accuracy_d: float
    fit_residual: float = 0.0
    b_identifiable: bool = True

    def __post_init__(self):
        if self.a < 0 or self.c < 0 or self.c > 1 or self.a + self.c > 1 + 1e-12:
            raise InvalidArgumentError(f"invalid curve parameters a={self.a}, c={self.c}")
        if self.b_identifiable and not self.b >= 0:
            raise InvalidArgumentError(f"b must be non-negative, got {self.b}")

    @property
    def no_signal(self) -> bool:
        return bool(self.a == 0 and self.c == 0)

    def to_json(self) -> dict:
        return {
            "a": self.a,
            "b": self.b if self.b_identifiable else None,
            "c": self.c,
            "accuracy_d": self.accuracy_d,
            "fit_residual": self.fit_residual,
            "b_identifiable": self.b_identifiable,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SuccessCurve":
        b = doc.get("b")
        return cls(
            float(doc["a"]), math.nan if b is None else float(b), float(doc["c"]),
            float(doc["accuracy_d"]), float(doc.get("fit_residual", 0.0)),
            bool(doc.get("b_identifiable", b is not None)),
        )


def eval_curve(curve: SuccessCurve, n) -> float:
    """Modelled success probability after ``n`` shots, clamped to [0, 1]."""
    if not curve.b_identifiable:
        return min(1.0, max(0.0, curve.c))
    p = curve.a * -math.expm1(-curve.b * n) + curve.c
    return min(1.0, max(0.0, p))


def _solve_ac(f: np.ndarray, p: np.ndarray, w: np.ndarray) -> tuple[float, float, float]:
    """Weighted least squares of ``p ~ a f + c`` with a, c >= 0 and a + c <= 1.

    Two unknowns, so the constrained optimum is found by checking the interior
    solution and every active-set candidate on the boundary.
    """

    def ssr(a, c):
        r = p - a * f - c
        return float(w @ (r * r))

    sw = w.sum()
    fbar, pbar = (w @ f) / sw, (w @ p) / sw
    # centred sums keep c accurate when it is tiny next to p
    df, dp = f - fbar, p - pbar
    sdd = w @ (df * df)
    candidates = []
    if sdd > 0:
        a = (w @ (df * dp)) / sdd
        candidates.append((a, pbar - a * fbar))
    # a = 0
    candidates.append((0.0, pbar))
    # c = 0
    sff = w @ (f * f)
    if sff > 0:
        candidates.append(((w @ (f * p)) / sff, 0.0))
    # a + c = 1: p - 1 ~ a (f - 1)
    g = f - 1
    sgg = w @ (g * g)
    if sgg > 0:
        t = (w @ (g * (p - 1))) / sgg
        candidates.append((t, 1 - t))
    candidates += [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)]
    best = None
    for a, c in candidates:
        if a < 0 or c < 0 or a + c > 1:
            a, c = max(0.0, a), max(0.0, c)
            if a + c > 1:
                continue
        value = ssr(a, c)
        if best is None or value < best[2]:
            best = (a, c, value)
    return best


def _polish_b(b: float, n: np.ndarray, p: np.ndarray, w: np.ndarray, steps: int = 30) -> float:
    """Gauss-Newton steps in log b on the full model, kept only while they lower the residual.

    Golden section stalls near sqrt(machine epsilon) relative in a flat
    minimum; this brings exact or near-exact data to full precision.
    """
    lo, hi = B_GRID
    sw = np.sqrt(w)

    def ssr_at(bb):
        return _solve_ac(-np.expm1(-bb * n), p, w)[2]

    best = ssr_at(b)
    for _ in range(steps):
        f = -np.expm1(-b * n)
        a, c, _ = _solve_ac(f, p, w)
        if not (a > 0 and c >= 0 and a + c < 1):
            break
        resid = sw * (a * f + c - p)
        cols = [sw * f, sw * a * b * n * np.exp(-b * n)]
        if c > 0:
            cols.append(sw)
        step = np.linalg.lstsq(np.column_stack(cols), -resid, rcond=None)[0]
        trial = b * math.exp(float(np.clip(step[1], -1.0, 1.0)))
        if not lo <= trial <= hi:
            break
        value = ssr_at(trial)
        if not value < best:
            break
        b, best = trial, value
    return b


def fit_success_curve(samples: Sequence[SuccessSample], d: float, grid_points: int = 121) -> SuccessCurve:
    """Trial-weighted least-squares fit of the success model at accuracy ``d``.

    The model is linear in ``(a, c)`` for fixed ``b``, so ``b`` is found by a
    log-spaced scan followed by golden-section refinement around each local
    minimum of the scan, with ``(a, c)`` solved exactly at every ``b``.
    """
    if len({s.n for s in samples}) < 3:
        raise InsufficientDataError("need at least three distinct shot counts to fit")
    if any(s.trials < 1 for s in samples):
        raise InsufficientDataError("every sample needs at least one trial")
    n = np.array([s.n for s in samples], dtype=float)
    p = np.array([s.fraction(d) for s in samples])
    w = np.array([s.trials for s in samples], dtype=float)
    if not np.any(p > 0):
        return SuccessCurve(0.0, math.nan, 0.0, d, 0.0, b_identifiable=False)

    def profile(log_b):
        return _solve_ac(-np.expm1(-np.exp(log_b) * n), p, w)[2]

    grid = np.linspace(math.log(B_GRID[0]), math.log(B_GRID[1]), grid_points)
    values = np.array([profile(x) for x in grid])
    best_x, best_v = grid[np.argmin(values)], values.min()
    for i in range(grid_points):
        left, right = max(i - 1, 0), min(i + 1, grid_points - 1)
        if left == i or right == i:
            # local minimum at the scan edge: b sits on the boundary
            continue
        # plateaus (e.g. saturated data) have nothing to refine
        if not (values[i] < values[left] and values[i] < values[right]):
            continue
        res = minimize_scalar(
            profile, bracket=(grid[left], grid[i], grid[right]), method="golden",
            options={"xtol": 1e-12},
        )
        if res.fun < best_v and grid[0] <= res.x <= grid[-1]:
            best_x, best_v = res.x, res.fun
    b = _polish_b(math.exp(best_x), n, p, w)
    a, c, ssr = _solve_ac(-np.expm1(-b * n), p, w)
    return SuccessCurve(float(a), b, float(c), d, float(ssr / w.sum()), b_identifiable=bool(a > 0))
