"""Split a shot budget between repetitions, optimization and final estimation.

A plan runs ``r = floor(B / (n + m))`` independent optimizations of ``n`` shots
each, estimates every result with ``m`` shots, and keeps the lowest estimate.
Its value is the reliable probability ``gamma * (1 - (1 - p_s(n))**r)``, where
``gamma`` is the two-sided normal confidence that an estimate with standard
error ``accuracy_for_shots(m)`` lands within ``d`` of the truth.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import erf

from .bench import SuccessCurve, eval_curve
from .errors import InfeasibleBudgetError, InvalidArgumentError
from .pauli import Hamiltonian, accuracy_for_shots

__all__ = [
    "MetaPlan",
    "repeat_success",
    "reliability_factor",
    "reliable_probability",
    "log_grid",
    "plan_grid",
    "optimize_plan",
    "probability_surface",
    "surface_csv",
    "frontier",
    "frontier_csv",
]

M_POINTS = 200
N_POINTS = 400


@dataclass(frozen=True)
class MetaPlan:
    n: int
    m: int
    r: int
    B: int
    d: float
    p_s: float
    P_max: float
    sigma: float
    Z: float
    gamma: float
    P_reliable: float
    no_signal: bool = False

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, doc: dict) -> "MetaPlan":
        return cls(**{k: doc[k] for k in cls.__dataclass_fields__ if k in doc})


def repeat_success(p_s: float, r: int) -> float:
    """Probability that at least one of ``r`` independent runs succeeds."""
    return 1.0 - (1.0 - p_s) ** r


def reliability_factor(h: Hamiltonian, m: int, d: float) -> tuple[float, float, float]:
    """``(sigma, Z, gamma)`` for final estimation with ``m`` shots at accuracy ``d``."""
    if not d > 0:
        raise InvalidArgumentError(f"accuracy must be positive, got {d!r}")
    sigma = accuracy_for_shots(h, m)
    z = d / sigma
    return sigma, z, math.erf(z / math.sqrt(2))


def _check_budget(h: Hamiltonian, B: int) -> int:
    groups = len(h.groups)
    if B < 2 * groups:
        raise InfeasibleBudgetError(f"budget {B} is below the minimum of {2 * groups} shots")
    return groups


def reliable_probability(
    curve: SuccessCurve, h: Hamiltonian, B: int, d: float, n: int, m: int
) -> tuple[int, float, float]:
    """``(r, P, P_reliable)`` for ``n`` optimization and ``m`` estimation shots per repetition."""
    if n < 1:
        raise InvalidArgumentError(f"n must be positive, got {n}")
    if m < len(h.groups):
        raise InvalidArgumentError(f"m must be at least {len(h.groups)}, got {m}")
    if n + m > B:
        raise InfeasibleBudgetError(f"n + m = {n + m} exceeds the budget {B}")
    r = B // (n + m)
    P = repeat_success(eval_curve(curve, n), r)
    return r, P, reliability_factor(h, m, d)[2] * P


def log_grid(lo: int, hi: int, points: int) -> np.ndarray:
    """Up to ``points`` distinct log-spaced integers covering ``[lo, hi]``."""
    if hi < lo:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.rint(np.geomspace(lo, hi, points)).astype(np.int64))


def _curve_array(curve: SuccessCurve, n: np.ndarray) -> np.ndarray:
    if not curve.b_identifiable:
        return np.full(n.shape, min(1.0, max(0.0, curve.c)))
    return np.clip(curve.a * -np.expm1(-curve.b * n) + curve.c, 0.0, 1.0)


def plan_grid(h: Hamiltonian, B: int, m_points: int = M_POINTS, n_points: int = N_POINTS):
    """The search grid: list of ``(m, n_values)`` pairs, m ascending."""
    groups = _check_budget(h, B)
    return [(int(m), log_grid(1, B - int(m), n_points)) for m in log_grid(groups, B - 1, m_points)]


def optimize_plan(
    curve: SuccessCurve,
    h: Hamiltonian,
    B: int,
    d: float,
    m_points: int = M_POINTS,
    n_points: int = N_POINTS,
) -> MetaPlan:
    """Exhaustive grid search for the plan with the highest reliable probability.

    Ties go to the smaller ``m`` and then the smaller ``n``.
    """
    if not d > 0:
        raise InvalidArgumentError(f"accuracy must be positive, got {d!r}")
    best = None
    for m, ns in plan_grid(h, B, m_points, n_points):
        gamma = reliability_factor(h, m, d)[2]
        r = B // (ns + m)
        P = 1.0 - (1.0 - _curve_array(curve, ns.astype(float))) ** r
        rel = gamma * P
        # argmax returns the first (smallest n) maximum
        k = int(np.argmax(rel))
        if best is None or rel[k] > best[0]:
            best = (float(rel[k]), m, int(ns[k]))
    _, m, n = best
    return _assemble(curve, h, B, d, n, m)


def _assemble(curve, h, B, d, n, m) -> MetaPlan:
    r, P, rel = reliable_probability(curve, h, B, d, n, m)
    sigma, z, gamma = reliability_factor(h, m, d)
    return MetaPlan(
        n=n, m=m, r=r, B=B, d=d, p_s=float(eval_curve(curve, n)), P_max=float(P),
        sigma=sigma, Z=z, gamma=gamma, P_reliable=float(rel), no_signal=bool(curve.no_signal),
    )


def probability_surface(
    curve: SuccessCurve,
    h: Hamiltonian,
    B: int,
    d: float,
    r_max: Optional[int] = None,
    m_points: int = M_POINTS,
) -> list[dict]:
    """Reliable probability over repetitions ``r`` and estimation shots ``m``.

    For each cell ``n = floor(B / r) - m``; cells with ``n < 1`` are returned
    with ``feasible=False`` and zero probabilities. Rows are ordered by ``r``
    then ``m``.
    """
    groups = _check_budget(h, B)
    if r_max is None:
        r_max = min(B // (groups + 1), 30)
    if r_max < 1:
        raise InvalidArgumentError("r_max must be at least 1")
    ms = log_grid(groups, B - 1, m_points)
    sigmas = np.sqrt(h.total_weight**2 / ms)
    gammas = erf(d / sigmas / math.sqrt(2))
    rows = []
    for r in range(1, r_max + 1):
        ns = B // r - ms
        feasible = ns >= 1
        p = _curve_array(curve, np.maximum(ns, 1).astype(float))
        P = np.where(feasible, 1.0 - (1.0 - p) ** r, 0.0)
        rel = np.where(feasible, gammas * P, 0.0)
        for m, n, ok, pp, g, pr in zip(ms, ns, feasible, P, gammas, rel):
            rows.append({
                "r": r, "m": int(m), "n": int(n), "P": float(pp),
                "gamma": float(g), "P_reliable": float(pr), "feasible": bool(ok),
            })
    return rows


SURFACE_COLUMNS = ("r", "m", "n", "P", "gamma", "P_reliable")
FRONTIER_COLUMNS = ("B", "d", "P_reliable", "n", "m", "r")


def _csv(rows, columns, header_comment: Optional[str]) -> str:
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in columns])
    return buf.getvalue()


def surface_csv(rows: Sequence[dict], header_comment: Optional[str] = None) -> str:
    """CSV with columns ``r,m,n,P,gamma,P_reliable``; infeasible cells are omitted."""
    return _csv([row for row in rows if row["feasible"]], SURFACE_COLUMNS, header_comment)


def frontier(
    curve_for: "callable", h: Hamiltonian, budgets: Sequence[int], precisions: Sequence[float]
) -> list[dict]:
    """Optimal plan for every ``(B, d)`` pair.

    ``curve_for(d)`` supplies the success curve fitted at accuracy ``d``.
    """
    rows = []
    for B in budgets:
        for d in precisions:
            plan = optimize_plan(curve_for(d), h, int(B), float(d))
            rows.append({"B": plan.B, "d": plan.d, "P_reliable": plan.P_reliable,
                         "n": plan.n, "m": plan.m, "r": plan.r})
    return rows


def frontier_csv(rows: Sequence[dict], header_comment: Optional[str] = None) -> str:
    return _csv(rows, FRONTIER_COLUMNS, header_comment)
