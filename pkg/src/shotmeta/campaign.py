"""Execute a meta-plan: repeated optimizations, final estimation, selection."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bench import TrialRecord, derive_seed, run_trial
from .errors import InfeasibleBudgetError
from .estimator import EnergyEstimate, final_estimate
from .metaplan import MetaPlan
from .pauli import Hamiltonian
from .spsa import SpsaConfig, shots_per_eval_for_budget

__all__ = ["CampaignResult", "campaign_config", "run_campaign", "select_best"]


@dataclass
class CampaignResult:
    plan: MetaPlan
    runs: list[tuple[TrialRecord, EnergyEstimate]]
    selected_index: int
    selected_energy: float
    selected_true_energy: float
    total_shots_spent: int

    def to_json(self, timestamps: bool = True) -> dict:
        runs = []
        for rec, est in self.runs:
            doc = rec.to_json()
            if not timestamps:
                doc.pop("timestamp")
            # aborted runs have an infinite estimate, which JSON cannot carry
            runs.append({"trial": doc, "final_estimate": est.to_json() if math.isfinite(est.value) else None})
        return {
            "plan": self.plan.to_json(),
            "runs": runs,
            "selected_index": self.selected_index,
            "selected_energy": self.selected_energy if math.isfinite(self.selected_energy) else None,
            "selected_true_energy": (
                self.selected_true_energy if math.isfinite(self.selected_true_energy) else None
            ),
            "total_shots_spent": self.total_shots_spent,
        }


def campaign_config(plan: MetaPlan, h: Hamiltonian, config: SpsaConfig) -> SpsaConfig:
    """``config`` with ``shots_per_eval`` set to the most the plan's ``n`` allows."""
    spe = shots_per_eval_for_budget(config, plan.n)
    if spe < len(h.groups):
        raise InfeasibleBudgetError(
            f"n = {plan.n} shots cannot fund {config.maxiter} iterations at "
            f"{len(h.groups)} shots per evaluation"
        )
    return config.replace(shots_per_eval=spe)


def select_best(estimates) -> int:
    """Index of the lowest estimate; the first one wins ties."""
    values = [e.value for e in estimates]
    return int(np.argmin(values))


def _campaign_run(args):
    config, h, m, trial_seed, estimate_seed = args
    rec = run_trial(config, h, trial_seed)
    if rec.aborted:
        return rec, EnergyEstimate(math.inf, 0, None)
    est = final_estimate(rec.final_params, h, m, np.random.default_rng(estimate_seed))
    return rec, est


def run_campaign(
    plan: MetaPlan,
    h: Hamiltonian,
    master_seed: int,
    config: SpsaConfig = SpsaConfig(),
    workers: int = 1,
) -> CampaignResult:
    """Run ``plan.r`` optimizations of ``plan.n`` shots, estimate each with ``plan.m`` shots,
    and select the run with the lowest estimate.

    Run ``i`` seeds its optimizer with ``derive_seed(master_seed, i, 0)`` and its
    final estimation with ``derive_seed(master_seed, i, 1)``.
    """
    config = campaign_config(plan, h, config)
    jobs = [
        (config, h, plan.m, derive_seed(master_seed, i, 0), derive_seed(master_seed, i, 1))
        for i in range(plan.r)
    ]
    if workers <= 1:
        runs = [_campaign_run(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_campaign_run, jobs))
    best = select_best([est for _, est in runs])
    spent = sum(rec.shots_used + est.shots_used for rec, est in runs)
    return CampaignResult(
        plan=plan,
        runs=runs,
        selected_index=best,
        selected_energy=runs[best][1].value,
        selected_true_energy=runs[best][0].true_energy,
        total_shots_spent=spent,
    )
