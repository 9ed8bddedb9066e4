"""Shot-budget meta-optimization for variational quantum eigensolvers.

Benchmark a shot-limited SPSA-driven VQE, fit its success-probability curve,
and split a fixed shot budget among repetitions, per-run optimization shots
and final-estimation shots.
"""

__version__ = "0.1.0"

from .bench import (
    ACCURACY_LEVELS,
    CHEMICAL_PRECISION,
    SuccessCurve,
    SuccessSample,
    TrialRecord,
    aggregate_samples,
    eval_curve,
    fit_success_curve,
    run_benchmark,
    run_trial,
    success_fraction,
)
from .campaign import CampaignResult, run_campaign
from .errors import InfeasibleBudgetError, InsufficientDataError, InvalidArgumentError
from .estimator import EnergyEstimate, allocate_shots, estimate_energy, expectation_from_counts, final_estimate
from .metaplan import MetaPlan, optimize_plan, probability_surface, reliability_factor, reliable_probability, repeat_success
from .pauli import Hamiltonian, accuracy_for_shots, exact_spectrum, ground_state, h2_hamiltonian, shots_for_accuracy
from .qsim import basis_probabilities, exact_expectation, prepare_ansatz, sample_counts
from .spsa import SpsaConfig, SpsaResult, gain_sequences, spsa_minimize
