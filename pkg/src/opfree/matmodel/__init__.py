"""Finite-``n`` operator-valued matrix models: entries, exact moments, sampling."""
from .entries import (
    KINDS,
    EntryModel,
    FiniteDiagonal,
    PureMomentOracle,
    entry_expectation,
    realize_diagonal,
    sample_matrix,
    scalar_factor,
    tuple_expectation,
)
from .exact import EXACT_MAX_M, ExactMoment, exact_moment
from .extended import cpm_lhs, cpm_rhs, cpm_rhs_unnormalized, verify_matrix_cpm
from .montecarlo import (
    SweepRow,
    convergence_sweep,
    decay_violations,
    empirical_mixed_moment,
    empirical_moments,
    trial_rng,
)

__all__ = [
    "KINDS",
    "EntryModel",
    "FiniteDiagonal",
    "PureMomentOracle",
    "entry_expectation",
    "realize_diagonal",
    "sample_matrix",
    "scalar_factor",
    "tuple_expectation",
    "EXACT_MAX_M",
    "ExactMoment",
    "exact_moment",
    "cpm_lhs",
    "cpm_rhs",
    "cpm_rhs_unnormalized",
    "verify_matrix_cpm",
    "SweepRow",
    "convergence_sweep",
    "decay_violations",
    "empirical_mixed_moment",
    "empirical_moments",
    "trial_rng",
]
