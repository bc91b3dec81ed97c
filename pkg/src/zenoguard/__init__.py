"""Protecting a controlled subspace against leakage with strong outside couplings or decay."""

from .analyzer import bright_dark_rewrite, effective_hamiltonian, find_dark_states
from .closure import adjoint_generator, derive_rate_system
from .dynamics import expectations_of, integrate_master_equation, integrate_rate_system
from .models import LevelScheme, ModelParams, build_model, interaction_picture
from .operators import commutator, expand_in_basis, gellmann_basis
from .trajectories import dark_period_stats, run_ensemble, run_trajectory

__all__ = [
    "LevelScheme",
    "ModelParams",
    "adjoint_generator",
    "bright_dark_rewrite",
    "build_model",
    "commutator",
    "dark_period_stats",
    "derive_rate_system",
    "effective_hamiltonian",
    "expand_in_basis",
    "expectations_of",
    "find_dark_states",
    "gellmann_basis",
    "integrate_master_equation",
    "integrate_rate_system",
    "interaction_picture",
    "run_ensemble",
    "run_trajectory",
]
