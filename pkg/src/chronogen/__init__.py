"""Relational emergence of time in finite-dimensional bipartite quantum systems."""

from .dynamics import ComparisonReport, SystemTrajectory, compare, integrate_tdse, propagate_free, tdse_residual
from .estimator import RelationalClock
from .exceptions import (
    CapacityError,
    ChronogenError,
    ConfigParseError,
    ConfigValidationError,
    ReadoutRangeError,
    ReadoutUnusableError,
    SingularOverlapError,
    ValidationError,
    VerificationError,
)
from .hilbert import EighResult, eigh, expm_hermitian, kron, project_clock
from .model import HamiltonianSpec, assemble_global, paper_example_spec, pauli, random_spec
from .relational import (
    ClockTrajectory,
    EffectivePotentialSample,
    accumulate_phase,
    build_clock_trajectory,
    conditional_state,
    effective_energy,
    effective_potential,
    evolve_clock,
)
from .readout import expectation_curve, invert_readout, resolution_spectrum
from .scenarios import generate_solvable, run_paper_example
from .spectral import Eigenspace, GlobalEigenstate, eigenspaces, invariance_residual, schmidt_rank, select_state

__version__ = "0.1.0"
