"""Privacy-utility trade-offs through principal inertia components."""

__version__ = "0.1.0"

from .probspace import Channel, JointPmf, ValidationError, compose, marginals  # noqa: E402
from .pic import PicDecomposition, chi2, chi2_via_trace, decompose, delta  # noqa: E402
from .putbounds import put_lower_bound, put_upper_bound, high_privacy_mechanism  # noqa: E402
from .design import DesignProblem, DesignSolution, SolverError, solve, verify_solution  # noqa: E402
from .mmsebounds import CorrelationSpec, b_m, l_n, mmse_lower_bound, parity_mmse  # noqa: E402
from .robustness import UNBOUNDED, chi2_gap_bound, monte_carlo_validate, sample_envelope  # noqa: E402

__all__ = [
    "Channel", "JointPmf", "ValidationError", "compose", "marginals",
    "PicDecomposition", "chi2", "chi2_via_trace", "decompose", "delta",
    "put_lower_bound", "put_upper_bound", "high_privacy_mechanism",
    "DesignProblem", "DesignSolution", "SolverError", "solve", "verify_solution",
    "CorrelationSpec", "b_m", "l_n", "mmse_lower_bound", "parity_mmse",
    "UNBOUNDED", "chi2_gap_bound", "monte_carlo_validate", "sample_envelope",
]
