"""Exact and simulated transient customer-count distributions for discrete-time D-BMAP/G/inf queues."""
from .arrival import (
    DBmapModel,
    derivative_matrix_at_one,
    eval_pgf_matrix,
    from_bernoulli,
    from_matrices,
    from_mmbp,
    from_modulated_binomial,
    validate,
)
from .exact import (
    StationaryNotConverged,
    TransientResult,
    distribution,
    factorial_moment_leibniz,
    factorial_moments_from_pgf,
    mean_variance_closed,
    mminf_closed_form,
    mminf_moments,
    mminf_recursion,
    solve,
    stationary_distribution,
    transient_pgf,
)
from .poly import PgfVector, Poly
from .service import Deterministic, ExplicitPmf, Geometric, ServiceLaw, ShiftedPoisson

__version__ = "0.1.0"
