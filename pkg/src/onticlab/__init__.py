"""Deterministic ontological models of a qubit pair and bounds on their intermediate-level averages."""

__version__ = "0.1.0"

from .quantum import (
    Party,
    Setting,
    TwoQubitState,
    X_AXIS,
    Z_AXIS,
    correlation_qm,
    local_expectation,
    make_state,
    oracle_expectation,
)
from .sphere import (
    Cap,
    Estimate,
    OntPoint,
    RngStream,
    azimuthal_cap_fraction,
    cap_overlap_fraction,
    sample_mu_given_tau,
    sample_uniform,
)
from .models import (
    BellGeneralizedModel,
    FactorizedLocalModel,
    InvalidState,
    NoSolution,
    SaturatingSigmaZModel,
    chi,
    estimate_correlation,
    estimate_local_average,
    xi,
)
from .intermediate import (
    DeltaResult,
    IntermediateAverage,
    PrecondFailed,
    analytic_intermediate,
    chain_step_check,
    check_nonsignalling,
    delta,
    f_analytic,
    f_mc,
    g_analytic,
    intermediate_correlation,
    tau_average,
)
from .bound import BoundReport, Chain, bound_rhs, minimize_omega, omega, scan_bound, verify_constraint
