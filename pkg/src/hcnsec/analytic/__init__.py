"""Closed-form performance expressions: connection, secrecy and throughput."""
from .connection import (
    connection_probability_alzer_bounds,
    connection_probability_general,
    connection_probability_il,
)
from .laplace import ToeplitzTheta, build_theta, g_entries, upsilon_k
from .secrecy import (
    SecrecyBounds,
    secrecy_probability,
    secrecy_probability_alpha4,
    secrecy_probability_general,
    secrecy_probability_il,
)
from .throughput import (
    ThroughputReport,
    TierRates,
    large_antenna_secrecy,
    secrecy_throughput,
    solve_beta_e,
    solve_beta_t,
)

__all__ = [
    "ToeplitzTheta", "build_theta", "g_entries", "upsilon_k",
    "connection_probability_general", "connection_probability_il",
    "connection_probability_alzer_bounds",
    "SecrecyBounds", "secrecy_probability", "secrecy_probability_general",
    "secrecy_probability_alpha4", "secrecy_probability_il",
    "ThroughputReport", "TierRates", "secrecy_throughput", "solve_beta_t", "solve_beta_e",
    "large_antenna_secrecy",
]
