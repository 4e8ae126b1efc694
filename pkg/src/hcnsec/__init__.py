"""Secrecy performance of multi-tier cellular networks with artificial noise.

Closed-form connection/secrecy probabilities and throughput (``analytic``),
a Poisson-point-process simulator to check them (``montecarlo``), and
parameter sweeps / access-threshold optimization (``optimizer``).
"""
from .errors import (
    BracketError,
    ConditioningError,
    ConfigError,
    ConvergenceError,
    DegenerateScenarioError,
    DispatchError,
    DomainError,
    HcnError,
    SimulationError,
)
from .model import (
    LAMBDA_1,
    DerivedConstants,
    NetworkConfig,
    TierParams,
    canonical_config,
    derive_constants,
    validate,
)

__version__ = "0.1.0"
