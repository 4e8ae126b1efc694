"""Exception hierarchy shared by every hcnsec module."""


class HcnError(Exception):
    """Base class for all errors raised by hcnsec."""


class DomainError(HcnError, ValueError):
    """An argument lies outside the domain where a function is defined."""


class ConvergenceError(HcnError, ArithmeticError):
    """A series, iteration or quadrature failed to reach its tolerance."""


class ConfigError(HcnError, ValueError):
    """A scenario configuration violates one or more invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class DispatchError(HcnError, ValueError):
    """A closed form was requested outside the scenario it applies to."""


class BracketError(HcnError, ValueError):
    """A root is not bracketed by the search interval."""


class DegenerateScenarioError(HcnError, ArithmeticError):
    """The scenario makes a quantity undefined (e.g. no artificial noise anywhere)."""


class SimulationError(HcnError, RuntimeError):
    """Monte Carlo simulation could not be carried out as requested."""


class ConditioningError(SimulationError):
    """Rejection sampling almost never produced the requested tier."""
