"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """An argument lies outside the physically meaningful domain."""


class ThresholdError(ValueError):
    """The injection is at or above the parametric-oscillation threshold."""


class PoleError(ValueError):
    """The sensitivity estimate sits on a pole of the error-propagation formula."""


class ConvergenceError(RuntimeError):
    """The moment integrator reached its time horizon without settling."""


class DivergenceError(RuntimeError):
    """A tracked moment grew without bound during integration."""


class ConfigError(ValueError):
    """A run configuration is malformed or inconsistent."""
