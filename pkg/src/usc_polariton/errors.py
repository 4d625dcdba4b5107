"""Exception and warning types raised by the solvers."""


class PolaritonError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameters(PolaritonError, ValueError):
    pass


class DegenerateSpectrum(PolaritonError):
    """Lower and upper polariton frequencies coincide."""


class NonPositiveMode(PolaritonError):
    """The Bogoliubov problem has complex eigenvalues (unstable Hamiltonian)."""


class SingularFrequency(PolaritonError, ValueError):
    """A kernel transform was requested at a principal-value endpoint."""


class StepUnstable(PolaritonError):
    pass


class DegenerateSteadyState(PolaritonError):
    pass


class NotStationary(PolaritonError):
    pass


class BranchTrackingLost(PolaritonError):
    pass


class GridTooCoarse(PolaritonError):
    pass


class ConfigError(PolaritonError):
    """Scenario configuration is invalid; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class TruncationWarning(UserWarning):
    """A Bohr frequency of the truncated system lies outside the kernel support."""
