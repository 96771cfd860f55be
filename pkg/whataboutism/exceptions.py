__all__ = [
    'WhataboutismException',
    'ValidationError',
    'OrderingViolation',
    'RangeViolation',
    'LengthMismatch',
    'MicrofoundationMismatch',
    'CbarTooSmall',
    'InvalidThreshold',
    'ScaleOutOfRange',
    'InvalidState',
    'TooFewEpisodes',
    'SeedMissing',
    'InvalidSweep',
    'NotInterior',
    'SafetyCapExceeded',
    'ConfigNotFound',
]


class WhataboutismException(Exception):
    """Base exception for all exceptions raised by whataboutism."""


class ValidationError(WhataboutismException, ValueError):
    """Exception raised when an input violates the model's restrictions.

    The ``field`` attribute names the offending input (for example ``g`` or
    ``lambda``) so that command-line users can find it in their config.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class OrderingViolation(ValidationError):
    """Exception raised when g is not strictly decreasing or b is not
    strictly increasing in the sensitivity level.
    """


class RangeViolation(ValidationError):
    """Exception raised when a parameter lies outside its open interval."""


class LengthMismatch(ValidationError):
    """Exception raised when a per-level array does not have length n."""


class MicrofoundationMismatch(ValidationError):
    """Exception raised when the condemnation-cost bound cbar is not
    consistent with lambda = 1 / (2 cbar).
    """


class CbarTooSmall(ValidationError):
    """Exception raised when cbar does not exceed the largest victim
    disutility bound b_n.
    """


class InvalidThreshold(ValidationError):
    """Exception raised when a breakdown threshold m* lies outside
    {M, ..., n+1}. Such profiles are not equilibria.
    """


class ScaleOutOfRange(ValidationError):
    """Exception raised when a polarization scale pushes g or b out of
    their admissible range.
    """


class InvalidState(ValidationError):
    """Exception raised when a state refers to an unknown camp or level."""


class TooFewEpisodes(ValidationError):
    """Exception raised when a Monte Carlo estimate is requested with fewer
    episodes than the statistical checks need.
    """


class SeedMissing(ValidationError):
    """Exception raised when a simulation is requested without a seed."""


class InvalidSweep(ValidationError):
    """Exception raised when a sweep specification is malformed."""


class NotInterior(WhataboutismException):
    """Exception raised when the marginal agent of a state is undefined
    because its cutoff is pinned at zero (norm breakdown).
    """


class SafetyCapExceeded(WhataboutismException, RuntimeError):
    """Exception raised when an episode runs past the stage safety cap.
    Note that this cannot happen with positive per-stage termination
    probability other than through a broken condemnation rule.
    """


class ConfigNotFound(WhataboutismException, FileNotFoundError):
    """Exception raised when a configuration, profile or sweep file
    does not exist.
    """
