"""Exception hierarchy for dowsim."""


class DowsimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(DowsimError, ValueError):
    """Invalid configuration or arguments (CLI exit status 2)."""


class GridError(ConfigError):
    pass


class UnresolvableWidth(ConfigError):
    pass


class OutOfDomain(ConfigError):
    pass


class NonpositiveWidth(ConfigError):
    pass


class InvalidRank(ConfigError):
    pass


class EmptyInput(ConfigError):
    pass


class UnsortedEvents(ConfigError):
    pass


class ZeroField(DowsimError, ArithmeticError):
    """The field has (numerically) zero norm."""


class StepTooLarge(DowsimError):
    """Potential phase per step exceeds the wrap guard."""


class EnergyAtOrAboveThreshold(DowsimError):
    """A deformation was requested for an energy that must collapse the field."""


class TargetUnreachable(DowsimError):
    """An envelope cannot produce the requested width."""


class TooFewCounts(DowsimError):
    pass
