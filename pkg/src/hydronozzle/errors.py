"""Exception and warning types raised by the solver suite."""


class HydroNozzleError(Exception):
    """Base class for all solver errors."""


class NonPositiveProfile(HydroNozzleError):
    pass


class SignConditionViolated(UserWarning):
    """Incoming profile has (v1)'(0) > 0 or (v1)'(1) < 0.

    Warning-grade: the extended solver still runs but the bounds
    0 <= phi <= c are no longer certified.
    """


class OutOfRange(HydroNozzleError, ValueError):
    pass


class MissingSecondDerivative(HydroNozzleError):
    pass


class DegenerateWidth(HydroNozzleError):
    pass


class OutsideNozzle(HydroNozzleError, ValueError):
    pass


class NoConvergence(HydroNozzleError):
    pass


class BracketFailure(HydroNozzleError):
    pass


class InversionFailure(HydroNozzleError):
    pass


class NonPositiveV1(HydroNozzleError):
    pass


class OutsideInterior(HydroNozzleError, ValueError):
    pass


class Stagnation(HydroNozzleError):
    pass


class ConfigError(HydroNozzleError, ValueError):
    pass
