class CollageError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(CollageError, ValueError):
    pass


class CoercivityError(CollageError, ArithmeticError):
    """Diffusivity is not bounded away from zero, so the forward problem is ill-posed."""


class NumericError(CollageError, ArithmeticError):
    pass


class UnsupportedGradientError(CollageError, ValueError):
    pass


class ObservationFormatError(CollageError, ValueError):
    """Observation file could not be parsed."""


class UnsortedObservationsError(ObservationFormatError):
    pass


class ObservationOutOfIntervalError(ObservationFormatError):
    pass


class InfeasibleStartError(CollageError, ValueError):
    pass
