"""Exception types raised across the package."""


class PabeamError(Exception):
    """Base class for all package errors."""


class OutOfRange(PabeamError):
    """A fractional delay falls outside the recording."""


class NonFinite(PabeamError):
    pass


class ZeroSignal(PabeamError):
    pass


class AllZeroImage(PabeamError):
    pass


class SubarrayTooLong(PabeamError):
    pass


class ZeroTrace(PabeamError):
    """Covariance trace is zero, so trace-relative loading is undefined."""


class FactorizationFailed(PabeamError):
    pass


class DurationTooShort(PabeamError):
    def __init__(self, required: float, duration: float):
        self.required = required
        self.duration = duration
        super().__init__(
            f"recording duration {duration:.6g} s is shorter than the "
            f"required minimum {required:.6g} s"
        )


class OutOfExtent(PabeamError):
    pass


class NoCrossing(PabeamError):
    """Profile never drops below half maximum on one side of the peak."""


class ConstantImage(PabeamError):
    pass


class ConfigError(PabeamError):
    pass


class FormatError(PabeamError):
    """Malformed channel-data or raster file."""


class GridMismatch(PabeamError):
    pass
