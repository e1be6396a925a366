"""Exception hierarchy shared by every module of the package."""


class BicaError(Exception):
    """Base class for all errors raised by :mod:`bica`."""


class InvalidData(BicaError, ValueError):
    pass


class InvalidDimension(BicaError, ValueError):
    pass


class RankDeficient(BicaError, ValueError):
    pass


class InvalidGrid(BicaError, ValueError):
    pass


class DegenerateSample(BicaError, ValueError):
    pass


class InvalidDf(BicaError, ValueError):
    pass


class CalibrationFailed(BicaError, RuntimeError):
    pass


class ModelDiverged(BicaError, RuntimeError):
    """A density model produced ``f`` above the overflow clamp.

    ``component`` is filled in by the separation driver so callers can tell
    which estimated source blew up.
    """

    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component

    def __str__(self):
        msg = super().__str__()
        if self.component is not None:
            msg = f"component {self.component}: {msg}"
        return msg


class DegenerateUpdate(BicaError, RuntimeError):
    pass


class DegenerateSignal(BicaError, ValueError):
    pass


class InvalidSpec(BicaError, ValueError):
    pass
