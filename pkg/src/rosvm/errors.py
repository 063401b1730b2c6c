class RosvmError(Exception):
    """Base class for errors raised by rosvm."""


class InvalidExponentError(RosvmError, ValueError):
    pass


class UnsupportedVariantError(RosvmError, ValueError):
    pass


class UnsupportedNormError(RosvmError, ValueError):
    pass


class DegenerateMapError(RosvmError, ValueError):
    pass


class KinkProximityError(RosvmError, ValueError):
    pass


class DivergedTrainingError(RosvmError, ArithmeticError):
    pass


class DataFormatError(RosvmError, ValueError):
    """Malformed input data. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ModelFileError(RosvmError, ValueError):
    pass


class CorruptModelError(ModelFileError):
    pass


class ModelVersionError(ModelFileError):
    pass
