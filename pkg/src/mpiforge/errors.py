"""Exception types shared across the toolkit."""


class MpiForgeError(Exception):
    """Base class for all toolkit errors."""


class InvalidRangeError(MpiForgeError, ValueError):
    """A scalar argument is outside its documented range."""


class SingularHomographyError(MpiForgeError):
    """A plane/camera configuration induced a non-invertible mapping."""


class ShapeMismatchError(MpiForgeError, ValueError):
    """Array arguments have inconsistent dimensions."""


class EmptyInputError(MpiForgeError, ValueError):
    """An operation requiring at least one element received none."""


class NumericError(MpiForgeError, ValueError):
    """A numeric argument contains NaN or infinity where finite values are required."""


class MembershipError(MpiForgeError, ValueError):
    """A depth was referenced that is not part of the volume it should belong to."""


class ValidationError(MpiForgeError, ValueError):
    """Structured input (scene config, camera, volume) violates its contract."""


class InsufficientViewsError(ValidationError):
    """A scene provides fewer input views than the pipeline requires."""


class FormatError(MpiForgeError):
    """A serialized container is malformed.

    ``offset`` is the byte position at which decoding failed.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset
