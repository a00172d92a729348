"""Exception and warning types shared across the package."""


class CodecError(Exception):
    """Base class for coding errors raised by ilans."""


class FormatError(CodecError):
    """Container or payload bytes do not match the documented wire format."""


class TruncatedStreamError(CodecError):
    """The digit stream ran out while a decoder still needed input."""


class NotBUniqueError(CodecError):
    """A coding function violates the renormalization contract."""


class UnencodableSymbolError(CodecError):
    """A symbol cannot be coded: zero frequency / empty precursor set."""


class UnsupportedVariantError(CodecError):
    """The operation does not support these coder parameters."""


class ScheduleError(CodecError):
    """A mux schedule does not match the streams it is replayed against."""


class TrailingGarbageWarning(UserWarning):
    """Unread digits remained after a complete decode (possible padding)."""
