"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Raised when tensor shapes or vector lengths are incompatible."""


class GeometryError(ValueError):
    """Raised when an input violates a manifold or tangent-space precondition."""


class ContractError(RuntimeError):
    """Raised when an API is used outside its calling contract."""


class ConfigError(ValueError):
    """Raised for invalid configuration values or files."""


class FormatError(ValueError):
    """Raised when a binary file cannot be decoded.

    The byte offset at which decoding failed is kept in ``offset``.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset
