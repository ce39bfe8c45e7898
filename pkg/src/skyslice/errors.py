"""Exception hierarchy shared by every simulator module."""


class SkysliceError(Exception):
    """Base class for all simulator errors."""


class ConfigurationError(SkysliceError, ValueError):
    """Invalid or inconsistent configuration input."""


class DegenerateGeometryError(SkysliceError, ValueError):
    """Two entities coincide, so an angle or path loss is undefined."""


class DomainError(SkysliceError, ValueError):
    """A numeric argument lies outside the function's domain."""


class ContractViolation(SkysliceError, ValueError):
    """A precondition of an operation was not met by the caller."""


class EmptyCandidateError(SkysliceError, ValueError):
    """An eVTOL has no (BS, slice) candidates to rank."""


class StaleCacheError(SkysliceError, RuntimeError):
    """Backward pass requested without a matching forward pass."""


class BufferNotReady(SkysliceError, RuntimeError):
    """Replay buffer holds fewer transitions than the requested batch."""
