"""Exception types shared across the package."""


class FiberSdcError(Exception):
    """Base class for package errors."""


class ConfigError(FiberSdcError, ValueError):
    """Raised for invalid configuration values or unparseable config files."""


class StateError(FiberSdcError, ValueError):
    """Raised when a two-photon state violates a function's input contract."""


class ProtocolError(FiberSdcError, RuntimeError):
    """Raised when a session transcript violates the framing protocol."""
