"""Exception hierarchy shared by all modules."""


class RGDAError(Exception):
    """Base class for package errors."""


class ShapeError(RGDAError, ValueError):
    """Array shape does not match the manifold or set."""


class DomainError(RGDAError, ValueError):
    """Input outside the domain of an operation (e.g. non-tangent vector)."""


class NumericError(RGDAError, ArithmeticError):
    """Non-finite input or a numeric blowup during a run."""


class ConfigError(RGDAError, ValueError):
    """Invalid problem, solver or experiment configuration."""


class ContractError(RGDAError, RuntimeError):
    """Caller violated an internal contract (e.g. mismatched batches)."""


class UnsupportedError(RGDAError, NotImplementedError):
    """Operation needs a capability the problem does not provide."""
