"""Exception types shared across the pipeline, mapped to CLI exit codes."""


class ClaimscopeError(Exception):
    """Base class for all package errors."""


class ConfigError(ClaimscopeError):
    """Invalid configuration or input-file schema problem. Exit code 2."""


class PreconditionError(ClaimscopeError):
    """Missing or stale upstream artifact for a requested stage. Exit code 3."""


class StageError(ClaimscopeError):
    """A pipeline stage failed while executing. Exit code 4."""


class InputError(ClaimscopeError):
    """Malformed in-memory input to an operation (bad shapes, duplicates, ...)."""


class ConsistencyError(ClaimscopeError):
    """Internal invariant violated; indicates a bug upstream, not bad user data."""
