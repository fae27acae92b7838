"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid model or query parameters (domain, range, or size violations)."""


class NumericError(RuntimeError):
    """A numerical routine failed to reach its required accuracy."""
