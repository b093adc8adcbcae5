class ValidationError(ValueError):
    """Bad input: wrong shape, out-of-range index, non-Hermitian matrix, ..."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or produced non-finite output."""
