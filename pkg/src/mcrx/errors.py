"""Exception hierarchy shared by all mcrx modules.

The CLI maps these onto exit codes: :class:`ConfigError` -> 2,
:class:`NumericalFailure` -> 3, :class:`FormatError` / ``OSError`` -> 4.
"""


class McrxError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(McrxError, ValueError):
    """Invalid configuration value or file."""


class NumericalFailure(McrxError, ArithmeticError):
    """A computation could not be carried out reliably."""


class SingularMatrixError(NumericalFailure):
    """Pivot magnitude fell below the singularity threshold."""


class IllConditionedMatrixError(NumericalFailure):
    """A constructed matrix is too ill-conditioned to be inverted."""


class SingularChannelError(NumericalFailure):
    """A channel frequency bin is (numerically) zero."""

    def __init__(self, bin_index, magnitude):
        self.bin_index = int(bin_index)
        self.magnitude = float(magnitude)
        super().__init__(
            f"channel eigenvalue at bin {self.bin_index} has magnitude "
            f"{self.magnitude:.3e}; zero-forcing is undefined"
        )


class NonFiniteLossError(NumericalFailure):
    """Training produced a NaN or infinite loss."""


class FormatError(McrxError, IOError):
    """A binary artifact (checkpoint or dataset) is malformed."""


class CorruptCheckpointError(FormatError):
    pass


class CorruptDatasetError(FormatError):
    pass
