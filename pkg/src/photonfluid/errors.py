"""Exception types shared across the toolkit.

The CLI maps these onto process exit codes: configuration problems → 2,
numerical failures → 3, physics gates (instability, Euclidean signature) → 4.
"""


class PhotonFluidError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(PhotonFluidError):
    """Bad or incomplete run configuration.  Carries a line number when
    the problem can be traced to a config-file line."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalError(PhotonFluidError):
    """Numerical failure: NaN/Inf, non-convergence, bad step size."""


class StepSizeError(NumericalError):
    """Time step violates a stability/accuracy precondition."""


class ConvergenceError(NumericalError):
    """Iteration failed to converge; message carries the last residual."""


class FieldFormatError(PhotonFluidError):
    """Malformed field binary (bad magic, truncation, checksum, endianness)."""


class PhysicsGateError(PhotonFluidError):
    """A physics precondition fails (unstable operating point, Euclidean
    signature where Lorentzian is required); the stage must be skipped."""
