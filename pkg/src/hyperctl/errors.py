"""Exception hierarchy; the CLI maps these onto exit codes."""


class HyperctlError(Exception):
    """Base class for every error raised by this package."""


class DomainError(HyperctlError, ValueError):
    """Invalid argument: out-of-range node, shape mismatch, mismatched sizes."""


class ConfigError(HyperctlError, ValueError):
    """Invalid configuration or parameter combination."""


class ParseError(ConfigError):
    """Malformed input file."""

    def __init__(self, message: str, lineno: int = 0):
        super().__init__(message)
        self.lineno = lineno


class NumericalError(HyperctlError, ArithmeticError):
    """Numerical failure: blow-up, non-convergence, eigen-solver failure."""


class NotFoundError(NumericalError):
    """An equilibrium search did not converge."""


class BlowUpError(NumericalError):
    """Integration produced a non-finite or runaway state."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class UnsupportedError(HyperctlError):
    """Request exceeds an explicit size guard."""


class PipelineError(HyperctlError):
    """A pipeline phase failed; ``phase`` names it and ``__cause__`` holds the reason."""

    def __init__(self, phase: str, message: str):
        super().__init__(f"phase '{phase}' failed: {message}")
        self.phase = phase
