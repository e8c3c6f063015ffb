"""Exception types with CLI exit-code semantics attached."""

from __future__ import annotations


class WavetailError(Exception):
    """Base class; carries a machine-readable code for run manifests."""

    code = "ERROR"
    exit_status = 1


class ParameterError(WavetailError, ValueError):
    """Contract violation: argument outside its documented range."""

    code = "PARAMETER"
    exit_status = 2


class ConfigError(WavetailError, ValueError):
    """Malformed or out-of-range run configuration."""

    code = "CONFIG"
    exit_status = 2


class HypothesisError(WavetailError):
    """Model violates the decay-theorem hypotheses (range, resonance, bound states)."""

    code = "HYPOTHESIS_RANGE"
    exit_status = 3


class ConvergenceError(WavetailError):
    """Iterative solver failed to converge; diagnostics attached."""

    code = "NO_CONVERGENCE"
    exit_status = 4

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class GridRangeError(WavetailError):
    """Requested evaluation point outside the solved grid."""

    code = "GRID_RANGE"
    exit_status = 4


class RegimeError(WavetailError):
    """Requested lambda outside the validity window of the chosen representation."""

    code = "REGIME"
    exit_status = 4


class SingularKernelError(WavetailError):
    """Wronskian below the resonance floor; Green's function not evaluable."""

    code = "SINGULAR_KERNEL"
    exit_status = 3


class SizingError(WavetailError):
    """Requested discretization exceeds the memory budget."""

    code = "SIZING"
    exit_status = 2

    def __init__(self, message, suggested_dx=None):
        super().__init__(message)
        self.suggested_dx = suggested_dx


class OscillationError(WavetailError):
    """Series oscillates through zero where a monotone tail was required."""

    code = "OSCILLATION"
    exit_status = 4
