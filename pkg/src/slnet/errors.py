"""Exception types shared across the package."""


class SlnetError(Exception):
    """Base class for all package errors."""


class ParameterError(SlnetError, ValueError):
    """A parameter lies outside its admissible range."""


class ContractError(SlnetError, ValueError):
    """An input violates the documented contract of an operation."""


class DomainError(SlnetError, ValueError):
    """The requested quantity is undefined at this state (e.g. polar form at r = 0)."""


class PhaseUndefinedError(DomainError):
    """An amplitude fell below the phase floor, so the phase is undefined."""

    def __init__(self, node, time, amplitude):
        self.node = node
        self.time = time
        self.amplitude = amplitude
        super().__init__(
            f"phase undefined: node {node} has amplitude {amplitude:.3e} at t={time:.6g}"
        )


class UndersampledError(DomainError):
    """Sample spacing too coarse to unwrap phases unambiguously."""


class DivergenceError(SlnetError, RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, time, message="non-finite state encountered"):
        self.time = time
        super().__init__(f"{message} at t={time:.6g}")


class NoRootError(SlnetError, ValueError):
    """No positive root exists for the requested equation."""


class UnsupportedTopologyError(SlnetError, ValueError):
    """Operation only defined for ring (circulant) topologies."""


class ConsistencyError(SlnetError, RuntimeError):
    """Two independent computations of the same quantity disagree."""


class OnsetError(SlnetError, ValueError):
    """A scan does not bracket the onset of oscillations."""
