"""Exception and warning types raised by the simulator."""


class KerrLZSMError(Exception):
    """Base class for all library errors."""


class InvalidDimensionError(KerrLZSMError, ValueError):
    pass


class InvalidRateError(KerrLZSMError, ValueError):
    pass


class DomainError(KerrLZSMError, ValueError):
    pass


class UseFloquetModuleError(KerrLZSMError, ValueError):
    """A static solver was handed a modulated model (zeta != 0)."""


class UndefinedTransmissionError(KerrLZSMError, ValueError):
    pass


class DegenerateAsymmetryError(KerrLZSMError, ValueError):
    pass


class OutOfValidityError(KerrLZSMError, ValueError):
    pass


class NoMultiphotonStructureError(KerrLZSMError, ValueError):
    pass


class InsufficientDataError(KerrLZSMError, ValueError):
    pass


class SolverFailure(KerrLZSMError, RuntimeError):
    """A linear solve could not produce a trustworthy answer.

    ``condition`` carries the estimated condition number when available.
    """

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class StiffnessError(SolverFailure):
    """Adaptive integrator step size underflowed."""

    def __init__(self, message, max_generator_norm=None):
        super().__init__(message)
        self.max_generator_norm = max_generator_norm


class RefineStepsError(SolverFailure):
    """Step doubling did not converge within the allowed number of steps."""


class NoSteadyStateError(SolverFailure):
    """No Floquet multiplier was found next to 1."""


class IllConditionedBasisError(SolverFailure):
    pass


class UnreliableBasisError(KerrLZSMError, RuntimeError):
    pass


class EmptyDecompositionError(KerrLZSMError, RuntimeError):
    pass


class CutoffGuardError(KerrLZSMError, RuntimeError):
    """Refusal to build a Floquet map above the cost guard."""


class ConfigError(KerrLZSMError, ValueError):
    pass


class CutoffWarning(UserWarning):
    """Fock truncation may be too small for the state being handled."""


class TruncationWarning(UserWarning):
    """Harmonic truncation left significant weight on the boundary blocks."""
