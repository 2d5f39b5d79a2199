"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NoCircularOrbitError(DomainError):
    """No timelike circular geodesic exists at the requested radius (2r <= 3 r0)."""


class DegenerateIndicialError(RuntimeError):
    """A recurrence denominator P_n vanished; the Frobenius ansatz degenerates."""

    def __init__(self, n):
        self.n = n
        super().__init__(f"indicial factor P_n vanished at n={n}")


class ConvergenceError(RuntimeError):
    """A truncation schedule was exhausted without meeting its tolerance."""

    def __init__(self, message, history=None):
        self.history = list(history) if history is not None else []
        super().__init__(message)


class AccuracyError(RuntimeError):
    """A solved quantity failed its internal accuracy certificate."""


class ConfigurationError(RuntimeError):
    """Solver configuration is internally inconsistent (e.g. empty overlap)."""


class OutOfRegimeError(DomainError):
    """Requested point is outside the regime where the operation is defined."""


class IntegrableEndpointError(RuntimeError):
    """A rate term landed on an integrable endpoint (omega_+- ~ 0)."""

    def __init__(self, l, m, which, omega):
        self.l = l
        self.m = m
        self.which = which
        self.omega = omega
        super().__init__(
            f"omega_{which} = {omega:g} below threshold for (l={l}, m={m}); "
            "shift the grid point instead of extrapolating")


class InsufficientDataError(RuntimeError):
    """Too few usable samples remain for a fit."""
