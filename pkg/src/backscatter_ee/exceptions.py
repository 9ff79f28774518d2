"""Exception types raised by the model, optimizer, and CLI."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateSensingError(DomainError):
    """Fewer than one effective sensing sample remains, i.e. (1 - tau) * Ns < 1."""


class InfeasibleError(RuntimeError):
    """The constraint set of the energy-efficiency problem is empty."""


class ResourceError(RuntimeError):
    """A request would exceed the supported computational scale."""


class ConfigError(ValueError):
    """Invalid experiment configuration.

    ``field`` names the offending key so callers can report it.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
