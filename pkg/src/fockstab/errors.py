"""Exception hierarchy shared by the simulator and the CLI."""


class FockStabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDimensionError(FockStabError, ValueError):
    pass


class InvalidArgumentError(FockStabError, ValueError):
    pass


class DimensionMismatchError(FockStabError, ValueError):
    pass


class DegenerateCollapseError(FockStabError, ArithmeticError):
    """The sampled measurement branch has (numerically) zero probability."""


class FilterDivergenceError(DegenerateCollapseError):
    """The filter assigns zero probability to an outcome that was observed."""


class ConfigError(FockStabError, ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DegenerateMeasurementError(ConfigError):
    """Two photon numbers share the same detection probability."""
