"""Exception types raised across the package."""


class ResolverSimError(ValueError):
    """Base class for all validation and model errors."""


class GeometryError(ResolverSimError):
    pass


class BasisFormatError(ResolverSimError):
    """A basis file could not be parsed.

    ``field`` names the offending header key or section.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class BasisHeaderError(BasisFormatError):
    pass


class BasisDimensionError(BasisFormatError):
    pass


class BasisAngleGridError(BasisFormatError):
    pass


class BasisIntegrityWarning(UserWarning):
    """Loaded basis violates reciprocity beyond tolerance."""


class WindingError(ResolverSimError):
    pass


class FaultError(ResolverSimError):
    pass


class AssemblyError(ResolverSimError):
    pass


class FourierError(ResolverSimError):
    pass


class SamplingError(ResolverSimError):
    pass


class SingularStepError(ResolverSimError):
    pass


class DemodulationError(ResolverSimError):
    pass


class MetricsError(ResolverSimError):
    pass


class ConfigError(ResolverSimError):
    pass


class ScenarioError(ResolverSimError):
    """Wraps any failure inside a scenario run with its id."""

    def __init__(self, scenario_id, cause):
        super().__init__(f"[{scenario_id}] {cause}")
        self.scenario_id = scenario_id
        self.cause = cause
