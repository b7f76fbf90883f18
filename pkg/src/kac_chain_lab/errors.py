"""Exception hierarchy shared by every module of the lab."""


class KacLabError(Exception):
    """Base class; ``code`` is the module-qualified identifier used by the CLI."""

    code = "kcl.error"


class InvalidSystem(KacLabError):
    code = "action-core.InvalidSystem"


class OrbitMissesE(KacLabError):
    code = "chain-engine.OrbitMissesE"

    def __init__(self, point: int, message: str | None = None):
        self.point = point
        super().__init__(message or f"orbit of point {point} never visits E")


class HorizonExceeded(KacLabError):
    code = "chain-engine.HorizonExceeded"


class DimensionUnsupported(KacLabError):
    code = "return-analytics.DimensionUnsupported"


class DepthInsufficient(KacLabError):
    code = "odometer-aw.DepthInsufficient"


class GapTooSmall(KacLabError):
    code = "flow-renewal-mc.GapTooSmall"


class PeriodicDistribution(KacLabError):
    code = "flow-renewal-mc.PeriodicDistribution"


class WindowTooSmall(KacLabError):
    code = "equidecomp-opt.WindowTooSmall"


class ConfigError(KacLabError):
    code = "cli-harness.ConfigError"
