"""Exception hierarchy shared by all modules."""


class ShintaniError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ShintaniError):
    """Invalid configuration: bad shapes, parameter ranges, or parse failures."""


class RegionError(ShintaniError):
    """Evaluation point lies outside the certified absolute-convergence domain."""


class CertificationError(ShintaniError):
    """No certified truncation bound is available for the requested operation."""


class NumericError(ShintaniError):
    """A numeric procedure failed (boundary zeros, vanishing normalizers, ...)."""
