"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class PointVortexError(Exception):
    """Base class for all library errors."""


class DomainViolationError(PointVortexError, ValueError):
    """A point lies outside the region where an object is defined."""


class CoincidentPointsError(PointVortexError, ValueError):
    """Two arguments coincide where a singular kernel is requested."""


class MapRejectedError(PointVortexError):
    """A holomorphic map failed its sanity checks.

    The offending :class:`~pointvortex.complexmap.MapSanityReport` is kept
    on the ``report`` attribute.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigurationInvalidError(PointVortexError, ValueError):
    """A vortex configuration is not in the admissible set."""


class ParameterError(PointVortexError, ValueError):
    """A numerical parameter is out of its admissible range."""


class NoSuchHoleError(PointVortexError, IndexError):
    """A hole index was requested on a domain without that hole."""


class GeometryError(PointVortexError):
    """Sampling or geometric construction failed."""


class IntegrationError(PointVortexError):
    """The time integrator could not proceed."""


class InvariantViolationError(PointVortexError):
    """A verification routine found a violated inequality."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(PointVortexError):
    """A run configuration is malformed.

    Parameters
    ----------
    path : str
        Dotted location of the offending entry, e.g. ``domain.rho``.
    message : str
        Human readable explanation.
    """

    def __init__(self, path, message):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)
