"""Exception hierarchy shared by every tvlab module."""


class TvlabError(ValueError):
    """Base class for all errors raised by tvlab."""


class ConfigurationError(TvlabError):
    """Invalid simulation or experiment configuration."""


class DomainError(TvlabError):
    """A numeric argument lies outside the admissible domain."""


class ShapeError(TvlabError):
    """Two sampled objects do not share a grid."""


class SizeError(TvlabError):
    """Input too large for an exhaustive routine."""


class CensoringError(TvlabError):
    """Some simulated paths never reached the requested level."""
