"""Exception hierarchy shared by every module."""


class ColombeauError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(ColombeauError):
    """A point lies outside the chart domain."""


class ParameterError(ColombeauError):
    """The regularization parameter is outside (0, 1] or above a certificate ceiling."""


class CertificateError(ColombeauError):
    """A quotient or negative power was requested without a nonvanishing certificate."""


class CompositionError(ColombeauError):
    """The range of the inner map escapes the domain of the outer map."""


class ConstructionError(ColombeauError):
    """A mollifier or metric could not be constructed."""


class UnsupportedDistributionError(ColombeauError):
    """The distribution specification has no embedding in this library."""


class ParseError(ColombeauError):
    """Malformed expression, distribution or configuration text."""


class QuadratureError(ColombeauError):
    """Adaptive quadrature did not reach the requested tolerance."""


class MetricError(ColombeauError):
    """A metric failed symmetry, invertibility or signature checks."""


class GridMismatchError(ColombeauError):
    """Curve and vector field were built on different epsilon grids."""
