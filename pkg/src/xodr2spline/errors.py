"""Exception types raised by the conversion pipeline."""

from __future__ import annotations


class ConversionError(ValueError):
    """Base class for every structured pipeline failure.

    ``road_id`` and ``line`` are filled in when the failure can be tied to a
    road or to a location in the source document.
    """

    def __init__(self, message: str, road_id: str | None = None, line: int | None = None):
        self.road_id = road_id
        self.line = line
        where = []
        if road_id is not None:
            where.append(f"road {road_id!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)

    @property
    def kind(self) -> str:
        name = type(self).__name__
        return name[:-5] if name.endswith("Error") else name


# ingest
class MissingFieldError(ConversionError):
    pass


class NotTextError(ConversionError):
    pass


class MalformedXmlError(ConversionError):
    pass


class MissingPlanViewError(ConversionError):
    pass


class UnknownGeometryError(ConversionError):
    pass


class BadAttributeError(ConversionError):
    pass


# geometry
class OutOfRangeError(ConversionError):
    pass


class NonFiniteError(ConversionError):
    pass


class NoLaneSectionError(ConversionError):
    pass


# converter
class EmptyPlanViewError(ConversionError):
    pass


class EmptyBoundaryError(ConversionError):
    pass


class TooFewPointsError(ConversionError):
    pass


class DegenerateKnotsError(ConversionError):
    pass


# fidelity
class EmptyInputError(ConversionError):
    pass


class LengthMismatchError(ConversionError):
    pass


class ZeroVarianceError(ConversionError):
    pass


# validate / render
class TooShortError(ConversionError):
    pass


class GeometryWarning(UserWarning):
    """Recoverable data problems: clamped widths, pose gaps, skipped elements."""
