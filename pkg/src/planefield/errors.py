"""Exception types shared across the toolkit."""

from __future__ import annotations


class PlanefieldError(Exception):
    """Base class for every error raised by this package."""


class ParseError(PlanefieldError):
    """Malformed expression text.

    Carries the 0-based character position and the set of token kinds
    that would have been accepted there.
    """

    def __init__(self, message: str, position: int, expected: tuple = ()):
        detail = f"{message} (at position {position})"
        if expected:
            detail += "; expected one of: " + ", ".join(sorted(map(str, expected)))
        super().__init__(detail)
        self.position = position
        self.expected = tuple(expected)


class UnknownIdentifierError(ParseError):
    """Identifier does not name a chart coordinate, constant or function."""

    def __init__(self, name: str, position: int):
        super().__init__(f"unknown identifier {name!r}", position)
        self.name = name


class ArityError(ParseError):
    """Function called with the wrong number of arguments."""

    def __init__(self, func: str, expected: int, got: int, position: int):
        super().__init__(
            f"{func}() takes {expected} argument(s), got {got}", position
        )
        self.func = func
        self.expected_arity = expected
        self.got = got


class DomainError(PlanefieldError):
    """Evaluation left the real domain of a function (sqrt of a negative,
    division by zero, non-integer power of a non-positive base, ...)."""

    def __init__(self, function: str, value, message: str = ""):
        detail = f"{function}: argument value {value!r} outside domain"
        if message:
            detail += f" ({message})"
        super().__init__(detail)
        self.function = function
        self.value = value


class NotSPDError(PlanefieldError):
    """Metric matrix fails a leading-principal-minor test at a point."""

    def __init__(self, point, minor_index: int, minor_value: float):
        super().__init__(
            f"metric is not positive definite at {tuple(point)}: "
            f"leading minor {minor_index + 1} = {minor_value!r}"
        )
        self.point = tuple(point)
        self.minor_index = minor_index
        self.minor_value = minor_value


class SingularSampleError(PlanefieldError):
    """A sample grid landed on a declared coordinate singularity."""

    def __init__(self, coordinate: str, value: float):
        super().__init__(f"grid point hits singular locus {coordinate} = {value!r}")
        self.coordinate = coordinate
        self.value = value


class DegenerateDistributionError(PlanefieldError):
    """Plane field undefined at a point (vanishing form / dependent span)."""

    def __init__(self, point, detail: str = ""):
        msg = f"distribution degenerates at {tuple(point)}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.point = tuple(point)


class NotTransverseError(PlanefieldError):
    """Two plane fields fail the transversality required by a construction."""

    def __init__(self, point, angle: float):
        super().__init__(
            f"normal direction lies in the target plane at {tuple(point)} "
            f"(transversality angle {angle!r} rad)"
        )
        self.point = tuple(point)
        self.angle = angle


class NonSPDPathError(PlanefieldError):
    """Metric path leaves the positive-definite cone even after subdivision."""

    def __init__(self, t: float, point, depth: int):
        super().__init__(
            f"path metric not SPD at t={t!r}, p={tuple(point)} "
            f"after {depth} subdivision levels"
        )
        self.t = t
        self.point = tuple(point)
        self.depth = depth


class OverlapMismatchError(PlanefieldError):
    """Atlas charts disagree on an overlap beyond tolerance."""

    def __init__(self, source: str, target: str, mismatch: float, tolerance: float, report=None):
        super().__init__(
            f"overlap {source} -> {target}: metric mismatch {mismatch!r} "
            f"exceeds tolerance {tolerance!r}"
        )
        self.source = source
        self.target = target
        self.mismatch = mismatch
        self.tolerance = tolerance
        self.report = report


class ConfigError(PlanefieldError):
    """Malformed suite spec, chart file or CLI configuration."""
