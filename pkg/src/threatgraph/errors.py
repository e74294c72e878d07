"""Exception hierarchy for input and data contract violations.

Everything raised on bad user input derives from ThreatGraphError so the
CLI can map it to exit code 1; anything else escaping the pipeline is an
internal invariant violation (exit code 2).
"""

from __future__ import annotations


class ThreatGraphError(Exception):
    """Base class for all input/data errors raised by this package."""


class MalformedLineError(ThreatGraphError):
    """A CSV line violates the record syntax or a non-coordinate invariant."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class OutOfBoundsError(ThreatGraphError):
    """A record's center coordinate lies outside the frame."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class BadKindError(ThreatGraphError):
    """Unknown detection kind token."""

    def __init__(self, line_no: int, kind: str):
        super().__init__(f"line {line_no}: unknown kind {kind!r}")
        self.line_no = line_no
        self.kind = kind


class WrongPointCountError(ThreatGraphError):
    """Calibration file does not contain exactly four correspondences."""


class DegenerateQuadError(ThreatGraphError):
    """Three of the calibration image points are collinear."""


class NonMonotonicFrameError(ThreatGraphError):
    """Tracker fed a frame at or before the last processed frame."""


class MixedIdModeError(ThreatGraphError):
    """A frame mixes records with and without track ids."""


class DuplicateTrackIdError(ThreatGraphError):
    """Two records in one frame carry the same track id."""


class SingularSystemError(ThreatGraphError):
    """The calibration solve is rank-deficient or yields a singular map."""


class AtInfinityError(ThreatGraphError):
    """Projected point lies on the horizon line (homogeneous w ~ 0)."""


class OutOfOrderFrameError(ThreatGraphError):
    """Group state updated with a frame at or before the last one."""


class SchemaMismatchError(ThreatGraphError):
    """Graph file header does not match the supported schema version."""


class EmptyGroundTruthError(ThreatGraphError):
    """AP is undefined because the ground-truth set is empty."""


class NoDefinedClassesError(ThreatGraphError):
    """mAP is undefined because no class has a defined AP."""


class MissingFrameError(ThreatGraphError):
    """A labeled frame is absent from the threat series."""

    def __init__(self, frame: int):
        super().__init__(f"frame {frame} not present in threat series")
        self.frame = frame


class OutsideCalibratedRegionError(ThreatGraphError):
    """A scripted waypoint falls outside the calibrated floor region."""


class ConfigError(ThreatGraphError):
    """Bad key, value, or missing required key in a config file."""
