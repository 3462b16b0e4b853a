"""Exception hierarchy.

Every domain failure derives from :class:`TrajcalError`, which carries the
pipeline ``stage`` that raised it so the CLI can print a one-line diagnostic.
"""

from __future__ import annotations


class TrajcalError(Exception):
    stage = "trajcal"

    def diagnostic(self) -> str:
        return f"error [{self.stage}] {type(self).__name__}: {self}"


# traj
class MalformedRow(TrajcalError):
    stage = "traj"


class NonMonotonicTimestamps(TrajcalError):
    stage = "traj"


class BadQuaternion(TrajcalError):
    stage = "traj"


class OutOfRange(TrajcalError):
    stage = "traj"


class EmptyAssociation(TrajcalError):
    stage = "traj"


class EmptyResult(TrajcalError):
    stage = "traj"


# sync
class NoPeaks(TrajcalError):
    stage = "sync"


class NoMatches(TrajcalError):
    stage = "sync"


class InsufficientOverlap(TrajcalError):
    stage = "sync"


# calib
class TooFewPairs(TrajcalError):
    stage = "calib"


class DegenerateMotion(TrajcalError):
    stage = "calib"


class NumericalFailure(TrajcalError):
    stage = "calib"


# replay
class EmptyTrajectory(TrajcalError):
    stage = "replay"


# metrics
class DegenerateGeometry(TrajcalError):
    stage = "metrics"
