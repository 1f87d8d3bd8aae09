"""Exception types raised by toolkit operations.

Checks that produce per-element findings return Diagnostic lists instead;
exceptions are reserved for contract violations and unusable inputs.
"""
from __future__ import annotations


class TmkitError(Exception):
    """Base class for all toolkit errors."""


class DuplicateId(TmkitError):
    pass


class UnresolvedStageRef(TmkitError):
    pass


class ContainmentCycle(TmkitError):
    pass


class SizeLimitExceeded(TmkitError):
    pass


class NotSimplified(TmkitError):
    pass


class CycleDetected(TmkitError):
    def __init__(self, cycle: list[str]):
        super().__init__("cycle: " + " -> ".join(cycle))
        self.cycle = cycle


class UnknownEvent(TmkitError):
    pass


class EdgeInsideExclusiveGroup(TmkitError):
    pass


class BoundExceeded(TmkitError):
    pass


class IllegalAction(TmkitError):
    def __init__(self, stage, message: str):
        super().__init__(f"{stage[0]}.{stage[1].value}: {message}")
        self.stage = stage


class NotEnabled(TmkitError):
    pass


class Deadlock(TmkitError):
    pass


class PolicyError(TmkitError):
    pass


class UnknownHighlightId(TmkitError):
    pass
