"""Orientation vocabulary shared by the whole package.

A robot only knows its two local ports (left/right); whether its "right"
is the external observer's clockwise is its private, stable chirality.
Clockwise is fixed as the direction of increasing node index, so edge k
joins node k and node (k+1) mod n and is the clockwise edge of node k.
"""
from __future__ import annotations

from enum import Enum


class Direction(Enum):
    """A robot's local direction (the value of its dir variable)."""

    LEFT = "L"
    RIGHT = "R"

    def opposite(self) -> "Direction":
        return Direction.LEFT if self is Direction.RIGHT else Direction.RIGHT


class GlobalDirection(Enum):
    """External observer's frame."""

    CLOCKWISE = "CW"
    COUNTER_CLOCKWISE = "CCW"

    def opposite(self) -> "GlobalDirection":
        if self is GlobalDirection.CLOCKWISE:
            return GlobalDirection.COUNTER_CLOCKWISE
        return GlobalDirection.CLOCKWISE


class Chirality(Enum):
    """Private port labelling; invisible to the algorithm, fixed per robot."""

    RIGHT_IS_CLOCKWISE = "cw"
    RIGHT_IS_COUNTER_CLOCKWISE = "ccw"


def to_global(direction: Direction, chirality: Chirality) -> GlobalDirection:
    """Map a local direction to the observer's frame."""
    right_is_cw = chirality is Chirality.RIGHT_IS_CLOCKWISE
    pointing_right = direction is Direction.RIGHT
    if pointing_right == right_is_cw:
        return GlobalDirection.CLOCKWISE
    return GlobalDirection.COUNTER_CLOCKWISE


def to_local(gdir: GlobalDirection, chirality: Chirality) -> Direction:
    """Inverse of to_global for a fixed chirality."""
    cw = gdir is GlobalDirection.CLOCKWISE
    right_is_cw = chirality is Chirality.RIGHT_IS_CLOCKWISE
    return Direction.RIGHT if cw == right_is_cw else Direction.LEFT
