"""One robot's state and its Look/Compute behaviour.

A robot carries an incorruptible identifier (and the bit word derived
from it) plus four working variables: the local direction it points to,
the read index into its bit word, and two bookkeeping values refreshed at
every edge-activated round -- how many robots shared its node and whether
it crossed an edge.  Self-stabilization means every working variable may
start with garbage; nothing here is allowed to assume otherwise.

Two Compute rules exist: the three-robot rule flips a robot that was
stuck and now sees more company (sentinel handing over to a visitor),
while the two-robot rule flips a robot stuck alone.  Both consult the
bit word only when a whole tower is stuck together in the same direction.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import FrozenSet

from .directions import Chirality, Direction, GlobalDirection, to_global
from .words import advance_index, bit_at, direction_for_bit, transform_identifier

# Mutation flags for the fault-injection suite; a normal run uses none.
MUTATION_LITERAL_INDEX = "literal_index"
MUTATION_FREEZE_HMPEA = "freeze_hmpea"
MUTATION_SKIP_UPDATE = "skip_update"
KNOWN_MUTATIONS = frozenset(
    {MUTATION_LITERAL_INDEX, MUTATION_FREEZE_HMPEA, MUTATION_SKIP_UPDATE}
)
NO_MUTATIONS: FrozenSet[str] = frozenset()


@dataclass(frozen=True)
class RobotState:
    """Full variable set of one robot.

    transformed_id and ell are constants derived from the id; dir, i,
    nrpea (robot count at previous edge-activation) and hmpea (moved at
    previous edge-activation) may hold arbitrary type-valid values.
    """

    id: int
    transformed_id: str
    ell: int
    i: int
    direction: Direction
    chirality: Chirality
    position: int
    nrpea: int
    hmpea: bool

    @staticmethod
    def make(
        robot_id: int,
        position: int,
        direction: Direction = Direction.RIGHT,
        chirality: Chirality = Chirality.RIGHT_IS_CLOCKWISE,
        i: int = 1,
        nrpea: int = 1,
        hmpea: bool = True,
    ) -> "RobotState":
        word = transform_identifier(robot_id)
        return RobotState(
            id=robot_id,
            transformed_id=word,
            ell=len(word),
            i=i,
            direction=direction,
            chirality=chirality,
            position=position,
            nrpea=nrpea,
            hmpea=hmpea,
        )


@dataclass(frozen=True)
class LookSnapshot:
    """Local predicates frozen during the Look phase.

    Edge booleans are in the robot's own frame; the direction-relative
    predicates are *not* frozen here because they read the live dir
    variable, which Compute may change before Update runs.
    """

    robots_here: int
    edge_left: bool
    edge_right: bool

    @property
    def exists_adjacent(self) -> bool:
        return self.edge_left or self.edge_right

    def exists_current_dir(self, direction: Direction) -> bool:
        return self.edge_right if direction is Direction.RIGHT else self.edge_left

    def exists_opposite_dir(self, direction: Direction) -> bool:
        return self.edge_left if direction is Direction.RIGHT else self.edge_right


def we_are_stuck_same_direction(s: RobotState, snap: LookSnapshot) -> bool:
    """Stuck with company since the previous edge-activation, exit behind."""
    return (
        snap.robots_here > 1
        and snap.robots_here == s.nrpea
        and not snap.exists_current_dir(s.direction)
        and snap.exists_opposite_dir(s.direction)
        and not s.hmpea
    )


def i_was_stuck_and_more_robots(s: RobotState, snap: LookSnapshot) -> bool:
    """Was stuck, and strictly more robots are here than at that activation."""
    return snap.robots_here > s.nrpea and not s.hmpea and snap.exists_adjacent


def i_am_stuck_alone(s: RobotState, snap: LookSnapshot) -> bool:
    """Alone, blocked ahead, open behind (two-robot rule only)."""
    return (
        snap.robots_here == 1
        and not snap.exists_current_dir(s.direction)
        and snap.exists_opposite_dir(s.direction)
    )


def give_direction(s: RobotState, literal_index: bool = False) -> RobotState:
    """Advance the read index round-robin and point along the bit read.

    A corrupt index is reduced into 1..ell before the advance, so the
    first call after corruption already reads a well-defined bit.
    """
    i = advance_index(s.i, s.ell, literal=literal_index)
    direction = direction_for_bit(bit_at(s.transformed_id, i))
    return replace(s, i=i, direction=direction)


def opposite_direction(s: RobotState) -> RobotState:
    return replace(s, direction=s.direction.opposite())


def update(s: RobotState, snap: LookSnapshot, mutations: FrozenSet[str] = NO_MUTATIONS) -> RobotState:
    """Refresh the bookkeeping variables at an edge-activated round.

    Runs at the end of Compute: exists-edge-on-current-direction is read
    against the direction the robot will hold during Move, so hmpea
    records exactly whether the robot crosses an edge this round.
    """
    if MUTATION_SKIP_UPDATE in mutations:
        return s
    if not snap.exists_adjacent:
        return s
    hmpea = s.hmpea if MUTATION_FREEZE_HMPEA in mutations else snap.exists_current_dir(s.direction)
    return replace(s, nrpea=snap.robots_here, hmpea=hmpea)


def compute_pef3(
    s: RobotState, snap: LookSnapshot, mutations: FrozenSet[str] = NO_MUTATIONS
) -> RobotState:
    """Three-robot Compute rule: tower breaking, then sentinel hand-over."""
    g_stuck_together = we_are_stuck_same_direction(s, snap)
    g_more_robots = i_was_stuck_and_more_robots(s, snap)
    # One guard needs robots_here == nrpea, the other robots_here > nrpea.
    assert not (g_stuck_together and g_more_robots)
    if g_stuck_together:
        s = give_direction(s, literal_index=MUTATION_LITERAL_INDEX in mutations)
    if g_more_robots:
        s = opposite_direction(s)
    return update(s, snap, mutations)


def compute_pef2(
    s: RobotState, snap: LookSnapshot, mutations: FrozenSet[str] = NO_MUTATIONS
) -> RobotState:
    """Two-robot Compute rule: tower breaking, then lone-robot turnaround."""
    g_stuck_together = we_are_stuck_same_direction(s, snap)
    if g_stuck_together:
        s = give_direction(s, literal_index=MUTATION_LITERAL_INDEX in mutations)
    g_stuck_alone = i_am_stuck_alone(s, snap)
    # One guard needs robots_here > 1, the other robots_here == 1.
    assert not (g_stuck_together and g_stuck_alone)
    if g_stuck_alone:
        s = opposite_direction(s)
    return update(s, snap, mutations)


def global_direction(s: RobotState) -> GlobalDirection:
    """The robot's direction in the external observer's frame."""
    return to_global(s.direction, s.chirality)
