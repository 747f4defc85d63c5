"""Footprint rings and round-indexed edge schedules.

The footprint is a ring of n >= 3 anonymous nodes; edge k joins node k
and node (k+1) mod n, and clockwise is the direction of increasing node
index.  An evolving ring presents, at every round t, a subset of the
footprint edges.  Schedules are deterministic generators (pure in their
seed and parameters) so that infinite-horizon semantics are well defined
while any prefix can be materialized and inspected.

Edge classes, from most to least constrained: static (every edge present
every round), edge-recurrent (every edge present infinitely often, here
witnessed by a bound B on consecutive absences), connected-over-time
(recurrent edges form a connected graph; on a ring that allows at most
one eventually-missing edge).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

INF = math.inf


@dataclass(frozen=True)
class Footprint:
    """Static ring of n nodes; also the universe of edge indices 0..n-1."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError(f"ring size must be >= 3, got {self.n}")

    def edge_endpoints(self, k: int) -> tuple[int, int]:
        return k, (k + 1) % self.n

    def cw_edge(self, node: int) -> int:
        """Edge crossed when leaving `node` clockwise."""
        return node

    def ccw_edge(self, node: int) -> int:
        """Edge crossed when leaving `node` counter-clockwise."""
        return (node - 1) % self.n

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1


class Schedule:
    """Deterministic mapping from round index to present-edge bitmask."""

    n: int

    def mask_at(self, t: int) -> int:
        raise NotImplementedError

    def masks(self, horizon: int) -> list[int]:
        """Present-edge bitmasks for rounds 0..horizon-1."""
        return [self.mask_at(t) for t in range(horizon)]

    def describe(self) -> dict:
        raise NotImplementedError


class StaticSchedule(Schedule):
    """All footprint edges present every round."""

    def __init__(self, n: int):
        self.n = n
        self._mask = (1 << n) - 1

    def mask_at(self, t: int) -> int:
        return self._mask

    def masks(self, horizon: int) -> list[int]:
        return [self._mask] * horizon

    def describe(self) -> dict:
        return {"kind": "static"}


class RecurrentRandomSchedule(Schedule):
    """Seeded Bernoulli presence patched to an explicit recurrence bound.

    Each edge is independently present with probability p each round; the
    patch then forces a presence whenever an edge would otherwise sit
    absent for B consecutive rounds, so every length-B window contains at
    least one presence of every edge.  The bound B is a simulation device
    that makes edge-recurrence witness-checkable on finite prefixes, not a
    model assumption.

    Rounds are materialized in fixed-size blocks with per-block child
    seeds, so the realized schedule depends only on (n, p, B, seed), never
    on the query pattern.
    """

    BLOCK = 2048

    def __init__(self, n: int, p: float, recurrence_bound: int, seed: int):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"presence probability must be in [0,1], got {p}")
        if recurrence_bound < 1:
            raise ValueError(f"recurrence bound must be >= 1, got {recurrence_bound}")
        self.n = n
        self.p = p
        self.recurrence_bound = recurrence_bound
        self.seed = seed
        self._materialized: list[int] = []
        # Rounds since the last raw (unpatched) presence, per edge, at the
        # point materialization stopped.  Forced presences are a pure
        # function of raw-gap arithmetic: inside a raw gap starting at a,
        # the patch inserts a+B, a+2B, ... which is exactly "raw absence
        # distance divisible by B".
        self._carry = np.zeros(n, dtype=np.int64)

    def _extend_block(self) -> None:
        block_index = len(self._materialized) // self.BLOCK
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(block_index,))
        )
        raw = rng.random((self.BLOCK, self.n)) < self.p
        pos = np.arange(self.BLOCK, dtype=np.int64)[:, None]
        last_raw = np.where(raw, pos, np.int64(-(1 << 40)))
        virtual = (-(self._carry + 1))[None, :]
        last_raw = np.maximum.accumulate(np.vstack([virtual, last_raw]), axis=0)[1:]
        distance = pos - last_raw
        forced = ~raw & (distance % self.recurrence_bound == 0)
        present = raw | forced
        self._carry = (self.BLOCK - 1) - last_raw[-1]
        weights = 1 << np.arange(self.n, dtype=np.int64)
        self._materialized.extend(int(m) for m in present.astype(np.int64) @ weights)

    def _extend_to(self, horizon: int) -> None:
        while len(self._materialized) < horizon:
            self._extend_block()

    def mask_at(self, t: int) -> int:
        self._extend_to(t + 1)
        return self._materialized[t]

    def masks(self, horizon: int) -> list[int]:
        self._extend_to(horizon)
        return self._materialized[:horizon]

    def describe(self) -> dict:
        return {
            "kind": "recurrent",
            "p": self.p,
            "recurrence_bound": self.recurrence_bound,
            "seed": self.seed,
        }


class EventualMissingSchedule(Schedule):
    """An inner schedule with one edge forced absent from a cutoff round on."""

    def __init__(self, inner: Schedule, missing_edge: int, cutoff: int):
        if not 0 <= missing_edge < inner.n:
            raise ValueError(f"missing edge {missing_edge} outside footprint 0..{inner.n - 1}")
        if cutoff < 0:
            raise ValueError(f"cutoff must be >= 0, got {cutoff}")
        prior = forced_missing_edge(inner)
        if prior is not None and prior != missing_edge:
            raise ValueError(
                "a ring schedule may force at most one eventually missing edge "
                f"(already missing: {prior}, requested: {missing_edge})"
            )
        self.n = inner.n
        self.inner = inner
        self.missing_edge = missing_edge
        self.cutoff = cutoff
        self._clear = ~(1 << missing_edge)

    def mask_at(self, t: int) -> int:
        m = self.inner.mask_at(t)
        return m & self._clear if t >= self.cutoff else m

    def masks(self, horizon: int) -> list[int]:
        out = self.inner.masks(horizon)
        return [m & self._clear if t >= self.cutoff else m for t, m in enumerate(out)]

    def describe(self) -> dict:
        d = self.inner.describe()
        d.update(
            {"kind": "eventual_missing", "missing_edge": self.missing_edge, "cutoff": self.cutoff}
        )
        return d


def forced_missing_edge(schedule: Schedule) -> int | None:
    """The edge a schedule chain forces absent forever, if any."""
    s = schedule
    while True:
        if isinstance(s, EventualMissingSchedule):
            return s.missing_edge
        if isinstance(s, RemovalSchedule):
            for edge, _, end in s.spec.items:
                if end == INF:
                    return edge
            s = s.inner
            continue
        inner = getattr(s, "inner", None)
        if inner is None:
            return None
        s = inner


@dataclass(frozen=True)
class EdgeRemovalSpec:
    """List of (edge, round interval) removals; closed intervals, end may be inf."""

    items: tuple[tuple[int, int, float], ...]

    @staticmethod
    def of(pairs: Iterable[tuple[int, int, float]]) -> "EdgeRemovalSpec":
        items = []
        for edge, start, end in pairs:
            if start < 0:
                raise ValueError(f"removal start must be >= 0, got {start}")
            if end < start:
                raise ValueError(f"removal interval [{start},{end}] is empty")
            items.append((edge, start, end))
        return EdgeRemovalSpec(tuple(items))

    def validate_against(self, footprint: Footprint) -> None:
        for edge, _, _ in self.items:
            if not 0 <= edge < footprint.n:
                raise ValueError(f"unknown edge index {edge} for ring of size {footprint.n}")

    def union(self, other: "EdgeRemovalSpec") -> "EdgeRemovalSpec":
        return EdgeRemovalSpec(self.items + other.items)


class RemovalSchedule(Schedule):
    """Inner schedule with the removal operator applied.

    Edge e is present at t in the result iff it is present in the inner
    schedule and no removal pair (e, interval) covers t.
    """

    def __init__(self, inner: Schedule, spec: EdgeRemovalSpec):
        self.n = inner.n
        self.inner = inner
        self.spec = spec

    def _removed_mask(self, t: int) -> int:
        m = 0
        for edge, start, end in self.spec.items:
            if start <= t <= end:
                m |= 1 << edge
        return m

    def mask_at(self, t: int) -> int:
        return self.inner.mask_at(t) & ~self._removed_mask(t)

    def masks(self, horizon: int) -> list[int]:
        out = self.inner.masks(horizon)
        return [m & ~self._removed_mask(t) for t, m in enumerate(out)]

    def describe(self) -> dict:
        d = self.inner.describe()
        d.update(
            {
                "kind": "removal_list",
                "removals": [
                    [edge, start, "inf" if end == INF else end]
                    for edge, start, end in self.spec.items
                ],
            }
        )
        return d


@dataclass
class EvolvingRing:
    """A footprint plus a total round-indexed edge schedule."""

    footprint: Footprint
    schedule: Schedule

    def __post_init__(self) -> None:
        if self.schedule.n != self.footprint.n:
            raise ValueError("schedule and footprint sizes disagree")

    @property
    def n(self) -> int:
        return self.footprint.n

    def edges_at(self, t: int) -> frozenset[int]:
        if t < 0:
            raise ValueError(f"round index must be >= 0, got {t}")
        mask = self.schedule.mask_at(t)
        return frozenset(e for e in range(self.n) if mask >> e & 1)

    def mask_at(self, t: int) -> int:
        if t < 0:
            raise ValueError(f"round index must be >= 0, got {t}")
        return self.schedule.mask_at(t)

    def masks(self, horizon: int) -> list[int]:
        return self.schedule.masks(horizon)


def static_ring(n: int) -> EvolvingRing:
    return EvolvingRing(Footprint(n), StaticSchedule(n))


def remove(ring: EvolvingRing, spec: EdgeRemovalSpec) -> EvolvingRing:
    """Apply the removal operator, yielding a new evolving ring."""
    spec.validate_against(ring.footprint)
    return EvolvingRing(ring.footprint, RemovalSchedule(ring.schedule, spec))


class EdgeClass(Enum):
    STATIC = "static"
    EDGE_RECURRENT = "edge_recurrent"
    CONNECTED_OVER_TIME = "connected_over_time"


@dataclass
class ClassifyReport:
    """Provisional edge-class verdict computed on a finite prefix.

    Any finite-horizon verdict is necessarily provisional: a static-looking
    prefix says nothing about later rounds.  `verdict` is None when the
    prefix already contradicts connected-over-time on a ring (two or more
    edges absent through a suffix).
    """

    horizon: int
    recurrence_bound: int
    provisional: bool = True
    verdict: EdgeClass | None = None
    static_edges: set[int] = field(default_factory=set)
    recurrent_edges: set[int] = field(default_factory=set)
    missing_candidates: dict[int, int] = field(default_factory=dict)  # edge -> cutoff


def classify_prefix(ring: EvolvingRing, horizon: int, recurrence_bound: int) -> ClassifyReport:
    """Scan rounds [0, horizon) and report per-edge witnesses plus a verdict.

    An edge is a static witness if present every round, a recurrence
    witness if no absence run reaches `recurrence_bound`, and an
    eventual-missing candidate if absent through a suffix at least
    `recurrence_bound` rounds long (shorter tail absences are ordinary
    recurrent behaviour); its cutoff is the first round of that suffix.
    """
    if not horizon >= recurrence_bound >= 1:
        raise ValueError("need horizon >= recurrence_bound >= 1")
    n = ring.n
    masks = ring.masks(horizon)
    report = ClassifyReport(horizon=horizon, recurrence_bound=recurrence_bound)
    for e in range(n):
        max_run = 0
        run = 0
        last_present = -1
        for t, mask in enumerate(masks):
            if mask >> e & 1:
                last_present = t
                run = 0
            else:
                run += 1
                if run > max_run:
                    max_run = run
        if max_run == 0:
            report.static_edges.add(e)
        if max_run < recurrence_bound:
            report.recurrent_edges.add(e)
        if horizon - 1 - last_present >= recurrence_bound:
            report.missing_candidates[e] = last_present + 1
    if len(report.static_edges) == n:
        report.verdict = EdgeClass.STATIC
    elif len(report.recurrent_edges) == n:
        report.verdict = EdgeClass.EDGE_RECURRENT
    elif len(report.missing_candidates) == 1 and len(report.recurrent_edges) == n - 1:
        report.verdict = EdgeClass.CONNECTED_OVER_TIME
    elif len(report.missing_candidates) <= 1:
        # Some edge has long absences yet no absent suffix: recurrence bound
        # not witnessed at B, but nothing rules out connected-over-time.
        report.verdict = EdgeClass.CONNECTED_OVER_TIME
    else:
        report.verdict = None
    return report


def masks_to_array(masks: Sequence[int], n: int) -> np.ndarray:
    """Expand bitmasks into a (rounds, n) boolean presence matrix."""
    arr = np.asarray(masks, dtype=np.int64)
    return (arr[:, None] >> np.arange(n)[None, :] & 1).astype(bool)
