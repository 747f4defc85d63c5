"""Adversarial edge schedules and the confinement game search.

The reactive adversaries here choose absent edges per round as a function
of the current configuration.  `ConfinementAdversary` replays the
impossibility construction's case analysis over a fixed 3-node window;
`game_search` makes the construction's limit argument finite by searching
exhaustively, over all reactive choices of at most `max_absent`
simultaneously absent edges incident to robot positions, for a reachable
cycle that leaves some footprint node unvisited forever.

With the default budget of one absent edge per round, every infinite play
the search can certify is automatically connected-over-time (a cycle can
keep at most one edge permanently missing), so ConfinableForever
witnesses stay inside the model class.  Larger budgets are available for
experiments; the verdict then reports the cycle's always-absent edge set
so out-of-class witnesses are recognizable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import IO, Sequence

from .directions import Chirality, Direction, to_global, GlobalDirection
from .engine import ALGO_PEF2, ALGO_PEF3, RunView, Trace, _round_kernel, run_states
from .ring_model import (
    EvolvingRing,
    EventualMissingSchedule,
    Footprint,
    RecurrentRandomSchedule,
)
from .robot_core import RobotState
from .words import normalize_index, transformed_length


def recurrent_random(n: int, p: float, recurrence_bound: int, seed: int) -> EvolvingRing:
    """Edge-recurrent ring: Bernoulli(p) presence patched to the bound."""
    return EvolvingRing(Footprint(n), RecurrentRandomSchedule(n, p, recurrence_bound, seed))


def eventual_missing(
    n: int,
    missing_edge: int,
    cutoff: int,
    p: float = 0.5,
    recurrence_bound: int = 8,
    seed: int = 0,
) -> EvolvingRing:
    """Connected-over-time ring with one edge forced absent from `cutoff` on."""
    inner = RecurrentRandomSchedule(n, p, recurrence_bound, seed)
    return EvolvingRing(Footprint(n), EventualMissingSchedule(inner, missing_edge, cutoff))


CONFINEMENT_ACTIVE = "active"
CONFINEMENT_ESCAPED = "escaped"
CONFINEMENT_SELF_STARVED = "self_starved"


class ConfinementAdversary:
    """The impossibility proof's window adversary, made executable.

    The window is three consecutive nodes v, w, x (u is the node before
    v); the adversary removes exactly the boundary edges that would let a
    robot leave the window, keeps each removal until some robot moves,
    then re-applies the case analysis.  Robots stepping outside the
    window end the episode ("escaped": the adversary stops interfering);
    a cohort that stops moving for `stall_cap` rounds is declared
    self-starving, which itself witnesses non-exploration, and the
    current removal is kept frozen.
    """

    def __init__(self, n: int, window_start: int = 1, stall_cap: int = 100):
        if n < 4:
            raise ValueError("confinement window needs a ring of size >= 4")
        self.n = n
        self.v = window_start % n
        self.w = (window_start + 1) % n
        self.x = (window_start + 2) % n
        self.stall_cap = stall_cap
        self.status = CONFINEMENT_ACTIVE
        self.waiting = 0
        self._last_positions: tuple[int, ...] | None = None
        # Boundary and interior edges of the window, by the proof's names.
        self.e_vl = (self.v - 1) % n
        self.e_wr = self.w
        self.e_xr = self.x

    def _case_removal(self, occupied: frozenset[int]) -> int:
        v, w, x = self.v, self.w, self.x
        if occupied == {v, w} or occupied == {v}:
            edges = (self.e_vl,)
        elif occupied == {w, x} or occupied == {x}:
            edges = (self.e_xr,)
        elif occupied == {v, x} or occupied == {v, w, x}:
            edges = (self.e_vl, self.e_xr)
        elif occupied == {w}:
            edges = (self.e_wr,)
        else:  # pragma: no cover - guarded by the escape check
            raise AssertionError(f"occupied set {set(occupied)} outside window")
        mask = 0
        for e in edges:
            mask |= 1 << e
        return mask

    def choose_mask(self, t: int, view: RunView) -> int:
        full = view.full_mask
        pos = tuple(view.pos)
        if self._last_positions is None:
            self._last_positions = pos
        elif pos != self._last_positions:
            self._last_positions = pos
            self.waiting = 0
        else:
            self.waiting += 1
        if self.status == CONFINEMENT_ESCAPED:
            return full
        occupied = frozenset(pos)
        if not occupied <= {self.v, self.w, self.x}:
            self.status = CONFINEMENT_ESCAPED
            return full
        if self.status == CONFINEMENT_ACTIVE and self.waiting > self.stall_cap:
            self.status = CONFINEMENT_SELF_STARVED
        return full & ~self._case_removal(occupied)


VERDICT_CONFINABLE = "ConfinableForever"
VERDICT_NOT_CONFINABLE = "NotConfinable"
VERDICT_INCONCLUSIVE = "Inconclusive"


def state_key(
    n: int,
    pos: Sequence[int],
    gdir_cw: Sequence[bool],
    idx: Sequence[int],
    nrpea: Sequence[int],
    hmpea: Sequence[int],
    visited_mask: int,
    ells: Sequence[int],
) -> tuple[tuple, int]:
    """Canonical game-state key under ring rotation, plus the rotation used.

    The read index enters normalized (two indices congruent mod ell are
    behaviorally identical) and nrpea capped at k+1 (all counts above the
    cohort size satisfy the same comparisons).  Among rotations yielding
    the minimal key, the smallest rotation wins, which keeps replay
    deterministic.
    """
    k = len(pos)
    cap = k + 1
    norm_idx = tuple(normalize_index(i, ells[r]) for r, i in enumerate(idx))
    norm_nr = tuple(min(v, cap) for v in nrpea)
    hm = tuple(bool(v) for v in hmpea)
    gd = tuple(bool(v) for v in gdir_cw)
    full = (1 << n) - 1
    best = None
    best_rot = 0
    for rot in range(n):
        rpos = tuple((p + rot) % n for p in pos)
        rvis = ((visited_mask << rot) | (visited_mask >> (n - rot))) & full if rot else visited_mask
        key = (rpos, gd, norm_idx, norm_nr, hm, rvis)
        if best is None or key < best:
            best = key
            best_rot = rot
    return best, best_rot  # type: ignore[return-value]


def _key_str(key: tuple) -> str:
    rpos, gd, idx, nr, hm, vis = key
    return "|".join(
        [
            ",".join(map(str, rpos)),
            "".join("1" if b else "0" for b in gd),
            ",".join(map(str, idx)),
            ",".join(map(str, nr)),
            "".join("1" if b else "0" for b in hm),
            str(vis),
        ]
    )


@dataclass
class Witness:
    """A replayable confinement policy: canonical state -> absent edges."""

    n: int
    algo: str
    max_absent: int
    robots: list[RobotState]
    policy: dict[str, tuple[int, ...]]
    path_length: int
    cycle_length: int
    cycle_always_absent: tuple[int, ...] = ()
    starved_nodes: tuple[int, ...] = ()


@dataclass
class SearchResult:
    verdict: str
    explored: int
    state_budget: int
    max_absent: int
    witness: Witness | None = None
    explored_keys: set[tuple] | None = None  # populated on request


def _positions_mask(pos: Sequence[int]) -> int:
    m = 0
    for p in pos:
        m |= 1 << p
    return m


class _GameContext:
    def __init__(self, n: int, algo: str, robots: Sequence[RobotState], max_absent: int):
        self.n = n
        self.k = len(robots)
        self.pef3 = algo == ALGO_PEF3
        self.tids = [r.transformed_id for r in robots]
        self.ells = [r.ell for r in robots]
        self.chir_cw = [r.chirality is Chirality.RIGHT_IS_CLOCKWISE for r in robots]
        self.full = (1 << n) - 1
        self.max_absent = max_absent

    def start_state(self, robots: Sequence[RobotState]) -> tuple:
        pos = [r.position for r in robots]
        gdir = [to_global(r.direction, r.chirality) is GlobalDirection.CLOCKWISE for r in robots]
        idx = [r.i for r in robots]
        nr = [r.nrpea for r in robots]
        hm = [1 if r.hmpea else 0 for r in robots]
        key, _ = state_key(self.n, pos, gdir, idx, nr, hm, _positions_mask(pos), self.ells)
        return key

    def choices(self, key: tuple) -> list[int]:
        """Absent-edge masks, largest removal sets first, then lexicographic."""
        pos = key[0]
        incident = sorted({p for q in pos for p in (q, (q - 1) % self.n)})
        out = []
        top = min(self.max_absent, len(incident))
        for size in range(top, -1, -1):
            for combo in combinations(incident, size):
                m = 0
                for e in combo:
                    m |= 1 << e
                out.append(m)
        return out

    def transition(self, key: tuple, absent_mask: int) -> tuple:
        """Apply one round from the canonical representative configuration."""
        rpos, gd, idx, nr, hm, vis = key
        pos = list(rpos)
        dir_right = [gd[r] == self.chir_cw[r] for r in range(self.k)]
        idx_l = list(idx)
        nr_l = list(nr)
        hm_l = [1 if b else 0 for b in hm]
        mask = self.full & ~absent_mask
        new_pos, gdir_out, _moved = _round_kernel(
            self.n, self.pef3, mask, pos, dir_right, self.chir_cw, idx_l, nr_l, hm_l,
            self.tids, self.ells, False, False, False,
        )
        new_vis = vis | _positions_mask(new_pos)
        child, _ = state_key(
            self.n, new_pos, gdir_out, idx_l, nr_l, hm_l, new_vis, self.ells
        )
        return child


def game_search(
    n: int,
    robots: Sequence[RobotState],
    algo: str,
    max_absent: int = 1,
    state_budget: int = 2_000_000,
    collect_states: bool = False,
) -> SearchResult:
    """Exhaustive search for an adversary that starves some node forever.

    Explores the directed graph whose nodes are canonical (configuration,
    visited-set) pairs and whose edges are the adversary's per-round
    removal choices (subsets of edges incident to robot positions, at
    most `max_absent` at once; distant edges cannot influence any
    snapshot).  A reachable cycle whose visited set misses a node proves
    ConfinableForever and yields a replayable policy; exhausting the
    reachable space proves NotConfinable for this choice set; exceeding
    `state_budget` states is reported as Inconclusive, never silently
    truncated.
    """
    if n > 6 or len(robots) > 3:
        raise ValueError("game search is desk-scale: need n <= 6 and <= 3 robots")
    if algo not in (ALGO_PEF3, ALGO_PEF2):
        raise ValueError(f"unknown algo {algo!r}")
    if max_absent < 0 or max_absent > n:
        raise ValueError(f"max_absent must be in 0..{n}")
    ctx = _GameContext(n, algo, robots, max_absent)
    full_visited = ctx.full
    start = ctx.start_state(robots)
    if start[5] == full_visited:
        return SearchResult(
            VERDICT_NOT_CONFINABLE, 0, state_budget, max_absent,
            explored_keys=set() if collect_states else None,
        )

    WHITE, GRAY, BLACK = 0, 1, 2
    color: dict[tuple, int] = {start: GRAY}
    # Each frame: [state, choice list, index of the choice being explored].
    stack: list[list] = [[start, ctx.choices(start), -1]]
    explored = 1
    cycle_entry: tuple | None = None

    while stack:
        frame = stack[-1]
        frame[2] += 1
        if frame[2] >= len(frame[1]):
            color[frame[0]] = BLACK
            stack.pop()
            continue
        child = ctx.transition(frame[0], frame[1][frame[2]])
        if child[5] == full_visited:
            continue  # all nodes visited: this play is lost for the adversary
        st = color.get(child, WHITE)
        if st == GRAY:
            cycle_entry = child
            break
        if st == BLACK:
            continue
        if explored >= state_budget:
            return SearchResult(
                VERDICT_INCONCLUSIVE, explored, state_budget, max_absent,
                explored_keys=set(color) if collect_states else None,
            )
        color[child] = GRAY
        explored += 1
        stack.append([child, ctx.choices(child), -1])

    if cycle_entry is None:
        return SearchResult(
            VERDICT_NOT_CONFINABLE, explored, state_budget, max_absent,
            explored_keys=set(color) if collect_states else None,
        )

    policy: dict[str, tuple[int, ...]] = {}
    for state, choices, idx in stack:
        absent_mask = choices[idx]
        policy[_key_str(state)] = tuple(e for e in range(n) if absent_mask >> e & 1)
    entry_index = next(i for i, f in enumerate(stack) if f[0] == cycle_entry)
    path_length = entry_index
    cycle_length = len(stack) - entry_index
    witness = Witness(
        n=n,
        algo=algo,
        max_absent=max_absent,
        robots=list(robots),
        policy=policy,
        path_length=path_length,
        cycle_length=cycle_length,
    )
    _annotate_witness(witness)
    return SearchResult(
        VERDICT_CONFINABLE, explored, state_budget, max_absent, witness,
        explored_keys=set(color) if collect_states else None,
    )


def _annotate_witness(witness: Witness) -> None:
    """Replay the witness once to record starved nodes and the cycle's
    permanently absent edges (empty or a single edge keeps the play
    connected-over-time)."""
    rounds = witness.path_length + 2 * max(witness.cycle_length, 1)
    trace = replay_witness(witness, rounds)
    full = (1 << witness.n) - 1
    lo = witness.path_length
    hi = lo + witness.cycle_length
    absent_always = full
    for t in range(lo, hi):
        absent_always &= full & ~int(trace.edges[t])
    witness.cycle_always_absent = tuple(
        e for e in range(witness.n) if absent_always >> e & 1
    )
    seen = set(int(p) for p in trace.config_positions().flat)
    witness.starved_nodes = tuple(sorted(set(range(witness.n)) - seen))


class WitnessReplayError(RuntimeError):
    pass


class WitnessStrategy:
    """Replays a witness policy; raises if the play ever leaves it."""

    def __init__(self, witness: Witness):
        self.witness = witness
        self._ells = [transformed_length(r.id) for r in witness.robots]
        self._visited = 0

    def choose_mask(self, t: int, view: RunView) -> int:
        n = view.n
        self._visited |= _positions_mask(view.pos)
        gdir = [view.dir_right[r] == view.chir_cw[r] for r in range(len(view.pos))]
        key, rot = state_key(
            n, view.pos, gdir, view.idx, view.nrpea, view.hmpea, self._visited, self._ells
        )
        absent = self.witness.policy.get(_key_str(key))
        if absent is None:
            raise WitnessReplayError(f"round {t}: state not covered by witness policy")
        mask = view.full_mask
        for e in absent:
            mask &= ~(1 << (e - rot) % n)
        return mask


def replay_witness(witness: Witness, rounds: int) -> Trace:
    """Run the engine under the witness policy from its start configuration."""
    strategy = WitnessStrategy(witness)
    return run_states(
        witness.n,
        witness.algo,
        witness.robots,
        rounds,
        strategy=strategy,
        meta_extra={
            "schedule": {"kind": "witness", "max_absent": witness.max_absent},
            "adversary": "witness",
        },
    )


def write_witness(witness: Witness, out: IO[str]) -> None:
    header = {
        "format": "ringsweep-witness",
        "version": 1,
        "n": witness.n,
        "algo": witness.algo,
        "max_absent": witness.max_absent,
        "path_length": witness.path_length,
        "cycle_length": witness.cycle_length,
        "cycle_always_absent": list(witness.cycle_always_absent),
        "starved_nodes": list(witness.starved_nodes),
        "robots": [
            {
                "id": r.id,
                "pos": r.position,
                "dir": r.direction.value,
                "chirality": r.chirality.value,
                "i": r.i,
                "nrpea": r.nrpea,
                "hmpea": r.hmpea,
            }
            for r in witness.robots
        ],
    }
    out.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
    for key in sorted(witness.policy):
        record = {"state": key, "absent": list(witness.policy[key])}
        out.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")


def write_witness_file(witness: Witness, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_witness(witness, fh)


def read_witness(lines) -> Witness:
    it = iter(lines)
    header = json.loads(next(it))
    if header.get("format") != "ringsweep-witness":
        raise ValueError("not a ringsweep witness file")
    robots = [
        RobotState.make(
            r["id"],
            position=r["pos"],
            direction=Direction(r["dir"]),
            chirality=Chirality(r["chirality"]),
            i=r["i"],
            nrpea=r["nrpea"],
            hmpea=r["hmpea"],
        )
        for r in header["robots"]
    ]
    policy = {}
    for line in it:
        if not line.strip():
            continue
        rec = json.loads(line)
        policy[rec["state"]] = tuple(rec["absent"])
    return Witness(
        n=header["n"],
        algo=header["algo"],
        max_absent=header["max_absent"],
        robots=robots,
        policy=policy,
        path_length=header["path_length"],
        cycle_length=header["cycle_length"],
        cycle_always_absent=tuple(header["cycle_always_absent"]),
        starved_nodes=tuple(header["starved_nodes"]),
    )


def read_witness_file(path: str) -> Witness:
    with open(path, "r", encoding="utf-8") as fh:
        return read_witness(fh)
