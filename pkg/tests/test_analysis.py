"""Towers, coverage, coherence, monitors, sentinel report."""
import random

import numpy as np
import pytest

from ringsweep import analysis
from ringsweep.directions import Chirality, Direction
from ringsweep.engine import fuzz_initial, run_states
from ringsweep.ring_model import (
    INF,
    EdgeRemovalSpec,
    EventualMissingSchedule,
    RecurrentRandomSchedule,
    RemovalSchedule,
    StaticSchedule,
)
from ringsweep.robot_core import RobotState

CW = Chirality.RIGHT_IS_CLOCKWISE
R = Direction.RIGHT
L = Direction.LEFT


def spread_robots(n, ids, rng_seed=1):
    rng = random.Random(rng_seed)
    return fuzz_initial(
        n, ids, rng, overrides={rid: {"pos": (2 * j) % n} for j, rid in enumerate(ids)}
    )


def run_missing_edge(n=6, seed=17, rounds=2500, edge=0, ids=(0, 1, 2)):
    sched = EventualMissingSchedule(RecurrentRandomSchedule(n, 0.5, 8, seed), edge, 0)
    states = fuzz_initial(n, list(ids), random.Random(seed))
    return run_states(
        n, "pef3", states, rounds, schedule=sched, meta_extra={"schedule": sched.describe()}
    )


class TestTowers:
    def test_never_colocated_yields_none(self):
        robots = [
            RobotState.make(0, 0, R, CW),
            RobotState.make(1, 2, R, CW),
            RobotState.make(2, 4, R, CW),
        ]
        trace = run_states(6, "pef3", robots, 40, schedule=StaticSchedule(6))
        assert analysis.detect_towers(trace) == []

    def test_stacked_without_edges_then_separation_is_short_lived(self):
        # Both edges of node 1 absent for rounds 0..4; at round 5 the
        # clockwise edge appears, one robot crosses, the other is blocked.
        sched = RemovalSchedule(
            StaticSchedule(4), EdgeRemovalSpec.of([(0, 0, 4), (1, 0, 4), (0, 5, INF)])
        )
        robots = [
            RobotState.make(0, 1, R, CW, nrpea=1, hmpea=True),  # points at edge 1
            RobotState.make(1, 1, L, CW, nrpea=1, hmpea=True),  # points at edge 0
        ]
        trace = run_states(4, "pef2", robots, 12, schedule=sched)
        towers = analysis.detect_towers(trace)
        assert len(towers) == 1
        tower = towers[0]
        assert (tower.t_start, tower.t_end) == (0, 5)
        assert tower.long_lived is False
        assert tower.kind() == "short_lived"
        assert [tower.node_at(t) for t in range(6)] == [1] * 6
        with pytest.raises(ValueError, match="outside tower interval"):
            tower.node_at(6)

    def test_co_moving_pair_is_long_lived(self):
        robots = [
            RobotState.make(0, 2, R, CW, nrpea=2, hmpea=True),
            RobotState.make(1, 2, R, CW, nrpea=2, hmpea=True),
        ]
        trace = run_states(5, "pef2", robots, 6, schedule=StaticSchedule(5))
        towers = analysis.detect_towers(trace)
        assert len(towers) == 1
        assert towers[0].long_lived is True
        assert towers[0].open_ended  # still together at the horizon

    def test_pair_subsumed_by_triple_on_identical_interval(self):
        robots = [
            RobotState.make(0, 1, R, CW),
            RobotState.make(1, 1, R, CW),
            RobotState.make(2, 1, R, CW),
        ]
        trace = run_states(5, "pef3", robots, 4, schedule=StaticSchedule(5))
        towers = analysis.detect_towers(trace)
        # All three march together: a single 3-member tower, no pair towers.
        assert len(towers) == 1
        assert towers[0].size == 3

    def test_maximality_brute_force_recheck(self):
        rng = random.Random(5)
        for trial in range(25):
            n = rng.randint(4, 6)
            sched = RecurrentRandomSchedule(n, 0.5, 6, 100 + trial)
            states = fuzz_initial(n, [0, 1, 2], rng)
            trace = run_states(n, "pef3", states, 120, schedule=sched)
            positions = trace.config_positions()
            towers = analysis.detect_towers(trace)
            cols = {rid: c for c, rid in enumerate(trace.robot_ids)}
            for tower in towers:
                group = [cols[rid] for rid in tower.member_ids]
                seg = positions[tower.t_start : tower.t_end + 1, group]
                assert (seg == seg[:, [0]]).all(), "members not co-located"
                if tower.t_start > 0:
                    before = positions[tower.t_start - 1, group]
                    assert len(set(before.tolist())) > 1, "interval extensible left"
                if tower.t_end < trace.rounds:
                    after = positions[tower.t_end + 1, group]
                    assert len(set(after.tolist())) > 1, "interval extensible right"
                others = [c for c in range(len(cols)) if c not in group]
                for c in others:
                    joined = positions[tower.t_start : tower.t_end + 1, [group[0], c]]
                    assert not (joined[:, 0] == joined[:, 1]).all(), "member set extensible"


class TestCoverage:
    def test_static_march_covered_within_ring_size(self):
        states = spread_robots(5, [0, 1, 2])
        trace = run_states(5, "pef3", states, 200, schedule=StaticSchedule(5))
        report = analysis.coverage(trace, 2, 5)
        assert report.covered and report.max_gap <= 5
        assert "Covered" in report.verdict()
        for v in range(5):
            rounds = report.node_visit_rounds[v]
            assert rounds.size == report.node_visits[v]
            assert rounds.min() >= 2
            assert (np.diff(rounds) <= 5).all()

    def test_short_trace_rejected(self):
        states = spread_robots(5, [0, 1, 2])
        trace = run_states(5, "pef3", states, 10, schedule=StaticSchedule(5))
        with pytest.raises(ValueError, match="shorter than window"):
            analysis.coverage(trace, 8, 5)
        with pytest.raises(ValueError, match="suffix_start"):
            analysis.coverage(trace, 10)

    def test_starved_node_reported(self):
        # A lone robot pinned by a permanently missing edge in front of it.
        sched = RemovalSchedule(StaticSchedule(4), EdgeRemovalSpec.of([(1, 0, INF)]))
        robots = [RobotState.make(0, 1, R, CW, nrpea=1, hmpea=True)]
        trace = run_states(4, "pef3", robots, 50, schedule=sched)
        report = analysis.coverage(trace, 0)
        assert not report.covered
        assert report.starved_node in {0, 2, 3}
        assert "Starved" in report.verdict()

    def test_shrinking_window_only_degrades(self):
        states = spread_robots(6, [0, 1, 2])
        trace = run_states(6, "pef3", states, 300, schedule=StaticSchedule(6))
        measured = analysis.coverage(trace, 2)
        assert measured.covered
        wide = analysis.coverage(trace, 2, measured.max_gap)
        tight = analysis.coverage(trace, 2, measured.max_gap - 1)
        assert wide.covered
        assert not tight.covered


class TestCoherence:
    def test_static_coherent_from_round_one(self):
        states = spread_robots(5, [0, 1, 2])
        trace = run_states(5, "pef3", states, 30, schedule=StaticSchedule(5))
        assert [analysis.coherence_round(trace, rid) for rid in (0, 1, 2)] == [1, 1, 1]
        assert analysis.trace_t_max(trace) == 1

    def test_blocked_node_delays_coherence(self):
        # Both edges of node 0 absent during rounds 0..8: first
        # edge-activation at round 9, coherent from round 10.
        sched = RemovalSchedule(
            StaticSchedule(4), EdgeRemovalSpec.of([(0, 0, 8), (3, 0, 8)])
        )
        robots = [RobotState.make(0, 0, R, CW), RobotState.make(1, 2, R, CW)]
        trace = run_states(4, "pef3", robots, 30, schedule=sched)
        assert analysis.coherence_round(trace, 0) == 10
        assert analysis.coherence_round(trace, 1) == 1
        assert analysis.trace_t_max(trace) == 10

    def test_never_activated_reports_none(self):
        sched = RemovalSchedule(
            StaticSchedule(4), EdgeRemovalSpec.of([(0, 0, INF), (3, 0, INF)])
        )
        robots = [RobotState.make(0, 0, R, CW)]
        trace = run_states(4, "pef3", robots, 20, schedule=sched)
        assert analysis.coherence_round(trace, 0) is None
        assert analysis.trace_t_max(trace) is None

    def test_unknown_robot_rejected(self):
        robots = [RobotState.make(0, 0)]
        trace = run_states(4, "pef3", robots, 5, schedule=StaticSchedule(4))
        with pytest.raises(ValueError, match="not present"):
            analysis.coherence_round(trace, 9)


class TestMonitors:
    def test_clean_runs_have_no_violations(self):
        for seed in range(6):
            trace = run_missing_edge(seed=40 + seed, rounds=1500)
            assert analysis.monitor_lemmas(trace) == []
        states = spread_robots(5, [0, 1, 2])
        trace = run_states(5, "pef3", states, 300, schedule=StaticSchedule(5))
        assert analysis.monitor_lemmas(trace) == []

    @pytest.mark.parametrize(
        "mutation,expected_monitors",
        [
            ("freeze_hmpea", {"coherence"}),
            ("skip_update", {"coherence"}),
            ("literal_index", {"index-advance"}),
        ],
    )
    def test_mutations_trip_monitors(self, mutation, expected_monitors):
        # Scenario engineered so every mutation is observable: a stuck
        # tower exercising the bit word (for the index rule) and moving
        # robots (for the bookkeeping rules).
        sched = EventualMissingSchedule(RecurrentRandomSchedule(6, 1.0, 8, 5), 0, 0)
        robots = [
            RobotState.make(0, 0, R, CW, i=1, nrpea=2, hmpea=False),
            RobotState.make(2, 0, R, CW, i=3, nrpea=2, hmpea=False),
            RobotState.make(1, 3, R, CW, i=5, nrpea=1, hmpea=True),
        ]
        trace = run_states(
            6, "pef3", robots, 400, schedule=sched,
            mutations=frozenset({mutation}), meta_extra={"schedule": sched.describe()},
        )
        violations = analysis.monitor_lemmas(trace)
        assert violations, f"mutation {mutation} went unnoticed"
        assert expected_monitors <= {v.monitor for v in violations}

    def test_hand_edited_trace_is_caught(self):
        trace = run_missing_edge(seed=50, rounds=400)
        trace.hmpea = trace.hmpea.copy()
        activated = np.nonzero(trace.adjacent()[:, 0])[0]
        trace.hmpea[activated[5], 0] = not trace.hmpea[activated[5], 0]
        violations = analysis.monitor_lemmas(trace)
        assert any(v.monitor == "coherence" for v in violations)

    def _frozen_cohort_view(self):
        # Edge-activated once at round 0 (one counter-clockwise move),
        # frozen afterwards on nodes {3, 0, 1}: node 2 starves.
        sched = RemovalSchedule(
            StaticSchedule(4),
            EdgeRemovalSpec.of([(e, 1, INF) for e in range(4)]),
        )
        robots = [
            RobotState.make(0, 0, L, CW, nrpea=1, hmpea=True),
            RobotState.make(1, 1, L, CW, nrpea=1, hmpea=True),
            RobotState.make(2, 2, L, CW, nrpea=1, hmpea=True),
        ]
        trace = run_states(4, "pef3", robots, 40, schedule=sched)
        assert analysis.trace_t_max(trace) == 1
        return analysis._TraceView(trace)

    def _tower(self, ids, cols, start, end, long_lived=True, size_nodes=None):
        import numpy as np

        return analysis.Tower(
            member_ids=ids,
            member_cols=cols,
            t_start=start,
            t_end=end,
            nodes=np.zeros(end - start + 1, dtype=np.int16),
            open_ended=False,
            long_lived=long_lived,
            first_activation=start if long_lived else None,
        )

    def test_ring_visited_monitor_gap_branch(self):
        # Two consecutive closed 2-long-lived towers with a gap between
        # them: the frozen cohort never visits node 3, so the monitor must
        # flag the window.
        view = self._frozen_cohort_view()
        towers = [
            self._tower((0, 1), (0, 1), 3, 6),
            self._tower((1, 2), (1, 2), 12, 15),
        ]
        out = []
        analysis._monitor_ring_visited(view, towers, out)
        assert len(out) == 1
        assert out[0].monitor == "ring-visited-between-towers"
        assert "[2]" in out[0].detail  # node 2 is the starved one

    def test_ring_visited_monitor_adjacent_branch_skips_first_tower(self):
        view = self._frozen_cohort_view()
        first = self._tower((0, 1), (0, 1), 3, 6)
        second = self._tower((1, 2), (1, 2), 7, 10)  # starts right after the first
        out = []
        analysis._monitor_ring_visited(view, [first, second], out)
        # The adjacent-towers claim holds only from the second tower on.
        assert out == []
        third = self._tower((0, 2), (0, 2), 11, 14)
        out = []
        analysis._monitor_ring_visited(view, [first, second, third], out)
        assert len(out) == 1 and out[0].round == 11

    def test_formation_monitors_flag_crafted_towers(self):
        view = self._frozen_cohort_view()
        rogue3 = self._tower((0, 1, 2), (0, 1, 2), 5, 9)
        out = []
        analysis._monitor_tower_formation(view, [rogue3], "pef3", out)
        monitors = {v.monitor for v in out}
        # A 3-robot tower popping up without a 2-long-lived parent violates
        # both the formation precondition and the no-new-long-lived claim.
        assert monitors == {
            "three-tower-needs-two-long-lived",
            "no-new-three-long-lived",
        }
        with_parent = [self._tower((0, 1), (0, 1), 2, 5), rogue3]
        out = []
        analysis._monitor_tower_formation(view, with_parent, "pef3", out)
        assert {v.monitor for v in out} == {"no-new-three-long-lived"}

    def test_pef2_no_new_two_long_lived_monitor(self):
        sched = RemovalSchedule(
            StaticSchedule(4), EdgeRemovalSpec.of([(e, 1, INF) for e in range(4)])
        )
        robots = [
            RobotState.make(0, 0, L, CW, nrpea=1, hmpea=True),
            RobotState.make(1, 1, L, CW, nrpea=1, hmpea=True),
        ]
        trace = run_states(4, "pef2", robots, 20, schedule=sched)
        view = analysis._TraceView(trace)
        rogue = self._tower((0, 1), (0, 1), 4, 8)
        out = []
        analysis._monitor_tower_formation(view, [rogue], "pef2", out)
        assert [v.monitor for v in out] == ["no-new-two-long-lived"]
        innocent = self._tower((0, 1), (0, 1), 0, 8)  # present from the start
        out = []
        analysis._monitor_tower_formation(view, [innocent], "pef2", out)
        assert out == []

    def test_findings_writer_format(self, tmp_path):
        v = analysis.Violation("coherence", 3, "detail text")
        path = tmp_path / "findings.jsonl"
        with open(path, "w") as fh:
            analysis.write_findings([v], fh)
        import json

        rec = json.loads(path.read_text().splitlines()[0])
        assert rec == {"monitor": "coherence", "round": 3, "detail": "detail text"}


class TestSentinelReport:
    def test_missing_edge_run_establishes_sentinels(self):
        trace = run_missing_edge(n=5, seed=17, rounds=3000, edge=2)
        report = analysis.sentinel_visitor_report(trace)
        assert report.missing_edge == 2
        assert report.established_round is not None
        assert report.meetings, "visitor never met a sentinel"
        assert all(p >= 1 for p in report.periods)

    def test_static_trace_rejected(self):
        states = spread_robots(5, [0, 1, 2])
        trace = run_states(5, "pef3", states, 50, schedule=StaticSchedule(5))
        with pytest.raises(ValueError, match="no eventual missing edge"):
            analysis.sentinel_visitor_report(trace)
