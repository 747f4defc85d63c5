"""Deterministic simulation and verification toolkit for perpetual
exploration of highly dynamic (connected-over-time) rings by synchronous
self-stabilizing robots."""

from .directions import Chirality, Direction, GlobalDirection, to_global, to_local
from .ring_model import (
    EdgeClass,
    EdgeRemovalSpec,
    EvolvingRing,
    Footprint,
    classify_prefix,
    remove,
    static_ring,
)
from .robot_core import LookSnapshot, RobotState
from .engine import (
    Configuration,
    Trace,
    fuzz_initial,
    read_trace_file,
    run_states,
    step,
    write_trace_file,
)
from .analysis import (
    CoverageReport,
    Tower,
    coherence_round,
    coverage,
    detect_towers,
    monitor_lemmas,
    sentinel_visitor_report,
)
from .adversary import ConfinementAdversary, game_search, replay_witness
from .scenario import Scenario, parse_scenario_file, run_scenario

__all__ = [
    "Chirality",
    "Configuration",
    "ConfinementAdversary",
    "CoverageReport",
    "Direction",
    "EdgeClass",
    "EdgeRemovalSpec",
    "EvolvingRing",
    "Footprint",
    "GlobalDirection",
    "LookSnapshot",
    "RobotState",
    "Scenario",
    "Tower",
    "Trace",
    "classify_prefix",
    "coherence_round",
    "coverage",
    "detect_towers",
    "fuzz_initial",
    "game_search",
    "monitor_lemmas",
    "parse_scenario_file",
    "read_trace_file",
    "remove",
    "replay_witness",
    "run_scenario",
    "run_states",
    "sentinel_visitor_report",
    "static_ring",
    "step",
    "to_global",
    "to_local",
    "write_trace_file",
]
