"""Breaking a stuck tower with bit words, and the oracles that certify it.

Two robots stuck together in the same direction draw bits from their
transformed identifiers (each id bit duplicated, then 010 appended) in
round-robin lockstep.  Distinct identifiers guarantee the drawn global
directions eventually differ, whatever the starting indices and
chiralities: the periodic repetitions of two distinct transformed words
never share an infinite factor, plainly or complemented.
"""
from ringsweep.directions import Chirality
from ringsweep.engine import run_states
from ringsweep.ring_model import EventualMissingSchedule, StaticSchedule
from ringsweep.robot_core import RobotState
from ringsweep.directions import Direction
from ringsweep import analysis
from ringsweep.words import (
    complement,
    divergence_cap,
    divergence_rounds,
    max_common_factor_len,
    transform_identifier,
)

CW = Chirality.RIGHT_IS_CLOCKWISE

for rid in (0, 1, 2, 5):
    print(f"id {rid}: transformed identifier {transform_identifier(rid)}")

u, v = transform_identifier(0), transform_identifier(2)
bound = len(u) + len(v)
print(f"\nlongest common factor of {u}^w and {v}^w (cap {bound}): "
      f"{max_common_factor_len(u, v, bound)}")
print(f"same against the complement {complement(v)}: "
      f"{max_common_factor_len(u, complement(v), bound)}")

oracle = divergence_rounds(0, 1, CW, 2, 3, CW, divergence_cap(0, 2))
print(f"\ndivergence oracle: ids 0 and 2 from indices 1 and 3, same chirality -> "
      f"global directions differ on draw {oracle}")

# Now watch the real thing: robots 0 and 2 stacked at the endpoint of a
# permanently missing edge, both remembering company and a failed move.
schedule = EventualMissingSchedule(StaticSchedule(6), 0, cutoff=0)
robots = [
    RobotState.make(0, 0, Direction.RIGHT, CW, i=1, nrpea=2, hmpea=False),
    RobotState.make(2, 0, Direction.RIGHT, CW, i=3, nrpea=2, hmpea=False),
    RobotState.make(1, 3, Direction.RIGHT, CW, i=5, nrpea=1, hmpea=True),
]
trace = run_states(6, "pef3", robots, 60, schedule=schedule,
                   meta_extra={"schedule": schedule.describe()})
towers = analysis.detect_towers(trace)
stuck = next(t for t in towers if t.member_ids == (0, 2))
print(f"\nstuck tower of robots {stuck.member_ids}: rounds {stuck.t_start}..{stuck.t_end} "
      f"({stuck.kind()})")
print("read indices of the pair while stuck (one draw per edge-activated stuck round):")
for t in range(stuck.t_start, min(stuck.t_end + 1, 12)):
    print(f"  round {t}: i = {trace.idx[t, 0]}, {trace.idx[t, 1]}"
          f"   global dirs {'CW' if trace.gdir_cw[t,0] else 'CCW'},"
          f" {'CW' if trace.gdir_cw[t,1] else 'CCW'}")
print(f"the tower breaks exactly when the drawn global directions first differ")
