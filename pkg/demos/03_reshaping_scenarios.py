"""
Reshaping scenarios before extraction
======================================

Transforms run on the scenario itself, before any graph is built.
Filters veto whole scenarios; preprocessors rewrite the map.  The >>
operator chains them left to right.
"""
from pathlib import Path

from trafficgraph import (
    SegmentLanelets,
    TrafficFilter,
    build_l2l_edges,
    parse_scenario,
)

SCENARIOS = Path(__file__).resolve().parents[1] / "tests" / "data" / "scenarios"
scenario = parse_scenario((SCENARIOS / "FIX_CrossMerge-1.xml").read_bytes())

lengths = sorted(l.center.length for l in scenario.lanelets.values())
print(f"original map: {len(scenario.lanelets)} lanelets, "
      f"lengths {lengths[0]:.1f}..{lengths[-1]:.1f} m")

# TrafficFilter rejects scenarios that are too empty to be interesting;
# SegmentLanelets cuts long lanelets into chained pieces of bounded
# length, rewiring successors/predecessors/adjacency around the cuts
chain = TrafficFilter(min=5) >> SegmentLanelets(size=12.0)
print("chain:", chain.describe())

out = chain(scenario)
assert out is not None, "scenario was filtered out"

pieces = sorted(l.center.length for l in out.lanelets.values())
print(f"segmented map: {len(out.lanelets)} lanelets, "
      f"lengths {pieces[0]:.1f}..{pieces[-1]:.1f} m (cap 12 m)")

# total arclength is conserved by the cuts
print(f"total length {sum(lengths):.3f} m -> {sum(pieces):.3f} m")

# lanelet-to-lanelet relations follow the rewired references
codes = {0: "predecessor", 1: "successor", 2: "adjacent_left",
         3: "adjacent_right", 4: "merging", 5: "diverging", 6: "conflicting"}
for label, scn in (("before", scenario), ("after", out)):
    edges = build_l2l_edges(scn)
    counts = {}
    for edge in edges:
        counts[codes[edge.code]] = counts.get(codes[edge.code], 0) + 1
    print(f"l2l {label}: {counts}")

# a filter that this scenario fails: demand at least 50 vehicles
strict = TrafficFilter(min=50) >> SegmentLanelets(size=12.0)
print("strict chain keeps the scenario:", strict(scenario) is not None)
