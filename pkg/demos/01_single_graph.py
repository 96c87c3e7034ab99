"""
From a recorded scenario to one heterogeneous graph
====================================================

Parse a scenario file, pick a timestep, and walk through every store of
the extracted graph: typed nodes, typed edges, and their feature
channels.
"""
from pathlib import Path

from trafficgraph import ExtractionConfig, Simulation, TrafficExtractor, parse_scenario

SCENARIOS = Path(__file__).resolve().parents[1] / "tests" / "data" / "scenarios"

# a scenario is a static lanelet map plus timestamped vehicle trajectories
scenario = parse_scenario((SCENARIOS / "FIX_CrossMerge-1.xml").read_bytes())
print(f"scenario {scenario.id}: {len(scenario.lanelets)} lanelets, "
      f"{len(scenario.obstacles)} vehicles, dt={scenario.dt}s")

# Simulation wraps the scenario with per-timestep lookup and fills in
# acceleration / yaw rate by differentiating the recorded states
sim = Simulation(scenario)
print(f"recorded timesteps: {sim.lifetime.start}..{sim.lifetime.stop - 1}")

# the default configuration: Delaunay-neighbor vehicle edges, every
# lanelet relation type, center-point lane assignment
extractor = TrafficExtractor(sim, ExtractionConfig())
graph = extractor.extract(5)

print(f"\ngraph at t={graph.timestep}:")
for node_type, store in graph.nodes.items():
    print(f"  nodes[{node_type}]  {store.x.shape}")
for relation, store in graph.edges.items():
    print(f"  edges[{relation}] {store.x.shape}")

# every store documents its feature layout through named channels
vehicles = graph.nodes["v"]
print("\nvehicle channels:",
      ", ".join(f"{ch.name}({ch.width})" for ch in vehicles.channels))

# channel_slice gives the column range of one channel, so features can
# be pulled out by name instead of magic indices
speeds = vehicles.x[:, vehicles.channel_slice("velocity")]
print("velocity rows (m/s):")
for vid, row in zip(vehicles.ids, speeds):
    print(f"  vehicle {vid}: vx={row[0]:+.2f} vy={row[1]:+.2f}")

# edge endpoints are row indices into the node stores; map them back
# to vehicle ids to read an edge as "who sees whom"
v2v = graph.edges["v2v"]
source, target = v2v.edge_index[:, 0]
print(f"\nfirst v2v edge: vehicle {vehicles.ids[source]} -> "
      f"{vehicles.ids[target]}, "
      f"distance {v2v.x[0, v2v.channel_slice('distance')][0]:.2f} m")
