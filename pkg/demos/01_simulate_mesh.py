"""
Simulating the mesh and its labelled events
===========================================

Walk a seeded three-node mesh for a dozen steps. Each step draws an event,
renders the observation a model would read, labels it with the oracle action,
and applies that action.
"""

import random

from meshpilot import init_mesh, next_event, record_event, render_observation, oracle_action
from meshpilot.mesh_sim import step

# %%
# A fresh mesh: three nodes ten metres apart, all on channel 36.
state = init_mesh(node_count=3, start_channel=36)
for node in state.nodes:
    print(node.name, node.position.as_list(), "channel", node.channel)

# %%
# Events come from one seeded stream, so the walk below is identical on every run.
rng = random.Random(7)
for _ in range(12):
    event = next_event(state, rng)
    state = record_event(state, event)
    action = oracle_action(event, state)
    print(f"{render_observation(event, state):<100} -> {action}")
    state, stale = step(state, action)

# %%
# Where the walk left the mesh.
print("channel", state.shared_channel, "| jammed", sorted(state.jammed_channels))
for node in state.nodes:
    print(node.name, "neighbors", node.neighbors, "position", node.position.as_list())
