import random

import pytest
from hypothesis import given, settings, strategies as st

from meshpilot.actions import Action, enumerate_valid_actions
from meshpilot.errors import ConfigError, InvalidActionError, StaleActionError
from meshpilot.mesh_sim import (
    EventKind,
    MeshState,
    NetworkEvent,
    Position,
    apply_action,
    init_mesh,
    next_event,
    record_event,
    serialize_state,
    step,
)


def test_init_default_mesh(mesh):
    assert [n.name for n in mesh.nodes] == ["node1", "node2", "node3"]
    assert all(n.channel == 36 for n in mesh.nodes)
    assert mesh.shared_channel == 36
    assert all(n.neighbors == [] for n in mesh.nodes)
    assert mesh.pending_neighbor_updates == {} and mesh.pending_position_updates == {}
    assert mesh.target_throughput_mbps == 2
    assert [n.position for n in mesh.nodes] == [
        Position(0.0, 0.0, 0.0), Position(10.0, 0.0, 0.0), Position(20.0, 0.0, 0.0)]


def test_init_single_node():
    m = init_mesh(1, 40)
    assert m.node_count == 1 and m.nodes[0].channel == 40 and m.nodes[0].neighbors == []


@pytest.mark.parametrize("n, ch", [(0, 36), (3, 35), (3, 47), (-1, 40)])
def test_init_rejects_bad_config(n, ch):
    with pytest.raises(ConfigError):
        init_mesh(n, ch)


def test_next_event_golden_seed(table_event):
    # seed 48 was found by scanning seeds once; frozen here
    assert next_event(init_mesh(3, 36), random.Random(48)) == table_event


def test_next_event_replay(mesh):
    assert next_event(mesh, random.Random(5)) == next_event(mesh, random.Random(5))


def test_next_event_first_events_frozen(mesh):
    rng = random.Random(7)
    kinds = [next_event(mesh, rng).kind.value for _ in range(6)]
    # observed once and frozen; guards the documented draw order
    assert kinds == ["StatusReport", "StatusReport", "BestNeighborsUpdate",
                     "PositionUpdate", "StatusReport", "JammingDetected"]


@pytest.mark.parametrize("seed", range(50))
def test_single_node_never_needs_peers(seed):
    m = init_mesh(1, 36)
    rng = random.Random(seed)
    for _ in range(20):
        e = next_event(m, rng)
        assert e.kind not in (EventKind.BEST_NEIGHBORS_UPDATE, EventKind.MALICIOUS_TRAFFIC)


@settings(max_examples=200)
@given(st.integers(0, 2**32), st.integers(1, 6))
def test_event_payload_constraints(seed, n):
    m = init_mesh(n, 36)
    e = next_event(m, random.Random(seed))
    assert e.kind in set(EventKind)
    if e.kind is EventKind.BEST_NEIGHBORS_UPDATE:
        assert 1 <= len(e.neighbors) <= n - 1
        assert len(set(e.neighbors)) == len(e.neighbors)
        assert e.subject not in e.neighbors
    if e.kind in (EventKind.JAMMING_DETECTED, EventKind.INTERFERENCE_DETECTED):
        assert 36 <= e.channel <= 46
    if e.kind is EventKind.MALICIOUS_TRAFFIC:
        assert 2 <= e.subject <= n


def test_record_event_registers_pending(mesh, table_event):
    after = record_event(mesh, table_event)
    assert after.pending_neighbor_updates == {1: [2, 3]}
    assert mesh.pending_neighbor_updates == {}


def test_update_neighbors_consumes_pending(mesh, table_event):
    after = apply_action(record_event(mesh, table_event), Action.update_neighbors(1))
    assert after.node(1).neighbors == [2, 3]
    assert after.pending_neighbor_updates == {}
    assert after.step_counter == 1


def test_switch_channel(mesh):
    after = apply_action(mesh, Action.switch_channel(40))
    assert after.shared_channel == 40
    assert all(n.channel == 40 for n in after.nodes)
    assert mesh.shared_channel == 36


def _wired(mesh):
    for k, nbrs in {1: [2, 3], 2: [1, 3], 3: [1, 2]}.items():
        mesh.node(k).neighbors = nbrs
    return mesh


def test_disconnect(mesh):
    after = apply_action(_wired(mesh), Action.disconnect(2))
    assert [n.neighbors for n in after.nodes] == [[3], [], [1]]


def test_disconnect_idempotent(mesh):
    once = apply_action(_wired(mesh), Action.disconnect(2))
    twice = apply_action(once, Action.disconnect(2))
    twice.step_counter = once.step_counter
    assert serialize_state(once) == serialize_state(twice)


def test_stale_position_update(mesh):
    with pytest.raises(StaleActionError) as info:
        apply_action(mesh, Action.update_position(2))
    assert info.value.state.step_counter == 1
    info.value.state.step_counter = 0
    assert serialize_state(info.value.state) == serialize_state(mesh)
    new, err = step(mesh, Action.update_neighbors(1))
    assert isinstance(err, StaleActionError) and new.step_counter == 1


def test_invalid_action(mesh):
    with pytest.raises(InvalidActionError):
        apply_action(mesh, Action.disconnect(1))
    with pytest.raises(InvalidActionError):
        apply_action(mesh, Action.switch_channel(50))
    with pytest.raises(InvalidActionError):
        apply_action(init_mesh(2, 36), Action.update_neighbors(3))


def test_set_throughput_and_position(mesh):
    after = apply_action(mesh, Action.set_throughput(10))
    assert after.target_throughput_mbps == 10
    e = NetworkEvent(EventKind.POSITION_UPDATE, subject=2, position=Position(1.0, 2.0, 0.0))
    after = apply_action(record_event(after, e), Action.update_position(2))
    assert after.node(2).position == Position(1.0, 2.0, 0.0)
    assert after.pending_position_updates == {}


def test_serialization_round_trip(mesh, table_event):
    s = record_event(apply_action(mesh, Action.switch_channel(44)), table_event)
    text = serialize_state(s)
    assert serialize_state(MeshState.from_dict(__import__("json").loads(text))) == text
    assert text.startswith('{"jam_reports"')


def test_jam_reports_expire(mesh):
    e = NetworkEvent(EventKind.JAMMING_DETECTED, channel=40)
    s = record_event(mesh, e)
    assert 40 in s.jammed_channels
    for _ in range(s.jam_window):
        s = apply_action(s, Action.no_action())
    assert 40 not in s.jammed_channels


def test_event_validation():
    with pytest.raises(ConfigError):
        NetworkEvent(EventKind.JAMMING_DETECTED, channel=12)
    with pytest.raises(ConfigError):
        NetworkEvent(EventKind.MALICIOUS_TRAFFIC)
    with pytest.raises(ConfigError):
        Position(float("nan"), 0.0, 0.0)


# --- property tests over random action sequences ---------------------------

def _random_walk(seed, n, length):
    """Interleave seeded events with arbitrary valid actions."""
    rng = random.Random(seed)
    state = init_mesh(n, 36)
    valid = enumerate_valid_actions(state)
    for _ in range(length):
        state = record_event(state, next_event(state, rng))
        action = valid[int(rng.random() * len(valid))]
        state, _ = step(state, action)
        yield state, action


def _check(state):
    assert 36 <= state.shared_channel <= 46
    for node in state.nodes:
        assert node.channel == state.shared_channel
        assert len(set(node.neighbors)) == len(node.neighbors)
        assert node.id not in node.neighbors
    assert all(1 <= k <= state.node_count for k in state.pending_neighbor_updates)
    assert all(1 <= k <= state.node_count for k in state.pending_position_updates)


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 5), st.integers(1, 40))
def test_invariants_hold_along_random_sequences(seed, n, length):
    for state, action in _random_walk(seed, n, length):
        _check(state)
        if action.kind.value == "NoAction":
            before = state.copy()
            after = apply_action(state, action)
            assert after.step_counter == before.step_counter + 1
            after.step_counter = before.step_counter
            assert serialize_state(after) == serialize_state(before)
        if action.kind.value == "DisconnectNode":
            again = apply_action(state, action)
            again.step_counter = state.step_counter
            assert serialize_state(again) == serialize_state(state)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31))
def test_apply_action_is_pure(seed):
    rng = random.Random(seed)
    state = record_event(init_mesh(3, 36), next_event(init_mesh(3, 36), rng))
    snapshot = serialize_state(state)
    for a in enumerate_valid_actions(state):
        r1, _ = step(state, a)
        r2, _ = step(state, a)
        assert serialize_state(r1) == serialize_state(r2)
        assert serialize_state(state) == snapshot
