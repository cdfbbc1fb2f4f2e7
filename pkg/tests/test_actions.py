import pytest
from hypothesis import given, strategies as st

from meshpilot.actions import (
    Action,
    ActionKind,
    ParseStatus,
    canonical_render,
    enumerate_valid_actions,
    normalize,
    parse_tagged_response,
    tag,
)

TABLE_ACTIONS = [
    "Disconnect all nodes from node 2",
    "Disconnect all nodes from node 3",
    *[f"Switch all nodes to channel {c}" for c in range(36, 47)],
    "Update Neighbors of node 1",
    "Update Neighbors of node 2",
    "Update Neighbors of node 3",
    "Set Network Throughput to 0.1 Mb/s for all nodes",
    "Set Network Throughput to 2 Mb/s for all nodes",
    "Set Network Throughput to 10 Mb/s for all nodes",
    "Update Local Position of node 1",
    "Update Local Position of node 2",
    "Update Local Position of node 3",
    "No Action",
]


def test_default_mesh_has_the_23_actions_in_prompt_order(mesh):
    rendered = [canonical_render(a) for a in enumerate_valid_actions(mesh)]
    assert rendered == TABLE_ACTIONS
    assert len(rendered) == 23
    assert rendered[0] == "Disconnect all nodes from node 2"
    assert rendered[-1] == "No Action"
    assert [a.value for a in enumerate_valid_actions(mesh)[2:13]] == list(range(36, 47))


@pytest.mark.parametrize("n, expected", [(1, 17), (2, 20), (3, 23), (5, 29)])
def test_action_count_generalizes(n, expected):
    actions = enumerate_valid_actions(n)
    assert len(actions) == expected
    assert len({canonical_render(a) for a in actions}) == expected


@pytest.mark.parametrize("action, text", [
    (Action.update_neighbors(1), "Update Neighbors of node 1"),
    (Action.set_throughput(0.1), "Set Network Throughput to 0.1 Mb/s for all nodes"),
    (Action.set_throughput(10), "Set Network Throughput to 10 Mb/s for all nodes"),
    (Action.no_action(), "No Action"),
])
def test_canonical_render(action, text):
    assert canonical_render(action) == text


@pytest.mark.parametrize("raw, expected", [
    ("  Update   Neighbors of node 1 ", "update neighbors of node 1"),
    ("NO ACTION", "no action"),
    ("", ""),
    ("a\t\nb", "a b"),
])
def test_normalize(raw, expected):
    assert normalize(raw) == expected


@given(st.text())
def test_normalize_idempotent(text):
    assert normalize(normalize(text)) == normalize(text)


def test_parse_paper_response(mesh):
    out = parse_tagged_response("<ACTION>Update Neighbors of node 1</ACTION>", enumerate_valid_actions(mesh))
    assert out.status is ParseStatus.PARSED
    assert out.action == Action.update_neighbors(1)


def test_parse_lowercase_tag_with_preamble(mesh):
    out = parse_tagged_response("Sure! <action>no action</action>", enumerate_valid_actions(mesh))
    assert out.status is ParseStatus.PARSED
    assert out.action == Action.no_action()


def test_parse_missing_tag(mesh):
    out = parse_tagged_response("I would switch the channel.", enumerate_valid_actions(mesh))
    assert out.status is ParseStatus.MISSING_TAG
    assert out.action is None and not out.has_tag


def test_parse_invalid_action(mesh):
    out = parse_tagged_response("<ACTION>Reboot node 5</ACTION>", enumerate_valid_actions(mesh))
    assert out.status is ParseStatus.INVALID_ACTION
    assert out.raw == "Reboot node 5"


def test_parse_multiple_tags_resolves_first(mesh):
    text = "<ACTION>No Action</ACTION> or <ACTION>Switch all nodes to channel 40</ACTION>"
    out = parse_tagged_response(text, enumerate_valid_actions(mesh))
    assert out.status is ParseStatus.MULTIPLE_TAGS
    assert out.tag_count == 2
    assert out.action == Action.no_action()


def test_parse_rejects_action_outside_supplied_set():
    # node 3 exists only in meshes of three or more nodes
    out = parse_tagged_response("<ACTION>Update Neighbors of node 3</ACTION>", enumerate_valid_actions(2))
    assert out.status is ParseStatus.INVALID_ACTION


def test_no_fuzzy_matching(mesh):
    out = parse_tagged_response("<ACTION>Update Neighbours of node 1</ACTION>", enumerate_valid_actions(mesh))
    assert out.status is ParseStatus.INVALID_ACTION


@pytest.mark.parametrize("n", [1, 2, 3, 6])
def test_round_trip_every_action(n):
    valid = enumerate_valid_actions(n)
    for a in valid:
        out = parse_tagged_response(tag(a), valid)
        assert out.status is ParseStatus.PARSED and out.action == a


@given(st.text(max_size=200))
def test_parser_never_returns_action_outside_valid(text):
    valid = enumerate_valid_actions(2)
    out = parse_tagged_response(text, valid)
    assert out.action is None or out.action in valid


def test_action_kinds_cover_the_vocabulary(mesh):
    kinds = {a.kind for a in enumerate_valid_actions(mesh)}
    assert kinds == set(ActionKind)
