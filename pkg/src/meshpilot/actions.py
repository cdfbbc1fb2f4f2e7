"""Closed action vocabulary, canonical rendering and ``<ACTION>`` tag parsing."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

CHANNELS = tuple(range(36, 47))
THROUGHPUT_TIERS = (0.1, 2.0, 10.0)

_TAG_RE = re.compile(r"<action>(.*?)</action>", re.IGNORECASE | re.DOTALL)
_WS_RE = re.compile(r"\s+")


class ActionKind(str, Enum):
    DISCONNECT_NODE = "DisconnectNode"
    SWITCH_CHANNEL = "SwitchChannel"
    UPDATE_NEIGHBORS = "UpdateNeighbors"
    SET_THROUGHPUT = "SetThroughput"
    UPDATE_POSITION = "UpdatePosition"
    NO_ACTION = "NoAction"


@dataclass(frozen=True)
class Action:
    """One network configuration command.

    ``value`` is the node index, channel number or throughput in Mb/s,
    depending on ``kind``; it is ``None`` for ``NO_ACTION``.
    """

    kind: ActionKind
    value: Union[int, float, None] = None

    def render(self) -> str:
        return canonical_render(self)

    def __str__(self) -> str:
        return canonical_render(self)

    @classmethod
    def disconnect(cls, node: int) -> Action:
        return cls(ActionKind.DISCONNECT_NODE, int(node))

    @classmethod
    def switch_channel(cls, channel: int) -> Action:
        return cls(ActionKind.SWITCH_CHANNEL, int(channel))

    @classmethod
    def update_neighbors(cls, node: int) -> Action:
        return cls(ActionKind.UPDATE_NEIGHBORS, int(node))

    @classmethod
    def set_throughput(cls, mbps: float) -> Action:
        return cls(ActionKind.SET_THROUGHPUT, float(mbps))

    @classmethod
    def update_position(cls, node: int) -> Action:
        return cls(ActionKind.UPDATE_POSITION, int(node))

    @classmethod
    def no_action(cls) -> Action:
        return cls(ActionKind.NO_ACTION)


def _node_count(state_or_count) -> int:
    if isinstance(state_or_count, int):
        return state_or_count
    return state_or_count.node_count


def enumerate_valid_actions(state) -> list[Action]:
    """Return the valid action set in prompt order.

    Accepts a mesh state or a bare node count. Node 1 is never a disconnect
    target, so a 3-node mesh yields the familiar 23 actions.
    """
    n = _node_count(state)
    actions = [Action.disconnect(k) for k in range(2, n + 1)]
    actions += [Action.switch_channel(c) for c in CHANNELS]
    actions += [Action.update_neighbors(k) for k in range(1, n + 1)]
    actions += [Action.set_throughput(x) for x in THROUGHPUT_TIERS]
    actions += [Action.update_position(k) for k in range(1, n + 1)]
    actions.append(Action.no_action())
    return actions


def _format_mbps(x: float) -> str:
    return f"{x:g}"


def canonical_render(action: Action) -> str:
    kind, v = action.kind, action.value
    if kind is ActionKind.DISCONNECT_NODE:
        return f"Disconnect all nodes from node {v}"
    if kind is ActionKind.SWITCH_CHANNEL:
        return f"Switch all nodes to channel {v}"
    if kind is ActionKind.UPDATE_NEIGHBORS:
        return f"Update Neighbors of node {v}"
    if kind is ActionKind.SET_THROUGHPUT:
        return f"Set Network Throughput to {_format_mbps(v)} Mb/s for all nodes"
    if kind is ActionKind.UPDATE_POSITION:
        return f"Update Local Position of node {v}"
    if kind is ActionKind.NO_ACTION:
        return "No Action"
    raise ValueError(f"unknown action kind {kind!r}")


def normalize(text: str) -> str:
    """Lowercase, collapse whitespace runs, strip."""
    return _WS_RE.sub(" ", text).strip().lower()


class ParseStatus(str, Enum):
    PARSED = "Parsed"
    MISSING_TAG = "MissingTag"
    INVALID_ACTION = "InvalidAction"
    MULTIPLE_TAGS = "MultipleTags"


@dataclass(frozen=True)
class ParseOutcome:
    """Result of reading an action out of a model response.

    ``action`` is set for ``PARSED`` and for ``MULTIPLE_TAGS`` when the first
    tag resolves; ``raw`` holds the first tag's content whenever a tag exists.
    """

    status: ParseStatus
    action: Optional[Action] = None
    raw: Optional[str] = None
    tag_count: int = 0

    @property
    def has_tag(self) -> bool:
        return self.tag_count > 0


def find_action_tags(response: str) -> list[str]:
    return _TAG_RE.findall(response)


def match_action(text: str, valid: Sequence[Action]) -> Optional[Action]:
    key = normalize(text)
    for action in valid:
        if normalize(canonical_render(action)) == key:
            return action
    return None


def parse_tagged_response(response: str, valid: Sequence[Action]) -> ParseOutcome:
    """Resolve the first ``<ACTION>...</ACTION>`` span against ``valid``.

    Never raises; every failure mode is an outcome status.
    """
    spans = find_action_tags(response)
    if not spans:
        return ParseOutcome(ParseStatus.MISSING_TAG)
    raw = spans[0]
    action = match_action(raw, valid)
    if len(spans) > 1:
        return ParseOutcome(ParseStatus.MULTIPLE_TAGS, action, raw, len(spans))
    if action is None:
        return ParseOutcome(ParseStatus.INVALID_ACTION, None, raw, 1)
    return ParseOutcome(ParseStatus.PARSED, action, raw, 1)


def tag(action: Action) -> str:
    return f"<ACTION>{canonical_render(action)}</ACTION>"


def action_from_text(text: str, node_count: int = 3) -> Action:
    """Look up an action by its canonical wording; raises ``KeyError``."""
    action = match_action(text, enumerate_valid_actions(node_count))
    if action is None:
        raise KeyError(text)
    return action
