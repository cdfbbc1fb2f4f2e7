"""Seeded model of a small Wi-Fi mesh: node state, event generation, action effects.

The simulation works at the level of periodic status reports. Every operation
here is deterministic: event draws consume a ``random.Random`` stream only
through ``rng.random()`` (53-bit MT19937 doubles), which is stable across
platforms and Python versions, so a seed fully determines a run.
"""

from __future__ import annotations

import copy
import json
import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping, Optional, Sequence

from .actions import CHANNELS, THROUGHPUT_TIERS, Action, ActionKind, enumerate_valid_actions
from .errors import ConfigError, InvalidActionError, StaleActionError

DEFAULT_NODE_COUNT = 3
DEFAULT_START_CHANNEL = 36
DEFAULT_THROUGHPUT_MBPS = 2.0
DEFAULT_JAM_WINDOW = 20
NODE_SPACING_M = 10.0


@dataclass(frozen=True)
class Position:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ConfigError(f"non-finite position {self}")

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.z]


@dataclass
class NodeState:
    id: int
    position: Position
    neighbors: list[int] = field(default_factory=list)
    channel: int = DEFAULT_START_CHANNEL
    tx_throughput_mbps: float = DEFAULT_THROUGHPUT_MBPS
    rx_throughput_mbps: float = DEFAULT_THROUGHPUT_MBPS
    latency_ms: float = 5.0
    packet_loss_pct: float = 0.0

    @property
    def name(self) -> str:
        return f"node{self.id}"


@dataclass
class MeshState:
    """Full snapshot of the mesh.

    ``jam_reports`` maps a channel to the step at which it was last reported
    jammed or noisy; a report stays active for ``jam_window`` steps.
    """

    node_count: int
    nodes: list[NodeState]
    shared_channel: int
    target_throughput_mbps: float = DEFAULT_THROUGHPUT_MBPS
    pending_neighbor_updates: dict[int, list[int]] = field(default_factory=dict)
    pending_position_updates: dict[int, Position] = field(default_factory=dict)
    jam_reports: dict[int, int] = field(default_factory=dict)
    jam_window: int = DEFAULT_JAM_WINDOW
    step_counter: int = 0

    @property
    def jammed_channels(self) -> frozenset[int]:
        return frozenset(
            c for c, at in self.jam_reports.items() if self.step_counter - at < self.jam_window
        )

    def node(self, k: int) -> NodeState:
        if not 1 <= k <= self.node_count:
            raise ConfigError(f"no node {k} in a {self.node_count}-node mesh")
        return self.nodes[k - 1]

    def copy(self) -> MeshState:
        return copy.deepcopy(self)

    def to_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "nodes": [
                {
                    "id": n.id,
                    "position": n.position.as_list(),
                    "neighbors": list(n.neighbors),
                    "channel": n.channel,
                    "tx_throughput_mbps": n.tx_throughput_mbps,
                    "rx_throughput_mbps": n.rx_throughput_mbps,
                    "latency_ms": n.latency_ms,
                    "packet_loss_pct": n.packet_loss_pct,
                }
                for n in self.nodes
            ],
            "shared_channel": self.shared_channel,
            "target_throughput_mbps": self.target_throughput_mbps,
            "pending_neighbor_updates": {
                str(k): list(v) for k, v in self.pending_neighbor_updates.items()
            },
            "pending_position_updates": {
                str(k): p.as_list() for k, p in self.pending_position_updates.items()
            },
            "jam_reports": {str(c): at for c, at in self.jam_reports.items()},
            "jam_window": self.jam_window,
            "step_counter": self.step_counter,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> MeshState:
        nodes = [
            NodeState(
                id=int(n["id"]),
                position=Position(*map(float, n["position"])),
                neighbors=[int(k) for k in n["neighbors"]],
                channel=int(n["channel"]),
                tx_throughput_mbps=float(n["tx_throughput_mbps"]),
                rx_throughput_mbps=float(n["rx_throughput_mbps"]),
                latency_ms=float(n["latency_ms"]),
                packet_loss_pct=float(n["packet_loss_pct"]),
            )
            for n in d["nodes"]
        ]
        return cls(
            node_count=int(d["node_count"]),
            nodes=nodes,
            shared_channel=int(d["shared_channel"]),
            target_throughput_mbps=float(d["target_throughput_mbps"]),
            pending_neighbor_updates={
                int(k): [int(x) for x in v] for k, v in d["pending_neighbor_updates"].items()
            },
            pending_position_updates={
                int(k): Position(*map(float, v)) for k, v in d["pending_position_updates"].items()
            },
            jam_reports={int(c): int(at) for c, at in d["jam_reports"].items()},
            jam_window=int(d["jam_window"]),
            step_counter=int(d["step_counter"]),
        )


def canonical_json(obj) -> str:
    """Key-sorted compact JSON; floats use Python's shortest round-trip repr."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def serialize_state(state: MeshState) -> str:
    return canonical_json(state.to_dict())


def default_position(k: int) -> Position:
    return Position(NODE_SPACING_M * (k - 1), 0.0, 0.0)


def init_mesh(
    node_count: int = DEFAULT_NODE_COUNT,
    start_channel: int = DEFAULT_START_CHANNEL,
    jam_window: int = DEFAULT_JAM_WINDOW,
) -> MeshState:
    if not isinstance(node_count, int) or node_count < 1:
        raise ConfigError(f"node_count must be a positive integer, got {node_count!r}")
    if start_channel not in CHANNELS:
        raise ConfigError(f"start_channel must be in 36..46, got {start_channel!r}")
    if jam_window < 1:
        raise ConfigError("jam_window must be >= 1")
    nodes = [NodeState(id=k, position=default_position(k), channel=start_channel)
             for k in range(1, node_count + 1)]
    return MeshState(node_count=node_count, nodes=nodes, shared_channel=start_channel,
                     jam_window=jam_window)


# --- events -----------------------------------------------------------------

class EventKind(str, Enum):
    STATUS_REPORT = "StatusReport"
    BEST_NEIGHBORS_UPDATE = "BestNeighborsUpdate"
    POSITION_UPDATE = "PositionUpdate"
    JAMMING_DETECTED = "JammingDetected"
    INTERFERENCE_DETECTED = "InterferenceDetected"
    MALICIOUS_TRAFFIC = "MaliciousTraffic"


DEFAULT_EVENT_WEIGHTS: dict[EventKind, float] = {
    EventKind.STATUS_REPORT: 0.40,
    EventKind.BEST_NEIGHBORS_UPDATE: 0.20,
    EventKind.POSITION_UPDATE: 0.15,
    EventKind.INTERFERENCE_DETECTED: 0.10,
    EventKind.JAMMING_DETECTED: 0.10,
    EventKind.MALICIOUS_TRAFFIC: 0.05,
}


@dataclass(frozen=True)
class StatusMetrics:
    tx_throughput_mbps: float
    rx_throughput_mbps: float
    latency_ms: float
    packet_loss_pct: float


@dataclass(frozen=True)
class NetworkEvent:
    """One observation-triggering occurrence.

    Exactly one payload field is populated, chosen by ``kind``: ``neighbors``
    for best-neighbor updates, ``position`` for position updates, ``channel``
    for jamming and interference, ``metrics`` for status reports.
    """

    kind: EventKind
    subject: Optional[int] = None
    neighbors: Optional[tuple[int, ...]] = None
    position: Optional[Position] = None
    channel: Optional[int] = None
    metrics: Optional[StatusMetrics] = None

    def __post_init__(self):
        k = self.kind
        if k in (EventKind.BEST_NEIGHBORS_UPDATE, EventKind.POSITION_UPDATE,
                 EventKind.MALICIOUS_TRAFFIC) and self.subject is None:
            raise ConfigError(f"{k.value} requires a subject node")
        if k in (EventKind.JAMMING_DETECTED, EventKind.INTERFERENCE_DETECTED) and (
            self.channel not in CHANNELS
        ):
            raise ConfigError(f"{k.value} requires a channel in 36..46")
        if k is EventKind.BEST_NEIGHBORS_UPDATE and not self.neighbors:
            raise ConfigError("BestNeighborsUpdate requires a neighbor list")
        if k is EventKind.POSITION_UPDATE and self.position is None:
            raise ConfigError("PositionUpdate requires a position")

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value, "subject": self.subject}
        if self.neighbors is not None:
            d["neighbors"] = list(self.neighbors)
        if self.position is not None:
            d["position"] = self.position.as_list()
        if self.channel is not None:
            d["channel"] = self.channel
        if self.metrics is not None:
            d["metrics"] = {
                "tx_throughput_mbps": self.metrics.tx_throughput_mbps,
                "rx_throughput_mbps": self.metrics.rx_throughput_mbps,
                "latency_ms": self.metrics.latency_ms,
                "packet_loss_pct": self.metrics.packet_loss_pct,
            }
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> NetworkEvent:
        m = d.get("metrics")
        return cls(
            kind=EventKind(d["kind"]),
            subject=None if d.get("subject") is None else int(d["subject"]),
            neighbors=None if d.get("neighbors") is None else tuple(int(k) for k in d["neighbors"]),
            position=None if d.get("position") is None else Position(*map(float, d["position"])),
            channel=None if d.get("channel") is None else int(d["channel"]),
            metrics=None if m is None else StatusMetrics(**{k: float(v) for k, v in m.items()}),
        )


def _index(rng: random.Random, n: int) -> int:
    return min(int(rng.random() * n), n - 1)


def _pick(rng: random.Random, seq: Sequence):
    return seq[_index(rng, len(seq))]


def _uniform(rng: random.Random, lo: float, hi: float) -> float:
    return lo + (hi - lo) * rng.random()


def eligible_kinds(state: MeshState, weights: Mapping[EventKind, float]) -> list[tuple[EventKind, float]]:
    out = []
    for kind in EventKind:
        w = float(weights.get(kind, 0.0))
        if w < 0:
            raise ConfigError(f"negative weight for {kind.value}")
        if state.node_count < 2 and kind in (EventKind.BEST_NEIGHBORS_UPDATE,
                                             EventKind.MALICIOUS_TRAFFIC):
            continue
        if w > 0:
            out.append((kind, w))
    if not out:
        raise ConfigError("event weights leave no eligible event kind")
    return out


def next_event(
    state: MeshState,
    rng: random.Random,
    weights: Mapping[EventKind, float] = DEFAULT_EVENT_WEIGHTS,
) -> NetworkEvent:
    """Draw the next event for ``state`` from the seeded stream ``rng``.

    Draw order: one double selects the kind from the cumulative weights
    (declaration order of ``EventKind``, ineligible kinds removed), then the
    kind's payload draws follow. The state is not modified; pass the event to
    :func:`record_event` to register pending updates.
    """
    kinds = eligible_kinds(state, weights)
    total = sum(w for _, w in kinds)
    u = rng.random() * total
    kind = kinds[-1][0]
    acc = 0.0
    for k, w in kinds:
        acc += w
        if u < acc:
            kind = k
            break

    n = state.node_count
    node_ids = list(range(1, n + 1))

    if kind is EventKind.STATUS_REPORT:
        subject = _pick(rng, node_ids)
        target = state.target_throughput_mbps
        metrics = StatusMetrics(
            tx_throughput_mbps=round(target * _uniform(rng, 0.6, 1.1), 2),
            rx_throughput_mbps=round(target * _uniform(rng, 0.6, 1.1), 2),
            latency_ms=round(_uniform(rng, 2.0, 50.0), 1),
            packet_loss_pct=round(_uniform(rng, 0.0, 5.0), 1),
        )
        return NetworkEvent(kind, subject=subject, metrics=metrics)

    if kind is EventKind.BEST_NEIGHBORS_UPDATE:
        subject = _pick(rng, node_ids)
        others = [k for k in node_ids if k != subject]
        size = 1 + _index(rng, len(others))
        # partial Fisher-Yates over the candidate list
        for i in range(size):
            j = i + _index(rng, len(others) - i)
            others[i], others[j] = others[j], others[i]
        return NetworkEvent(kind, subject=subject, neighbors=tuple(sorted(others[:size])))

    if kind is EventKind.POSITION_UPDATE:
        subject = _pick(rng, node_ids)
        old = state.node(subject).position
        new = Position(
            round(old.x + _uniform(rng, -5.0, 5.0), 1),
            round(old.y + _uniform(rng, -5.0, 5.0), 1),
            round(old.z + _uniform(rng, 0.0, 2.0), 1),
        )
        return NetworkEvent(kind, subject=subject, position=new)

    if kind is EventKind.JAMMING_DETECTED:
        if rng.random() < 0.5:
            channel = state.shared_channel
        else:
            channel = _pick(rng, [c for c in CHANNELS if c != state.shared_channel])
        return NetworkEvent(kind, channel=channel)

    if kind is EventKind.INTERFERENCE_DETECTED:
        return NetworkEvent(kind, channel=state.shared_channel)

    subject = _pick(rng, node_ids[1:])
    return NetworkEvent(EventKind.MALICIOUS_TRAFFIC, subject=subject)


def record_event(state: MeshState, event: NetworkEvent) -> MeshState:
    """Return a copy of ``state`` with ``event`` registered (step counter unchanged)."""
    new = state.copy()
    k = event.kind
    if k is EventKind.BEST_NEIGHBORS_UPDATE:
        new.node(event.subject)
        new.pending_neighbor_updates[event.subject] = list(event.neighbors)
    elif k is EventKind.POSITION_UPDATE:
        new.node(event.subject)
        new.pending_position_updates[event.subject] = event.position
    elif k in (EventKind.JAMMING_DETECTED, EventKind.INTERFERENCE_DETECTED):
        new.jam_reports[event.channel] = new.step_counter
    elif k is EventKind.STATUS_REPORT and event.subject is not None and event.metrics is not None:
        node = new.node(event.subject)
        node.tx_throughput_mbps = event.metrics.tx_throughput_mbps
        node.rx_throughput_mbps = event.metrics.rx_throughput_mbps
        node.latency_ms = event.metrics.latency_ms
        node.packet_loss_pct = event.metrics.packet_loss_pct
    return new


# --- actions ----------------------------------------------------------------

def apply_action(state: MeshState, action: Action) -> MeshState:
    """Return the mesh after executing ``action``; ``state`` is left untouched.

    Raises:
        InvalidActionError: ``action`` is outside the valid set for this mesh.
        StaleActionError: an update action found nothing pending. The error's
            ``state`` attribute carries the resulting mesh (only the step
            counter advanced) so an episode can continue.
    """
    if action not in enumerate_valid_actions(state):
        raise InvalidActionError(f"{action} is not valid for a {state.node_count}-node mesh")

    new = state.copy()
    new.step_counter += 1
    kind, v = action.kind, action.value

    if kind is ActionKind.SWITCH_CHANNEL:
        new.shared_channel = v
        for node in new.nodes:
            node.channel = v
    elif kind is ActionKind.DISCONNECT_NODE:
        for node in new.nodes:
            node.neighbors = [k for k in node.neighbors if k != v]
        new.node(v).neighbors = []
    elif kind is ActionKind.UPDATE_NEIGHBORS:
        if v not in new.pending_neighbor_updates:
            err = StaleActionError(f"no pending neighbor update for node {v}")
            err.state = replace(state.copy(), step_counter=new.step_counter)
            raise err
        new.node(v).neighbors = [k for k in new.pending_neighbor_updates.pop(v) if k != v]
    elif kind is ActionKind.UPDATE_POSITION:
        if v not in new.pending_position_updates:
            err = StaleActionError(f"no pending position update for node {v}")
            err.state = replace(state.copy(), step_counter=new.step_counter)
            raise err
        new.node(v).position = new.pending_position_updates.pop(v)
    elif kind is ActionKind.SET_THROUGHPUT:
        if v not in THROUGHPUT_TIERS:
            raise InvalidActionError(f"throughput tier {v} not offered")
        new.target_throughput_mbps = v
    return new


def step(state: MeshState, action: Action) -> tuple[MeshState, Optional[StaleActionError]]:
    """Apply ``action``, absorbing a stale update into the returned error slot."""
    try:
        return apply_action(state, action), None
    except StaleActionError as err:
        return err.state, err
