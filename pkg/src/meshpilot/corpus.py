"""Scenario corpora: observation text, oracle labels, JSON Lines persistence."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Union

from .actions import CHANNELS, Action, action_from_text, canonical_render, enumerate_valid_actions
from .errors import ConfigError, CorpusFormatError, NoCleanChannelError
from .mesh_sim import (
    DEFAULT_EVENT_WEIGHTS,
    DEFAULT_JAM_WINDOW,
    EventKind,
    MeshState,
    NetworkEvent,
    canonical_json,
    init_mesh,
    next_event,
    record_event,
    step,
)
from .prompts import PromptVariant

FORMAT_NAME = "meshpilot.corpus"
FORMAT_VERSION = 1


def _num(x: float) -> str:
    return repr(float(x))


def render_observation(event: NetworkEvent, state: Optional[MeshState] = None) -> str:
    """One fixed English sentence per event kind."""
    k = event.kind
    if k is EventKind.BEST_NEIGHBORS_UPDATE:
        listed = ", ".join(str(n) for n in event.neighbors)
        return f"Network Status from Node{event.subject} Best Neighbors List is [{listed}]."
    if k is EventKind.POSITION_UPDATE:
        coords = ", ".join(_num(v) for v in event.position.as_list())
        return f"Position update from Node{event.subject}: [{coords}]."
    if k is EventKind.JAMMING_DETECTED:
        return f"Jamming detected on channel {event.channel}."
    if k is EventKind.INTERFERENCE_DETECTED:
        return f"Interference detected on channel {event.channel}."
    if k is EventKind.MALICIOUS_TRAFFIC:
        return f"Malicious traffic detected from Node{event.subject}."
    source = "the network" if event.subject is None else f"Node{event.subject}"
    m = event.metrics
    if m is None:
        return f"Network Status from {source}: nominal."
    return (
        f"Network Status from {source}: TX Throughput {_num(m.tx_throughput_mbps)} Mb/s, "
        f"RX Throughput {_num(m.rx_throughput_mbps)} Mb/s, Latency {_num(m.latency_ms)} ms, "
        f"Packet Loss {_num(m.packet_loss_pct)}%."
    )


def clean_channel(state: MeshState, also_jammed: tuple[int, ...] = ()) -> int:
    blocked = set(state.jammed_channels) | set(also_jammed) | {state.shared_channel}
    for c in CHANNELS:
        if c not in blocked:
            return c
    raise NoCleanChannelError(f"all channels jammed: {sorted(blocked)}")


def oracle_action(event: NetworkEvent, state: MeshState) -> Action:
    """The preferred (labeled) response to ``event``.

    Best-neighbor and position updates are applied to their subject node,
    malicious traffic disconnects its source, jamming or interference on the
    operating channel moves the mesh to the lowest clear channel, and anything
    else (plain status reports, jamming elsewhere) needs no action.
    """
    k = event.kind
    if k is EventKind.BEST_NEIGHBORS_UPDATE:
        return Action.update_neighbors(event.subject)
    if k is EventKind.POSITION_UPDATE:
        return Action.update_position(event.subject)
    if k is EventKind.MALICIOUS_TRAFFIC:
        return Action.disconnect(event.subject)
    if k in (EventKind.JAMMING_DETECTED, EventKind.INTERFERENCE_DETECTED):
        if event.channel == state.shared_channel:
            return Action.switch_channel(clean_channel(state, (event.channel,)))
        return Action.no_action()
    return Action.no_action()


@dataclass(frozen=True)
class GenerationConfig:
    step_count: int = 200
    node_count: int = 3
    start_channel: int = 36
    jam_window: int = DEFAULT_JAM_WINDOW
    prompt_variant: PromptVariant = PromptVariant.ONE_NEWLINE
    event_weights: tuple[tuple[str, float], ...] = tuple(
        sorted((k.value, w) for k, w in DEFAULT_EVENT_WEIGHTS.items())
    )

    def validate(self) -> None:
        if self.step_count < 1:
            raise ConfigError("step_count must be >= 1")
        if self.node_count < 1:
            raise ConfigError("node_count must be >= 1")
        if self.start_channel not in CHANNELS:
            raise ConfigError("start_channel must be in 36..46")
        for name, w in self.event_weights:
            EventKind(name)
            if w < 0:
                raise ConfigError(f"negative weight for {name}")

    @property
    def weights(self) -> dict[EventKind, float]:
        return {EventKind(name): float(w) for name, w in self.event_weights}

    def to_dict(self) -> dict:
        return {
            "step_count": self.step_count,
            "node_count": self.node_count,
            "start_channel": self.start_channel,
            "jam_window": self.jam_window,
            "prompt_variant": self.prompt_variant.value,
            "event_weights": {name: float(w) for name, w in self.event_weights},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> GenerationConfig:
        return cls(
            step_count=int(d["step_count"]),
            node_count=int(d["node_count"]),
            start_channel=int(d["start_channel"]),
            jam_window=int(d["jam_window"]),
            prompt_variant=PromptVariant(d["prompt_variant"]),
            event_weights=tuple(sorted((str(k), float(v)) for k, v in d["event_weights"].items())),
        )

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode()).hexdigest()


@dataclass
class ScenarioStep:
    id: str
    step_index: int
    observation: str
    mesh_snapshot: MeshState
    event: NetworkEvent
    reference_action: Action
    prompt_variant: PromptVariant = PromptVariant.ONE_NEWLINE

    @property
    def reference_text(self) -> str:
        return canonical_render(self.reference_action)

    def valid_actions(self) -> list[Action]:
        return enumerate_valid_actions(self.mesh_snapshot)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "step_index": self.step_index,
            "observation": self.observation,
            "mesh_snapshot": self.mesh_snapshot.to_dict(),
            "event": self.event.to_dict(),
            "reference_action": self.reference_text,
            "prompt_variant": self.prompt_variant.value,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> ScenarioStep:
        snapshot = MeshState.from_dict(d["mesh_snapshot"])
        return cls(
            id=str(d["id"]),
            step_index=int(d["step_index"]),
            observation=str(d["observation"]),
            mesh_snapshot=snapshot,
            event=NetworkEvent.from_dict(d["event"]),
            reference_action=action_from_text(d["reference_action"], snapshot.node_count),
            prompt_variant=PromptVariant(d["prompt_variant"]),
        )


@dataclass
class Corpus:
    seed: int
    config_digest: str
    steps: list[ScenarioStep] = field(default_factory=list)
    config: GenerationConfig = field(default_factory=GenerationConfig)

    def __len__(self) -> int:
        return len(self.steps)

    def by_id(self) -> dict[str, ScenarioStep]:
        return {s.id: s for s in self.steps}

    def header(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "seed": self.seed,
            "config_digest": self.config_digest,
            "config": self.config.to_dict(),
            "step_count": len(self.steps),
        }

    def to_jsonl(self) -> str:
        lines = [canonical_json(self.header())]
        lines += [canonical_json(s.to_dict()) for s in self.steps]
        return "\n".join(lines) + "\n"

    def content_digest(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode("utf-8")).hexdigest()


def step_id(index: int) -> str:
    return f"step-{index:04d}"


def generate_corpus(config: GenerationConfig = GenerationConfig(), seed: int = 7) -> Corpus:
    """Simulate ``config.step_count`` steps, labelling each with the oracle action.

    Each step stores the mesh as the model would see it: after the event is
    registered, before the reference action runs. The reference action is then
    applied so the next event sees its effect.
    """
    config.validate()
    rng = random.Random(seed)
    state = init_mesh(config.node_count, config.start_channel, config.jam_window)
    weights = config.weights
    steps = []
    for i in range(config.step_count):
        event = next_event(state, rng, weights)
        state = record_event(state, event)
        reference = oracle_action(event, state)
        steps.append(ScenarioStep(
            id=step_id(i),
            step_index=i,
            observation=render_observation(event, state),
            mesh_snapshot=state.copy(),
            event=event,
            reference_action=reference,
            prompt_variant=config.prompt_variant,
        ))
        state, _ = step(state, reference)
    return Corpus(seed=seed, config_digest=config.digest(), steps=steps, config=config)


def save_corpus(corpus: Corpus, path: Union[str, Path]) -> None:
    Path(path).write_bytes(corpus.to_jsonl().encode("utf-8"))


def load_corpus(path: Union[str, Path]) -> Corpus:
    """Read a corpus written by :func:`save_corpus`.

    Raises:
        CorpusFormatError: on any malformed or inconsistent line; ``line`` is
            the 1-based line number where the problem was found.
    """
    text = Path(path).read_bytes().decode("utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CorpusFormatError("empty corpus file", line=1)

    def parse(n: int, raw: str) -> dict:
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as e:
            raise CorpusFormatError(f"invalid JSON ({e.msg})", line=n) from None
        if not isinstance(obj, dict):
            raise CorpusFormatError("record is not a JSON object", line=n)
        return obj

    header = parse(1, lines[0])
    if header.get("format") != FORMAT_NAME or header.get("version") != FORMAT_VERSION:
        raise CorpusFormatError("missing or unsupported corpus header", line=1)
    try:
        config = GenerationConfig.from_dict(header["config"])
        seed = int(header["seed"])
        digest = str(header["config_digest"])
        declared = int(header["step_count"])
    except (KeyError, TypeError, ValueError) as e:
        raise CorpusFormatError(f"bad header field: {e}", line=1) from None

    steps = []
    seen = set()
    for n, raw in enumerate(lines[1:], start=2):
        d = parse(n, raw)
        try:
            s = ScenarioStep.from_dict(d)
        except (KeyError, TypeError, ValueError, ConfigError) as e:
            raise CorpusFormatError(f"bad step record: {e!r}", line=n) from None
        if s.id in seen:
            raise CorpusFormatError(f"duplicate step id {s.id}", line=n)
        if steps and s.step_index <= steps[-1].step_index:
            raise CorpusFormatError("steps out of order", line=n)
        if not s.observation:
            raise CorpusFormatError("empty observation", line=n)
        if s.reference_action not in s.valid_actions():
            raise CorpusFormatError("reference action not valid for snapshot", line=n)
        seen.add(s.id)
        steps.append(s)

    if not steps:
        raise CorpusFormatError("corpus has no steps", line=len(lines))
    if len(steps) != declared:
        raise CorpusFormatError(
            f"header declares {declared} steps, found {len(steps)}", line=len(lines)
        )
    return Corpus(seed=seed, config_digest=digest, steps=steps, config=config)
