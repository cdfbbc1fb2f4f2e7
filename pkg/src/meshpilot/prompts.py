"""System and user prompt construction, byte for byte.

The user prompt's trailing bytes are the only thing that varies between the
three :class:`PromptVariant` members.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .actions import Action, canonical_render
from .errors import ConfigError

_SYSTEM_TEMPLATE = (
    "You are a network monitoring expert, and you monitor a wireless mesh network. "
    "When there is a network security threat such as malicious traffic, jamming, etc., "
    "you need to take a valid action among the valid actions set to mitigate it. "
    "Sometimes, it will be a network performance related update. "
    "For example, when best neighbors of a node is received, you need to take action "
    "to update the neighbors for efficient routing. "
    "The neighbors update format is [<node id>, <node id>]. "
    "You also need to keep track of the local position of nodes and update them accordingly. "
    "The position update is provided as [x,y,z] coordinates. "
    "Regarding the network, {population} on the mesh network named {names}. "
    "The mesh network is set to communicate on channel {channel} to start. "
    "Based on the network observations that you will receive, you are required to choose "
    "the best action from the valid action set to keep up the performance of network and "
    "to protect it against security threats. "
    "Please, answer that you understood the context."
)

OBSERVATION_PREFIX = "The network observations are: "
ACTIONS_HEADER = "The valid actions set contains (#):"
INSTRUCTIONS_HEADER = "INSTRUCTIONS:"
_TAG_RULE = "- You MUST identify your chosen action by the tag <ACTION>your {word} action</ACTION>."


class PromptVariant(str, Enum):
    NO_NEWLINE = "NoNewline"
    ONE_NEWLINE = "OneNewline"
    TWO_NEWLINES = "TwoNewlines"

    @property
    def ending(self) -> str:
        return _ENDINGS[self]

    @property
    def label(self) -> str:
        """Row label used in sensitivity tables."""
        return _LABELS[self]

    @classmethod
    def parse(cls, text: str) -> PromptVariant:
        key = text.strip().lower().replace("_", "").replace("-", "")
        for v in cls:
            if v.value.lower() == key:
                return v
        aliases = {"0": cls.NO_NEWLINE, "none": cls.NO_NEWLINE, "1": cls.ONE_NEWLINE,
                   "n": cls.ONE_NEWLINE, "2": cls.TWO_NEWLINES, "nn": cls.TWO_NEWLINES}
        if key in aliases:
            return aliases[key]
        raise ConfigError(f"unknown prompt variant {text!r}")


_ENDINGS = {
    PromptVariant.NO_NEWLINE: "",
    PromptVariant.ONE_NEWLINE: "\n",
    PromptVariant.TWO_NEWLINES: "\n\n",
}

_LABELS = {
    PromptVariant.ONE_NEWLINE: "Prompt ends with '\\n'",
    PromptVariant.NO_NEWLINE: "Prompt ends without '\\n'",
    PromptVariant.TWO_NEWLINES: "Prompt ends with '\\n\\n'",
}

# Row order of the sensitivity table
TABLE_ORDER = (PromptVariant.ONE_NEWLINE, PromptVariant.NO_NEWLINE, PromptVariant.TWO_NEWLINES)


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ConfigError(f"unknown chat role {self.role!r}")
        if self.role in ("system", "user") and not self.content:
            raise ConfigError(f"{self.role} message must have content")

    def as_dict(self) -> dict[str, str]:
        return {"role": self.role, "content": self.content}


def _node_names(n: int) -> str:
    names = [f"node{k}" for k in range(1, n + 1)]
    if n == 1:
        return names[0]
    return ", ".join(names[:-1]) + " and " + names[-1]


def build_system_prompt(node_count: int = 3, start_channel: int = 36) -> str:
    if node_count < 1:
        raise ConfigError("node_count must be >= 1")
    population = "there is 1 node" if node_count == 1 else f"there are {node_count} nodes"
    return _SYSTEM_TEMPLATE.format(
        population=population, names=_node_names(node_count), channel=start_channel
    )


def instruction_lines(fix_typo: bool = False) -> list[str]:
    return [
        INSTRUCTIONS_HEADER,
        "- You MUST choose only ONE action from the valid action set.",
        _TAG_RULE.format(word="chosen" if fix_typo else "choosen"),
        "- Do NOT respond with any other additional text, and you CANNOT decline to take an action.",
    ]


def build_user_prompt(
    observation: str,
    valid: Sequence[Action],
    variant: PromptVariant = PromptVariant.ONE_NEWLINE,
    fix_typo: bool = False,
) -> str:
    """Lay out the observation, one ``# action`` line per valid action, and the rules.

    ``fix_typo`` corrects "choosen" in the tag rule; the default keeps the
    benchmarked wording.
    """
    if not valid:
        raise ConfigError("valid action set is empty")
    lines = [OBSERVATION_PREFIX + observation, ACTIONS_HEADER]
    lines += ["# " + canonical_render(a) for a in valid]
    lines += instruction_lines(fix_typo)
    return "\n".join(lines) + PromptVariant(variant).ending
