"""Chat backends: OpenAI-compatible remote endpoint, scripted replay, oracle policy."""

from __future__ import annotations

import configparser
import json
import logging
import os
import random
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence, Union

import httpx

from .actions import tag
from .corpus import ScenarioStep, oracle_action
from .errors import BackendUnavailable, ConfigError, ProtocolError, ReplayMissError
from .prompts import ChatMessage, PromptVariant

logger = logging.getLogger(__name__)

API_KEY_ENV = "MESHPILOT_API_KEY"
CHAT_PATH = "/v1/chat/completions"
ACKNOWLEDGEMENT = "I understood the context."


class BackendKind(str, Enum):
    REMOTE_CHAT = "RemoteChat"
    SCRIPTED_REPLAY = "ScriptedReplay"
    ORACLE_POLICY = "OraclePolicy"

    @classmethod
    def parse(cls, text: str) -> BackendKind:
        key = text.strip().lower().replace("_", "").replace("-", "")
        aliases = {
            "remotechat": cls.REMOTE_CHAT, "remote": cls.REMOTE_CHAT, "openai": cls.REMOTE_CHAT,
            "scriptedreplay": cls.SCRIPTED_REPLAY, "scripted": cls.SCRIPTED_REPLAY,
            "replay": cls.SCRIPTED_REPLAY,
            "oraclepolicy": cls.ORACLE_POLICY, "oracle": cls.ORACLE_POLICY,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ConfigError(f"unknown backend kind {text!r}") from None


@dataclass
class BackendConfig:
    name: str
    kind: BackendKind
    endpoint_url: Optional[str] = None
    model_name: Optional[str] = None
    temperature: float = 0.0
    max_output_tokens: int = 64
    timeout_ms: int = 30_000
    max_retries: int = 3
    max_concurrency: int = 4
    backoff_base_ms: float = 500.0
    replay_table: Optional[dict[str, str]] = None

    def validate(self) -> None:
        if self.kind is BackendKind.REMOTE_CHAT and not (self.endpoint_url and self.model_name):
            raise ConfigError(f"backend {self.name!r}: RemoteChat needs endpoint_url and model_name")
        if self.kind is BackendKind.SCRIPTED_REPLAY and self.replay_table is None:
            raise ConfigError(f"backend {self.name!r}: ScriptedReplay needs replay_table")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.max_output_tokens < 1 or self.timeout_ms < 1 or self.max_concurrency < 1:
            raise ConfigError("max_output_tokens, timeout_ms and max_concurrency must be positive")
        if self.max_retries < 0 or self.backoff_base_ms < 0:
            raise ConfigError("max_retries and backoff_base_ms must be nonnegative")

    @property
    def deterministic(self) -> bool:
        return self.kind is not BackendKind.REMOTE_CHAT


@dataclass(frozen=True)
class ChatExchange:
    messages: tuple[ChatMessage, ...]
    response: str
    latency_ms: float
    attempt_count: int = 1


def _check_messages(messages: Sequence[ChatMessage]) -> tuple[ChatMessage, ...]:
    msgs = tuple(messages)
    if not msgs or msgs[0].role != "system":
        raise ConfigError("messages must begin with a system message")
    if any(m.role == "system" for m in msgs[1:]):
        raise ConfigError("only the first message may be a system message")
    return msgs


class Backend:
    """Common surface: ``chat`` for the action turn, ``acknowledge`` for the context turn."""

    def __init__(self, config: BackendConfig):
        config.validate()
        self.config = config

    @property
    def name(self) -> str:
        return self.config.name

    def acknowledge(self, system_prompt: str) -> str:
        return ACKNOWLEDGEMENT

    def chat(self, messages: Sequence[ChatMessage], step_id: str,
             variant: Optional[PromptVariant] = None) -> ChatExchange:
        msgs = _check_messages(messages)
        start = time.perf_counter()
        text = self._respond(msgs, step_id, variant)
        return ChatExchange(msgs, text, (time.perf_counter() - start) * 1000.0, 1)

    def _respond(self, messages, step_id, variant) -> str:
        raise NotImplementedError

    def close(self) -> None:
        pass


class ScriptedReplayBackend(Backend):
    """Replies from a fixed table.

    Keys are step ids; a ``"<step_id>|<variant>"`` key overrides the plain
    step key for that prompt variant, which lets one table script different
    answers per prompt ending.
    """

    def _respond(self, messages, step_id, variant) -> str:
        table = self.config.replay_table
        if variant is not None:
            key = f"{step_id}|{PromptVariant(variant).value}"
            if key in table:
                return table[key]
        try:
            return table[step_id]
        except KeyError:
            raise ReplayMissError(f"no scripted response for step {step_id!r}") from None


class OracleBackend(Backend):
    """Answers every step with the tagged oracle action."""

    def __init__(self, config: BackendConfig, steps: Mapping[str, ScenarioStep] = None):
        super().__init__(config)
        self.steps = dict(steps or {})

    def register(self, steps: Sequence[ScenarioStep]) -> None:
        for s in steps:
            self.steps[s.id] = s

    def _respond(self, messages, step_id, variant) -> str:
        try:
            s = self.steps[step_id]
        except KeyError:
            raise ReplayMissError(f"oracle has no step {step_id!r}") from None
        return tag(oracle_action(s.event, s.mesh_snapshot))


# (url, headers, json body, timeout seconds) -> (status code, response text)
Transport = Callable[[str, Mapping[str, str], dict, float], tuple[int, str]]


class _RetryableError(Exception):
    pass


class RemoteChatBackend(Backend):
    """OpenAI-compatible chat completions client.

    Retries transport failures, 429 and 5xx with exponential backoff (base
    ``backoff_base_ms``, doubling, equal jitter). In-flight requests are capped
    at ``max_concurrency``; the slot is released while backing off.
    """

    def __init__(self, config: BackendConfig, transport: Optional[Transport] = None,
                 sleep: Callable[[float], None] = time.sleep,
                 rng: Optional[random.Random] = None):
        super().__init__(config)
        self._slots = threading.BoundedSemaphore(config.max_concurrency)
        self._sleep = sleep
        self._rng = rng or random.Random()
        self._rng_lock = threading.Lock()
        self._client: Optional[httpx.Client] = None
        self._transport = transport or self._httpx_transport

    @property
    def url(self) -> str:
        return self.config.endpoint_url.rstrip("/") + CHAT_PATH

    def _httpx_transport(self, url, headers, body, timeout):
        if self._client is None:
            self._client = httpx.Client(
                limits=httpx.Limits(max_connections=self.config.max_concurrency)
            )
        resp = self._client.post(url, headers=headers, json=body, timeout=timeout)
        return resp.status_code, resp.text

    def close(self) -> None:
        if self._client is not None:
            self._client.close()
            self._client = None

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(API_KEY_ENV)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def backoff_delay(self, attempt: int) -> float:
        """Seconds to wait after failed attempt number ``attempt`` (1-based)."""
        cap = self.config.backoff_base_ms * 2 ** (attempt - 1) / 1000.0
        with self._rng_lock:
            u = self._rng.random()
        return cap / 2 + u * cap / 2

    def _attempt(self, body: dict) -> str:
        timeout = self.config.timeout_ms / 1000.0
        with self._slots:
            try:
                status, text = self._transport(self.url, self._headers(), body, timeout)
            except (httpx.TransportError, OSError) as e:
                raise _RetryableError(f"transport error: {e!r}") from e
        if status == 429 or status >= 500:
            raise _RetryableError(f"HTTP {status}")
        if status != 200:
            raise ProtocolError(f"HTTP {status}: {text[:200]}")
        try:
            content = json.loads(text)["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise ProtocolError(f"malformed chat completion: {e!r}") from None
        if not isinstance(content, str):
            raise ProtocolError("choices[0].message.content is not a string")
        return content

    def _complete(self, messages: tuple[ChatMessage, ...]) -> tuple[str, int]:
        body = {
            "model": self.config.model_name,
            "messages": [m.as_dict() for m in messages],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_output_tokens,
        }
        last = None
        for attempt in range(1, self.config.max_retries + 2):
            try:
                return self._attempt(body), attempt
            except _RetryableError as e:
                last = e
                logger.warning("%s: attempt %d failed (%s)", self.name, attempt, e)
                if attempt <= self.config.max_retries:
                    self._sleep(self.backoff_delay(attempt))
        raise BackendUnavailable(
            f"{self.name}: giving up after {self.config.max_retries + 1} attempts ({last})"
        )

    def acknowledge(self, system_prompt: str) -> str:
        text, _ = self._complete((ChatMessage("system", system_prompt),))
        return text

    def chat(self, messages, step_id, variant=None) -> ChatExchange:
        msgs = _check_messages(messages)
        start = time.perf_counter()
        text, attempts = self._complete(msgs)
        return ChatExchange(msgs, text, (time.perf_counter() - start) * 1000.0, attempts)


def make_backend(config: BackendConfig, steps: Sequence[ScenarioStep] = (), **kwargs) -> Backend:
    if config.kind is BackendKind.REMOTE_CHAT:
        return RemoteChatBackend(config, **kwargs)
    if config.kind is BackendKind.SCRIPTED_REPLAY:
        return ScriptedReplayBackend(config)
    backend = OracleBackend(config)
    backend.register(steps)
    return backend


def oracle_config(name: str = "oracle") -> BackendConfig:
    return BackendConfig(name=name, kind=BackendKind.ORACLE_POLICY)


def load_replay_table(path: Union[str, Path]) -> dict[str, str]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in data.items()
    ):
        raise ConfigError(f"{path}: replay table must be a JSON object of strings")
    return data


_INT_KEYS = ("max_output_tokens", "timeout_ms", "max_retries", "max_concurrency")
_FLOAT_KEYS = ("temperature", "backoff_base_ms")
_STR_KEYS = ("endpoint_url", "model_name")


def load_backend_configs(path: Union[str, Path]) -> list[BackendConfig]:
    """Read an INI file with one ``[section]`` per named backend.

    ``replay_table`` paths are resolved relative to the config file.
    """
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with path.open(encoding="utf-8") as f:
            parser.read_file(f)
    except (OSError, configparser.Error) as e:
        raise ConfigError(f"cannot read backend config {path}: {e}") from None
    configs = []
    for name in parser.sections():
        sec = parser[name]
        if "kind" not in sec:
            raise ConfigError(f"[{name}] is missing 'kind'")
        unknown = set(sec) - {"kind", "replay_table", *_INT_KEYS, *_FLOAT_KEYS, *_STR_KEYS}
        if unknown:
            raise ConfigError(f"[{name}] has unknown keys: {', '.join(sorted(unknown))}")
        kw: dict = {"name": name, "kind": BackendKind.parse(sec["kind"])}
        try:
            for key in _INT_KEYS:
                if key in sec:
                    kw[key] = sec.getint(key)
            for key in _FLOAT_KEYS:
                if key in sec:
                    kw[key] = sec.getfloat(key)
        except ValueError as e:
            raise ConfigError(f"[{name}]: {e}") from None
        for key in _STR_KEYS:
            if key in sec:
                kw[key] = sec[key]
        if "replay_table" in sec:
            table_path = Path(sec["replay_table"])
            if not table_path.is_absolute():
                table_path = path.parent / table_path
            try:
                kw["replay_table"] = load_replay_table(table_path)
            except (OSError, ValueError) as e:
                raise ConfigError(f"[{name}]: cannot load replay table: {e}") from None
        cfg = BackendConfig(**kw)
        cfg.validate()
        configs.append(cfg)
    if not configs:
        raise ConfigError(f"{path}: no backend sections")
    return configs
