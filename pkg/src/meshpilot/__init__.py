"""Benchmark harness for LLMs acting as zero-shot managers of a simulated Wi-Fi mesh."""

from .actions import (
    Action,
    ActionKind,
    ParseOutcome,
    ParseStatus,
    canonical_render,
    enumerate_valid_actions,
    normalize,
    parse_tagged_response,
)
from .backends import BackendConfig, BackendKind, ChatExchange, make_backend
from .corpus import Corpus, GenerationConfig, ScenarioStep, generate_corpus, load_corpus, oracle_action, render_observation, save_corpus
from .errors import *  # noqa: F401,F403
from .harness import AggregateReport, EpisodeResult, RunConfig, emit_report, evaluate, run_episode
from .mesh_sim import EventKind, MeshState, NetworkEvent, Position, apply_action, init_mesh, next_event, record_event
from .metrics import MetricScore, align_unigrams, bleu, meteor, rouge1, score, tokenize
from .prompts import ChatMessage, PromptVariant, build_system_prompt, build_user_prompt

__version__ = "0.1.0"
