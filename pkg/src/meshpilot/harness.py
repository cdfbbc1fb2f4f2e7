"""Episode runner, aggregation and report rendering."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .actions import ParseOutcome, ParseStatus, action_from_text, canonical_render, parse_tagged_response
from .backends import Backend, BackendConfig, make_backend
from .corpus import Corpus, ScenarioStep, load_corpus
from .errors import BackendError, ConfigError
from .mesh_sim import DEFAULT_START_CHANNEL, canonical_json
from .metrics import MetricScore, score
from .prompts import TABLE_ORDER, ChatMessage, PromptVariant, build_system_prompt, build_user_prompt

logger = logging.getLogger(__name__)

CSV_FIELDS = (
    "backend", "variant", "rouge1_f", "meteor", "bleu",
    "exact_match_rate", "parse_failure_rate", "invalid_action_rate", "n_steps",
)
RESULTS_FILE = "results.jsonl"
MANIFEST_FILE = "run.json"


@dataclass
class EpisodeResult:
    step_id: str
    step_index: int
    backend: str
    variant: PromptVariant
    raw_response: str
    parse_outcome: ParseOutcome
    hypothesis: str
    reference: str
    scores: MetricScore
    exact_match: bool
    latency_ms: float = 0.0
    attempt_count: int = 0
    error: Optional[str] = None

    @property
    def parsed(self) -> bool:
        return self.parse_outcome.action is not None

    @property
    def parse_failure(self) -> bool:
        return not self.parse_outcome.has_tag

    @property
    def invalid_action(self) -> bool:
        return self.parse_outcome.has_tag and self.parse_outcome.action is None

    def to_dict(self) -> dict:
        po = self.parse_outcome
        return {
            "step_id": self.step_id,
            "step_index": self.step_index,
            "backend": self.backend,
            "variant": self.variant.value,
            "raw_response": self.raw_response,
            "parse_outcome": {
                "status": po.status.value,
                "action": None if po.action is None else canonical_render(po.action),
                "raw": po.raw,
                "tag_count": po.tag_count,
            },
            "hypothesis": self.hypothesis,
            "reference": self.reference,
            "scores": self.scores.as_dict(),
            "exact_match": self.exact_match,
            "latency_ms": self.latency_ms,
            "attempt_count": self.attempt_count,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict, node_count: int = 3) -> EpisodeResult:
        po = d["parse_outcome"]
        action = None if po["action"] is None else action_from_text(po["action"], node_count)
        return cls(
            step_id=d["step_id"],
            step_index=int(d["step_index"]),
            backend=d["backend"],
            variant=PromptVariant(d["variant"]),
            raw_response=d["raw_response"],
            parse_outcome=ParseOutcome(ParseStatus(po["status"]), action, po["raw"], int(po["tag_count"])),
            hypothesis=d["hypothesis"],
            reference=d["reference"],
            scores=MetricScore(**{k: float(v) for k, v in d["scores"].items()}),
            exact_match=bool(d["exact_match"]),
            latency_ms=float(d["latency_ms"]),
            attempt_count=int(d["attempt_count"]),
            error=d.get("error"),
        )


def run_episode(
    step: ScenarioStep,
    backend: Backend,
    variant: PromptVariant,
    system_prompt: Optional[str] = None,
) -> EpisodeResult:
    """Prompt ``backend`` with one scenario step and score its answer.

    The scored hypothesis is the first tag's content when the response has an
    ``<ACTION>`` tag, otherwise the whole response. Backend failures become a
    zero-scored episode with ``error`` set.
    """
    variant = PromptVariant(variant)
    valid = step.valid_actions()
    reference = step.reference_text
    if system_prompt is None:
        system_prompt = build_system_prompt(step.mesh_snapshot.node_count, DEFAULT_START_CHANNEL)
    user_prompt = build_user_prompt(step.observation, valid, variant)
    try:
        ack = backend.acknowledge(system_prompt)
        messages = [
            ChatMessage("system", system_prompt),
            ChatMessage("assistant", ack),
            ChatMessage("user", user_prompt),
        ]
        exchange = backend.chat(messages, step.id, variant)
    except BackendError as e:
        logger.warning("episode %s on %s failed: %s", step.id, backend.name, e)
        return EpisodeResult(
            step_id=step.id, step_index=step.step_index, backend=backend.name, variant=variant,
            raw_response="", parse_outcome=ParseOutcome(ParseStatus.MISSING_TAG),
            hypothesis="", reference=reference, scores=MetricScore.zero(),
            exact_match=False, error=f"{type(e).__name__}: {e}",
        )
    outcome = parse_tagged_response(exchange.response, valid)
    hypothesis = outcome.raw if outcome.has_tag else exchange.response
    return EpisodeResult(
        step_id=step.id,
        step_index=step.step_index,
        backend=backend.name,
        variant=variant,
        raw_response=exchange.response,
        parse_outcome=outcome,
        hypothesis=hypothesis,
        reference=reference,
        scores=score(hypothesis, reference),
        exact_match=outcome.status is ParseStatus.PARSED and outcome.action == step.reference_action,
        latency_ms=exchange.latency_ms,
        attempt_count=exchange.attempt_count,
    )


@dataclass(frozen=True)
class ReportRow:
    backend: str
    variant: PromptVariant
    rouge1_f: float
    meteor: float
    bleu: float
    exact_match_rate: float
    parse_failure_rate: float
    invalid_action_rate: float
    n_steps: int


@dataclass
class AggregateReport:
    rows: list[ReportRow]
    seed: Optional[int] = None
    config_digest: Optional[str] = None

    def row(self, backend: str, variant: PromptVariant) -> ReportRow:
        for r in self.rows:
            if r.backend == backend and r.variant == PromptVariant(variant):
                return r
        raise KeyError((backend, variant))


def _mean(values: Iterable[float]) -> float:
    values = list(values)
    return math.fsum(values) / len(values) if values else 0.0


def aggregate(results: Sequence[EpisodeResult], seed: Optional[int] = None,
              config_digest: Optional[str] = None) -> AggregateReport:
    """Group by (backend, variant) and average; order of ``results`` is irrelevant."""
    groups: dict[tuple[str, PromptVariant], list[EpisodeResult]] = {}
    for r in results:
        groups.setdefault((r.backend, r.variant), []).append(r)
    rows = []
    for (backend, variant), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
        rows.append(ReportRow(
            backend=backend,
            variant=variant,
            rouge1_f=_mean(r.scores.rouge1_f for r in rs),
            meteor=_mean(r.scores.meteor for r in rs),
            bleu=_mean(r.scores.bleu for r in rs),
            exact_match_rate=_mean(float(r.exact_match) for r in rs),
            parse_failure_rate=_mean(float(r.parse_failure) for r in rs),
            invalid_action_rate=_mean(float(r.invalid_action) for r in rs),
            n_steps=len(rs),
        ))
    return AggregateReport(rows=rows, seed=seed, config_digest=config_digest)


@dataclass
class RunConfig:
    corpus_path: Union[str, Path]
    backends: Sequence[Union[BackendConfig, Backend]]
    variants: Sequence[PromptVariant] = tuple(PromptVariant)
    max_parallel: int = 4
    output_dir: Optional[Union[str, Path]] = None

    def validate(self) -> None:
        if not self.backends:
            raise ConfigError("at least one backend is required")
        if not self.variants:
            raise ConfigError("at least one prompt variant is required")
        if self.max_parallel < 1:
            raise ConfigError("max_parallel must be >= 1")
        names = [b.name for b in self.backends]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate backend names: {names}")


def run_corpus(
    corpus: Corpus,
    backends: Sequence[Union[BackendConfig, Backend]],
    variants: Sequence[PromptVariant] = tuple(PromptVariant),
    max_parallel: int = 4,
) -> list[EpisodeResult]:
    """Run every (backend, variant, step) episode; results come back in that order."""
    if not variants:
        raise ConfigError("at least one prompt variant is required")
    variants = [PromptVariant(v) for v in variants]
    instances = [b if isinstance(b, Backend) else make_backend(b, corpus.steps) for b in backends]
    system_prompt = build_system_prompt(corpus.config.node_count, corpus.config.start_channel)
    jobs = [(b, v, s) for b in instances for v in variants for s in corpus.steps]
    try:
        if max_parallel == 1:
            return [run_episode(s, b, v, system_prompt) for b, v, s in jobs]
        with ThreadPoolExecutor(max_workers=max_parallel) as pool:
            return list(pool.map(lambda job: run_episode(job[2], job[0], job[1], system_prompt), jobs))
    finally:
        for b, cfg in zip(instances, backends):
            if b is not cfg:
                b.close()


def evaluate(config: RunConfig) -> AggregateReport:
    """Load the corpus, run all episodes, aggregate, and write outputs if asked."""
    config.validate()
    corpus = load_corpus(config.corpus_path)
    results = run_corpus(corpus, config.backends, config.variants, config.max_parallel)
    report = aggregate(results, corpus.seed, corpus.config_digest)
    if config.output_dir is not None:
        write_outputs(config.output_dir, results, report, manifest={
            "corpus": str(config.corpus_path),
            "backends": [b.name for b in config.backends],
            "variants": [PromptVariant(v).value for v in config.variants],
            "node_count": corpus.config.node_count,
        })
    return report


def emit_report(report: AggregateReport, fmt: str = "csv") -> str:
    if fmt == "csv":
        return _emit_csv(report)
    if fmt in ("markdown", "md"):
        return _emit_markdown(report)
    raise ConfigError(f"unknown report format {fmt!r}")


def _emit_csv(report: AggregateReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in sorted(report.rows, key=lambda r: (r.backend, r.variant.value)):
        w.writerow([
            r.backend, r.variant.value,
            *(f"{x:.4f}" for x in (r.rouge1_f, r.meteor, r.bleu, r.exact_match_rate,
                                   r.parse_failure_rate, r.invalid_action_rate)),
            r.n_steps,
        ])
    return buf.getvalue()


def _emit_markdown(report: AggregateReport) -> str:
    out = []
    if report.seed is not None:
        out.append(f"Corpus seed {report.seed}, config digest {(report.config_digest or '')[:12]}")
        out.append("")
    for backend in sorted({r.backend for r in report.rows}):
        out.append(f"| **{backend}** | **ROUGE-1** | **METEOR** | **BLEU** |")
        out.append("|---|:-:|:-:|:-:|")
        for variant in TABLE_ORDER:
            try:
                r = report.row(backend, variant)
            except KeyError:
                continue
            out.append(f"| {variant.label} | {r.rouge1_f:.2f} | {r.meteor:.2f} | {r.bleu:.2f} |")
        out.append("")
    return "\n".join(out)


def write_outputs(out_dir: Union[str, Path], results: Sequence[EpisodeResult],
                  report: AggregateReport, manifest: dict) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = [canonical_json(r.to_dict()) for r in results]
    (out / RESULTS_FILE).write_text("\n".join(lines) + "\n", encoding="utf-8")
    (out / MANIFEST_FILE).write_text(canonical_json({
        **manifest, "seed": report.seed, "config_digest": report.config_digest,
    }) + "\n", encoding="utf-8")
    (out / "report.csv").write_text(emit_report(report, "csv"), encoding="utf-8")
    (out / "report.md").write_text(emit_report(report, "markdown"), encoding="utf-8")


def load_results(results_dir: Union[str, Path]) -> AggregateReport:
    """Re-aggregate a results directory written by :func:`evaluate`."""
    d = Path(results_dir)
    manifest = {}
    if (d / MANIFEST_FILE).exists():
        manifest = json.loads((d / MANIFEST_FILE).read_text(encoding="utf-8"))
    node_count = int(manifest.get("node_count", 3))
    path = d / RESULTS_FILE
    if not path.exists():
        raise ConfigError(f"{path} not found")
    results = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            results.append(EpisodeResult.from_dict(json.loads(line), node_count))
    if not results:
        raise ConfigError(f"{path} holds no episodes")
    return aggregate(results, manifest.get("seed"), manifest.get("config_digest"))
