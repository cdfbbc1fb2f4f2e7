"""Built-in checks: metric oracle agreement and golden prompt bytes."""

from __future__ import annotations

import itertools
from importlib import resources

from .actions import canonical_render, enumerate_valid_actions
from .metrics import score
from .prompts import PromptVariant, build_system_prompt, build_user_prompt
from .reference_metrics import ref_scores

TABLE_OBSERVATION = "Network Status from Node1 Best Neighbors List is [2, 3]."
GOLDEN_FILES = {
    PromptVariant.NO_NEWLINE: "user_prompt_no_newline.txt",
    PromptVariant.ONE_NEWLINE: "user_prompt_one_newline.txt",
    PromptVariant.TWO_NEWLINES: "user_prompt_two_newlines.txt",
}
SYSTEM_GOLDEN = "system_prompt_3_36.txt"
TOLERANCE = 1e-9


def golden_bytes(name: str) -> bytes:
    return resources.files("meshpilot").joinpath("data", "golden", name).read_bytes()


def check_metric_oracle(tol: float = TOLERANCE) -> tuple[bool, str]:
    texts = [canonical_render(a) for a in enumerate_valid_actions(3)]
    worst = 0.0
    for hyp, ref in itertools.product(texts, repeat=2):
        s = score(hyp, ref)
        mine = (s.rouge1_p, s.rouge1_r, s.rouge1_f, s.meteor, s.bleu)
        worst = max(worst, max(abs(a - b) for a, b in zip(mine, ref_scores(hyp, ref))))
    return worst <= tol, f"{len(texts) ** 2} pairs, max deviation {worst:.3g}"


def check_golden_prompts() -> tuple[bool, str]:
    problems = []
    if build_system_prompt(3, 36).encode("utf-8") != golden_bytes(SYSTEM_GOLDEN):
        problems.append("system prompt")
    valid = enumerate_valid_actions(3)
    for variant, name in GOLDEN_FILES.items():
        if build_user_prompt(TABLE_OBSERVATION, valid, variant).encode("utf-8") != golden_bytes(name):
            problems.append(name)
    if problems:
        return False, "mismatch: " + ", ".join(problems)
    return True, f"{len(GOLDEN_FILES) + 1} golden files match"


def run_selftest() -> list[tuple[str, bool, str]]:
    return [
        ("metric-oracle", *check_metric_oracle()),
        ("golden-prompts", *check_golden_prompts()),
    ]
