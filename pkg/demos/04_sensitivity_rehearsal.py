"""
Rehearsing a prompt-ending sensitivity study
============================================

Generate a corpus, script a backend whose answer quality depends on how the
prompt ends, and emit the resulting comparison table. Swap the scripted
backend for a remote one (see ``backends.example.ini``) to run the same study
against a real model.
"""

import tempfile
from pathlib import Path

from meshpilot import (
    BackendConfig,
    BackendKind,
    GenerationConfig,
    PromptVariant,
    RunConfig,
    emit_report,
    evaluate,
    generate_corpus,
    save_corpus,
)
from meshpilot.backends import oracle_config

workdir = Path(tempfile.mkdtemp())
corpus = generate_corpus(GenerationConfig(step_count=60), seed=11)
save_corpus(corpus, workdir / "corpus.jsonl")

# %%
# One scripted table, three behaviours: clean tags after a single newline,
# chatty untagged prose with no newline, shouting tags after two newlines.
table = {}
for i, s in enumerate(corpus.steps):
    ref = s.reference_text
    table[f"{s.id}|OneNewline"] = f"<ACTION>{ref}</ACTION>" if i % 4 else "<ACTION>No Action</ACTION>"
    table[f"{s.id}|NoNewline"] = f"The right move here is to {ref.lower()}."
    table[f"{s.id}|TwoNewlines"] = f"<ACTION>{ref.upper()}</ACTION>" if i % 3 else f"<ACTION>{ref}!</ACTION>"

backends = [
    BackendConfig("scripted-model", BackendKind.SCRIPTED_REPLAY, replay_table=table),
    oracle_config(),
]
report = evaluate(RunConfig(workdir / "corpus.jsonl", backends, list(PromptVariant),
                            output_dir=workdir / "results"))

print(emit_report(report, "markdown"))
print(emit_report(report, "csv"))
print("results written to", workdir / "results")
