"""Command-line entry point: ``meshpilot gen | run | report | selftest``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .backends import load_backend_configs, oracle_config
from .corpus import GenerationConfig, generate_corpus, save_corpus
from .errors import ConfigError, MeshPilotError
from .harness import RunConfig, emit_report, evaluate, load_results
from .prompts import PromptVariant
from .selftest import run_selftest

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _variants(text: str) -> list[PromptVariant]:
    if text.strip().lower() == "all":
        return list(PromptVariant)
    return [PromptVariant.parse(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="meshpilot", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a scenario corpus")
    g.add_argument("--seed", type=int, default=7)
    g.add_argument("--steps", type=int, default=200)
    g.add_argument("--nodes", type=int, default=3)
    g.add_argument("--start-channel", type=int, default=36)
    g.add_argument("--out", required=True, type=Path)

    r = sub.add_parser("run", help="evaluate backends on a corpus")
    r.add_argument("--corpus", required=True, type=Path)
    r.add_argument("--backend", action="append", required=True,
                   help="'oracle' or a backend config file (repeatable)")
    r.add_argument("--variants", default="all", help="'all' or a comma list, e.g. OneNewline,NoNewline")
    r.add_argument("--concurrency", type=int, default=4)
    r.add_argument("--out", type=Path, default=Path("results"))
    r.add_argument("--format", choices=("csv", "markdown"), default="csv")

    rep = sub.add_parser("report", help="render tables from a results directory")
    rep.add_argument("--in", dest="results", required=True, type=Path)
    rep.add_argument("--format", choices=("csv", "markdown"), default="markdown")

    sub.add_parser("selftest", help="check metrics against the reference oracle and golden prompts")
    return p


def _cmd_gen(args) -> int:
    config = GenerationConfig(step_count=args.steps, node_count=args.nodes,
                              start_channel=args.start_channel)
    corpus = generate_corpus(config, args.seed)
    save_corpus(corpus, args.out)
    print(f"wrote {len(corpus)} steps to {args.out} (sha256 {corpus.content_digest()})")
    return EXIT_OK


def _cmd_run(args) -> int:
    backends = []
    for spec in args.backend:
        if spec.lower() == "oracle":
            backends.append(oracle_config())
        else:
            backends.extend(load_backend_configs(spec))
    config = RunConfig(corpus_path=args.corpus, backends=backends,
                       variants=_variants(args.variants), max_parallel=args.concurrency,
                       output_dir=args.out)
    report = evaluate(config)
    sys.stdout.write(emit_report(report, args.format))
    return EXIT_OK


def _cmd_report(args) -> int:
    sys.stdout.write(emit_report(load_results(args.results), args.format))
    return EXIT_OK


def _cmd_selftest(args) -> int:
    ok = True
    for name, passed, detail in run_selftest():
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    return EXIT_OK if ok else EXIT_RUNTIME


COMMANDS = {"gen": _cmd_gen, "run": _cmd_run, "report": _cmd_report, "selftest": _cmd_selftest}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"meshpilot: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (MeshPilotError, OSError) as e:
        print(f"meshpilot: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
