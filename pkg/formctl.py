#!/usr/bin/env python3
"""Work with machine forms from the command line.

Usage:
    python formctl.py parse greeter.mt                  # canonical text (or --output json)
    python formctl.py fmt greeter.mt --write            # rewrite a file in canonical form
    python formctl.py hash greeter.mt                   # SHA-256 of the canonical text
    python formctl.py diff a.mt b.mt                    # structural diff, one line per entry
    python formctl.py inspect greeter.mt --policy p.json --trust human
    python formctl.py describe greeter.mt --policy p.json
    python formctl.py run greeter.mt --policy p.json --input name=World
    python formctl.py ledger list|show SEQ|verify|audit --ledger ledger.jsonl

Exit codes: 0 ok, 1 usage or parse error, 2 governance rejection,
3 run failure, 4 audit failure.
"""
import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent))

import structlog

from engine.governance import Registry, Rejection, audit_no_bypass, materialize
from engine.inspector import inspect_form
from engine.ledger import EvolutionLedger, entry_to_dict
from engine.providers import MockProvider
from engine.runtime import RunRequest, run
from models.errors import KernelError, NumberRangeError, ParseError, PolicyError, RunError
from models.form import Form
from models.form_diff import diff as form_diff
from models.policy import PolicyContext, TrustLevel
from models.values import is_number
from parsers.expr_parser import static_literal
from parsers.surface_parser import parse_source
from utils.log import configure_logging
from utils.registry_store import RegistryStore
from writers.form_json import encode_value, to_json
from writers.form_text import form_hash, to_text
from writers.report_writer import ReportWriter

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REJECTED = 2
EXIT_RUN_FAILED = 3
EXIT_AUDIT_FAILED = 4


class CliFailure(Exception):
    """Ends a command with a message on stderr and an exit code."""

    def __init__(self, message: str, exit_code: int = EXIT_USAGE):
        super().__init__(message)
        self.message = message
        self.exit_code = exit_code


@dataclass
class CliConfig:
    policy_path: Path
    ledger_path: Path
    decisions_path: Path
    models_path: Optional[Path] = None
    trust: TrustLevel = TrustLevel.UNTRUSTED
    output: str = "text"
    verbose: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CliConfig":
        try:
            trust = TrustLevel.parse(args.trust)
        except PolicyError as e:
            raise CliFailure(f"Error: {e.message}") from e
        return cls(
            policy_path=args.policy,
            ledger_path=args.ledger,
            decisions_path=args.decisions,
            models_path=args.models,
            trust=trust,
            output=args.output,
            verbose=args.verbose,
        )

    @property
    def json_output(self) -> bool:
        return self.output == "json"

    def policy(self) -> PolicyContext:
        try:
            return PolicyContext.load(self.policy_path)
        except PolicyError as e:
            raise CliFailure(f"Error: {e.message}") from e

    def provider(self) -> MockProvider:
        if self.models_path is None:
            return MockProvider()
        try:
            return MockProvider.load(self.models_path)
        except KernelError as e:
            raise CliFailure(f"Error: {e.message}") from e

    def store(self) -> RegistryStore:
        return RegistryStore(self.decisions_path, self.ledger_path)


# ----------------------------------------------------------------------
# Helpers
# ----------------------------------------------------------------------


def load_form(path: Path) -> Form:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise CliFailure(f"Error: cannot read {path}: {e.strerror or e}") from e
    except UnicodeDecodeError as e:
        raise CliFailure(f"Error: {path} is not UTF-8 text") from e
    try:
        return parse_source(text)
    except ParseError as e:
        raise CliFailure(e.render(str(path))) from e


def parse_inputs(pairs: list[str]) -> dict:
    """``k=v`` pairs; values are text unless they read as numbers or booleans."""
    inputs = {}
    for pair in pairs or []:
        key, sep, raw = pair.partition("=")
        if not sep or not key:
            raise CliFailure(f"Error: --input expects key=value, got {pair!r}")
        try:
            is_literal, value = static_literal(raw)
        except NumberRangeError as e:
            raise CliFailure(f"Error: invalid-input: {key}: {e.message}") from e
        inputs[key] = value if is_literal and (is_number(value) or isinstance(value, bool)) else raw
    return inputs


def emit_json(data) -> None:
    print(json.dumps(data, indent=2, ensure_ascii=False))


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------


def cmd_parse(args, config: CliConfig) -> int:
    form = load_form(args.file)
    if config.json_output:
        print(to_json(form))
    else:
        sys.stdout.write(to_text(form))
    return EXIT_OK


def cmd_fmt(args, config: CliConfig) -> int:
    text = to_text(load_form(args.file))
    if args.write:
        args.file.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_hash(args, config: CliConfig) -> int:
    digest = form_hash(load_form(args.file))
    if config.json_output:
        emit_json({"file": str(args.file), "hash": digest})
    else:
        print(digest)
    return EXIT_OK


def cmd_diff(args, config: CliConfig) -> int:
    change = form_diff(load_form(args.before), load_form(args.after))
    if config.json_output:
        emit_json([
            {
                "path": entry.path,
                "op": entry.op,
                "target": entry.target,
                "before": encode_value(entry.before),
                "after": encode_value(entry.after),
            }
            for entry in change
        ])
    else:
        sys.stdout.write(ReportWriter.format_diff(change))
    return EXIT_OK


def cmd_inspect(args, config: CliConfig) -> int:
    form = load_form(args.file)
    report = inspect_form(form, config.policy(), config.trust)
    if config.json_output:
        emit_json(report.to_dict())
    else:
        sys.stdout.write(ReportWriter.format_report(report))
    return EXIT_OK if report.approved else EXIT_REJECTED


def cmd_describe(args, config: CliConfig) -> int:
    form = load_form(args.file)
    pi = config.policy()
    store = config.store()
    with store.locked():
        registry = Registry.load(store)
        result = materialize(registry, form, pi, config.trust, "describe")
    if isinstance(result.outcome, Rejection):
        _report_rejection(result.outcome, config)
        return EXIT_REJECTED
    if config.json_output:
        emit_json({"decision_id": result.record.id, "summary": result.outcome, "report": result.record.report.to_dict()})
    else:
        sys.stdout.write(result.outcome)
    return EXIT_OK


def cmd_run(args, config: CliConfig) -> int:
    form = load_form(args.file)
    inputs = parse_inputs(args.input)
    pi = config.policy()
    provider = config.provider()
    store = config.store()

    with store.locked():
        registry = Registry.load(store)
        result = materialize(registry, form, pi, config.trust, "eval")
        if isinstance(result.outcome, Rejection):
            _report_rejection(result.outcome, config)
            return EXIT_REJECTED
        try:
            outcome = run(RunRequest(result.outcome, inputs, provider, pi, config.trust, registry))
        except RunError as e:
            raise CliFailure(f"Error: run refused: {e}", EXIT_RUN_FAILED) from e

    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as handle:
            for directive in outcome.trace:
                handle.write(json.dumps(directive.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")

    if config.json_output:
        emit_json(outcome.to_dict())
    else:
        emit_json({name: encode_value(value) for name, value in outcome.step_values.items()})
        print(f"trace: {len(outcome.trace)} directive(s)")
        for directive in outcome.trace:
            print(f"  {directive.kind.value} {directive.capability} ({directive.payload.get('step')})")

    if not outcome.ok:
        print(f"Error: run failed at step {outcome.failed_step}: {outcome.error}", file=sys.stderr)
        return EXIT_RUN_FAILED
    return EXIT_OK


def cmd_ledger(args, config: CliConfig) -> int:
    store = config.store()
    action = args.ledger_command

    if action == "verify":
        lines = store.ledger_lines()
        broken = store.verify_ledger()
        if config.json_output:
            emit_json({"ok": broken is None, "entries": len(lines), "broken_seq": broken})
        elif broken is None:
            print(f"ledger ok ({len(lines)} {'entry' if len(lines) == 1 else 'entries'})")
        else:
            print(f"ledger broken at seq {broken}")
        return EXIT_OK if broken is None else EXIT_AUDIT_FAILED

    if action == "audit":
        registry = Registry.load(store, with_ledger=False)
        orphans = sorted(set(audit_no_bypass(registry)) | set(store.audit_forms()))
        if config.json_output:
            emit_json({"ok": not orphans, "machines": registry.machine_count, "orphans": orphans})
        elif orphans:
            print(f"{len(orphans)} machine(s) without a backing decision:")
            for digest in orphans:
                print(f"  {digest}")
        else:
            print(f"audit ok ({registry.machine_count} machines, {len(registry.decisions)} decisions)")
        return EXIT_AUDIT_FAILED if orphans else EXIT_OK

    ledger = EvolutionLedger.from_lines(store.ledger_lines())
    if action == "list":
        if config.json_output:
            emit_json([entry_to_dict(entry) for entry in ledger])
        else:
            sys.stdout.write(ReportWriter.format_ledger(ledger))
        return EXIT_OK

    if not 0 <= args.seq < len(ledger):
        raise CliFailure(f"Error: no ledger entry with seq {args.seq} ({len(ledger)} entries)")
    entry = ledger[args.seq]
    if config.json_output:
        emit_json(entry_to_dict(entry))
    else:
        sys.stdout.write(ReportWriter.format_ledger_entry(entry))
    return EXIT_OK


def _report_rejection(rejection: Rejection, config: CliConfig) -> None:
    if config.json_output:
        emit_json(rejection.report.to_dict())
    else:
        sys.stdout.write(ReportWriter.format_report(rejection.report))
    print(f"Error: {rejection}", file=sys.stderr)


# ----------------------------------------------------------------------
# Argument parsing
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--policy',
        type=Path,
        default=Path('policy.json'),
        help='Policy context JSON file (default: policy.json)'
    )
    common.add_argument(
        '--ledger',
        type=Path,
        default=Path('ledger.jsonl'),
        help='Evolution ledger file (default: ledger.jsonl)'
    )
    common.add_argument(
        '--decisions',
        type=Path,
        default=Path('decisions.jsonl'),
        help='Decision records file; machines.jsonl and forms/ live beside it'
    )
    common.add_argument(
        '--models',
        type=Path,
        help='Mock model responses JSON, keyed "machine/step"'
    )
    common.add_argument(
        '--trust',
        default='untrusted',
        help='Declared trust: human, approved_generator, validated_llm, untrusted'
    )
    common.add_argument(
        '--output',
        choices=('text', 'json'),
        default='text',
        help='Output format (default: text)'
    )
    common.add_argument(
        '--verbose', '-v',
        action='store_true',
        help='Log governance and runtime events to stderr'
    )

    parser = argparse.ArgumentParser(
        prog='formctl',
        description='Parse, inspect, materialize and run governed machine forms'
    )
    commands = parser.add_subparsers(dest='command', required=True)

    for name, help_text in (
        ('parse', 'Parse a source file and print it canonically'),
        ('hash', 'Print the SHA-256 of the canonical text'),
        ('inspect', 'Run the six governance checks'),
        ('describe', 'Materialize in describe mode and print the summary'),
    ):
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.add_argument('file', type=Path, help='Machine source (.mt)')

    fmt = commands.add_parser('fmt', parents=[common], help='Print (or rewrite) canonical text')
    fmt.add_argument('file', type=Path, help='Machine source (.mt)')
    fmt.add_argument('--write', '-w', action='store_true', help='Rewrite the file in place')

    diff = commands.add_parser('diff', parents=[common], help='Structural diff of two sources')
    diff.add_argument('before', type=Path, help='Original source')
    diff.add_argument('after', type=Path, help='Changed source')

    run_parser = commands.add_parser('run', parents=[common], help='Materialize in eval mode and run')
    run_parser.add_argument('file', type=Path, help='Machine source (.mt)')
    run_parser.add_argument(
        '--input',
        action='append',
        metavar='KEY=VALUE',
        help='Run input; repeatable. Numbers and booleans are typed, the rest is text'
    )
    run_parser.add_argument('--trace', type=Path, help='Write the behavioral trace as JSON lines')

    ledger = commands.add_parser('ledger', help='Inspect the evolution ledger and registry')
    ledger_commands = ledger.add_subparsers(dest='ledger_command', required=True)
    ledger_commands.add_parser('list', parents=[common], help='List ledger entries')
    show = ledger_commands.add_parser('show', parents=[common], help='Show one ledger entry')
    show.add_argument('seq', type=int, help='Entry sequence number')
    ledger_commands.add_parser('verify', parents=[common], help='Verify the hash chain')
    ledger_commands.add_parser('audit', parents=[common], help='Check every machine has a backing decision')

    return parser


COMMANDS = {
    'parse': cmd_parse,
    'fmt': cmd_fmt,
    'hash': cmd_hash,
    'diff': cmd_diff,
    'inspect': cmd_inspect,
    'describe': cmd_describe,
    'run': cmd_run,
    'ledger': cmd_ledger,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging(args.verbose)
    try:
        config = CliConfig.from_args(args)
        return COMMANDS[args.command](args, config)
    except CliFailure as e:
        print(e.message, file=sys.stderr)
        return e.exit_code
    except ParseError as e:
        print(e.render(str(getattr(args, 'file', '<source>'))), file=sys.stderr)
        return EXIT_USAGE
    except KernelError as e:
        logger.warning("command_failed", command=args.command, code=e.code)
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
