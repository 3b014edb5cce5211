"""
Command-line interface.

Subcommands: validate, explore, check-ef, trace, check-attack, actors, schema.
Exit codes: 0 holds / valid, 1 does not hold / invalid, 2 usage or model
error, 3 inconclusive because exploration was truncated.
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, Optional, Sequence, Tuple

from pydantic import ValidationError

from src.cli.model_file import parse_model_with_positions
from src.cli.reports import (
    ActorsReport,
    AttackReport,
    EFReport,
    ExploreReport,
    ReportConfig,
    TraceReport,
    build_trace,
    render,
)
from src.cli.settings import load_config, section
from src.core.attack_trees import attack_to_spec, check_attack_tree, leaf_count, synthesize_base_attack
from src.core.ctl import check_EF
from src.core.errors import CheckerError, Diagnostic, ModelFileError, ModelValidationError, TruncatedModelError
from src.core.kripke import ExplorationConfig, KripkeModel, explore
from src.core.model import PsyState
from src.core.queries import INITIAL, InitialState, StateQuery, query_to_spec
from src.core.resolver import build_resolver
from src.core.schema import ModelFile
from src.core.validator import ValidatedModel, validate_model

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3


class UsageError(CheckerError):
    """Bad command-line input that argparse cannot detect."""


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="Model file (YAML)")
    common.add_argument("--config", default=None, help="Config file (default: configs/config.yaml)")
    common.add_argument("--max-states", type=int, default=None, help="Exploration state limit")
    common.add_argument("--max-depth", type=int, default=None, help="Exploration depth limit")
    common.add_argument("--workers", type=int, default=None, help="Threads expanding each BFS frontier")
    common.add_argument(
        "--set-psy",
        action="append",
        default=[],
        metavar="NAME=STATE",
        help="Override an actor's psychological state before validation (repeatable)",
    )
    common.add_argument("--format", choices=["text", "json"], default=None, help="Report format")
    common.add_argument("--full-states", action="store_true", default=None, help="Dump complete witness states")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="insider-check", description="Model checker for insider-threat infrastructure models."
    )
    commands = parser.add_subparsers(dest="command", required=True)
    common = _common_options()

    validate = commands.add_parser("validate", help="Parse and validate a model file")
    validate.add_argument("file", help="Model file (YAML)")
    validate.add_argument("--config", default=None, help="Config file (default: configs/config.yaml)")
    validate.add_argument("--set-psy", action="append", default=[], metavar="NAME=STATE")

    commands.add_parser("explore", parents=[common], help="Explore the reachable state space")

    check_ef = commands.add_parser("check-ef", parents=[common], help="Decide EF for a named query")
    check_ef.add_argument("--query", required=True, help="Name of the query (or 'initial')")
    check_ef.add_argument("--synthesize", action="store_true", help="Also synthesize an attack tree")

    trace = commands.add_parser("trace", parents=[common], help="Print a shortest witness for a named query")
    trace.add_argument("--query", required=True, help="Name of the query (or 'initial')")

    check_attack = commands.add_parser("check-attack", parents=[common], help="Check a named attack tree")
    check_attack.add_argument("--attack", required=True, help="Name of the attack")

    commands.add_parser("actors", parents=[common], help="Classify actors and show insider merges")

    commands.add_parser("schema", help="Print the JSON schema of the model file format")
    return parser


def _print_diagnostics(path: str, diagnostics: Sequence[Diagnostic]) -> None:
    for d in diagnostics:
        prefix = f"{path}:{d.line}:{d.column}:" if d.line is not None else f"{path}:"
        print(f"{prefix} {d.path}: {d.message}", file=sys.stderr)


def _psy_overrides(assignments: Sequence[str]) -> Dict[str, PsyState]:
    overrides = {}
    for assignment in assignments:
        name, sep, value = assignment.partition("=")
        if not sep or not name:
            raise UsageError(f"--set-psy expects NAME=STATE, got '{assignment}'")
        try:
            overrides[name] = PsyState(value)
        except ValueError:
            choices = ", ".join(p.value for p in PsyState)
            raise UsageError(f"unknown psychological state '{value}' (one of: {choices})") from None
    return overrides


def apply_psy_overrides(doc: ModelFile, overrides: Dict[str, PsyState]) -> ModelFile:
    """Document with the given actors' psychological states replaced."""
    unknown = sorted(set(overrides) - {actor.name for actor in doc.actors})
    if unknown:
        raise UsageError(f"--set-psy names unknown actor(s): {', '.join(unknown)}")
    actors = [
        actor.model_copy(update={"psy": overrides[actor.name]}) if actor.name in overrides else actor
        for actor in doc.actors
    ]
    for name, psy in sorted(overrides.items()):
        logger.info(f"Overriding psy of {name} with {psy.value}")
    return doc.model_copy(update={"actors": actors})


def load_validated(
    path: str, assignments: Sequence[str] = (), config: Optional[Dict[str, Any]] = None
) -> ValidatedModel:
    """Parse, apply overrides and validate; raises ModelFileError or ModelValidationError."""
    doc, source = parse_model_with_positions(path)
    doc = apply_psy_overrides(doc, _psy_overrides(assignments))
    model, errors = validate_model(doc, section(config or {}, "validation"))
    if errors:
        raise ModelValidationError(source.locate_all(errors))
    return model


def _merged(defaults: Dict[str, Any], flags: Dict[str, Any]) -> Dict[str, Any]:
    return {**defaults, **{key: value for key, value in flags.items() if value is not None}}


def _settings(args: argparse.Namespace, config: Dict[str, Any]) -> Tuple[ExplorationConfig, ReportConfig]:
    """Flags override the config file, which overrides the environment."""
    limits = ExplorationConfig(
        **_merged(
            section(config, "exploration"),
            {"max_states": args.max_states, "max_depth": args.max_depth, "workers": args.workers},
        )
    )
    flags = {"format": args.format, "full_states": args.full_states}
    output = ReportConfig(**_merged(section(config, "reports"), flags))
    return limits, output


def _model_name(args: argparse.Namespace, model: ValidatedModel) -> str:
    return model.name or args.file


def _explore(model: ValidatedModel, limits: ExplorationConfig) -> KripkeModel:
    return explore(model.initial, model.declarations, model.postables, limits)


def _query(model: ValidatedModel, name: str) -> StateQuery:
    if name == INITIAL:
        return InitialState()
    if name not in model.queries:
        known = ", ".join(sorted(model.queries)) or "none"
        raise UsageError(f"unknown query '{name}' (defined: {known})")
    return model.queries[name]


def _verdict_code(holds: bool, inconclusive: bool) -> int:
    if holds:
        return EXIT_OK
    return EXIT_INCONCLUSIVE if inconclusive else EXIT_FAILED


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        model = load_validated(args.file, args.set_psy, load_config(args.config))
    except (ModelFileError, ModelValidationError) as e:
        _print_diagnostics(args.file, e.diagnostics)
        return EXIT_FAILED
    graph = model.initial.graph
    print(
        f"{args.file}: valid ({len(graph.locations)} locations, {len(graph.edges)} edges, "
        f"{len(graph.identities)} actors, {len(model.queries)} queries, {len(model.attacks)} attacks)"
    )
    return EXIT_OK


def _cmd_explore(args: argparse.Namespace, model: ValidatedModel, output: ReportConfig, kripke: KripkeModel) -> int:
    report = ExploreReport(
        model=_model_name(args, model),
        states=len(kripke.states),
        transitions=len(kripke.transitions),
        initial_states=len(kripke.init),
        depth=kripke.depth,
        truncated=kripke.truncated,
        truncation_reason=kripke.truncation_reason,
    )
    print(render(report, output))
    return EXIT_INCONCLUSIVE if kripke.truncated else EXIT_OK


def _cmd_check_ef(args: argparse.Namespace, model: ValidatedModel, output: ReportConfig, kripke: KripkeModel) -> int:
    query = _query(model, args.query)
    verdict = check_EF(kripke, query)
    report = EFReport(
        model=_model_name(args, model),
        query=args.query,
        definition=query_to_spec(query),
        holds=verdict.holds,
        inconclusive=verdict.inconclusive,
        truncated=kripke.truncated,
        witness=build_trace(verdict.witness, verdict.steps, output.full_states) if verdict.holds else None,
    )
    if args.synthesize:
        if kripke.truncated:
            report.synthesis = "refused: model truncated"
        else:
            attack = synthesize_base_attack(kripke, query)
            if attack is None:
                report.synthesis = "refused: EF does not hold"
            else:
                report.synthesis = f"{leaf_count(attack)} base attack(s)"
                report.attack = attack_to_spec(attack)
    print(render(report, output))
    return _verdict_code(verdict.holds, verdict.inconclusive)


def _cmd_trace(args: argparse.Namespace, model: ValidatedModel, output: ReportConfig, kripke: KripkeModel) -> int:
    verdict = check_EF(kripke, _query(model, args.query))
    report = TraceReport(
        model=_model_name(args, model),
        query=args.query,
        witness=build_trace(verdict.witness, verdict.steps, output.full_states) if verdict.holds else None,
    )
    print(render(report, output))
    return _verdict_code(verdict.holds, verdict.inconclusive)


def _cmd_check_attack(
    args: argparse.Namespace, model: ValidatedModel, output: ReportConfig, kripke: KripkeModel
) -> int:
    if args.attack not in model.attacks:
        known = ", ".join(sorted(model.attacks)) or "none"
        raise UsageError(f"unknown attack '{args.attack}' (defined: {known})")
    attack = model.attacks[args.attack]
    result = check_attack_tree(kripke, attack)
    report = AttackReport(
        model=_model_name(args, model),
        attack=args.attack,
        definition=attack_to_spec(attack),
        valid=result.valid,
        failing_clause=result.failing_clause,
        leaves=leaf_count(attack),
    )
    print(render(report, output))
    return EXIT_OK if result.valid else EXIT_FAILED


def _cmd_actors(args: argparse.Namespace, model: ValidatedModel, output: ReportConfig) -> int:
    resolver = build_resolver(model.initial, model.declarations)
    print(render(ActorsReport.of(_model_name(args, model), model.initial, resolver), output))
    return EXIT_OK


def _cmd_schema() -> int:
    print(json.dumps(ModelFile.model_json_schema(), indent=2, sort_keys=True))
    return EXIT_OK


_EXPLORING = {
    "explore": _cmd_explore,
    "check-ef": _cmd_check_ef,
    "trace": _cmd_trace,
    "check-attack": _cmd_check_attack,
}


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "schema":
        return _cmd_schema()
    if args.command == "validate":
        return _cmd_validate(args)

    config = load_config(args.config)
    limits, output = _settings(args, config)
    model = load_validated(args.file, args.set_psy, config)
    if args.command == "actors":
        return _cmd_actors(args, model, output)
    kripke = _explore(model, limits)
    return _EXPLORING[args.command](args, model, output, kripke)


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    """Run one CLI invocation and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    path = getattr(args, "file", "<args>")
    try:
        return _dispatch(args)
    except (ModelFileError, ModelValidationError) as e:
        _print_diagnostics(path, e.diagnostics)
        return EXIT_USAGE
    except ValidationError as e:
        for error in e.errors():
            print(f"invalid setting {'.'.join(str(p) for p in error['loc'])}: {error['msg']}", file=sys.stderr)
        return EXIT_USAGE
    except TruncatedModelError as e:
        print(f"{path}: {e}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except UsageError as e:
        print(f"{path}: {e}", file=sys.stderr)
        return EXIT_USAGE
