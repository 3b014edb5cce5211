"""
Report models and rendering.

Every command result is a pydantic model so it can be printed either as
human-readable text or as deterministic JSON (``model_dump_json(indent=2)``).
All collections are emitted in sorted order.
"""

import logging
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.core.model import InfrastructureState, LabeledDatum, tipping_point, unaware
from src.core.resolver import ActorResolver
from src.core.semantics import RuleApplication

logger = logging.getLogger(__name__)


class ReportConfig(BaseSettings):
    """Output settings."""

    model_config = SettingsConfigDict(env_prefix="REPORT_")

    format: Literal["text", "json"] = "text"
    full_states: bool = False


class DatumView(BaseModel):
    content: str
    owner: str
    readers: List[str] = Field(default_factory=list)

    @classmethod
    def of(cls, datum: LabeledDatum) -> "DatumView":
        return cls(content=datum.content, owner=datum.label.owner, readers=sorted(datum.label.readers))


class StateView(BaseModel):
    """Complete dump of the mutable part of a state."""

    placement: Dict[str, List[str]]
    stores: Dict[str, List[DatumView]]

    @classmethod
    def of(cls, state: InfrastructureState) -> "StateView":
        graph = state.graph
        return cls(
            placement={location: sorted(ids) for location, ids in graph.placement.items()},
            stores={
                location: [DatumView.of(d) for d in sorted(data, key=LabeledDatum.sort_key)]
                for location, data in graph.stores.items()
            },
        )


class MoveView(BaseModel):
    identity: str
    source: str
    target: str


class AddedDatumView(DatumView):
    location: str


class StateDiff(BaseModel):
    """Changes of a state relative to the first state of its trace."""

    moved: List[MoveView] = Field(default_factory=list)
    added: List[AddedDatumView] = Field(default_factory=list)

    @classmethod
    def between(cls, origin: InfrastructureState, state: InfrastructureState) -> "StateDiff":
        moved = []
        for identity in sorted(state.graph.identities):
            before, after = origin.graph.location_of(identity), state.graph.location_of(identity)
            if before != after:
                moved.append(MoveView(identity=identity, source=before, target=after))
        added = []
        for location in sorted(state.graph.stores):
            fresh = state.graph.data_at(location) - origin.graph.data_at(location)
            for datum in sorted(fresh, key=LabeledDatum.sort_key):
                added.append(AddedDatumView(location=location, **DatumView.of(datum).model_dump()))
        return cls(moved=moved, added=added)


class TraceStep(BaseModel):
    index: int
    via: List[str] = Field(default_factory=list, description="Rule instances producing this state")
    diff: StateDiff
    state: Optional[StateView] = None


def build_trace(
    witness: Sequence[InfrastructureState],
    steps: Sequence[Tuple[RuleApplication, ...]],
    full_states: bool = False,
) -> List[TraceStep]:
    """Witness as a list of steps, each a diff from the first state."""
    trace = []
    for i, state in enumerate(witness):
        via = [application.describe() for application in steps[i - 1]] if i > 0 else []
        trace.append(
            TraceStep(
                index=i,
                via=via,
                diff=StateDiff.between(witness[0], state),
                state=StateView.of(state) if full_states or i == 0 else None,
            )
        )
    return trace


class ExploreReport(BaseModel):
    command: Literal["explore"] = "explore"
    model: str
    states: int
    transitions: int
    initial_states: int
    depth: int
    truncated: bool
    truncation_reason: Optional[str] = None


class EFReport(BaseModel):
    command: Literal["check-ef"] = "check-ef"
    model: str
    query: str
    definition: Any = None
    holds: bool
    inconclusive: bool = False
    truncated: bool = False
    witness: Optional[List[TraceStep]] = None
    attack: Optional[Dict[str, Any]] = None
    synthesis: Optional[str] = None


class TraceReport(BaseModel):
    command: Literal["trace"] = "trace"
    model: str
    query: str
    witness: Optional[List[TraceStep]] = None


class AttackReport(BaseModel):
    command: Literal["check-attack"] = "check-attack"
    model: str
    attack: str
    definition: Dict[str, Any]
    valid: bool
    failing_clause: Optional[str] = None
    leaves: int


class ActorView(BaseModel):
    name: str
    location: str
    psy: str
    motivations: List[str]
    credentials: List[str]
    roles: List[str]
    unaware: bool
    tipping_point: bool
    acts_as: List[str] = Field(default_factory=list, description="Other identities in the actor's class")


class ActorsReport(BaseModel):
    command: Literal["actors"] = "actors"
    model: str
    actors: List[ActorView]

    @classmethod
    def of(cls, model: str, state: InfrastructureState, resolver: ActorResolver) -> "ActorsReport":
        graph = state.graph
        actors = []
        for name in sorted(graph.identities):
            disposition = graph.disposition_of(name)
            actors.append(
                ActorView(
                    name=name,
                    location=graph.location_of(name),
                    psy=disposition.psy.value,
                    motivations=sorted(m.value for m in disposition.motivations),
                    credentials=sorted(graph.credentials_of(name)),
                    roles=sorted(graph.roles.get(name, ())),
                    unaware=unaware(disposition),
                    tipping_point=tipping_point(disposition),
                    acts_as=sorted(resolver.class_of(name) - {name}),
                )
            )
        return cls(model=model, actors=actors)


Report = Union[ExploreReport, EFReport, TraceReport, AttackReport, ActorsReport]


def _render_trace(trace: Optional[List[TraceStep]]) -> List[str]:
    if not trace:
        return ["  (no witness)"]
    lines = []
    for step in trace:
        if step.index == 0:
            lines.append("  [0] initial state")
        else:
            lines.append(f"  [{step.index}] " + "; ".join(step.via))
        for move in step.diff.moved:
            lines.append(f"        {move.identity}: {move.source} -> {move.target}")
        for datum in step.diff.added:
            readers = ", ".join(datum.readers) or "-"
            lines.append(f"        + {datum.content} at {datum.location} (owner {datum.owner}; readers {readers})")
        if step.state is not None:
            lines.extend(_render_state(step.state, indent="        "))
    return lines


def _render_state(state: StateView, indent: str) -> List[str]:
    lines = [f"{indent}{location}: {', '.join(ids)}" for location, ids in state.placement.items()]
    for location, data in state.stores.items():
        for datum in data:
            lines.append(f"{indent}{location} stores {datum.content} (owner {datum.owner})")
    return lines


def render_text(report: Report) -> str:
    """Human-readable rendering of a report."""
    if isinstance(report, ExploreReport):
        lines = [
            f"model: {report.model}",
            f"states: {report.states}",
            f"transitions: {report.transitions}",
            f"initial states: {report.initial_states}",
            f"depth: {report.depth}",
            f"truncated: {'yes (' + report.truncation_reason + ')' if report.truncated else 'no'}",
        ]
    elif isinstance(report, EFReport):
        if report.holds:
            verdict = "holds"
        elif report.inconclusive:
            verdict = "INCONCLUSIVE (model truncated)"
        else:
            verdict = "does not hold"
        lines = [f"EF {report.query}: {verdict}"]
        if report.holds:
            lines.append(f"witness ({len(report.witness)} states):")
            lines.extend(_render_trace(report.witness))
        if report.synthesis is not None:
            lines.append(f"synthesized attack: {report.synthesis}")
        if report.attack is not None:
            lines.extend("  " + line for line in _render_attack(report.attack))
    elif isinstance(report, TraceReport):
        lines = [f"trace to {report.query}:"] + _render_trace(report.witness)
    elif isinstance(report, AttackReport):
        lines = [f"attack {report.attack}: {'valid' if report.valid else 'INVALID'} ({report.leaves} base attacks)"]
        if report.failing_clause:
            lines.append(f"failing clause: {report.failing_clause}")
    elif isinstance(report, ActorsReport):
        lines = []
        for actor in report.actors:
            flags = [flag for flag, on in (("unaware", actor.unaware), ("tipping point", actor.tipping_point)) if on]
            lines.append(
                f"{actor.name} at {actor.location}: {actor.psy}, {{{', '.join(actor.motivations)}}}"
                + (f" [{', '.join(flags)}]" if flags else "")
                + (f" acts as {', '.join(actor.acts_as)}" if actor.acts_as else "")
            )
    else:
        raise TypeError(f"Unknown report type: {type(report).__name__}")
    return "\n".join(lines)


def _render_attack(spec: Dict[str, Any], depth: int = 0) -> List[str]:
    pad = "  " * depth
    if "base" in spec:
        return [f"{pad}base: {_brief(spec['base']['pre'])} => {_brief(spec['base']['post'])}"]
    operator = "and" if "and" in spec else "or"
    lines = [f"{pad}{operator}: {_brief(spec['pre'])} => {_brief(spec['post'])}"]
    for child in spec[operator]:
        lines.extend(_render_attack(child, depth + 1))
    return lines


def _brief(query: Any) -> str:
    if isinstance(query, str):
        return query
    operator, value = next(iter(query.items()))
    if operator in ("and", "or"):
        return f"{operator}({len(value)} terms)"
    if operator == "not":
        return f"not {_brief(value)}"
    return f"{operator}({', '.join(str(v) for v in value.values())})"


def render(report: Report, config: ReportConfig) -> str:
    if config.format == "json":
        return report.model_dump_json(indent=2)
    return render_text(report)
