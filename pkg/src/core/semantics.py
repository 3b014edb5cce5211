"""
Transition semantics of the infrastructure model.

Policy evaluation (``enables``), the global policy, and the put / get / move
rules that generate successor states. The eval action may be granted by
policies but has no rule, so it never produces a transition.
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from src.core.conditions import ActorIn, AlwaysTrue, And, HasCredential, Not, Or, PolicyCondition
from src.core.model import (
    ActionKind,
    InfrastructureState,
    InsiderDeclaration,
    LabeledDatum,
    PostableItem,
    unaware,
)
from src.core.resolver import ActorResolver, actor_eq, build_resolver

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RuleApplication:
    """One instance of a transition rule, used to label transitions."""

    action: ActionKind
    actor: str
    location: str
    source: Optional[str] = None
    datum: Optional[LabeledDatum] = None

    def sort_key(self) -> Tuple:
        datum_key = self.datum.sort_key() if self.datum else ()
        return self.action.value, self.actor, self.location, self.source or "", datum_key

    def describe(self) -> str:
        if self.action == ActionKind.MOVE:
            return f"{self.actor} moves from {self.source} to {self.location}"
        if self.action == ActionKind.PUT:
            return f"{self.actor} puts {self.datum.content} at {self.location}"
        return f"{self.actor} gets {self.datum.content} from {self.source} to {self.location}"


def eval_condition(state: InfrastructureState, r: ActorResolver, c: PolicyCondition, who: str) -> bool:
    """Evaluate an atomic-policy condition for identity ``who``."""
    if isinstance(c, AlwaysTrue):
        return True
    if isinstance(c, HasCredential):
        return c.credential in state.graph.credentials_of(who)
    if isinstance(c, ActorIn):
        return any(actor_eq(r, who, s) for s in c.identities)
    if isinstance(c, Not):
        return not eval_condition(state, r, c.operand, who)
    if isinstance(c, And):
        return eval_condition(state, r, c.left, who) and eval_condition(state, r, c.right, who)
    if isinstance(c, Or):
        return eval_condition(state, r, c.left, who) or eval_condition(state, r, c.right, who)
    raise TypeError(f"Not a policy condition: {c!r}")


def enables(state: InfrastructureState, r: ActorResolver, l: str, who: str, act: ActionKind) -> bool:
    """Some atomic policy at ``l`` grants ``act`` and its condition holds for ``who``."""
    return any(
        act in policy.actions and eval_condition(state, r, policy.condition, who)
        for policy in state.policy.at(l)
    )


def global_policy_holds(
    state: InfrastructureState, r: ActorResolver, a: str, friends: Iterable[str], cloud: str
) -> bool:
    """Only the owner's friends may get data at the cloud location."""
    return a in set(friends) or not enables(state, r, cloud, a, ActionKind.GET)


def step_put(state: InfrastructureState, r: ActorResolver, item: PostableItem) -> Optional[InfrastructureState]:
    """Put rule: an unaware, enabled poster adds its datum at its own location."""
    graph = state.graph
    if graph.location_of(item.poster) != item.at:
        return None
    if not enables(state, r, item.at, item.poster, ActionKind.PUT):
        return None
    disposition = graph.disposition_of(item.poster)
    if disposition is None or not unaware(disposition):
        return None
    stores = dict(graph.stores)
    stores[item.at] = graph.data_at(item.at) | {item.datum}
    return state.with_stores(stores)


def step_get(
    state: InfrastructureState, r: ActorResolver, who: str, source: str, datum: LabeledDatum
) -> Optional[InfrastructureState]:
    """Get rule: copy a readable datum from ``source`` to where ``who`` stands."""
    graph = state.graph
    here = graph.location_of(who)
    if here is None:
        return None
    if not enables(state, r, source, who, ActionKind.GET):
        return None
    if datum not in graph.data_at(source):
        return None
    label = datum.label
    if not (any(actor_eq(r, who, reader) for reader in label.readers) or actor_eq(r, who, label.owner)):
        return None
    stores = dict(graph.stores)
    stores[here] = graph.data_at(here) | {datum}
    return state.with_stores(stores)


def step_move(state: InfrastructureState, r: ActorResolver, who: str, to: str) -> Optional[InfrastructureState]:
    """Move rule: along an edge (either direction) into a location that enables move."""
    graph = state.graph
    here = graph.location_of(who)
    if here is None or here == to:
        return None
    if not graph.adjacent(here, to):
        return None
    if not enables(state, r, to, who, ActionKind.MOVE):
        return None
    placement = dict(graph.placement)
    placement[here] = graph.actors_at(here) - {who}
    placement[to] = graph.actors_at(to) | {who}
    return state.with_placement(placement)


def labeled_successors(
    state: InfrastructureState,
    decls: Iterable[InsiderDeclaration],
    postables: Iterable[PostableItem],
) -> List[Tuple[InfrastructureState, Tuple[RuleApplication, ...]]]:
    """
    Successor states with the rule instances producing each one.

    Ordered by canonical state order; states equal to ``state`` are dropped.
    """
    r = build_resolver(state, decls)
    graph = state.graph
    found: Dict[InfrastructureState, Set[RuleApplication]] = {}

    def record(successor: Optional[InfrastructureState], application: RuleApplication) -> None:
        if successor is None or successor == state:
            return
        found.setdefault(successor, set()).add(application)

    identities = sorted(graph.identities)
    locations = sorted(graph.locations)
    for who in identities:
        here = graph.location_of(who)
        for to in locations:
            record(step_move(state, r, who, to), RuleApplication(ActionKind.MOVE, who, to, source=here))
    for item in sorted(postables, key=PostableItem.sort_key):
        record(step_put(state, r, item), RuleApplication(ActionKind.PUT, item.poster, item.at, datum=item.datum))
    for who in identities:
        here = graph.location_of(who)
        for source in locations:
            for datum in sorted(graph.data_at(source), key=LabeledDatum.sort_key):
                record(
                    step_get(state, r, who, source, datum),
                    RuleApplication(ActionKind.GET, who, here, source=source, datum=datum),
                )

    ordered = sorted(found.items(), key=lambda entry: entry[0].sort_key())
    return [(successor, tuple(sorted(apps, key=RuleApplication.sort_key))) for successor, apps in ordered]


def successors(
    state: InfrastructureState,
    decls: Iterable[InsiderDeclaration],
    postables: Iterable[PostableItem],
) -> FrozenSet[InfrastructureState]:
    """All states reachable by one rule application."""
    return frozenset(successor for successor, _ in labeled_successors(state, decls, postables))
