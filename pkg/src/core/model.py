"""
Domain types of the infrastructure model.

An infrastructure state is a location graph with actors, credentials,
dispositions and labeled data stores attached, plus the local policy of each
location. All values are immutable; states compare and hash structurally over
a canonical form so the state space can be deduplicated.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from types import MappingProxyType
from typing import Any, Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

from src.core.conditions import PolicyCondition, render_condition

logger = logging.getLogger(__name__)


class ActionKind(str, Enum):
    GET = "get"
    MOVE = "move"
    EVAL = "eval"
    PUT = "put"


class PsyState(str, Enum):
    HAPPY = "happy"
    SUSPICIOUS = "suspicious"
    DEPRESSED = "depressed"
    DISGRUNTLED = "disgruntled"
    ANGRY = "angry"
    STRESSED = "stressed"


class Motivation(str, Enum):
    APPROVAL_HUNGRY = "approval_hungry"
    ZEN = "zen"
    FINANCIAL = "financial"
    POLITICAL = "political"
    REVENGE = "revenge"
    FUN = "fun"
    COMPETITIVE_ADVANTAGE = "competitive_advantage"
    POWER = "power"
    PEER_RECOGNITION = "peer_recognition"


@dataclass(frozen=True)
class ActorState:
    """Psychological state and motivations of one identity."""

    psy: PsyState
    motivations: FrozenSet[Motivation] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "motivations", frozenset(self.motivations))

    def sort_key(self) -> Tuple[str, Tuple[str, ...]]:
        return self.psy.value, tuple(sorted(m.value for m in self.motivations))


_APPROVAL_ONLY = frozenset({Motivation.APPROVAL_HUNGRY})


def unaware(a: ActorState) -> bool:
    """Happy and motivated solely by approval: the unintentional insider disposition."""
    return a.motivations == _APPROVAL_ONLY and a.psy == PsyState.HAPPY


def tipping_point(a: ActorState) -> bool:
    """Some motivation other than bare approval seeking, and not happy."""
    return bool(a.motivations) and a.motivations != _APPROVAL_ONLY and a.psy != PsyState.HAPPY


@dataclass(frozen=True)
class DlmLabel:
    """Decentralized label: one owner and the identities allowed to read."""

    owner: str
    readers: FrozenSet[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "readers", frozenset(self.readers))


@dataclass(frozen=True)
class LabeledDatum:
    label: DlmLabel
    content: str

    def sort_key(self) -> Tuple[str, str, Tuple[str, ...]]:
        return self.content, self.label.owner, tuple(sorted(self.label.readers))

    def describe(self) -> str:
        readers = ", ".join(sorted(self.label.readers)) or "-"
        return f"{self.content} (owner {self.label.owner}; readers {readers})"


@dataclass(frozen=True)
class AtomicPolicy:
    """A (condition, action set) pair granted at a location."""

    condition: PolicyCondition
    actions: FrozenSet[ActionKind]

    def __post_init__(self):
        object.__setattr__(self, "actions", frozenset(self.actions))

    def sort_key(self) -> Tuple[str, Tuple[str, ...]]:
        return render_condition(self.condition), tuple(sorted(a.value for a in self.actions))


def _freeze_mapping(mapping: Mapping[str, Iterable[Any]]) -> Mapping[str, FrozenSet[Any]]:
    frozen = {key: frozenset(values) for key, values in mapping.items()}
    return MappingProxyType({key: values for key, values in sorted(frozen.items()) if values})


@dataclass(frozen=True, eq=False)
class LocalPolicy:
    """Location -> atomic policies; unlisted locations grant nothing."""

    rules: Mapping[str, FrozenSet[AtomicPolicy]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "rules", _freeze_mapping(self.rules))
        key = tuple(
            (location, tuple(sorted((p.sort_key() for p in policies))))
            for location, policies in self.rules.items()
        )
        object.__setattr__(self, "_key", key)

    def at(self, location: str) -> FrozenSet[AtomicPolicy]:
        return self.rules.get(location, frozenset())

    def canonical_key(self) -> Tuple:
        return self._key

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LocalPolicy):
            return NotImplemented
        return self is other or self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)


@dataclass(frozen=True, eq=False)
class InfrastructureGraph:
    """
    Location graph with actors and data attached.

    Empty placement and store entries are dropped on construction so
    ``{l: {}}`` and a missing ``l`` are the same graph.
    """

    locations: FrozenSet[str]
    edges: FrozenSet[Tuple[str, str]]
    placement: Mapping[str, FrozenSet[str]]
    credentials: Mapping[str, FrozenSet[str]]
    roles: Mapping[str, FrozenSet[str]]
    dispositions: Mapping[str, ActorState]
    stores: Mapping[str, FrozenSet[LabeledDatum]]

    def __post_init__(self):
        object.__setattr__(self, "locations", frozenset(self.locations))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        object.__setattr__(self, "placement", _freeze_mapping(self.placement))
        object.__setattr__(self, "credentials", _freeze_mapping(self.credentials))
        object.__setattr__(self, "roles", _freeze_mapping(self.roles))
        object.__setattr__(self, "dispositions", MappingProxyType(dict(sorted(self.dispositions.items()))))
        object.__setattr__(self, "stores", _freeze_mapping(self.stores))

        where: Dict[str, str] = {}
        for location, identities in self.placement.items():
            for identity in identities:
                where.setdefault(identity, location)
        object.__setattr__(self, "_where", MappingProxyType(where))
        object.__setattr__(self, "_key", self._canonical())

    def _canonical(self) -> Tuple:
        return (
            tuple(sorted(self.locations)),
            tuple(sorted(self.edges)),
            tuple((loc, tuple(sorted(ids))) for loc, ids in self.placement.items()),
            tuple((who, tuple(sorted(creds))) for who, creds in self.credentials.items()),
            tuple((who, tuple(sorted(rs))) for who, rs in self.roles.items()),
            tuple((who, state.sort_key()) for who, state in self.dispositions.items()),
            tuple((loc, tuple(sorted(d.sort_key() for d in data))) for loc, data in self.stores.items()),
        )

    @property
    def identities(self) -> FrozenSet[str]:
        return frozenset(self.dispositions)

    def location_of(self, identity: str) -> Optional[str]:
        return self._where.get(identity)

    def actors_at(self, location: str) -> FrozenSet[str]:
        return self.placement.get(location, frozenset())

    def credentials_of(self, identity: str) -> FrozenSet[str]:
        return self.credentials.get(identity, frozenset())

    def disposition_of(self, identity: str) -> Optional[ActorState]:
        return self.dispositions.get(identity)

    def data_at(self, location: str) -> FrozenSet[LabeledDatum]:
        return self.stores.get(location, frozenset())

    def adjacent(self, a: str, b: str) -> bool:
        """Edges are traversed in both directions."""
        return (a, b) in self.edges or (b, a) in self.edges

    def canonical_key(self) -> Tuple:
        return self._key

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InfrastructureGraph):
            return NotImplemented
        return self is other or self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)


@dataclass(frozen=True, eq=False)
class InfrastructureState:
    """A graph snapshot plus the policy that is carried unchanged across transitions."""

    graph: InfrastructureGraph
    policy: LocalPolicy

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.graph, self.policy)))

    def with_placement(self, placement: Mapping[str, Iterable[str]]) -> "InfrastructureState":
        return InfrastructureState(replace(self.graph, placement=placement), self.policy)

    def with_stores(self, stores: Mapping[str, Iterable[LabeledDatum]]) -> "InfrastructureState":
        return InfrastructureState(replace(self.graph, stores=stores), self.policy)

    def sort_key(self) -> Tuple:
        """Total order used wherever states must be picked deterministically."""
        return self.graph.canonical_key(), self.policy.canonical_key()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InfrastructureState):
            return NotImplemented
        if self is other:
            return True
        return self._hash == other._hash and self.graph == other.graph and self.policy == other.policy

    def __hash__(self) -> int:
        return self._hash


@dataclass(frozen=True)
class InsiderDeclaration:
    """Subject ``subject`` may act as each of ``alters`` once its trigger fires."""

    subject: str
    alters: FrozenSet[str]

    def __post_init__(self):
        object.__setattr__(self, "alters", frozenset(self.alters))

    def sort_key(self) -> Tuple[str, Tuple[str, ...]]:
        return self.subject, tuple(sorted(self.alters))


@dataclass(frozen=True)
class PostableItem:
    """A datum ``poster`` may put at ``at``; the poster always owns it."""

    poster: str
    datum: LabeledDatum
    at: str

    def sort_key(self) -> Tuple:
        return self.poster, self.at, self.datum.sort_key()
