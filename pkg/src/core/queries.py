"""
State queries: a small declarative predicate language over infrastructure states.

Queries name sets of states intensionally (the initial states, states where a
global policy is violated, where an actor stands somewhere, where a datum is
stored). In model files they are written as single-operator mappings::

    initial
    {actor_at: {identity: Alice, location: instagram}}
    {data_at: {location: instagram, owner: Alice, content: "Alice's_diary"}}
    {policy_violated_by: {identity: Eve, friends: [Alice, Bob], cloud: instagram}}
    {not: q}   {and: [q, ...]}   {or: [q, ...]}

A bare string other than ``initial`` refers to another named query.
"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

from src.core.errors import QueryError
from src.core.model import InfrastructureState
from src.core.resolver import build_resolver
from src.core.semantics import global_policy_holds

if TYPE_CHECKING:
    from src.core.kripke import KripkeModel

logger = logging.getLogger(__name__)

INITIAL = "initial"


@dataclass(frozen=True)
class InitialState:
    pass


@dataclass(frozen=True)
class PolicyViolatedBy:
    identity: str
    friends: FrozenSet[str]
    cloud: str

    def __post_init__(self):
        object.__setattr__(self, "friends", frozenset(self.friends))


@dataclass(frozen=True)
class ActorAt:
    identity: str
    location: str


@dataclass(frozen=True)
class DataAt:
    """Some datum with this owner and content is stored at ``location``.

    With ``readers`` set, the datum's reader set must also match exactly.
    """

    location: str
    owner: str
    content: str
    readers: Optional[FrozenSet[str]] = None

    def __post_init__(self):
        if self.readers is not None:
            object.__setattr__(self, "readers", frozenset(self.readers))


@dataclass(frozen=True)
class QNot:
    operand: "StateQuery"


@dataclass(frozen=True)
class QAnd:
    children: Tuple["StateQuery", ...]


@dataclass(frozen=True)
class QOr:
    children: Tuple["StateQuery", ...]


StateQuery = Union[InitialState, PolicyViolatedBy, ActorAt, DataAt, QNot, QAnd, QOr]


def eval_query(model: "KripkeModel", q: StateQuery, s: InfrastructureState) -> bool:
    """Decide ``q`` at state ``s`` of ``model``."""
    if isinstance(q, InitialState):
        return s in model.init
    if isinstance(q, PolicyViolatedBy):
        r = build_resolver(s, model.declarations)
        return not global_policy_holds(s, r, q.identity, q.friends, q.cloud)
    if isinstance(q, ActorAt):
        return s.graph.location_of(q.identity) == q.location
    if isinstance(q, DataAt):
        return any(
            d.label.owner == q.owner
            and d.content == q.content
            and (q.readers is None or d.label.readers == q.readers)
            for d in s.graph.data_at(q.location)
        )
    if isinstance(q, QNot):
        return not eval_query(model, q.operand, s)
    if isinstance(q, QAnd):
        return all(eval_query(model, child, s) for child in q.children)
    if isinstance(q, QOr):
        return any(eval_query(model, child, s) for child in q.children)
    raise TypeError(f"Not a state query: {q!r}")


@dataclass(frozen=True)
class QueryDefaults:
    """Model-level defaults for ``policy_violated_by`` atoms."""

    friends: FrozenSet[str] = frozenset()
    cloud: Optional[str] = None


def _fields(value: Any, operator: str, required: Iterable[str], optional: Iterable[str] = ()) -> Dict[str, Any]:
    if not isinstance(value, Mapping):
        raise QueryError(f"'{operator}' expects a mapping, got {type(value).__name__}")
    allowed = set(required) | set(optional)
    unknown = sorted(set(value) - allowed)
    if unknown:
        raise QueryError(f"Unknown field(s) {unknown} in '{operator}'")
    missing = [name for name in required if name not in value]
    if missing:
        raise QueryError(f"Missing field(s) {missing} in '{operator}'")
    return dict(value)


def _text(value: Any, what: str) -> str:
    if not isinstance(value, str) or not value:
        raise QueryError(f"{what} must be a nonempty string")
    return value


def _names(value: Any, what: str) -> FrozenSet[str]:
    if not isinstance(value, (list, tuple)):
        raise QueryError(f"{what} must be a list of names")
    return frozenset(_text(item, what) for item in value)


class QueryBuilder:
    """Builds query ASTs from their document form, resolving named references."""

    MAX_DEPTH = 32

    def __init__(self, named: Mapping[str, Any], defaults: QueryDefaults = QueryDefaults()):
        self.named = dict(named)
        self.defaults = defaults
        self._resolved: Dict[str, StateQuery] = {}
        self._resolving: List[str] = []

    def resolve(self, name: str) -> StateQuery:
        """Resolve a named query (or ``initial``)."""
        if name == INITIAL:
            return InitialState()
        if name in self._resolved:
            return self._resolved[name]
        if name not in self.named:
            raise QueryError(f"Unknown query '{name}'")
        if name in self._resolving:
            cycle = " -> ".join(self._resolving + [name])
            raise QueryError(f"Query reference cycle: {cycle}")
        self._resolving.append(name)
        try:
            query = self.build(self.named[name])
        finally:
            self._resolving.pop()
        self._resolved[name] = query
        return query

    def build(self, spec: Any, depth: int = 0) -> StateQuery:
        """Build a query from its document form."""
        if depth > self.MAX_DEPTH:
            raise QueryError(f"Query nesting exceeds maximum depth ({self.MAX_DEPTH})")
        if isinstance(spec, str):
            return self.resolve(spec)
        if not isinstance(spec, Mapping) or len(spec) != 1:
            raise QueryError("Each query object must have exactly one key (the operator)")

        operator, value = next(iter(spec.items()))
        if operator == "not":
            return QNot(self.build(value, depth + 1))
        if operator in ("and", "or"):
            if not isinstance(value, (list, tuple)) or not value:
                raise QueryError(f"'{operator}' requires a nonempty list of queries")
            children = tuple(self.build(item, depth + 1) for item in value)
            return QAnd(children) if operator == "and" else QOr(children)
        if operator == "actor_at":
            fields = _fields(value, operator, ["identity", "location"])
            return ActorAt(_text(fields["identity"], "identity"), _text(fields["location"], "location"))
        if operator == "data_at":
            fields = _fields(value, operator, ["location", "owner", "content"], ["readers"])
            readers = _names(fields["readers"], "readers") if "readers" in fields else None
            return DataAt(
                _text(fields["location"], "location"),
                _text(fields["owner"], "owner"),
                _text(fields["content"], "content"),
                readers,
            )
        if operator == "policy_violated_by":
            fields = _fields(value, operator, ["identity"], ["friends", "cloud"])
            friends = _names(fields["friends"], "friends") if "friends" in fields else self.defaults.friends
            cloud = fields.get("cloud", self.defaults.cloud)
            if cloud is None:
                raise QueryError("'policy_violated_by' needs a cloud location (none given and no model default)")
            return PolicyViolatedBy(_text(fields["identity"], "identity"), friends, _text(cloud, "cloud"))
        raise QueryError(f"Unknown query operator '{operator}'")


def query_to_spec(q: StateQuery) -> Any:
    """Document form of a query (inverse of ``QueryBuilder.build`` without references)."""
    if isinstance(q, InitialState):
        return INITIAL
    if isinstance(q, PolicyViolatedBy):
        return {"policy_violated_by": {"identity": q.identity, "friends": sorted(q.friends), "cloud": q.cloud}}
    if isinstance(q, ActorAt):
        return {"actor_at": {"identity": q.identity, "location": q.location}}
    if isinstance(q, DataAt):
        fields: Dict[str, Any] = {"location": q.location, "owner": q.owner, "content": q.content}
        if q.readers is not None:
            fields["readers"] = sorted(q.readers)
        return {"data_at": fields}
    if isinstance(q, QNot):
        return {"not": query_to_spec(q.operand)}
    if isinstance(q, QAnd):
        return {"and": [query_to_spec(child) for child in q.children]}
    if isinstance(q, QOr):
        return {"or": [query_to_spec(child) for child in q.children]}
    raise TypeError(f"Not a state query: {q!r}")


def walk_atoms(q: StateQuery, visit: Callable[[StateQuery], None]) -> None:
    """Call ``visit`` on every atom of ``q``."""
    if isinstance(q, QNot):
        walk_atoms(q.operand, visit)
    elif isinstance(q, (QAnd, QOr)):
        for child in q.children:
            walk_atoms(child, visit)
    else:
        visit(q)
