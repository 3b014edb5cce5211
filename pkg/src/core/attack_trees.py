"""
Attack trees over state queries and their validity calculus.

A base attack ``Base(pre, post)`` claims that every state satisfying ``pre``
reaches one satisfying ``post``. And-attacks chain their children, or-attacks
split ``pre`` among them. Validity is decided over a completely explored
Kripke model; pointwise implication between queries is evaluated on its states.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from src.core.ctl import QueryIndex, check_EF, states_reaching
from src.core.errors import QueryError, TruncatedModelError
from src.core.kripke import KripkeModel
from src.core.model import InfrastructureState, LabeledDatum
from src.core.queries import (
    ActorAt,
    DataAt,
    InitialState,
    QAnd,
    QNot,
    QueryBuilder,
    StateQuery,
    query_to_spec,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Base:
    pre: StateQuery
    post: StateQuery


@dataclass(frozen=True)
class AndAttack:
    """Sequential composition; ``children`` is a nonempty sequence."""

    children: Tuple["AttackTree", ...]
    pre: StateQuery
    post: StateQuery


@dataclass(frozen=True)
class OrAttack:
    """Alternatives; ``children`` is a nonempty collection, order irrelevant."""

    children: Tuple["AttackTree", ...]
    pre: StateQuery
    post: StateQuery


AttackTree = Union[Base, AndAttack, OrAttack]


@dataclass(frozen=True)
class AttackValidity:
    valid: bool
    failing_clause: Optional[str] = None


def _check(index: QueryIndex, t: AttackTree, path: str) -> AttackValidity:
    model = index.model
    if isinstance(t, Base):
        sources = index.satisfying(t.pre)
        if not sources:
            return AttackValidity(False, f"{path}: base pre-condition is satisfied by no state")
        reaching = states_reaching(model, index.satisfying(t.post))
        if not sources <= reaching:
            missing = len(sources - reaching)
            return AttackValidity(False, f"{path}: {missing} pre-state(s) cannot reach the post-condition")
        return AttackValidity(True)

    if not t.children:
        return AttackValidity(False, f"{path}: composite attack has no children")

    for i, child in enumerate(t.children):
        result = _check(index, child, f"{path}.{i}")
        if not result.valid:
            return result

    if isinstance(t, AndAttack):
        if not index.implies(t.pre, t.children[0].pre):
            return AttackValidity(False, f"{path}: pre does not imply the first child's pre")
        for i, (left, right) in enumerate(zip(t.children, t.children[1:])):
            if not index.implies(left.post, right.pre):
                return AttackValidity(False, f"{path}: post of child {i} does not imply pre of child {i + 1}")
        if not index.implies(t.children[-1].post, t.post):
            return AttackValidity(False, f"{path}: post of the last child does not imply post")
        return AttackValidity(True)

    if isinstance(t, OrAttack):
        covered = frozenset().union(*(index.satisfying(child.pre) for child in t.children))
        if not index.satisfying(t.pre) <= covered:
            return AttackValidity(False, f"{path}: pre does not imply the disjunction of the children's pres")
        for i, child in enumerate(t.children):
            if not index.implies(child.post, t.post):
                return AttackValidity(False, f"{path}: post of child {i} does not imply post")
        return AttackValidity(True)

    raise TypeError(f"Not an attack tree: {t!r}")


def _require_complete(model: KripkeModel) -> None:
    if model.truncated:
        raise TruncatedModelError(
            f"Attack-tree validity needs a completely explored model ({model.truncation_reason})"
        )


def check_attack_tree(model: KripkeModel, t: AttackTree, index: Optional[QueryIndex] = None) -> AttackValidity:
    """Validity of ``t`` with the first failing clause on rejection."""
    _require_complete(model)
    result = _check(index or QueryIndex(model), t, "root")
    logger.debug(f"Attack tree {'valid' if result.valid else 'invalid'}: {result.failing_clause or ''}")
    return result


def is_attack_tree(model: KripkeModel, t: AttackTree) -> bool:
    """The validity judgment ``⊢ t`` over ``model``."""
    return check_attack_tree(model, t).valid


def attack_implies_ef(model: KripkeModel, t: AttackTree) -> bool:
    """
    Executable correctness bridge from attack trees to EF.

    A valid tree whose pre-condition holds in all initial states implies
    ``EF post``. Vacuously true otherwise.
    """
    _require_complete(model)
    index = QueryIndex(model)
    if not check_attack_tree(model, t, index).valid:
        return True
    if not model.init <= index.satisfying(t.pre):
        return True
    return check_EF(model, t.post, index).holds


def exact_state_query(model: KripkeModel, state: InfrastructureState) -> StateQuery:
    """
    Query satisfied by ``state`` and no other state of ``model``.

    Pins every actor's location and, for each (location, datum) pair occurring
    anywhere in the model, whether it is present. Dispositions, credentials
    and policy never change along transitions, so this identifies the state.
    """
    atoms: List[StateQuery] = [
        ActorAt(who, state.graph.location_of(who))
        for who in sorted(state.graph.identities)
        if state.graph.location_of(who) is not None
    ]
    universe = set()
    for s in model.order:
        for location, data in s.graph.stores.items():
            for datum in data:
                universe.add((location, datum))
    for location, datum in sorted(universe, key=lambda entry: (entry[0], LabeledDatum.sort_key(entry[1]))):
        atom = DataAt(location, datum.label.owner, datum.content, datum.label.readers)
        atoms.append(atom if datum in state.graph.data_at(location) else QNot(atom))
    return QAnd(tuple(atoms))


def synthesize_base_attack(model: KripkeModel, q: StateQuery) -> Optional[AttackTree]:
    """
    Attack tree following the EF witness for ``q``, or None when EF fails.

    One Base step per witness transition; a one-state witness gives
    ``Base(InitialState, q)``.
    """
    _require_complete(model)
    verdict = check_EF(model, q)
    if not verdict.holds:
        return None
    witness = verdict.witness
    if len(witness) == 1:
        return Base(InitialState(), q)

    names = [exact_state_query(model, s) for s in witness]
    if len(model.init) == 1:
        names[0] = InitialState()
    names[-1] = q
    children = tuple(Base(a, b) for a, b in zip(names, names[1:]))
    return AndAttack(children, names[0], q)


def attack_from_spec(spec: Any, queries: QueryBuilder) -> AttackTree:
    """Build an attack tree from its document form."""
    if not isinstance(spec, Mapping):
        raise QueryError("Attack definitions must be mappings")
    if "base" in spec:
        if set(spec) != {"base"}:
            raise QueryError("'base' attack takes no other keys")
        body = spec["base"]
        if not isinstance(body, Mapping) or set(body) != {"pre", "post"}:
            raise QueryError("'base' needs exactly 'pre' and 'post'")
        return Base(queries.build(body["pre"]), queries.build(body["post"]))
    for operator, cls in (("and", AndAttack), ("or", OrAttack)):
        if operator in spec:
            if set(spec) != {operator, "pre", "post"}:
                raise QueryError(f"'{operator}' attack needs exactly '{operator}', 'pre' and 'post'")
            items = spec[operator]
            if not isinstance(items, (list, tuple)) or not items:
                raise QueryError(f"'{operator}' attack requires a nonempty list of children")
            children = tuple(attack_from_spec(item, queries) for item in items)
            return cls(children, queries.build(spec["pre"]), queries.build(spec["post"]))
    raise QueryError("Attack definitions need one of 'base', 'and', 'or'")


def attack_to_spec(t: AttackTree) -> Dict[str, Any]:
    """Document form of an attack tree."""
    if isinstance(t, Base):
        return {"base": {"pre": query_to_spec(t.pre), "post": query_to_spec(t.post)}}
    operator = "and" if isinstance(t, AndAttack) else "or"
    return {
        operator: [attack_to_spec(child) for child in t.children],
        "pre": query_to_spec(t.pre),
        "post": query_to_spec(t.post),
    }


def leaf_count(t: AttackTree) -> int:
    if isinstance(t, Base):
        return 1
    return sum(leaf_count(child) for child in t.children)
