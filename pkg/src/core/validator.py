"""
Validator module for comprehensive validation of model declarations.

Checks every cross-reference and invariant of a parsed model document and
builds the initial infrastructure state, insider declarations, postable items
and the named queries and attacks.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Set, Tuple

from src.core.attack_trees import AttackTree, attack_from_spec
from src.core.conditions import condition_depth, parse_condition, referenced_credentials, referenced_identities
from src.core.errors import Diagnostic, Loc, QueryError
from src.core.model import (
    ActorState,
    AtomicPolicy,
    DlmLabel,
    InfrastructureGraph,
    InfrastructureState,
    InsiderDeclaration,
    LabeledDatum,
    LocalPolicy,
    PostableItem,
)
from src.core.queries import (
    INITIAL,
    ActorAt,
    DataAt,
    PolicyViolatedBy,
    QueryBuilder,
    QueryDefaults,
    StateQuery,
    walk_atoms,
)
from src.core.schema import ModelFile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ValidatedModel:
    """Everything needed to explore and check a model."""

    initial: InfrastructureState
    declarations: FrozenSet[InsiderDeclaration]
    postables: FrozenSet[PostableItem]
    friends: FrozenSet[str] = frozenset()
    cloud: Optional[str] = None
    queries: Mapping[str, StateQuery] = field(default_factory=dict)
    attacks: Mapping[str, AttackTree] = field(default_factory=dict)
    name: Optional[str] = None


class ModelValidator:
    """Comprehensive validator for model declarations."""

    def __init__(self, config: dict = None):
        """Initialize model validator."""
        self.config = config or {}
        self.max_condition_depth = self.config.get("max_condition_depth", 16)

    def validate_complete(self, doc: ModelFile) -> Tuple[Optional[ValidatedModel], List[Diagnostic]]:
        """
        Perform complete validation of a model document.

        Returns:
            (validated model or None, list of diagnostics)
        """
        errors: List[Diagnostic] = []
        locations = set(doc.locations)
        identities = {actor.name for actor in doc.actors}
        credentials = {credential for actor in doc.actors for credential in actor.credentials}

        errors.extend(self._validate_locations(doc))
        errors.extend(self._validate_edges(doc, locations))
        errors.extend(self._validate_actors(doc, locations))
        errors.extend(self._validate_policies(doc, locations, identities, credentials))
        errors.extend(self._validate_insiders(doc, identities))
        errors.extend(self._validate_postables(doc, locations, identities))
        errors.extend(self._validate_data(doc, locations, identities))
        errors.extend(self._validate_friends(doc, locations, identities))

        if errors:
            return None, errors

        initial = self._build_state(doc)
        declarations = frozenset(InsiderDeclaration(d.subject, frozenset(d.alters)) for d in doc.insiders)
        postables = frozenset(
            PostableItem(p.poster, LabeledDatum(DlmLabel(p.poster, frozenset(p.readers)), p.content), p.at)
            for p in doc.postables
        )

        defaults = QueryDefaults(frozenset(doc.friends), doc.cloud)
        builder = QueryBuilder(doc.queries, defaults)
        queries, query_errors = self._build_queries(doc, builder, locations, identities)
        attacks, attack_errors = self._build_attacks(doc, builder, locations, identities)
        errors.extend(query_errors)
        errors.extend(attack_errors)
        if errors:
            return None, errors

        logger.info(
            f"Model valid: {len(locations)} locations, {len(doc.edges)} edges, {len(identities)} actors, "
            f"{len(postables)} postables, {len(queries)} queries, {len(attacks)} attacks"
        )
        return (
            ValidatedModel(
                initial=initial,
                declarations=declarations,
                postables=postables,
                friends=frozenset(doc.friends),
                cloud=doc.cloud,
                queries=queries,
                attacks=attacks,
                name=doc.name,
            ),
            [],
        )

    def _validate_locations(self, doc: ModelFile) -> List[Diagnostic]:
        errors = []
        seen: Set[str] = set()
        for i, location in enumerate(doc.locations):
            if not location:
                errors.append(Diagnostic(("locations", i), "location name must be nonempty"))
            elif location in seen:
                errors.append(Diagnostic(("locations", i), f"duplicate declaration of location '{location}'"))
            seen.add(location)
        return errors

    def _validate_edges(self, doc: ModelFile, locations: Set[str]) -> List[Diagnostic]:
        errors = []
        for i, edge in enumerate(doc.edges):
            for j, endpoint in enumerate(edge):
                if endpoint not in locations:
                    errors.append(Diagnostic(("edges", i, j), f"unknown location '{endpoint}'"))
        return errors

    def _validate_actors(self, doc: ModelFile, locations: Set[str]) -> List[Diagnostic]:
        errors = []
        placed: Dict[str, List[Tuple[int, str]]] = defaultdict(list)
        for i, actor in enumerate(doc.actors):
            if actor.location not in locations:
                errors.append(Diagnostic(("actors", i, "location"), f"unknown location '{actor.location}'"))
            placed[actor.name].append((i, actor.location))
        for name, entries in placed.items():
            if len(entries) < 2:
                continue
            where = sorted({location for _, location in entries})
            message = (
                f"identity placed at multiple locations: '{name}' at {', '.join(where)}"
                if len(where) > 1
                else f"duplicate declaration of identity '{name}'"
            )
            for i, _ in entries[1:]:
                errors.append(Diagnostic(("actors", i, "name"), message))
        return errors

    def _validate_policies(
        self, doc: ModelFile, locations: Set[str], identities: Set[str], credentials: Set[str]
    ) -> List[Diagnostic]:
        errors = []
        for location, rules in doc.policies.items():
            if location not in locations:
                errors.append(Diagnostic(("policies", location), f"policy for unknown location '{location}'"))
            for i, rule in enumerate(rules):
                loc: Loc = ("policies", location, i, "condition")
                condition = parse_condition(rule.condition)
                if condition_depth(condition) > self.max_condition_depth:
                    errors.append(Diagnostic(loc, f"condition nesting exceeds maximum ({self.max_condition_depth})"))
                for name in sorted(referenced_identities(condition) - identities):
                    errors.append(Diagnostic(loc, f"unknown identity '{name}'"))
                for credential in sorted(referenced_credentials(condition) - credentials):
                    errors.append(Diagnostic(loc, f"unknown credential '{credential}' (held by no actor)"))
        return errors

    def _validate_insiders(self, doc: ModelFile, identities: Set[str]) -> List[Diagnostic]:
        errors = []
        for i, decl in enumerate(doc.insiders):
            if decl.subject not in identities:
                errors.append(Diagnostic(("insiders", i, "subject"), f"unknown identity '{decl.subject}'"))
            for j, alter in enumerate(decl.alters):
                if alter not in identities:
                    errors.append(Diagnostic(("insiders", i, "alters", j), f"unknown identity '{alter}'"))
                if alter == decl.subject:
                    errors.append(Diagnostic(("insiders", i, "alters", j), "an insider cannot be its own alter"))
        return errors

    def _validate_postables(self, doc: ModelFile, locations: Set[str], identities: Set[str]) -> List[Diagnostic]:
        errors = []
        for i, item in enumerate(doc.postables):
            if item.poster not in identities:
                errors.append(Diagnostic(("postables", i, "poster"), f"unknown identity '{item.poster}'"))
            if item.at not in locations:
                errors.append(Diagnostic(("postables", i, "at"), f"unknown location '{item.at}'"))
            for j, reader in enumerate(item.readers):
                if reader not in identities:
                    errors.append(Diagnostic(("postables", i, "readers", j), f"unknown identity '{reader}'"))
        return errors

    def _validate_data(self, doc: ModelFile, locations: Set[str], identities: Set[str]) -> List[Diagnostic]:
        errors = []
        for i, datum in enumerate(doc.data):
            if datum.location not in locations:
                errors.append(Diagnostic(("data", i, "location"), f"unknown location '{datum.location}'"))
            if datum.owner not in identities:
                errors.append(Diagnostic(("data", i, "owner"), f"unknown identity '{datum.owner}'"))
            for j, reader in enumerate(datum.readers):
                if reader not in identities:
                    errors.append(Diagnostic(("data", i, "readers", j), f"unknown identity '{reader}'"))
        return errors

    def _validate_friends(self, doc: ModelFile, locations: Set[str], identities: Set[str]) -> List[Diagnostic]:
        errors = []
        for i, friend in enumerate(doc.friends):
            if friend not in identities:
                errors.append(Diagnostic(("friends", i), f"unknown identity '{friend}'"))
        if doc.cloud is not None and doc.cloud not in locations:
            errors.append(Diagnostic(("cloud",), f"unknown location '{doc.cloud}'"))
        return errors

    def _check_references(self, query: StateQuery, locations: Set[str], identities: Set[str]) -> List[str]:
        problems: List[str] = []

        def visit(atom: Any) -> None:
            names: List[str] = []
            places: List[str] = []
            if isinstance(atom, ActorAt):
                names, places = [atom.identity], [atom.location]
            elif isinstance(atom, DataAt):
                names = [atom.owner] + sorted(atom.readers or ())
                places = [atom.location]
            elif isinstance(atom, PolicyViolatedBy):
                names = [atom.identity] + sorted(atom.friends)
                places = [atom.cloud]
            problems.extend(f"unknown identity '{n}'" for n in names if n not in identities)
            problems.extend(f"unknown location '{p}'" for p in places if p not in locations)

        walk_atoms(query, visit)
        return problems

    def _build_queries(
        self, doc: ModelFile, builder: QueryBuilder, locations: Set[str], identities: Set[str]
    ) -> Tuple[Dict[str, StateQuery], List[Diagnostic]]:
        queries: Dict[str, StateQuery] = {}
        errors = []
        for name in doc.queries:
            if name == INITIAL:
                errors.append(Diagnostic(("queries", name), f"'{INITIAL}' is a reserved query name"))
                continue
            try:
                query = builder.resolve(name)
            except QueryError as e:
                errors.append(Diagnostic(("queries", name), str(e)))
                continue
            problems = self._check_references(query, locations, identities)
            errors.extend(Diagnostic(("queries", name), problem) for problem in problems)
            if not problems:
                queries[name] = query
        return queries, errors

    def _attack_queries(self, t: AttackTree) -> List[StateQuery]:
        queries = [t.pre, t.post]
        for child in getattr(t, "children", ()):
            queries.extend(self._attack_queries(child))
        return queries

    def _build_attacks(
        self, doc: ModelFile, builder: QueryBuilder, locations: Set[str], identities: Set[str]
    ) -> Tuple[Dict[str, AttackTree], List[Diagnostic]]:
        attacks: Dict[str, AttackTree] = {}
        errors = []
        for name, spec in doc.attacks.items():
            try:
                tree = attack_from_spec(spec, builder)
            except QueryError as e:
                errors.append(Diagnostic(("attacks", name), str(e)))
                continue
            problems = sorted(
                {p for q in self._attack_queries(tree) for p in self._check_references(q, locations, identities)}
            )
            errors.extend(Diagnostic(("attacks", name), problem) for problem in problems)
            if not problems:
                attacks[name] = tree
        return attacks, errors

    def _build_state(self, doc: ModelFile) -> InfrastructureState:
        placement: Dict[str, Set[str]] = defaultdict(set)
        credentials: Dict[str, FrozenSet[str]] = {}
        roles: Dict[str, FrozenSet[str]] = {}
        dispositions: Dict[str, ActorState] = {}
        for actor in doc.actors:
            placement[actor.location].add(actor.name)
            credentials[actor.name] = frozenset(actor.credentials)
            roles[actor.name] = frozenset(actor.roles)
            dispositions[actor.name] = ActorState(actor.psy, frozenset(actor.motivations))

        stores: Dict[str, Set[LabeledDatum]] = defaultdict(set)
        for datum in doc.data:
            stores[datum.location].add(LabeledDatum(DlmLabel(datum.owner, frozenset(datum.readers)), datum.content))

        rules: Dict[str, Set[AtomicPolicy]] = defaultdict(set)
        for location, declared in doc.policies.items():
            for rule in declared:
                rules[location].add(AtomicPolicy(parse_condition(rule.condition), frozenset(rule.actions)))

        graph = InfrastructureGraph(
            locations=frozenset(doc.locations),
            edges=frozenset(tuple(edge) for edge in doc.edges),
            placement=placement,
            credentials=credentials,
            roles=roles,
            dispositions=dispositions,
            stores=stores,
        )
        return InfrastructureState(graph, LocalPolicy(rules))


def validate_model(doc: ModelFile, config: dict = None) -> Tuple[Optional[ValidatedModel], List[Diagnostic]]:
    """
    Convenience function to validate a model document completely.

    Returns:
        (validated model or None, list of diagnostics)
    """
    validator = ModelValidator(config)
    return validator.validate_complete(doc)
