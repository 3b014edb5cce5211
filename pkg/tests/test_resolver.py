"""Tests for the actor resolver (insider role merging)."""

import pytest

from src.core.model import (
    ActorState,
    InfrastructureGraph,
    InfrastructureState,
    InsiderDeclaration,
    LocalPolicy,
    Motivation,
    PsyState,
)
from src.core.resolver import ActorResolver, UnionFind, actor_eq, build_resolver

UNAWARE = ActorState(PsyState.HAPPY, {Motivation.APPROVAL_HUNGRY})
CALM = ActorState(PsyState.HAPPY, {Motivation.ZEN})
MALICIOUS = ActorState(PsyState.DEPRESSED, {Motivation.REVENGE})


def _state(**dispositions):
    graph = InfrastructureGraph(
        locations={"home"},
        edges=set(),
        placement={"home": set(dispositions)},
        credentials={},
        roles={},
        dispositions=dispositions,
        stores={},
    )
    return InfrastructureState(graph, LocalPolicy({}))


@pytest.mark.unit
class TestUnionFind:
    """Tests for the union-find structure."""

    def test_initially_discrete(self):
        """Test every name starts in its own class."""
        uf = UnionFind(["a", "b", "c"])
        assert uf.classes() == {frozenset({"a"}), frozenset({"b"}), frozenset({"c"})}

    def test_union_is_transitive(self):
        """Test chained unions merge all classes."""
        uf = UnionFind(["a", "b", "c", "d"])
        uf.union("a", "b")
        uf.union("c", "b")
        assert uf.find("a") == uf.find("c")
        assert uf.find("d") != uf.find("a")
        assert frozenset({"a", "b", "c"}) in uf.classes()


@pytest.mark.unit
class TestBuildResolver:
    """Tests for build_resolver and actor_eq."""

    def test_unaware_subject_merges(self):
        """Test an unaware subject shares its class with its alters."""
        state = _state(Alice=UNAWARE, Bob=CALM, Eve=CALM)
        r = build_resolver(state, {InsiderDeclaration("Alice", {"Eve"})})
        assert r.class_of("Alice") == {"Alice", "Eve"}
        assert r.class_of("Bob") == {"Bob"}
        assert actor_eq(r, "Eve", "Alice")
        assert r.merged_classes() == (("Alice", "Eve"),)

    def test_no_declarations_is_discrete(self):
        """Test the injective default."""
        state = _state(Alice=UNAWARE, Bob=CALM)
        r = build_resolver(state, set())
        assert r == ActorResolver.discrete(["Alice", "Bob"])
        assert not actor_eq(r, "Alice", "Bob")
        assert actor_eq(r, "Alice", "Alice")

    def test_malicious_subject_merges(self):
        """Test a subject at its tipping point acts as its alter ego."""
        state = _state(Eve=MALICIOUS, Charlie=CALM)
        r = build_resolver(state, {InsiderDeclaration("Eve", {"Charlie"})})
        assert r.class_of("Charlie") == {"Eve", "Charlie"}

    def test_declaration_without_trigger(self):
        """Test a calm subject keeps its own role."""
        state = _state(Alice=CALM, Eve=CALM)
        r = build_resolver(state, {InsiderDeclaration("Alice", {"Eve"})})
        assert not actor_eq(r, "Alice", "Eve")

    def test_awareness_prevents_merge(self):
        """Test a suspicious subject no longer triggers the insider rule."""
        state = _state(Alice=ActorState(PsyState.SUSPICIOUS, {Motivation.APPROVAL_HUNGRY}), Eve=CALM)
        r = build_resolver(state, {InsiderDeclaration("Alice", {"Eve"})})
        assert r.merged_classes() == ()

    def test_classes_form_partition(self):
        """Test overlapping declarations still give a partition."""
        state = _state(A=UNAWARE, B=MALICIOUS, C=CALM, D=CALM, E=CALM)
        decls = {InsiderDeclaration("A", {"C"}), InsiderDeclaration("B", {"C", "D"})}
        r = build_resolver(state, decls)
        members = [name for group in r.classes for name in group]
        assert sorted(members) == ["A", "B", "C", "D", "E"]
        assert r.class_of("A") == {"A", "B", "C", "D"}
        assert actor_eq(r, "A", "D") and actor_eq(r, "D", "A")

    def test_deterministic(self):
        """Test repeated builds agree."""
        state = _state(Alice=UNAWARE, Eve=CALM)
        decls = {InsiderDeclaration("Alice", {"Eve"})}
        assert build_resolver(state, decls) == build_resolver(state, decls)
