"""Property tests over randomly generated models."""

from collections import deque

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from src.core.attack_trees import AndAttack, Base, OrAttack, attack_implies_ef, is_attack_tree, synthesize_base_attack
from src.core.ctl import QueryIndex, check_EF
from src.core.kripke import ExplorationConfig, explore, reachability_matrix
from src.core.model import ActionKind
from src.core.queries import QAnd, QOr, eval_query
from src.core.resolver import build_resolver
from src.core.semantics import enables
from tests.strategies import attack_trees, build_model, model_documents, queries

LIMITS = ExplorationConfig(max_states=1_000, max_depth=1_000, workers=1)

PROPERTY_SETTINGS = settings(
    max_examples=100,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)


def _explored(document):
    model = build_model(document)
    kripke = explore(model.initial, model.declarations, model.postables, LIMITS)
    assume(not kripke.truncated)
    return model, kripke


def _vocabulary(document):
    return [actor["name"] for actor in document["actors"]], document["locations"]


@pytest.mark.property
class TestAttackTreeProperties:
    """Correctness and completeness of the attack-tree calculus."""

    @PROPERTY_SETTINGS
    @given(document=model_documents(), data=st.data())
    def test_valid_attacks_imply_ef(self, document, data):
        """Test every valid attack tree has a reachable post-condition."""
        _, kripke = _explored(document)
        names, locations = _vocabulary(document)
        for _ in range(5):
            tree = data.draw(attack_trees(names, locations))
            assert attack_implies_ef(kripke, tree)
            if is_attack_tree(kripke, tree):
                assert check_EF(kripke, tree.post).holds

    @PROPERTY_SETTINGS
    @given(document=model_documents(), data=st.data())
    def test_synthesis_complete(self, document, data):
        """Test EF q yields a valid synthesized attack with post q."""
        _, kripke = _explored(document)
        q = data.draw(queries(*_vocabulary(document)))
        attack = synthesize_base_attack(kripke, q)
        if check_EF(kripke, q).holds:
            assert attack is not None
            assert attack.post == q
            assert is_attack_tree(kripke, attack)
        else:
            assert attack is None


@pytest.mark.property
class TestEFProperties:
    """EF checking against brute force."""

    @PROPERTY_SETTINGS
    @given(document=model_documents(max_locations=3, max_actors=3, max_postables=2), data=st.data())
    def test_matches_reachability_oracle(self, document, data):
        """Test EF agrees with the transitive closure on small models."""
        _, kripke = _explored(document)
        assume(len(kripke.states) <= 50)
        order, matrix = reachability_matrix(kripke)
        q = data.draw(queries(*_vocabulary(document)))
        expected = any(
            matrix[order.index(source), j]
            for source in kripke.init
            for j, state in enumerate(order)
            if eval_query(kripke, q, state)
        )
        assert check_EF(kripke, q).holds == expected

    @PROPERTY_SETTINGS
    @given(document=model_documents(), data=st.data())
    def test_monotone_under_disjunction(self, document, data):
        """Test EF q1 implies EF (q1 or q2)."""
        _, kripke = _explored(document)
        names, locations = _vocabulary(document)
        q1, q2 = data.draw(queries(names, locations)), data.draw(queries(names, locations))
        if check_EF(kripke, q1).holds:
            assert check_EF(kripke, QOr((q1, q2))).holds

    @PROPERTY_SETTINGS
    @given(document=model_documents(), data=st.data())
    def test_witness_satisfies_query(self, document, data):
        """Test witnesses start initially and end in a satisfying state."""
        _, kripke = _explored(document)
        q = data.draw(queries(*_vocabulary(document)))
        verdict = check_EF(kripke, q)
        if verdict.holds:
            assert verdict.witness[0] in kripke.init
            assert eval_query(kripke, q, verdict.witness[-1])
            for a, b in zip(verdict.witness, verdict.witness[1:]):
                assert (a, b) in kripke.transitions


@pytest.mark.property
class TestTransitionProperties:
    """Frame conditions of the transition rules."""

    @PROPERTY_SETTINGS
    @given(document=model_documents())
    def test_frame_conditions(self, document):
        """Test transitions keep policy, topology and dispositions, and only add data."""
        _, kripke = _explored(document)
        for source, target in kripke.transitions:
            assert target.policy == source.policy
            assert target.graph.locations == source.graph.locations
            assert target.graph.edges == source.graph.edges
            assert target.graph.dispositions == source.graph.dispositions
            assert target.graph.credentials == source.graph.credentials
            for location in source.graph.locations:
                assert source.graph.data_at(location) <= target.graph.data_at(location)

    @PROPERTY_SETTINGS
    @given(document=model_documents(aware=True))
    def test_aware_actors_post_nothing(self, document):
        """Test no new content appears when nobody is unaware."""
        model, kripke = _explored(document)
        initial = model.initial.graph
        known = {datum for location in initial.locations for datum in initial.data_at(location)}
        for state in kripke.states:
            for location in state.graph.locations:
                assert state.graph.data_at(location) <= known


def _placements_by_moves(model, names, edges):
    """Breadth-first search over placement tuples using only the move rule."""
    initial = model.initial
    resolver = build_resolver(initial, model.declarations)
    locations = sorted(initial.graph.locations)
    neighbours = {location: set() for location in locations}
    for a, b in edges:
        if a != b:
            neighbours[a].add(b)
            neighbours[b].add(a)
    allowed = {
        (who, to) for who in names for to in locations if enables(initial, resolver, to, who, ActionKind.MOVE)
    }
    start = tuple(initial.graph.location_of(name) for name in names)
    seen, queue = {start}, deque([start])
    while queue:
        placement = queue.popleft()
        for i, who in enumerate(names):
            for to in neighbours[placement[i]]:
                if (who, to) in allowed:
                    successor = placement[:i] + (to,) + placement[i + 1 :]
                    if successor not in seen:
                        seen.add(successor)
                        queue.append(successor)
    return seen


@pytest.mark.property
class TestMovesOnly:
    """Models without data reduce to actor placements."""

    @PROPERTY_SETTINGS
    @given(document=model_documents())
    def test_reachable_placements(self, document):
        """Test explored states are exactly the placements reachable by moves."""
        document = {**document, "postables": [], "data": []}
        model, kripke = _explored(document)
        names = sorted(actor["name"] for actor in document["actors"])
        explored = {tuple(state.graph.location_of(name) for name in names) for state in kripke.states}
        assert explored == _placements_by_moves(model, names, document["edges"])
        assert len(kripke.states) == len(explored)


@pytest.mark.property
class TestAndAttackDecomposition:
    """Replacing a child by an equivalent valid tree keeps an and-attack valid."""

    @PROPERTY_SETTINGS
    @given(document=model_documents(), data=st.data())
    def test_child_replacement(self, document, data):
        """Test substituting a child with equal pre/post sets preserves validity."""
        _, kripke = _explored(document)
        attack = synthesize_base_attack(kripke, data.draw(queries(*_vocabulary(document))))
        assume(isinstance(attack, AndAttack))
        assert is_attack_tree(kripke, attack)

        i = data.draw(st.integers(0, len(attack.children) - 1))
        child = attack.children[i]
        pre, post = QAnd((child.pre, child.pre)), QOr((child.post,))
        index = QueryIndex(kripke)
        assert index.satisfying(pre) == index.satisfying(child.pre)
        assert index.satisfying(post) == index.satisfying(child.post)

        replacements = [
            OrAttack((child,), pre, post),
            AndAttack((child, Base(child.post, post)), pre, post),
        ]
        for replacement in replacements:
            assert is_attack_tree(kripke, replacement)
            children = attack.children[:i] + (replacement,) + attack.children[i + 1 :]
            assert is_attack_tree(kripke, AndAttack(children, attack.pre, attack.post))
