"""Tests for the attack-tree validity calculus and synthesis."""

import pytest

from src.core.attack_trees import (
    AndAttack,
    Base,
    OrAttack,
    attack_from_spec,
    attack_implies_ef,
    attack_to_spec,
    check_attack_tree,
    is_attack_tree,
    leaf_count,
    synthesize_base_attack,
)
from src.core.ctl import check_EF
from src.core.errors import QueryError, TruncatedModelError
from src.core.kripke import ExplorationConfig, explore
from src.core.queries import ActorAt, DataAt, InitialState, PolicyViolatedBy, QueryBuilder

DIARY_AT_INSTAGRAM = DataAt("instagram", "Alice", "Alice's_diary")


def _sn_attack(model):
    isn, sn, ssn = (model.queries[name] for name in ("Isn", "SN", "ssn"))
    return AndAttack((Base(isn, sn), Base(sn, ssn)), isn, ssn)


@pytest.mark.integration
class TestIsAttackTree:
    """Tests for the validity calculus."""

    def test_sn_and_attack(self, sn_kripke, sn_model):
        """Test the two-step and-attack is valid."""
        assert is_attack_tree(sn_kripke, _sn_attack(sn_model))
        assert sn_model.attacks["eve_and_attack"] == _sn_attack(sn_model)

    def test_and_attack_on_bare_violation(self, sn_kripke, sn_model):
        """Test the and-attack ending in the bare policy violation of Eve."""
        isn, sn = sn_model.queries["Isn"], sn_model.queries["SN"]
        violation = sn_model.queries["policy_violation"]
        assert violation == PolicyViolatedBy("Eve", frozenset({"Alice", "Bob"}), "instagram")
        tree = AndAttack((Base(isn, sn), Base(sn, violation)), isn, violation)
        assert is_attack_tree(sn_kripke, tree)
        assert attack_implies_ef(sn_kripke, tree)
        assert len(check_EF(sn_kripke, violation).witness) == 1

    def test_base_zero_steps(self, sn_kripke):
        """Test Base(q, q) is valid for satisfiable q."""
        assert is_attack_tree(sn_kripke, Base(DIARY_AT_INSTAGRAM, DIARY_AT_INSTAGRAM))

    def test_base_unsatisfiable_pre(self, sn_kripke):
        """Test a base attack with an empty pre set is invalid."""
        result = check_attack_tree(sn_kripke, Base(ActorAt("Alice", "bphone"), InitialState()))
        assert not result.valid
        assert result.failing_clause == "root: base pre-condition is satisfied by no state"

    def test_awareness_invalidates(self, sn_aware_kripke):
        """Test the base attack fails when Alice is suspicious."""
        result = check_attack_tree(sn_aware_kripke, Base(InitialState(), DIARY_AT_INSTAGRAM))
        assert not result.valid
        assert "cannot reach the post-condition" in result.failing_clause

    def test_failing_child_path(self, sn_aware_kripke, sn_aware_model):
        """Test the failing clause names the child."""
        result = check_attack_tree(sn_aware_kripke, _sn_attack(sn_aware_model))
        assert not result.valid
        assert result.failing_clause.startswith("root.0:")

    def test_and_chain_mismatch(self, sn_kripke):
        """Test a child post that does not imply the next pre is rejected."""
        at_instagram = ActorAt("Alice", "instagram")
        children = (Base(InitialState(), at_instagram), Base(DIARY_AT_INSTAGRAM, DIARY_AT_INSTAGRAM))
        tree = AndAttack(children, InitialState(), DIARY_AT_INSTAGRAM)
        result = check_attack_tree(sn_kripke, tree)
        assert result.failing_clause == "root: post of child 0 does not imply pre of child 1"

    def test_or_attack(self, sn_kripke):
        """Test an or-attack covering its pre with its children."""
        alice_home, alice_away = ActorAt("Alice", "aphone"), ActorAt("Alice", "instagram")
        children = (Base(alice_home, DIARY_AT_INSTAGRAM), Base(alice_away, DIARY_AT_INSTAGRAM))
        assert is_attack_tree(sn_kripke, OrAttack(children, InitialState(), DIARY_AT_INSTAGRAM))
        uncovered = OrAttack(children[1:], InitialState(), DIARY_AT_INSTAGRAM)
        result = check_attack_tree(sn_kripke, uncovered)
        assert result.failing_clause == "root: pre does not imply the disjunction of the children's pres"

    def test_single_child_or_equals_and(self, sn_kripke, sn_model):
        """Test single-child or- and and-attacks agree."""
        child = Base(sn_model.queries["Isn"], sn_model.queries["SN"])
        for post in (sn_model.queries["SN"], sn_model.queries["ssn"], InitialState()):
            assert is_attack_tree(sn_kripke, OrAttack((child,), InitialState(), post)) == is_attack_tree(
                sn_kripke, AndAttack((child,), InitialState(), post)
            )

    def test_empty_children(self, sn_kripke):
        """Test composite attacks need children."""
        assert not is_attack_tree(sn_kripke, AndAttack((), InitialState(), InitialState()))

    def test_truncated_model_refused(self, sn_model):
        """Test validity is refused on truncated models."""
        kripke = explore(sn_model.initial, sn_model.declarations, sn_model.postables, ExplorationConfig(max_states=1))
        with pytest.raises(TruncatedModelError):
            check_attack_tree(kripke, _sn_attack(sn_model))


@pytest.mark.integration
class TestCorrectnessBridge:
    """Tests for attack_implies_ef and synthesis."""

    def test_sn_attack_implies_ef(self, sn_kripke, sn_model):
        """Test the valid and-attack yields EF ssn."""
        assert attack_implies_ef(sn_kripke, _sn_attack(sn_model))
        assert check_EF(sn_kripke, sn_model.queries["ssn"]).holds

    def test_invalid_attack_vacuous(self, sn_aware_kripke, sn_aware_model):
        """Test invalid attacks satisfy the bridge vacuously."""
        assert attack_implies_ef(sn_aware_kripke, _sn_attack(sn_aware_model))

    def test_synthesize_ssn(self, sn_kripke, sn_model):
        """Test the synthesized attack is valid with one leaf per witness step."""
        ssn = sn_model.queries["ssn"]
        attack = synthesize_base_attack(sn_kripke, ssn)
        witness = check_EF(sn_kripke, ssn).witness
        assert is_attack_tree(sn_kripke, attack)
        assert leaf_count(attack) == len(witness) - 1
        assert attack.pre == InitialState()
        assert attack.post == ssn

    def test_synthesize_unsatisfiable(self, sn_aware_kripke):
        """Test synthesis is refused when EF fails."""
        assert synthesize_base_attack(sn_aware_kripke, DIARY_AT_INSTAGRAM) is None

    def test_synthesize_initial(self, sn_kripke):
        """Test the zero-step attack."""
        attack = synthesize_base_attack(sn_kripke, InitialState())
        assert attack == Base(InitialState(), InitialState())
        assert is_attack_tree(sn_kripke, attack)


@pytest.mark.unit
class TestAttackSpecs:
    """Tests for the document form of attack trees."""

    @pytest.fixture
    def builder(self):
        """Query builder with one named query."""
        return QueryBuilder({"home": {"actor_at": {"identity": "Alice", "location": "aphone"}}})

    def test_round_trip(self, builder):
        """Test document -> tree -> document keeps the structure."""
        spec = {"or": [{"base": {"pre": "initial", "post": "home"}}], "pre": "initial", "post": "home"}
        tree = attack_from_spec(spec, builder)
        assert isinstance(tree, OrAttack)
        assert attack_from_spec(attack_to_spec(tree), builder) == tree

    @pytest.mark.parametrize(
        "spec",
        [
            [],
            {"base": {"pre": "initial"}},
            {"and": [], "pre": "initial", "post": "initial"},
            {"and": [{"base": {"pre": "initial", "post": "initial"}}], "pre": "initial"},
            {"xor": []},
            {"base": {"pre": "initial", "post": "missing"}},
        ],
    )
    def test_malformed(self, builder, spec):
        """Test malformed attack documents raise QueryError."""
        with pytest.raises(QueryError):
            attack_from_spec(spec, builder)
