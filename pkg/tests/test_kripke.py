"""Tests for state-space exploration."""

import logging

import numpy as np
import pytest
from pydantic import ValidationError

from src.core.kripke import ExplorationConfig, explore, reachability_matrix
from src.core.resolver import build_resolver
from src.core.semantics import step_move, successors
from tests.strategies import build_model


def _explore(model, **limits):
    return explore(model.initial, model.declarations, model.postables, ExplorationConfig(**limits))


@pytest.mark.unit
class TestExplorationConfig:
    """Tests for exploration limits."""

    def test_defaults(self, monkeypatch):
        """Test the documented defaults."""
        for name in ("CHECKER_MAX_STATES", "CHECKER_MAX_DEPTH", "CHECKER_WORKERS"):
            monkeypatch.delenv(name, raising=False)
        config = ExplorationConfig()
        assert (config.max_states, config.max_depth, config.workers) == (100_000, 1_000, 1)

    def test_environment(self, monkeypatch):
        """Test limits are read from CHECKER_* variables."""
        monkeypatch.setenv("CHECKER_MAX_STATES", "42")
        assert ExplorationConfig().max_states == 42

    def test_limits_positive(self):
        """Test non-positive limits are rejected."""
        with pytest.raises(ValidationError):
            ExplorationConfig(max_states=0)
        with pytest.raises(ValidationError):
            ExplorationConfig(workers=0)


@pytest.mark.integration
class TestExplore:
    """Tests for explore."""

    def test_sn_state_count(self, sn_kripke):
        """Test the scenario explores to exactly 20 states without truncation."""
        assert len(sn_kripke.states) == 20
        assert not sn_kripke.truncated
        assert sn_kripke.complete
        assert len(sn_kripke.init) == 1

    def test_variants_state_counts(self, sn_aware_kripke, sn_no_readers_kripke):
        """Test the awareness and private-diary variants."""
        assert len(sn_aware_kripke.states) == 4
        assert len(sn_no_readers_kripke.states) == 12

    def test_transitions_agree_with_successors(self, sn_kripke, sn_model):
        """Test every state's successors are exactly its outgoing transitions."""
        for state in sn_kripke.states:
            expected = successors(state, sn_model.declarations, sn_model.postables)
            assert set(sn_kripke.post(state)) == expected
            assert all((state, target) in sn_kripke.transitions for target in expected)

    def test_closed_under_transitions(self, sn_kripke):
        """Test states are the initial states plus transition targets."""
        targets = {target for _, target in sn_kripke.transitions}
        assert sn_kripke.init <= sn_kripke.states
        assert sn_kripke.states == sn_kripke.init | targets

    def test_order_is_bfs(self, sn_kripke):
        """Test the initial state is discovered first."""
        assert sn_kripke.order[0] in sn_kripke.init
        assert len(sn_kripke.order) == len(sn_kripke.states)

    def test_max_states_truncates(self, sn_model):
        """Test max_states=1 sets the truncation flag."""
        model = _explore(sn_model, max_states=1)
        assert model.truncated
        assert len(model.states) == 1
        assert "max_states=1" in model.truncation_reason

    def test_truncation_among_initial_states(self, sn_model, caplog):
        """Test a limit below the number of initial states truncates with a warning."""
        moved = step_move(sn_model.initial, build_resolver(sn_model.initial, sn_model.declarations), "Bob", "instagram")
        with caplog.at_level(logging.WARNING, logger="src.core.kripke"):
            model = explore(
                [sn_model.initial, moved], sn_model.declarations, sn_model.postables, ExplorationConfig(max_states=1)
            )
        assert model.truncated
        assert len(model.states) == len(model.init) == 1
        assert "Exploration truncated: max_states=1 reached" in caplog.text

    def test_max_states_warns(self, sn_model, caplog):
        """Test truncation during the search is logged."""
        with caplog.at_level(logging.WARNING, logger="src.core.kripke"):
            _explore(sn_model, max_states=2)
        assert "Exploration truncated" in caplog.text

    def test_max_depth_truncates(self, sn_model):
        """Test a shallow depth limit truncates."""
        model = _explore(sn_model, max_depth=1)
        assert model.truncated
        assert len(model.states) == 3
        assert "max_depth=1" in model.truncation_reason

    def test_depth_limit_at_fixpoint(self, sn_model):
        """Test a depth limit equal to the diameter does not truncate."""
        full = _explore(sn_model)
        model = _explore(sn_model, max_depth=full.depth)
        assert not model.truncated
        assert model.states == full.states

    def test_no_enabled_actions(self):
        """Test a model without policies has only its initial state."""
        model = build_model(
            {
                "locations": ["a", "b"],
                "edges": [["a", "b"]],
                "actors": [{"name": "X", "location": "a", "psy": "happy"}],
            }
        )
        kripke = _explore(model)
        assert kripke.states == kripke.init
        assert kripke.transitions == frozenset()

    def test_parallel_matches_sequential(self, sn_model):
        """Test thread-pool expansion yields the identical model."""
        sequential = _explore(sn_model)
        parallel = _explore(sn_model, workers=4)
        assert parallel.order == sequential.order
        assert parallel.transitions == sequential.transitions
        assert dict(parallel.labels) == dict(sequential.labels)


@pytest.mark.unit
class TestReachabilityMatrix:
    """Tests for the brute-force reachability oracle."""

    def test_reflexive_transitive(self, sn_kripke):
        """Test the closure is reflexive and the initial state reaches everything."""
        order, matrix = reachability_matrix(sn_kripke)
        assert matrix.shape == (20, 20)
        assert matrix.dtype == np.bool_
        assert np.all(np.diag(matrix))
        assert np.all(matrix[order.index(next(iter(sn_kripke.init)))])

    def test_contains_transitions(self, sn_kripke):
        """Test every transition is in the closure."""
        order, matrix = reachability_matrix(sn_kripke)
        index = {state: i for i, state in enumerate(order)}
        for source, target in sn_kripke.transitions:
            assert matrix[index[source], index[target]]
