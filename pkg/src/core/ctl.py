"""
CTL-EF checking over an explored Kripke model.

``check_EF`` decides whether every initial state can reach a state satisfying
a query and returns a shortest witness trace. Negative verdicts on truncated
models are marked inconclusive.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Optional, Tuple

from src.core.kripke import KripkeModel
from src.core.model import InfrastructureState
from src.core.queries import StateQuery, eval_query
from src.core.semantics import RuleApplication

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Verdict:
    """Outcome of an EF check; ``witness`` runs from an initial state to a satisfying one."""

    holds: bool
    witness: Optional[Tuple[InfrastructureState, ...]] = None
    steps: Tuple[Tuple[RuleApplication, ...], ...] = ()
    inconclusive: bool = False


class QueryIndex:
    """Caches the satisfying set of each query over one model."""

    def __init__(self, model: KripkeModel):
        self.model = model
        self._sat: Dict[StateQuery, FrozenSet[InfrastructureState]] = {}

    def satisfying(self, q: StateQuery) -> FrozenSet[InfrastructureState]:
        if q not in self._sat:
            self._sat[q] = frozenset(s for s in self.model.order if eval_query(self.model, q, s))
        return self._sat[q]

    def implies(self, q1: StateQuery, q2: StateQuery) -> bool:
        """Pointwise implication over the explored states."""
        return self.satisfying(q1) <= self.satisfying(q2)


def states_reaching(model: KripkeModel, targets: FrozenSet[InfrastructureState]) -> FrozenSet[InfrastructureState]:
    """All states that reach ``targets`` in zero or more steps (backward BFS)."""
    reached = set(targets)
    queue = deque(targets)
    while queue:
        state = queue.popleft()
        for predecessor in model.pre(state):
            if predecessor not in reached:
                reached.add(predecessor)
                queue.append(predecessor)
    return frozenset(reached)


def shortest_witness(
    model: KripkeModel, targets: FrozenSet[InfrastructureState]
) -> Optional[Tuple[InfrastructureState, ...]]:
    """
    Shortest trace from some initial state into ``targets``.

    Multi-source BFS over initial states in canonical order, successors in
    canonical order; the first target dequeued wins.
    """
    parent: Dict[InfrastructureState, Optional[InfrastructureState]] = {}
    queue = deque()
    for state in sorted(model.init, key=InfrastructureState.sort_key):
        parent[state] = None
        queue.append(state)
    while queue:
        state = queue.popleft()
        if state in targets:
            trace = [state]
            while parent[trace[-1]] is not None:
                trace.append(parent[trace[-1]])
            return tuple(reversed(trace))
        for successor in model.post(state):
            if successor not in parent:
                parent[successor] = state
                queue.append(successor)
    return None


def check_EF(model: KripkeModel, q: StateQuery, index: Optional[QueryIndex] = None) -> Verdict:
    """``model ⊢ EF q``: every initial state reaches a state satisfying ``q``."""
    index = index or QueryIndex(model)
    targets = index.satisfying(q)
    reaching = states_reaching(model, targets)
    holds = bool(model.init) and model.init <= reaching
    if not holds:
        inconclusive = model.truncated
        if inconclusive:
            logger.warning("EF does not hold on the explored part, but the model is truncated: inconclusive")
        return Verdict(holds=False, inconclusive=inconclusive)

    witness = shortest_witness(model, targets)
    steps = tuple(model.labels.get((a, b), ()) for a, b in zip(witness, witness[1:]))
    logger.info(f"EF holds; witness of {len(witness)} state(s)")
    return Verdict(holds=True, witness=witness, steps=steps)
