"""
Kripke module for exploring the reachable state space.

Breadth-first fixpoint of the transition relation from the initial states,
deduplicated by canonical state form, with explicit truncation when the
configured limits are hit.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.core.model import InfrastructureState, InsiderDeclaration, PostableItem
from src.core.semantics import RuleApplication, labeled_successors

logger = logging.getLogger(__name__)

Transition = Tuple[InfrastructureState, InfrastructureState]


class ExplorationConfig(BaseSettings):
    """Limits for state-space exploration."""

    model_config = SettingsConfigDict(env_prefix="CHECKER_")

    max_states: int = Field(default=100_000, gt=0)
    max_depth: int = Field(default=1_000, gt=0)
    workers: int = Field(default=1, ge=1)


@dataclass(frozen=True, eq=False)
class KripkeModel:
    """
    Explored state space.

    ``order`` lists the states in BFS discovery order; ``labels`` maps each
    transition to the rule instances producing it.
    """

    states: FrozenSet[InfrastructureState]
    transitions: FrozenSet[Transition]
    init: FrozenSet[InfrastructureState]
    declarations: FrozenSet[InsiderDeclaration]
    postables: FrozenSet[PostableItem]
    order: Tuple[InfrastructureState, ...]
    labels: Mapping[Transition, Tuple[RuleApplication, ...]] = field(default_factory=dict)
    truncated: bool = False
    truncation_reason: Optional[str] = None
    depth: int = 0

    def __post_init__(self):
        forward: Dict[InfrastructureState, List[InfrastructureState]] = {s: [] for s in self.order}
        backward: Dict[InfrastructureState, List[InfrastructureState]] = {s: [] for s in self.order}
        for source, target in self.transitions:
            forward[source].append(target)
            backward[target].append(source)
        key = InfrastructureState.sort_key
        object.__setattr__(self, "_post", MappingProxyType({s: tuple(sorted(v, key=key)) for s, v in forward.items()}))
        object.__setattr__(self, "_pre", MappingProxyType({s: tuple(sorted(v, key=key)) for s, v in backward.items()}))
        object.__setattr__(self, "labels", MappingProxyType(dict(self.labels)))

    @property
    def complete(self) -> bool:
        return not self.truncated

    def post(self, state: InfrastructureState) -> Tuple[InfrastructureState, ...]:
        """Successors of ``state`` in canonical order."""
        return self._post.get(state, ())

    def pre(self, state: InfrastructureState) -> Tuple[InfrastructureState, ...]:
        """Predecessors of ``state`` in canonical order."""
        return self._pre.get(state, ())


def explore(
    initial: Union[InfrastructureState, Iterable[InfrastructureState]],
    decls: Iterable[InsiderDeclaration],
    postables: Iterable[PostableItem],
    limits: Optional[ExplorationConfig] = None,
) -> KripkeModel:
    """
    Explore all states reachable from ``initial``.

    Stops with ``truncated`` set when the state count would exceed
    ``limits.max_states`` or a frontier beyond ``limits.max_depth`` still has
    unseen successors.
    """
    limits = limits or ExplorationConfig()
    decls = frozenset(decls)
    postables = frozenset(postables)
    if isinstance(initial, InfrastructureState):
        initial = [initial]
    init = sorted(set(initial), key=InfrastructureState.sort_key)

    order: List[InfrastructureState] = []
    seen = set()
    transitions = set()
    labels: Dict[Transition, Tuple[RuleApplication, ...]] = {}
    truncated = False
    reason = None

    for state in init:
        if len(order) >= limits.max_states:
            truncated, reason = True, f"max_states={limits.max_states} reached"
            logger.warning(f"Exploration truncated: {reason}")
            break
        seen.add(state)
        order.append(state)

    frontier = list(order)
    depth = 0
    executor = ThreadPoolExecutor(max_workers=limits.workers) if limits.workers > 1 else None
    try:
        while frontier and not truncated:
            if executor is not None:
                expanded = list(executor.map(lambda s: labeled_successors(s, decls, postables), frontier))
            else:
                expanded = [labeled_successors(s, decls, postables) for s in frontier]

            if depth >= limits.max_depth:
                if any(successor not in seen for found in expanded for successor, _ in found):
                    truncated, reason = True, f"max_depth={limits.max_depth} reached"
                    logger.warning(f"Exploration truncated: {reason}")
                else:
                    for source, found in zip(frontier, expanded):
                        for successor, applications in found:
                            transitions.add((source, successor))
                            labels[(source, successor)] = applications
                break

            next_frontier: List[InfrastructureState] = []
            for source, found in zip(frontier, expanded):
                for successor, applications in found:
                    if successor not in seen:
                        if len(order) >= limits.max_states:
                            truncated, reason = True, f"max_states={limits.max_states} reached"
                            logger.warning(f"Exploration truncated: {reason}")
                            break
                        seen.add(successor)
                        order.append(successor)
                        next_frontier.append(successor)
                    transitions.add((source, successor))
                    labels[(source, successor)] = applications
                if truncated:
                    break
            if next_frontier:
                depth += 1
            logger.debug(f"Depth {depth}: frontier {len(next_frontier)}, states {len(order)}")
            frontier = next_frontier
    finally:
        if executor is not None:
            executor.shutdown()

    model = KripkeModel(
        states=frozenset(order),
        transitions=frozenset(transitions),
        init=frozenset(init[: len(order)] if truncated else init),
        declarations=decls,
        postables=postables,
        order=tuple(order),
        labels=labels,
        truncated=truncated,
        truncation_reason=reason,
        depth=depth,
    )
    logger.info(
        f"Explored {len(model.states)} states, {len(model.transitions)} transitions, depth {depth}"
        + (f" (truncated: {reason})" if truncated else "")
    )
    return model


def reachability_matrix(model: KripkeModel) -> Tuple[Tuple[InfrastructureState, ...], np.ndarray]:
    """
    Reflexive-transitive closure of the transition relation.

    Returns the state index (``model.order``) and a boolean matrix ``R`` with
    ``R[i, j]`` iff state ``j`` is reachable from state ``i`` in zero or more steps.
    """
    index = {state: i for i, state in enumerate(model.order)}
    n = len(model.order)
    closure = np.eye(n, dtype=bool)
    for source, target in model.transitions:
        closure[index[source], index[target]] = True
    for k in range(n):
        closure |= np.outer(closure[:, k], closure[k, :])
    return model.order, closure
