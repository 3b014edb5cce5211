"""
Actor resolver: the role function mapping identities to actors.

The mapping is injective except for insiders. When an insider declaration's
trigger fires (tipping point or unawareness of the subject), the subject's
class is merged with each alter's class.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, Mapping, Tuple

from src.core.model import ActorState, InfrastructureState, InsiderDeclaration, tipping_point, unaware

logger = logging.getLogger(__name__)


class UnionFind:
    """Union-find over names with path compression and union by size."""

    def __init__(self, names: Iterable[str]):
        self.parent: Dict[str, str] = {name: name for name in names}
        self.size: Dict[str, int] = {name: 1 for name in self.parent}

    def find(self, name: str) -> str:
        root = name
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[name] != root:
            self.parent[name], name = root, self.parent[name]
        return root

    def union(self, a: str, b: str) -> None:
        a, b = self.find(a), self.find(b)
        if a == b:
            return
        if self.size[a] < self.size[b]:
            a, b = b, a
        self.parent[b] = a
        self.size[a] += self.size[b]

    def classes(self) -> FrozenSet[FrozenSet[str]]:
        groups: Dict[str, set] = {}
        for name in self.parent:
            groups.setdefault(self.find(name), set()).add(name)
        return frozenset(frozenset(group) for group in groups.values())


@dataclass(frozen=True)
class ActorResolver:
    """Partition of identities into role-equivalence classes."""

    classes: FrozenSet[FrozenSet[str]]

    def __post_init__(self):
        representative = {}
        for group in self.classes:
            rep = min(group)
            for name in group:
                representative[name] = rep
        object.__setattr__(self, "_rep", MappingProxyType(representative))

    @classmethod
    def discrete(cls, identities: Iterable[str]) -> "ActorResolver":
        return cls(frozenset(frozenset({name}) for name in identities))

    def class_of(self, identity: str) -> FrozenSet[str]:
        rep = self._rep.get(identity)
        if rep is None:
            return frozenset({identity})
        return next(group for group in self.classes if identity in group)

    def representative(self, identity: str) -> str:
        return self._rep.get(identity, identity)

    def merged_classes(self) -> Tuple[Tuple[str, ...], ...]:
        """Non-singleton classes in canonical order."""
        return tuple(sorted(tuple(sorted(group)) for group in self.classes if len(group) > 1))


def insider_fires(disposition: ActorState) -> bool:
    """Trigger of the insider rule: malicious tipping point or unawareness."""
    return tipping_point(disposition) or unaware(disposition)


@lru_cache(maxsize=1024)
def _resolve(
    identities: FrozenSet[str],
    dispositions: Tuple[Tuple[str, ActorState], ...],
    decls: FrozenSet[InsiderDeclaration],
) -> ActorResolver:
    states: Mapping[str, ActorState] = dict(dispositions)
    uf = UnionFind(sorted(identities))
    for decl in sorted(decls, key=InsiderDeclaration.sort_key):
        disposition = states.get(decl.subject)
        if disposition is None or not insider_fires(disposition):
            continue
        for alter in sorted(decl.alters):
            if alter in uf.parent:
                logger.debug(f"Insider rule fired: {decl.subject} acts as {alter}")
                uf.union(decl.subject, alter)
    return ActorResolver(uf.classes())


def build_resolver(state: InfrastructureState, decls: Iterable[InsiderDeclaration]) -> ActorResolver:
    """Resolver for ``state``: discrete, then merged along every fired insider declaration."""
    graph = state.graph
    return _resolve(graph.identities, tuple(graph.dispositions.items()), frozenset(decls))


def actor_eq(r: ActorResolver, x: str, y: str) -> bool:
    """True iff ``x`` and ``y`` map to the same actor."""
    return x == y or r.representative(x) == r.representative(y)
