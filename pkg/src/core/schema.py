"""
Declaration schema of a model document.

Declarations keep the order they were written in, so diagnostic paths point
at the right node of the source document. Equality is structural over the
normalized form: every list that denotes a set is compared sorted and
deduplicated, which makes a document equal to its canonical serialization.
Cross-references are not checked here; see ``src.core.validator``.
"""

import json
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.core.conditions import ConditionSyntaxError, canonical_condition_text
from src.core.model import ActionKind, Motivation, PsyState

Name = str


def _set(values: List[Any]) -> List[Any]:
    return sorted(set(values))


def _canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True)


class _Declaration(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ActorDecl(_Declaration):
    """An identity with its placement, credentials, roles and disposition."""

    name: Name = Field(..., min_length=1)
    location: Name = Field(..., min_length=1)
    credentials: List[str] = Field(default_factory=list)
    roles: List[str] = Field(default_factory=list)
    psy: PsyState
    motivations: List[Motivation] = Field(default_factory=list)

    def normalized(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "location": self.location,
            "credentials": _set(self.credentials),
            "roles": _set(self.roles),
            "psy": self.psy.value,
            "motivations": _set(m.value for m in self.motivations),
        }


class PolicyRuleDecl(_Declaration):
    """One atomic policy: condition text and granted actions."""

    condition: str = Field(..., description='e.g. has("aPIN") or actor_in("Alice", "Bob")')
    actions: List[ActionKind] = Field(..., min_length=1)

    @field_validator("condition")
    @classmethod
    def _canonical_condition(cls, text: str) -> str:
        try:
            return canonical_condition_text(text)
        except ConditionSyntaxError as e:
            raise ValueError(str(e)) from e

    def normalized(self) -> Dict[str, Any]:
        return {"condition": self.condition, "actions": _set(a.value for a in self.actions)}


class InsiderDecl(_Declaration):
    subject: Name = Field(..., min_length=1)
    alters: List[Name] = Field(default_factory=list)

    def normalized(self) -> Dict[str, Any]:
        return {"subject": self.subject, "alters": _set(self.alters)}


class PostableDecl(_Declaration):
    """A datum the poster may put; the poster is its owner."""

    poster: Name = Field(..., min_length=1)
    readers: List[Name] = Field(default_factory=list)
    content: str = Field(..., min_length=1)
    at: Name = Field(..., min_length=1)

    def normalized(self) -> Dict[str, Any]:
        return {"poster": self.poster, "readers": _set(self.readers), "content": self.content, "at": self.at}


class DatumDecl(_Declaration):
    """A datum stored at a location in the initial state."""

    location: Name = Field(..., min_length=1)
    owner: Name = Field(..., min_length=1)
    readers: List[Name] = Field(default_factory=list)
    content: str = Field(..., min_length=1)

    def normalized(self) -> Dict[str, Any]:
        return {"location": self.location, "owner": self.owner, "readers": _set(self.readers), "content": self.content}


class ModelFile(_Declaration):
    """A complete model document."""

    name: Optional[str] = None
    description: Optional[str] = None
    locations: List[Name]
    edges: List[Tuple[Name, Name]] = Field(default_factory=list)
    actors: List[ActorDecl] = Field(default_factory=list)
    policies: Dict[Name, List[PolicyRuleDecl]] = Field(default_factory=dict)
    insiders: List[InsiderDecl] = Field(default_factory=list)
    postables: List[PostableDecl] = Field(default_factory=list)
    data: List[DatumDecl] = Field(default_factory=list)
    friends: List[Name] = Field(default_factory=list)
    cloud: Optional[Name] = None
    queries: Dict[str, Any] = Field(default_factory=dict)
    attacks: Dict[str, Any] = Field(default_factory=dict)

    def normalized(self) -> Dict[str, Any]:
        """Canonical document: sets sorted, declarations in canonical order."""

        def ordered(items):
            return sorted((item.normalized() for item in items), key=_canonical_json)

        document: Dict[str, Any] = {}
        if self.name is not None:
            document["name"] = self.name
        if self.description is not None:
            document["description"] = self.description
        document["locations"] = sorted(self.locations)
        document["edges"] = [list(edge) for edge in _set(self.edges)]
        document["actors"] = ordered(self.actors)
        document["policies"] = {location: ordered(rules) for location, rules in sorted(self.policies.items())}
        document["insiders"] = ordered(self.insiders)
        document["postables"] = ordered(self.postables)
        document["data"] = ordered(self.data)
        document["friends"] = _set(self.friends)
        if self.cloud is not None:
            document["cloud"] = self.cloud
        document["queries"] = dict(sorted(self.queries.items()))
        document["attacks"] = dict(sorted(self.attacks.items()))
        return document

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModelFile):
            return NotImplemented
        return self.normalized() == other.normalized()

