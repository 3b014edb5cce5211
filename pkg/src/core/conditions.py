"""
Policy condition module for building, parsing and rendering atomic-policy conditions.

Conditions are a closed AST: AlwaysTrue, HasCredential, ActorIn and the
boolean connectives Not/And/Or. The text syntax used in model files is::

    true | has("k") | actor_in("A", "B") | not c | c and c | c or c | (c)
"""

import logging
import re
from dataclasses import dataclass
from typing import FrozenSet, List, Set, Tuple, Union

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlwaysTrue:
    pass


@dataclass(frozen=True)
class HasCredential:
    credential: str


@dataclass(frozen=True)
class ActorIn:
    identities: FrozenSet[str]


@dataclass(frozen=True)
class Not:
    operand: "PolicyCondition"


@dataclass(frozen=True)
class And:
    left: "PolicyCondition"
    right: "PolicyCondition"


@dataclass(frozen=True)
class Or:
    left: "PolicyCondition"
    right: "PolicyCondition"


PolicyCondition = Union[AlwaysTrue, HasCredential, ActorIn, Not, And, Or]


class ConditionSyntaxError(ValueError):
    """Raised when condition text cannot be parsed."""

    def __init__(self, message: str, text: str, offset: int):
        self.text = text
        self.offset = offset
        super().__init__(f"{message} at offset {offset} in {text!r}")


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<string>"[^"]*"|'[^']*')
      | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<punct>[(),])
    )""",
    re.VERBOSE,
)

_KEYWORDS = {"true", "has", "actor_in", "not", "and", "or"}


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN.match(text, pos)
        if not match:
            raise ConditionSyntaxError("unexpected character", text, pos)
        kind = match.lastgroup
        value = match.group(kind)
        if kind == "string":
            value = value[1:-1]
        elif kind == "word" and value not in _KEYWORDS:
            raise ConditionSyntaxError(f"unknown word '{value}'", text, match.start(kind))
        tokens.append((kind, value, match.start(kind)))
        pos = match.end()
    return tokens


class _Parser:
    """Recursive-descent parser; ``and`` binds tighter than ``or``."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    def _peek(self) -> Tuple[str, str, int]:
        if self.index < len(self.tokens):
            return self.tokens[self.index]
        return ("end", "", len(self.text))

    def _take(self, kind: str, value: str = None) -> Tuple[str, str, int]:
        token = self._peek()
        if token[0] != kind or (value is not None and token[1] != value):
            expected = value or kind
            found = token[1] or "end of input"
            raise ConditionSyntaxError(f"expected {expected}, found {found}", self.text, token[2])
        self.index += 1
        return token

    def parse(self) -> PolicyCondition:
        if not self.tokens:
            raise ConditionSyntaxError("empty condition", self.text, 0)
        node = self._or()
        if self._peek()[0] != "end":
            token = self._peek()
            raise ConditionSyntaxError(f"unexpected '{token[1]}'", self.text, token[2])
        return node

    def _or(self) -> PolicyCondition:
        node = self._and()
        while self._peek()[:2] == ("word", "or"):
            self.index += 1
            node = Or(node, self._and())
        return node

    def _and(self) -> PolicyCondition:
        node = self._unary()
        while self._peek()[:2] == ("word", "and"):
            self.index += 1
            node = And(node, self._unary())
        return node

    def _unary(self) -> PolicyCondition:
        if self._peek()[:2] == ("word", "not"):
            self.index += 1
            return Not(self._unary())
        return self._atom()

    def _atom(self) -> PolicyCondition:
        kind, value, offset = self._peek()
        if kind == "punct" and value == "(":
            self.index += 1
            node = self._or()
            self._take("punct", ")")
            return node
        if kind == "word" and value == "true":
            self.index += 1
            return AlwaysTrue()
        if kind == "word" and value == "has":
            self.index += 1
            self._take("punct", "(")
            credential = self._take("string")[1]
            self._take("punct", ")")
            return HasCredential(credential)
        if kind == "word" and value == "actor_in":
            self.index += 1
            self._take("punct", "(")
            names = [self._take("string")[1]]
            while self._peek()[:2] == ("punct", ","):
                self.index += 1
                names.append(self._take("string")[1])
            self._take("punct", ")")
            return ActorIn(frozenset(names))
        raise ConditionSyntaxError(f"unexpected '{value or 'end of input'}'", self.text, offset)


def parse_condition(text: str) -> PolicyCondition:
    """Parse condition text into its AST."""
    return _Parser(text).parse()


def _quote(value: str) -> str:
    return f"'{value}'" if '"' in value else f'"{value}"'


def render_condition(condition: PolicyCondition) -> str:
    """
    Render a condition in canonical text form.

    ``parse_condition(render_condition(c)) == c`` holds for every AST.
    """
    if isinstance(condition, AlwaysTrue):
        return "true"
    if isinstance(condition, HasCredential):
        return f"has({_quote(condition.credential)})"
    if isinstance(condition, ActorIn):
        return "actor_in(" + ", ".join(_quote(name) for name in sorted(condition.identities)) + ")"
    if isinstance(condition, Not):
        inner = render_condition(condition.operand)
        if isinstance(condition.operand, (And, Or)):
            inner = f"({inner})"
        return f"not {inner}"
    if isinstance(condition, And):
        left = render_condition(condition.left)
        right = render_condition(condition.right)
        if isinstance(condition.left, Or):
            left = f"({left})"
        if isinstance(condition.right, (And, Or)):
            right = f"({right})"
        return f"{left} and {right}"
    if isinstance(condition, Or):
        left = render_condition(condition.left)
        right = render_condition(condition.right)
        if isinstance(condition.right, Or):
            right = f"({right})"
        return f"{left} or {right}"
    raise TypeError(f"Not a policy condition: {condition!r}")


def canonical_condition_text(text: str) -> str:
    """Normalize condition text to its canonical rendering."""
    return render_condition(parse_condition(text))


def condition_depth(condition: PolicyCondition) -> int:
    """Nesting depth of a condition; atoms have depth 1."""
    if isinstance(condition, Not):
        return 1 + condition_depth(condition.operand)
    if isinstance(condition, (And, Or)):
        return 1 + max(condition_depth(condition.left), condition_depth(condition.right))
    return 1


def referenced_credentials(condition: PolicyCondition) -> Set[str]:
    """All credentials named by HasCredential atoms."""
    if isinstance(condition, HasCredential):
        return {condition.credential}
    if isinstance(condition, Not):
        return referenced_credentials(condition.operand)
    if isinstance(condition, (And, Or)):
        return referenced_credentials(condition.left) | referenced_credentials(condition.right)
    return set()


def referenced_identities(condition: PolicyCondition) -> Set[str]:
    """All identities named by ActorIn atoms."""
    if isinstance(condition, ActorIn):
        return set(condition.identities)
    if isinstance(condition, Not):
        return referenced_identities(condition.operand)
    if isinstance(condition, (And, Or)):
        return referenced_identities(condition.left) | referenced_identities(condition.right)
    return set()
