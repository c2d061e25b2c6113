"""
Parsing expression AST and grammar container.

All nodes are frozen dataclasses, so expressions and grammars can be shared
freely once built. Matching is byte oriented: characters, literals and
classes carry byte values 0..255.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Tuple, Union

from src.grammar.errors import DuplicateProductionError, GrammarError


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Char:
    byte: int

    def __post_init__(self):
        if not 0 <= self.byte <= 255:
            raise ValueError(f"Char byte out of range: {self.byte}")


@dataclass(frozen=True)
class CharClass:
    members: FrozenSet[int]

    def __post_init__(self):
        if not self.members:
            raise ValueError("CharClass needs at least one member")
        if any(not 0 <= b <= 255 for b in self.members):
            raise ValueError("CharClass members must be bytes")


@dataclass(frozen=True)
class AnyChar:
    pass


@dataclass(frozen=True)
class Nonterminal:
    name: str


@dataclass(frozen=True)
class Literal:
    data: bytes

    def __post_init__(self):
        if not self.data:
            raise ValueError("Literal must not be empty")


@dataclass(frozen=True)
class Sequence:
    items: Tuple["Expression", ...]

    def __post_init__(self):
        if len(self.items) < 2:
            raise ValueError("Sequence needs at least two items")


@dataclass(frozen=True)
class Choice:
    items: Tuple["Expression", ...]

    def __post_init__(self):
        if len(self.items) < 2:
            raise ValueError("Choice needs at least two alternatives")


@dataclass(frozen=True)
class Option:
    expr: "Expression"


@dataclass(frozen=True)
class ZeroOrMore:
    expr: "Expression"


@dataclass(frozen=True)
class OneOrMore:
    expr: "Expression"


@dataclass(frozen=True)
class And:
    expr: "Expression"


@dataclass(frozen=True)
class Not:
    expr: "Expression"


Expression = Union[Empty, Char, CharClass, AnyChar, Nonterminal, Literal,
                   Sequence, Choice, Option, ZeroOrMore, OneOrMore, And, Not]

UNARY_TYPES = (Option, ZeroOrMore, OneOrMore, And, Not)


def make_sequence(items: Iterable[Expression]) -> Expression:
    """Build a sequence, collapsing zero or one item to the item itself."""
    items = tuple(items)
    if not items:
        return Empty()
    if len(items) == 1:
        return items[0]
    return Sequence(items)


def make_choice(items: Iterable[Expression]) -> Expression:
    items = tuple(items)
    if len(items) == 1:
        return items[0]
    return Choice(items)


def make_literal(data: bytes) -> Expression:
    """Literal text as Empty, Char or Literal depending on its length."""
    if not data:
        return Empty()
    if len(data) == 1:
        return Char(data[0])
    return Literal(bytes(data))


def children(e: Expression) -> Tuple[Expression, ...]:
    if isinstance(e, (Sequence, Choice)):
        return e.items
    if isinstance(e, UNARY_TYPES):
        return (e.expr,)
    return ()


def walk(e: Expression) -> Iterator[Expression]:
    """Pre-order traversal."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def referenced_names(e: Expression) -> List[str]:
    """Nonterminal names in pre-order, one entry per reference site."""
    return [node.name for node in walk(e) if isinstance(node, Nonterminal)]


@dataclass(frozen=True)
class Grammar:
    """
    Ordered productions plus the start production.

    Production names are unique; the start defaults to the first production.
    """
    productions: Tuple[Tuple[str, Expression], ...]
    start: str = ""

    def __post_init__(self):
        if not self.productions:
            raise GrammarError("Grammar has no productions")
        seen = set()
        for name, _ in self.productions:
            if name in seen:
                raise DuplicateProductionError(name)
            seen.add(name)
        if not self.start:
            object.__setattr__(self, "start", self.productions[0][0])
        elif self.start not in seen:
            raise GrammarError(f"Start production not defined: {self.start}")

    @cached_property
    def rules(self) -> Dict[str, Expression]:
        return dict(self.productions)

    @property
    def names(self) -> List[str]:
        return [name for name, _ in self.productions]

    def body(self, name: str) -> Expression:
        return self.rules[name]

    def references(self) -> Dict[str, int]:
        """Reference sites per production; the start counts the entry call too."""
        counts = {name: 0 for name in self.names}
        counts[self.start] += 1
        for _, body in self.productions:
            for ref in referenced_names(body):
                if ref in counts:
                    counts[ref] += 1
        return counts

    def replace(self, productions: Iterable[Tuple[str, Expression]]) -> "Grammar":
        return Grammar(tuple(productions), self.start)


# Rendering helpers shared by the pretty printer and the disassembler.

_NAMED_ESCAPES = {0x09: "\\t", 0x0A: "\\n", 0x0D: "\\r", 0x5C: "\\\\"}
_CLASS_SPECIALS = {ord("]"), ord("["), ord("-")}


def format_byte(b: int, specials: FrozenSet[int] = frozenset()) -> str:
    if b in _NAMED_ESCAPES:
        return _NAMED_ESCAPES[b]
    if b in specials:
        return "\\" + chr(b)
    if 0x20 <= b < 0x7F:
        return chr(b)
    return f"\\x{b:02x}"


def format_bytes(data: bytes) -> str:
    """Quote a byte string the way grammar literals are written."""
    return "'" + "".join(format_byte(b, frozenset({ord("'")})) for b in data) + "'"


def format_class(members: Iterable[int]) -> str:
    """
    Render a byte set as a bracket class, runs of three or more as ranges.

    Examples:
        {0x30..0x39} -> [0-9]
        {',', '\\n'} -> [\\n,]
    """
    ordered = sorted(set(members))
    parts = []
    i = 0
    specials = frozenset(_CLASS_SPECIALS)
    while i < len(ordered):
        j = i
        while j + 1 < len(ordered) and ordered[j + 1] == ordered[j] + 1:
            j += 1
        if j - i >= 2:
            parts.append(f"{format_byte(ordered[i], specials)}-{format_byte(ordered[j], specials)}")
        else:
            parts.extend(format_byte(b, specials) for b in ordered[i:j + 1])
        i = j + 1
    return "[" + "".join(parts) + "]"
