"""
Grammar source reader and canonical printer.

Source syntax::

    Name = expr          a production; the first one is the start
    e1 / e2              prioritized choice
    e1 e2                sequence
    &e  !e               predicates
    e?  e*  e+           repetition suffixes
    ( e )                grouping
    'abc' "abc"          literals ('' is the empty expression)
    [a-z_\\]]            byte classes with ranges
    .                    any byte
    # ...                comment to the end of the line

Escapes in literals and classes: \\t \\r \\n \\\\ \\' \\" \\] \\[ \\- \\xHH.
Literal text is UTF-8 encoded; classes accept ASCII characters and \\xHH only.
"""

from typing import List, Optional, Tuple

from src.grammar.errors import DuplicateProductionError, GrammarSyntaxError
from src.grammar.expression import (
    And, AnyChar, Char, CharClass, Choice, Empty, Expression, Grammar, Literal,
    Nonterminal, Not, OneOrMore, Option, Sequence, ZeroOrMore, format_bytes,
    format_class, make_choice, make_literal, make_sequence,
)

_SIMPLE_ESCAPES = {
    "t": 0x09, "r": 0x0D, "n": 0x0A, "\\": 0x5C, "'": 0x27, '"': 0x22,
    "]": 0x5D, "[": 0x5B, "-": 0x2D,
}
_SUFFIXES = {"?": Option, "*": ZeroOrMore, "+": OneOrMore}
_PREFIXES = {"&": And, "!": Not}


def _is_ident_start(ch: str) -> bool:
    return ch.isascii() and (ch.isalpha() or ch == "_")


def _is_ident_char(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch == "_")


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, pos: Optional[int] = None) -> GrammarSyntaxError:
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        column = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return GrammarSyntaxError(message, line, column)

    def line_of(self, pos: int) -> int:
        return self.text.count("\n", 0, pos) + 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def skip_space(self):
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch in " \t\r\n":
                self.pos += 1
            elif ch == "#":
                end = text.find("\n", self.pos)
                self.pos = len(text) if end < 0 else end + 1
            else:
                break

    def identifier(self) -> str:
        start = self.pos
        if not _is_ident_start(self.peek()):
            raise self.error("Expected a production name")
        self.pos += 1
        while _is_ident_char(self.peek()):
            self.pos += 1
        return self.text[start:self.pos]

    def at_definition(self) -> bool:
        """True when the next tokens are `Name =`, i.e. a new production starts."""
        if not _is_ident_start(self.peek()):
            return False
        saved = self.pos
        self.identifier()
        self.skip_space()
        found = self.peek() == "="
        self.pos = saved
        return found

    # Expressions

    def choice(self) -> Expression:
        items = [self.sequence()]
        while self.peek() == "/":
            self.pos += 1
            self.skip_space()
            items.append(self.sequence())
        return make_choice(items)

    def sequence(self) -> Expression:
        items = []
        while not self.at_end() and self.peek() not in "/)" and not self.at_definition():
            items.append(self.prefixed())
        return make_sequence(items)

    def prefixed(self) -> Expression:
        ch = self.peek()
        if ch in _PREFIXES:
            self.pos += 1
            self.skip_space()
            return _PREFIXES[ch](self.prefixed())
        return self.suffixed()

    def suffixed(self) -> Expression:
        e = self.primary()
        while self.peek() and self.peek() in _SUFFIXES:
            e = _SUFFIXES[self.peek()](e)
            self.pos += 1
            self.skip_space()
        return e

    def primary(self) -> Expression:
        ch = self.peek()
        if not ch:
            raise self.error("Unexpected end of grammar")
        if ch == "(":
            open_pos = self.pos
            self.pos += 1
            self.skip_space()
            e = self.choice()
            if self.peek() != ")":
                raise self.error("Unclosed group", open_pos)
            self.pos += 1
            self.skip_space()
            return e
        if ch in "'\"":
            e = make_literal(self.literal())
            self.skip_space()
            return e
        if ch == "[":
            e = self.char_class()
            self.skip_space()
            return e
        if ch == ".":
            self.pos += 1
            self.skip_space()
            return AnyChar()
        if _is_ident_start(ch):
            name = self.identifier()
            self.skip_space()
            return Nonterminal(name)
        raise self.error(f"Unexpected character {ch!r}")

    # Lexical pieces

    def escape(self) -> int:
        start = self.pos
        self.pos += 1  # backslash
        ch = self.peek()
        if ch and ch in _SIMPLE_ESCAPES:
            self.pos += 1
            return _SIMPLE_ESCAPES[ch]
        if ch == "x":
            digits = self.text[self.pos + 1:self.pos + 3]
            if len(digits) == 2 and all(d in "0123456789abcdefABCDEF" for d in digits):
                self.pos += 3
                return int(digits, 16)
        raise self.error("Invalid escape sequence", start)

    def literal(self) -> bytes:
        quote = self.text[self.pos]
        start = self.pos
        self.pos += 1
        out = bytearray()
        while True:
            ch = self.peek()
            if not ch or ch == "\n":
                raise self.error("Unterminated literal", start)
            if ch == quote:
                self.pos += 1
                return bytes(out)
            if ch == "\\":
                out.append(self.escape())
            else:
                out.extend(ch.encode("utf-8"))
                self.pos += 1

    def class_byte(self) -> int:
        ch = self.peek()
        if ch == "\\":
            return self.escape()
        if not ch.isascii():
            raise self.error("Class members must be ASCII or \\xHH escapes")
        self.pos += 1
        return ord(ch)

    def char_class(self) -> CharClass:
        start = self.pos
        self.pos += 1
        members = set()
        while True:
            ch = self.peek()
            if not ch or ch == "\n":
                raise self.error("Unterminated class", start)
            if ch == "]":
                self.pos += 1
                break
            low = self.class_byte()
            if self.peek() == "-" and self.text[self.pos + 1:self.pos + 2] not in ("]", ""):
                self.pos += 1
                range_pos = self.pos
                high = self.class_byte()
                if high < low:
                    raise self.error("Reversed class range", range_pos)
                members.update(range(low, high + 1))
            else:
                members.add(low)
        if not members:
            raise self.error("Empty class", start)
        return CharClass(frozenset(members))

    # Productions

    def grammar(self) -> List[Tuple[str, Expression]]:
        productions = []
        seen = set()
        self.skip_space()
        if self.at_end():
            raise self.error("Grammar has no productions")
        while not self.at_end():
            name_pos = self.pos
            name = self.identifier()
            self.skip_space()
            if self.peek() != "=":
                raise self.error(f"Expected '=' after {name}")
            self.pos += 1
            self.skip_space()
            body = self.choice()
            if not self.at_end() and not self.at_definition():
                raise self.error(f"Unexpected character {self.peek()!r}")
            if name in seen:
                raise DuplicateProductionError(name, self.line_of(name_pos))
            seen.add(name)
            productions.append((name, body))
        return productions


def parse_grammar(text: str, start: Optional[str] = None) -> Grammar:
    """
    Read grammar source into a Grammar.

    Args:
        text: Grammar source
        start: Start production; the first production when omitted

    Returns:
        Grammar with productions in source order

    Raises:
        GrammarSyntaxError: Malformed source, with line and column
        DuplicateProductionError: A production name defined twice
    """
    productions = _Reader(text).grammar()
    return Grammar(tuple(productions), start or productions[0][0])


# Canonical printer. Precedence: choice 0, sequence 1, prefix 2, suffix 3, primary 4.

def _render(e: Expression) -> Tuple[str, int]:
    if isinstance(e, Choice):
        return " / ".join(_wrap(x, 1) for x in e.items), 0
    if isinstance(e, Sequence):
        return " ".join(_wrap(x, 2) for x in e.items), 1
    if isinstance(e, And):
        return "&" + _wrap(e.expr, 2), 2
    if isinstance(e, Not):
        return "!" + _wrap(e.expr, 2), 2
    if isinstance(e, Option):
        return _wrap(e.expr, 3) + "?", 3
    if isinstance(e, ZeroOrMore):
        return _wrap(e.expr, 3) + "*", 3
    if isinstance(e, OneOrMore):
        return _wrap(e.expr, 3) + "+", 3
    if isinstance(e, Empty):
        return "''", 4
    if isinstance(e, Char):
        return format_bytes(bytes([e.byte])), 4
    if isinstance(e, Literal):
        return format_bytes(e.data), 4
    if isinstance(e, CharClass):
        return format_class(e.members), 4
    if isinstance(e, AnyChar):
        return ".", 4
    if isinstance(e, Nonterminal):
        return e.name, 4
    raise TypeError(f"Not an expression: {e!r}")


def _wrap(e: Expression, min_prec: int) -> str:
    text, prec = _render(e)
    return f"({text})" if prec < min_prec else text


def format_expression(e: Expression) -> str:
    return _render(e)[0]


def pretty_print(g: Grammar) -> str:
    """Serialize a grammar so that parse_grammar(pretty_print(g)) == g."""
    lines = [f"{name} = {format_expression(body)}" for name, body in g.productions]
    return "\n".join(lines) + "\n"
