"""
Well-formedness checks over a Grammar.

Diagnostics are returned, never raised; an empty list means the grammar can
be compiled and interpreted.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Set, Tuple

from src.grammar.errors import GrammarValidationError
from src.grammar.expression import (
    And, Choice, Empty, Expression, Grammar, Nonterminal, Not, OneOrMore,
    Option, Sequence, ZeroOrMore, walk,
)
from src.grammar.peg_parser import format_expression

logger = logging.getLogger(__name__)


class DiagnosticKind(Enum):
    UNRESOLVED = "UNRESOLVED"
    LEFT_RECURSION = "LEFT_RECURSION"
    NULLABLE_REPETITION = "NULLABLE_REPETITION"


@dataclass(frozen=True)
class Diagnostic:
    """
    One problem found in a grammar.

    Attributes:
        kind: What went wrong
        production: Production the problem was found in
        detail: Unresolved name, cycle text or offending repetition body
        path: Production names of a left-recursive cycle, first name repeated at the end
        position: Pre-order index of the offending node inside the production body
    """
    kind: DiagnosticKind
    production: str
    detail: str = ""
    path: Tuple[str, ...] = ()
    position: Optional[int] = None

    def __str__(self) -> str:
        if self.kind is DiagnosticKind.LEFT_RECURSION:
            return f"LEFT_RECURSION({'→'.join(self.path)})"
        if self.kind is DiagnosticKind.UNRESOLVED:
            return f"UNRESOLVED({self.detail}) in {self.production}"
        return f"NULLABLE_REPETITION({self.production}, {self.position}): {self.detail}"


def is_nullable(e: Expression, nullable_names: Set[str]) -> bool:
    """Whether e can succeed without consuming input, given nullable productions."""
    if isinstance(e, (Empty, Option, ZeroOrMore, And, Not)):
        return True
    if isinstance(e, Nonterminal):
        return e.name in nullable_names
    if isinstance(e, Sequence):
        return all(is_nullable(x, nullable_names) for x in e.items)
    if isinstance(e, Choice):
        return any(is_nullable(x, nullable_names) for x in e.items)
    if isinstance(e, OneOrMore):
        return is_nullable(e.expr, nullable_names)
    return False


def nullable_productions(g: Grammar) -> Set[str]:
    """Least fixpoint of nullable production names; unresolved names are not nullable."""
    nullable: Set[str] = set()
    changed = True
    while changed:
        changed = False
        for name, body in g.productions:
            if name not in nullable and is_nullable(body, nullable):
                nullable.add(name)
                changed = True
    return nullable


def left_calls(e: Expression, nullable_names: Set[str]) -> Set[str]:
    """Nonterminals that may be called before e consumes anything."""
    if isinstance(e, Nonterminal):
        return {e.name}
    if isinstance(e, Sequence):
        calls: Set[str] = set()
        for item in e.items:
            calls |= left_calls(item, nullable_names)
            if not is_nullable(item, nullable_names):
                break
        return calls
    if isinstance(e, Choice):
        calls = set()
        for item in e.items:
            calls |= left_calls(item, nullable_names)
        return calls
    if isinstance(e, (Option, ZeroOrMore, OneOrMore, And, Not)):
        return left_calls(e.expr, nullable_names)
    return set()


def _left_cycles(graph: Dict[str, Set[str]], order: List[str]) -> List[Tuple[str, ...]]:
    cycles = []
    seen = set()

    def visit(name: str, path: List[str], on_path: Dict[str, int]):
        for nxt in sorted(graph.get(name, ())):
            if nxt not in graph:
                continue
            if nxt in on_path:
                cycle = path[on_path[nxt]:]
                pivot = cycle.index(min(cycle))
                key = tuple(cycle[pivot:] + cycle[:pivot])
                if key not in seen:
                    seen.add(key)
                    cycles.append(tuple(cycle) + (nxt,))
                continue
            if nxt in done:
                continue
            on_path[nxt] = len(path)
            path.append(nxt)
            visit(nxt, path, on_path)
            path.pop()
            del on_path[nxt]
        done.add(name)

    for root in order:
        done: Set[str] = set()
        visit(root, [root], {root: 0})
    return cycles


def validate_grammar(g: Grammar) -> List[Diagnostic]:
    """
    Collect every diagnostic of a grammar.

    Args:
        g: Grammar to check

    Returns:
        UNRESOLVED, LEFT_RECURSION and NULLABLE_REPETITION diagnostics in
        production order; empty when the grammar is compilable
    """
    diagnostics: List[Diagnostic] = []
    rules = g.rules

    for name, body in g.productions:
        reported = set()
        for node in walk(body):
            if isinstance(node, Nonterminal) and node.name not in rules and node.name not in reported:
                reported.add(node.name)
                diagnostics.append(Diagnostic(DiagnosticKind.UNRESOLVED, name, node.name))

    nullable = nullable_productions(g)
    graph = {name: left_calls(body, nullable) for name, body in g.productions}
    for cycle in _left_cycles(graph, g.names):
        diagnostics.append(Diagnostic(DiagnosticKind.LEFT_RECURSION, cycle[0],
                                      "→".join(cycle), path=cycle))

    for name, body in g.productions:
        for position, node in enumerate(walk(body)):
            if isinstance(node, (ZeroOrMore, OneOrMore)) and is_nullable(node.expr, nullable):
                diagnostics.append(Diagnostic(DiagnosticKind.NULLABLE_REPETITION, name,
                                              format_expression(node.expr), position=position))

    if diagnostics:
        logger.debug("Grammar has %d diagnostic(s)", len(diagnostics))
    return diagnostics


def check_grammar(g: Grammar) -> None:
    """Raise GrammarValidationError when validate_grammar reports anything."""
    diagnostics = validate_grammar(g)
    if diagnostics:
        raise GrammarValidationError(diagnostics)
