"""
Direct recursive evaluation of a grammar, used as the reference oracle for
the bytecode machine.
"""

import logging
import sys
import threading
from dataclasses import dataclass
from typing import Callable, Optional

from src.grammar.expression import (
    And, AnyChar, Char, CharClass, Choice, Empty, Expression, Grammar, Literal,
    Nonterminal, Not, OneOrMore, Option, Sequence, ZeroOrMore,
)

logger = logging.getLogger(__name__)

DEFAULT_RECURSION_LIMIT = 10000

# Python frames used per nesting level of nonterminal calls, with headroom.
_FRAMES_PER_CALL = 12
# C stack of the evaluation thread per Python frame, plus a fixed reserve.
_STACK_BYTES_PER_FRAME = 2048
_STACK_RESERVE = 8 << 20
_MAX_STACK_BYTES = 1 << 30

Observer = Callable[[Expression, int, Optional[int]], None]


class OracleRecursionError(RuntimeError):
    """Nonterminal nesting exceeded the configured limit."""

    def __init__(self, limit: int):
        super().__init__(f"Recursion depth limit of {limit} nonterminal calls exceeded")
        self.limit = limit


class OracleLimitError(RuntimeError):
    """The evaluation budget was exhausted."""

    def __init__(self, limit: int):
        super().__init__(f"Evaluation limit of {limit} steps exceeded")
        self.limit = limit


@dataclass(frozen=True)
class OracleResult:
    matched: bool
    end_pos: int


class _Evaluator:
    def __init__(self, g: Grammar, data: bytes, recursion_limit: int,
                 eval_limit: Optional[int], observer: Optional[Observer]):
        self.rules = g.rules
        self.data = data
        self.recursion_limit = recursion_limit
        self.eval_limit = eval_limit
        self.observer = observer
        self.depth = 0
        self.evaluations = 0
        self.dispatch = {
            Empty: self._empty,
            Char: self._char,
            CharClass: self._char_class,
            AnyChar: self._any,
            Literal: self._literal,
            Nonterminal: self._nonterminal,
            Sequence: self._sequence,
            Choice: self._choice,
            Option: self._option,
            ZeroOrMore: self._zero_or_more,
            OneOrMore: self._one_or_more,
            And: self._and,
            Not: self._not,
        }

    def eval(self, e: Expression, pos: int) -> Optional[int]:
        """Return the position after e matched at pos, or None on failure."""
        if self.eval_limit is not None:
            self.evaluations += 1
            if self.evaluations > self.eval_limit:
                raise OracleLimitError(self.eval_limit)
        result = self.dispatch[type(e)](e, pos)
        if self.observer is not None:
            self.observer(e, pos, result)
        return result

    def _empty(self, e: Empty, pos: int) -> Optional[int]:
        return pos

    def _char(self, e: Char, pos: int) -> Optional[int]:
        if pos < len(self.data) and self.data[pos] == e.byte:
            return pos + 1
        return None

    def _char_class(self, e: CharClass, pos: int) -> Optional[int]:
        if pos < len(self.data) and self.data[pos] in e.members:
            return pos + 1
        return None

    def _any(self, e: AnyChar, pos: int) -> Optional[int]:
        return pos + 1 if pos < len(self.data) else None

    def _literal(self, e: Literal, pos: int) -> Optional[int]:
        return pos + len(e.data) if self.data.startswith(e.data, pos) else None

    def _nonterminal(self, e: Nonterminal, pos: int) -> Optional[int]:
        self.depth += 1
        if self.depth > self.recursion_limit:
            raise OracleRecursionError(self.recursion_limit)
        try:
            return self.eval(self.rules[e.name], pos)
        finally:
            self.depth -= 1

    def _sequence(self, e: Sequence, pos: int) -> Optional[int]:
        for item in e.items:
            pos = self.eval(item, pos)
            if pos is None:
                return None
        return pos

    def _choice(self, e: Choice, pos: int) -> Optional[int]:
        for item in e.items:
            result = self.eval(item, pos)
            if result is not None:
                return result
        return None

    def _option(self, e: Option, pos: int) -> Optional[int]:
        result = self.eval(e.expr, pos)
        return pos if result is None else result

    def _zero_or_more(self, e: ZeroOrMore, pos: int) -> Optional[int]:
        while True:
            result = self.eval(e.expr, pos)
            # A non-consuming success would repeat forever.
            if result is None or result == pos:
                return pos
            pos = result

    def _one_or_more(self, e: OneOrMore, pos: int) -> Optional[int]:
        first = self.eval(e.expr, pos)
        if first is None:
            return None
        return self._zero_or_more(ZeroOrMore(e.expr), first)

    def _and(self, e: And, pos: int) -> Optional[int]:
        return pos if self.eval(e.expr, pos) is not None else None

    def _not(self, e: Not, pos: int) -> Optional[int]:
        return pos if self.eval(e.expr, pos) is None else None


def _stack_bytes(frames: int) -> int:
    size = min(frames * _STACK_BYTES_PER_FRAME + _STACK_RESERVE, _MAX_STACK_BYTES)
    return -(-size // 4096) * 4096


def _on_large_stack(fn: Callable[[], Optional[int]], frames: int) -> Optional[int]:
    """
    Run fn on a worker thread whose C stack holds `frames` Python frames.

    The Python recursion limit is raised only as far as that stack holds, so
    deep input ends in RecursionError instead of a crash of the process.
    """
    size = _stack_bytes(frames)
    usable = (size - _STACK_RESERVE) // _STACK_BYTES_PER_FRAME
    outcome = {}

    def target():
        try:
            outcome["end"] = fn()
        except BaseException as exc:
            outcome["error"] = exc

    previous_limit = sys.getrecursionlimit()
    previous_size = threading.stack_size()
    sys.setrecursionlimit(max(previous_limit, usable))
    try:
        threading.stack_size(size)
        try:
            worker = threading.Thread(target=target, name="peg-oracle")
            worker.start()
        finally:
            threading.stack_size(previous_size)
        worker.join()
    finally:
        sys.setrecursionlimit(previous_limit)
    if "error" in outcome:
        raise outcome["error"]
    return outcome["end"]


def interpret(g: Grammar, data: bytes, start_pos: int = 0,
              recursion_limit: int = DEFAULT_RECURSION_LIMIT,
              eval_limit: Optional[int] = None,
              observer: Optional[Observer] = None) -> OracleResult:
    """
    Match the start production of g against data.

    Args:
        g: Grammar without diagnostics
        data: Input bytes
        start_pos: Position to start matching at
        recursion_limit: Maximum nesting of nonterminal calls
        eval_limit: Maximum number of expression evaluations, unlimited when None
        observer: Called as observer(expression, pos, result) after every evaluation

    Returns:
        OracleResult; a failed match reports end_pos == start_pos

    Raises:
        OracleRecursionError: Nesting deeper than recursion_limit, or deeper
            than the host stack allows
        OracleLimitError: More than eval_limit evaluations
    """
    data = bytes(data)
    evaluator = _Evaluator(g, data, recursion_limit, eval_limit, observer)
    frames = recursion_limit * _FRAMES_PER_CALL + 1000
    try:
        end = _on_large_stack(lambda: evaluator.eval(Nonterminal(g.start), start_pos), frames)
    except RecursionError as exc:
        logger.debug("Host recursion exhausted at depth %d", evaluator.depth)
        raise OracleRecursionError(recursion_limit) from exc
    if end is None:
        return OracleResult(False, start_pos)
    return OracleResult(True, end)
