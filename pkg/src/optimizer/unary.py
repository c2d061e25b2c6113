"""
Unary specialization of predicate, option and repetition skeletons that wrap
a single lexical instruction.

    !c  ->  nchar c        !s  ->  nstr s
    s?  ->  ostr s         m?  ->  ocmap m
    m*  ->  rcmap m

The remaining combinations (for instance `c?` or `m+` lookaheads) keep their
generic code; they are rare in practical grammars.
"""

import logging
from collections import Counter
from typing import Callable, List, Optional, Tuple

from src.compiler.instructions import CodeBlock, Instruction, Label, Op, Row
from src.optimizer.analysis import Rewriter

logger = logging.getLogger(__name__)

_NEGATED = {Op.CHAR: Op.NCHAR, Op.STR: Op.NSTR}
_OPTIONAL = {Op.STR: Op.OSTR, Op.CMAP: Op.OCMAP}
_REPEATED = {Op.CMAP: Op.RCMAP}

# (rows consumed, replacement rows)
Match = Tuple[int, List[Row]]


def _plain(rows: List[Row], index: int, op: Op) -> bool:
    return index < len(rows) and rows[index].op is op and not rows[index].labels


def _restore_length(rows: List[Row], index: int) -> int:
    """Length of a `peek; pop` or `peekpop` restore at index, 0 if there is none."""
    if index >= len(rows):
        return 0
    if rows[index].op is Op.PEEKPOP:
        return 1
    if rows[index].op is Op.PEEK and _plain(rows, index + 1, Op.POP):
        return 2
    return 0


def _owned(row: Row, label: Label, refs: Counter) -> bool:
    """The row carries only label, and label has a single reference."""
    return row.labels == [label] and refs[label] == 1


def _match_not(rows: List[Row], s: int, refs: Counter) -> Optional[Match]:
    # push; x; iffail A; R; fail; jump F; A: R; succ
    if rows[s].op is not Op.PUSH or s + 2 >= len(rows):
        return None
    x, guard = rows[s + 1], rows[s + 2]
    if x.op not in _NEGATED or x.labels or guard.op is not Op.IFFAIL or guard.labels:
        return None
    k = s + 3
    n = _restore_length(rows, k)
    if n == 0 or rows[k].labels:
        return None
    k += n
    if not (_plain(rows, k, Op.FAIL) and _plain(rows, k + 1, Op.JUMP)):
        return None
    fail = rows[k + 1].arg
    a = k + 2
    if a >= len(rows) or not _owned(rows[a], guard.arg, refs):
        return None
    n = _restore_length(rows, a)
    if n == 0 or not _plain(rows, a + n, Op.SUCC):
        return None
    return a + n + 1 - s, [Row(Instruction(_NEGATED[x.op], x.arg)), Row(Instruction(Op.IFFAIL, fail))]


def _match_option(rows: List[Row], s: int, refs: Counter) -> Optional[Match]:
    # push; x; iffail H; pop; jump E; H: R; succ; E:
    if rows[s].op is not Op.PUSH or s + 5 >= len(rows):
        return None
    x, guard = rows[s + 1], rows[s + 2]
    if x.op not in _OPTIONAL or x.labels or guard.op is not Op.IFFAIL or guard.labels:
        return None
    if not (_plain(rows, s + 3, Op.POP) and _plain(rows, s + 4, Op.JUMP)):
        return None
    end_label = rows[s + 4].arg
    h = s + 5
    if not _owned(rows[h], guard.arg, refs):
        return None
    n = _restore_length(rows, h)
    if n == 0 or not _plain(rows, h + n, Op.SUCC):
        return None
    end = h + n + 1
    if end >= len(rows) or end_label not in rows[end].labels:
        return None
    return end - s, [Row(Instruction(_OPTIONAL[x.op], x.arg))]


def _match_star(rows: List[Row], s: int, refs: Counter) -> Optional[Match]:
    # L1: push; x; iffail L2; pop; jump L1; L2: R; succ
    if rows[s].op is not Op.PUSH or s + 5 >= len(rows):
        return None
    x, guard = rows[s + 1], rows[s + 2]
    if x.op not in _REPEATED or x.labels or guard.op is not Op.IFFAIL or guard.labels:
        return None
    if not (_plain(rows, s + 3, Op.POP) and _plain(rows, s + 4, Op.JUMP)):
        return None
    loop = rows[s + 4].arg
    if loop not in rows[s].labels or refs[loop] != 1:
        return None
    h = s + 5
    if not _owned(rows[h], guard.arg, refs):
        return None
    n = _restore_length(rows, h)
    if n == 0 or not _plain(rows, h + n, Op.SUCC):
        return None
    return h + n + 1 - s, [Row(Instruction(_REPEATED[x.op], x.arg))]


_MATCHERS: List[Callable[[List[Row], int, Counter], Optional[Match]]] = [
    _match_not, _match_option, _match_star,
]


def unary_pass(code: CodeBlock) -> CodeBlock:
    """
    Replace the compiled skeletons of `!`, `?` and `*` around one lexical
    instruction by the matching unary instruction.
    """
    rw = Rewriter(code)
    replaced = 0
    # A replacement can turn an enclosing skeleton into a match; sweep again.
    while True:
        rw.prune_labels()
        refs = rw.references()
        before = replaced
        index = 0
        while index < len(rw.rows):
            for matcher in _MATCHERS:
                found = matcher(rw.rows, index, refs)
                if found is not None:
                    length, new_rows = found
                    rw.replace(index, index + length, new_rows)
                    refs = rw.references()
                    replaced += 1
                    break
            else:
                index += 1
        if replaced == before:
            break
    logger.debug("Unary specialization replaced %d skeleton(s)", replaced)
    return rw.rebuild()
