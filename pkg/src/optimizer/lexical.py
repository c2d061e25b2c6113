"""
Lexical specialization: runs of characters become `str`, code that decides
on a single byte becomes `cmap`.

Byte tests are found semantically. A candidate region is executed on every
one-byte input and on the empty input; when each trial either consumes
exactly that byte and leaves at the region end, or consumes nothing and
leaves at a single failure target, the region is equivalent to one bitmap
test. This recognizes expanded character classes, choices of characters and
the `!x .` idiom alike.
"""

import logging
from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Tuple

from src.compiler.instructions import FAILURE_SAFE, CodeBlock, Instruction, Label, Op, Row
from src.optimizer.analysis import Rewriter, depth_map

logger = logging.getLogger(__name__)

MAX_STRING = 255
MAX_REGION = 2048

_REGION_OPS = frozenset({Op.PUSH, Op.POP, Op.PEEK, Op.PEEKPOP, Op.SUCC, Op.FAIL, Op.NOP,
                         Op.CHAR, Op.CMAP, Op.ANY, Op.JUMP, Op.IFFAIL})

# Outcome of probing a region: (exit index, relative pos, r)
Outcome = Tuple[int, int, bool]


@dataclass(frozen=True)
class ByteTest:
    """A region [start, end) deciding on one byte."""
    start: int
    end: int
    members: FrozenSet[int]
    fail_index: int


def _piece(row: Row) -> Optional[bytes]:
    if row.op is Op.CHAR:
        return bytes([row.arg])
    if row.op is Op.STR:
        return row.arg
    return None


def _merge_run(rw: Rewriter, start: int) -> bool:
    rows = rw.rows
    first = _piece(rows[start])
    if first is None or start + 1 >= len(rows):
        return False
    guard = rows[start + 1]
    if guard.op is not Op.IFFAIL or guard.labels:
        return False
    fail = guard.arg
    pieces = [first]
    end = start + 2
    implicit = False
    while end < len(rows) and not rows[end].labels:
        piece = _piece(rows[end])
        if piece is None or end + 1 >= len(rows):
            break
        nxt = rows[end + 1]
        if nxt.op is Op.IFFAIL and nxt.arg is fail and not nxt.labels:
            pieces.append(piece)
            end += 2
        elif fail in nxt.labels:
            # The failure target follows directly, so the iffail was dropped.
            pieces.append(piece)
            end += 1
            implicit = True
            break
        else:
            break
    if len(pieces) < 2:
        return False

    data = b"".join(pieces)
    chunks = [data[i:i + MAX_STRING] for i in range(0, len(data), MAX_STRING)]
    new_rows: List[Row] = []
    for chunk in chunks:
        if len(chunk) == 1:
            new_rows.append(Row(Instruction(Op.CHAR, chunk[0])))
        else:
            new_rows.append(Row(Instruction(Op.STR, chunk)))
        new_rows.append(Row(Instruction(Op.IFFAIL, fail)))
    if implicit:
        new_rows.pop()
    if len(new_rows) >= end - start:
        return False
    rw.replace(start, end, new_rows)
    return True


def merge_strings(rw: Rewriter) -> bool:
    changed = False
    index = 0
    while index < len(rw.rows):
        if _merge_run(rw, index):
            changed = True
        index += 1
    return changed


def trial_run(rows: List[Row], targets: List[Optional[int]], start: int, end: int,
              byte: Optional[int], step_bound: int) -> Optional[Outcome]:
    """
    Run rows[start:end] on a one-byte input (empty when byte is None).

    Returns:
        (exit index, pos, r) when control leaves the region with an empty
        relative stack; None when the region reads past the first byte,
        touches the stack below its start, or does not leave in time
    """
    pc, pos, r = start, 0, True
    stack: List[int] = []
    for _ in range(step_bound):
        if pc < start or pc >= end:
            return None if stack else (pc, pos, r)
        op = rows[pc].op
        if op is Op.JUMP:
            pc = targets[pc]
            continue
        if op is Op.IFFAIL:
            pc = pc + 1 if r else targets[pc]
            continue
        if op in (Op.CHAR, Op.CMAP, Op.ANY):
            if pos >= 1:
                return None
            arg = rows[pc].arg
            if op is Op.CHAR:
                r = byte is not None and byte == arg
            elif op is Op.CMAP:
                r = byte is not None and byte in arg
            else:
                r = byte is not None
            if r:
                pos = 1
        elif op is Op.PUSH:
            stack.append(pos)
        elif op in (Op.POP, Op.PEEK, Op.PEEKPOP):
            if not stack:
                return None
            if op is Op.POP:
                stack.pop()
            elif op is Op.PEEK:
                pos = stack[-1]
            else:
                pos = stack.pop()
        elif op is Op.SUCC:
            r = True
        elif op is Op.FAIL:
            r = False
        pc += 1
    return None


def _classify(rows, targets, start: int, end: int) -> Optional[Tuple[FrozenSet[int], int]]:
    bound = 4 * (end - start) + 16
    mentioned = set()
    for row in rows[start:end]:
        if row.op is Op.CHAR:
            mentioned.add(row.arg)
        elif row.op is Op.CMAP:
            mentioned.update(row.arg)
    # Bytes no instruction names all behave alike; one of them stands for the rest.
    others = [b for b in range(256) if b not in mentioned]
    samples = sorted(mentioned) + others[:1] + [None]

    members = set()
    fail_index = None
    for byte in samples:
        outcome = trial_run(rows, targets, start, end, byte, bound)
        if outcome is None:
            return None
        exit_index, pos, r = outcome
        if byte is not None and (exit_index, pos, r) == (end, 1, True):
            members.update(others if others and byte == others[0] else (byte,))
        elif pos == 0 and not r and fail_index in (None, exit_index):
            fail_index = exit_index
        else:
            return None
    if not members or fail_index is None:
        return None
    return frozenset(members), fail_index


def find_byte_test(rw: Rewriter, start: int, depths, index_of, sites) -> Optional[ByteTest]:
    """
    Longest region starting at rows[start] that is equivalent to one byte test.

    Interior labels must only be referenced from inside the region, and
    besides the region end at most one outside row may be targeted.
    """
    rows = rw.rows
    if start not in depths:
        return None
    targets: List[Optional[int]] = [
        index_of[row.arg] if isinstance(row.arg, Label) else None for row in rows
    ]
    before = set()
    forward = {}
    need_end = start + 1
    best = None
    limit = min(len(rows), start + MAX_REGION)
    for end in range(start + 1, limit):
        row = rows[end - 1]
        if row.op not in _REGION_OPS:
            break
        if end - 1 > start:
            for label in row.labels:
                if rw.is_entry(label):
                    return best
                label_sites = sites.get(label, ())
                if any(site < start for site in label_sites):
                    return best
                need_end = max([need_end] + [site + 1 for site in label_sites])
        target = targets[end - 1]
        if target is not None:
            if target < start:
                before.add(target)
            elif target > end:
                forward[target] = forward.get(target, 0) + 1
        forward.pop(end, None)
        if len(before) > 1:
            break
        if end - start <= 2 or end < need_end or depths.get(end) != depths[start]:
            continue
        if len(before) + len(forward) > 1:
            continue
        decided = _classify(rows, targets, start, end)
        if decided is not None:
            best = ByteTest(start, end, decided[0], decided[1])
    return best


def _collapse(rw: Rewriter, test: ByteTest):
    rows = rw.rows
    members = sorted(test.members)
    if len(members) == 1:
        new_rows = [Row(Instruction(Op.CHAR, members[0]))]
    else:
        new_rows = [Row(Instruction(Op.CMAP, test.members))]
    fail_row = rows[test.fail_index]
    if not (test.fail_index == test.end and fail_row.op in FAILURE_SAFE):
        if not fail_row.labels:
            fail_row.labels.append(Label("T"))
        new_rows.append(Row(Instruction(Op.IFFAIL, fail_row.labels[0])))
    rw.replace(test.start, test.end, new_rows)


def collapse_byte_tests(rw: Rewriter) -> bool:
    changed = False
    index = 0
    while index < len(rw.rows):
        if rw.rows[index].op is Op.PUSH:
            test = find_byte_test(rw, index, depth_map(rw), rw.label_index(), rw.reference_sites())
            if test is not None:
                logger.debug("Byte test of %d row(s) at %04d with %d member(s)",
                             test.end - test.start, index, len(test.members))
                _collapse(rw, test)
                changed = True
        index += 1
    return changed


def lexical_pass(code: CodeBlock) -> CodeBlock:
    """
    Specialize character runs into `str` and single-byte decisions into `cmap`.

    Args:
        code: Stack-balanced code

    Returns:
        Equivalent code with at most as many instructions
    """
    rw = Rewriter(code)
    rw.prune_labels()
    while True:
        changed = collapse_byte_tests(rw)
        changed = merge_strings(rw) or changed
        if not changed:
            break
        rw.prune_labels()
    result = rw.rebuild()
    logger.debug("Lexical specialization: %d -> %d instruction(s)", len(code), len(result))
    return result
