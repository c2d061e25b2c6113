"""
Static flow analysis removing duplicated position saves.

A push directly after another push (or after a restore to the saved
position) stores a value that is already on top of the stack. The duplicate
slot and the pops that discard it are removed, and every restore that used
it now reads the older slot holding the same position. The pass also drops
nops and jumps to the next instruction.

Saves opening a shape the lexical or unary pass rewrites whole stay: a
region deciding on at most one byte, and `!`/`?` around a character run.
"""

import logging
from typing import Dict, Set

from src.compiler.instructions import CAN_FAIL, FAILURE_SAFE, CodeBlock, Instruction, Label, Op, Row
from src.optimizer.analysis import Rewriter, depth_map, region_calls, region_pops, save_region

logger = logging.getLogger(__name__)

# Instructions that leave pos and the stack untouched.
_NEUTRAL = (Op.SUCC, Op.FAIL, Op.NOP)

_CONSUMING = (Op.CHAR, Op.ANY, Op.CMAP)


def _top_equals_pos(rows, index: int) -> bool:
    """True when the stack top always equals pos on entry to rows[index]."""
    j = index - 1
    while j >= 0 and rows[j].op in _NEUTRAL and not rows[j].labels:
        j -= 1
    if j < 0 or any(rows[k].labels for k in range(j + 1, index + 1)):
        return False
    return rows[j].op in (Op.PUSH, Op.PEEK)


def _reads_one_byte(rows, region: Set[int]) -> bool:
    """No path through the region consumes two bytes back to back."""
    for i in region:
        if rows[i].op is Op.STR:
            return False
        if (rows[i].op in _CONSUMING and i + 2 in region
                and rows[i + 1].op is Op.IFFAIL and rows[i + 2].op in _CONSUMING):
            return False
    return True


def _wraps_char_run(rows, index: int, index_of: Dict[Label, int]) -> bool:
    """rows[index] opens `!s` or `s?` around a run of `char; iffail H`."""
    k, handler = index + 1, None
    while (k + 1 < len(rows) and rows[k].op is Op.CHAR and rows[k + 1].op is Op.IFFAIL
           and handler in (None, rows[k + 1].arg)):
        handler = rows[k + 1].arg
        k += 2
    if handler is None:
        return False
    tail = [row.op for row in rows[k:k + 4]]
    if tail == [Op.PEEK, Op.POP, Op.FAIL, Op.JUMP]:
        h = k + 4
    elif tail[:2] == [Op.POP, Op.JUMP] and index_of[rows[k + 1].arg] == k + 5:
        h = k + 2
    else:
        return False
    return index_of[handler] == h and [row.op for row in rows[h:h + 3]] == [Op.PEEK, Op.POP, Op.SUCC]


def _kept_for_specialization(rw: Rewriter, index: int, region: Set[int],
                             index_of: Dict[Label, int]) -> bool:
    if region_calls(rw, region):
        return False
    return _reads_one_byte(rw.rows, region) or _wraps_char_run(rw.rows, index, index_of)


def _eliminate_duplicate_save(rw: Rewriter) -> bool:
    rows = rw.rows
    depths = depth_map(rw)
    index_of = rw.label_index()
    for index, row in enumerate(rows):
        if row.op is not Op.PUSH or row.labels or not _top_equals_pos(rows, index):
            continue
        region = save_region(rw, index, depths, index_of)
        if region is None or _kept_for_specialization(rw, index, region, index_of):
            continue
        for pop in reversed(region_pops(rw, region, depths[index] + 1, depths)):
            if rows[pop].op is Op.PEEKPOP:
                rows[pop] = Row(Instruction(Op.PEEK), rows[pop].labels)
            else:
                rw.delete(pop)
        rw.delete(index)
        logger.debug("Removed duplicate save at %04d", index)
        return True
    return False


def _reuse_restored_slot(rw: Rewriter) -> bool:
    """peek; pop; succ; push  ->  peek; succ  (the slot already holds pos)."""
    rows = rw.rows
    depths = None
    for index in range(len(rows) - 3):
        ops = [rows[index + k].op for k in range(4)]
        if ops != [Op.PEEK, Op.POP, Op.SUCC, Op.PUSH]:
            continue
        if any(rows[index + k].labels for k in (1, 2, 3)):
            continue
        if depths is None:
            depths = depth_map(rw)
        index_of = rw.label_index()
        region = save_region(rw, index + 3, depths, index_of)
        if region is None or _kept_for_specialization(rw, index + 3, region, index_of):
            continue
        rw.delete(index + 3)
        rw.delete(index + 1)
        logger.debug("Reused restored slot at %04d", index)
        return True
    return False


def _remove_noise(rw: Rewriter) -> bool:
    rows = rw.rows
    index_of = rw.label_index()
    changed = False
    index = 0
    while index < len(rows) - 1:
        row = rows[index]
        to_next = row.op in (Op.JUMP, Op.IFFAIL) and index_of[row.arg] == index + 1
        if row.op is Op.NOP or (row.op is Op.JUMP and to_next):
            rw.delete(index)
        elif row.op is Op.IFFAIL and to_next and (
                rows[index + 1].op in FAILURE_SAFE or index == 0 or rows[index - 1].op not in CAN_FAIL):
            rw.delete(index)
        else:
            index += 1
            continue
        changed = True
        index_of = rw.label_index()
    return changed


def flow_pass(code: CodeBlock) -> CodeBlock:
    """
    Remove redundant saves and control noise until nothing changes.

    Args:
        code: Stack-balanced code

    Returns:
        Code with at most as many instructions, stack-balanced and parsing
        the same inputs
    """
    rw = Rewriter(code)
    rw.prune_labels()
    while True:
        changed = _eliminate_duplicate_save(rw)
        changed = _reuse_restored_slot(rw) or changed
        changed = _remove_noise(rw) or changed
        if not changed:
            break
    result = rw.rebuild()
    logger.debug("Flow analysis: %d -> %d instruction(s)", len(code), len(result))
    return result
