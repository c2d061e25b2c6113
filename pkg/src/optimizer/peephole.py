"""Fuse `peek; pop` into `peekpop`."""

import logging

from src.compiler.instructions import CodeBlock, Instruction, Op, Row
from src.optimizer.analysis import Rewriter

logger = logging.getLogger(__name__)


def peephole_pass(code: CodeBlock) -> CodeBlock:
    """
    Replace every `peek; pop` pair by `peekpop`.

    A pop carrying a referenced label is a jump target and stays separate.
    Instructions taking two operands (such as `char; iffail`) are never fused
    because an instruction holds a single argument.
    """
    rw = Rewriter(code)
    rw.prune_labels()
    rows = rw.rows
    fused = 0
    index = 0
    while index < len(rows) - 1:
        if rows[index].op is Op.PEEK and rows[index + 1].op is Op.POP and not rows[index + 1].labels:
            rows[index] = Row(Instruction(Op.PEEKPOP), rows[index].labels)
            del rows[index + 1]
            fused += 1
        index += 1
    logger.debug("Fused %d peek/pop pair(s)", fused)
    return rw.rebuild()
