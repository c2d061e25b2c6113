"""
Static checks over assembled code: stack balance by abstract interpretation
and the failure discipline of fallible instructions.
"""

from typing import Dict, List

from src.compiler.instructions import CAN_FAIL, FAILURE_SAFE, CodeBlock, Op


class StackBalanceError(ValueError):
    def __init__(self, index: int, message: str):
        super().__init__(f"Stack imbalance at {index:04d}: {message}")
        self.index = index


class FailureDisciplineError(AssertionError):
    def __init__(self, index: int, message: str):
        super().__init__(f"Failure discipline violated at {index:04d}: {message}")
        self.index = index


_STACK_EFFECT = {Op.PUSH: 1, Op.POP: -1, Op.PEEKPOP: -1}
_NEEDS_SLOT = frozenset({Op.POP, Op.PEEK, Op.PEEKPOP})


def stack_depths(code: CodeBlock) -> Dict[int, int]:
    """
    Depth of the frame-local stack before every reachable instruction.

    Calls are depth neutral (the callee is checked on its own); every
    production entry and the prologue start at depth 0.

    Raises:
        StackBalanceError: Inconsistent depths at a join, a pop below the
            frame, a ret or exit with saved positions left, or control
            falling off the end of the code
    """
    depths: Dict[int, int] = {}
    starts = [0] + sorted(code.entry(name) for name in code.entries)
    work: List[int] = []
    for index in starts:
        if index not in depths:
            depths[index] = 0
            work.append(index)
    size = len(code)
    while work:
        index = work.pop()
        depth = depths[index]
        op = code.instructions[index].op
        if op in _NEEDS_SLOT and depth < 1:
            raise StackBalanceError(index, f"{op.mnemonic} on an empty frame")
        if op in (Op.RET, Op.EXIT) and depth != 0:
            raise StackBalanceError(index, f"{op.mnemonic} with {depth} saved position(s)")
        after = depth + _STACK_EFFECT.get(op, 0)
        for nxt in code.successors(index):
            if nxt >= size:
                raise StackBalanceError(index, "control falls off the end of the code")
            seen = depths.get(nxt)
            if seen is None:
                depths[nxt] = after
                work.append(nxt)
            elif seen != after:
                raise StackBalanceError(nxt, f"reached with depth {after} and {seen}")
    return depths


def check_stack_balance(code: CodeBlock) -> None:
    stack_depths(code)


def check_failure_discipline(code: CodeBlock) -> None:
    """
    Every instruction that can set r to failure is followed by one that is
    defined for a failed r.
    """
    reachable = stack_depths(code)
    ops = code.ops()
    for index in sorted(reachable):
        if ops[index] in CAN_FAIL:
            nxt = index + 1
            if nxt >= len(ops) or ops[nxt] not in FAILURE_SAFE:
                follower = ops[nxt].mnemonic if nxt < len(ops) else "end of code"
                raise FailureDisciplineError(index, f"{ops[index].mnemonic} followed by {follower}")
