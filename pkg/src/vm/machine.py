"""
Parsing machine executing a Program over a bounded word stack.

The stack holds saved input positions and return addresses interleaved.
Every instruction writes the result register r; `iffail` is the only
conditional branch.
"""

import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

from src.bytecode.decode import Program
from src.compiler.checks import FailureDisciplineError
from src.compiler.instructions import ARG_KINDS, ArgKind, Op, SUCCESS_ONLY

logger = logging.getLogger(__name__)

DEFAULT_STACK_SLOTS = 512
BYTES_PER_SLOT = 4
STEPS_PER_BYTE = 64
# Extra steps per input byte for every instruction of the program.
STEPS_PER_INSTRUCTION = 16
STEP_BASE = 4096

STACK_OVERFLOW = "STACK_OVERFLOW"
STACK_UNDERFLOW = "STACK_UNDERFLOW"
STEP_LIMIT = "STEP_LIMIT"
PC_OUT_OF_RANGE = "PC_OUT_OF_RANGE"

(_NOP, _SUCC, _FAIL, _CHAR, _ANY, _JUMP, _IFFAIL, _CALL, _RET, _PUSH, _POP, _PEEK, _STR,
 _CMAP, _NCHAR, _NSTR, _OSTR, _OCMAP, _RCMAP, _PEEKPOP, _EXIT) = (int(op) for op in Op)

_SUCCESS_ONLY = frozenset(int(op) for op in SUCCESS_ONLY)


class MachineError(RuntimeError):
    """
    Attributes:
        code: STACK_OVERFLOW, STACK_UNDERFLOW, STEP_LIMIT or PC_OUT_OF_RANGE
    """

    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    """
    Attributes:
        stack_slots: Stack capacity in words
        step_limit: Maximum executed instructions; when None the budget grows
            with both the input and the program (see budget)
        check_discipline: Raise FailureDisciplineError when a matching or call
            instruction executes while r is failure
    """
    stack_slots: int = DEFAULT_STACK_SLOTS
    step_limit: Optional[int] = None
    check_discipline: bool = False

    def __post_init__(self):
        if self.stack_slots < 2:
            raise ValueError(f"stack_slots must be at least 2, got {self.stack_slots}")
        if self.step_limit is not None and self.step_limit < 1:
            raise ValueError(f"step_limit must be positive, got {self.step_limit}")

    def budget(self, input_length: int, program_size: int = 0) -> int:
        """Step budget of one run; by default every instruction may run
        STEPS_PER_INSTRUCTION times per input byte."""
        if self.step_limit is not None:
            return self.step_limit
        per_byte = STEPS_PER_BYTE + STEPS_PER_INSTRUCTION * program_size
        return per_byte * input_length + STEP_BASE


@dataclass(frozen=True)
class ParseResult:
    """
    Attributes:
        matched: The start production matched a prefix of the input
        consumed: Length of the matched prefix, 0 when not matched
        max_stack_depth: High-water mark of the stack in slots
        steps: Executed instructions
        error: Machine error code when the run was aborted
        final_pos: Input position when the machine stopped
    """
    matched: bool
    consumed: int
    max_stack_depth: int
    steps: int
    error: Optional[str] = None
    final_pos: int = 0

    @property
    def stack_bytes(self) -> int:
        return BYTES_PER_SLOT * self.max_stack_depth


@dataclass(frozen=True)
class MachineState:
    pc: int
    pos: int = 0
    stack: Tuple[int, ...] = ()
    r: bool = True
    halted: bool = False

    @property
    def sp(self) -> int:
        return len(self.stack)

    @classmethod
    def initial(cls, program: Program) -> "MachineState":
        return cls(pc=program.start)


def _matches_at(data: bytes, pos: int, members) -> bool:
    return pos < len(data) and data[pos] in members


def step(state: MachineState, program: Program, data: bytes,
         capacity: int = DEFAULT_STACK_SLOTS, check_discipline: bool = False) -> MachineState:
    """
    Apply exactly one transition.

    Raises:
        MachineError: On stack overflow or underflow, or a pc outside the code
        FailureDisciplineError: With check_discipline, when a success-only
            instruction runs while r is failure
    """
    if state.halted:
        return state
    if not 0 <= state.pc < len(program):
        raise MachineError(PC_OUT_OF_RANGE, f"pc {state.pc}")
    instr = program.instructions[state.pc]
    op, arg = instr.op, instr.arg
    if check_discipline and not state.r and op in SUCCESS_ONLY:
        raise FailureDisciplineError(state.pc, f"{op.mnemonic} executed after a failure")
    pc, pos, stack, r = state.pc + 1, state.pos, state.stack, state.r

    if op in (Op.PUSH, Op.CALL) and len(stack) >= capacity:
        raise MachineError(STACK_OVERFLOW, f"capacity {capacity} at pc {state.pc}")
    if op in (Op.POP, Op.PEEK, Op.PEEKPOP, Op.RET) and not stack:
        raise MachineError(STACK_UNDERFLOW, f"{op.mnemonic} at pc {state.pc}")

    if op is Op.SUCC:
        r = True
    elif op is Op.FAIL:
        r = False
    elif op is Op.CHAR:
        r = _matches_at(data, pos, (arg,))
        pos += r
    elif op is Op.ANY:
        r = pos < len(data)
        pos += r
    elif op is Op.CMAP:
        r = _matches_at(data, pos, arg)
        pos += r
    elif op is Op.STR:
        r = data.startswith(arg, pos)
        pos += len(arg) if r else 0
    elif op is Op.NCHAR:
        r = not _matches_at(data, pos, (arg,))
    elif op is Op.NSTR:
        r = not data.startswith(arg, pos)
    elif op is Op.OSTR:
        pos += len(arg) if data.startswith(arg, pos) else 0
        r = True
    elif op is Op.OCMAP:
        pos += _matches_at(data, pos, arg)
        r = True
    elif op is Op.RCMAP:
        while _matches_at(data, pos, arg):
            pos += 1
        r = True
    elif op is Op.JUMP:
        pc = arg
    elif op is Op.IFFAIL:
        if not r:
            pc = arg
    elif op is Op.CALL:
        stack, pc = stack + (state.pc + 1,), arg
    elif op is Op.RET:
        stack, pc = stack[:-1], stack[-1]
    elif op is Op.PUSH:
        stack = stack + (pos,)
    elif op is Op.POP:
        stack = stack[:-1]
    elif op is Op.PEEK:
        pos = stack[-1]
    elif op is Op.PEEKPOP:
        pos, stack = stack[-1], stack[:-1]
    elif op is Op.EXIT:
        return replace(state, halted=True)
    return MachineState(pc, pos, stack, bool(r))


def _operands(program: Program) -> Tuple[List[int], list]:
    """Opcode and argument lists with bitmaps turned into 256-entry tables."""
    ops, args = [], []
    for instr in program.instructions:
        ops.append(int(instr.op))
        if ARG_KINDS[instr.op] is ArgKind.BITMAP:
            table = bytearray(256)
            for b in instr.arg:
                table[b] = 1
            args.append(bytes(table))
        else:
            args.append(instr.arg)
    return ops, args


def run(program: Program, data: bytes, config: RunConfig = RunConfig()) -> ParseResult:
    """
    Execute a program from its start index until `exit`.

    Args:
        program: Linked or decoded program
        data: Input bytes
        config: Stack capacity, step budget and runtime checks

    Returns:
        ParseResult; machine errors are reported in its error field
    """
    data = bytes(data)
    ops, args = _operands(program)
    size = len(ops)
    length = len(data)
    capacity = config.stack_slots
    budget = config.budget(length, size)
    check = config.check_discipline

    stack: List[int] = []
    pc, pos, r = program.start, 0, True
    high = steps = 0
    error = None

    while True:
        if steps >= budget:
            error = STEP_LIMIT
            break
        if not 0 <= pc < size:
            error = PC_OUT_OF_RANGE
            break
        steps += 1
        op = ops[pc]
        if check and not r and op in _SUCCESS_ONLY:
            raise FailureDisciplineError(pc, f"{Op(op).mnemonic} executed after a failure")

        if op == _CHAR:
            if pos < length and data[pos] == args[pc]:
                pos += 1
                r = True
            else:
                r = False
            pc += 1
        elif op == _IFFAIL:
            pc = pc + 1 if r else args[pc]
        elif op == _CMAP:
            if pos < length and args[pc][data[pos]]:
                pos += 1
                r = True
            else:
                r = False
            pc += 1
        elif op == _CALL:
            if len(stack) >= capacity:
                error = STACK_OVERFLOW
                break
            stack.append(pc + 1)
            high = max(high, len(stack))
            pc = args[pc]
        elif op == _RET:
            if not stack:
                error = STACK_UNDERFLOW
                break
            pc = stack.pop()
        elif op == _PUSH:
            if len(stack) >= capacity:
                error = STACK_OVERFLOW
                break
            stack.append(pos)
            high = max(high, len(stack))
            pc += 1
        elif op in (_POP, _PEEK, _PEEKPOP):
            if not stack:
                error = STACK_UNDERFLOW
                break
            if op == _POP:
                stack.pop()
            elif op == _PEEK:
                pos = stack[-1]
            else:
                pos = stack.pop()
            pc += 1
        elif op == _JUMP:
            pc = args[pc]
        elif op == _SUCC:
            r = True
            pc += 1
        elif op == _FAIL:
            r = False
            pc += 1
        elif op == _STR:
            r = data.startswith(args[pc], pos)
            if r:
                pos += len(args[pc])
            pc += 1
        elif op == _RCMAP:
            table = args[pc]
            while pos < length and table[data[pos]]:
                pos += 1
            r = True
            pc += 1
        elif op == _ANY:
            r = pos < length
            if r:
                pos += 1
            pc += 1
        elif op == _NCHAR:
            r = not (pos < length and data[pos] == args[pc])
            pc += 1
        elif op == _NSTR:
            r = not data.startswith(args[pc], pos)
            pc += 1
        elif op == _OSTR:
            if data.startswith(args[pc], pos):
                pos += len(args[pc])
            r = True
            pc += 1
        elif op == _OCMAP:
            if pos < length and args[pc][data[pos]]:
                pos += 1
            r = True
            pc += 1
        elif op == _NOP:
            pc += 1
        elif op == _EXIT:
            return ParseResult(r, pos if r else 0, high, steps, None, pos)

    logger.debug("Run aborted with %s at pc %d after %d step(s)", error, pc, steps)
    return ParseResult(False, 0, high, steps, error, pos)
