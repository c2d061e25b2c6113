"""Text listing of a linked or decoded program."""

from typing import List

from src.bytecode.decode import Program
from src.compiler.instructions import ARG_KINDS, ArgKind
from src.grammar.expression import format_bytes, format_class


def format_argument(kind: ArgKind, arg) -> str:
    if kind is ArgKind.BYTE:
        return format_bytes(bytes([arg]))
    if kind is ArgKind.STRING:
        return format_bytes(arg)
    if kind is ArgKind.BITMAP:
        return format_class(arg)
    return f"{arg:04d}"


def disassemble_lines(program: Program) -> List[str]:
    lines = []
    for index, instr in enumerate(program.instructions):
        kind = ARG_KINDS[instr.op]
        if kind is ArgKind.NONE:
            lines.append(f"{index:04d} {instr.op.mnemonic}")
        else:
            lines.append(f"{index:04d} {instr.op.mnemonic} {format_argument(kind, instr.arg)}")
    return lines


def disassemble(program: Program) -> str:
    """
    One line per instruction: index, mnemonic and argument.

    Characters and strings are quoted, bitmaps shown as classes and targets
    as absolute indices, e.g. `0003 char 'a'` or `0007 cmap [0-9]`.
    """
    return "\n".join(disassemble_lines(program)) + "\n"
