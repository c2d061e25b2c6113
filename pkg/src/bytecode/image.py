"""
Bytecode image writer.

Layout (little endian):
    header   magic "PVM1", version, instruction count, string count,
             bitmap count, start index
    code     one 2-byte word per instruction: opcode in bits 15..11,
             argument in bits 10..0
    strings  1-byte length followed by the bytes
    bitmaps  32 bytes each, bit i set when byte value i is a member
"""

import logging
import struct
from typing import FrozenSet, List, Optional, Union

import numpy as np

from src.bytecode.decode import (
    ARG_BITS, ARG_MASK, HEADER_FORMAT, MAGIC, VERSION, Program, link,
)
from src.compiler.instructions import ARG_KINDS, ArgKind, CodeBlock

logger = logging.getLogger(__name__)

MAX_JUMP = (1 << (ARG_BITS - 1)) - 1
MIN_JUMP = -(1 << (ARG_BITS - 1))
MAX_POOL_INDEX = ARG_MASK
MAX_STRING_LENGTH = 255
MAX_INSTRUCTIONS = 0xFFFF


class EncodeError(ValueError):
    """
    Code that does not fit the fixed-width format.

    Attributes:
        code: E_JUMP_RANGE or E_POOL_OVERFLOW
        index: Offending instruction index, when there is one
    """

    def __init__(self, code: str, message: str, index: Optional[int] = None):
        where = f" at instruction {index:04d}" if index is not None else ""
        super().__init__(f"{code}{where}: {message}")
        self.code = code
        self.index = index


def add_header(instruction_count: int, string_count: int, bitmap_count: int, start: int) -> bytes:
    return struct.pack(HEADER_FORMAT, MAGIC, VERSION, instruction_count, string_count, bitmap_count, start)


def encode_bitmap(members: FrozenSet[int]) -> bytes:
    mask = np.zeros(256, dtype=np.uint8)
    mask[sorted(members)] = 1
    return np.packbits(mask, bitorder="little").tobytes()


def encode_words(program: Program) -> List[int]:
    """
    Instruction words of a program.

    Raises:
        EncodeError: E_JUMP_RANGE for a target beyond the signed 11-bit
            offset, E_POOL_OVERFLOW for a pool index beyond 11 bits
    """
    string_index = {s: i for i, s in enumerate(program.strings)}
    bitmap_index = {m: i for i, m in enumerate(program.bitmaps)}
    words = []
    for index, instr in enumerate(program.instructions):
        kind = ARG_KINDS[instr.op]
        if kind is ArgKind.NONE:
            arg = 0
        elif kind is ArgKind.BYTE:
            arg = instr.arg
        elif kind in (ArgKind.LABEL, ArgKind.PRODUCTION):
            offset = instr.arg - index
            if not MIN_JUMP <= offset <= MAX_JUMP:
                raise EncodeError("E_JUMP_RANGE", f"{instr.op.mnemonic} offset {offset} does not fit 11 bits", index)
            arg = offset & ARG_MASK
        else:
            pool = string_index if kind is ArgKind.STRING else bitmap_index
            arg = pool[instr.arg]
            if arg > MAX_POOL_INDEX:
                raise EncodeError("E_POOL_OVERFLOW", f"pool index {arg} does not fit 11 bits", index)
        words.append((int(instr.op) << ARG_BITS) | arg)
    return words


def encode(code: Union[CodeBlock, Program]) -> bytes:
    """
    Encode code into a bytecode image.

    Args:
        code: CodeBlock (linked first) or an already linked Program

    Returns:
        Image bytes; decode() of it equals the linked program

    Raises:
        EncodeError: If an offset, pool index, string or the code size
            exceeds the format
    """
    program = link(code) if isinstance(code, CodeBlock) else code
    if len(program) > MAX_INSTRUCTIONS:
        raise EncodeError("E_POOL_OVERFLOW", f"{len(program)} instructions exceed the 2-byte count")
    for s in program.strings:
        if len(s) > MAX_STRING_LENGTH:
            raise EncodeError("E_POOL_OVERFLOW", f"string of {len(s)} bytes exceeds {MAX_STRING_LENGTH}")

    words = encode_words(program)
    header = add_header(len(words), len(program.strings), len(program.bitmaps), program.start)
    code_section = np.asarray(words, dtype="<u2").tobytes()
    string_pool = b"".join(bytes([len(s)]) + s for s in program.strings)
    bitmap_pool = b"".join(encode_bitmap(m) for m in program.bitmaps)
    logger.debug("Encoded %d instruction(s), %d string(s), %d bitmap(s)",
                 len(words), len(program.strings), len(program.bitmaps))
    return header + code_section + string_pool + bitmap_pool
