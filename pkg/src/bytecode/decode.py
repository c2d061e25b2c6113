"""
Executable program form and the bytecode image reader.

A Program holds instructions whose arguments are resolved: jump, iffail and
call targets are absolute instruction indices, strings are bytes and bitmaps
are frozensets of byte values. `link` builds one from a CodeBlock without
any range limit, `decode` from an encoded image.
"""

import logging
import struct
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from src.compiler.instructions import ARG_KINDS, ArgKind, CodeBlock, Instruction, Op

logger = logging.getLogger(__name__)

MAGIC = b"PVM1"
VERSION = 1
HEADER_FORMAT = "<4sBHHHH"
HEADER_SIZE = struct.calcsize(HEADER_FORMAT)
BITMAP_BYTES = 32
ARG_BITS = 11
ARG_MASK = (1 << ARG_BITS) - 1


class DecodeError(ValueError):
    """
    Structurally invalid image.

    Attributes:
        code: One of E_MAGIC, E_VERSION, E_TRUNCATED, E_BAD_OPCODE,
            E_BAD_TARGET, E_BAD_POOL_INDEX
        index: Offending instruction index, when there is one
    """

    def __init__(self, code: str, message: str, index: Optional[int] = None):
        where = f" at instruction {index:04d}" if index is not None else ""
        super().__init__(f"{code}{where}: {message}")
        self.code = code
        self.index = index


@dataclass(frozen=True)
class Program:
    instructions: Tuple[Instruction, ...]
    strings: Tuple[bytes, ...]
    bitmaps: Tuple[FrozenSet[int], ...]
    start: int = 0
    symbols: Dict[int, str] = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.instructions)

    @property
    def code_bytes(self) -> int:
        return 2 * len(self.instructions)

    @property
    def image_bytes(self) -> int:
        """Size of the encoded image: header, code and both pools."""
        return (HEADER_SIZE + self.code_bytes
                + sum(1 + len(s) for s in self.strings) + BITMAP_BYTES * len(self.bitmaps))


def link(code: CodeBlock) -> Program:
    """
    Resolve labels and production names to absolute indices and collect the
    deduplicated constant pools in order of first use.
    """
    strings: Dict[bytes, int] = {}
    bitmaps: Dict[FrozenSet[int], int] = {}
    resolved: List[Instruction] = []
    for index, instr in enumerate(code.instructions):
        kind = ARG_KINDS[instr.op]
        if kind in (ArgKind.LABEL, ArgKind.PRODUCTION):
            resolved.append(Instruction(instr.op, code.resolve(index)))
            continue
        if kind is ArgKind.STRING:
            strings.setdefault(instr.arg, len(strings))
        elif kind is ArgKind.BITMAP:
            bitmaps.setdefault(instr.arg, len(bitmaps))
        resolved.append(instr)
    symbols = {code.entry(name): name for name in code.entries}
    return Program(tuple(resolved), tuple(strings), tuple(bitmaps), 0, symbols)


def _read_pools(data: bytes, offset: int, string_count: int,
                bitmap_count: int) -> Tuple[List[bytes], List[FrozenSet[int]], int]:
    strings = []
    for _ in range(string_count):
        if offset >= len(data):
            raise DecodeError("E_TRUNCATED", "string pool ends early")
        length = data[offset]
        if length == 0:
            raise DecodeError("E_BAD_POOL_INDEX", "empty string pool entry")
        if offset + 1 + length > len(data):
            raise DecodeError("E_TRUNCATED", "string pool ends early")
        strings.append(bytes(data[offset + 1:offset + 1 + length]))
        offset += 1 + length

    bitmaps = []
    end = offset + BITMAP_BYTES * bitmap_count
    if end > len(data):
        raise DecodeError("E_TRUNCATED", "bitmap pool ends early")
    if bitmap_count:
        raw = np.frombuffer(data, dtype=np.uint8, count=BITMAP_BYTES * bitmap_count, offset=offset)
        bits = np.unpackbits(raw.reshape(bitmap_count, BITMAP_BYTES), axis=1, bitorder="little")
        for row in bits:
            members = frozenset(np.flatnonzero(row).tolist())
            if not members:
                raise DecodeError("E_BAD_POOL_INDEX", "empty bitmap pool entry")
            bitmaps.append(members)
    return strings, bitmaps, end


def decode(data: bytes) -> Program:
    """
    Validate and load an encoded image.

    Args:
        data: Image bytes

    Returns:
        Program equal to link() of the encoded code

    Raises:
        DecodeError: On any structural problem
    """
    data = bytes(data)
    if len(data) >= len(MAGIC) and data[:len(MAGIC)] != MAGIC:
        raise DecodeError("E_MAGIC", f"bad magic {data[:len(MAGIC)]!r}")
    if len(data) < HEADER_SIZE:
        raise DecodeError("E_TRUNCATED", f"image of {len(data)} byte(s) is shorter than the header")
    _, version, count, string_count, bitmap_count, start = struct.unpack_from(HEADER_FORMAT, data, 0)
    if version != VERSION:
        raise DecodeError("E_VERSION", f"unsupported version {version}")

    code_end = HEADER_SIZE + 2 * count
    if code_end > len(data):
        raise DecodeError("E_TRUNCATED", "code section ends early")
    words = np.frombuffer(data, dtype="<u2", count=count, offset=HEADER_SIZE).tolist() if count else []
    strings, bitmaps, end = _read_pools(data, code_end, string_count, bitmap_count)
    if end != len(data):
        raise DecodeError("E_TRUNCATED", f"{len(data) - end} unexpected trailing byte(s)")
    if count and not 0 <= start < count:
        raise DecodeError("E_BAD_TARGET", f"start index {start} outside the code")

    instructions = []
    for index, word in enumerate(words):
        opcode, arg = word >> ARG_BITS, word & ARG_MASK
        if opcode > max(Op):
            raise DecodeError("E_BAD_OPCODE", f"opcode {opcode}", index)
        op = Op(opcode)
        kind = ARG_KINDS[op]
        if kind is ArgKind.NONE:
            if arg:
                raise DecodeError("E_BAD_OPCODE", f"{op.mnemonic} takes no argument", index)
            instructions.append(Instruction(op))
        elif kind is ArgKind.BYTE:
            if arg > 0xFF:
                raise DecodeError("E_BAD_OPCODE", f"{op.mnemonic} argument {arg} is not a byte", index)
            instructions.append(Instruction(op, arg))
        elif kind in (ArgKind.LABEL, ArgKind.PRODUCTION):
            offset = arg - (1 << ARG_BITS) if arg >> (ARG_BITS - 1) else arg
            target = index + offset
            if not 0 <= target < count:
                raise DecodeError("E_BAD_TARGET", f"target {target} outside the code", index)
            instructions.append(Instruction(op, target))
        elif kind is ArgKind.STRING:
            if arg >= len(strings):
                raise DecodeError("E_BAD_POOL_INDEX", f"string {arg} of {len(strings)}", index)
            instructions.append(Instruction(op, strings[arg]))
        else:
            if arg >= len(bitmaps):
                raise DecodeError("E_BAD_POOL_INDEX", f"bitmap {arg} of {len(bitmaps)}", index)
            instructions.append(Instruction(op, bitmaps[arg]))
    logger.debug("Decoded %d instruction(s), %d string(s), %d bitmap(s)",
                 count, len(strings), len(bitmaps))
    return Program(tuple(instructions), tuple(strings), tuple(bitmaps), start)
