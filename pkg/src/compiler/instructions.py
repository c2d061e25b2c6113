"""
Abstract parsing instructions and the labelled code container.

A CodeBlock is the pre-encoding form of a program: instructions whose jump
arguments are Label objects and whose call arguments are production names.
Optimization passes work on a list of Rows (instruction plus the labels
attached to it) and rebuild a CodeBlock afterwards.
"""

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from src.grammar.expression import format_bytes, format_class


class Op(IntEnum):
    NOP = 0
    SUCC = 1
    FAIL = 2
    CHAR = 3
    ANY = 4
    JUMP = 5
    IFFAIL = 6
    CALL = 7
    RET = 8
    PUSH = 9
    POP = 10
    PEEK = 11
    STR = 12
    CMAP = 13
    NCHAR = 14
    NSTR = 15
    OSTR = 16
    OCMAP = 17
    RCMAP = 18
    PEEKPOP = 19
    EXIT = 20

    @property
    def mnemonic(self) -> str:
        return self.name.lower()


class ArgKind(Enum):
    NONE = "none"
    BYTE = "byte"
    STRING = "string"
    BITMAP = "bitmap"
    LABEL = "label"
    PRODUCTION = "production"


ARG_KINDS: Dict[Op, ArgKind] = {op: ArgKind.NONE for op in Op}
ARG_KINDS.update({
    Op.CHAR: ArgKind.BYTE, Op.NCHAR: ArgKind.BYTE,
    Op.STR: ArgKind.STRING, Op.NSTR: ArgKind.STRING, Op.OSTR: ArgKind.STRING,
    Op.CMAP: ArgKind.BITMAP, Op.OCMAP: ArgKind.BITMAP, Op.RCMAP: ArgKind.BITMAP,
    Op.JUMP: ArgKind.LABEL, Op.IFFAIL: ArgKind.LABEL,
    Op.CALL: ArgKind.PRODUCTION,
})

# Instructions that may leave r in the failure state.
CAN_FAIL = frozenset({Op.CHAR, Op.ANY, Op.STR, Op.CMAP, Op.NCHAR, Op.NSTR, Op.CALL})

# Instructions defined for r = failure.
FAILURE_SAFE = frozenset({Op.IFFAIL, Op.SUCC, Op.RET, Op.PEEK, Op.POP, Op.PEEKPOP,
                          Op.FAIL, Op.JUMP, Op.EXIT})

# Instructions that must only execute while r = success.
SUCCESS_ONLY = frozenset({Op.CHAR, Op.ANY, Op.STR, Op.CMAP, Op.CALL, Op.NCHAR, Op.NSTR,
                          Op.OSTR, Op.OCMAP, Op.RCMAP})

# Control never falls through these.
NO_FALLTHROUGH = frozenset({Op.JUMP, Op.RET, Op.EXIT})


class Label:
    """Jump target placeholder; labels compare by identity."""

    __slots__ = ("name",)

    def __init__(self, name: str = "L"):
        self.name = name

    def __repr__(self) -> str:
        return f"<Label {self.name}>"


Argument = Union[None, int, bytes, FrozenSet[int], Label, str]


@dataclass(frozen=True)
class Instruction:
    op: Op
    arg: Argument = None

    def __post_init__(self):
        kind = ARG_KINDS[self.op]
        ok = {
            ArgKind.NONE: self.arg is None,
            ArgKind.BYTE: isinstance(self.arg, int) and 0 <= self.arg <= 255,
            ArgKind.STRING: isinstance(self.arg, bytes) and len(self.arg) > 0,
            ArgKind.BITMAP: isinstance(self.arg, frozenset) and len(self.arg) > 0,
            ArgKind.LABEL: isinstance(self.arg, (Label, int)),
            ArgKind.PRODUCTION: isinstance(self.arg, (str, int)),
        }[kind]
        if not ok:
            raise ValueError(f"Bad argument for {self.op.mnemonic}: {self.arg!r}")

    def render(self, target: Optional[str] = None) -> str:
        """Mnemonic plus symbolic argument; target overrides the jump rendering."""
        kind = ARG_KINDS[self.op]
        if kind is ArgKind.NONE:
            return self.op.mnemonic
        if target is not None:
            text = target
        elif kind is ArgKind.BYTE:
            text = format_bytes(bytes([self.arg]))
        elif kind is ArgKind.STRING:
            text = format_bytes(self.arg)
        elif kind is ArgKind.BITMAP:
            text = format_class(self.arg)
        elif isinstance(self.arg, Label):
            text = self.arg.name
        else:
            text = str(self.arg)
        return f"{self.op.mnemonic} {text}"


@dataclass
class Row:
    instr: Instruction
    labels: List[Label] = field(default_factory=list)

    @property
    def op(self) -> Op:
        return self.instr.op

    @property
    def arg(self) -> Argument:
        return self.instr.arg


@dataclass(frozen=True)
class CodeBlock:
    """
    Assembled code of a whole grammar.

    Attributes:
        instructions: Instruction sequence; index 0 holds the prologue `call start`
        labels: Label -> instruction index
        entries: Production name -> entry label
        start: Start production name
    """
    instructions: Tuple[Instruction, ...]
    labels: Dict[Label, int]
    entries: Dict[str, Label]
    start: str

    def __len__(self) -> int:
        return len(self.instructions)

    @property
    def code_bytes(self) -> int:
        return 2 * len(self.instructions)

    def target(self, label: Label) -> int:
        return self.labels[label]

    def entry(self, name: str) -> int:
        return self.labels[self.entries[name]]

    def resolve(self, index: int) -> Optional[int]:
        """Absolute target index of a jump, iffail or call; None for other ops."""
        instr = self.instructions[index]
        kind = ARG_KINDS[instr.op]
        if kind is ArgKind.LABEL:
            return self.labels[instr.arg]
        if kind is ArgKind.PRODUCTION:
            return self.entry(instr.arg)
        return None

    def successors(self, index: int) -> List[int]:
        instr = self.instructions[index]
        if instr.op in (Op.RET, Op.EXIT):
            return []
        if instr.op is Op.JUMP:
            return [self.labels[instr.arg]]
        if instr.op is Op.IFFAIL:
            return [index + 1, self.labels[instr.arg]]
        return [index + 1]

    def ops(self) -> List[Op]:
        return [i.op for i in self.instructions]


def to_rows(code: CodeBlock) -> List[Row]:
    rows = [Row(instr) for instr in code.instructions]
    for label, index in code.labels.items():
        rows[index].labels.append(label)
    return rows


def from_rows(rows: List[Row], entries: Dict[str, Label], start: str) -> CodeBlock:
    """
    Rebuild a CodeBlock from rows.

    Raises:
        ValueError: When a referenced label or production entry is not attached to any row
    """
    labels: Dict[Label, int] = {}
    for index, row in enumerate(rows):
        for label in row.labels:
            labels[label] = index
    for row in rows:
        if isinstance(row.arg, Label) and row.arg not in labels:
            raise ValueError(f"Unresolved label {row.arg.name}")
        if row.op is Op.CALL and row.arg not in entries:
            raise ValueError(f"Call to unknown production {row.arg}")
    for name, label in entries.items():
        if label not in labels:
            raise ValueError(f"Entry of {name} is not placed")
    return CodeBlock(tuple(row.instr for row in rows), labels, dict(entries), start)


def format_code(code: CodeBlock) -> str:
    """Labelled listing for logs and test failure messages."""
    names: Dict[int, List[str]] = {}
    for label, index in code.labels.items():
        names.setdefault(index, []).append(label.name)
    lines = []
    for index, instr in enumerate(code.instructions):
        prefix = ",".join(sorted(names.get(index, [])))
        lines.append(f"{prefix:>8} {index:04d} {instr.render()}")
    return "\n".join(lines)
