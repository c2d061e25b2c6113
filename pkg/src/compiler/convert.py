"""
Conversion of parsing expressions to parsing instructions.

compile_expression(e, L, emitter) emits the instruction sequence of e whose
failure path branches to L; compile_grammar assembles all productions behind
the prologue `call start; exit`.
"""

import logging
from typing import List

from src.compiler.checks import check_stack_balance
from src.compiler.instructions import CodeBlock, Instruction, Label, Op, Row, from_rows
from src.grammar.expression import (
    And, AnyChar, Char, CharClass, Choice, Empty, Expression, Grammar, Literal,
    Nonterminal, Not, OneOrMore, Option, Sequence, ZeroOrMore,
)
from src.grammar.validate import check_grammar

logger = logging.getLogger(__name__)


class Emitter:
    """Code sink collecting rows; marked labels attach to the next emitted instruction."""

    def __init__(self):
        self.rows: List[Row] = []
        self._pending: List[Label] = []
        self._count = 0

    def label(self, hint: str = "L") -> Label:
        self._count += 1
        return Label(f"{hint}{self._count}")

    def mark(self, label: Label):
        self._pending.append(label)

    def emit(self, op: Op, arg=None):
        self.rows.append(Row(Instruction(op, arg), self._pending))
        self._pending = []

    def finish(self) -> List[Row]:
        if self._pending:
            raise ValueError("Labels marked after the last instruction")
        return self.rows


def _compile_choice(items, fail: Label, em: Emitter):
    end = em.label("E")
    for alt in items[:-1]:
        handler = em.label("H")
        em.emit(Op.PUSH)
        compile_expression(alt, handler, em)
        em.emit(Op.POP)
        em.emit(Op.JUMP, end)
        em.mark(handler)
        em.emit(Op.PEEK)
        em.emit(Op.POP)
        em.emit(Op.SUCC)
    compile_expression(items[-1], fail, em)
    em.mark(end)
    em.emit(Op.NOP)


def compile_expression(e: Expression, fail: Label, em: Emitter):
    """
    Emit τ(e, fail).

    Args:
        e: Expression from a validated grammar
        fail: Label taken when e fails
        em: Code sink
    """
    if isinstance(e, Empty):
        em.emit(Op.NOP)
    elif isinstance(e, Char):
        em.emit(Op.CHAR, e.byte)
        em.emit(Op.IFFAIL, fail)
    elif isinstance(e, AnyChar):
        em.emit(Op.ANY)
        em.emit(Op.IFFAIL, fail)
    elif isinstance(e, Nonterminal):
        em.emit(Op.CALL, e.name)
        em.emit(Op.IFFAIL, fail)
    elif isinstance(e, Literal):
        for b in e.data:
            em.emit(Op.CHAR, b)
            em.emit(Op.IFFAIL, fail)
    elif isinstance(e, CharClass):
        members = sorted(e.members)
        if len(members) == 1:
            compile_expression(Char(members[0]), fail, em)
        else:
            _compile_choice([Char(b) for b in members], fail, em)
    elif isinstance(e, Sequence):
        for item in e.items:
            compile_expression(item, fail, em)
    elif isinstance(e, Choice):
        _compile_choice(e.items, fail, em)
    elif isinstance(e, And):
        restore = em.label("A")
        em.emit(Op.PUSH)
        compile_expression(e.expr, restore, em)
        em.mark(restore)
        em.emit(Op.PEEK)
        em.emit(Op.POP)
        em.emit(Op.IFFAIL, fail)
    elif isinstance(e, Not):
        restore = em.label("N")
        em.emit(Op.PUSH)
        compile_expression(e.expr, restore, em)
        em.emit(Op.PEEK)
        em.emit(Op.POP)
        em.emit(Op.FAIL)
        em.emit(Op.JUMP, fail)
        em.mark(restore)
        em.emit(Op.PEEK)
        em.emit(Op.POP)
        em.emit(Op.SUCC)
    elif isinstance(e, Option):
        handler, end = em.label("H"), em.label("E")
        em.emit(Op.PUSH)
        compile_expression(e.expr, handler, em)
        em.emit(Op.POP)
        em.emit(Op.JUMP, end)
        em.mark(handler)
        em.emit(Op.PEEK)
        em.emit(Op.POP)
        em.emit(Op.SUCC)
        em.mark(end)
        em.emit(Op.NOP)
    elif isinstance(e, ZeroOrMore):
        loop, done = em.label("R"), em.label("X")
        em.mark(loop)
        em.emit(Op.PUSH)
        compile_expression(e.expr, done, em)
        em.emit(Op.POP)
        em.emit(Op.JUMP, loop)
        em.mark(done)
        em.emit(Op.PEEK)
        em.emit(Op.POP)
        em.emit(Op.SUCC)
    elif isinstance(e, OneOrMore):
        compile_expression(e.expr, fail, em)
        compile_expression(ZeroOrMore(e.expr), fail, em)
    else:
        raise TypeError(f"Not an expression: {e!r}")


def compiled_size(e: Expression) -> int:
    """Instruction count of τ(e, L), used as the inlining cost."""
    em = Emitter()
    compile_expression(e, Label("trial"), em)
    return len(em.finish())


def compile_grammar(g: Grammar, validate: bool = True, check: bool = True) -> CodeBlock:
    """
    Assemble the plain code of a grammar.

    Args:
        g: Grammar to compile
        validate: Reject grammars with diagnostics first
        check: Verify stack balance of the result

    Returns:
        CodeBlock with the prologue at index 0 and one entry per production

    Raises:
        GrammarValidationError: If validate is set and the grammar has diagnostics
    """
    if validate:
        check_grammar(g)
    em = Emitter()
    em.emit(Op.CALL, g.start)
    em.emit(Op.EXIT)
    entries = {}
    for name, body in g.productions:
        entry = Label(name)
        entries[name] = entry
        em.mark(entry)
        fail = em.label("F")
        compile_expression(body, fail, em)
        em.mark(fail)
        em.emit(Op.RET)
    code = from_rows(em.finish(), entries, g.start)
    if check:
        check_stack_balance(code)
    logger.debug("Compiled %d production(s) into %d instruction(s)", len(entries), len(code))
    return code
