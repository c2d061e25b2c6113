"""Random grammars, inputs and code blocks shared by the property tests."""

import os
import sys
from typing import Dict, List, Optional

import numpy as np

sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))
from src.bytecode.decode import link
from src.compiler.instructions import (
    ARG_KINDS, ArgKind, CodeBlock, Instruction, Label, Op, Row, from_rows,
)
from src.grammar.expression import (
    And, AnyChar, Char, CharClass, Choice, Empty, Expression, Grammar, Nonterminal,
    Not, OneOrMore, Option, Sequence, ZeroOrMore, make_literal,
)
from src.grammar.validate import validate_grammar
from src.optimizer.pipeline import PASS_ORDER, OptimizationConfig
from src.vm.machine import ParseResult, RunConfig, run

ALPHABET = b"abcxyz,\n"

# none, every single pass, all
CONFIGS: Dict[str, OptimizationConfig] = {"none": OptimizationConfig.none()}
CONFIGS.update({name: OptimizationConfig.from_names(name) for name in PASS_ORDER})
CONFIGS["all"] = OptimizationConfig.all()


def _byte(rng: np.random.Generator) -> int:
    return int(ALPHABET[int(rng.integers(0, len(ALPHABET)))])


def random_leaf(rng: np.random.Generator, names: List[str]) -> Expression:
    kind = int(rng.integers(0, 10))
    if kind <= 2:
        return Char(_byte(rng))
    if kind <= 4:
        size = int(rng.integers(1, 5))
        picks = rng.choice(len(ALPHABET), size=size, replace=False)
        return CharClass(frozenset(int(ALPHABET[int(i)]) for i in picks))
    if kind == 5:
        return AnyChar()
    if kind == 6:
        return make_literal(bytes(_byte(rng) for _ in range(int(rng.integers(2, 4)))))
    if kind <= 8 and names:
        return Nonterminal(names[int(rng.integers(0, len(names)))])
    return Empty() if rng.random() < 0.3 else Char(_byte(rng))


def random_expression(rng: np.random.Generator, depth: int, names: List[str]) -> Expression:
    """Expression of nesting depth at most `depth` over ALPHABET."""
    if depth <= 0 or rng.random() < 0.3:
        return random_leaf(rng, names)
    kind = int(rng.integers(0, 7))
    if kind <= 1:
        items = tuple(random_expression(rng, depth - 1, names) for _ in range(int(rng.integers(2, 4))))
        return Sequence(items) if kind == 0 else Choice(items)
    wrapper = (Option, ZeroOrMore, OneOrMore, And, Not)[kind - 2]
    return wrapper(random_expression(rng, depth - 1, names))


def random_grammar(rng: np.random.Generator, productions: int = 3, depth: int = 5) -> Grammar:
    """A grammar without diagnostics; production P0 is the start."""
    names = [f"P{i}" for i in range(productions)]
    for _ in range(1000):
        g = Grammar(tuple((name, random_expression(rng, depth, names)) for name in names))
        if not validate_grammar(g):
            return g
    raise RuntimeError("No valid random grammar found")


def random_input(rng: np.random.Generator, max_length: int = 64) -> bytes:
    length = int(rng.integers(0, max_length + 1))
    return bytes(_byte(rng) for _ in range(length))


def random_code_block(rng: np.random.Generator, max_rows: int = 60) -> CodeBlock:
    """Structurally valid (not necessarily meaningful) code for encoder tests."""
    size = int(rng.integers(3, max_rows + 1))
    labels = [Label(f"L{i}") for i in range(size)]
    entry_rows = sorted(set(int(i) for i in rng.integers(0, size, size=3)) | {0})
    entries = {f"P{k}": labels[i] for k, i in enumerate(entry_rows)}
    strings = [b"ab", b"xyz", b"\x00\xff", b"Jan"]
    ops = list(Op)
    rows = []
    for i in range(size):
        op = ops[int(rng.integers(0, len(ops)))]
        kind = ARG_KINDS[op]
        if kind is ArgKind.BYTE:
            arg = int(rng.integers(0, 256))
        elif kind is ArgKind.STRING:
            arg = strings[int(rng.integers(0, len(strings)))]
        elif kind is ArgKind.BITMAP:
            arg = frozenset(int(b) for b in rng.integers(0, 256, size=int(rng.integers(1, 6))))
        elif kind is ArgKind.LABEL:
            arg = labels[int(rng.integers(0, size))]
        elif kind is ArgKind.PRODUCTION:
            arg = sorted(entries)[int(rng.integers(0, len(entries)))]
        else:
            arg = None
        rows.append(Row(Instruction(op, arg), [labels[i]]))
    return from_rows(rows, entries, "P0")


def run_code(code: CodeBlock, data: bytes, config: Optional[RunConfig] = None) -> ParseResult:
    return run(link(code), data, config or RunConfig())
