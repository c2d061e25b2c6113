"""
Optimization pipeline: inline -> flow -> peephole -> lexical -> unary.

Inlining works on the grammar, the other passes on compiled code. The order
is fixed; lexical runs before unary because the unary forms take `str` and
`cmap` operands.
"""

import logging
from dataclasses import dataclass, field, fields
from typing import Callable, Dict, Tuple

from src.compiler.checks import check_failure_discipline, check_stack_balance
from src.compiler.convert import compile_grammar
from src.compiler.instructions import CodeBlock
from src.grammar.expression import Grammar
from src.grammar.validate import check_grammar
from src.optimizer.flow import flow_pass
from src.optimizer.inline import inline_pass
from src.optimizer.lexical import lexical_pass
from src.optimizer.peephole import peephole_pass
from src.optimizer.unary import unary_pass

logger = logging.getLogger(__name__)

PASS_ORDER = ("inline", "flow", "peephole", "lexical", "unary")

CODE_PASSES: Dict[str, Callable[[CodeBlock], CodeBlock]] = {
    "flow": flow_pass,
    "peephole": peephole_pass,
    "lexical": lexical_pass,
    "unary": unary_pass,
}

_ALIASES = {"lex": "lexical"}


@dataclass(frozen=True)
class OptimizationConfig:
    inline: bool = True
    flow: bool = True
    peephole: bool = True
    lexical: bool = True
    unary: bool = True

    @classmethod
    def none(cls) -> "OptimizationConfig":
        return cls(**{name: False for name in PASS_ORDER})

    @classmethod
    def all(cls) -> "OptimizationConfig":
        return cls()

    @classmethod
    def from_names(cls, text: str) -> "OptimizationConfig":
        """
        Parse `none`, `all` or a comma separated list of pass names.

        Raises:
            ValueError: On an unknown pass name
        """
        text = text.strip().lower()
        if text == "all":
            return cls.all()
        if text in ("none", ""):
            return cls.none()
        selected = set()
        for name in text.split(","):
            name = _ALIASES.get(name.strip(), name.strip())
            if name not in PASS_ORDER:
                raise ValueError(f"Unknown optimization pass: {name} (expected one of {', '.join(PASS_ORDER)})")
            selected.add(name)
        return cls(**{name: name in selected for name in PASS_ORDER})

    def enabled(self) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(self) if getattr(self, f.name))

    def describe(self) -> str:
        names = self.enabled()
        if not names:
            return "none"
        return "all" if len(names) == len(PASS_ORDER) else ",".join(names)


@dataclass(frozen=True)
class OptimizationResult:
    """
    Attributes:
        grammar: Grammar after inlining (the input grammar when inlining is off)
        code: Final code
        sizes: Instruction count of the plain code and after every applied stage
    """
    grammar: Grammar
    code: CodeBlock
    sizes: Dict[str, int] = field(default_factory=dict)

    @property
    def plain_size(self) -> int:
        return self.sizes["plain"]


def optimize(g: Grammar, config: OptimizationConfig = OptimizationConfig(),
             check: bool = True) -> OptimizationResult:
    """
    Compile a grammar through the enabled passes.

    Args:
        g: Grammar to compile
        config: Passes to apply
        check: Verify stack balance and failure discipline of the final code

    Returns:
        OptimizationResult with per-stage instruction counts

    Raises:
        GrammarValidationError: If the grammar has diagnostics
    """
    check_grammar(g)
    code = compile_grammar(g, validate=False)
    sizes = {"plain": len(code)}
    if config.inline:
        g = inline_pass(g)
        code = compile_grammar(g, validate=False)
        sizes["inline"] = len(code)
    for name in PASS_ORDER[1:]:
        if getattr(config, name):
            code = CODE_PASSES[name](code)
            sizes[name] = len(code)
    if check:
        check_stack_balance(code)
        check_failure_discipline(code)
    logger.debug("Optimized with %s: %s", config.describe(), sizes)
    return OptimizationResult(g, code, sizes)
