import os
import sys

import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))
from src.grammar.corpus import CORPUS_NAMES, load_corpus_grammar
from src.grammar.errors import GrammarValidationError
from src.grammar.expression import Grammar
from src.grammar.peg_parser import parse_grammar
from src.grammar.validate import (
    DiagnosticKind, check_grammar, nullable_productions, validate_grammar,
)


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_corpus_grammars_are_clean(name):
    assert validate_grammar(load_corpus_grammar(name)) == []


def test_unresolved_name():
    g = load_corpus_grammar("log")
    broken = Grammar(tuple(p for p in g.productions if p[0] != "Misc"), g.start)
    diagnostics = validate_grammar(broken)
    assert [str(d) for d in diagnostics] == ["UNRESOLVED(Misc) in Log"]


def test_direct_left_recursion():
    diagnostics = validate_grammar(parse_grammar("A = A 'a' / 'a'"))
    assert [str(d) for d in diagnostics] == ["LEFT_RECURSION(A→A)"]
    assert diagnostics[0].path == ("A", "A")


def test_indirect_left_recursion_through_nullable_prefix():
    diagnostics = validate_grammar(parse_grammar("A = 'x'? B\nB = A 'b'"))
    assert len(diagnostics) == 1
    assert diagnostics[0].kind is DiagnosticKind.LEFT_RECURSION
    assert diagnostics[0].path == ("A", "B", "A")


def test_recursion_after_consumption_is_fine():
    assert validate_grammar(parse_grammar("A = 'a' A / ''")) == []


def test_nullable_repetition():
    diagnostics = validate_grammar(parse_grammar("S = 'x' ('a'?)*"))
    assert len(diagnostics) == 1
    d = diagnostics[0]
    assert d.kind is DiagnosticKind.NULLABLE_REPETITION
    assert d.production == "S"
    assert str(d) == "NULLABLE_REPETITION(S, 2): 'a'?"


def test_nullable_repetition_through_production():
    g = parse_grammar("S = N+\nN = [a-z]*")
    kinds = [d.kind for d in validate_grammar(g)]
    assert kinds == [DiagnosticKind.NULLABLE_REPETITION]
    assert nullable_productions(g) == {"S", "N"}


def test_all_problems_are_collected_in_order():
    g = parse_grammar("A = A / B* \nB = ''\nC = Missing")
    kinds = [d.kind for d in validate_grammar(g)]
    assert kinds == [DiagnosticKind.UNRESOLVED, DiagnosticKind.LEFT_RECURSION,
                     DiagnosticKind.NULLABLE_REPETITION]


def test_check_grammar_raises_with_diagnostics():
    with pytest.raises(GrammarValidationError) as info:
        check_grammar(parse_grammar("A = A"))
    assert len(info.value.diagnostics) == 1
    assert "LEFT_RECURSION(A→A)" in str(info.value)
