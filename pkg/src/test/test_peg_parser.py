import os
import sys

import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))
from src.grammar.corpus import CORPUS_NAMES, load_corpus_grammar
from src.grammar.errors import DuplicateProductionError, GrammarSyntaxError
from src.grammar.expression import (
    And, AnyChar, Char, CharClass, Choice, Empty, Literal, Nonterminal, Not,
    OneOrMore, Option, Sequence, ZeroOrMore,
)
from src.grammar.peg_parser import parse_grammar, pretty_print


def body(text: str):
    return parse_grammar(text).productions[0][1]


def test_precedence_of_choice_sequence_and_suffixes():
    assert body("S = 'a' 'b' / 'c'*") == Choice((
        Sequence((Char(ord('a')), Char(ord('b')))),
        ZeroOrMore(Char(ord('c'))),
    ))
    assert body("S = !'a' . &B+\nB = 'b'") == Sequence((
        Not(Char(ord('a'))), AnyChar(), And(OneOrMore(Nonterminal("B"))),
    ))
    assert body("S = ('a' / 'b')?") == Option(Choice((Char(ord('a')), Char(ord('b')))))


def test_literals_and_escapes():
    assert body("S = 'abc'") == Literal(b"abc")
    assert body('S = "x"') == Char(ord('x'))
    assert body("S = ''") == Empty()
    assert body(r"S = '\n\t\\\'\x41'") == Literal(b"\n\t\\'A")
    # Non-ASCII literal text is stored as UTF-8
    assert body("S = 'é'") == Literal("é".encode("utf-8"))


def test_classes_with_ranges_and_escapes():
    assert body("S = [0-9]") == CharClass(frozenset(range(48, 58)))
    assert body(r"S = [\x00-\x7f]") == CharClass(frozenset(range(128)))
    assert body(r"S = [+\-]") == CharClass(frozenset({ord('+'), ord('-')}))
    assert body(r"S = [\]a]") == CharClass(frozenset({ord(']'), ord('a')}))
    # A dash before the closing bracket is a member
    assert body("S = [a-]") == CharClass(frozenset({ord('a'), ord('-')}))


def test_productions_continue_over_lines_and_comments():
    g = parse_grammar("# header\nA = 'a'\n    / 'b'   # trailing\nB = A\n")
    assert g.names == ["A", "B"]
    assert g.start == "A"
    assert g.body("A") == Choice((Char(ord('a')), Char(ord('b'))))


def test_explicit_start():
    g = parse_grammar("A = B\nB = 'b'", start="B")
    assert g.start == "B"


@pytest.mark.parametrize("text, line, column", [
    ("A = 'abc", 1, 5),
    ("A = [a-z", 1, 5),
    ("A = 'a'\nB = [z-a]", 2, 8),
    ("A = 'a' )", 1, 9),
    ("A = '\\q'", 1, 6),
    ("A 'a'", 1, 3),
])
def test_syntax_errors_report_position(text, line, column):
    with pytest.raises(GrammarSyntaxError) as info:
        parse_grammar(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_empty_source_is_rejected():
    with pytest.raises(GrammarSyntaxError):
        parse_grammar("   # only a comment\n")


def test_duplicate_production():
    with pytest.raises(DuplicateProductionError) as info:
        parse_grammar("A = 'a'\nA = 'b'")
    assert info.value.name == "A"
    assert info.value.line == 2


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_pretty_print_reparses_to_the_same_grammar(name):
    g = load_corpus_grammar(name)
    assert parse_grammar(pretty_print(g)) == g


def test_pretty_print_is_canonical():
    g = parse_grammar("S = ('a' 'b') / !(\"c\")*   [a-c\\n,]")
    assert pretty_print(g) == "S = 'a' 'b' / !'c'* [\\n,a-c]\n"


CSV_TEXT = r"""
File  = CSV*
CSV   = Value ( ',' Value )* '\n'
Value = (![,\n] .)*
"""

SYSLOG_TEXT = r"""
File    = Log*
Log     = MONTH ' '  DAY ' ' TIME ' ' HOST ' '
          PROCESS '[' PID ']' Misc ': ' DATA
DAY     = [0-3 ][0-9]
MONTH   = 'Jan'/'Feb'/'Mar'/'Apr'/'May'/'Jun'
          /'Jul'/'Aug'/'Sep'/'Oct'/'Nov'/'Dec'
TIME    = [0-9][0-9] ':' [0-9][0-9] ':' [0-9][0-9]
HOST    = (!' ' .)*
PROCESS = (!'[' .)*
PID     = [0-9]+
DATA    = (!('\n' (MONTH / !.)) .)*
"""


def test_csv_value_is_a_repeated_negated_class():
    g = parse_grammar(CSV_TEXT)
    assert g.body("Value") == ZeroOrMore(Sequence((
        Not(CharClass(frozenset({ord(','), ord('\n')}))), AnyChar(),
    )))
    assert g.body("CSV") == Sequence((
        Nonterminal("Value"),
        ZeroOrMore(Sequence((Char(ord(',')), Nonterminal("Value")))),
        Char(ord('\n')),
    ))


def test_syslog_month_is_a_choice_of_twelve_names():
    g = parse_grammar(SYSLOG_TEXT)
    months = "Jan Feb Mar Apr May Jun Jul Aug Sep Oct Nov Dec".split()
    assert g.body("MONTH") == Choice(tuple(Literal(m.encode()) for m in months))
    assert g.body("DAY") == Sequence((
        CharClass(frozenset(b" 0123")), CharClass(frozenset(range(48, 58))),
    ))
    assert g.body("DATA") == ZeroOrMore(Sequence((
        Not(Sequence((Char(ord('\n')), Choice((Nonterminal("MONTH"), Not(AnyChar())))))),
        AnyChar(),
    )))
    # the line continuation keeps PROCESS .. DATA inside Log
    assert len(g.body("Log").items) == 15
