import os
import subprocess
import sys

import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))
from src.generate.make_inputs import generate
from src.grammar.corpus import load_corpus_grammar
from src.grammar.expression import And, Not
from src.grammar.interpreter import (
    OracleLimitError, OracleRecursionError, OracleResult, interpret,
)
from src.grammar.peg_parser import parse_grammar


@pytest.mark.parametrize("text, data, expected", [
    ("S = 'ab'", b"abc", OracleResult(True, 2)),
    ("S = 'ab'", b"ax", OracleResult(False, 0)),
    ("S = 'a' / 'ab'", b"ab", OracleResult(True, 1)),
    ("S = 'a'* 'b'", b"aaab", OracleResult(True, 4)),
    ("S = 'a'+", b"", OracleResult(False, 0)),
    ("S = 'a'? 'b'", b"b", OracleResult(True, 1)),
    ("S = &'a' .", b"a", OracleResult(True, 1)),
    ("S = !'a' .", b"a", OracleResult(False, 0)),
    ("S = !.", b"", OracleResult(True, 0)),
    ("S = [0-9]+ !.", b"123", OracleResult(True, 3)),
    ("S = ''", b"xyz", OracleResult(True, 0)),
])
def test_basic_semantics(text, data, expected):
    assert interpret(parse_grammar(text), data) == expected


def test_ordered_choice_does_not_backtrack_into_alternatives():
    # 'a' wins, then 'b' fails; the second alternative is never retried.
    g = parse_grammar("S = A 'b'\nA = 'a' / 'ab'")
    assert interpret(g, b"abb") == OracleResult(True, 2)
    assert interpret(g, b"ab") == OracleResult(True, 2)


def test_csv_example():
    assert interpret(load_corpus_grammar("csv"), b"a,b\nc,d\n") == OracleResult(True, 8)


def test_start_position():
    g = parse_grammar("S = 'b'+")
    assert interpret(g, b"abbb", start_pos=1) == OracleResult(True, 4)
    assert interpret(g, b"abbb", start_pos=0) == OracleResult(False, 0)


def test_generated_inputs_match_their_grammars():
    for kind in ("csv", "log", "xml", "email", "utf8"):
        data = generate(kind, 20, seed=3)
        assert interpret(load_corpus_grammar(kind), data) == OracleResult(True, len(data)), kind
    data = generate("json", 4, seed=3)
    assert interpret(load_corpus_grammar("json"), data) == OracleResult(True, len(data))


def test_recursion_limit():
    g = parse_grammar("A = 'a' A / ''")
    assert interpret(g, b"a" * 50, recursion_limit=100).end_pos == 50
    with pytest.raises(OracleRecursionError):
        interpret(g, b"a" * 50, recursion_limit=20)


def test_eval_limit():
    g = parse_grammar("S = .*")
    with pytest.raises(OracleLimitError):
        interpret(g, b"x" * 100, eval_limit=50)


def test_observer_sees_every_evaluation():
    seen = []
    interpret(parse_grammar("S = 'a' / 'b'"), b"b",
              observer=lambda e, pos, result: seen.append((pos, result)))
    # 'a' fails, 'b' matches, the choice and the start call match
    assert seen == [(0, None), (0, 1), (0, 1), (0, 1)]


DEEP_RUN = """
from src.grammar.interpreter import OracleRecursionError, interpret
from src.grammar.peg_parser import parse_grammar
g = parse_grammar("A = 'a' A / ''")
try:
    print(interpret(g, b"a" * {depth}, recursion_limit={limit}).end_pos)
except OracleRecursionError:
    print("limit")
"""


@pytest.mark.slow
@pytest.mark.parametrize("depth, limit, expected", [
    (6000, 10000, "6000"),
    (9000, 5000, "limit"),
])
def test_deep_nesting_in_a_fresh_process(depth, limit, expected):
    # A crash of the host stack would kill the process instead of raising.
    root = os.path.join(os.path.dirname(__file__), '..', '..')
    done = subprocess.run([sys.executable, "-c", DEEP_RUN.format(depth=depth, limit=limit)],
                          cwd=root, capture_output=True, text=True, timeout=300)
    assert done.returncode == 0, done.stderr
    assert done.stdout.strip() == expected


def test_deep_nesting_leaves_the_caller_limit_alone():
    before = sys.getrecursionlimit()
    g = parse_grammar("A = 'a' A / ''")
    assert interpret(g, b"a" * 3000).end_pos == 3000
    assert sys.getrecursionlimit() == before


@pytest.mark.parametrize("text, data", [
    ("S = &('a' 'b') 'a'", b"abc"),
    ("S = !('a' 'c') 'a'", b"abc"),
    ("S = &(A A) .\nA = 'x' / 'y'", b"xyz"),
    ("S = !(A '!') .*\nA = [a-z]+", b"word"),
    ("S = (!'\\n' .)* '\\n'", b"two\nlines\n"),
])
def test_predicates_never_move_the_position(text, data):
    predicates = []

    def watch(e, pos, result):
        if isinstance(e, (And, Not)):
            predicates.append((pos, result))

    interpret(parse_grammar(text), data, observer=watch)
    assert predicates
    for pos, result in predicates:
        assert result in (None, pos)
