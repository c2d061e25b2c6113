"""The machine agrees with the direct interpreter under every pass selection."""

import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))
from src.bytecode.decode import link
from src.compiler.instructions import format_code
from src.generate.make_inputs import generate
from src.grammar.corpus import CORPUS_NAMES, load_corpus_grammar
from src.grammar.interpreter import OracleLimitError, interpret
from src.grammar.peg_parser import pretty_print
from src.optimizer.pipeline import optimize
from src.test.grammar_fuzz import CONFIGS, random_grammar, random_input, run_code
from src.vm.machine import RunConfig, run

GRAMMARS = 130
INPUTS_PER_GRAMMAR = 10
MIN_PAIRS = 1000
RUN_CONFIG = RunConfig(stack_slots=4096, step_limit=5_000_000, check_discipline=True)


def test_random_grammars_agree_with_the_interpreter():
    rng = np.random.default_rng(2024)
    pairs = set()
    for _ in range(GRAMMARS):
        g = random_grammar(rng)
        inputs = [random_input(rng) for _ in range(INPUTS_PER_GRAMMAR)]
        codes = {name: optimize(g, config).code for name, config in CONFIGS.items()}
        for data in inputs:
            try:
                expected = interpret(g, data, eval_limit=50_000)
            except OracleLimitError:
                continue
            for name, code in codes.items():
                outcome = run_code(code, data, RUN_CONFIG)
                assert outcome.error is None, (name, pretty_print(g), data)
                assert (outcome.matched, outcome.consumed) == (
                    expected.matched, expected.end_pos if expected.matched else 0
                ), f"{name} on {data!r}\n{pretty_print(g)}\n{format_code(code)}"
            pairs.add((pretty_print(g), data))
    assert len(pairs) >= MIN_PAIRS


INPUT_SIZES = {"csv": 15, "log": 8, "xml": 5, "json": 4, "email": 40, "utf8": 60}


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_corpus_grammars_agree_with_the_interpreter(name):
    g = load_corpus_grammar(name)
    inputs = [generate(name, INPUT_SIZES[name], seed) for seed in range(3)]
    # damaged inputs exercise the failure paths
    inputs += [data[:len(data) // 2] + b"\x00" + data[len(data) // 2:] for data in inputs]
    expected = [interpret(g, data) for data in inputs]
    for config_name, config in CONFIGS.items():
        program = link(optimize(g, config).code)
        for data, oracle in zip(inputs, expected):
            # default stack and step budget
            outcome = run(program, data, RunConfig(check_discipline=True))
            assert outcome.error is None, (config_name, outcome.steps, len(data))
            assert (outcome.matched, outcome.consumed) == (
                oracle.matched, oracle.end_pos if oracle.matched else 0
            ), config_name
