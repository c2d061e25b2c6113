import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))
from src.bytecode.decode import link
from src.generate.make_inputs import generate_csv, generate_json
from src.grammar.corpus import load_corpus_grammar
from src.optimizer.pipeline import OptimizationConfig, optimize
from src.vm.machine import RunConfig, run


def csv_program(config=OptimizationConfig.all()):
    return link(optimize(load_corpus_grammar("csv"), config).code)


def csv_input(rows: int) -> bytes:
    return generate_csv(np.random.default_rng(11), rows)


@pytest.mark.parametrize("config", [OptimizationConfig.none(), OptimizationConfig.all()])
def test_csv_stack_does_not_grow_with_the_input(config):
    program = csv_program(config)
    small = run(program, csv_input(10), RunConfig(step_limit=10_000_000))
    large = run(program, csv_input(10_000), RunConfig(step_limit=100_000_000))
    assert small.matched and large.matched
    assert small.max_stack_depth == large.max_stack_depth
    assert large.max_stack_depth <= 8


def test_json_stack_grows_linearly_with_nesting():
    program = link(optimize(load_corpus_grammar("json")).code)
    depths = []
    for level in (1, 5, 10):
        data = generate_json(np.random.default_rng(5), level, width=1, containers="array")
        outcome = run(program, data)
        assert outcome.matched and outcome.consumed == len(data)
        depths.append(outcome.max_stack_depth)
    per_level = (depths[1] - depths[0]) / 4
    assert per_level > 0
    assert depths[2] - depths[1] == 5 * per_level


def test_deep_nesting_overflows_a_small_stack():
    program = link(optimize(load_corpus_grammar("json")).code)
    data = generate_json(np.random.default_rng(5), 40, width=1, containers="array")
    outcome = run(program, data, RunConfig(stack_slots=32))
    assert outcome.error == "STACK_OVERFLOW"
    assert run(program, data, RunConfig(stack_slots=4096)).matched


@pytest.mark.slow
def test_one_megabyte_csv_fits_the_default_stack():
    data = csv_input(50_000)
    assert len(data) >= 1_000_000
    outcome = run(csv_program(), data)
    assert outcome.error is None
    assert outcome.matched and outcome.consumed == len(data)
    assert outcome.stack_bytes <= 512 * 4
