import json
import os
import sys
import time

import numpy as np
import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))
from src.bytecode.decode import link
from src.generate.make_inputs import GENERATORS, generate, generate_json
from src.grammar.corpus import CORPUS_NAMES, load_corpus_grammar
from src.optimizer.pipeline import OptimizationConfig, optimize
from src.utils.config import ToolConfig, load_config
from src.vm.machine import RunConfig, run


def test_every_corpus_grammar_has_a_generator():
    assert sorted(GENERATORS) == sorted(CORPUS_NAMES)


def test_generation_is_deterministic():
    assert generate("log", 5, seed=1) == generate("log", 5, seed=1)
    assert generate("log", 5, seed=1) != generate("log", 5, seed=2)


@pytest.mark.parametrize("kind, size", [("csv", 0), ("json", 0), ("utf8", 0)])
def test_empty_sizes(kind, size):
    data = generate(kind, size)
    program = link(optimize(load_corpus_grammar(kind)).code)
    outcome = run(program, data)
    assert outcome.matched and outcome.consumed == len(data)


def test_generator_errors():
    with pytest.raises(ValueError):
        generate("yaml", 3)
    with pytest.raises(ValueError):
        generate("csv", -1)
    with pytest.raises(ValueError):
        generate_json(np.random.default_rng(0), 2, containers="set")


def test_json_containers():
    rng = np.random.default_rng(0)
    assert generate_json(rng, 3, width=1, containers="array").startswith(b"[[[")
    assert generate_json(rng, 1, containers="object").startswith(b'{"')


def test_default_config_file_matches_the_defaults():
    path = os.path.join(os.path.dirname(__file__), '..', '..', 'data', 'config.json')
    assert ToolConfig.from_file(path) == ToolConfig()
    assert ToolConfig.from_file(None) == ToolConfig()


def test_config_conversions(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"stack_slots": 64, "step_limit": 1000, "opt": "lex,unary"}))
    config = ToolConfig.from_file(str(path))
    assert config.run_config() == RunConfig(64, 1000, False)
    assert config.optimization() == OptimizationConfig.from_names("lexical,unary")
    assert config.override(stack_slots=None, step_limit=5).step_limit == 5
    assert config.override(stack_slots=None).stack_slots == 64


@pytest.mark.parametrize("values", [
    {"log_level": "LOUD"},
    {"bench_repetitions": 0},
    {"recursion_limit": 100},
    {"opt": "inline,fold"},
    {"stack_slots": 1},
    {"unknown": True},
])
def test_config_validation(values):
    with pytest.raises(ValueError):
        ToolConfig.from_dict(values)


def test_config_file_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / "missing.json"))
    path = tmp_path / "list.json"
    path.write_text("[1, 2]")
    with pytest.raises(ValueError):
        load_config(str(path))


@pytest.mark.slow
def test_run_time_is_near_linear():
    program = link(optimize(load_corpus_grammar("csv")).code)
    budget = RunConfig(step_limit=100_000_000)

    def best_time(data: bytes) -> float:
        times = []
        for _ in range(3):
            started = time.perf_counter()
            outcome = run(program, data, budget)
            times.append(time.perf_counter() - started)
            assert outcome.matched and outcome.consumed == len(data)
        return min(times)

    rows = [5_000, 10_000, 20_000]
    timings = [best_time(generate("csv", n, seed=4)) for n in rows]
    for small, large in zip(timings, timings[1:]):
        assert 1.5 <= large / small <= 2.5
