#!/usr/bin/env python3
"""
Command line front end of the grammar toolkit.

Usage:
    python ./src/main.py compile <grammar.peg> [-o out.pvb] [--opt all] [--dump-size]
    python ./src/main.py run <image.pvb> <input> [--stack-slots N] [--step-limit N] [--stats]
    python ./src/main.py dump <image.pvb>
    python ./src/main.py bench <grammar.peg> <input> [-n 5]
    python ./src/main.py stats <grammar.peg> [input] [--chart sizes.png]

Exit status: 0 on a match (or success for dump, bench and stats),
1 when the input does not match, 2 on any error.
"""

import argparse
import json
import logging
import os
import sys
import time
from typing import List, Optional, Tuple

import numpy as np

# Add project root to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.bytecode.decode import decode, link
from src.bytecode.disassemble import disassemble
from src.bytecode.image import encode
from src.grammar.corpus import load_grammar_file
from src.grammar.expression import Grammar
from src.optimizer.pipeline import OptimizationConfig, OptimizationResult, optimize
from src.report.size_chart import create_size_chart
from src.report.stats import BYTES_PER_INSTRUCTION, StatsReport
from src.utils.bin_maker import write_image
from src.utils.config import ToolConfig
from src.utils.read_directories import read_binary_file
from src.vm.machine import ParseResult, RunConfig, run

logger = logging.getLogger(__name__)

EXIT_MATCH = 0
EXIT_MISMATCH = 1
EXIT_ERROR = 2

LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"


def grammar_name(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def compile_file(path: str, config: OptimizationConfig) -> Tuple[Grammar, OptimizationResult]:
    """Parse, validate and optimize a grammar file."""
    grammar = load_grammar_file(path)
    return grammar, optimize(grammar, config)


def timed_run(program, data: bytes, run_config: RunConfig) -> Tuple[ParseResult, float]:
    started = time.perf_counter()
    outcome = run(program, data, run_config)
    return outcome, time.perf_counter() - started


def report_outcome(outcome: ParseResult, input_bytes: int) -> int:
    if outcome.error is not None:
        print(f"✗ Error: {outcome.error} at byte {outcome.final_pos} after {outcome.steps} step(s)")
        return EXIT_ERROR
    if outcome.matched:
        print(f"✓ Matched {outcome.consumed} of {input_bytes} byte(s)")
        return EXIT_MATCH
    print(f"✗ No match ({input_bytes} byte(s))")
    return EXIT_MISMATCH


def cmd_compile(args, tool: ToolConfig) -> int:
    opt = tool.override(opt=args.opt).optimization()
    _, result = compile_file(args.grammar, opt)
    output = args.output or os.path.splitext(args.grammar)[0] + ".pvb"
    image = encode(result.code)
    write_image(output, image)
    print(f"✓ Compiled {args.grammar} -> {output} "
          f"({len(result.code)} instructions, {result.code.code_bytes} code bytes, {len(image)} image bytes)")
    if args.dump_size:
        print(result.code.code_bytes)
    return EXIT_MATCH


def cmd_run(args, tool: ToolConfig) -> int:
    tool = tool.override(stack_slots=args.stack_slots, step_limit=args.step_limit)
    program = decode(read_binary_file(args.image))
    data = read_binary_file(args.input)
    outcome, elapsed = timed_run(program, data, tool.run_config())
    if args.stats:
        report = StatsReport(grammar_name(args.image), None, None, code_bytes=program.code_bytes)
        report.add_run(len(data), outcome, elapsed)
        print(report.to_json(), file=sys.stderr)
    return report_outcome(outcome, len(data))


def cmd_dump(args, tool: ToolConfig) -> int:
    program = decode(read_binary_file(args.image))
    sys.stdout.write(disassemble(program))
    return EXIT_MATCH


def cmd_bench(args, tool: ToolConfig) -> int:
    repetitions = args.repetitions if args.repetitions is not None else tool.bench_repetitions
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    opt = tool.override(opt=args.opt).optimization()
    _, result = compile_file(args.grammar, opt)
    program = link(result.code)
    data = read_binary_file(args.input)
    run_config = tool.run_config()

    times: List[float] = []
    outcome = None
    for _ in range(repetitions):
        outcome, elapsed = timed_run(program, data, run_config)
        times.append(elapsed)
    samples = np.asarray(times)
    mean = float(samples.mean())
    summary = {
        "grammar": grammar_name(args.grammar),
        "input_bytes": len(data),
        "repetitions": repetitions,
        "mean_seconds": mean,
        "stdev_seconds": float(samples.std(ddof=1)) if repetitions > 1 else 0.0,
        "throughput_bytes_per_second": len(data) / mean if mean > 0 else None,
        "matched": outcome.matched,
        "consumed": outcome.consumed,
        "error": outcome.error,
    }
    print(json.dumps(summary))
    return EXIT_ERROR if outcome.error is not None else EXIT_MATCH


def cmd_stats(args, tool: ToolConfig) -> int:
    opt = tool.override(opt=args.opt).optimization()
    grammar, result = compile_file(args.grammar, opt)
    name = grammar_name(args.grammar)
    report = StatsReport.from_optimization(name, len(grammar.productions), result)
    if args.input:
        data = read_binary_file(args.input)
        outcome, elapsed = timed_run(link(result.code), data, tool.run_config())
        report.add_run(len(data), outcome, elapsed)
    print(report.to_json())
    if args.chart:
        sizes = {stage: BYTES_PER_INSTRUCTION * count for stage, count in result.sizes.items()}
        create_size_chart({name: sizes}, args.chart)
        print(f"✓ Size chart saved to: {args.chart}")
    return EXIT_ERROR if report.error is not None else EXIT_MATCH


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON tool configuration (see data/config.json)')
    common.add_argument('--verbose', action='store_true', help='Debug logging and tracebacks')

    parser = argparse.ArgumentParser(
        description="Compile parsing expression grammars to bytecode and run them",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    python ./src/main.py compile data/grammars/csv.peg -o csv.pvb --opt=all
    python ./src/main.py run csv.pvb data/inputs/csv_100.csv --stats
    python ./src/main.py stats data/grammars/json.peg --chart json_sizes.png
        """
    )
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('compile', parents=[common], help='Compile a grammar into a .pvb image')
    p.add_argument('grammar', help='Grammar file (.peg)')
    p.add_argument('-o', '--output', help='Output image (default: grammar path with .pvb)')
    p.add_argument('--opt', help='none, all, or a list of inline,flow,peephole,lex,unary')
    p.add_argument('--dump-size', action='store_true', help='Print the code section size in bytes')
    p.set_defaults(handler=cmd_compile)

    p = sub.add_parser('run', parents=[common], help='Run an image on an input file')
    p.add_argument('image', help='Bytecode image (.pvb)')
    p.add_argument('input', help='Input file')
    p.add_argument('--stack-slots', type=int, help='Stack capacity in slots (default: 512)')
    p.add_argument('--step-limit', type=int, help='Maximum executed instructions')
    p.add_argument('--stats', action='store_true', help='Write a JSON statistics line to stderr')
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser('dump', parents=[common], help='Disassemble an image')
    p.add_argument('image', help='Bytecode image (.pvb)')
    p.set_defaults(handler=cmd_dump)

    p = sub.add_parser('bench', parents=[common], help='Time repeated runs of a grammar')
    p.add_argument('grammar', help='Grammar file (.peg)')
    p.add_argument('input', help='Input file')
    p.add_argument('-n', '--repetitions', type=int, help='Number of runs (default: 5)')
    p.add_argument('--opt', help='Optimization passes (default: all)')
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser('stats', parents=[common], help='Report code sizes, stack use and time')
    p.add_argument('grammar', help='Grammar file (.peg)')
    p.add_argument('input', nargs='?', help='Input file to run')
    p.add_argument('--opt', help='Optimization passes (default: all)')
    p.add_argument('--chart', help='Write the downsizing chart to this PNG')
    p.set_defaults(handler=cmd_stats)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tool = ToolConfig.from_file(args.config)
        level = logging.DEBUG if args.verbose else getattr(logging, tool.log_level.upper())
        logging.basicConfig(level=level, format=LOG_FORMAT)
        return args.handler(args, tool)
    except KeyboardInterrupt:
        print("\n✗ Process interrupted by user")
        return EXIT_ERROR
    except Exception as e:
        if args.verbose:
            import traceback
            traceback.print_exc()
        print(f"✗ Error: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
