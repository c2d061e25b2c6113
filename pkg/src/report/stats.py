"""
Size, stack and time statistics of one grammar run.

Keys are fixed so the JSON line stays machine readable; a value unknown for
a run (a pass that was not applied, a run that was not made) is null.
"""

import json
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional

from src.optimizer.pipeline import PASS_ORDER, OptimizationResult
from src.vm.machine import BYTES_PER_SLOT, ParseResult

BYTES_PER_INSTRUCTION = 2


@dataclass
class StatsReport:
    grammar: str
    productions: Optional[int]
    plain_code_bytes: Optional[int]
    reduced_code_bytes: Dict[str, Optional[int]] = field(
        default_factory=lambda: {name: None for name in PASS_ORDER})
    code_bytes: Optional[int] = None
    input_bytes: Optional[int] = None
    matched: Optional[bool] = None
    consumed: Optional[int] = None
    max_stack_slots: Optional[int] = None
    max_stack_bytes: Optional[int] = None
    steps: Optional[int] = None
    wall_time_seconds: Optional[float] = None
    error: Optional[str] = None

    @classmethod
    def from_optimization(cls, name: str, productions: int, result: OptimizationResult) -> "StatsReport":
        """Code sizes of every applied stage, in bytes of the code section."""
        report = cls(name, productions, BYTES_PER_INSTRUCTION * result.sizes["plain"])
        for stage in PASS_ORDER:
            if stage in result.sizes:
                report.reduced_code_bytes[stage] = BYTES_PER_INSTRUCTION * result.sizes[stage]
        report.code_bytes = result.code.code_bytes
        return report

    def add_run(self, input_bytes: int, outcome: ParseResult, wall_time: float):
        self.input_bytes = input_bytes
        self.matched = outcome.matched
        self.consumed = outcome.consumed
        self.max_stack_slots = outcome.max_stack_depth
        self.max_stack_bytes = BYTES_PER_SLOT * outcome.max_stack_depth
        self.steps = outcome.steps
        self.wall_time_seconds = wall_time
        self.error = outcome.error

    def ratio(self) -> Optional[float]:
        """Final code size relative to the plain code."""
        if self.code_bytes is None or not self.plain_code_bytes:
            return None
        return self.code_bytes / self.plain_code_bytes

    def to_dict(self) -> Dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))
