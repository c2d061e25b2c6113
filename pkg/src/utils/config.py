import json
import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Optional

from src.optimizer.pipeline import OptimizationConfig
from src.vm.machine import DEFAULT_STACK_SLOTS, RunConfig

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def load_config(config_path: str) -> Dict[str, Any]:
    """
    Load configuration from JSON file.

    Args:
        config_path: Path to the config.json file

    Returns:
        Dictionary containing configuration data

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If the file does not hold a JSON object
    """
    if not os.path.isfile(config_path):
        raise FileNotFoundError(f"Config file not found: {config_path}")
    with open(config_path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ValueError(f"Config file must hold a JSON object: {config_path}")
    return data


@dataclass(frozen=True)
class ToolConfig:
    stack_slots: int = DEFAULT_STACK_SLOTS
    step_limit: Optional[int] = None
    opt: str = "all"
    bench_repetitions: int = 5
    log_level: str = "WARNING"

    def __post_init__(self):
        if self.log_level.upper() not in LOG_LEVELS:
            raise ValueError(f"Unknown log level: {self.log_level}")
        if self.bench_repetitions < 1:
            raise ValueError("bench_repetitions must be at least 1")
        # Validates the pass list early.
        OptimizationConfig.from_names(self.opt)
        self.run_config()

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ToolConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"Unknown config key(s): {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, config_path: Optional[str]) -> "ToolConfig":
        if config_path is None:
            return cls()
        config = cls.from_dict(load_config(config_path))
        logger.debug("Loaded config %s from %s", asdict(config), config_path)
        return config

    def override(self, **values) -> "ToolConfig":
        """Copy with the given values; None means keep the current value."""
        return replace(self, **{k: v for k, v in values.items() if v is not None})

    def optimization(self) -> OptimizationConfig:
        return OptimizationConfig.from_names(self.opt)

    def run_config(self, check_discipline: bool = False) -> RunConfig:
        return RunConfig(self.stack_slots, self.step_limit, check_discipline)
