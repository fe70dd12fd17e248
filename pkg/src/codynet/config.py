"""Pipeline configuration: one flat record shared by the CLI and library."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .ingest import parse_timestamp


@dataclass
class PipelineConfig:
    """Every knob of the end-to-end run.

    The span is stored as epoch seconds ``[start, end)``; ISO-8601 strings
    are accepted on input. Serialization round-trips losslessly.
    """

    input_path: str = ""
    input_format: str = "jsonl"
    span_start: int = 0
    span_end: int = 0
    d_days: int = 7
    delta_days: int = 1
    top_fraction: float = 0.01
    alpha: float = 0.05
    gamma: float = 1.0
    omega: float = 1.0
    seed: int = 0
    rbo_persistence: float = 0.9
    max_passes: int = 50
    bad_record_tolerance: float = 0.01
    min_active_windows: int = 1
    trend_top_k: int = 5
    align_half_width: int = 3
    analytics_top_m: int = 10
    polarity_seeds: dict[str, int] = field(default_factory=dict)
    output_dir: str = "out"
    figures: bool = True
    threads: int = 1

    def __post_init__(self) -> None:
        self.span_start = parse_timestamp(self.span_start)
        self.span_end = parse_timestamp(self.span_end)
        if self.input_format not in ("jsonl", "csv"):
            raise ValueError(f"input_format must be jsonl or csv, got {self.input_format!r}")
        if self.d_days < 1 or self.delta_days < 1:
            raise ValueError("d_days and delta_days must be >= 1")
        if not 0 < self.top_fraction <= 1:
            raise ValueError(f"top_fraction must be in (0, 1], got {self.top_fraction}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")
        if not 0 < self.rbo_persistence < 1:
            raise ValueError(
                f"rbo_persistence must be in (0, 1), got {self.rbo_persistence}"
            )
        if self.max_passes < 1:
            raise ValueError("max_passes must be >= 1")
        if self.align_half_width < 1:
            raise ValueError("align_half_width must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        self.polarity_seeds = {
            str(tag): int(value) for tag, value in self.polarity_seeds.items()
        }
        for tag, value in self.polarity_seeds.items():
            if value not in (-1, 0, 1):
                raise ValueError(f"polarity seed {tag!r} must be -1, 0 or +1")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, payload: dict) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**payload)

    @classmethod
    def from_json(cls, text: str) -> "PipelineConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")
