"""Run configuration: one JSON document, with CLI flags taking precedence."""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from datetime import date, time
from pathlib import Path

from .demand import (
    DEFAULT_BIN_COUNT,
    DEFAULT_BIN_MINUTES,
    DEFAULT_FIRST_BIN,
    DEFAULT_SERVICE_DATE,
    TimeBin,
    default_bins,
)
from .errors import ParseError, ValidationError
from .network import DEFAULT_TRANSFER_MIN

WORKERS_ENV = "TRANSITVULN_WORKERS"


@dataclass(frozen=True)
class BinLayout:
    date: date = DEFAULT_SERVICE_DATE
    start: time = DEFAULT_FIRST_BIN
    duration_min: float = DEFAULT_BIN_MINUTES
    count: int = DEFAULT_BIN_COUNT

    def bins(self) -> tuple[TimeBin, ...]:
        return default_bins(self.date, self.start, self.duration_min, self.count)


@dataclass
class RunConfig:
    stations: str | None = None
    edges: str | None = None
    transfers: str | None = None
    afc: str | None = None
    demand_profile: str | None = None
    cache_file: str | None = None  # reuse the path cache across invocations
    out_dir: str = "out"
    k: int = 8
    tau_star: float = 60.0
    split_rule: str = "inverse"
    eps_time: float = 0.0
    direction_mode: str = "from-top-station"
    cluster_k: int = 4
    cluster_linkage: str = "average"
    seed: int = 0
    workers: int = 0  # 0 = auto (min(8, cpu count)); env var wins over both
    top_m: int = 15
    default_transfer_min: float = DEFAULT_TRANSFER_MIN
    allow_disconnected: bool = False
    bins: BinLayout = field(default_factory=BinLayout)

    def resolved_workers(self) -> int:
        env = os.environ.get(WORKERS_ENV)
        if env:
            return max(1, int(env))
        if self.workers > 0:
            return self.workers
        return max(1, min(8, os.cpu_count() or 1))

    def validate(self, *, need_network: bool = True, need_demand: bool = False) -> list[str]:
        problems = []
        if self.k < 1:
            problems.append(f"k must be >= 1, got {self.k}")
        if not self.tau_star > 0:
            problems.append(f"tau_star must be positive, got {self.tau_star}")
        if self.top_m < 1:
            problems.append(f"top_m must be >= 1, got {self.top_m}")
        if need_network:
            for name in ("stations", "edges"):
                value = getattr(self, name)
                if value is None:
                    problems.append(f"config is missing the {name} file")
                elif not Path(value).exists():
                    problems.append(f"{name} file does not exist: {value}")
            if self.transfers is not None and not Path(self.transfers).exists():
                problems.append(f"transfers file does not exist: {self.transfers}")
        if need_demand:
            if self.afc is None and self.demand_profile is None:
                problems.append("config needs either an afc file or a demand profile")
        if self.afc is not None and not Path(self.afc).exists():
            problems.append(f"afc file does not exist: {self.afc}")
        if self.demand_profile is not None and not Path(self.demand_profile).exists():
            problems.append(f"demand profile does not exist: {self.demand_profile}")
        return problems


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot open config: {exc}", path=path) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc}", path=path) from exc
    return config_from_dict(raw, base_dir=Path(path).parent)


def config_from_dict(raw: dict, base_dir: Path | None = None) -> RunConfig:
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(raw)
    if "bins" in kwargs and kwargs["bins"] is not None:
        spec = kwargs["bins"]
        try:
            kwargs["bins"] = BinLayout(
                date=date.fromisoformat(spec.get("date", DEFAULT_SERVICE_DATE.isoformat())),
                start=time.fromisoformat(spec.get("start", DEFAULT_FIRST_BIN.isoformat())),
                duration_min=float(spec.get("duration_min", DEFAULT_BIN_MINUTES)),
                count=int(spec.get("count", DEFAULT_BIN_COUNT)),
            )
        except (TypeError, ValueError, AttributeError) as exc:
            raise ValidationError(f"malformed bins section: {exc}") from exc
    if base_dir is not None:
        for name in ("stations", "edges", "transfers", "afc", "demand_profile", "cache_file", "out_dir"):
            value = kwargs.get(name)
            if value is not None and not Path(value).is_absolute():
                kwargs[name] = str(base_dir / value)
    try:
        return RunConfig(**kwargs)
    except TypeError as exc:
        raise ValidationError(f"malformed config: {exc}") from exc


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    """Flags win over the config file; None values mean 'not given'."""
    updates = {k: v for k, v in overrides.items() if v is not None}
    return dataclasses.replace(cfg, **updates)
