"""Run reports, baseline regression and plot-data emission."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

SCHEMA_VERSION = "1.0"
DEFAULT_FACTOR = 2.0


def data_path(name: str) -> Path:
    return Path(str(resources.files("hrtlab") / "data" / name))


def load_schema() -> dict:
    return json.loads(data_path("report.schema.json").read_text())


def load_baselines(path: str | Path | None = None) -> dict:
    p = Path(path) if path else data_path("baselines.json")
    return json.loads(p.read_text())


def _num(v):
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, float):
        return repr(v) if not math.isfinite(v) else v
    return v


@dataclass
class FittedConstant:
    name: str
    value: float
    direction: str = "upper"  # "upper": must not exceed factor * baseline; "lower": not below baseline / factor (baseline * factor when baseline <= 0)
    provenance: dict = field(default_factory=dict)
    baseline: float | None = None
    factor: float = DEFAULT_FACTOR
    passed: bool | None = None

    def compare(self, baselines: dict | None) -> None:
        if not baselines or self.name not in baselines:
            return
        b = baselines[self.name]
        self.baseline = float(b["value"])
        self.factor = float(b.get("factor", DEFAULT_FACTOR))
        self.direction = b.get("direction", self.direction)
        if self.direction == "upper":
            self.passed = bool(self.value <= self.factor * self.baseline)
        else:
            floor = self.baseline / self.factor if self.baseline > 0 else self.baseline * self.factor
            self.passed = bool(self.value >= floor)

    def to_json(self) -> dict:
        return {"name": self.name, "value": _num(float(self.value)), "direction": self.direction,
                "baseline": self.baseline, "factor": self.factor, "pass": self.passed,
                "provenance": self.provenance}


@dataclass
class RunReport:
    subcommand: str
    config: dict
    results: dict = field(default_factory=dict)
    constants: list[FittedConstant] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)
    series: dict[str, str] = field(default_factory=dict)
    timings: dict[str, float] | None = None

    def constant(self, name: str, value: float, direction: str = "upper", **provenance) -> FittedConstant:
        c = FittedConstant(name, float(value), direction, provenance)
        self.constants.append(c)
        return c

    def apply_baselines(self, baselines: dict | None) -> None:
        for c in self.constants:
            c.compare(baselines)

    @property
    def ok(self) -> bool:
        return all(self.checks.values()) and all(c.passed is not False for c in self.constants)

    def to_json(self) -> dict:
        out = {"schema_version": SCHEMA_VERSION, "subcommand": self.subcommand, "config": self.config,
               "results": self.results, "fitted_constants": [c.to_json() for c in self.constants],
               "checks": dict(self.checks), "status": "ok" if self.ok else "failed",
               "series": sorted(self.series)}
        if self.timings is not None:
            out["timings"] = self.timings
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True, allow_nan=False, default=str)


def emit_plotdata(report: RunReport, out_dir: str | Path) -> list[Path]:
    """Write one CSV per series; file names are the series keys."""
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in sorted(report.series):
        p = d / name
        p.write_text(report.series[name])
        paths.append(p)
    return paths


def validate(doc: dict) -> None:
    import jsonschema
    jsonschema.validate(doc, load_schema())
