"""Check results and the JSON/markdown report format."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

SCHEMA_VERSION = 1


@dataclass
class CheckResult:
    module: str
    check: str
    passed: bool
    samples: int | None = None
    max_residual: float | None = None
    value: Any = None
    tolerance: float | None = None
    params: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __bool__(self):
        return bool(self.passed)

    def to_dict(self) -> dict:
        d = {
            "module": self.module,
            "check": self.check,
            "params": _jsonable(self.params),
            "samples": self.samples,
            "pass": bool(self.passed),
        }
        if self.max_residual is not None:
            d["max_residual"] = _jsonable(self.max_residual)
        if self.tolerance is not None:
            d["tolerance"] = float(self.tolerance)
        if self.value is not None:
            d["value"] = _jsonable(self.value)
        if self.notes:
            d["notes"] = list(self.notes)
        return d


def _jsonable(x):
    # numpy scalars/arrays and tuples -> plain JSON types
    if hasattr(x, "tolist"):
        x = x.tolist()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return repr(x)
        return x
    return x


@dataclass
class Report:
    suite: str
    seed: int
    config: dict
    entries: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def add(self, result: CheckResult) -> CheckResult:
        self.entries.append(result)
        return result

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "suite": self.suite,
            "seed": self.seed,
            "config": _jsonable(self.config),
            "pass": self.passed,
            "entries": [e.to_dict() for e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_markdown(self) -> str:
        lines = [
            f"# rsk report: {self.suite} (seed {self.seed})",
            "",
            f"overall: {'PASS' if self.passed else 'FAIL'}",
            "",
            "| module | check | params | samples | max residual / value | pass |",
            "|---|---|---|---|---|---|",
        ]
        for e in self.entries:
            shown = e.max_residual if e.max_residual is not None else e.value
            if isinstance(shown, float):
                shown = f"{shown:.3e}"
            params = ", ".join(f"{k}={v}" for k, v in sorted(e.params.items()))
            lines.append(
                f"| {e.module} | {e.check} | {params} | {'' if e.samples is None else e.samples} "
                f"| {shown} | {'PASS' if e.passed else 'FAIL'} |"
            )
        return "\n".join(lines) + "\n"
