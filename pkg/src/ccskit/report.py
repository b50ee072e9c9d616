"""Check records and reports shared by the verification suites and the CLI."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field


@dataclass
class Check:
    """One verified quantity: ``passed`` iff ``|value - target| <= tolerance`` (or a boolean outcome)."""

    name: str
    value: object
    target: object = None
    tolerance: float | None = None
    passed: bool = True
    detail: str = ""

    @classmethod
    def close(cls, name: str, value: float, target: float, tolerance: float, detail: str = "") -> "Check":
        value, target = float(value), float(target)
        return cls(name, value, target, tolerance, abs(value - target) <= tolerance, detail)

    @classmethod
    def below(cls, name: str, value: float, tolerance: float, detail: str = "") -> "Check":
        value = float(value)
        return cls(name, value, 0.0, tolerance, value <= tolerance, detail)

    @classmethod
    def flag(cls, name: str, ok: bool, detail: str = "") -> "Check":
        return cls(name, bool(ok), True, None, bool(ok), detail)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if isinstance(self.value, bool) or self.tolerance is None:
            body = f"{self.value}"
        else:
            body = f"{_fmt(self.value)} target {_fmt(self.target)} tol {self.tolerance:.0e}"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"[{status}] {self.name}: {body}{extra}"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


@dataclass
class Report:
    title: str
    checks: list[Check] = field(default_factory=list)
    values: dict = field(default_factory=dict)
    environment: dict = field(default_factory=dict)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, checks) -> None:
        self.checks.extend(checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def text(self) -> str:
        lines = [f"== {self.title}"]
        if self.environment:
            lines.append("   env: " + ", ".join(f"{k}={v}" for k, v in sorted(self.environment.items())))
        for k, v in self.values.items():
            lines.append(f"   {k} = {_fmt(v)}")
        lines.extend("   " + c.line() for c in self.checks)
        lines.append(f"   result: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"title": self.title, "passed": self.passed, "environment": self.environment,
                "values": {k: _jsonable(v) for k, v in self.values.items()},
                "checks": [{**asdict(c), "value": _jsonable(c.value), "target": _jsonable(c.target)} for c in self.checks]}

    def json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _jsonable(v):
    if isinstance(v, (bool, int, float, str)) or v is None:
        return v
    if isinstance(v, (list, tuple)):
        return [_jsonable(a) for a in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(a) for k, a in v.items()}
    try:
        return float(v)
    except (TypeError, ValueError):
        return str(v)
