"""Pass/fail records for numerical property checks."""
from dataclasses import dataclass, field, asdict


@dataclass(frozen=True)
class Check:
    name: str
    status: str  # "pass" | "fail" | "skip"
    value: float
    threshold: float
    anchor: str
    detail: str = ""
    N: int | None = None
    tol: float | None = None


@dataclass
class DiagnosticsReport:
    title: str
    checks: list = field(default_factory=list)

    def add(self, check):
        self.checks.append(check)
        return check

    def extend(self, other):
        self.checks.extend(other.checks)
        return self

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self):
        """True when no check failed (skips do not count)."""
        return all(c.status != "fail" for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if c.status == "fail"]

    def to_dict(self):
        return {"title": self.title, "passed": self.passed, "checks": [asdict(c) for c in self.checks]}

    def summary(self):
        lines = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            extra = f"  [{c.detail}]" if c.detail else ""
            lines.append(f"  {c.status.upper():4s}  {c.name}: value={c.value:.6g} threshold={c.threshold:.6g}{extra}")
        return "\n".join(lines)
