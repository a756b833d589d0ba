'''
The RunReport collects what a command was given, what it computed and which
oracle checks it passed, and renders itself as text, JSON or CSV.
'''
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..utils import jsonable, write_csv, write_json

REPORT_SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CHECK_FAILED = 1


@dataclass
class Check:
    """
    One named comparison against an oracle.

    Attributes
    ----------
    name : str
        Short identifier, unique within a report.
    passed : bool
        Outcome.
    observed : float, optional
        The computed quantity.
    expected : float, optional
        The oracle value.
    tolerance : float, optional
        Allowed |observed − expected|.
    oracle : str
        What `expected` comes from.
    """
    name: str
    passed: bool
    observed: float | None = None
    expected: float | None = None
    tolerance: float | None = None
    oracle: str = ""

    @property
    def delta(self) -> float | None:
        if self.observed is None or self.expected is None:
            return None
        return abs(self.observed - self.expected)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "observed": self.observed,
            "expected": self.expected,
            "delta": self.delta,
            "tolerance": self.tolerance,
            "oracle": self.oracle,
        }

    def to_csv_row(self) -> str:
        """Comma-separated row; the oracle text is quoted."""
        cells = [self.observed, self.expected, self.delta, self.tolerance]
        numbers = ",".join("" if v is None else repr(float(v)) for v in cells)
        oracle = self.oracle.replace('"', "'")
        return f'"{self.name}",{str(self.passed).lower()},{numbers},"{oracle}"'

    def __repr__(self):
        status = "PASS" if self.passed else "FAIL"
        if self.delta is None:
            return f"[{status}] {self.name} ({self.oracle})"
        return (f"[{status}] {self.name}: observed={self.observed:.10g} "
                f"expected={self.expected:.10g} delta={self.delta:.3e} "
                f"tol={self.tolerance:.3e} ({self.oracle})")


@dataclass
class RunReport:
    """
    Result of one command: echoed inputs, named outputs and oracle checks.
    """
    command: str
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    table: dict | None = None

    def add_check(self, name: str, observed: float, expected: float, tolerance: float,
                  oracle: str) -> Check:
        """Records |observed − expected| <= tolerance."""
        observed, expected = float(observed), float(expected)
        passed = math.isfinite(observed) and abs(observed - expected) <= tolerance
        check = Check(name, bool(passed), observed, expected, float(tolerance), oracle)
        self.checks.append(check)
        return check

    def add_flag(self, name: str, passed: bool, oracle: str, observed: float | None = None) -> Check:
        """Records a pass/fail property that has no scalar tolerance."""
        check = Check(name, bool(passed), observed=observed, oracle=oracle)
        self.checks.append(check)
        return check

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed_checks(self) -> list:
        return [check.name for check in self.checks if not check.passed]

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.passed else EXIT_CHECK_FAILED

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA_VERSION,
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "checks": [check.to_dict() for check in self.checks],
            "passed": self.passed,
            "notes": self.notes,
        }

    def to_json(self, out_file: str | Path | None = None) -> str:
        return write_json(self.to_dict(), out_file)

    def to_csv(self, out_file: str | Path | None = None) -> str:
        """The numeric `table` as CSV when present, otherwise one row per check."""
        if self.table is not None:
            return write_csv(self.table, out_file)
        lines = ["name,passed,observed,expected,delta,tolerance,oracle"]
        lines += [check.to_csv_row() for check in self.checks]
        text = "\n".join(lines) + "\n"
        if out_file is not None:
            with open(out_file, 'w', encoding="utf-8") as f:
                f.write(text)
        return text

    def render(self) -> str:
        """Human-readable summary."""
        lines = [f"== {self.command} =="]
        lines += [f"  {key}: {value}" for key, value in jsonable(self.inputs).items()]
        lines.append("-- outputs --")
        lines += [f"  {key}: {value}" for key, value in jsonable(self.outputs).items()]
        if self.checks:
            lines.append("-- checks --")
            lines += [f"  {check!r}" for check in self.checks]
        lines += self.notes
        lines.append("OK" if self.passed else f"FAILED: {', '.join(self.failed_checks)}")
        return "\n".join(lines)

    def __repr__(self):
        return (f"RunReport(command={self.command}, checks={len(self.checks)}, "
                f"passed={self.passed})")
