"""Check records shared by the verification engine and the CLI."""

from dataclasses import dataclass, field
import math

__all__ = ["VerificationCheck", "PASS", "FAIL", "DIAGNOSTIC"]

PASS = "pass"
FAIL = "fail"
DIAGNOSTIC = "diagnostic"


def _clean(value):
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item"):
        return _clean(value.item())
    return value


@dataclass
class VerificationCheck:
    """Outcome of one verification.

    A gating check passes iff ``max_violation <= tolerance``.  Diagnostic
    checks carry numbers for the report but never gate the suite.
    """

    name: str
    paper_ref: str
    max_violation: float
    tolerance: float
    details: dict = field(default_factory=dict)
    diagnostic: bool = False

    @property
    def status(self):
        if self.diagnostic:
            return DIAGNOSTIC
        return PASS if self.max_violation <= self.tolerance else FAIL

    @property
    def passed(self):
        return self.status != FAIL

    def to_dict(self):
        return {
            "name": self.name,
            "paper_ref": self.paper_ref,
            "status": self.status,
            "max_violation": _clean(float(self.max_violation)),
            "tolerance": _clean(float(self.tolerance)),
            "samples": _clean(self.details),
        }

    def summary(self):
        return (f"{self.status.upper():10s} {self.name:40s} "
                f"violation={self.max_violation:.3e} tol={self.tolerance:.1e}")
