"""Small result records returned by cross-validation routines."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of an exact coefficient-level comparison."""

    passed: bool
    checked_through: int
    first_mismatch: int | None = None
    note: str = ""

    def __bool__(self) -> bool:
        return self.passed


@dataclass
class ConditionReport:
    """One named condition inside a multi-part check."""

    name: str
    passed: bool
    detail: str = ""
    data: dict = field(default_factory=dict)
