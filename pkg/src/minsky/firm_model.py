"""Firm-year records and the hedge / speculative / ponzi classification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from .errors import MissingFieldError, UndefinedRatioError, ValidationError


class MinskyStatus(str, Enum):
    HEDGE = "hedge"
    SPECULATIVE = "speculative"
    PONZI = "ponzi"

    @classmethod
    def parse(cls, value: "str | MinskyStatus") -> "MinskyStatus":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValidationError(f"unknown Minsky status {value!r}") from None


NON_HEDGE = frozenset({MinskyStatus.SPECULATIVE, MinskyStatus.PONZI})

CLASSIFY_FIELDS = ("ebit", "bank_loans", "ebtda", "financial_costs")
_NON_NEGATIVE = ("bank_loans", "financial_costs", "sales", "purchases")


@dataclass(frozen=True)
class FirmRecord:
    """One firm-year of balance-sheet aggregates. ``None`` marks a missing value."""

    firm_id: str
    year: int
    ebit: Optional[float] = None
    bank_loans: Optional[float] = None
    ebtda: Optional[float] = None
    financial_costs: Optional[float] = None
    sales: Optional[float] = None
    purchases: Optional[float] = None
    sector: str = ""

    def __post_init__(self):
        for name in _NON_NEGATIVE:
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValidationError(f"{name} must be >= 0, got {value!r}")

    @property
    def key(self) -> tuple[str, int]:
        return (self.firm_id, self.year)


def _require(record: FirmRecord, name: str) -> float:
    value = getattr(record, name)
    if value is None or (isinstance(value, float) and math.isnan(value)):
        raise MissingFieldError(name, record.firm_id)
    return value


def classify(record: FirmRecord) -> MinskyStatus:
    """Hedge if EBIT >= BL, else speculative if EBTDA >= FC, else ponzi.

    Ties go to the better class. All four fields are required even when the
    first test already decides the outcome, so incomplete rows never slip
    through as hedge.
    """
    ebit, bl, ebtda, fc = (_require(record, name) for name in CLASSIFY_FIELDS)
    if ebit >= bl:
        return MinskyStatus.HEDGE
    if ebtda >= fc:
        return MinskyStatus.SPECULATIVE
    return MinskyStatus.PONZI


def classify_all(records: Iterable[FirmRecord]) -> dict[tuple[str, int], MinskyStatus]:
    return {r.key: classify(r) for r in records}


def statuses_by_firm(records: Iterable[FirmRecord], year: int) -> dict[str, MinskyStatus]:
    """Status of every firm for one year, keyed by firm id."""
    return {r.firm_id: classify(r) for r in records if r.year == year}


def resilience(income: float, debt: float) -> float:
    """Income over debt; the firm's tolerance to the interest rate."""
    if not debt > 0:
        raise UndefinedRatioError(f"resilience undefined for debt={debt!r}")
    return income / debt


def ponzi_condition(income: float, debt: float, rate: float) -> bool:
    """True when income does not cover interest on the debt (strictly)."""
    return income - debt * rate < 0
