"""CSV ingestion and output writers.

Every reader validates row by row. Bad rows are collected with their line
number and reason; the read hard-fails when more than ``max_invalid``
(a fraction, default 1%) of the rows are bad.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from .errors import ValidationError
from .estimation import RateSeries, period_key
from .firm_model import FirmRecord
from .network import TradeNetwork

log = logging.getLogger(__name__)

FIRM_COLUMNS = (
    "firm_id", "year", "ebit", "bank_loans", "ebtda",
    "financial_costs", "sales", "purchases", "sector",
)
EDGE_COLUMNS = ("buyer_id", "supplier_id", "weight")
RATE_COLUMNS = ("period", "rate")
POPULATION_COLUMNS = ("year", "n_tot", "n_hedge", "n_ponzi")

SCHEMAS = {
    "firms": FIRM_COLUMNS,
    "edges": EDGE_COLUMNS,
    "rates": RATE_COLUMNS,
    "population": POPULATION_COLUMNS,
}

DEFAULT_MAX_INVALID = 0.01


@dataclass(frozen=True)
class RowError:
    line: int
    reason: str


@dataclass
class Dataset:
    kind: str
    path: str
    rows: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def n_rows(self) -> int:
        return len(self.rows) + len(self.errors)


@dataclass(frozen=True)
class PopulationUpdate:
    year: int
    n_tot: int
    n_hedge: int
    n_ponzi: int

    def __post_init__(self):
        if min(self.n_tot, self.n_hedge, self.n_ponzi) < 0:
            raise ValidationError("population counts must be non-negative")
        if self.n_hedge + self.n_ponzi > self.n_tot:
            raise ValidationError(f"{self.year}: n_hedge + n_ponzi exceeds n_tot")

    @property
    def ponzi_density(self) -> float:
        return self.n_ponzi / self.n_tot

    @property
    def hedge_density(self) -> float:
        return self.n_hedge / self.n_tot


def _optional_float(text: str, name: str):
    text = text.strip()
    if text == "":
        return None
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"{name} is not finite")
    return value


def _int(text: str, name: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"{name} must be an integer")
    return int(value)


def _firm_row(row: dict) -> FirmRecord:
    firm_id = row["firm_id"].strip()
    if not firm_id:
        raise ValueError("empty firm_id")
    values = {name: _optional_float(row[name], name) for name in FIRM_COLUMNS[2:8]}
    return FirmRecord(firm_id=firm_id, year=_int(row["year"], "year"),
                      sector=row["sector"].strip(), **values)


def _edge_row(row: dict) -> tuple[str, str, float]:
    buyer, supplier = row["buyer_id"].strip(), row["supplier_id"].strip()
    if not buyer or not supplier:
        raise ValueError("empty firm id")
    if buyer == supplier:
        raise ValueError("self-loop")
    weight = float(row["weight"])
    if not (weight > 0 and math.isfinite(weight)):
        raise ValueError("weight must be positive")
    return buyer, supplier, weight


def _rate_row(row: dict) -> tuple[str, float]:
    period = row["period"].strip()
    period_key(period)
    rate = float(row["rate"])
    if not (rate > 0 and math.isfinite(rate)):
        raise ValueError("rate must be positive")
    return period, rate


def _population_row(row: dict) -> PopulationUpdate:
    return PopulationUpdate(*(_int(row[c], c) for c in POPULATION_COLUMNS))


_PARSERS: dict[str, Callable[[dict], Any]] = {
    "firms": _firm_row,
    "edges": _edge_row,
    "rates": _rate_row,
    "population": _population_row,
}


def detect_kind(header: Sequence[str]) -> str:
    names = tuple(h.strip() for h in header)
    for kind, columns in SCHEMAS.items():
        if names == columns:
            return kind
    raise ValidationError(f"unrecognised header {','.join(names)!r}")


def read_table(path, kind: str | None = None, max_invalid: float = DEFAULT_MAX_INVALID) -> Dataset:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValidationError(f"{path}: empty file, no header") from None
            found = detect_kind(header)
            if kind is not None and found != kind:
                raise ValidationError(f"{path}: expected {kind} schema, found {found}")
            data = Dataset(found, str(path))
            row_lines = []
            parse = _PARSERS[found]
            columns = SCHEMAS[found]
            for line, cells in enumerate(reader, start=2):
                if not cells or all(not c.strip() for c in cells):
                    continue
                if len(cells) != len(columns):
                    data.errors.append(RowError(line, f"expected {len(columns)} fields, got {len(cells)}"))
                    continue
                try:
                    data.rows.append(parse(dict(zip(columns, cells))))
                    row_lines.append(line)
                except (ValueError, ValidationError) as exc:
                    data.errors.append(RowError(line, str(exc)))
    except UnicodeDecodeError as exc:
        raise ValidationError(f"{path}: not valid UTF-8 ({exc})") from None
    except FileNotFoundError:
        raise ValidationError(f"{path}: file not found") from None

    if found == "firms":
        _reject_duplicates(data, row_lines)
    if data.n_rows == 0:
        data.warnings.append("no data rows")
        log.warning("%s: header only, no data rows", path)
    elif len(data.errors) > max_invalid * data.n_rows:
        listing = "; ".join(f"line {e.line}: {e.reason}" for e in data.errors[:20])
        raise ValidationError(
            f"{path}: {len(data.errors)} of {data.n_rows} rows invalid "
            f"(limit {max_invalid:.1%}): {listing}"
        )
    for e in data.errors:
        log.warning("%s line %d rejected: %s", path, e.line, e.reason)
    return data


def _reject_duplicates(data: Dataset, lines: list[int]) -> None:
    seen = set()
    kept = []
    for record, line in zip(data.rows, lines):
        if record.key in seen:
            data.errors.append(RowError(line, f"duplicate (firm_id, year) {record.key}"))
            continue
        seen.add(record.key)
        kept.append(record)
    data.rows = kept
    data.errors.sort(key=lambda e: e.line)


def ingest(paths: Iterable, max_invalid: float = DEFAULT_MAX_INVALID) -> dict[str, Dataset]:
    """Read each file, detecting its schema from the header."""
    return {str(p): read_table(p, None, max_invalid) for p in paths}


def read_firms(path, max_invalid: float = DEFAULT_MAX_INVALID) -> list[FirmRecord]:
    return read_table(path, "firms", max_invalid).rows


def read_network(path, max_invalid: float = DEFAULT_MAX_INVALID) -> TradeNetwork:
    return TradeNetwork(edges=read_table(path, "edges", max_invalid).rows)


def read_rates(path, max_invalid: float = DEFAULT_MAX_INVALID) -> RateSeries:
    return RateSeries.from_pairs(read_table(path, "rates", max_invalid).rows)


def read_population(path, max_invalid: float = DEFAULT_MAX_INVALID) -> list[PopulationUpdate]:
    return read_table(path, "population", max_invalid).rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    if hasattr(value, "value") and not isinstance(value, (int, str)):
        return str(value.value)
    return str(value)


def write_csv(path, columns: Sequence[str], rows: Iterable[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])


def write_json(path, payload: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n",
                    encoding="utf-8")


def _json_default(obj):
    if hasattr(obj, "value"):
        return obj.value
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj, key=str)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def firm_rows(records: Iterable[FirmRecord]) -> list[dict]:
    return [{c: getattr(r, c) for c in FIRM_COLUMNS} for r in records]


def write_firms(path, records: Iterable[FirmRecord]) -> None:
    write_csv(path, FIRM_COLUMNS, firm_rows(records))


def write_network(path, net: TradeNetwork) -> None:
    write_csv(path, EDGE_COLUMNS,
              ({"buyer_id": b, "supplier_id": s, "weight": w} for b, s, w in net.edges()))
