"""Data quality scoring of record batches.

Four factor scores are computed against a schema, each as
``1 - violations / checked``:

completeness
    omitted required items over expected required items
accuracy
    range or precision overruns over items that carry such a spec
consistency
    type or format mismatches over present items
timeliness
    late records over all records (record level, not item level)
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Mapping, Sequence

from .composition import CombinedValue, CombinerMode, NormalizedMean, combine
from .models import DomainError

FIELD_TYPES = ("integer", "real", "text", "timestamp")
ARRIVAL_COLUMN = "arrival_time"
DUE_COLUMN = "due_time"
MISSING = None


class SchemaError(DomainError):
    pass


@dataclass(frozen=True)
class FieldSpec:
    name: str
    type: str = "text"
    range: tuple | None = None
    precision: int | None = None
    pattern: str | None = None
    required: bool = True

    def __post_init__(self):
        if self.type not in FIELD_TYPES:
            raise SchemaError(f"field {self.name!r}: unknown type {self.type!r}")
        if self.range is not None:
            lo, hi = (float(v) for v in self.range)
            if lo > hi:
                raise SchemaError(f"field {self.name!r}: range lower bound {lo} exceeds upper bound {hi}")
            object.__setattr__(self, "range", (lo, hi))
        if self.precision is not None and (int(self.precision) != self.precision or self.precision < 0):
            raise SchemaError(f"field {self.name!r}: precision must be a non-negative integer")
        if self.pattern is not None:
            try:
                re.compile(self.pattern)
            except re.error as exc:
                raise SchemaError(f"field {self.name!r}: bad pattern: {exc}") from exc


@dataclass(frozen=True)
class QualitySchema:
    fields: tuple
    expected_record_count: int | None = None
    deadline: float | None = None
    # field holding the production time; deadline latency is measured from it
    timestamp_field: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise SchemaError("field names must be unique")
        if self.expected_record_count is not None and self.expected_record_count < 0:
            raise SchemaError("expected_record_count must be >= 0")
        if self.deadline is not None and self.deadline < 0:
            raise SchemaError("deadline must be >= 0 seconds")
        if self.timestamp_field is not None and self.timestamp_field not in names:
            raise SchemaError(f"timestamp_field {self.timestamp_field!r} is not a schema field")

    @property
    def field_names(self) -> list[str]:
        return [f.name for f in self.fields]

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "QualitySchema":
        if not isinstance(doc, Mapping) or "fields" not in doc:
            raise SchemaError("schema document needs a 'fields' list")
        specs = []
        for i, raw in enumerate(doc["fields"]):
            try:
                specs.append(
                    FieldSpec(
                        name=raw["name"],
                        type=raw.get("type", "text"),
                        range=tuple(raw["range"]) if raw.get("range") is not None else None,
                        precision=raw.get("precision"),
                        pattern=raw.get("pattern"),
                        required=bool(raw.get("required", True)),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"fields[{i}]: {exc}") from exc
        return cls(
            fields=specs,
            expected_record_count=doc.get("expected_record_count"),
            deadline=doc.get("deadline"),
            timestamp_field=doc.get("timestamp_field"),
        )


@dataclass(frozen=True)
class Record:
    values: Mapping[str, Any]
    arrival_time: datetime
    due_time: datetime | None = None


@dataclass(frozen=True)
class QualityScores:
    completeness: float
    accuracy: float
    consistency: float
    timeliness: float
    violations: dict = field(default_factory=dict)
    checked: dict = field(default_factory=dict)
    warnings: tuple = ()

    def as_tuple(self) -> tuple:
        return (self.completeness, self.accuracy, self.consistency, self.timeliness)


def parse_timestamp(value: Any) -> datetime:
    """ISO-8601 text or epoch seconds. Naive times are taken as UTC."""
    if isinstance(value, datetime):
        ts = value
    elif isinstance(value, (int, float)):
        ts = datetime.fromtimestamp(float(value), tz=timezone.utc)
    else:
        text = str(value).strip()
        try:
            ts = datetime.fromtimestamp(float(text), tz=timezone.utc)
        except ValueError:
            ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def _is_missing(value: Any) -> bool:
    return value is None or (isinstance(value, str) and value.strip() == "")


def _parse_typed(value: Any, type_: str):
    """Parsed value, or raise ValueError when it does not fit the declared type."""
    if type_ == "integer":
        if isinstance(value, bool):
            raise ValueError("boolean is not an integer")
        if isinstance(value, int):
            return value
        if isinstance(value, float):
            if value.is_integer():
                return int(value)
            raise ValueError(f"{value!r} is not an integer")
        return int(str(value).strip())
    if type_ == "real":
        if isinstance(value, bool):
            raise ValueError("boolean is not a real")
        number = float(value) if not isinstance(value, str) else float(value.strip())
        if not math.isfinite(number):
            raise ValueError("non-finite real")
        return number
    if type_ == "timestamp":
        return parse_timestamp(value)
    return str(value)


def _decimal_places(value: Any) -> int:
    text = value if isinstance(value, str) else repr(value)
    try:
        exponent = Decimal(text.strip()).as_tuple().exponent
    except InvalidOperation:
        raise ValueError(f"{value!r} is not a decimal number") from None
    if not isinstance(exponent, int):
        raise ValueError(f"{value!r} is not finite")
    return max(0, -exponent)


def _expected_records(batch: Sequence[Record], schema: QualitySchema) -> int:
    return max(len(batch), schema.expected_record_count or 0)


def _completeness(batch, schema):
    required = [f.name for f in schema.fields if f.required]
    expected = len(required) * _expected_records(batch, schema)
    omitted = sum(1 for rec in batch for name in required if _is_missing(rec.values.get(name)))
    omitted += len(required) * (_expected_records(batch, schema) - len(batch))
    return omitted, expected


def _accuracy(batch, schema):
    specs = [f for f in schema.fields if f.range is not None or f.precision is not None]
    checked = violations = 0
    for rec in batch:
        for spec in specs:
            raw = rec.values.get(spec.name)
            if _is_missing(raw):
                continue
            checked += 1
            try:
                number = float(raw.strip() if isinstance(raw, str) else raw)
                if not math.isfinite(number):
                    raise ValueError
                if spec.range is not None and not spec.range[0] <= number <= spec.range[1]:
                    raise ValueError
                if spec.precision is not None and _decimal_places(raw) > spec.precision:
                    raise ValueError
            except (TypeError, ValueError):
                violations += 1
    return violations, checked


def _consistency(batch, schema):
    present = mismatches = 0
    patterns = {f.name: re.compile(f.pattern) for f in schema.fields if f.pattern is not None}
    for rec in batch:
        for spec in schema.fields:
            raw = rec.values.get(spec.name)
            if _is_missing(raw):
                continue
            present += 1
            try:
                _parse_typed(raw, spec.type)
            except (TypeError, ValueError, OverflowError):
                mismatches += 1
                continue
            pattern = patterns.get(spec.name)
            if pattern is not None and pattern.fullmatch(str(raw).strip()) is None:
                mismatches += 1
    return mismatches, present


def _is_late(rec: Record, schema: QualitySchema) -> bool | None:
    """True/False when some limit applies to the record, None when none does."""
    limited = False
    if rec.due_time is not None:
        limited = True
        if rec.arrival_time > rec.due_time:
            return True
    if schema.deadline is not None and schema.timestamp_field is not None:
        produced = rec.values.get(schema.timestamp_field)
        if not _is_missing(produced):
            try:
                produced_at = parse_timestamp(produced)
            except (TypeError, ValueError, OverflowError):
                return limited or None
            limited = True
            if (rec.arrival_time - produced_at).total_seconds() > schema.deadline:
                return True
    return False if limited else None


def _timeliness(batch, schema):
    late = 0
    any_limit = False
    for rec in batch:
        verdict = _is_late(rec, schema)
        if verdict is not None:
            any_limit = True
            late += verdict
    return late, len(batch), any_limit


def _score(violations: int, checked: int, factor: str, warnings: list[str]) -> float:
    if checked == 0:
        warnings.append(f"{factor}: nothing to check, score set to 1")
        return 1.0
    return min(1.0, max(0.0, 1.0 - violations / checked))


def score_batch(batch: Sequence[Record], schema: QualitySchema) -> QualityScores:
    """All four factor scores with their violation and denominator counts."""
    warnings: list[str] = []
    c_bad, c_all = _completeness(batch, schema)
    a_bad, a_all = _accuracy(batch, schema)
    i_bad, i_all = _consistency(batch, schema)
    t_bad, t_all, has_limits = _timeliness(batch, schema)
    if not has_limits:
        warnings.append("timeliness: no deadline or due times configured, score set to 1")
        t_score = 1.0
    else:
        t_score = _score(t_bad, t_all, "timeliness", warnings)
    return QualityScores(
        completeness=_score(c_bad, c_all, "completeness", warnings),
        accuracy=_score(a_bad, a_all, "accuracy", warnings),
        consistency=_score(i_bad, i_all, "consistency", warnings),
        timeliness=t_score,
        violations={"completeness": c_bad, "accuracy": a_bad, "consistency": i_bad, "timeliness": t_bad},
        checked={"completeness": c_all, "accuracy": a_all, "consistency": i_all, "timeliness": t_all},
        warnings=tuple(warnings),
    )


def completeness(batch: Sequence[Record], schema: QualitySchema) -> float:
    return score_batch(batch, schema).completeness


def accuracy(batch: Sequence[Record], schema: QualitySchema) -> float:
    return score_batch(batch, schema).accuracy


def consistency(batch: Sequence[Record], schema: QualitySchema) -> float:
    return score_batch(batch, schema).consistency


def timeliness(batch: Sequence[Record], schema: QualitySchema) -> float:
    return score_batch(batch, schema).timeliness


def data_reliability(scores: QualityScores, mode: CombinerMode = NormalizedMean()) -> CombinedValue:
    """Combine the four factor scores; equal-weight mean by default."""
    return combine(scores.as_tuple(), mode)


def load_records(path: str | Path, schema: QualitySchema) -> list[Record]:
    """Read a header-first CSV of records.

    Every schema field and an ``arrival_time`` column must appear in the
    header; ``due_time`` is optional. Empty cells are missing values.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [n for n in schema.field_names + [ARRIVAL_COLUMN] if n not in header]
        if missing:
            raise SchemaError(f"{path}: header lacks columns {missing}")
        records = []
        for lineno, row in enumerate(reader, start=2):
            try:
                arrival = parse_timestamp(row[ARRIVAL_COLUMN])
                due_raw = row.get(DUE_COLUMN)
                due = None if _is_missing(due_raw) else parse_timestamp(due_raw)
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{path}:{lineno}: bad arrival/due time: {exc}") from exc
            values = {n: (None if _is_missing(row.get(n)) else row[n]) for n in schema.field_names}
            records.append(Record(values, arrival, due))
    return records
