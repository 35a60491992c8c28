"""Parsing of eruption-log CSV exports into normalized records.

All timestamps are carried as float seconds since the Unix epoch (UTC).
"""

from __future__ import annotations

import csv
import enum
import io
import math
import os
import urllib.error
import urllib.request
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from geyserpredict.errors import HttpStatusError, MissingColumn, NetworkError

CANONICAL_FIELDS = ("geyser_id", "start", "end", "duration_s", "precision")
REQUIRED_FIELDS = ("geyser_id", "start")
TIMESTAMP_FORMATS = ("epoch_seconds", "iso8601")
BASE_URL_ENV = "GEYSERPREDICT_BASE_URL"

# Largest disagreement tolerated between end - start and a logged duration.
DURATION_SLACK_S = 60.0


class Precision(str, enum.Enum):
    HOUR = "hour"
    MINUTE = "minute"
    SECOND = "second"


@dataclass(frozen=True)
class EruptionRecord:
    geyser_id: str
    start: float
    end: float | None = None
    duration_s: float | None = None
    precision: Precision = Precision.SECOND
    source_row: int = 0
    # True when precision came from an explicit source column.
    precision_explicit: bool = False

    def __post_init__(self):
        if self.end is not None and self.end < self.start:
            raise ValueError("end precedes start")
        if self.duration_s is not None and self.duration_s < 0:
            raise ValueError("negative duration")
        if (
            self.end is not None
            and self.duration_s is not None
            and abs((self.end - self.start) - self.duration_s) > DURATION_SLACK_S
        ):
            raise ValueError("end - start disagrees with duration by more than 60 s")

    @property
    def resolved_end(self) -> float | None:
        """Explicit end if logged, else start + duration, else None."""
        if self.end is not None:
            return self.end
        if self.duration_s is not None:
            return self.start + self.duration_s
        return None


@dataclass(frozen=True)
class RowError:
    row: int
    reason: str


@dataclass(frozen=True)
class ColumnMapping:
    """Canonical field name -> source column header."""

    columns: dict
    timestamp_format: str = "epoch_seconds"

    def __post_init__(self):
        unknown = set(self.columns) - set(CANONICAL_FIELDS)
        if unknown:
            raise ValueError(f"unknown canonical fields: {sorted(unknown)}")
        for name in REQUIRED_FIELDS:
            if name not in self.columns:
                raise ValueError(f"mapping for {name!r} is mandatory")
        if self.timestamp_format not in TIMESTAMP_FORMATS:
            raise ValueError(f"timestamp_format must be one of {TIMESTAMP_FORMATS}")

    @classmethod
    def canonical(cls, timestamp_format="epoch_seconds", header=None):
        """Identity mapping; with ``header``, optional fields it lacks are left unmapped."""
        names = CANONICAL_FIELDS
        if header is not None:
            names = [n for n in CANONICAL_FIELDS if n in REQUIRED_FIELDS or n in header]
        return cls({name: name for name in names}, timestamp_format)

    @classmethod
    def from_text(cls, text: str) -> "ColumnMapping":
        columns = {}
        timestamp_format = "epoch_seconds"
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"mapping line {lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "timestamp_format":
                timestamp_format = value
            else:
                columns[key] = value
        return cls(columns, timestamp_format)

    @classmethod
    def from_file(cls, path) -> "ColumnMapping":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    def to_text(self) -> str:
        lines = [f"{k}={self.columns[k]}" for k in CANONICAL_FIELDS if k in self.columns]
        lines.append(f"timestamp_format={self.timestamp_format}")
        return "\n".join(lines) + "\n"


def parse_timestamp(text: str, fmt: str) -> float:
    text = text.strip()
    if fmt == "epoch_seconds":
        value = float(text)
        if not math.isfinite(value):
            raise ValueError(f"non-finite timestamp {text!r}")
        return value
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no UTC offset")
    return dt.timestamp()


def format_timestamp(value: float, fmt: str) -> str:
    if fmt == "epoch_seconds":
        return format_number(value)
    dt = datetime.fromtimestamp(value, tz=timezone.utc)
    return dt.isoformat().replace("+00:00", "Z")


def format_number(value: float) -> str:
    """Shortest text that parses back to the same float; integers without '.0'."""
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def _parse_row(row: dict, mapping: ColumnMapping, rownum: int) -> EruptionRecord:
    def cell(name):
        header = mapping.columns.get(name)
        if header is None:
            return ""
        return (row.get(header) or "").strip()

    geyser_id = cell("geyser_id")
    if not geyser_id:
        raise ValueError("empty geyser id")
    start_text = cell("start")
    if not start_text:
        raise ValueError("empty start timestamp")
    try:
        start = parse_timestamp(start_text, mapping.timestamp_format)
    except ValueError:
        raise ValueError(f"unparseable start timestamp {start_text!r}") from None

    end = None
    end_text = cell("end")
    if end_text:
        try:
            end = parse_timestamp(end_text, mapping.timestamp_format)
        except ValueError:
            raise ValueError(f"unparseable end timestamp {end_text!r}") from None

    duration = None
    duration_text = cell("duration_s")
    if duration_text:
        try:
            duration = float(duration_text)
        except ValueError:
            raise ValueError(f"unparseable duration {duration_text!r}") from None
        if not math.isfinite(duration):
            raise ValueError(f"non-finite duration {duration_text!r}")

    precision_text = cell("precision").lower()
    if precision_text:
        try:
            precision = Precision(precision_text)
        except ValueError:
            raise ValueError(f"unknown precision {precision_text!r}") from None
        explicit = True
    else:
        precision = Precision.SECOND
        explicit = False

    return EruptionRecord(
        geyser_id=geyser_id,
        start=start,
        end=end,
        duration_s=duration,
        precision=precision,
        source_row=rownum,
        precision_explicit=explicit,
    )


def parse_records(raw_text: str, mapping: ColumnMapping):
    """Parse CSV text into records, collecting per-row failures.

    Returns
    -------
    (records, errors)
        ``records`` in input order; ``errors`` is a list of :class:`RowError`.
        ``len(records) + len(errors)`` equals the number of data rows.

    Raises
    ------
    MissingColumn
        If a mapped column header is absent from the header row.
    """
    reader = csv.DictReader(io.StringIO(raw_text))
    header = reader.fieldnames or []
    missing = [h for h in mapping.columns.values() if h not in header]
    if missing:
        raise MissingColumn(f"columns not in header: {missing}")

    records, errors = [], []
    for rownum, row in enumerate(reader, 1):
        if None in row:
            errors.append(RowError(rownum, "more fields than header columns"))
            continue
        try:
            records.append(_parse_row(row, mapping, rownum))
        except ValueError as exc:
            errors.append(RowError(rownum, str(exc)))
    return records, errors


def parse_file(path, mapping: ColumnMapping):
    return parse_records(Path(path).read_text(encoding="utf-8"), mapping)


def infer_precision(record: EruptionRecord) -> Precision:
    """Explicit precision wins; otherwise classify the start by divisibility."""
    if record.precision_explicit:
        return record.precision
    start = record.start
    if start % 3600 == 0:
        return Precision.HOUR
    if start % 60 == 0:
        return Precision.MINUTE
    return Precision.SECOND


def records_to_csv(records, timestamp_format="epoch_seconds") -> str:
    """Serialize records to canonical CSV (header = canonical field names)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CANONICAL_FIELDS)
    for r in records:
        writer.writerow(
            [
                r.geyser_id,
                format_timestamp(r.start, timestamp_format),
                "" if r.end is None else format_timestamp(r.end, timestamp_format),
                "" if r.duration_s is None else format_number(r.duration_s),
                r.precision.value if r.precision_explicit else "",
            ]
        )
    return buf.getvalue()


def resolve_url(target: str) -> str:
    """Absolute URLs pass through; anything else is joined to the base URL."""
    if "://" in target:
        return target
    base = os.environ.get(BASE_URL_ENV)
    if not base:
        raise ValueError(f"relative target {target!r} needs ${BASE_URL_ENV}")
    return base.rstrip("/") + "/" + target.lstrip("/")


def fetch_export(url: str, out_path, timeout: float = 30.0) -> Path:
    """Download ``url`` and save the body verbatim. Nothing is written on failure."""
    out_path = Path(out_path)
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            status = resp.status
            body = resp.read()
    except urllib.error.HTTPError as exc:
        raise HttpStatusError(exc.code, url) from None
    except (urllib.error.URLError, OSError) as exc:
        raise NetworkError(f"cannot reach {url}: {exc}") from None
    if not 200 <= status < 300:
        raise HttpStatusError(status, url)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_bytes(body)
    return out_path
