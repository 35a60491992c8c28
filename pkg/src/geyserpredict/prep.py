"""Record filtering, interval-pair construction and indicator/main pairing."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from datetime import datetime, timezone

from geyserpredict.errors import EmptyResult, UnresolvableEnd
from geyserpredict.ingest import Precision, infer_precision

DEFAULT_MIN_START = datetime(2010, 1, 1, tzinfo=timezone.utc).timestamp()


@dataclass(frozen=True)
class FilterConfig:
    min_start: float | None = DEFAULT_MIN_START
    interval_min_minutes: float = 34.0
    interval_max_minutes: float = 110.0
    drop_hour_precision: bool = True
    # Beehive offsets are start-to-start, so logs without durations are usable there.
    require_end: bool = True

    def __post_init__(self):
        if not 0 < self.interval_min_minutes < self.interval_max_minutes:
            raise ValueError("need 0 < interval_min_minutes < interval_max_minutes")


@dataclass
class FilterReport:
    input_count: int = 0
    before_min_start: int = 0
    hour_precision: int = 0
    missing_end: int = 0
    kept: int = 0
    candidate_pairs: int = 0
    gap_too_short: int = 0
    gap_too_long: int = 0
    nonpositive_duration: int = 0
    pairs: int = 0

    def as_lines(self) -> list[str]:
        return [f"{name}={value}" for name, value in vars(self).items()]


@dataclass(frozen=True)
class IntervalPair:
    x_duration_min: float
    y_gap_min: float
    i: int
    # Timestamps of the gap endpoints; used to express predictions as times.
    end_s: float = 0.0
    next_start_s: float | None = None

    @property
    def actual_s(self) -> float:
        if self.next_start_s is None:
            return self.end_s + 60.0 * self.y_gap_min
        return self.next_start_s


@dataclass(frozen=True)
class OffsetPairing:
    indicator_start: float
    main_start: float
    offset_min: float
    sequence_index: int


@dataclass
class PairingReport:
    main_count: int = 0
    indicator_count: int = 0
    unmatched_main: int = 0
    pairings: int = 0

    def as_lines(self) -> list[str]:
        return [f"{name}={value}" for name, value in vars(self).items()]


def filter_series(records, cfg: FilterConfig = FilterConfig()):
    """Sort one geyser's records and apply the enabled removal rules.

    Each removed record is counted under the first rule it fails, in the
    order: before ``min_start``, hour precision, no resolvable end.

    Returns ``(records, FilterReport)``.
    """
    ids = {r.geyser_id for r in records}
    if len(ids) > 1:
        raise ValueError(f"filter_series expects one geyser, got {sorted(ids)}")
    report = FilterReport(input_count=len(records))
    kept = []
    for r in sorted(records, key=lambda r: (r.start, r.source_row)):
        if cfg.min_start is not None and r.start < cfg.min_start:
            report.before_min_start += 1
        elif cfg.drop_hour_precision and infer_precision(r) is Precision.HOUR:
            report.hour_precision += 1
        elif cfg.require_end and r.resolved_end is None:
            report.missing_end += 1
        else:
            kept.append(r)
    report.kept = len(kept)
    if not kept:
        raise EmptyResult(f"all {len(records)} records removed by filter rules")
    return kept, report


def build_interval_pairs(records, cfg: FilterConfig = FilterConfig(), report: FilterReport | None = None):
    """One (duration, following gap) pair per consecutive record pair.

    Pairs whose gap lies outside ``[interval_min_minutes, interval_max_minutes]``
    are dropped, as are pairs with a non-positive duration. Gap counts are
    added to ``report`` when one is given.
    """
    unresolved = [idx for idx, r in enumerate(records) if r.resolved_end is None]
    if unresolved:
        raise UnresolvableEnd(unresolved)
    for a, b in zip(records, records[1:]):
        if b.start < a.start:
            raise ValueError("records must be sorted ascending by start")

    pairs = []
    short = long_ = nonpos = 0
    for idx in range(len(records) - 1):
        cur, nxt = records[idx], records[idx + 1]
        end = cur.resolved_end
        x = (end - cur.start) / 60.0
        y = (nxt.start - end) / 60.0
        if y < cfg.interval_min_minutes:
            short += 1
        elif y > cfg.interval_max_minutes:
            long_ += 1
        elif x <= 0:
            nonpos += 1
        else:
            pairs.append(IntervalPair(x, y, idx, end_s=end, next_start_s=nxt.start))
    if report is not None:
        report.candidate_pairs += max(len(records) - 1, 0)
        report.gap_too_short += short
        report.gap_too_long += long_
        report.nonpositive_duration += nonpos
        report.pairs += len(pairs)
    return pairs


def pair_indicator_main(indicator, main, max_lag_min: float = 60.0, report: PairingReport | None = None):
    """Match each main eruption with the latest indicator start before it.

    The candidate for a main eruption is the latest indicator that starts
    strictly earlier and no more than ``max_lag_min`` minutes before. If that
    indicator was already consumed by an earlier main eruption, the main
    eruption is left unmatched.
    """
    if max_lag_min <= 0:
        raise ValueError("max_lag_min must be positive")
    ind_starts = [r.start for r in indicator]
    if any(b < a for a, b in zip(ind_starts, ind_starts[1:])):
        raise ValueError("indicator records must be sorted ascending by start")
    main_starts = [r.start for r in main]
    if any(b < a for a, b in zip(main_starts, main_starts[1:])):
        raise ValueError("main records must be sorted ascending by start")

    used = set()
    out = []
    unmatched = 0
    max_lag_s = max_lag_min * 60.0
    for m in main:
        j = bisect.bisect_left(ind_starts, m.start) - 1
        if j < 0 or m.start - ind_starts[j] > max_lag_s or j in used:
            unmatched += 1
            continue
        used.add(j)
        offset = (m.start - ind_starts[j]) / 60.0
        out.append(OffsetPairing(ind_starts[j], m.start, offset, len(out) + 1))
    if report is not None:
        report.main_count += len(main)
        report.indicator_count += len(indicator)
        report.unmatched_main += unmatched
        report.pairings += len(out)
    return out
