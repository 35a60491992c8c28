"""Indicator-offset predictors: summary statistics, grid search and trend."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass

from geyserpredict.errors import EmptyInput
from geyserpredict.regress import ols_line

WINDOW_MODES = ("symmetric", "after")


@dataclass(frozen=True)
class OffsetStats:
    mean_min: float
    median_min: float
    mode_min: float
    n: int


@dataclass(frozen=True)
class GridSearchResult:
    best_offset_min: float
    best_accuracy: float
    grid: tuple  # ((offset_min, accuracy), ...) in grid order

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["offset_min", "accuracy"])
        for c, acc in self.grid:
            w.writerow([f"{c:.10g}", f"{acc:.12g}"])
        return buf.getvalue()


def round_half_up(value: float) -> int:
    return math.floor(value + 0.5)


def offset_stats(pairings) -> OffsetStats:
    """Mean, median and whole-minute mode of the pairing offsets.

    The mode is taken over offsets rounded to the nearest minute (halves
    round up); ties go to the smallest minute.
    """
    offsets = sorted(p.offset_min for p in pairings)
    n = len(offsets)
    if n == 0:
        raise EmptyInput("offset statistics need at least one pairing")
    mean = math.fsum(offsets) / n
    mid = n // 2
    median = offsets[mid] if n % 2 else (offsets[mid - 1] + offsets[mid]) / 2.0
    counts = Counter(round_half_up(o) for o in offsets)
    top = max(counts.values())
    mode = min(m for m, c in counts.items() if c == top)
    return OffsetStats(mean, median, float(mode), n)


def offset_predict(indicator_start: float, c_min: float) -> float:
    if not c_min > 0:
        raise ValueError("offset constant must be positive")
    return indicator_start + 60.0 * c_min


def grid_points(lo_min: float, hi_min: float, step_min: float) -> list[float]:
    """Inclusive grid ``lo, lo+step, ..., hi`` rounded to 10 decimals."""
    if not lo_min < hi_min:
        raise ValueError("grid needs lo < hi")
    if not step_min > 0:
        raise ValueError("grid step must be positive")
    count = int(math.floor((hi_min - lo_min) / step_min + 1e-9))
    return [round(lo_min + k * step_min, 10) for k in range(count + 1)]


def offset_accuracy(offsets, c_min: float, half_window_min: float, mode: str = "symmetric") -> float:
    """Fraction of offsets that a constant ``c_min`` predicts within the window.

    ``symmetric`` counts ``|offset - c| <= w``; ``after`` counts
    ``0 <= offset - c <= w`` (eruption no earlier than predicted).
    """
    if mode not in WINDOW_MODES:
        raise ValueError(f"window mode must be one of {WINDOW_MODES}")
    offsets = list(offsets)
    if not offsets:
        raise EmptyInput("no offsets to score")
    if mode == "symmetric":
        hits = sum(1 for o in offsets if abs(o - c_min) <= half_window_min)
    else:
        hits = sum(1 for o in offsets if 0 <= o - c_min <= half_window_min)
    return hits / len(offsets)


def optimal_offset(
    pairings,
    lo_min: float = 11.9,
    hi_min: float = 14.0,
    step_min: float = 0.1,
    half_window_min: float = 10.0,
    mode: str = "symmetric",
) -> GridSearchResult:
    offsets = [p.offset_min for p in pairings]
    if not offsets:
        raise EmptyInput("grid search needs at least one pairing")
    grid = tuple((c, offset_accuracy(offsets, c, half_window_min, mode)) for c in grid_points(lo_min, hi_min, step_min))
    best_c, best_acc = grid[0]
    for c, acc in grid[1:]:
        if acc > best_acc:
            best_c, best_acc = c, acc
    return GridSearchResult(best_c, best_acc, grid)


def trend_slope(pairings):
    """Least-squares line of offset against eruption order: (slope, intercept)."""
    return ols_line([p.sequence_index for p in pairings], [p.offset_min for p in pairings])
