"""Windowed-accuracy scoring and comparison tables."""

from __future__ import annotations

import bisect
import csv
import io
from dataclasses import dataclass

from geyserpredict.errors import EmptyInput, MismatchedActuals, MissingColumn, NoMatches
from geyserpredict.ingest import format_number, parse_timestamp
from geyserpredict.regress import predict

Z_VALUES = tuple(range(1, 16))
Z_HEADER = "+/- Amount of minutes in each direction"
NPS_TARGET_WINDOW = 10.0
NPS_TARGET_FRACTION = 0.90
DEFAULT_JOIN_WINDOW_MIN = 120.0


@dataclass(frozen=True)
class PredictionOutcome:
    predicted: float
    actual: float
    abs_error_min: float
    predictor_id: str

    @classmethod
    def from_times(cls, predicted: float, actual: float, predictor_id: str) -> "PredictionOutcome":
        return cls(predicted, actual, abs(actual - predicted) / 60.0, predictor_id)


def windowed_accuracy(outcomes, z_min: float) -> float:
    """Fraction of outcomes with ``abs_error_min <= z_min`` (inclusive)."""
    outcomes = list(outcomes)
    if not outcomes:
        raise EmptyInput("no outcomes to score")
    if not z_min > 0:
        raise ValueError("half-window must be positive")
    return sum(1 for o in outcomes if o.abs_error_min <= z_min) / len(outcomes)


def meets_target(outcomes, z_min: float = NPS_TARGET_WINDOW, target: float = NPS_TARGET_FRACTION) -> bool:
    """True when at least ``target`` of predictions fall within ``+/- z_min``."""
    return windowed_accuracy(outcomes, z_min) >= target


@dataclass(frozen=True)
class AccuracyTable:
    predictor_ids: tuple
    z_values: tuple
    rows: tuple  # rows[i][j] = accuracy of predictor j at z_values[i]

    def column(self, predictor_id: str) -> list[float]:
        j = self.predictor_ids.index(predictor_id)
        return [row[j] for row in self.rows]

    def cell(self, z, predictor_id: str) -> float:
        return self.rows[self.z_values.index(z)][self.predictor_ids.index(predictor_id)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["z_min", *self.predictor_ids])
        for z, row in zip(self.z_values, self.rows):
            w.writerow([format_number(z), *(f"{v:.12g}" for v in row)])
        return buf.getvalue()

    def to_markdown(self, style: str = "percent", labels: dict | None = None) -> str:
        """Aligned Markdown table.

        ``percent`` renders percentages to 3 significant figures with
        "Within given min" headers; ``fraction`` renders fractions to 3
        decimals with "Within x min" headers.
        """
        labels = labels or {}
        if style == "percent":
            heads = [f"Percent accurate Within given min ({labels.get(p, p)})" for p in self.predictor_ids]
            fmt = lambda v: f"{100.0 * v:.3g}"  # noqa: E731
        elif style == "fraction":
            heads = [f"Percent accurate Within x min ({labels.get(p, p)})" for p in self.predictor_ids]
            fmt = lambda v: f"{v:.3f}"  # noqa: E731
        else:
            raise ValueError("style must be 'percent' or 'fraction'")
        header = [Z_HEADER, *heads]
        body = [[format_number(z), *(fmt(v) for v in row)] for z, row in zip(self.z_values, self.rows)]
        widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]

        def line(cells):
            return "| " + " | ".join(c.rjust(w) for c, w in zip(cells, widths)) + " |"

        out = [line(header), "|" + "|".join("-" * (w + 1) + ":" for w in widths) + "|"]
        out += [line(r) for r in body]
        return "\n".join(out) + "\n"


def _actual_key(outcomes):
    return sorted(o.actual for o in outcomes)


def accuracy_table(outcome_sets: dict, z_values=Z_VALUES) -> AccuracyTable:
    """Windowed accuracy for every (z, predictor) cell.

    Raises
    ------
    MismatchedActuals
        If the outcome sets do not cover the same actual eruptions.
    """
    ids = tuple(outcome_sets)
    if not ids:
        raise EmptyInput("no predictors to tabulate")
    for pid in ids:
        if not outcome_sets[pid]:
            raise EmptyInput(f"predictor {pid!r} has no outcomes")
    reference = _actual_key(outcome_sets[ids[0]])
    for pid in ids[1:]:
        if _actual_key(outcome_sets[pid]) != reference:
            raise MismatchedActuals(f"{pid!r} is scored on different eruptions than {ids[0]!r}")
    z_values = tuple(z_values)
    rows = tuple(tuple(windowed_accuracy(outcome_sets[pid], z) for pid in ids) for z in z_values)
    return AccuracyTable(ids, z_values, rows)


def align_outcome_sets(outcome_sets: dict) -> dict:
    """Restrict every set to the actual eruptions common to all of them."""
    common = None
    for outcomes in outcome_sets.values():
        keys = {o.actual for o in outcomes}
        common = keys if common is None else common & keys
    return {pid: [o for o in outs if o.actual in common] for pid, outs in outcome_sets.items()}


def evaluate_regression(model, held_pairs) -> list[PredictionOutcome]:
    """Score a fitted model on interval pairs; errors are measured in minutes."""
    if not held_pairs:
        raise EmptyInput("no pairs to evaluate")
    out = []
    for p in held_pairs:
        gap = predict(model, p.x_duration_min)
        out.append(PredictionOutcome(p.end_s + 60.0 * gap, p.actual_s, abs(p.y_gap_min - gap), model.kind))
    return out


def evaluate_offset(pairings, c_min: float, predictor_id: str) -> list[PredictionOutcome]:
    """Outcomes of predicting each main eruption as indicator + ``c_min``."""
    if not pairings:
        raise EmptyInput("no pairings to evaluate")
    return [
        PredictionOutcome(p.indicator_start + 60.0 * c_min, p.main_start, abs(p.offset_min - c_min), predictor_id)
        for p in pairings
    ]


def record_id(record) -> str:
    return f"{record.geyser_id}:{format_number(record.start)}"


def evaluate_external(
    predictions,
    actuals,
    name: str = "nps",
    join_window_min: float = DEFAULT_JOIN_WINDOW_MIN,
    unmatched: list | None = None,
) -> list[PredictionOutcome]:
    """Score published predictions against logged eruptions.

    ``predictions`` holds ``(eruption_id, predicted)`` tuples. An id, when
    given, must equal :func:`record_id` of an actual. Without an id the
    prediction joins the nearest actual start within ``join_window_min``;
    when several predictions claim one actual the closest wins. Predictions
    that resolve to nothing are appended to ``unmatched`` and not scored.
    """
    actuals = sorted(actuals, key=lambda r: r.start)
    by_id = {record_id(r): r for r in actuals}
    starts = [r.start for r in actuals]
    window_s = join_window_min * 60.0
    claims = {}
    lost = []
    for eid, predicted in predictions:
        if eid is not None:
            target = by_id.get(eid)
        else:
            target = None
            k = bisect.bisect_left(starts, predicted)
            best = None
            for j in (k - 1, k):
                if 0 <= j < len(starts):
                    d = abs(starts[j] - predicted)
                    if d <= window_s and (best is None or d < best[0]):
                        best = (d, j)
            if best is not None:
                target = actuals[best[1]]
        if target is None:
            lost.append((eid, predicted))
            continue
        key = (target.start, target.source_row)
        prev = claims.get(key)
        if prev is None:
            claims[key] = (target, eid, predicted)
        elif abs(target.start - predicted) < abs(target.start - prev[2]):
            lost.append((prev[1], prev[2]))
            claims[key] = (target, eid, predicted)
        else:
            lost.append((eid, predicted))
    if unmatched is not None:
        unmatched.extend(lost)
    if not claims:
        raise NoMatches(f"none of {len(predictions)} external predictions matched an eruption")
    pid = f"external:{name}"
    return [PredictionOutcome.from_times(pred, target.start, pid) for _, (target, _, pred) in sorted(claims.items())]


def parse_external_predictions(raw_text: str, timestamp_format: str = "epoch_seconds", geyser: str | None = None):
    """Read a ``geyser,predicted`` CSV into ``(None, timestamp)`` tuples.

    An optional ``eruption_id`` column supplies explicit ids.
    """
    reader = csv.DictReader(io.StringIO(raw_text))
    header = reader.fieldnames or []
    for col in ("geyser", "predicted"):
        if col not in header:
            raise MissingColumn(f"external predictions need a {col!r} column")
    out = []
    for row in reader:
        if geyser is not None and row["geyser"].strip() != geyser:
            continue
        eid = (row.get("eruption_id") or "").strip() or None
        out.append((eid, parse_timestamp(row["predicted"], timestamp_format)))
    return out
