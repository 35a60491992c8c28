"""Command-line front end: ``fetch``, ``oldfaithful``, ``beehive``, ``report``.

Settings resolve as CLI flag > ``--config`` file (key=value) > built-in default.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path

from geyserpredict import evaluation, offset, prep, regress
from geyserpredict.errors import GeyserError, NonConvergenceWarning
from geyserpredict.ingest import (
    ColumnMapping,
    fetch_export,
    parse_file,
    parse_timestamp,
    resolve_url,
)

MANIFEST = "manifest.json"
OLDFAITHFUL_OUTPUTS = ("filter_report.txt", "models.txt", "table1.csv", "table1.md", "fig1_scatter.csv")
BEEHIVE_OUTPUTS = ("beehive_report.txt", "table2.csv", "table2.md", "fig2_trend.csv", "fig3_grid.csv")
TABLE1_LABELS = {"linear": "Linear", "sigmoidal": "Sigmoid", "exponential": "Exponential"}
TABLE2_LABELS = {"mean": "Mean", "median": "Median", "mode": "Mode", "optimal": "Optimal", "nps": "NPS"}

PATH_KEYS = ("input", "indicator_input", "mapping", "external_predictions", "out_dir")


@dataclass
class RunConfig:
    input: Path | None = None
    indicator_input: Path | None = None
    mapping: Path | None = None
    external_predictions: Path | None = None
    out_dir: Path | None = None
    geyser: str | None = None
    indicator_geyser: str | None = None
    # None means "command default": 2010-01-01 for Old Faithful, no bound for Beehive.
    min_start: float | None = None
    min_start_set: bool = False
    interval_min_minutes: float = 34.0
    interval_max_minutes: float = 110.0
    drop_hour_precision: bool = True
    fit: regress.FitOptions = field(default_factory=regress.FitOptions)
    grid_lo: float = 11.9
    grid_hi: float = 14.0
    grid_step: float = 0.1
    window: float = 10.0
    window_mode: str = "symmetric"
    max_lag_min: float = 60.0
    nps_offset_min: float = 17.0
    holdout: float = 0.0
    external_name: str = "nps"
    join_window_min: float = evaluation.DEFAULT_JOIN_WINDOW_MIN

    def check_inputs(self, *names):
        for name in names:
            path = getattr(self, name)
            if path is None:
                raise ValueError(f"--{name.replace('_', '-')} is required")
            if not Path(path).exists():
                raise ValueError(f"{name.replace('_', '-')} path does not exist: {path}")
        if self.out_dir is None:
            raise ValueError("--out-dir is required")


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_min_start(text: str) -> float | None:
    text = text.strip()
    if text.lower() in ("", "none"):
        return None
    try:
        return float(text)
    except ValueError:
        return parse_timestamp(text, "iso8601")


def read_config_file(path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def build_config(args) -> RunConfig:
    settings = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key in vars(args):
        value = getattr(args, key)
        if value is not None and key not in ("command", "config", "func"):
            settings[key] = value

    cfg = RunConfig()
    fit_names = {f.name for f in fields(regress.FitOptions)}
    fit_kw = {}
    for key, value in settings.items():
        if key in fit_names:
            fit_kw[key] = type(getattr(cfg.fit, key))(value)
        elif key in PATH_KEYS:
            setattr(cfg, key, Path(value))
        elif key == "min_start":
            cfg.min_start = _parse_min_start(str(value))
            cfg.min_start_set = True
        elif key in ("geyser", "indicator_geyser", "window_mode", "external_name"):
            setattr(cfg, key, str(value))
        elif key == "drop_hour_precision":
            cfg.drop_hour_precision = value if isinstance(value, bool) else _parse_bool(value)
        elif key in {f.name for f in fields(RunConfig)} and key not in ("fit", "min_start_set"):
            setattr(cfg, key, float(value))
        else:
            raise ValueError(f"unknown config key {key!r}")
    cfg.fit = regress.FitOptions(**fit_kw)
    if not 0.0 <= cfg.holdout < 1.0:
        raise ValueError("holdout must be in [0, 1)")
    if cfg.window_mode not in offset.WINDOW_MODES:
        raise ValueError(f"window_mode must be one of {offset.WINDOW_MODES}")
    return cfg


def _load_series(path, mapping, geyser, label):
    records, errors = parse_file(path, mapping)
    if geyser is not None:
        records = [r for r in records if r.geyser_id == geyser]
    ids = sorted({r.geyser_id for r in records})
    if len(ids) > 1:
        raise ValueError(f"{label} file holds several geysers {ids}; set geyser= in the config")
    return records, errors


def _mapping(cfg: RunConfig, data_path) -> ColumnMapping:
    if cfg.mapping:
        return ColumnMapping.from_file(cfg.mapping)
    with open(data_path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), [])
    return ColumnMapping.canonical(header=[h.strip() for h in header])


def _g(v: float) -> str:
    return f"{v:.12g}"


def _write_outputs(out_dir: Path, files: dict, command: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    digests = {}
    for name, text in files.items():
        data = text.encode("utf-8")
        (out_dir / name).write_bytes(data)
        digests[name] = hashlib.sha256(data).hexdigest()
    manifest = {"command": command, "files": digests}
    path = out_dir / MANIFEST
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _split_holdout(pairs, fraction):
    if fraction <= 0:
        return pairs, pairs
    n_held = max(1, math.ceil(fraction * len(pairs)))
    if n_held >= len(pairs):
        raise ValueError("holdout leaves no pairs to fit")
    return pairs[:-n_held], pairs[-n_held:]


def run_oldfaithful(cfg: RunConfig) -> Path:
    cfg.check_inputs("input")
    if cfg.external_predictions is not None:
        cfg.check_inputs("external_predictions")
    mapping = _mapping(cfg, cfg.input)
    records, row_errors = _load_series(cfg.input, mapping, cfg.geyser, "input")
    fcfg = prep.FilterConfig(
        min_start=cfg.min_start if cfg.min_start_set else prep.DEFAULT_MIN_START,
        interval_min_minutes=cfg.interval_min_minutes,
        interval_max_minutes=cfg.interval_max_minutes,
        drop_hour_precision=cfg.drop_hour_precision,
    )
    kept, report = prep.filter_series(records, fcfg)
    pairs = prep.build_interval_pairs(kept, fcfg, report)
    fit_pairs, eval_pairs = _split_holdout(pairs, cfg.holdout)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonConvergenceWarning)
        models = regress.fit_all(fit_pairs, cfg.fit)
    sets = {kind: evaluation.evaluate_regression(models[kind], eval_pairs) for kind in ("linear", "sigmoidal", "exponential")}

    lines = [f"row_errors={len(row_errors)}", *report.as_lines()]
    lines += [f"fit_pairs={len(fit_pairs)}", f"eval_pairs={len(eval_pairs)}", f"holdout={_g(cfg.holdout)}"]
    if cfg.external_predictions is not None:
        predictions = evaluation.parse_external_predictions(
            Path(cfg.external_predictions).read_text(encoding="utf-8"), mapping.timestamp_format, cfg.geyser
        )
        actuals = [kept[p.i + 1] for p in eval_pairs]
        unmatched = []
        ext = evaluation.evaluate_external(predictions, actuals, cfg.external_name, cfg.join_window_min, unmatched)
        sets["external:" + cfg.external_name] = ext
        lines += [f"external_predictions={len(predictions)}", f"external_matched={len(ext)}", f"external_unmatched={len(unmatched)}"]
        sets = evaluation.align_outcome_sets(sets)
        lines.append(f"scored_eruptions={len(next(iter(sets.values())))}")
    for w in caught:
        lines.append(f"warning={w.message}")
    table = evaluation.accuracy_table(sets)
    for pid in table.predictor_ids:
        lines.append(f"meets_target[{pid}]={str(evaluation.meets_target(sets[pid])).lower()}")

    labels = dict(TABLE1_LABELS)
    labels["external:" + cfg.external_name] = cfg.external_name.upper()
    scatter = ["x_duration_min,y_gap_min"] + [f"{_g(p.x_duration_min)},{_g(p.y_gap_min)}" for p in pairs]
    files = {
        "filter_report.txt": "\n".join(lines) + "\n",
        "models.txt": "\n".join(models[k].to_text() for k in regress.KINDS),
        "table1.csv": table.to_csv(),
        "table1.md": table.to_markdown("percent", labels),
        "fig1_scatter.csv": "\n".join(scatter) + "\n",
    }
    return _write_outputs(Path(cfg.out_dir), files, "oldfaithful")


def run_beehive(cfg: RunConfig) -> Path:
    cfg.check_inputs("input", "indicator_input")
    main, main_errors = _load_series(cfg.input, _mapping(cfg, cfg.input), cfg.geyser, "input")
    ind, ind_errors = _load_series(
        cfg.indicator_input, _mapping(cfg, cfg.indicator_input), cfg.indicator_geyser, "indicator input"
    )
    fcfg = prep.FilterConfig(
        min_start=cfg.min_start if cfg.min_start_set else None,
        interval_min_minutes=cfg.interval_min_minutes,
        interval_max_minutes=cfg.interval_max_minutes,
        drop_hour_precision=cfg.drop_hour_precision,
        require_end=False,
    )
    main_kept, main_report = prep.filter_series(main, fcfg)
    ind_kept, ind_report = prep.filter_series(ind, fcfg)
    preport = prep.PairingReport()
    pairings = prep.pair_indicator_main(ind_kept, main_kept, cfg.max_lag_min, preport)
    if not pairings:
        raise GeyserError(f"no indicator eruption within {_g(cfg.max_lag_min)} min of any main eruption")

    stats = offset.offset_stats(pairings)
    grid = offset.optimal_offset(pairings, cfg.grid_lo, cfg.grid_hi, cfg.grid_step, cfg.window, cfg.window_mode)
    slope, intercept = offset.trend_slope(pairings)
    constants = {
        "mean": stats.mean_min,
        "median": stats.median_min,
        "mode": stats.mode_min,
        "optimal": grid.best_offset_min,
        "nps": cfg.nps_offset_min,
    }
    sets = {name: evaluation.evaluate_offset(pairings, c, name) for name, c in constants.items()}
    table = evaluation.accuracy_table(sets)

    lines = [f"main_row_errors={len(main_errors)}", f"indicator_row_errors={len(ind_errors)}"]
    lines += ["main." + s for s in main_report.as_lines()]
    lines += ["indicator." + s for s in ind_report.as_lines()]
    lines += preport.as_lines()
    lines += [
        f"mean_min={_g(stats.mean_min)}",
        f"median_min={_g(stats.median_min)}",
        f"mode_min={_g(stats.mode_min)}",
        f"n={stats.n}",
        f"optimal_offset_min={_g(grid.best_offset_min)}",
        f"optimal_accuracy={_g(grid.best_accuracy)}",
        f"window_min={_g(cfg.window)}",
        f"window_mode={cfg.window_mode}",
        f"nps_offset_min={_g(cfg.nps_offset_min)}",
        f"trend_slope_min_per_eruption={_g(slope)}",
        f"trend_intercept_min={_g(intercept)}",
        f"trend_total_drift_min={_g(slope * (pairings[-1].sequence_index - pairings[0].sequence_index))}",
    ]
    for name in constants:
        lines.append(f"meets_target[{name}]={str(evaluation.meets_target(sets[name])).lower()}")

    trend = ["sequence_index,offset_min,fitted_min"] + [
        f"{p.sequence_index},{_g(p.offset_min)},{_g(slope * p.sequence_index + intercept)}" for p in pairings
    ]
    files = {
        "beehive_report.txt": "\n".join(lines) + "\n",
        "table2.csv": table.to_csv(),
        "table2.md": table.to_markdown("fraction", TABLE2_LABELS),
        "fig2_trend.csv": "\n".join(trend) + "\n",
        "fig3_grid.csv": grid.to_csv(),
    }
    return _write_outputs(Path(cfg.out_dir), files, "beehive")


def verify_manifest(run_dir: Path) -> dict:
    manifest = json.loads((run_dir / MANIFEST).read_text(encoding="utf-8"))
    for name, digest in manifest["files"].items():
        actual = hashlib.sha256((run_dir / name).read_bytes()).hexdigest()
        if actual != digest:
            raise GeyserError(f"{run_dir / name} does not match its manifest hash")
    return manifest


def run_report(run_dirs, out_dir: Path) -> Path:
    parts = ["# Geyser prediction report", ""]
    for run_dir in map(Path, run_dirs):
        manifest = verify_manifest(run_dir)
        parts += [f"## {run_dir.name} ({manifest['command']})", ""]
        for name in sorted(manifest["files"]):
            text = (run_dir / name).read_text(encoding="utf-8").rstrip("\n")
            parts.append(f"### {name}")
            parts.append("")
            parts += [text] if name.endswith(".md") else ["```", text, "```"]
            parts.append("")
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "report.md"
    path.write_text("\n".join(parts), encoding="utf-8")
    return path


def _add_run_flags(p, indicator=False):
    p.add_argument("--input", help="eruption-log CSV (main geyser)")
    if indicator:
        p.add_argument("--indicator-input", help="indicator eruption-log CSV")
    p.add_argument("--mapping", help="column mapping file (key=value)")
    p.add_argument("--config", help="run config file (key=value)")
    p.add_argument("--out-dir", help="output directory")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geyserpredict", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="download an export verbatim")
    p.add_argument("target", help="absolute URL, or a path joined to $GEYSERPREDICT_BASE_URL")
    p.add_argument("--output", required=True, help="file to write")

    p = sub.add_parser("oldfaithful", help="fit and score duration->interval models")
    _add_run_flags(p)
    p.add_argument("--holdout", type=float, help="fraction of latest pairs held out for scoring")
    p.add_argument("--external-predictions", help="CSV of published predictions (geyser,predicted)")

    p = sub.add_parser("beehive", help="fit and score indicator-offset predictors")
    _add_run_flags(p, indicator=True)
    p.add_argument("--grid-lo", type=float)
    p.add_argument("--grid-hi", type=float)
    p.add_argument("--grid-step", type=float)
    p.add_argument("--window", type=float, help="grid-search half-window in minutes")

    p = sub.add_parser("report", help="merge prior run directories into one document")
    p.add_argument("runs", nargs="+", help="run output directories")
    p.add_argument("--out-dir", required=True)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "fetch":
            path = fetch_export(resolve_url(args.target), args.output)
        elif args.command == "report":
            path = run_report(args.runs, Path(args.out_dir))
        else:
            cfg = build_config(args)
            path = run_oldfaithful(cfg) if args.command == "oldfaithful" else run_beehive(cfg)
    except (GeyserError, ValueError, OSError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
