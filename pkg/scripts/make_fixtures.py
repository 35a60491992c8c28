"""Regenerate the bundled test fixtures under tests/data/.

Every fixture is deterministic: the synthetic series use a fixed seed, and
the filter-conformance fixture plus its golden file are written out by hand
below (the expected survivors are enumerated literally, not computed).

    python scripts/make_fixtures.py
"""

import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"
SEED = 20220701


def iso(dt):
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def write(name, text):
    (DATA / name).write_text(text, encoding="utf-8")
    print("wrote", DATA / name)


def filter_conformance():
    t0 = datetime(2015, 6, 1, tzinfo=timezone.utc)

    def at(minutes):
        return t0 + timedelta(minutes=minutes)

    # (start, duration_s, end, precision); None -> empty cell.
    rows = [
        (datetime(2009, 12, 31, 22, 0, tzinfo=timezone.utc), 240, None, "minute"),  # 1 pre-2010
        (datetime(2009, 12, 31, 23, 30, tzinfo=timezone.utc), 150, None, "minute"),  # 2 pre-2010
        (at(0), 240, None, "minute"),  # 3 on the hour, explicit minute precision wins
        (at(94), 120, None, None),  # 4
        (at(161), 240, None, None),  # 5
        (at(240), 200, None, "hour"),  # 6 explicit hour precision
        (at(253), 120, None, "second"),  # 7
        (at(288), 240, None, "second"),  # 8 gap of 33 min after 7
        (at(330), None, None, "second"),  # 9 no duration and no end
        (at(403), 120, None, "second"),  # 10 gap of 111 min after 8
        (at(439), 180, None, None),  # 11 gap of exactly 34 min
        (at(552), 240, None, None),  # 12 gap of exactly 110 min
        (at(4876), 240, None, None),  # 13 three-day dormancy after 12
        (at(4972), 270, None, "second"),  # 14
        (at(5036.5), 120, None, "second"),  # 15
        (at(5108.5), None, at(5111.5), "second"),  # 16 end column only
        (at(5191.5), 180, None, "second"),  # 17
        (at(5280), 180, None, None),  # 18 on the hour, inferred hour precision
        (at(5290.5), 240, None, "second"),  # 19
        (at(5339.5), 150, None, "second"),  # 20
    ]
    lines = ["Geyser,Start Time,End Time,Duration Seconds,Precision"]
    for start, dur, end, prec in rows:
        lines.append(
            ",".join(
                [
                    "Old Faithful",
                    iso(start),
                    "" if end is None else iso(end),
                    "" if dur is None else str(dur),
                    prec or "",
                ]
            )
        )
    write("filter_conformance.csv", "\n".join(lines) + "\n")
    write(
        "conformance_mapping.txt",
        "geyser_id=Geyser\nstart=Start Time\nend=End Time\nduration_s=Duration Seconds\n"
        "precision=Precision\ntimestamp_format=iso8601\n",
    )
    golden = {
        "survivor_rows": [3, 4, 5, 7, 8, 10, 11, 12, 13, 14, 15, 16, 17, 19, 20],
        "removed": {"before_min_start": [1, 2], "hour_precision": [6, 18], "missing_end": [9]},
        # [earlier source row, later source row, x_duration_min, y_gap_min]
        "pairs": [
            [3, 4, 4.0, 90.0],
            [4, 5, 2.0, 65.0],
            [5, 7, 4.0, 88.0],
            [10, 11, 2.0, 34.0],
            [11, 12, 3.0, 110.0],
            [13, 14, 4.0, 92.0],
            [14, 15, 4.5, 60.0],
            [15, 16, 2.0, 70.0],
            [16, 17, 3.0, 80.0],
            [17, 19, 3.0, 96.0],
            [19, 20, 4.0, 45.0],
        ],
        "dropped_gaps": {"too_short": [[7, 8, 33.0]], "too_long": [[8, 10, 111.0], [12, 13, 4320.0]]},
    }
    write("filter_conformance_golden.json", json.dumps(golden, indent=2) + "\n")


def oldfaithful(rng):
    """~300 bimodal eruptions plus rows that the filter rules must remove."""
    t = datetime(2012, 3, 1, 6, 17, 23, tzinfo=timezone.utc).timestamp()
    rows, nps = [], []
    for k in range(5):
        start = datetime(2008, 5, 1 + k, 7, 13, 11, tzinfo=timezone.utc).timestamp()
        rows.append((int(start), 230, "second"))
    for k in range(300):
        long_mode = rng.random() > 0.3
        dur = rng.normal(4.3, 0.3) if long_mode else rng.normal(2.0, 0.25)
        dur_s = int(round(float(np.clip(dur, 1.4, 5.6)) * 60))
        prec = "second"
        start = int(t)
        if k % 37 == 5:
            start -= start % 60
            prec = "minute"
        if k % 53 == 11:
            prec = "hour"
        if k % 61 == 7:
            rows.append((start, None, prec))
        else:
            rows.append((start, dur_s, prec))
        d_min = dur_s / 60.0
        gap = 60.0 + 35.0 / (1.0 + np.exp(-3.0 * (d_min - 3.0))) + rng.normal(0.0, 5.0)
        if k == 150:
            gap = 2 * 24 * 60.0  # dormancy
        if k % 97 == 40:
            gap = rng.uniform(15.0, 30.0)  # preliminary spurt
        nps_gap = (65.0 if d_min < 2.5 else 92.0) + rng.normal(0.0, 4.0)
        end = start + dur_s
        t = end + gap * 60.0
        nps.append(int(round(end + nps_gap * 60.0)))
    lines = ["Name,Eruption Start (epoch),Duration (s),Time Precision"]
    for start, dur, prec in rows:
        lines.append(f"Old Faithful,{start},{'' if dur is None else dur},{prec}")
    write("oldfaithful.csv", "\n".join(lines) + "\n")
    write(
        "oldfaithful_mapping.txt",
        "# GeyserTimes-style export headers\ngeyser_id=Name\nstart=Eruption Start (epoch)\n"
        "duration_s=Duration (s)\nprecision=Time Precision\ntimestamp_format=epoch_seconds\n",
    )
    write("oldfaithful_nps.csv", "geyser,predicted\n" + "".join(f"Old Faithful,{p}\n" for p in nps[:-1]))


def beehive(rng):
    """~150 main eruptions with indicators 5-40 min earlier, strays and dormancy."""
    t = datetime(2019, 5, 3, 9, 41, tzinfo=timezone.utc).timestamp()
    main, ind = [], []
    for k in range(150):
        t += rng.uniform(8.0, 30.0) * 3600.0
        if k == 70:
            t += 40 * 86400.0  # dormancy
        start = int(t) - int(t) % 60
        main.append(start)
        if rng.random() < 0.9:
            if rng.random() < 0.15:
                off = rng.uniform(20.0, 45.0)  # slow main eruption
            else:
                off = float(np.clip(rng.normal(13.0, 3.0), 5.0, 40.0))
            ind.append(start - int(round(off)) * 60)
        if rng.random() < 0.08:
            ind.append(start - int(rng.uniform(3.0, 6.0) * 3600) // 60 * 60)  # stray indicator
    ind.sort()
    write("beehive_main.csv", "geyser,start,precision\n" + "".join(f"Beehive,{s},minute\n" for s in main))
    write(
        "beehive_indicator.csv",
        "geyser,start,precision\n" + "".join(f"Beehive's Indicator,{s},minute\n" for s in ind),
    )
    write("beehive_mapping.txt", "geyser_id=geyser\nstart=start\nprecision=precision\ntimestamp_format=epoch_seconds\n")


if __name__ == "__main__":
    DATA.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    filter_conformance()
    oldfaithful(rng)
    beehive(rng)
