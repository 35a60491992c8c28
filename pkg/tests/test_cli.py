import hashlib
import http.server
import json
import socket
import subprocess
import sys
import threading

import pytest

from geyserpredict.cli import BEEHIVE_OUTPUTS, MANIFEST, OLDFAITHFUL_OUTPUTS, main


def of_args(data_dir, out, *extra):
    return [
        "oldfaithful",
        "--input", str(data_dir / "oldfaithful.csv"),
        "--mapping", str(data_dir / "oldfaithful_mapping.txt"),
        "--out-dir", str(out),
        *extra,
    ]


def bh_args(data_dir, out, *extra):
    return [
        "beehive",
        "--input", str(data_dir / "beehive_main.csv"),
        "--indicator-input", str(data_dir / "beehive_indicator.csv"),
        "--mapping", str(data_dir / "beehive_mapping.txt"),
        "--out-dir", str(out),
        *extra,
    ]


def test_oldfaithful_writes_declared_files(data_dir, tmp_path):
    assert main(of_args(data_dir, tmp_path / "of")) == 0
    names = sorted(p.name for p in (tmp_path / "of").iterdir())
    assert names == sorted([*OLDFAITHFUL_OUTPUTS, MANIFEST])
    manifest = json.loads((tmp_path / "of" / MANIFEST).read_text())
    assert manifest["command"] == "oldfaithful"
    for name, digest in manifest["files"].items():
        assert hashlib.sha256((tmp_path / "of" / name).read_bytes()).hexdigest() == digest
    models = (tmp_path / "of" / "models.txt").read_text()
    assert models.count("kind=") == 3
    md = (tmp_path / "of" / "table1.md").read_text()
    assert "(Sigmoid)" in md and "(Linear)" in md and "(Exponential)" in md


def test_oldfaithful_with_external_predictions(data_dir, tmp_path):
    out = tmp_path / "of"
    args = of_args(data_dir, out, "--external-predictions", str(data_dir / "oldfaithful_nps.csv"))
    assert main(args) == 0
    header = (out / "table1.csv").read_text().splitlines()[0]
    assert header == "z_min,linear,sigmoidal,exponential,external:nps"
    assert "(NPS)" in (out / "table1.md").read_text()
    report = (out / "filter_report.txt").read_text()
    assert "external_unmatched=" in report


def test_oldfaithful_holdout(data_dir, tmp_path):
    assert main(of_args(data_dir, tmp_path / "h", "--holdout", "0.25")) == 0
    report = dict(
        line.split("=", 1) for line in (tmp_path / "h" / "filter_report.txt").read_text().splitlines()
    )
    fit, held = int(report["fit_pairs"]), int(report["eval_pairs"])
    assert fit + held == int(report["pairs"])
    assert held == -(-int(report["pairs"]) // 4)


def test_beehive_writes_declared_files(data_dir, tmp_path):
    assert main(bh_args(data_dir, tmp_path / "bh")) == 0
    names = sorted(p.name for p in (tmp_path / "bh").iterdir())
    assert names == sorted([*BEEHIVE_OUTPUTS, MANIFEST])
    header = (tmp_path / "bh" / "table2.csv").read_text().splitlines()[0]
    assert header == "z_min,mean,median,mode,optimal,nps"
    grid = (tmp_path / "bh" / "fig3_grid.csv").read_text().splitlines()
    assert len(grid) == 23


def test_beehive_constant_offsets(tmp_path):
    main_rows = "".join(f"Beehive,{100_000 + k * 40_000}\n" for k in range(6))
    ind_rows = "".join(f"Indicator,{100_000 + k * 40_000 - 780}\n" for k in range(6))
    (tmp_path / "m.csv").write_text("geyser_id,start\n" + main_rows)
    (tmp_path / "i.csv").write_text("geyser_id,start\n" + ind_rows)
    (tmp_path / "cfg.txt").write_text("drop_hour_precision=false\n")
    out = tmp_path / "out"
    rc = main([
        "beehive", "--input", str(tmp_path / "m.csv"), "--indicator-input", str(tmp_path / "i.csv"),
        "--config", str(tmp_path / "cfg.txt"), "--out-dir", str(out),
    ])
    assert rc == 0
    report = dict(line.split("=", 1) for line in (out / "beehive_report.txt").read_text().splitlines())
    assert report["mean_min"] == report["median_min"] == report["mode_min"] == "13"
    assert report["optimal_accuracy"] == "1"


def test_config_file_and_flag_precedence(data_dir, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("grid_lo=11.0\ngrid_hi=13.0\nwindow=5\n")
    out = tmp_path / "bh"
    assert main(bh_args(data_dir, out, "--config", str(cfg), "--grid-hi", "12.0")) == 0
    grid = (out / "fig3_grid.csv").read_text().splitlines()[1:]
    assert grid[0].startswith("11,") and grid[-1].startswith("12,")
    assert "window_min=5" in (out / "beehive_report.txt").read_text()


def test_unknown_config_key_fails(data_dir, tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("gird_lo=11\n")
    assert main(of_args(data_dir, tmp_path / "x", "--config", str(cfg))) == 1
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and "gird_lo" in err


def test_missing_input_fails(tmp_path, capsys):
    assert main(["oldfaithful", "--input", str(tmp_path / "nope.csv"), "--out-dir", str(tmp_path)]) == 1
    assert "does not exist" in capsys.readouterr().err


def test_all_filtered_fails(tmp_path, capsys):
    (tmp_path / "old.csv").write_text("geyser_id,start,duration_s\nOF,1000,240\nOF,7000,240\n")
    assert main(["oldfaithful", "--input", str(tmp_path / "old.csv"), "--out-dir", str(tmp_path / "o")]) == 1
    assert "EmptyResult" in capsys.readouterr().err
    assert not (tmp_path / "o" / MANIFEST).exists()


def test_report_merges_runs(data_dir, tmp_path):
    main(of_args(data_dir, tmp_path / "of"))
    main(bh_args(data_dir, tmp_path / "bh"))
    assert main(["report", str(tmp_path / "of"), str(tmp_path / "bh"), "--out-dir", str(tmp_path / "r")]) == 0
    text = (tmp_path / "r" / "report.md").read_text()
    assert "## of (oldfaithful)" in text and "## bh (beehive)" in text
    assert "Percent accurate Within x min (Optimal)" in text


def test_report_detects_tampering(data_dir, tmp_path):
    main(of_args(data_dir, tmp_path / "of"))
    (tmp_path / "of" / "models.txt").write_text("tampered\n")
    assert main(["report", str(tmp_path / "of"), "--out-dir", str(tmp_path / "r")]) == 1


class _Handler(http.server.BaseHTTPRequestHandler):
    body = b"geyser,start\nOld Faithful,1262304000\n\xc3\xa9\n"

    def do_GET(self):
        if self.path == "/export.csv":
            self.send_response(200)
            self.send_header("Content-Length", str(len(self.body)))
            self.end_headers()
            self.wfile.write(self.body)
        else:
            self.send_error(404)

    def log_message(self, *args):
        pass


@pytest.fixture
def server():
    httpd = http.server.HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{httpd.server_address[1]}"
    httpd.shutdown()


def test_fetch_saves_verbatim(server, tmp_path):
    out = tmp_path / "raw" / "export.csv"
    assert main(["fetch", f"{server}/export.csv", "--output", str(out)]) == 0
    assert out.read_bytes() == _Handler.body


def test_fetch_uses_base_url_env(server, tmp_path, monkeypatch):
    monkeypatch.setenv("GEYSERPREDICT_BASE_URL", server)
    out = tmp_path / "e.csv"
    assert main(["fetch", "export.csv", "--output", str(out)]) == 0
    assert out.read_bytes() == _Handler.body


def test_fetch_404_writes_nothing(server, tmp_path, capsys):
    out = tmp_path / "missing.csv"
    assert main(["fetch", f"{server}/missing.csv", "--output", str(out)]) == 1
    assert "HttpStatusError" in capsys.readouterr().err
    assert not out.exists()


def test_fetch_unreachable_host(tmp_path, capsys):
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    out = tmp_path / "x.csv"
    assert main(["fetch", f"http://127.0.0.1:{port}/x.csv", "--output", str(out)]) == 1
    assert "NetworkError" in capsys.readouterr().err
    assert not out.exists()


def test_module_entry_point_help():
    result = subprocess.run(
        [sys.executable, "-m", "geyserpredict", "--help"], capture_output=True, text=True, check=True
    )
    for cmd in ("fetch", "oldfaithful", "beehive", "report"):
        assert cmd in result.stdout
