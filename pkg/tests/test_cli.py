from __future__ import annotations

import csv
import json

import pytest

from uepfb import cli
from uepfb.channel import Channel
from uepfb.codec import MwCodeSpec, spec_to_json
from uepfb.exponents import J, j_big

from conftest import write_channel


@pytest.fixture()
def bsc_file(tmp_path):
    return write_channel(tmp_path / "bsc.json", Channel.bsc(0.01))


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_analyze(bsc_file, tmp_path, capsys):
    out = tmp_path / "a.json"
    assert run("analyze", "--channel", bsc_file, "--out", out) == 0
    text = capsys.readouterr().out
    assert "C = 0.637146 nats" in text
    assert "D = 4.50322 nats" in text
    data = json.loads(out.read_text())
    w = Channel.bsc(0.01)
    assert data["capacity_nats"] == w.capacity_nats
    assert data["d_max_nats"] == w.d_max_nats
    assert (data["accept_letter"], data["reject_letter"]) == (0, 1)
    assert (tmp_path / "a.json.meta.json").exists()
    assert "created" not in data


def test_analyze_useless_channel(tmp_path, capsys):
    path = write_channel(tmp_path / "w.json", Channel.bsc(0.5))
    assert run("analyze", "--channel", path) == 0
    text = capsys.readouterr().out
    assert "C = 0 nats" in text and "D = 0 nats" in text


def test_analyze_ternary_matches_library(tmp_path, ternary):
    path = write_channel(tmp_path / "w.json", ternary)
    out = tmp_path / "a.json"
    assert run("analyze", "--channel", path, "--out", out) == 0
    data = json.loads(out.read_text())
    assert data["capacity_nats"] == ternary.capacity_nats
    assert data["lambda"] == ternary.lam


def test_malformed_channel(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"input_size": 2, "output_size": 2, "rows": [[1.0, 0.0], [0.5, 0.5]]}')
    assert run("analyze", "--channel", path) == 2
    assert "error" in capsys.readouterr().err
    assert run("analyze", "--channel", tmp_path / "missing.json") == 2


def test_jcurve_and_emd_columns(bsc_file, tmp_path):
    a, b = tmp_path / "j.csv", tmp_path / "e.csv"
    assert run("jcurve", "--channel", bsc_file, "--points", 21, "--out", a) == 0
    assert run("emd", "--channel", bsc_file, "--exponent", 0, "--points", 21, "--out", b) == 0
    ja = list(csv.DictReader(a.open()))
    eb = list(csv.DictReader(b.open()))
    assert [r["y"] for r in ja] == [r["y"] for r in eb]
    w = Channel.bsc(0.01)
    for r in ja:
        assert float(r["y"]) == J(w, float(r["x"]))


def test_jcurve_monotone_for_five_channels(tmp_path):
    for p in (0.005, 0.01, 0.02, 0.04, 0.08):
        path = write_channel(tmp_path / f"w{p}.json", Channel.bsc(p))
        out = tmp_path / f"j{p}.csv"
        assert run("jcurve", "--channel", path, "--points", 30, "--out", out) == 0
        ys = [float(r["y"]) for r in csv.DictReader(out.open())]
        assert all(b <= a for a, b in zip(ys, ys[1:]))


def test_range_errors(bsc_file):
    assert run("emd", "--channel", bsc_file, "--exponent", 9) == 2
    assert run("region", "--channel", bsc_file, "--rates", "0.5,0.5", "--exponents", "0,0") == 2
    assert run("region", "--channel", bsc_file, "--rates", "0.1", "--exponents", "0,0") == 2
    assert run("jcurve", "--channel", bsc_file, "--points", 0) == 2
    assert run("region", "--channel", bsc_file, "--rates", "0.1", "--exponents", "1", "--sweep", "rate:4") == 2


def test_region_query(bsc_file, tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run("region", "--channel", bsc_file, "--rates", "0.1,0.1", "--exponents", "2,1", "--out", out) == 0
    assert capsys.readouterr().out.startswith("feasible")
    data = json.loads(out.read_text())
    assert data["feasible"] is True
    assert len(data["plan"]["phis"]) == 2


def test_region_sweep_matches_closed_form(bsc_file, tmp_path):
    from uepfb.exponents import optimal_e1

    out = tmp_path / "s.csv"
    assert run("region", "--channel", bsc_file, "--rates", "0.1,0", "--exponents", "0,0.5",
               "--sweep", "rate:2", "--points", 4, "--out", out) == 0
    w = Channel.bsc(0.01)
    for r in csv.DictReader(out.open()):
        assert float(r["y"]) == pytest.approx(optimal_e1(w, 0.1, float(r["x"]), 0.5), abs=1e-4)


def _design_file(tmp_path, **kw):
    obj = {"design": "erasure", "n": 12, "rate": 0.1, "exponent": 0.5, "msg_count": 3, "seed": 7,
           "threshold_scale": 0.1, "control_scale": 0.1, "vlc": True}
    obj.update(kw)
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(obj))
    return path


def test_simulate_exact_dispatch(tmp_path):
    ch = write_channel(tmp_path / "w.json", Channel.bsc(0.05))
    spec = _design_file(tmp_path)
    out = tmp_path / "x.json"
    assert run("simulate", "--channel", ch, "--spec", spec, "--exact", "--out", out) == 0
    data = json.loads(out.read_text())
    assert data["mode"] == "exact"
    assert len(data["per_message"]) == 3


def test_simulate_byte_identical_across_threads(tmp_path):
    ch = write_channel(tmp_path / "w.json", Channel.bsc(0.05))
    spec = _design_file(tmp_path, n=200, rate=0.1, exponent=0.3, msg_count=16, threshold_scale=1 / 32,
                        control_scale=1.0)
    outs = []
    for threads in (1, 8, 1):
        out = tmp_path / f"s{threads}_{len(outs)}.json"
        csv_out = tmp_path / f"s{threads}_{len(outs)}.csv"
        assert run("simulate", "--channel", ch, "--spec", spec, "--trials", 20_000, "--seed", 3,
                   "--threads", threads, "--out", out, "--csv", csv_out) == 0
        outs.append((out.read_bytes(), csv_out.read_bytes()))
    assert outs[0] == outs[1] == outs[2]
    header = outs[0][1].decode().splitlines()[0]
    assert header == "message,trials,completed,error,erasure,truncated,pe,pe_lo,pe_hi,pera,mean_T,mean_T_se"


def test_verify_honest_and_faulty(tmp_path, capsys):
    w = Channel.bsc(0.45)
    ch = write_channel(tmp_path / "w.json", w)
    _, plan = j_big(w, 0.0)
    honest = MwCodeSpec.design(w, 200_000, plan, 2, 1)
    good = tmp_path / "good.json"
    good.write_text(json.dumps(spec_to_json(honest)))
    assert run("verify", "--channel", ch, "--spec", good, "--trials", 200, "--seed", 1) == 0
    bad_obj = spec_to_json(honest)
    bad_obj["threshold"] = 0.0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(bad_obj))
    out = tmp_path / "v.json"
    capsys.readouterr()
    assert run("verify", "--channel", ch, "--spec", bad, "--trials", 200, "--seed", 1, "--out", out) == 1
    assert "FAIL mw.pe[2]" in capsys.readouterr().out
    verdicts = json.loads(out.read_text())
    assert {v["status"] for v in verdicts} <= {"pass", "fail", "vacuous"}


def test_verify_exact(tmp_path):
    ch = write_channel(tmp_path / "w.json", Channel.bsc(0.05))
    spec = _design_file(tmp_path)
    assert run("verify", "--channel", ch, "--spec", spec, "--exact") == 0


def test_spec_mismatch_exit(tmp_path):
    ch = write_channel(tmp_path / "w.json", Channel(
        [[0.7, 0.2, 0.1], [0.1, 0.6, 0.3], [0.25, 0.25, 0.5]]))
    w = Channel.bsc(0.1)
    _, plan = j_big(w, 0.1)
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps(spec_to_json(MwCodeSpec.design(w, 6, plan, 2, 0))))
    assert run("simulate", "--channel", ch, "--spec", spec, "--trials", 10) == 2


def test_unknown_design(tmp_path, bsc_file):
    spec = _design_file(tmp_path, design="turbo")
    assert run("simulate", "--channel", bsc_file, "--spec", spec) == 2


def test_usage_error_exits_two(bsc_file):
    with pytest.raises(SystemExit) as exc:
        run("analyze")
    assert exc.value.code == 2
