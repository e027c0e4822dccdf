import json

import pytest

from poweralert.cli import main, manifest_path
from poweralert.power import PowerTrace, write_trace
from oracles import irreducibles_of_degree


def run(*argv):
    return main([str(a) for a in argv])


def replay_ok(out):
    return run("replay", manifest_path(out)) == 0


@pytest.fixture
def tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_gen_poly_membership_and_manifest(tmp):
    out = tmp / "polys.csv"
    assert run("gen-poly", "--degree", 5, "--count", 10, "--seed", 3, "--out", out) == 0
    rows = out.read_text().splitlines()[1:]
    assert len(rows) == 10
    allowed = set(irreducibles_of_degree(5))
    assert all(int(r.split(",")[2], 16) in allowed for r in rows)
    doc = json.loads(manifest_path(out).read_text())
    assert doc["command"] == "gen-poly" and doc["seed"] == 3 and doc["params"]["degree"] == 5
    assert str(out) in doc["artifacts"] and doc["version"]
    assert replay_ok(out)


def test_gen_poly_degree_sweep_and_large_degree(tmp, capsys):
    out = tmp / "p.csv"
    assert run("gen-poly", "--degrees", "126:128", "--count", 2, "--out", out) == 0
    assert len(out.read_text().splitlines()) == 7
    assert "degree 128: mean generation time" in capsys.readouterr().out


def test_gen_poly_usage_errors(tmp):
    assert run("gen-poly", "--degree", 0, "--out", tmp / "x") == 2
    assert run("gen-poly", "--degree", 5) == 2  # --out missing
    assert run("bogus") == 2


def test_count_space(tmp):
    out = tmp / "c.csv"
    assert run("count-space", "--degrees", "1:3", "--depths", "1:6", "--out", out) == 0
    text = out.read_text()
    assert "not reproducible" in text
    rows = [l.split(",") for l in text.splitlines() if l and not l.startswith("#")][1:]
    counts = {(int(d), int(n)): int(c) for d, n, c in rows}
    for n in range(1, 7):
        assert counts[(1, n)] == 2 * counts[(2, n)]
        if n > 1:
            assert counts[(2, n)] > counts[(2, n - 1)]
    assert replay_ok(out)


def test_optimize_table(tmp):
    out = tmp / "t.csv"
    assert run("optimize", "--out", out) == 0
    rows = [l.split(",") for l in out.read_text().splitlines()[1:]]
    got = [(round(float(r[4]), 3), int(r[2])) for r in rows]
    want = [(64.542, 2019), (74.542, 2331), (94.542, 2956), (104.542, 3269), (239.727, 7493)]
    for (tol, n), (wt, wn) in zip(got, want):
        assert tol == wt and abs(n - wn) <= 1
    assert rows[-1][-1] == "network-visibility"
    assert run("optimize", "--strict", "--out", tmp / "s.csv") == 4
    assert replay_ok(out)


def test_optimize_reads_model_files(tmp):
    (tmp / "m.txt").write_text("kind=timing\nbeta0=1.3958\nbeta1=0.081\nbeta2=-0.017\nbeta3=0.008\nsigma_m=5.4542\n")
    assert run("optimize", "--model", "m.txt", "--rates", "5e5", "--out", "o.csv") == 0
    assert ",2332,40,74.542," in (tmp / "o.csv").read_text()
    (tmp / "bad.txt").write_text("kind=timing\nbeta0=oops\n")
    assert run("optimize", "--model", "bad.txt", "--out", "o2.csv") == 3
    assert run("optimize", "--rates", "", "--out", "o3.csv") == 2


def test_fit_round_trip(tmp):
    assert run("synth-samples", "--kind", "network", "--count", 300, "--out", "n.csv") == 0
    assert run("fit", "--kind", "network", "--samples", "n.csv", "--out", "net.txt") == 0
    text = (tmp / "net.txt").read_text()
    slope = float(next(l for l in text.splitlines() if l.startswith("slope=")).split("=")[1])
    assert slope == pytest.approx(0.129, abs=0.002)
    assert replay_ok(tmp / "net.txt")


def test_fit_format_errors_name_offset(tmp, capsys):
    (tmp / "bad.csv").write_text("N,c,t_us\n1,2,3\n1,2\n")
    assert run("fit", "--samples", "bad.csv", "--out", "m.txt") == 3
    assert "byte offset 15" in capsys.readouterr().err
    (tmp / "deg.csv").write_text("N,c,t_us\n" + "1,1,1\n" * 10)
    assert run("fit", "--samples", "deg.csv", "--out", "m.txt") == 4


def test_extract_recovers_four_states(tmp, capsys):
    assert run("synth-trace", "--seed", 2, "--out", "tr.pwtr") == 0
    assert run("extract", "--trace", "tr.pwtr", "--out", "seg.csv") == 0
    states = {l.split(",")[-1] for l in (tmp / "seg.csv").read_text().splitlines()[1:]}
    assert states == {"S0", "S1", "S2", "S3"}
    assert "language accepted" in capsys.readouterr().out
    assert replay_ok(tmp / "seg.csv")


def test_extract_format_errors(tmp, capsys):
    (tmp / "bad.pwtr").write_bytes(b"PWTR\x01")
    assert run("extract", "--trace", "bad.pwtr", "--out", "s.csv") == 3
    assert "byte offset" in capsys.readouterr().err
    (tmp / "empty.pwtr").write_bytes(b"PWTR\x01" + bytes(16))
    assert run("extract", "--trace", "empty.pwtr", "--out", "s.csv") == 3


CONFIG = """
[memory]
seed = 11
[machine]
behavior = {behavior}
patches = 0xffffffff81000040:00
{extra}
[training]
timing_samples = 600
"""


@pytest.mark.parametrize("behavior,extra,expect", [
    ("honest", "", "pass"),
    ("redirect", "", "timing"),
    ("honest", "covered_flip = yes", "output"),
])
def test_protocol_verdicts(tmp, behavior, extra, expect):
    (tmp / "p.ini").write_text(CONFIG.format(behavior=behavior, extra=extra))
    assert run("protocol", "--config", "p.ini", "--rounds", 6, "--seed", 1, "--out", "v.jsonl") == 0
    recs = [json.loads(l) for l in (tmp / "v.jsonl").read_text().splitlines()]
    assert len(recs) == 6
    if expect == "pass":
        assert sum(r["passed"] for r in recs) >= 5
    elif expect == "timing":
        assert sum(r["hash_alarm"] for r in recs) >= 5 and all(r["output_ok"] for r in recs)
    else:
        assert not any(r["output_ok"] for r in recs)
    assert replay_ok(tmp / "v.jsonl")


def test_protocol_bad_config_names_field(tmp, capsys):
    (tmp / "b.ini").write_text("[machine]\nbehavior = sideways\n")
    assert run("protocol", "--config", "b.ini", "--out", "v") == 2
    assert "behavior" in capsys.readouterr().err
    (tmp / "c.ini").write_text("[challenge]\nn = many\n")
    assert run("protocol", "--config", "c.ini", "--out", "v") == 2
    assert "[challenge] n" in capsys.readouterr().err
    assert run("protocol", "--out", "v") == 2


def test_game_sweep_cli(tmp):
    (tmp / "g.ini").write_text("[game]\nt1 = 30:60:10\nt0 = 60,inf\nhorizon = 3600\nruns = 30\n")
    assert run("game-sweep", "--config", "g.ini", "--out", "g.csv", "--seed", 4) == 0
    lines = (tmp / "g.csv").read_text().splitlines()
    assert lines[0] == "T0_s,T1_s,lambda0,lambda1,p_detect,frac_inactive,hit_ratio,runs,horizon_s"
    assert len(lines) == 1 + 8
    silent = [l.split(",") for l in lines[1:] if l.startswith("inf,")]
    assert silent and all(float(r[4]) == 0.0 for r in silent)
    first = (tmp / "g.csv").read_bytes()
    assert run("game-sweep", "--config", "g.ini", "--out", "g.csv", "--seed", 4) == 0
    assert (tmp / "g.csv").read_bytes() == first
    assert replay_ok(tmp / "g.csv")
    assert run("game-sweep", "--config", "g.ini", "--format", "json", "--out", "g.json") == 0
    assert len(json.loads((tmp / "g.json").read_text().replace("Infinity", "1e999"))) == 8


def test_game_sweep_paper_grid_row_count(tmp):
    (tmp / "g.ini").write_text("[game]\nhorizon = 60\nruns = 1\nmethod = exact\n")
    assert run("game-sweep", "--config", "g.ini", "--out", "g.csv") == 0
    assert len((tmp / "g.csv").read_text().splitlines()) == 253


def test_game_sweep_empty_grid(tmp):
    (tmp / "e.ini").write_text("[game]\nt0 =\n")
    assert run("game-sweep", "--config", "e.ini", "--out", "g.csv") == 2


def test_replay_detects_changes(tmp):
    out = tmp / "c.csv"
    assert run("count-space", "--degrees", "2", "--depths", "1:3", "--out", out) == 0
    out.write_text("tampered\n")
    assert not replay_ok(out)
    trace = PowerTrace([0.87] * 50, 5e5)
    write_trace(tmp / "t.pwtr", trace)
    assert run("extract", "--trace", "t.pwtr", "--out", "s.csv") == 0
    write_trace(tmp / "t.pwtr", PowerTrace([0.9] * 50, 5e5))
    assert run("replay", manifest_path(tmp / "s.csv")) == 3
