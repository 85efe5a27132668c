import csv
import json
import math

import numpy as np
import pytest

from ktree_rumor import cli
from ktree_rumor import experiments as ex
from ktree_rumor.graphio import read_graph
from ktree_rumor.graphs import generate


def cfg(tmp_path, **kw):
    base = dict(sizes=[60, 120, 240], trials=3, master_seed=5, out=str(tmp_path))
    base.update(kw)
    return ex.ExperimentConfig(**base)


def rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


@pytest.mark.parametrize(
    "bad",
    [
        dict(sizes=[]),
        dict(sizes=[10, 5]),
        dict(sizes=[0, 5]),
        dict(trials=0),
        dict(fraction=0.0),
        dict(fraction=1.5),
        dict(family="cayley"),
        dict(family="apollonian", k=2),
        dict(k=1),
        dict(metrics=["speed"]),
        dict(schedule={"z": 1}),
        dict(schema_version=9),
        dict(workers=0),
    ],
)
def test_config_validation(bad):
    with pytest.raises(ex.ConfigError):
        ex.ExperimentConfig(**bad)


def test_config_json_round_trip(tmp_path):
    c = cfg(tmp_path, schedule={"m": 4})
    p = tmp_path / "c.json"
    p.write_text(json.dumps(c.to_dict()))
    assert ex.ExperimentConfig.from_json(p) == c
    p.write_text('{"sizez": [1]}')
    with pytest.raises(ex.ConfigError):
        ex.ExperimentConfig.from_json(p)
    with pytest.raises(ex.ConfigError):
        ex.ExperimentConfig.from_json(tmp_path / "missing.json")


def test_seed_streams_are_distinct_and_stable():
    seeds = {ex.derive_seed(1, n, t, s) for n in (10, 20) for t in range(5) for s in range(4)}
    assert len(seeds) == 40
    assert ex.derive_seed(1, 10, 0, 0) == ex.derive_seed(1, 10, 0, 0)
    assert all(0 <= s < 2**63 for s in seeds)


def test_generate_is_byte_identical(tmp_path):
    c = cfg(tmp_path / "a", sizes=[1, 10], trials=2)
    first = [p.read_bytes() for p in ex.cmd_generate(c)]
    c2 = cfg(tmp_path / "b", sizes=[1, 10], trials=2)
    paths = ex.cmd_generate(c2)
    assert [p.read_bytes() for p in paths] == first
    assert paths[0].name == "ktree_k2_n1_trial0.txt"
    g = read_graph(paths[0])
    assert g.n == 3 and g.seed == ex.derive_seed(5, 1, 0, ex.STREAM_GRAPH)
    assert g.adj == generate("ktree", 2, 1, g.seed).adj


def test_spread_rows_and_determinism(tmp_path):
    c = cfg(tmp_path / "a", metrics=list(ex.KNOWN_METRICS))
    path = ex.cmd_spread(c)
    got = rows(path)
    assert list(got[0]) == ex.TrialRecord.columns()
    assert len(got) == 9 and all(r["schema"] == ex.SPREAD_SCHEMA for r in got)
    for r in got:
        assert int(r["rounds_to_99pct"]) <= int(r["rounds_to_all"])
        assert float(r["cc"]) >= 0.5
        assert r["censored"] == "0"
    again = ex.cmd_spread(cfg(tmp_path / "b", metrics=list(ex.KNOWN_METRICS)))
    assert path.read_bytes() == again.read_bytes()
    parallel = ex.cmd_spread(cfg(tmp_path / "c", metrics=list(ex.KNOWN_METRICS), workers=2))
    assert path.read_bytes() == parallel.read_bytes()


def test_metrics_do_not_perturb_spread(tmp_path):
    lean = rows(ex.cmd_spread(cfg(tmp_path / "a", metrics=[])))
    full = rows(ex.cmd_spread(cfg(tmp_path / "b", metrics=list(ex.KNOWN_METRICS))))
    keys = ("seed", "start_vertex", "rounds_to_99pct", "rounds_to_all")
    assert [[r[k] for k in keys] for r in lean] == [[r[k] for k in keys] for r in full]
    assert lean[0]["cc"] == ""


def test_censoring(tmp_path):
    got = rows(ex.cmd_spread(cfg(tmp_path, max_rounds=2, metrics=[])))
    assert all(r["censored"] == "1" and r["rounds_to_all"] == "2" for r in got)


def test_trial_record_invariant():
    with pytest.raises(ValueError):
        ex.TrialRecord(1, 10, 2, "ktree", 0, 5, 4, False)
    ex.TrialRecord(1, 10, 2, "ktree", 0, None, 4, True)


def test_lowerbound_outputs(tmp_path):
    c = cfg(tmp_path, sizes=[300, 600], trials=2)
    got = rows(ex.cmd_lowerbound(c))
    assert len(got) == 4 and list(got[0]) == ex.LOWERBOUND_COLUMNS
    for r in got:
        assert 0 <= int(r["moderate_pieces"]) <= int(r["num_pieces"])
        assert int(r["num_pieces"]) == 2 * int(r["m"]) + 1
        assert float(r["forced_ratio"]) == pytest.approx(int(r["forced_rounds_to_all"]) / int(r["forced_s"]))
    records = json.loads((tmp_path / "barriers.json").read_text())
    assert {"seed", "k", "n", "m", "tau", "clique1", "clique2", "s"} <= set(records[0])
    assert any(r["kind"] == "forced" for r in records)
    with pytest.raises(ex.ConfigError):
        ex.cmd_lowerbound(cfg(tmp_path, family="apollonian", k=3, trials=1))


def test_lowerbound_full_cut(tmp_path):
    # every piece is a bare base clique; the band [1/f, f] holds k = 2 iff f >= 2
    c = cfg(tmp_path / "a", sizes=[200], trials=1, schedule={"m": 200, "f": 1})
    r = rows(ex.cmd_lowerbound(c))[0]
    assert r["moderate_pieces"] == "0" and r["piece_size_quartiles"] == "2 2 2 2 2"
    c = cfg(tmp_path / "b", sizes=[200], trials=1, schedule={"m": 200, "f": 50})
    r = rows(ex.cmd_lowerbound(c))[0]
    assert r["moderate_pieces"] == r["num_pieces"] == "401"


def test_structure_outputs(tmp_path):
    for family, k in [("ktree", 2), ("apollonian", 3)]:
        got = rows(ex.cmd_structure(cfg(tmp_path / family, family=family, k=k, sizes=[200, 400], trials=2)))
        assert list(got[0]) == ex.STRUCTURE_COLUMNS
        for r in got:
            assert float(r["cc"]) >= 0.5
            assert r["diameter_exact"] == "1"
            assert 0 <= float(r["bad_fraction"]) <= 1
        nice = json.loads((tmp_path / family / "nice.json").read_text())
        assert {"seed", "k", "n", "m", "tau", "bad_vertices"} <= set(nice[0])


def test_report_exact_power_law():
    sizes = [1000, 3000, 10000, 30000, 100000]
    rep = ex.fit_report(sizes, [math.log(n) ** 2 for n in sizes], [n**0.3 for n in sizes])
    assert rep.beta_all.slope == pytest.approx(0.3, abs=0.01)
    assert rep.beta_all.stderr < 1e-9
    assert rep.gamma_99.slope == pytest.approx(2.0, abs=1e-9)
    assert rep.theory_beta == pytest.approx(0.2)
    assert "0.2000" in rep.text()


def test_report_polylog_is_not_a_power():
    # over three decades (ln n)^2 still has a log-log slope near 2 / ln n
    sizes = [10**3, 10**6, 10**9, 10**12]
    rep = ex.fit_report(sizes, [math.log(n) ** 2 for n in sizes], [math.log(n) ** 2 for n in sizes])
    assert 0 < rep.beta_99.slope < 0.2 and rep.gamma_99.slope == pytest.approx(2.0)


def test_report_dichotomy_flag():
    sizes = [10**3, 10**4, 10**5, 10**6]
    flat = [20.0, 20.2, 20.4, 20.6]
    steep = [n**0.2 * 10 for n in sizes]
    assert ex.fit_report(sizes, flat, steep).dichotomy
    assert not ex.fit_report(sizes, steep, steep).dichotomy


def test_report_needs_three_sizes():
    with pytest.raises(ex.ReportError):
        ex.fit_report([10, 20], [1, 2], [1, 2])


def test_report_from_csv(tmp_path):
    path = ex.cmd_spread(cfg(tmp_path, metrics=[]))
    rep = ex.cmd_report([path])
    assert rep.sizes == [60, 120, 240] and rep.k == 2
    bad = tmp_path / "bad.csv"
    bad.write_text(path.read_text().replace("spread/1", "spread/0"))
    with pytest.raises(ex.ReportError):
        ex.cmd_report([bad])


def test_report_treats_censored_as_infinite(tmp_path):
    path = ex.cmd_spread(cfg(tmp_path, max_rounds=1, metrics=[]))
    with pytest.raises(ex.ReportError):
        ex.cmd_report([path])


def test_cli_exit_codes(tmp_path, capsys):
    out = str(tmp_path)
    assert cli.main(["spread", "--out", out, "--sizes", "50,100,200", "--trials", "2", "--seed", "3"]) == 0
    assert cli.main(["report", str(tmp_path / "spread.csv")]) == 0
    assert "beta_all" in capsys.readouterr().out
    assert cli.main(["spread", "--k", "1", "--out", out]) == 2
    assert cli.main(["spread", "--sizes", "x", "--out", out]) == 2
    assert cli.main(["bogus"]) == 2
    assert cli.main(["report", str(tmp_path / "nope.csv")]) == 3
    cfg_path = tmp_path / "c.json"
    cfg_path.write_text(json.dumps({"family": "apollonian", "k": 3, "sizes": [30], "trials": 1, "out": out}))
    assert cli.main(["generate", "--config", str(cfg_path), "--k", "4"]) == 0
    assert (tmp_path / "graphs" / "apollonian_k4_n30_trial0.txt").exists()
    assert cli.main(["structure", "--out", out, "--sizes", "100", "--trials", "1"]) == 0
    assert cli.main(["lowerbound", "--out", out, "--sizes", "100", "--trials", "1"]) == 0
