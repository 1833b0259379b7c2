"""Tests for the experiment driver: determinism, schemas, worker invariance."""

import json

from cdt_ising.cli import main


def data_rows(path) -> list[str]:
    lines = path.read_text().splitlines()
    return [ln for ln in lines if not ln.startswith("#")]


def run(tmp_path, *argv) -> int:
    return main([*argv, "--out", str(tmp_path / "out.csv")])


def test_sample_report(tmp_path, capsys):
    out = tmp_path / "s.csv"
    rc = main(["sample", "--levels", "3", "--trials", "50", "--seed", "3",
               "--save", "2", "--out", str(out)])
    assert rc == 0
    rows = data_rows(out)
    assert rows[0] == "level,size,count"
    assert (out.with_suffix(".t0.lt")).exists()
    assert (out.with_suffix(".t1.lt")).exists()


def test_stats_report_and_determinism(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for path in (a, b):
        rc = main(["stats", "-n", "3", "--trials", "4000", "--seed", "7",
                   "--out", str(path)])
        assert rc == 0
    assert data_rows(a) == data_rows(b)
    header, *rows = data_rows(a)
    assert header == "level,trials,tv_distance,threshold,passed"
    # with 4000 trials the fit at n <= 3 is already comfortably below 0.05
    for row in rows:
        assert float(row.split(",")[2]) < 0.05


def test_stats_full_scale_fit(tmp_path):
    # the flagship invocation: 10^5 samples fit the level-size law, with
    # goodness-of-fit rows at depths 1, 3, and 5
    out = tmp_path / "full.csv"
    rc = main(["stats", "--n", "5", "--trials", "100000", "--seed", "7",
               "--out", str(out)])
    assert rc == 0
    rows = data_rows(out)[1:]
    assert [r.split(",")[0] for r in rows] == ["1", "3", "5"]
    for row in rows:
        fields = row.split(",")
        assert float(fields[2]) < 0.015
        assert fields[4] == "1"


def test_stats_worker_invariance(tmp_path):
    a = tmp_path / "w1.csv"
    b = tmp_path / "w2.csv"
    main(["stats", "-n", "2", "--trials", "3000", "--seed", "9", "--workers", "1",
          "--out", str(a)])
    main(["stats", "-n", "2", "--trials", "3000", "--seed", "9", "--workers", "2",
          "--out", str(b)])
    assert data_rows(a) == data_rows(b)


def test_ising_scan_beta_zero(tmp_path):
    out = tmp_path / "scan.csv"
    rc = main(["ising-scan", "--levels", "3", "--beta", "0.0", "--sweeps", "1500",
               "--replicas", "2", "--burn-in", "50", "--seed", "11", "--out", str(out)])
    assert rc == 0
    header, *rows = data_rows(out)
    assert header == "beta,bc,estimate,stderr,sweeps,replicas"
    assert len(rows) == 2  # both boundary conditions
    for row in rows:
        fields = row.split(",")
        est, se = float(fields[2]), float(fields[3])
        assert abs(est - 0.5) < max(4 * se, 0.05)


def test_ising_scan_requires_beta(tmp_path):
    rc = main(["ising-scan", "--levels", "3", "--out", str(tmp_path / "x.csv")])
    assert rc == 2


def test_contours_report(tmp_path):
    out = tmp_path / "c.csv"
    rc = main(["contours", "--levels", "3", "--width-cap", "3", "--beta", "1.0",
               "--seed", "13", "--out", str(out)])
    assert rc == 0
    header, *rows = data_rows(out)
    assert header == "length,count,partial_sum"
    partials = [float(r.split(",")[2]) for r in rows]
    assert partials == sorted(partials)


def test_percolation_report_json(tmp_path):
    out = tmp_path / "p.json"
    rc = main(["percolation", "--levels", "4,6", "--beta", "0.1", "--trials", "300",
               "--seed", "17", "--format", "json", "--out", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["schema"] == ["beta", "levels", "trials", "reach_count", "estimate", "stderr"]
    assert len(payload["rows"]) == 2
    for row in payload["rows"]:
        assert row[2] == 300


def test_percolation_worker_invariance(tmp_path):
    a = tmp_path / "pw1.csv"
    b = tmp_path / "pw2.csv"
    main(["percolation", "--levels", "4", "--beta", "0.1", "--trials", "200",
          "--seed", "19", "--workers", "1", "--out", str(a)])
    main(["percolation", "--levels", "4", "--beta", "0.1", "--trials", "200",
          "--seed", "19", "--workers", "2", "--out", str(b)])
    assert data_rows(a) == data_rows(b)


def test_csv_json_mirror(tmp_path):
    csv_path = tmp_path / "m.csv"
    json_path = tmp_path / "m.json"
    main(["oracle", "--levels", "2", "--width-cap", "3", "--out", str(csv_path)])
    main(["oracle", "--levels", "2", "--width-cap", "3", "--format", "json",
          "--out", str(json_path)])
    csv_rows = [r.split(",") for r in data_rows(csv_path)[1:]]
    payload = json.loads(json_path.read_text())
    assert len(csv_rows) == len(payload["rows"])
    for c, j in zip(csv_rows, payload["rows"]):
        assert c[0] == j[0]
        assert float(c[1]) == j[1]


def test_oracle_all_pass(tmp_path):
    out = tmp_path / "o.csv"
    rc = main(["oracle", "--levels", "2", "--width-cap", "4", "--beta", "0.8",
               "--out", str(out)])
    assert rc == 0
    for row in data_rows(out)[1:]:
        assert row.split(",")[-1] == "1"


def test_surgery_selftest(tmp_path):
    out = tmp_path / "ss.csv"
    rc = main(["surgery-selftest", "--attempts", "3000", "--seed", "23",
               "--out", str(out)])
    assert rc == 0
    rows = data_rows(out)[1:]
    assert all(r.split(",")[-1] == "1" for r in rows)


def test_invalid_config_exits_nonzero(tmp_path):
    rc = main(["contours", "--levels", "3", "--max-len", "99",
               "--out", str(tmp_path / "z.csv")])
    assert rc == 2


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("CDT_ISING_OUTDIR", str(tmp_path))
    rc = main(["oracle", "--levels", "1", "--width-cap", "2"])
    assert rc == 0
    assert (tmp_path / "oracle_seed0.csv").exists()
