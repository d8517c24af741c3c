import json
from pathlib import Path

import pytest

from ellgrid.cli import main

LAB = {"discriminant": {"zeros": [-2.0, -1.0, 1.0, 1.5], "eps": 42.26667,
                        "u": -5.5, "v": 4.0, "sign_u": -1, "sign_v": 1,
                        "shift": -0.7333}}


@pytest.fixture(scope="module")
def cfgdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cfg")
    (d / "curve.json").write_text(json.dumps(LAB))
    (d / "lattice.json").write_text(json.dumps(
        {"curve": LAB, "walk": {"x0": 0.0, "branch": "plus"}}))
    (d / "ell.json").write_text(json.dumps(
        {"curve": LAB, "walk": {"x0": 0.0}, "lo": -1, "hi": 10}))
    (d / "dd.json").write_text(json.dumps(
        {"curve": LAB, "walk": {"x0": 0.0}, "walk_primed": {"x0": 3.0},
         "m": 2, "r": 0, "s": 0}))
    (d / "expand.json").write_text(json.dumps(
        {"kind": "psilog", "curve": LAB, "walk": {"x0": 0.0},
         "walk_primed": {"x0": 3.0}, "terms": 10}))
    (d / "sqrtp.json").write_text(json.dumps(
        {"zeros": [-2.0, -1.0, 1.0, 1.5], "eps": 42.26667, "u": -5.5,
         "v": 4.0, "x0": 0.0, "sign_u": -1, "sign_v": 1, "sign_x0": 1,
         "levels": 3}))
    (d / "so.json").write_text(json.dumps(
        {"curve": LAB, "walk": {"x0": 0.0}, "walk_primed": {"x0": 3.0},
         "nu": [], "mu_free_root": 2.2, "lam": 0.0, "levels": 5}))
    lines = ["node,value"]
    val = 0.0
    for j in range(10):
        lines.append(f"{j + 1},{val!r}")
        val += 1.0 / (j + 1)
    (d / "nodes.csv").write_text("\n".join(lines) + "\n")
    return d


def test_lattice_csv_columns(cfgdir, tmp_path):
    out = tmp_path / "lat.csv"
    code = main(["lattice", "--config", str(cfgdir / "lattice.json"),
                 "--range", "-1:10", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,re_x,im_x,re_y,im_y"
    row1 = lines[2].split(",")
    assert row1[0] == "0" and abs(float(row1[1])) < 1e-12
    assert abs(float(lines[3].split(",")[1]) + 0.695485) < 1e-5


def test_lattice_deterministic(cfgdir, tmp_path):
    o1, o2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for o in (o1, o2):
        assert main(["lattice", "--config", str(cfgdir / "lattice.json"),
                     "--range", "-1:10", "--out", str(o)]) == 0
    assert o1.read_bytes() == o2.read_bytes()


def test_elliptic_json(cfgdir, tmp_path):
    out = tmp_path / "prof.json"
    assert main(["elliptic", "--config", str(cfgdir / "ell.json"),
                 "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    for key in ("lambda", "k", "h", "g", "K", "Kprime", "p", "n_period",
                "C_theta"):
        assert key in data
    assert abs(data["h"] + 0.76411) < 5e-5


def test_other_commands_run(cfgdir, tmp_path):
    assert main(["curve", "--config", str(cfgdir / "curve.json"),
                 "--out", str(tmp_path / "c.json")]) == 0
    assert main(["divdiff", "--config", str(cfgdir / "dd.json"),
                 "--out", str(tmp_path / "dd.txt")]) == 0
    assert main(["expand", "psilog", "--config", str(cfgdir / "expand.json"),
                 "--out", str(tmp_path / "t5.csv")]) == 0
    assert main(["contfrac", "thiele", "--nodes", str(cfgdir / "nodes.csv"),
                 "--out", str(tmp_path / "th.json")]) == 0
    assert main(["contfrac", "sqrtp", "--config", str(cfgdir / "sqrtp.json"),
                 "--out", str(tmp_path / "sq.json")]) == 0
    assert main(["riccati", "--family", "euler_exp", "--levels", "6",
                 "--out", str(tmp_path / "rc.json")]) == 0
    assert main(["secondord", "--config", str(cfgdir / "so.json"),
                 "--truncate", "2", "--out", str(tmp_path / "so.json")]) == 0


def test_expand_table_layout(cfgdir, tmp_path):
    out = tmp_path / "t5.csv"
    main(["expand", "psilog", "--config", str(cfgdir / "expand.json"),
          "--out", str(out)])
    header = out.read_text().splitlines()[0].split(",")
    assert header[:4] == ["n", "x_n", "y_n", "f(x_n)"]
    assert header[4].startswith("S_n(")


def test_config_error_exit_2(cfgdir, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"curve": LAB, "walk": {"x0": 0.0,
                                                      "oops": True}}))
    assert main(["lattice", "--config", str(bad), "--range", "0:3"]) == 2
    assert main(["lattice", "--config", str(tmp_path / "missing.json"),
                 "--range", "0:3"]) == 2


def test_breakdown_exit_3(tmp_path):
    bad = {"discriminant": {"zeros": [-2.0, -1.0, 1.0, 1.5],
                            "eps": 42.26667, "u": -1.0, "v": 4.0}}
    cfg = tmp_path / "bad_curve.json"
    cfg.write_text(json.dumps(bad))
    assert main(["curve", "--config", str(cfg)]) == 3


def test_paper_tables(tmp_path):
    out = tmp_path / "tables"
    assert main(["paper-tables", "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert len(names) == 8   # 7 tables + summary
    summary = (out / "summary.txt").read_text()
    assert "mismatches beyond tolerance: 0" in summary


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert main(["lattice", "--help"]) == 0
