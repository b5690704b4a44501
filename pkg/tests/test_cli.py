import json

import pandas as pd
import pytest

from mrioembed.cli import main, parse_years
from mrioembed.ingest import canonical_path, parse_canonical, write_canonical, write_wiot
from mrioembed.output import read_csv, read_metadata
from mrioembed.panel import YEARS
from mrioembed.synthetic import random_panel_tables, random_world


@pytest.fixture(scope="module")
def canon_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("canon")
    for t in random_panel_tables(seed=12):
        write_canonical(t, canonical_path(d, t.year))
    return d


@pytest.fixture(scope="module")
def analyzed(canon_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("out")
    code = main(["analyze", "--data-dir", str(canon_dir), "--out-dir", str(out),
                 "--replications", "1000", "--seed", "3", "--profiles", "DEU:1995,DEU:2011"])
    assert code == 0
    return out


def test_parse_years():
    assert parse_years("1995-1997,2001") == (1995, 1996, 1997, 2001)
    assert parse_years("2000..2002") == (2000, 2001, 2002)


# -- ingest --------------------------------------------------------------------

def _wiot_dir(tmp_path, years=YEARS):
    src = tmp_path / "wiot"
    src.mkdir()
    for i, y in enumerate(years):
        t = random_world(y, ("AUT", "HUN", "RoW"), ("c1", "c2", "c3"), n_final=5, seed=i)
        write_wiot(t, src / f"wiot{y % 100:02d}_row_apr12.csv")
    return src


def test_ingest_every_year(tmp_path):
    src = _wiot_dir(tmp_path)
    out = tmp_path / "canon"
    assert main(["ingest", "--data-dir", str(src), "--out-dir", str(out)]) == 0
    files = sorted(out.glob("canonical_*.csv"))
    assert len(files) == 17
    t = parse_canonical(files[0])
    assert t.year == 1995 and t.countries == ("AUT", "HUN", "RoW")
    report = json.loads((out / "ingest_report.json").read_text())
    assert len(report["files"]) == 17


def test_ingest_missing_year(tmp_path, capsys):
    src = _wiot_dir(tmp_path, years=(1995, 1996))
    code = main(["ingest", "--data-dir", str(src), "--years", "1995-1997",
                 "--out-dir", str(tmp_path / "canon")])
    assert code != 0
    assert "1997" in capsys.readouterr().err


def test_ingest_corrupt_file(tmp_path, capsys):
    bad = tmp_path / "wiot95.csv"
    bad.write_text("this is not a table\n1,2\n")
    code = main(["ingest", "--wiot", str(bad), "--year", "1995", "--out", str(tmp_path / "c.csv")])
    assert code == 2
    assert str(bad) in capsys.readouterr().err


def test_ingest_report_counts_clamps(tmp_path):
    t = random_world(2003, ("AUT", "RoW"), ("c1", "c2"), n_final=5, seed=2)
    path = tmp_path / "wiot03.csv"
    write_wiot(t, path)
    raw = pd.read_csv(path, header=None, dtype=str, keep_default_na=False)
    c42 = [j for j, v in enumerate(raw.iloc[5]) if v == "c42"]
    # sheet row 8 is the excluded c35 row, so skip it
    for row, col in ((6, c42[0]), (7, c42[0]), (9, c42[1])):
        raw.iat[row, col] = "-1.5"
    raw.to_csv(path, header=False, index=False)
    out = tmp_path / "canon_2003.csv"
    assert main(["ingest", "--wiot", str(path), "--year", "2003", "--out", str(out)]) == 0
    entry = json.loads((tmp_path / "ingest_report.json").read_text())["files"][0]
    assert entry["clamped_cells"] == 3
    assert entry["clamped_total"] == pytest.approx(-4.5)
    assert parse_canonical(out).F.min() >= 0


# -- analyze -------------------------------------------------------------------

def test_analyze_outputs(analyzed):
    for name in ("metrics.csv", "panel.csv", "table2.json", "table3.json", "country_slopes.csv",
                 "trajectories.csv", "region_means.csv", "relative_change.csv",
                 "trajectory_HUN.csv", "profiles_DEU_1995.csv", "profiles_DEU_2011.csv"):
        assert (analyzed / name).exists(), name
    assert len(list(analyzed.glob("profiles_*.csv"))) == 2
    assert len(read_csv(analyzed / "metrics.csv")) == 408
    t2 = json.loads((analyzed / "table2.json").read_text())
    assert "East*Openness" in [t["term"] for t in t2["terms"]]
    assert t2["marginal_effects"]


def test_outputs_carry_metadata(analyzed):
    meta = read_metadata(analyzed / "metrics.csv")
    assert meta["seed"] == 3 and meta["replications"] == 1000
    assert meta["include_row_partner"] is True
    assert len(meta["inputs"]) == 17
    assert json.loads((analyzed / "table3.json").read_text())["metadata"]["seed"] == 3


def test_analyze_byte_identical(canon_dir, tmp_path):
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(["analyze", "--data-dir", str(canon_dir), "--out-dir", str(out),
                     "--seed", "7", "--replications", "10000"]) == 0
        outs.append(out)
    for name in ("table2.json", "table3.json", "country_slopes.csv", "trajectories.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


def test_analyze_incomplete_panel(canon_dir, tmp_path):
    partial = tmp_path / "partial"
    partial.mkdir()
    for y in YEARS[:-1]:
        (partial / canonical_path("", y).name).write_bytes(canonical_path(canon_dir, y).read_bytes())
    code = main(["analyze", "--data-dir", str(partial), "--out-dir", str(tmp_path / "o"),
                 "--replications", "1000"])
    assert code == 3


# -- validate ------------------------------------------------------------------

def test_validate_clean(canon_dir, capsys):
    assert main(["validate", "--data-dir", str(canon_dir)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4
    assert all(line.startswith("PASS") for line in lines)


def test_validate_truncated(canon_dir, tmp_path, capsys):
    part = tmp_path / "part"
    part.mkdir()
    for y in YEARS[:10]:
        (part / f"canonical_{y}.csv").write_bytes(canonical_path(canon_dir, y).read_bytes())
    assert main(["validate", "--data-dir", str(part)]) == 4
    out = capsys.readouterr().out
    assert "FAIL  panel record count  (240 of 408)" in out
