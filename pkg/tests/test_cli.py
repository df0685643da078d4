from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from commstab.cli import main
from commstab.netmodel import read_pajek_net, read_partition_clu

PERIODS = "T1:2020-01:2020-03,T2:2020-04:2020-06,T3:2020-07:2020-09,T4:2020-10:2020-12"
SMALL = '{"n_actors": 40, "core_fraction": 0.2}'


@pytest.fixture
def synth_dir(tmp_path):
    out = tmp_path / "synth"
    assert main(["synth", "--config", SMALL, "--seed", "5", "--activity", "--out-dir", str(out)]) == 0
    return out


def test_synth_outputs(synth_dir):
    names = {p.name for p in synth_dir.iterdir()}
    assert {"T1.net", "T1.clu", "T4.net", "T4.clu", "truth.csv", "activity.csv"} <= names
    net = read_pajek_net((synth_dir / "T1.net").read_text())
    part = read_partition_clu((synth_dir / "T1.clu").read_text(), net.actors)
    assert part.k == 2
    rows = list(csv.DictReader((synth_dir / "truth.csv").open()))
    assert rows and set(rows[0]) == {"actor", "T1", "T2", "T3", "T4", "type", "perspectives"}


def test_stepwise_chain(tmp_path, synth_dir, capsys):
    log = synth_dir / "activity.csv"
    assert main(["ingest", "--input", str(log), "--periods", PERIODS, "--out-dir", str(tmp_path / "i")]) == 0
    assert (tmp_path / "i" / "stats.csv").read_text().startswith("period,n_months")
    assert main(["project", "--input", str(log), "--periods", PERIODS, "--out-dir", str(tmp_path / "p")]) == 0
    models = []
    for t in ("T1", "T2", "T3", "T4"):
        raw, red, norm, model = (tmp_path / f"{x}_{t}" for x in ("raw", "red", "norm", "model"))
        assert main(["reduce", "--in", str(tmp_path / "p" / f"comments_{t}.net"), "--out", str(red), "--top-n", "30"]) == 0
        assert main(["normalize", "--in", str(red), "--out", str(norm)]) == 0
        assert main(["blockmodel", "--in", str(norm), "--k", "2", "--out", str(model), "--clu", str(raw)]) == 0
        models.append(str(model))
    assert main(["stability", "--models", *models, "--out", str(tmp_path / "st.json")]) == 0
    st = json.loads((tmp_path / "st.json").read_text())
    assert len(st["matrix"]) == 4
    traj, flows, svg = tmp_path / "traj.csv", tmp_path / "flows.csv", tmp_path / "h.svg"
    assert main(["trajectories", "--models", *models, "--out", str(traj), "--flows", str(flows), "--svg", str(svg)]) == 0
    assert traj.read_text().startswith("actor,T1,T2,T3,T4,type,perspectives")
    assert flows.read_text().startswith("period_pair,from,to,count")
    assert svg.read_text().startswith("<svg")


def test_stability_from_clu(tmp_path, synth_dir, capsys):
    nets = [str(synth_dir / f"T{i}.net") for i in (1, 2)]
    clus = [str(synth_dir / f"T{i}.clu") for i in (1, 2)]
    assert main(["stability", "--clu", *clus, "--net", *nets]) == 0
    assert "consecutive-mean" in capsys.readouterr().out
    assert main(["stability", "--clu", *clus]) == 1


def test_pipeline_and_report(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["pipeline", "--seed", "42", "--output-dir", str(out), "--svg", "--k", "2"]) == 0
    assert (out / "report.json").exists() and (out / "heatmap.svg").exists()
    assert main(["report", "--in", str(out / "report.json")]) == 0
    text = capsys.readouterr().out
    assert "[comments]" in text and "stability" in text


def test_pipeline_config_file_with_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"synth": json.loads(SMALL), "seed": 1, "top_n": 30, "output_dir": str(tmp_path / "x")}))
    assert main(["pipeline", "--config", str(cfg), "--relations", "reactions", "--output-dir", str(tmp_path / "y")]) == 0
    doc = json.loads((tmp_path / "y" / "report.json").read_text())
    assert list(doc["relations"]) == ["reactions"]
    assert not (tmp_path / "x").exists()


def test_pipeline_error_exit(tmp_path, capsys):
    assert main(["pipeline", "--seed", "1", "--relations", "", "--output-dir", str(tmp_path / "z")]) == 1
    assert "stage 'config'" in capsys.readouterr().err
    assert not (tmp_path / "z").exists()


def test_report_rejects_invalid(tmp_path, capsys):
    bad = tmp_path / "r.json"
    bad.write_text("{}")
    assert main(["report", "--in", str(bad)]) == 1
    assert "schema" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert main(["reduce", "--in", str(tmp_path / "no.net"), "--out", str(tmp_path / "x.net")]) == 1
    assert "no.net" in capsys.readouterr().err


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["blockmodel"])
    assert exc.value.code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "commstab", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "commstab" in res.stdout
