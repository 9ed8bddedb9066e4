import json
import subprocess
import sys

import pytest

from shotmeta.bench import SuccessCurve
from shotmeta.cli import EXIT_BUDGET, EXIT_DATA, EXIT_INVALID, EXIT_OK, Config, main, parse_precision
from shotmeta.errors import InvalidArgumentError

CHP = 0.0015


@pytest.fixture
def workdir(tmp_path):
    config = {
        "spsa": {"maxiter": 10},
        "bench": {"shots_per_eval": [4, 16, 64], "trials": 4},
        "accuracy_levels": [1, 3],
    }
    (tmp_path / "config.json").write_text(json.dumps(config))
    curves = {"curves": [SuccessCurve(0.3416, 3.6e-6, 0.0, k * CHP).to_json() for k in (1, 2, 3)]}
    (tmp_path / "curves.json").write_text(json.dumps(curves))
    return tmp_path


def run(workdir, *args):
    return main([*args, "--config", str(workdir / "config.json")])


def drop_timestamps(path):
    docs = [json.loads(line) for line in path.read_text().splitlines()]
    for doc in docs:
        doc.pop("timestamp", None)
    return docs


def test_parse_precision():
    assert parse_precision("ChPx3") == pytest.approx(0.0045)
    assert parse_precision("chp*1.5") == pytest.approx(0.00225)
    assert parse_precision("0.002") == 0.002
    assert parse_precision(2) == pytest.approx(0.003)
    assert parse_precision(0.004) == 0.004
    for bad in ("ChPx", "fast", "-1", 0, True):
        with pytest.raises(InvalidArgumentError):
            parse_precision(bad)


def test_config_digest_stable(workdir):
    a = Config.load(str(workdir / "config.json"))
    b = Config.load(str(workdir / "config.json"))
    assert a.digest() == b.digest() != Config().digest()
    assert a.shots_schedule == [4, 16, 64]
    assert Config({"bench": {"n_schedule": [2400]}, "spsa": {"maxiter": 10}}).shots_schedule == [60]


def test_exact(workdir, capsys):
    out = workdir / "exact.json"
    assert run(workdir, "exact", "--out", str(out)) == EXIT_OK
    assert "-1.86710937" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    assert doc["ground_energy"] == pytest.approx(-1.8671093666543512, abs=1e-12)
    assert doc["meta"]["tool"] == "shotmeta"


def test_pipeline_reproducible(workdir):
    outs = []
    for tag in ("a", "b"):
        records = workdir / f"trials_{tag}.jsonl"
        fit = workdir / f"fit_{tag}.json"
        assert run(workdir, "bench", "--seed", "42", "--out", str(records)) == EXIT_OK
        assert run(workdir, "fit", str(records), "--out", str(fit)) == EXIT_OK
        outs.append((records, fit))
    (ra, fa), (rb, fb) = outs
    assert drop_timestamps(ra) == drop_timestamps(rb)
    assert len(drop_timestamps(ra)) == 1 + 3 * 4
    assert fa.read_bytes() == fb.read_bytes()
    fit = json.loads(fa.read_text())
    assert [c["accuracy_d"] for c in fit["curves"]] == pytest.approx([CHP, 3 * CHP])
    assert fit["meta"]["config_digest"].startswith("sha256:")


def test_statevector_bench_reported_by_fit(workdir):
    records = workdir / "trials.jsonl"
    assert run(workdir, "bench", "--seed", "1", "--statevector", "--trials", "3", "--out", str(records)) == EXIT_OK
    assert run(workdir, "bench", "--seed", "1", "--out", str(records)) == EXIT_OK
    fit = workdir / "fit.json"
    assert run(workdir, "fit", str(records), "--out", str(fit)) == EXIT_OK
    doc = json.loads(fit.read_text())
    assert [row["trials"] for row in doc["statevector_success"]] == [3, 3]


def test_plan_and_run(workdir):
    plan = workdir / "plan.json"
    surface = workdir / "surface.csv"
    args = ["plan", "--curves", str(workdir / "curves.json"), "--budget", "200000",
            "--precision", "ChPx2", "--out", str(plan), "--surface", str(surface)]
    assert run(workdir, *args) == EXIT_OK
    first = plan.read_bytes()
    assert run(workdir, *args) == EXIT_OK
    assert plan.read_bytes() == first
    doc = json.loads(first)
    assert doc["plan"]["d"] == pytest.approx(2 * CHP)
    lines = surface.read_text().splitlines()
    assert lines[0].startswith("# ") and lines[1] == "r,m,n,P,gamma,P_reliable"

    result = workdir / "campaign.json"
    assert run(workdir, "run", "--plan", str(plan), "--seed", "3", "--out", str(result)) == EXIT_OK
    campaign = json.loads(result.read_text())["campaign"]
    assert len(campaign["runs"]) == doc["plan"]["r"]
    assert campaign["total_shots_spent"] <= 200000


def test_frontier(workdir, capsys):
    args = ["frontier", "--curves", str(workdir / "curves.json"), "--budget", "10000,100000",
            "--precision", "ChPx1,ChPx3"]
    assert run(workdir, *args) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[1] == "B,d,P_reliable,n,m,r"
    assert len(lines) == 2 + 4


def test_exit_invalid(workdir, capsys):
    assert run(workdir, "bench", "--seed", "1") == EXIT_INVALID
    assert main(["exact", "--bogus"]) == EXIT_INVALID
    assert main(["exact", "--config", str(workdir / "missing.json")]) == EXIT_INVALID
    curves = str(workdir / "curves.json")
    assert run(workdir, "plan", "--curves", curves, "--budget", "1000", "--precision", "fast") == EXIT_INVALID
    assert "error:" in capsys.readouterr().err


def test_exit_insufficient_data(workdir):
    (workdir / "two.json").write_text(json.dumps({"spsa": {"maxiter": 5}, "bench": {"shots_per_eval": [4, 8], "trials": 2}}))
    assert main(["bench", "--config", str(workdir / "two.json"), "--seed", "1", "--out", str(workdir / "two.jsonl")]) == EXIT_OK
    assert main(["fit", str(workdir / "two.jsonl"), "--config", str(workdir / "two.json")]) == EXIT_DATA
    # no curve at the requested accuracy
    curves = str(workdir / "curves.json")
    assert run(workdir, "plan", "--curves", curves, "--budget", "10000", "--precision", "ChPx5") == EXIT_DATA


def test_exit_infeasible_budget(workdir):
    curves = str(workdir / "curves.json")
    assert run(workdir, "plan", "--curves", curves, "--budget", "3", "--precision", "ChPx1") == EXIT_BUDGET
    # a plan whose n cannot fund a single run
    plan = workdir / "tiny.json"
    assert run(workdir, "plan", "--curves", curves, "--budget", "40", "--precision", "ChPx1",
               "--out", str(plan)) == EXIT_OK
    assert run(workdir, "run", "--plan", str(plan), "--seed", "1") == EXIT_BUDGET


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "shotmeta", "exact"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "-1.86710937" in proc.stdout
