import csv

import pytest

from coexist import sim
from coexist.cli import main
from coexist.config import ScenarioConfig, dumps


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.ini"
    values = {"topology.n_embb": 5, "sim.ttis": 2, "sim.seeds": 1}
    path.write_text(dumps(ScenarioConfig(values)), encoding="utf-8")
    return str(path)


def test_validate_defaults():
    assert main(["validate-config"]) == 0


def test_validate_dump(capsys):
    assert main(["validate-config", "--dump"]) == 0
    assert "noise_dbm = -97.5" in capsys.readouterr().out


def test_validate_bad_file(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[radio]\nvolume = 11\n")
    assert main(["validate-config", "--config", str(bad)]) == 1
    assert "radio.volume" in capsys.readouterr().err


def test_unknown_verb_and_flag():
    with pytest.raises(SystemExit) as exc:
        main(["dance"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", "--fast"])
    assert exc.value.code == 2


def test_bad_sweep_syntax():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--sweep-urllc", "5-40"])
    assert exc.value.code == 2


def test_run_writes_csv(tmp_path, small_config):
    out = tmp_path / "rows.csv"
    code = main(["run", "--config", small_config, "--scheme", "all", "--seeds", "2",
                 "--sweep-urllc", "2:6:2", "--sweep-epsilon", "1e-3,1e-7", "--out", str(out)])
    assert code == 0
    rows = sim.read_csv(out)
    assert len(rows) == 3 * 2 * 2 * 3
    assert {r.epsilon for r in rows} == {1e-3, 1e-7}


def test_oracle_verb(tmp_path):
    out = tmp_path / "oracle.csv"
    assert main(["oracle", "--instances", "10", "--seed", "4", "--out", str(out)]) == 0
    with open(out) as fh:
        records = list(csv.DictReader(fh))
    assert len(records) == 10 and all(r["dominance_ok"] == "1" for r in records)


def test_bundle_dump(tmp_path):
    out = tmp_path / "bundle.csv"
    assert main(["bundle-dump", "--out", str(out)]) == 0
    with open(out) as fh:
        records = list(csv.DictReader(fh))
    assert len(records) == 16
    for t in "1234":
        mine = [r for r in records if r["type_index"] == t]
        best = max(float(r["utility"]) for r in mine)
        own = next(float(r["utility"]) for r in mine if r["item_index"] == t)
        assert own == pytest.approx(best, abs=1e-12)
