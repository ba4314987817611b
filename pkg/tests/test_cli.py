import json

import pytest

from q6.cli import ConfigError, RunConfig, config_from_dict, main, parse_modes, run
from q6.constants import build_constants
from q6.io import read_csv, tables_equal
from q6.spectral import cylinder_indicial


def summary(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_sphere_check(capsys):
    assert main(["sphere-check", "--n", "10"]) == 0
    s = summary(capsys)
    assert s["identity_residual"] < 1e-10


def test_count_cli(capsys):
    T = 2.5 * cylinder_indicial(build_constants(10)).T_cyl
    assert main(["count", "--n", "10", "--T", repr(T)]) == 0
    s = summary(capsys)
    assert s["count"] == 3 and len(s["witnesses"]) == 3


def test_empty_grid_names_field(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"n": 10, "eps_grid": {"count": 0}}))
    assert main(["sweep", "--config", str(cfg)]) == 1
    s = summary(capsys)
    assert s["field"] == "eps_grid.count"


def test_validation_fields():
    with pytest.raises(ConfigError) as e:
        RunConfig(n=5).validate()
    assert e.value.field == "n"
    with pytest.raises(ConfigError) as e:
        config_from_dict({"tolerances": {"ode": -1}}).validate()
    assert e.value.field == "tolerances.ode"
    with pytest.raises(ConfigError) as e:
        config_from_dict({"bogus": 1})
    assert e.value.field == "bogus"


def test_parse_modes():
    assert parse_modes("0..3") == (0, 3)
    assert parse_modes("2") == (2, 2)
    assert parse_modes([1, 4]) == (1, 4)


def test_sweep_writes_round_trip_and_deterministic(tmp_path, capsys):
    args = ["sweep", "--n", "10", "--eps-start", "0.99", "--eps-stop", "0.5", "--count", "3", "--relative"]
    assert main(args + ["--out", str(tmp_path / "a.csv"), "--plot", str(tmp_path / "a.svg")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.csv")]) == 0
    a, b = (tmp_path / "a.csv").read_bytes(), (tmp_path / "b.csv").read_bytes()
    assert a == b
    tab = read_csv(tmp_path / "a.csv")
    assert tab.columns == ["epsilon", "eps2", "eps4", "period", "hamiltonian", "defect_norm", "newton_iters", "flag"]
    assert tab.meta["n"] == 10 and "identity_residuals" in tab.meta and "tolerances" in tab.meta
    assert len(tab) == 3
    assert (tmp_path / "a.svg").read_text().startswith("<svg")


def test_config_overrides_flags(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"eps_grid": {"start": 0.7, "stop": 0.6, "count": 2}}))
    out = tmp_path / "f.csv"
    assert main(["sweep", "--count", "5", "--config", str(cfg), "--out", str(out)]) == 0
    assert len(read_csv(out)) == 2


def test_delaunay_profile_csv(tmp_path, capsys):
    out = tmp_path / "o.csv"
    assert main(["delaunay", "--n", "10", "--eps", "0.5", "--out", str(out)]) == 0
    tab = read_csv(out)
    assert tab.columns == ["t", "v", "v1", "v2", "v3", "v4", "v5", "hamiltonian", "residual"]
    assert max(abs(r) for r in tab.column("residual")) < 1e-6


def test_spectral_and_threads(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("Q6_THREADS", "2")
    out = tmp_path / "s.csv"
    code = main(["spectral", "--n", "10", "--eps", "0.6", "--modes", "0..2", "--out", str(out)])
    assert code in (0, 2)
    tab = read_csv(out)
    assert tab.column("j") == [0, 1, 2]
    assert all(abs(d - 1) < 1e-8 for d in tab.column("det_M"))
    monkeypatch.setenv("Q6_THREADS", "1")
    out2 = tmp_path / "s2.csv"
    main(["spectral", "--n", "10", "--eps", "0.6", "--modes", "0..2", "--out", str(out2)])
    assert tables_equal(tab, read_csv(out2))


def test_indicial_cli(capsys):
    assert main(["indicial", "--n", "10", "--modes", "0..1"]) == 0
    s = summary(capsys)
    assert s["beta_cyl"] == pytest.approx(2.446, abs=1e-3)


def test_diagram_cli(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code = main(["theorem1", "--n", "10", "--eps-stop", "0.2", "--relative", "--count", "4", "--out", str(out)])
    assert code == 0
    tab = read_csv(out)
    assert tab.columns == ["epsilon", "period", "hamiltonian", "yamabe", "gap_to_sphere", "index_mode0", "flag"]
    assert all(g > 0 for g in tab.column("gap_to_sphere"))


def test_constants_csv(capsys):
    assert main(["constants", "--n", "10", "--csv"]) == 0
    out = capsys.readouterr().out
    assert "K0,2304.0" in out


def test_run_unknown_command():
    with pytest.raises(ValueError):
        run(RunConfig(), "frobnicate")
