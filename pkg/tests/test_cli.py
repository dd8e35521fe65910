import json

import pytest

from bosefield.cli import EXIT_INCONCLUSIVE, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, run

RING = '{"variant":"ring","n":4,"omega_w":0.5,"omega_n":0.5}'
CRITICAL = '{"variant":"ring","n":6,"nu":0.5}'
COUPLED = '{"variant":"custom","matrix":[[2,1],[1,2]]}'


def run_json(argv, capsys):
    code = run(argv)
    return code, json.loads(capsys.readouterr().out)


def test_dispersion_json(capsys):
    code, doc = run_json(["dispersion", "--model", RING], capsys)
    assert code == EXIT_OK
    assert doc["schema"] == "bosefield/1"
    assert doc["result"]["cross_check"]["eigenvalue_match"] is True
    assert len(doc["result"]["rows"]) == 4


def test_dispersion_critical_flags_zero_mode(capsys):
    code, doc = run_json(["dispersion", "--model", CRITICAL, "--points", "8"], capsys)
    assert code == EXIT_OK
    assert doc["result"]["cross_check"]["zero_mode"] is True
    assert run(["dispersion", "--model", CRITICAL, "--strict"]) == EXIT_NUMERICAL


def test_model_from_file(tmp_path, capsys):
    path = tmp_path / "model.json"
    path.write_text(RING)
    assert run(["evolve", "--model", str(path)]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["result"]["relative_energy_drift"] < 1e-12
    assert max(r["symplectic_residual"] for r in doc["result"]["rows"]) < 1e-10


def test_evolve_initial_state(capsys):
    code, doc = run_json(["evolve", "--model", RING, "--x0", '{"q":[0,1,0,0],"p":[0,0,0,0.5]}',
                          "--t-max", "2", "--steps", "4"], capsys)
    assert code == EXIT_OK
    assert doc["result"]["rows"][0]["q"] == pytest.approx([0, 1, 0, 0], abs=1e-14)
    assert run(["evolve", "--model", RING, "--x0", '{"q":[1],"p":[0]}']) == EXIT_VALIDATION


def test_zero_mode_exit(capsys):
    assert run(["evolve", "--model", CRITICAL]) == EXIT_NUMERICAL
    assert "zero mode" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["dispersion", "--model", "{not json"],
    ["dispersion", "--model", '{"variant":"custom","matrix":[[1,0.5],[0.2,1]]}'],
    ["dispersion", "--model", COUPLED],
    ["locality", "--model", COUPLED, "--region", "7"],
    ["locality", "--model", COUPLED, "--quanta", "30", "--cutoff", "4"],
    ["dispersion", "--model", "/no/such/file.json"],
])
def test_validation_errors(argv, capsys):
    assert run(argv) == EXIT_VALIDATION
    assert capsys.readouterr().err.startswith("bosefield:")


def test_missing_required_flag():
    with pytest.raises(SystemExit) as info:
        run(["infrared", "--model", RING])
    assert info.value.code == 2


def test_locality_report(capsys):
    code, doc = run_json(["locality", "--model", COUPLED, "--region", "0", "--cutoff", "12"], capsys)
    assert code == EXIT_OK
    res = doc["result"]
    assert res["verdict"]["strongly_nonlocal"] is True
    assert res["search"]["min_residual"] > 0.01
    assert abs(res["search"]["min_residual"] - res["one_quantum_minimum"]) < 1e-4
    assert res["polynomial_probe"]["within_bound"] is True


def test_locality_zero_quanta(capsys):
    code, doc = run_json(["locality", "--model", COUPLED, "--quanta", "0", "--cutoff", "4"], capsys)
    assert code == EXIT_OK
    assert doc["result"]["search"]["status"] == "not_applicable"


def test_truncation_escalation(capsys):
    argv = ["locality", "--model", COUPLED, "--region", "0", "--cutoff", "3"]
    assert run(argv) == EXIT_OK
    assert capsys.readouterr().out
    assert run(argv + ["--strict"]) == EXIT_NUMERICAL


def test_infrared_exit_codes(capsys):
    code, doc = run_json(["infrared", "--model", '{"variant":"ring","n":8,"nu":0.5}', "--lambda", "-0.5"], capsys)
    assert code == EXIT_OK and doc["result"]["verdict"] == "divergent"
    assert len(doc["result"]["table"]) == 10
    assert run(["infrared", "--model", '{"variant":"ring","n":8,"nu":0.5}', "--lambda", "-0.45"]) == EXIT_INCONCLUSIVE
    capsys.readouterr()
    q = '[{"site":[0],"value":1},{"site":[1],"value":-1}]'
    code, doc = run_json(["infrared", "--model", '{"variant":"ring","n":8,"nu":0.5}', "--lambda", "-0.5", "--q", q], capsys)
    # a dipole kills the k = 0 singularity
    assert doc["result"]["verdict"] == "convergent"
    assert run(["infrared", "--model", COUPLED, "--lambda", "-0.5"]) == EXIT_VALIDATION


def test_vacuum_report(capsys):
    code, doc = run_json(["vacuum", "--model", COUPLED], capsys)
    assert code == EXIT_OK
    res = doc["result"]
    assert res["fock_agrees"] is True
    assert all(r["agrees"] for r in res["newton_wigner"])


def test_csv_and_atomic_out(tmp_path):
    out = tmp_path / "d.csv"
    assert run(["dispersion", "--model", RING, "--format", "csv", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "k,omega_sq" and len(lines) == 5
    assert [p.name for p in tmp_path.iterdir()] == ["d.csv"]


def test_dispersion_uncoupled_ring_is_flat(capsys):
    code, doc = run_json(["dispersion", "--model", '{"variant":"ring","n":5,"nu":0}', "--points", "7"], capsys)
    assert {r["omega_sq"] for r in doc["result"]["rows"]} == {1.0}


def test_single_mode_trajectory_closed_form(capsys):
    import math

    model = '{"variant":"custom","matrix":[[2.25]]}'
    code, doc = run_json(["evolve", "--model", model, "--x0", '{"q":[0.4],"p":[-0.3]}',
                          "--t-max", "3", "--steps", "6"], capsys)
    for row in doc["result"]["rows"]:
        t = row["t"]
        assert row["q"][0] == pytest.approx(0.4 * math.cos(1.5 * t) - 0.2 * math.sin(1.5 * t), abs=1e-12)
        assert row["p"][0] == pytest.approx(-0.6 * math.sin(1.5 * t) - 0.3 * math.cos(1.5 * t), abs=1e-12)
