import csv
import math

import pytest

from conftest import make_instance
from uavmec import cli, harness
from uavmec.feasibility import LOCAL, Action, Allocation, Assignment
from uavmec.harness import (
    ExperimentSpec,
    InfeasibleResult,
    ResultRow,
    aggregate,
    derive_seed,
    emit_aggregate_csv,
    emit_csv,
    run_experiment,
)
from uavmec.scenario import save_instance


def test_row_count_for_fig2_protocol():
    spec = ExperimentSpec(preset="fig2", n_values=(3, 4, 5, 6, 7), reps=10, episodes=20)
    result = run_experiment(spec)
    assert len(result.rows) == 5 * 5 * 10
    assert all(r.feasible is True and r.status == "ok" for r in result.rows)
    # solvers share each replication's instance, so ES bounds the others pointwise
    for n in spec.n_values:
        assert result.mean(n, "es") <= result.mean(n, "go")


def test_es_budget_overrun_skips_rows_and_continues():
    spec = ExperimentSpec(n_values=(4,), solvers=("es", "le"), reps=2, node_budget=1)
    rows = run_experiment(spec).rows
    assert [r.status for r in rows] == ["skipped", "skipped", "ok", "ok"]
    assert math.isnan(rows[0].total_energy_j) and rows[0].feasible is None
    assert [a["solver"] for a in aggregate(rows)] == ["le"]


def test_parallel_run_matches_serial():
    base = dict(n_values=(3, 4), solvers=("es", "ro", "rlaa"), reps=2, episodes=30)
    serial = run_experiment(ExperimentSpec(**base, jobs=1)).rows
    parallel = run_experiment(ExperimentSpec(**base, jobs=2)).rows
    assert [(r.n, r.solver, r.rep, r.total_energy_j) for r in serial] == \
           [(r.n, r.solver, r.rep, r.total_energy_j) for r in parallel]


def test_infeasible_assignment_aborts(monkeypatch):
    from uavmec.baselines import SolveResult

    def broken(kind, instance, seed, **kw):
        bad = Assignment([Allocation(LOCAL, 1.0)] * instance.num_ues)
        return SolveResult(bad, 0.0, 0.0)

    monkeypatch.setattr(harness, "solve", broken)
    with pytest.raises(InfeasibleResult, match="C5"):
        run_experiment(ExperimentSpec(n_values=(3,), solvers=("le",), reps=1))


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(0, "fig2", 3, "es", 0) == derive_seed(0, "fig2", 3, "es", 0)
    seeds = {derive_seed(0, "fig2", n, s, r) for n in range(3, 8) for s in "abc" for r in range(10)}
    assert len(seeds) == 150
    assert all(0 <= s < 2**63 for s in seeds)


def rows_fixture():
    return [ResultRow("fig2", 3, "le", r, 100 + r, 0.1 * (r + 1) + 1e-17 * r, 0.5, True) for r in range(3)]


def test_emit_csv_lines(tmp_path):
    emit_csv(rows_fixture(), tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert len(lines) == 4
    assert lines[0] == "preset,n,solver,rep,seed,status,total_energy_J,feasible"
    with pytest.raises(ValueError):
        emit_csv([], tmp_path / "empty.csv")


def test_emit_csv_round_trips_numbers(tmp_path):
    rows = rows_fixture() + [ResultRow("fig2", 3, "go", 0, 1, 0.1 + 0.2, 0.0, True)]
    emit_csv(rows, tmp_path / "r.csv", include_timing=True)
    with open(tmp_path / "r.csv") as fh:
        parsed = list(csv.DictReader(fh))
    for row, rec in zip(rows, parsed):
        assert float(rec["total_energy_J"]) == row.total_energy_j
        assert int(rec["seed"]) == row.seed
        assert float(rec["wall_time_s"]) == row.wall_time_s


def test_aggregate_of_identical_energies(tmp_path):
    rows = [ResultRow("fig2", 5, "le", r, r, 1.25, 0.0, True) for r in range(10)]
    agg = aggregate(rows)
    assert agg == [{"preset": "fig2", "n": 5, "solver": "le", "count": 10, "mean_energy_J": 1.25,
                    "std_energy_J": 0.0}]
    emit_aggregate_csv(rows, tmp_path / "a.csv")
    assert (tmp_path / "a.csv").read_text().splitlines()[1] == "fig2,5,le,10,1.25,0"


def test_unwritable_path_raises(tmp_path):
    with pytest.raises(OSError):
        emit_csv(rows_fixture(), tmp_path / "missing" / "dir" / "r.csv")


# -- CLI ----------------------------------------------------------------------

@pytest.fixture
def five_ue_instance(tmp_path):
    inst = make_instance([(0.0, 0.0, 819200.0, 1e9)] * 5, ((1200.0, 1200.0), (-1200.0, -1200.0)))
    path = tmp_path / "five.json"
    save_instance(inst, path)
    return path


def test_cli_solve_le_prints_closed_form(five_ue_instance, capsys):
    assert cli.main(["solve", "--instance", str(five_ue_instance), "--solver", "le"]) == 0
    out = capsys.readouterr().out.strip()
    assert out.endswith(" J")
    assert float(out.split()[1]) == pytest.approx(5.0, rel=1e-12)


def test_cli_generate_solve_verify(tmp_path, capsys):
    inst, asg = tmp_path / "i.json", tmp_path / "a.json"
    assert cli.main(["generate", "--preset", "fig3", "--n", "8", "--seed", "3", "--out", str(inst),
                     "--save-spec", str(tmp_path / "s.json")]) == 0
    assert cli.main(["generate", "--spec", str(tmp_path / "s.json"), "--out", str(tmp_path / "j.json")]) == 0
    assert (tmp_path / "j.json").read_text() == inst.read_text()
    assert cli.main(["solve", "--instance", str(inst), "--solver", "rlaa", "--episodes", "50",
                     "--out", str(asg), "--trace", str(tmp_path / "t.csv"),
                     "--qtable", str(tmp_path / "q.txt")]) == 0
    assert len((tmp_path / "t.csv").read_text().splitlines()) == 51
    assert "local" in (tmp_path / "q.txt").read_text() or "uav" in (tmp_path / "q.txt").read_text()
    assert cli.main(["verify", "--instance", str(inst), "--assignment", str(asg)]) == 0
    assert "no constraint violations" in capsys.readouterr().out


def test_cli_verify_reports_infeasible(five_ue_instance, tmp_path, capsys):
    bad = Assignment([Allocation(Action.offload(1, 1), 1e6)] * 5)
    bad.save(tmp_path / "bad.json")
    assert cli.main(["verify", "--instance", str(five_ue_instance), "--assignment", str(tmp_path / "bad.json")]) == 2
    assert "C5" in capsys.readouterr().out


def test_cli_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve", "--solver", "magic", "--instance", "x"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 1
    assert cli.main(["solve", "--instance", str(tmp_path / "nope.json"), "--solver", "le"]) == 1
    (tmp_path / "broken.json").write_text("{")
    assert cli.main(["solve", "--instance", str(tmp_path / "broken.json"), "--solver", "le"]) == 1


def test_cli_sweep_writes_csvs(tmp_path):
    out = tmp_path / "sweep"
    assert cli.main(["sweep", "--preset", "fig2", "--n", "3", "--solvers", "le,go", "--reps", "2",
                     "--out", str(out)]) == 0
    assert len((out / "results.csv").read_text().splitlines()) == 1 + 2 * 2
    assert len((out / "aggregate.csv").read_text().splitlines()) == 1 + 2
    assert "wall_time_s" in (out / "timings.csv").read_text().splitlines()[0]


def test_cli_oracle_exit_codes(capsys):
    args = ["oracle", "--n", "3", "--reps", "2", "--episodes", "3000"]
    assert cli.main(args) == 0
    assert "PASS" in capsys.readouterr().out
    assert cli.main(args + ["--tol", "-0.5"]) == 3
