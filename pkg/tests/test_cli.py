import json
from pathlib import Path

import numpy as np
import pytest

from sensornet.cli import (CSV_HEADER, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, ConfigError,
                           ResultRow, RunConfig, check_gamma_ranking, emit_results, factorizations,
                           format_csv, format_json, main, run_restriction_study, run_sweep,
                           verify_propositions)
from sensornet.relax import build_problem, solve_problem
from sensornet.rounding import feasibility_check
from sensornet.scenario import load_scenario, reference_path, scenario_to_dict

GOLDEN = Path(__file__).parent / "golden"
STATIC = str(reference_path("reference_static"))
DYNAMIC = str(reference_path("reference_dynamic"))


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sweep_csv_header_and_rows(capsys):
    code, out, _ = run_cli(capsys, "sweep", DYNAMIC, "--problem", "DynamicLoPS", "--lam", "3", "--no-timing")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "lambda,relaxed,rounded,mc,mc_ci,counts_by_type,counts_by_bw,ms"
    assert len(lines) == 2


def test_golden_sweep(capsys):
    code, out, _ = run_cli(capsys, "sweep", DYNAMIC, "--problem", "DynamicBLoPS", "--lam-grid", "5:35:4",
                           "--no-timing")
    assert code == EXIT_OK
    assert out == (GOLDEN / "dynamic_blops_sweep.csv").read_text()


def test_byte_determinism(capsys, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.json"
        code, _, _ = run_cli(capsys, "sweep", STATIC, "--problem", "StaticBLoPS", "--lam", "10,30",
                             "--format", "json", "--no-timing", "-o", path)
        assert code == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_json_round_trip(capsys):
    code, out, _ = run_cli(capsys, "sweep", DYNAMIC, "--problem", "DynamicLoPS", "--lam", "2,6",
                           "--format", "json", "--no-timing")
    rows = [ResultRow.from_dict(d) for d in json.loads(out)]
    assert format_json(rows) == out
    assert list(json.loads(out)[0]) == ["lambda", "relaxed", "rounded", "mc", "mc_ci", "counts_by_type",
                                        "counts_by_bw", "ms"]


def test_single_lambda_sweep_matches_direct_solve():
    sc = load_scenario(Path(DYNAMIC).read_text())
    rows = run_sweep(RunConfig(DYNAMIC, "DynamicLoPS", (7.0,), timing=False), sc)
    rep = solve_problem(build_problem("DynamicLoPS", sc, None, 7.0))
    assert rows[0].relaxed == rep.relaxed_error


def test_sweep_is_monotone_and_feasible():
    sc = load_scenario(Path(STATIC).read_text())
    lams = tuple(np.linspace(5, 40, 5))
    rows = run_sweep(RunConfig(STATIC, "StaticBLoPS", lams, timing=False), sc)
    assert [r.lam for r in rows] == list(lams)
    rel = [r.relaxed for r in rows]
    assert all(b <= a + 1e-8 for a, b in zip(rel, rel[1:]))
    for r in rows:
        assert r.rounded >= r.relaxed
        assert sum(r.counts_by_type) == sum(r.counts_by_bw)


def test_jobs_keep_lambda_order():
    sc = load_scenario(Path(DYNAMIC).read_text())
    lams = (2.0, 4.0, 8.0, 16.0)
    serial = run_sweep(RunConfig(DYNAMIC, "DynamicBLoPS", lams, timing=False), sc)
    parallel = run_sweep(RunConfig(DYNAMIC, "DynamicBLoPS", lams, jobs=3, timing=False), sc)
    assert format_csv(serial) == format_csv(parallel)


def test_restriction_study_flexible_dominates():
    sc = load_scenario(Path(STATIC).read_text())
    study = run_restriction_study(RunConfig(STATIC, "StaticBLoPS", (10.0, 30.0), timing=False), sc)
    assert set(study) == {"flexible", "type=1", "type=2", "type=3", "bw=0", "bw=1", "bw=2"}
    for name, rows in study.items():
        for flex, r in zip(study["flexible"], rows):
            assert flex.relaxed <= r.relaxed + 1e-8, name


def test_restrict_subcommand_csv(capsys):
    code, out, _ = run_cli(capsys, "restrict", DYNAMIC, "--problem", "DynamicLoPS", "--lam", "4", "--no-timing")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "variant," + ",".join(CSV_HEADER)
    assert {ln.split(",")[0] for ln in lines[1:]} == {"flexible", "type=1", "type=2", "type=3"}


def test_solve_reports_feasible_rounding(capsys):
    code, out, _ = run_cli(capsys, "solve", STATIC, "--problem", "StaticLoPS", "--lam", "20", "--no-timing")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["status"] in ("optimal", "stalled")
    sc = load_scenario(Path(STATIC).read_text())
    p = build_problem("StaticLoPS", sc, None, 20.0)
    from sensornet.objective import Selection
    sel = Selection.from_assignment(rep["rounding"]["cells"], sc.K + 1, 1)
    assert feasibility_check(sel, p.budget).passed
    assert rep["ms"] == 0.0


def test_min_cost_solves(capsys):
    code, out, _ = run_cli(capsys, "solve", DYNAMIC, "--problem", "MinCostDynamic", "--xi", "0.5")
    assert code == EXIT_OK and json.loads(out)["params"]["xi"] == 0.5
    code, out, _ = run_cli(capsys, "solve", DYNAMIC, "--problem", "MinCostDynamic", "--xi", "0.01")
    assert code == EXIT_INFEASIBLE  # below the analog floor of about 0.04
    code, _, err = run_cli(capsys, "solve", DYNAMIC, "--problem", "MinCostDynamic")
    assert code == EXIT_CONFIG and "--xi" in err


def test_infeasible_exit_code(capsys):
    code, out, _ = run_cli(capsys, "solve", STATIC, "--problem", "StaticBLoPS", "--lam", "-1")
    assert code == EXIT_INFEASIBLE
    assert json.loads(out)["status"] == "infeasible"


def test_config_errors(capsys, tmp_path):
    assert run_cli(capsys, "sweep", tmp_path / "missing.json", "--lam", "1")[0] == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    doc = json.loads(Path(DYNAMIC).read_text())
    doc["dynamic_prior"]["a"] = 1.5
    bad.write_text(json.dumps(doc))
    code, _, err = run_cli(capsys, "verify", bad)
    assert code == EXIT_CONFIG and "dynamic_prior.a" in err
    assert run_cli(capsys, "sweep", DYNAMIC, "--lam", "3,1")[0] == EXIT_CONFIG
    assert run_cli(capsys, "sweep", DYNAMIC, "--problem", "Nope", "--lam", "1")[0] == EXIT_CONFIG
    assert run_cli(capsys, "sweep", DYNAMIC, "--lam-grid", "1:2")[0] == EXIT_CONFIG


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(STATIC, "StaticBLoPS", (1.0, 1.0))
    with pytest.raises(ConfigError):
        RunConfig(STATIC, "StaticBLoPS", trials=-1)


def test_seed_environment_fallback(capsys, monkeypatch):
    monkeypatch.setenv("SENSORNET_SEED", "17")
    _, env_out, _ = run_cli(capsys, "solve", STATIC, "--lam", "12", "--J", "20", "--no-timing")
    monkeypatch.delenv("SENSORNET_SEED")
    _, flag_out, _ = run_cli(capsys, "solve", STATIC, "--lam", "12", "--J", "20", "--seed", "17", "--no-timing")
    assert env_out == flag_out
    monkeypatch.setenv("SENSORNET_SEED", "x")
    assert run_cli(capsys, "solve", STATIC, "--lam", "12")[0] == EXIT_CONFIG


def test_simulate_subcommand(capsys):
    code, out, _ = run_cli(capsys, "simulate", DYNAMIC, "--problem", "DynamicBLoPS", "--lam", "10",
                           "--trials", "5", "--steps", "400")
    assert code == EXIT_OK
    d = json.loads(out)
    assert d["trials"] == 5 and d["empirical_mse"] > 0


def test_dump_links(capsys):
    code, out, _ = run_cli(capsys, "dump-links", DYNAMIC)
    assert code == EXIT_OK
    assert out.splitlines()[0] == "l,k,b,P,P_hat,snr,sigma_x2,sigma_e2,Q,sigma_q2,sigma_etilde2"


def test_emit_results(tmp_path):
    rows = [ResultRow(1.0, 0.5, 0.6, None, None, [1, 0], [0, 1], 3)]
    path = tmp_path / "out.csv"
    text = emit_results(rows, "csv", str(path))
    assert path.read_text() == text
    assert text.splitlines() == [",".join(CSV_HEADER), "1.0,0.5,0.6,,,1;0,0;1,3"]
    with pytest.raises(ValueError):
        emit_results([], "csv", str(path))
    err = format_csv([ResultRow(2.0, None, None, error="SolveError: boom")])
    assert "ERROR SolveError: boom" in err


# verification

def test_verify_reference_passes(capsys):
    for path in (STATIC, DYNAMIC):
        code, out, _ = run_cli(capsys, "verify", path)
        assert code == EXIT_OK
        for c in json.loads(out)["checks"]:
            assert c["passed"] and c["max_deviation"] < 1e-9


def test_verify_with_only_auxiliary_type():
    doc = scenario_to_dict(load_scenario(Path(DYNAMIC).read_text()))
    doc["sensor_types"] = doc["sensor_types"][:1]
    report = verify_propositions(load_scenario(json.dumps(doc)))
    assert report.passed


def test_verify_wide_power_range():
    doc = scenario_to_dict(load_scenario(Path(DYNAMIC).read_text()))
    for t, cap in zip(doc["sensor_types"][1:], (1e-12, 1e-6, 1.0)):
        t["battery_cap"] = {"w": cap}
        t["eh_efficiency"] = 1.0
    report = verify_propositions(load_scenario(json.dumps(doc)))
    for c in report.checks:
        assert c.passed or c.max_deviation > c.tolerance  # a failure names the broken tolerance


def test_gamma_ranking_check_on_reference():
    sc = load_scenario(Path(DYNAMIC).read_text())
    assert check_gamma_ranking(sc).passed


def test_factorizations():
    assert factorizations(12) == [(1, 12), (2, 6), (3, 4), (4, 3), (6, 2), (12, 1)]
