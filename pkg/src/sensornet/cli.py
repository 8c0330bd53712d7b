"""Command-line harness: solve, sweep, restrict, verify, simulate, dump-links."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .link import (build_link_table, per_channel_power, quantization_var, quantization_var_limit, snr,
                   snr_from_grid, snr_with_copies)
from .lp import CyclingError
from .montecarlo import simulate_dynamic, simulate_static_analog, simulate_static_digital
from .objective import Selection, gamma_coefficients, kalman_mmse_from_gamma, kalman_riccati_iterate
from .relax import (DYNAMIC_BLOPS, DYNAMIC_LOPS, MIN_COST_DYNAMIC, MIN_COST_STATIC, PROBLEM_IDS,
                    STATIC_BLOPS, STATIC_LOPS, SolveError, _finite, build_problem,
                    round_report, solve_min_cost_dynamic, solve_min_cost_static, solve_problem)
from .rounding import RoundingError, feasibility_check
from .scenario import BOLTZMANN, Scenario, ScenarioError, read_scenario

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_INFEASIBLE = 2
EXIT_SOLVER = 3
EXIT_CONFIG = 4

CSV_HEADER = ["lambda", "relaxed", "rounded", "mc", "mc_ci", "counts_by_type", "counts_by_bw", "ms"]
SWEEP_PROBLEMS = (STATIC_LOPS, STATIC_BLOPS, DYNAMIC_LOPS, DYNAMIC_BLOPS)
SWEEP_FW_TOL = 1e-9  # absolute; keeps the frontier monotone well inside 1e-8


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    scenario_path: str
    problem_id: str
    lambdas: tuple[float, ...] = ()
    xi: float | None = None
    J: int = 1000
    seed: int = 0
    trials: int = 0
    steps: int = 10_000
    output: str = "-"
    fmt: str = "csv"
    fw_tol: float | None = None
    jobs: int = 1
    restrict_type: int | None = None
    restrict_bw: int | None = None
    timing: bool = True

    def __post_init__(self):
        if self.problem_id not in PROBLEM_IDS:
            raise ConfigError(f"unknown problem {self.problem_id!r}; choose from {', '.join(PROBLEM_IDS)}")
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.size and (np.any(~np.isfinite(lam)) or np.any(np.diff(lam) <= 0)):
            raise ConfigError("lambda grid must be finite and strictly increasing")
        if self.trials < 0:
            raise ConfigError("trials must be nonnegative (0 disables simulation)")
        if self.J < 1:
            raise ConfigError("J must be at least 1")
        if self.fmt not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")


@dataclass
class ResultRow:
    lam: float
    relaxed: float | None
    rounded: float | None
    mc: float | None = None
    mc_ci: float | None = None
    counts_by_type: list = field(default_factory=list)
    counts_by_bw: list = field(default_factory=list)
    ms: int = 0
    error: str | None = None

    def to_dict(self) -> dict:
        d = {"lambda": self.lam, "relaxed": self.relaxed, "rounded": self.rounded, "mc": self.mc,
             "mc_ci": self.mc_ci, "counts_by_type": list(self.counts_by_type),
             "counts_by_bw": list(self.counts_by_bw), "ms": self.ms}
        if self.error is not None:
            d["error"] = self.error
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ResultRow":
        return cls(d["lambda"], d["relaxed"], d["rounded"], d["mc"], d["mc_ci"], d["counts_by_type"],
                   d["counts_by_bw"], d["ms"], d.get("error"))


# ---------------------------------------------------------------------------
# sweeps

def restriction_mask(scenario: Scenario, restrict_type: int | None = None,
                     restrict_bw: int | None = None) -> np.ndarray | None:
    """Allowed-cell mask keeping only one sensor type and/or one bandwidth (t0 always allowed)."""
    if restrict_type is None and restrict_bw is None:
        return None
    K1, B = scenario.K + 1, scenario.B
    mask = np.ones((scenario.L, K1, B), dtype=bool)
    if restrict_type is not None:
        if not 1 <= restrict_type <= scenario.K:
            raise ConfigError(f"restricted type must lie in 1..{scenario.K}")
        mask[:, 1:, :] = False
        mask[:, restrict_type, :] = True
    if restrict_bw is not None:
        if not 0 <= restrict_bw < B:
            raise ConfigError(f"restricted bandwidth index must lie in 0..{B - 1}")
        keep = np.zeros(B, dtype=bool)
        keep[restrict_bw] = True
        mask[:, 1:, ~keep] = False
    mask[:, 0, :] = True
    return mask


def _simulate(problem, sel: Selection, trials: int, steps: int, seed: int):
    sc, link = problem.scenario, problem.link
    if problem.source == "static":
        sim = simulate_static_analog if problem.scheme == "analog" else simulate_static_digital
        return sim(sc, link, sel, trials, seed)
    return simulate_dynamic(sc, link, sel, steps, trials, seed, problem.scheme)


def _sweep_point(args):
    scenario, run, lam = args
    t0 = time.perf_counter()
    mask = restriction_mask(scenario, run.restrict_type, run.restrict_bw)
    problem = build_problem(run.problem_id, scenario, None, lam, None, mask)
    fw_tol = SWEEP_FW_TOL if run.fw_tol is None else run.fw_tol
    rep = round_report(problem, solve_problem(problem, fw_tol), run.J, run.seed)
    sel = rep.rounding.selection
    verdict = feasibility_check(sel, problem.budget)
    if not verdict:
        raise SolveError(f"rounded selection fails feasibility: {'; '.join(verdict.violations)}")
    mc = ci = None
    if run.trials > 0:
        sim = _simulate(problem, sel, run.trials, run.steps, run.seed)
        mc, ci = sim.empirical_mse, sim.ci_halfwidth
    ms = int(round((time.perf_counter() - t0) * 1e3)) if run.timing else 0
    return ResultRow(float(lam), rep.relaxed_error, rep.rounded_error, mc, ci, sel.counts_by_type(),
                     sel.counts_by_bandwidth(), ms)


def run_sweep(run: RunConfig, scenario: Scenario | None = None) -> list[ResultRow]:
    """Solve, round and optionally simulate every lambda of ``run``, in lambda order.

    A failing point ends the sweep: the rows before it are returned followed
    by an error row (``error`` set, numeric fields None).
    """
    if run.problem_id not in SWEEP_PROBLEMS:
        raise ConfigError(f"sweeps support {', '.join(SWEEP_PROBLEMS)}")
    if not run.lambdas:
        raise ConfigError("empty lambda grid")
    scenario = read_scenario(run.scenario_path) if scenario is None else scenario
    tasks = [(scenario, run, lam) for lam in run.lambdas]
    rows = []
    if run.jobs > 1:
        with ProcessPoolExecutor(max_workers=run.jobs) as pool:
            futures = [pool.submit(_sweep_point, t) for t in tasks]
            for lam, fut in zip(run.lambdas, futures):
                try:
                    rows.append(fut.result())
                except (SolveError, RoundingError, CyclingError, np.linalg.LinAlgError) as exc:
                    rows.append(ResultRow(float(lam), None, None, error=f"{type(exc).__name__}: {exc}"))
                    for f in futures:
                        f.cancel()
                    break
    else:
        for t in tasks:
            try:
                rows.append(_sweep_point(t))
            except (SolveError, RoundingError, CyclingError, np.linalg.LinAlgError) as exc:
                rows.append(ResultRow(float(t[2]), None, None, error=f"{type(exc).__name__}: {exc}"))
                break
    return rows


def run_restriction_study(run: RunConfig, scenario: Scenario | None = None) -> dict[str, list[ResultRow]]:
    """Flexible sweep plus one sweep per single-type and (digital) single-bandwidth restriction.

    The bandwidth cap is kept at its configured value under every restriction.
    """
    from dataclasses import replace
    scenario = read_scenario(run.scenario_path) if scenario is None else scenario
    out = {"flexible": run_sweep(replace(run, restrict_type=None, restrict_bw=None), scenario)}
    for k in range(1, scenario.K + 1):
        out[f"type={k}"] = run_sweep(replace(run, restrict_type=k, restrict_bw=None), scenario)
    if run.problem_id in (STATIC_BLOPS, DYNAMIC_BLOPS):
        for b in range(scenario.B):
            out[f"bw={b}"] = run_sweep(replace(run, restrict_type=None, restrict_bw=b), scenario)
    return out


# ---------------------------------------------------------------------------
# output

def _num(x) -> str:
    return "" if x is None else repr(float(x))


def _counts(c) -> str:
    return ";".join(str(int(v)) for v in c)


def format_csv(rows, prefix: list[str] | None = None) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow((["variant"] if prefix is not None else []) + CSV_HEADER)
    for i, r in enumerate(rows):
        counts_t = f"ERROR {r.error}" if r.error else _counts(r.counts_by_type)
        line = [_num(r.lam), _num(r.relaxed), _num(r.rounded), _num(r.mc), _num(r.mc_ci), counts_t,
                _counts(r.counts_by_bw), str(int(r.ms))]
        wr.writerow(([prefix[i]] if prefix is not None else []) + line)
    return buf.getvalue()


def format_json(rows) -> str:
    return json.dumps([_finite(r.to_dict()) for r in rows], indent=2) + "\n"


def emit_results(rows, fmt: str = "csv", path: str = "-") -> str:
    """Write rows as CSV or JSON to ``path`` (``-`` for stdout); returns the text."""
    if not rows:
        raise ValueError("no rows to emit")
    text = format_csv(rows) if fmt == "csv" else format_json(rows)
    _write(text, path)
    return text


def _write(text: str, path: str):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# model identity checks

@dataclass
class Check:
    name: str
    passed: bool
    max_deviation: float
    tolerance: float
    detail: dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "checks": [{"name": c.name, "passed": c.passed, "max_deviation": c.max_deviation,
                            "tolerance": c.tolerance, "detail": c.detail} for c in self.checks]}


def _rel(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    both_inf = np.isinf(a) & np.isinf(b) & (np.sign(a) == np.sign(b))
    scale = np.maximum(np.abs(a), np.abs(b))
    with np.errstate(invalid="ignore", divide="ignore"):
        d = np.where(scale > 0, np.abs(a - b) / scale, 0.0)
    return np.where(both_inf, 0.0, d)


def factorizations(N: int) -> list[tuple[int, int]]:
    return [(t, N // t) for t in range(1, N + 1) if N % t == 0]


def check_grid_invariance(scenario: Scenario, tol: float = 1e-12) -> Check:
    """SNR from the resource-block width equals the per-channel route for every (N_T, N_F)."""
    link = build_link_table(scenario, "static")
    g = scenario.grid
    P = link.P[:, 1:, None]
    gl = link.g[:, None, None]
    nb = scenario.channel_counts[None, None, :]
    direct = snr(P, gl, link.temperature, scenario.widths[None, None, :])
    worst = 0.0
    facts = factorizations(g.N)
    for N_T, N_F in facts:
        via = snr_from_grid(P, gl, link.temperature, g.T, g.W, N_T, N_F, nb)
        if P.size:
            worst = max(worst, float(np.max(_rel(direct, via))))
    return Check("grid_invariance", worst <= tol, worst, tol, {"factorizations": len(facts)})


def check_copy_invariance(scenario: Scenario, copies=(1, 2, 5, 10, 50), tol: float = 1e-12) -> Check:
    """Analog noise under energy-split duplicate transmission does not depend on the copy count."""
    link = build_link_table(scenario, "static")
    g = scenario.grid
    P = link.P[:, 1:]
    gl = link.g[:, None]
    sx2 = link.sigma_x2[:, None]
    ref = None
    worst = 0.0
    traces = []
    best = np.zeros((scenario.L, scenario.K + 1, 1))
    best[:, -1, 0] = 1.0
    for n in copies:
        P_hat = per_channel_power(P, g.T, g.tau0, n)
        s = snr_with_copies(P_hat, gl, link.sigma_phi2, n)
        with np.errstate(divide="ignore"):
            se2 = np.where(np.asarray(s) > 0, link.sigma_v2 + sx2 / s, np.inf)
        if ref is None:
            ref = se2
        elif se2.size:
            worst = max(worst, float(np.max(_rel(se2, ref))))
        if scenario.K >= 1:
            w = np.zeros((scenario.L, scenario.K + 1, 1))
            w[:, 1:, 0] = 1.0 / se2
            traces.append(_trace_with_weights(scenario.static_prior, link.h, w, best))
    if len(traces) > 1:
        worst = max(worst, float(np.max(_rel(traces, traces[0]))))
    return Check("copy_invariance", worst <= tol, worst, tol, {"copies": list(copies)})


def _trace_with_weights(prior, H, w, sel):
    wl = np.einsum("lkb,lkb->l", sel, w)
    F = np.linalg.inv(prior) + (H.T * wl) @ H
    return float(np.trace(np.linalg.inv(F)))


def _scalar_view(scenario: Scenario) -> Scenario:
    if scenario.m == 1:
        return scenario
    # the scalar-source checks use the first source on its own
    return scenario.with_changes(sources=np.array(scenario.sources[:1]),
                                 static_prior=np.array(scenario.static_prior[:1, :1]))


def check_gamma_ranking(scenario: Scenario, n_sel: int = 200, seed: int = 0, tol: float = 1e-9) -> Check:
    """Kalman error is a decreasing function of gamma: root residual, Riccati agreement, ranking."""
    sc = _scalar_view(scenario)
    dp = sc.dynamic_prior
    a, q = dp.a, dp.process_var
    if sc.K == 0:
        return Check("gamma_ranking", True, 0.0, tol, {"vacuous": True})
    link = build_link_table(sc, "dynamic")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 3])))
    resid = ricc = rank = 0.0
    for scheme in ("analog", "digital"):
        c = gamma_coefficients(link, scheme).values.reshape(sc.L, -1)
        cells = rng.integers(0, c.shape[1], size=(n_sel, sc.L))
        gam = c[np.arange(sc.L)[None, :], cells].sum(axis=1)
        M = kalman_mmse_from_gamma(gam, a, q)
        r = a * a * gam * M * M + (1 + q * gam - a * a) * M - q
        resid = max(resid, float(np.max(np.abs(r))))
        for gv, mv in zip(gam[:20], M[:20]):
            ricc = max(ricc, abs(kalman_riccati_iterate(float(gv), a, q) - float(mv)))
        order = np.argsort(-gam, kind="stable")
        Ms = M[order]
        rank = max(rank, float(np.max(np.maximum(Ms[:-1] - Ms[1:], 0.0), initial=0.0)))
    worst = max(resid, ricc, rank)
    return Check("gamma_ranking", worst <= tol, worst, tol,
                 {"residual": resid, "riccati": ricc, "ranking_violation": rank, "selections": 2 * n_sel})


def check_quantization_limit(scenario: Scenario, tol: float = 1e-9) -> Check:
    """Quantization distortion at a very wide block matches the closed-form limit.

    The gap to the limit shrinks like x^2 / N_b with x = P g N / (kappa Delta W),
    so each cell is evaluated at N_b = 1e12 * max(1, x^2) channels.
    """
    link = build_link_table(scenario, "static")
    g = scenario.grid
    worst, saturated, cells = 0.0, 0, 0
    for l in range(scenario.L):
        for k in range(1, scenario.K + 1):
            P, gl, sx2 = float(link.P[l, k]), float(link.g[l]), float(link.sigma_x2[l])
            lim, sat = quantization_var_limit(sx2, P, gl, g.N, link.temperature, g.W)
            x = P * gl * g.N / (BOLTZMANN * link.temperature * g.W)
            nb = 1e12 * max(1.0, x * x)
            wb = nb * g.W / g.N
            qv = quantization_var(sx2, snr(P, gl, link.temperature, wb), nb)
            saturated += sat
            cells += 1
            worst = max(worst, float(_rel(qv, lim)))
    return Check("quantization_limit", worst <= tol, worst, tol, {"cells": cells, "saturated": saturated})


def verify_propositions(scenario: Scenario) -> VerificationReport:
    return VerificationReport([check_grid_invariance(scenario), check_copy_invariance(scenario),
                               check_gamma_ranking(scenario), check_quantization_limit(scenario)])


# ---------------------------------------------------------------------------
# argument handling

def _seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("SENSORNET_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"SENSORNET_SEED must be an integer, got {env!r}") from None
    return 0


def _lambdas(args) -> tuple[float, ...]:
    if args.lam_grid:
        try:
            a, b, n = args.lam_grid.split(":")
            return tuple(float(v) for v in np.linspace(float(a), float(b), int(n)))
        except ValueError:
            raise ConfigError("--lam-grid expects start:stop:count") from None
    if args.lam:
        try:
            return tuple(float(v) for v in args.lam.split(","))
        except ValueError:
            raise ConfigError("--lam expects comma-separated numbers") from None
    return ()


def _run_config(args, lambdas) -> RunConfig:
    return RunConfig(args.scenario, args.problem, lambdas, getattr(args, "xi", None), args.J,
                     _seed(args.seed), args.trials, args.steps, args.output, args.format, args.fw_tol,
                     getattr(args, "jobs", 1), getattr(args, "restrict_type", None),
                     getattr(args, "restrict_bw", None), not args.no_timing)


def _common(p, problem=True):
    p.add_argument("scenario", help="scenario JSON file")
    if problem:
        p.add_argument("--problem", default=STATIC_BLOPS, help=f"one of {', '.join(PROBLEM_IDS)}")
        p.add_argument("--lam", help="cost cap, or comma-separated caps")
        p.add_argument("--lam-grid", help="start:stop:count evenly spaced caps")
        p.add_argument("--J", type=int, default=1000, help="rounding realizations per round")
        p.add_argument("--seed", type=int, default=None, help="seed (falls back to SENSORNET_SEED, then 0)")
        p.add_argument("--trials", type=int, default=0, help="Monte Carlo trials (0 disables)")
        p.add_argument("--steps", type=int, default=10_000, help="time steps per dynamic trial")
        p.add_argument("--fw-tol", type=float, default=None, help="Frank-Wolfe gap tolerance (absolute)")
        p.add_argument("--no-timing", action="store_true", help="report ms as 0 for byte-stable output")
    p.add_argument("-o", "--output", default="-", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sensornet", description="Sensor selection planner for "
                                 "energy-harvesting IoT networks")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve and round one problem instance (JSON report)")
    _common(p)
    p.add_argument("--xi", type=float, help="error target for the min-cost problems")
    p.add_argument("--mode", choices=("LoPS", "BLoPS"), default=None, help="scheme for min-cost problems")
    p.add_argument("--restrict-type", type=int)
    p.add_argument("--restrict-bw", type=int)

    p = sub.add_parser("sweep", help="solve over a cost grid (CSV/JSON rows)")
    _common(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--restrict-type", type=int)
    p.add_argument("--restrict-bw", type=int)

    p = sub.add_parser("restrict", help="flexible vs single-type / single-bandwidth sweeps")
    _common(p)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("simulate", help="solve, round and simulate (JSON report)")
    _common(p)

    p = sub.add_parser("verify", help="numeric checks of the modelling identities (JSON)")
    _common(p, problem=False)

    p = sub.add_parser("dump-links", help="link table as CSV")
    _common(p, problem=False)
    p.add_argument("--source", choices=("static", "dynamic"), default=None)
    return ap


def _cmd_solve(args) -> int:
    run = _run_config(args, _lambdas(args))
    sc = read_scenario(run.scenario_path)
    if run.problem_id == MIN_COST_STATIC:
        if run.xi is None:
            raise ConfigError("--xi is required for MinCostStatic")
        rep = solve_min_cost_static(sc, xi=run.xi, mode=args.mode or "BLoPS", J=run.J, seed=run.seed,
                                    fw_tol=run.fw_tol)
    elif run.problem_id == MIN_COST_DYNAMIC:
        if run.xi is None:
            raise ConfigError("--xi is required for MinCostDynamic")
        rep = solve_min_cost_dynamic(sc, xi=run.xi, mode=args.mode or "LoPS", J=run.J, seed=run.seed)
    else:
        if len(run.lambdas) > 1:
            raise ConfigError("solve takes a single --lam; use sweep for a grid")
        lam = run.lambdas[0] if run.lambdas else None
        mask = restriction_mask(sc, run.restrict_type, run.restrict_bw)
        problem = build_problem(run.problem_id, sc, None, lam, None, mask)
        rep = solve_problem(problem, run.fw_tol)
        if rep.status != "infeasible":
            rep = round_report(problem, rep, run.J, run.seed)
    if not run.timing:
        rep.ms = 0.0
    _write(rep.to_json() + "\n", run.output)
    return EXIT_INFEASIBLE if rep.status == "infeasible" else EXIT_OK


def _cmd_sweep(args) -> int:
    run = _run_config(args, _lambdas(args))
    rows = run_sweep(run)
    emit_results(rows, run.fmt, run.output)
    return EXIT_SOLVER if rows[-1].error else EXIT_OK


def _cmd_restrict(args) -> int:
    run = _run_config(args, _lambdas(args))
    study = run_restriction_study(run)
    if run.fmt == "json":
        text = json.dumps({k: [_finite(r.to_dict()) for r in v] for k, v in study.items()}, indent=2) + "\n"
    else:
        rows, names = [], []
        for name, rs in study.items():
            rows += rs
            names += [name] * len(rs)
        text = format_csv(rows, names)
    _write(text, run.output)
    return EXIT_SOLVER if any(r.error for rs in study.values() for r in rs) else EXIT_OK


def _cmd_simulate(args) -> int:
    run = _run_config(args, _lambdas(args))
    if run.problem_id not in SWEEP_PROBLEMS:
        raise ConfigError(f"simulate supports {', '.join(SWEEP_PROBLEMS)}")
    sc = read_scenario(run.scenario_path)
    lam = run.lambdas[0] if run.lambdas else None
    problem = build_problem(run.problem_id, sc, None, lam)
    rep = solve_problem(problem, run.fw_tol)
    if rep.status == "infeasible":
        return EXIT_INFEASIBLE
    rep = round_report(problem, rep, run.J, run.seed)
    trials = run.trials or (50 if problem.source == "dynamic" else 10_000)
    sim = _simulate(problem, rep.rounding.selection, trials, run.steps, run.seed)
    _write(sim.to_json() + "\n", run.output)
    return EXIT_OK


def _cmd_verify(args) -> int:
    report = verify_propositions(read_scenario(args.scenario))
    _write(json.dumps(_finite(report.to_dict()), indent=2) + "\n", args.output)
    return EXIT_OK if report.passed else EXIT_FAILED_CHECK


def _cmd_dump_links(args) -> int:
    sc = read_scenario(args.scenario)
    source = args.source or ("dynamic" if sc.m == 1 else "static")
    _write(build_link_table(sc, source).to_csv(), args.output)
    return EXIT_OK


COMMANDS = {"solve": _cmd_solve, "sweep": _cmd_sweep, "restrict": _cmd_restrict,
            "simulate": _cmd_simulate, "verify": _cmd_verify, "dump-links": _cmd_dump_links}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ScenarioError, ConfigError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RoundingError, CyclingError, SolveError, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
