"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line with its runtime."""

import json
import time

import numpy as np
import pytest

from sensornet import reference_scenario
from sensornet.cli import RunConfig, factorizations, run_restriction_study, run_sweep
from sensornet.link import (build_link_table, quantization_var, quantization_var_limit, snr,
                            snr_from_grid)
from sensornet.montecarlo import simulate_dynamic, simulate_static_analog
from sensornet.objective import (Selection, batch_gamma, gamma_coefficients, kalman_mmse_from_gamma,
                                 kalman_riccati_iterate, static_error_trace, static_gradient)
from sensornet.relax import (DYNAMIC_BLOPS, DYNAMIC_LOPS, STATIC_BLOPS, STATIC_LOPS, build_problem,
                             exhaustive, round_report, solve_problem)
from sensornet.scenario import load_scenario, reference_path, scenario_to_dict

from factory import random_scenario


def report(capsys, number, title, passed, detail, elapsed, limit):
    ok = bool(passed) and elapsed < limit
    with capsys.disabled():
        print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {title}: {detail} "
              f"({elapsed:.2f} s, limit {limit:g} s)")
    assert passed, detail
    assert elapsed < limit, f"runtime {elapsed:.2f} s exceeds {limit} s"


def test_criterion_1_grid_factorisation(capsys):
    t0 = time.perf_counter()
    sc = reference_scenario("reference_static")
    link = build_link_table(sc)
    N = 5040  # 60 divisors
    w0_fixed = 1e3
    W = N * w0_fixed
    temp = link.temperature
    pairs = factorizations(N)
    P = link.P[:, 1:].ravel()
    g = np.repeat(link.g, sc.K)
    worst = 0.0
    for w_b in sc.widths:
        direct = snr(P, g, temp, w_b)
        for NT, NF in pairs:
            w0 = W / NF
            N_b = w_b * NT / w0  # same resource block under this factorisation
            grid = snr_from_grid(P, g, temp, sc.grid.T, W, NT, NF, N_b)
            worst = max(worst, float(np.max(np.abs(grid - direct) / direct)))
    elapsed = time.perf_counter() - t0
    report(capsys, 1, "SNR independent of grid factorisation",
           len(pairs) >= 20 and worst <= 1e-12,
           f"{len(pairs)} factorisations of N={N}, max rel dev {worst:.2e} (tol 1e-12)", elapsed, 1)


def test_criterion_2_duplicate_transmission(capsys):
    t0 = time.perf_counter()
    doc = scenario_to_dict(reference_scenario("reference_static"))
    w0 = doc["grid"]["W"] / doc["grid"]["N_F"]
    base = None
    rng = np.random.default_rng(0)
    worst_e = worst_f = 0.0
    sels = None
    for n in (1, 2, 5, 10, 50):
        doc["bandwidths"] = [{"hz": w0 * n, "channels": n}]
        sc = load_scenario(json.dumps(doc))
        link = build_link_table(sc)
        e = link.sigma_e2[:, 1:, 0]
        if sels is None:
            sels = [Selection(rng.dirichlet(np.ones(sc.K + 1), size=sc.L)[:, :, None]) for _ in range(5)]
            sels += [Selection.from_assignment(rng.integers(0, sc.K + 1, sc.L), sc.K + 1, 1) for _ in range(5)]
        f = np.array([static_error_trace(sc.static_prior, link, s, "analog") for s in sels])
        if base is None:
            base = (e, f)
            continue
        worst_e = max(worst_e, float(np.max(np.abs(e - base[0]) / base[0])))
        worst_f = max(worst_f, float(np.max(np.abs(f - base[1]) / base[1])))
    elapsed = time.perf_counter() - t0
    report(capsys, 2, "analog noise and Static-LoPS objective constant in N_b",
           worst_e <= 1e-12 and worst_f <= 1e-12,
           f"N_b in {{1,2,5,10,50}}: max rel dev sigma_e2 {worst_e:.2e}, objective {worst_f:.2e} (tol 1e-12)",
           elapsed, 1)


def test_criterion_3_kalman_ranking(capsys):
    t0 = time.perf_counter()
    worst_res = worst_ric = 0.0
    rank_fail = 0
    for i in range(100):
        rng = np.random.default_rng(3000 + i)
        sc = random_scenario(rng, L=int(rng.integers(3, 8)), K=2, B=2, m=1)
        link = build_link_table(sc, "dynamic")
        dp = sc.dynamic_prior
        a, q = dp.a, dp.process_var
        scheme = "analog" if i % 2 else "digital"
        c = gamma_coefficients(link, scheme).values.reshape(sc.L, -1)
        cells = rng.integers(0, c.shape[1], size=(50, sc.L))
        g = batch_gamma(c, cells)
        M = kalman_mmse_from_gamma(g, a, q)
        res = a * a * g * M * M + (1 + q * g - a * a) * M - q
        worst_res = max(worst_res, float(np.max(np.abs(res))))
        for gi, Mi in zip(g, M):
            worst_ric = max(worst_ric, abs(kalman_riccati_iterate(gi, a, q) - Mi))
        order = np.argsort(-g, kind="stable")
        rank_fail += int(np.any(np.diff(M[order]) < 0))
    elapsed = time.perf_counter() - t0
    report(capsys, 3, "steady-state Kalman closed form and gamma ranking",
           worst_res < 1e-9 and worst_ric <= 1e-8 and rank_fail == 0,
           f"100 scenarios x 50 selections: max residual {worst_res:.2e}, max Riccati dev {worst_ric:.2e}, "
           f"ranking violations {rank_fail}", elapsed, 10)


def test_criterion_4_quantization_limit(capsys):
    t0 = time.perf_counter()
    sc = reference_scenario("reference_static")
    link = build_link_table(sc)
    grid = sc.grid
    # weakest type-1 link: the one whose distortion is furthest from saturating at 1e12 Hz
    l = int(np.argmin(link.P[:, 1] * link.g))
    P, g, sx = link.P[l, 1], link.g[l], link.sigma_x2[l]
    w_b = 1e12
    N_b = w_b * grid.N / grid.W
    got = quantization_var(sx, snr(P, g, link.temperature, w_b), N_b)
    lim, saturated = quantization_var_limit(sx, P, g, grid.N, link.temperature, grid.W)
    dev = abs(got - lim) / lim
    elapsed = time.perf_counter() - t0
    x = P * g * grid.N / (1.380649e-23 * link.temperature * grid.W)
    report(capsys, 4, "distortion at w_b = 1e12 Hz matches the wide-band limit",
           not saturated and dev <= 1e-6,
           f"location {l}, type 1, exponent {x:.3f}: sigma_q2 {got:.6e} vs limit {lim:.6e}, "
           f"rel dev {dev:.2e} (tol 1e-6)", elapsed, 1)


def test_criterion_5_sandwich_and_rounding(capsys):
    t0 = time.perf_counter()
    lines = []
    ok = True
    for pid in (STATIC_BLOPS, STATIC_LOPS):
        violations = close = 0
        for i in range(50):
            rng = np.random.default_rng(1000 + i)
            L = int(rng.integers(3, 7))
            sc = random_scenario(rng, L=L, K=2, B=2, m=2)
            lam = 0.5 * L * sc.costs.max()
            cap = 0.5 * L * sc.widths.max() if pid == STATIC_BLOPS else max(1, L // 2)
            p = build_problem(pid, sc, lam=lam, cap=cap)
            rep = round_report(p, solve_problem(p), J=1000, seed=i)
            _, best = exhaustive(p)
            violations += not (rep.relaxed_value <= best <= rep.rounded_value)
            close += rep.rounded_value <= 1.05 * best
        ok &= violations == 0 and close >= 45
        lines.append(f"{pid}: sandwich violations {violations}/50, within 5% {close}/50")
    elapsed = time.perf_counter() - t0
    report(capsys, 5, "relaxed <= exhaustive <= rounded, rounding within 5%", ok,
           "; ".join(lines) + " (need 0 and >= 45)", elapsed, 300)


def test_criterion_6_digital_beats_analog(capsys):
    t0 = time.perf_counter()
    st, dy = reference_scenario("reference_static"), reference_scenario("reference_dynamic")
    nb_ok = bool(np.all(st.channel_counts >= 10) and np.all(dy.channel_counts >= 10))
    lines = []
    ok = nb_ok
    for sc, digital, analog in ((st, STATIC_BLOPS, STATIC_LOPS), (dy, DYNAMIC_BLOPS, DYNAMIC_LOPS)):
        for lam in (10.0, 20.0, sc.budgets.cost_cap):
            d = round_report(p := build_problem(digital, sc, lam=lam), solve_problem(p), seed=1)
            a = round_report(q := build_problem(analog, sc, lam=lam), solve_problem(q), seed=1)
            ok &= d.rounded_error <= a.rounded_error
            lines.append(f"{digital[:-5]} lam={lam:g}: digital {d.rounded_error:.4g} vs analog {a.rounded_error:.4g}")
    elapsed = time.perf_counter() - t0
    report(capsys, 6, "digital rounded MMSE <= analog at equal budgets", ok,
           f"N_b >= 10: {nb_ok}; " + "; ".join(lines), elapsed, 60)


def test_criterion_7_monte_carlo(capsys):
    t0 = time.perf_counter()
    st = reference_scenario("reference_static")
    p = build_problem(STATIC_LOPS, st)
    sel = round_report(p, solve_problem(p), seed=0).rounding.selection
    s = simulate_static_analog(st, p.link, sel, trials=100_000, seed=7)
    dy = reference_scenario("reference_dynamic")
    assert (dy.dynamic_prior.a, dy.dynamic_prior.process_var) == (0.71, 5)
    q = build_problem(DYNAMIC_LOPS, dy)
    dsel = round_report(q, solve_problem(q), seed=0).rounding.selection
    d = simulate_dynamic(dy, q.link, dsel, steps=10_000, trials=50, seed=7, scheme="analog")
    elapsed = time.perf_counter() - t0
    report(capsys, 7, "Monte Carlo agrees with the analytic errors",
           s.rel_error <= 0.02 and d.rel_error <= 0.03,
           f"static analog {s.empirical_mse:.5g} vs {s.predicted:.5g} (rel {s.rel_error:.2%}, tol 2%); "
           f"dynamic {d.empirical_mse:.5g} vs {d.predicted:.5g} (rel {d.rel_error:.2%}, tol 3%)",
           elapsed, 120)


def test_criterion_8_cost_frontier(capsys):
    t0 = time.perf_counter()
    lines = []
    ok = True
    for name, pid in (("reference_static", STATIC_BLOPS), ("reference_dynamic", DYNAMIC_BLOPS)):
        sc = reference_scenario(name)
        lams = tuple(float(x) for x in np.linspace(4, 40, 10))
        study = run_restriction_study(RunConfig(str(reference_path(name)), pid, lams, J=200, timing=False), sc)
        flex = [r.relaxed for r in study["flexible"]]
        mono = max(b - a for a, b in zip(flex, flex[1:]))
        dominated = max(f - r.relaxed for rows in study.values() for f, r in zip(flex, rows))
        ok &= mono <= 1e-8 and dominated <= 1e-8 and not any(r.error for v in study.values() for r in v)
        lines.append(f"{pid}: max increase {mono:.2e}, max flexible-minus-restricted {dominated:.2e} "
                     f"over {len(study) - 1} restrictions")
    elapsed = time.perf_counter() - t0
    report(capsys, 8, "monotone cost frontier, flexible below restricted", ok,
           "; ".join(lines) + " (slack 1e-8)", elapsed, 300)


def test_criterion_9_gradient(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    step = 1e-6
    for i in range(20):
        rng = np.random.default_rng(9000 + i)
        sc = random_scenario(rng, L=4, K=2, B=2, m=int(rng.integers(1, 4)))
        link = build_link_table(sc)
        scheme = "digital" if i % 2 else "analog"
        s = rng.dirichlet(np.ones((sc.K + 1) * sc.B), size=sc.L).reshape(link.shape)
        g = static_gradient(sc.static_prior, link, s, scheme)
        for idx in np.ndindex(*s.shape):
            if idx[1] == 0:
                continue
            up, dn = s.copy(), s.copy()
            up[idx] += step
            dn[idx] -= step
            fd = (static_error_trace(sc.static_prior, link, up, scheme)
                  - static_error_trace(sc.static_prior, link, dn, scheme)) / (2 * step)
            worst = max(worst, abs(g[idx] - fd) / abs(fd))
    elapsed = time.perf_counter() - t0
    report(capsys, 9, "analytic gradient matches central differences", worst <= 1e-5,
           f"20 instances, max rel dev {worst:.2e} (tol 1e-5)", elapsed, 10)
