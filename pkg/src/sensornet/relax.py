"""Relaxed selection problems.

Static problems minimise the A-optimal trace with away-step Frank-Wolfe; the
linear oracle is the simplex over the selection polytope.  Dynamic problems
are linear in the selection (through gamma) and take a single LP.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg, optimize

from .link import LinkTable, build_link_table
from .lp import InfeasibleBudget, SelectionPolytope
from .objective import (Selection, batch_gamma, batch_static_trace, gamma_bound_from_error,
                        gamma_coefficients, kalman_mmse_from_gamma, trace_along)
from .rounding import (DEFAULT_J, DEFAULT_MAX_REGEN, RoundingError, RoundingOutcome,
                       SelectionBudget, exhaustive_search, randomized_round)
from .scenario import Scenario

STATIC_LOPS = "StaticLoPS"
STATIC_BLOPS = "StaticBLoPS"
DYNAMIC_LOPS = "DynamicLoPS"
DYNAMIC_BLOPS = "DynamicBLoPS"
MIN_COST_STATIC = "MinCostStatic"
MIN_COST_DYNAMIC = "MinCostDynamic"
PROBLEM_IDS = (STATIC_LOPS, STATIC_BLOPS, DYNAMIC_LOPS, DYNAMIC_BLOPS, MIN_COST_STATIC, MIN_COST_DYNAMIC)

# problem id -> (source model, scheme, resource mode)
_LAYOUT = {
    STATIC_LOPS: ("static", "analog", "LoPS"),
    STATIC_BLOPS: ("static", "digital", "BLoPS"),
    DYNAMIC_LOPS: ("dynamic", "analog", "LoPS"),
    DYNAMIC_BLOPS: ("dynamic", "digital", "BLoPS"),
}

FW_RTOL = 1e-6  # gap tolerance relative to tr(prior)
FW_MAX_ITER = 5000
BISECTION_STEPS = 40

OK = "optimal"
INFEASIBLE = "infeasible"
MAX_ITER = "max_iter"
STALLED = "stalled"  # line search made no progress; the bound is still certified


class SolveError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Frank-Wolfe

@dataclass
class FWResult:
    x: np.ndarray
    value: float
    gap: float
    iterations: int
    lower_bound: float
    converged: bool
    history: list = field(default_factory=list, repr=False)


def frank_wolfe(f: Callable, grad: Callable, lmo: Callable, x0, tol: float = 1e-6,
                max_iter: int = 1000, line_search: Callable | None = None,
                variant: str | None = None) -> FWResult:
    """Minimise convex ``f`` over a polytope given by its linear minimisation oracle.

    ``lmo(g)`` returns a vertex minimising ``<g, v>``, or a pair ``(v, bound)``
    where ``bound`` is a rigorous lower bound on that minimum (e.g. an LP dual
    bound); the duality gap is then certified even if the oracle is only
    accurate to its pricing tolerance.

    ``line_search(x, d, t_max)`` returns the exact minimiser of ``f(x + t d)``
    on ``[0, t_max]``.  Without it the open-loop step ``2 / (t + 2)`` is used.
    ``variant`` is ``"vanilla"``, ``"away"`` or ``"pairwise"`` (default when a
    line search is given); the last two move weight off the worst active
    vertex and converge linearly on polytopes.  ``lower_bound`` is the best
    certificate ``f(x_t) - gap_t`` seen.
    """
    if variant is None:
        variant = "pairwise" if line_search is not None else "vanilla"
    if variant not in ("vanilla", "away", "pairwise"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant != "vanilla" and line_search is None:
        raise ValueError(f"{variant} steps need a line search")

    def oracle(g):
        out = lmo(g)
        if isinstance(out, tuple):
            v, bound = out
            v = np.asarray(v, dtype=float)
            return v, min(float(bound), float(np.sum(g * v)))
        v = np.asarray(out, dtype=float)
        return v, float(np.sum(g * v))

    x = np.array(x0, dtype=float)
    atoms = {x.tobytes(): [x.copy(), 1.0]}
    value = float(f(x))
    history = [value]
    lower = -np.inf
    gap = np.inf
    for it in range(max_iter + 1):
        g = grad(x)
        v, vmin = oracle(g)
        gx = float(np.sum(g * x))
        gap = max(gx - vmin, 0.0)
        lower = max(lower, value - gap)
        if gap <= tol or it == max_iter:
            break
        fw_dir = v - x
        d, t_max, away_key = fw_dir, 1.0, None
        if variant != "vanilla" and len(atoms) > 1:
            key, (a, alpha) = max(atoms.items(), key=lambda kv: float(np.sum(g * kv[1][0])))
            away_gap = float(np.sum(g * a)) - gx
            if variant == "pairwise":
                d, t_max, away_key = v - a, alpha, key
            elif away_gap > gx - float(np.sum(g * v)) and alpha < 1.0:
                d, t_max, away_key = x - a, alpha / (1.0 - alpha), key
        if line_search is not None:
            t = float(line_search(x, d, t_max))
        else:
            t = min(2.0 / (it + 2.0), t_max)
        if t <= 0.0:
            if away_key is None:
                break  # even the plain Frank-Wolfe direction cannot descend
            # retry next round with a plain step from the same point
            t = float(line_search(x, fw_dir, 1.0))
            if t <= 0.0:
                break
            d, t_max, away_key = fw_dir, 1.0, None
        x = x + t * d
        vkey = v.tobytes()
        if away_key is None:
            if t >= 1.0:
                atoms = {vkey: [v.copy(), 1.0]}
            else:
                for rec in atoms.values():
                    rec[1] *= 1.0 - t
                atoms.setdefault(vkey, [v.copy(), 0.0])[1] += t
        elif variant == "pairwise":
            atoms[away_key][1] -= t
            atoms.setdefault(vkey, [v.copy(), 0.0])[1] += t
            if atoms[away_key][1] <= 1e-15 or t >= t_max:
                del atoms[away_key]
        else:
            for rec in atoms.values():
                rec[1] *= 1.0 + t
            atoms[away_key][1] -= t
            if t >= t_max or atoms[away_key][1] <= 1e-15:
                del atoms[away_key]
        if away_key is not None:
            tot = sum(rec[1] for rec in atoms.values())
            for rec in atoms.values():
                rec[1] /= tot
        new = float(f(x))
        value = new
        history.append(value)
    return FWResult(x, value, gap, len(history) - 1, lower, gap <= tol, history)


class StaticModel:
    """Trace objective on precomputed arrays: ``tr((P^-1 + H^T diag(w.s) H)^-1)``."""

    def __init__(self, prior, H, cell_weights):
        self.prior_inv = linalg.inv(np.asarray(prior, dtype=float))
        self.H = np.asarray(H, dtype=float)
        self.cw = np.asarray(cell_weights, dtype=float)

    def fisher(self, x):
        wl = np.einsum("lkb,lkb->l", x, self.cw)
        return self.prior_inv + (self.H.T * wl) @ self.H

    def value(self, x) -> float:
        c = linalg.cholesky(self.fisher(x), lower=True)
        Ci = linalg.solve_triangular(c, np.eye(c.shape[0]), lower=True)
        return float(np.sum(Ci * Ci))

    def grad(self, x):
        cf = linalg.cho_factor(self.fisher(x), lower=True)
        Z = linalg.cho_solve(cf, self.H.T)
        return -self.cw * np.sum(Z * Z, axis=0)[:, None, None]

    def line_search(self, x, d, t_max):
        dw = np.einsum("lkb,lkb->l", d, self.cw)
        D = (self.H.T * dw) @ self.H
        _, dphi, _ = trace_along(self.fisher(x), D)
        if dphi(0.0) >= 0.0:
            return 0.0
        if not np.isfinite(t_max):
            t_max = 1.0
            while dphi(t_max) < 0.0 and t_max < 1e12:
                t_max *= 2.0
        if dphi(t_max) <= 0.0:
            return t_max
        return optimize.brentq(dphi, 0.0, t_max, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    def rounding_error(self, x, value: float) -> float:
        """Allowance for floating-point error in a trace evaluation near ``x``."""
        m = self.prior_inv.shape[0]
        cond = np.linalg.cond(self.fisher(x))
        return 16.0 * m * np.finfo(float).eps * cond * abs(value)

    def batch(self, cells):
        L = self.H.shape[0]
        return batch_static_trace(linalg.inv(self.prior_inv), self.H, self.cw.reshape(L, -1), cells)


# ---------------------------------------------------------------------------
# problem assembly

@dataclass
class SelectionProblem:
    """One of the four selection problems at fixed budgets.

    Analog problems collapse the bandwidth axis (every column carries the same
    equivalent noise), so their selections are L x (K+1) x 1.
    """

    problem_id: str
    scenario: Scenario
    link: LinkTable
    cost_cap: float
    resource_cap: float
    allowed: np.ndarray | None = None

    def __post_init__(self):
        if self.problem_id not in _LAYOUT:
            raise ValueError(f"unknown problem {self.problem_id!r}")
        self.source, self.scheme, self.mode = _LAYOUT[self.problem_id]
        if self.link.source_model != self.source:
            raise ValueError(f"{self.problem_id} needs a {self.source} link table")
        sc = self.scenario
        if self.scheme == "analog":
            self.widths = np.array([sc.grid.w0])
            allowed = None if self.allowed is None else np.asarray(self.allowed, dtype=bool).any(axis=2, keepdims=True)
        else:
            self.widths = sc.widths
            allowed = None if self.allowed is None else np.asarray(self.allowed, dtype=bool)
        self.mask = allowed
        B = self.widths.size
        self.shape = (sc.L, sc.K + 1, B)
        if self.source == "static":
            self.model = StaticModel(sc.static_prior, self.link.h,
                                     self.link.info_weights(self.scheme)[:, :, :B])
            self.coeffs = None
            self.sense = "min"
        else:
            self.model = None
            self.coeffs = gamma_coefficients(self.link, self.scheme).values[:, :, :B]
            self.sense = "max"
        if self.mask is not None:
            m = self.mask.copy()
            m[:, 0, :] = True
            self.mask = m
        self.budget = SelectionBudget.from_catalog(sc.costs, self.widths, self.cost_cap,
                                                   self.resource_cap, self.mode)

    def polytope(self, extra_ub=None) -> SelectionPolytope:
        return SelectionPolytope(self.scenario.costs, self.widths, self.scenario.L, self.cost_cap,
                                 self.resource_cap, self.mode, self.mask, extra_ub)

    @property
    def prior_trace(self) -> float:
        return float(np.trace(self.scenario.static_prior))

    def batch_objective(self, cells) -> np.ndarray:
        """Objective of Boolean selections given as (n, L) cell arrays."""
        cells = np.atleast_2d(cells)
        if self.mask is not None:
            flat = self.mask.reshape(self.shape[0], -1)
            if not np.all(flat[np.arange(self.shape[0])[None, :], cells]):
                raise ValueError("selection uses a restricted cell")
        if self.source == "static":
            return self.model.batch(cells)
        return batch_gamma(self.coeffs.reshape(self.shape[0], -1), cells)

    def allowed_cells(self, cells) -> np.ndarray:
        if self.mask is None:
            return np.ones(np.atleast_2d(cells).shape[0], dtype=bool)
        flat = self.mask.reshape(self.shape[0], -1)
        return flat[np.arange(self.shape[0])[None, :], np.atleast_2d(cells)].all(axis=1)

    def objective(self, sel) -> float:
        s = np.asarray(sel.weights if isinstance(sel, Selection) else sel, dtype=float)
        if self.source == "static":
            return self.model.value(s)
        return float(np.sum(s * self.coeffs))

    def error(self, value: float) -> float:
        """Estimation error implied by an objective value (identity for static)."""
        if self.source == "static":
            return value
        dp = self.scenario.dynamic_prior
        return float(kalman_mmse_from_gamma(value, dp.a, dp.process_var))

    def initial_point(self) -> np.ndarray:
        L, K1, B = self.shape
        mask = np.ones(self.shape, dtype=bool) if self.mask is None else self.mask
        u = mask / mask.sum(axis=(1, 2), keepdims=True)
        poly = self.budget
        cost = float(np.einsum("lkb,kb->", u, poly.cost_cells))
        res = float(np.einsum("lkb,kb->", u, poly.resource_cells))
        theta = 1.0
        if cost > 0:
            theta = min(theta, self.cost_cap / cost)
        if res > 0:
            theta = min(theta, self.resource_cap / res)
        theta = max(theta, 0.0) * (1 - 1e-12)
        x = theta * u
        x[:, 0, 0] += 1.0 - x.sum(axis=(1, 2))
        return x


def build_problem(problem_id: str, scenario: Scenario, link: LinkTable | None = None,
                  lam: float | None = None, cap: float | None = None, allowed=None) -> SelectionProblem:
    """Assemble a problem; ``cap`` defaults to N (LoPS) or W (BLoPS) from the scenario budgets."""
    source, _, mode = _LAYOUT[problem_id]
    if link is None:
        link = build_link_table(scenario, source)
    lam = scenario.budgets.cost_cap if lam is None else float(lam)
    if cap is None:
        cap = scenario.budgets.channel_cap if mode == "LoPS" else scenario.budgets.bandwidth_cap
    return SelectionProblem(problem_id, scenario, link, lam, float(cap), allowed)


# ---------------------------------------------------------------------------
# reports

@dataclass
class SolveReport:
    problem_id: str
    status: str
    relaxed_selection: Selection | None
    relaxed_value: float  # certified bound: lower for min problems, upper for max problems
    relaxed_objective: float  # objective at the returned relaxed point
    fw_gap: float | None
    iterations: int
    params: dict
    relaxed_error: float | None = None  # estimation error bound (dynamic: M of the gamma bound)
    rounding: RoundingOutcome | None = None
    rounded_value: float | None = None
    rounded_error: float | None = None
    lp_calls: int = 0
    ms: float = 0.0

    def to_dict(self) -> dict:
        sel = self.relaxed_selection
        return {
            "problem_id": self.problem_id,
            "status": self.status,
            "params": {k: self.params[k] for k in sorted(self.params)},
            "relaxed_value": self.relaxed_value,
            "relaxed_objective": self.relaxed_objective,
            "relaxed_error": self.relaxed_error,
            "fw_gap": self.fw_gap,
            "iterations": self.iterations,
            "lp_calls": self.lp_calls,
            "relaxed_selection": None if sel is None else np.round(sel.weights, 12).tolist(),
            "rounded_value": self.rounded_value,
            "rounded_error": self.rounded_error,
            "rounding": None if self.rounding is None else self.rounding.to_dict(),
            "ms": self.ms,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(_finite(self.to_dict()), indent=indent)


def _finite(obj):
    # JSON has no inf/nan; emit them as strings so the output stays strict
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


def _infeasible(problem_id, params, ms=0.0) -> SolveReport:
    return SolveReport(problem_id, INFEASIBLE, None, float("nan"), float("nan"), None, 0, params, ms=ms)


# ---------------------------------------------------------------------------
# solvers

def solve_problem(problem: SelectionProblem, fw_tol: float | None = None,
                  max_iter: int = FW_MAX_ITER) -> SolveReport:
    t0 = time.perf_counter()
    params = {"lambda": problem.cost_cap, "cap": problem.resource_cap}
    if problem.cost_cap < 0 or problem.resource_cap < 0:
        return _infeasible(problem.problem_id, params)
    poly = problem.polytope()
    if problem.source == "static":
        tol = FW_RTOL * problem.prior_trace if fw_tol is None else fw_tol
        m = problem.model
        fw = frank_wolfe(m.value, m.grad, poly.minimize_bounded, problem.initial_point(), tol,
                         max_iter, m.line_search)
        sel = Selection(fw.x)
        status = OK if fw.converged else (MAX_ITER if fw.iterations >= max_iter else STALLED)
        bound = fw.lower_bound - m.rounding_error(fw.x, fw.value)
        rep = SolveReport(problem.problem_id, status, sel, bound, fw.value, fw.gap,
                          fw.iterations, params, relaxed_error=bound,
                          lp_calls=poly.lp_calls)
    else:
        res = poly.solve(problem.coeffs, "max")
        if not res.ok:
            return _infeasible(problem.problem_id, params)
        x = res.x.reshape(problem.shape)
        sel = Selection(x)
        g = problem.objective(sel)
        rep = SolveReport(problem.problem_id, OK, sel, g, g, None, res.iterations, params,
                          relaxed_error=problem.error(g), lp_calls=1)
    rep.ms = (time.perf_counter() - t0) * 1e3
    return rep


def round_report(problem: SelectionProblem, rep: SolveReport, J: int = DEFAULT_J, seed: int = 0,
                 max_regen: int = DEFAULT_MAX_REGEN) -> SolveReport:
    """Attach a randomized rounding of ``rep``'s relaxed selection."""
    if rep.relaxed_selection is None:
        return rep
    t0 = time.perf_counter()
    out = randomized_round(rep.relaxed_selection, J, problem.budget, problem.batch_objective,
                           problem.sense, seed, max_regen, accept=problem.allowed_cells)
    rep.rounding = out
    rep.rounded_value = out.value
    rep.rounded_error = problem.error(out.value)
    rep.ms += (time.perf_counter() - t0) * 1e3
    return rep


def exhaustive(problem: SelectionProblem, cap: int | None = None):
    """Exact Boolean optimum of ``problem``: ``(Selection, value)``."""
    kw = {} if cap is None else {"cap": cap}
    return exhaustive_search(problem.shape, problem.budget, problem.batch_objective, problem.sense,
                             accept=problem.allowed_cells, **kw)


def _solve(problem_id, scenario, link, lam, cap, fw_tol=None, allowed=None):
    return solve_problem(build_problem(problem_id, scenario, link, lam, cap, allowed), fw_tol)


def solve_static_lops(scenario, link=None, lam=None, N=None, fw_tol=None, allowed=None) -> SolveReport:
    """Relaxed analog static problem under a cost cap and a channel-count cap."""
    return _solve(STATIC_LOPS, scenario, link, lam, N, fw_tol, allowed)


def solve_static_blops(scenario, link=None, lam=None, W=None, fw_tol=None, allowed=None) -> SolveReport:
    """Relaxed digital static problem under a cost cap and a bandwidth cap."""
    return _solve(STATIC_BLOPS, scenario, link, lam, W, fw_tol, allowed)


def solve_dynamic_lops(scenario, link=None, lam=None, N=None, allowed=None) -> SolveReport:
    """Maximise analog gamma with one LP; ``relaxed_error`` holds the implied Kalman error."""
    return _solve(DYNAMIC_LOPS, scenario, link, lam, N, None, allowed)


def solve_dynamic_blops(scenario, link=None, lam=None, W=None, allowed=None) -> SolveReport:
    return _solve(DYNAMIC_BLOPS, scenario, link, lam, W, None, allowed)


def max_cost(scenario: Scenario) -> float:
    return float(scenario.L * scenario.costs.max())


def solve_min_cost_static(scenario, link=None, xi: float = None, mode: str = "BLoPS",
                          cap: float | None = None, steps: int = BISECTION_STEPS,
                          tol_lam: float | None = None, certify: str = "round",
                          J: int = DEFAULT_J, seed: int = 0, fw_tol: float | None = None) -> SolveReport:
    """Cheapest Boolean selection whose error trace is at most ``xi``.

    Bisection on the cost cap.  A first pass on the relaxed problem gives a
    certified lower bound on the cost (``relaxed_value``); a second pass
    finds the smallest cap whose Boolean solution (``certify="round"`` for
    randomized rounding, ``"exhaustive"`` for the exact oracle) meets ``xi``.
    """
    t0 = time.perf_counter()
    pid = STATIC_LOPS if mode == "LoPS" else STATIC_BLOPS
    link = build_link_table(scenario, "static") if link is None else link
    prior_tr = float(np.trace(scenario.static_prior))
    params = {"xi": xi, "mode": mode, "certify": certify}
    if xi is None or not xi > 0:
        raise ValueError("xi must be positive")
    hi = max_cost(scenario)
    tol_lam = 1e-6 * max(hi, 1.0) if tol_lam is None else tol_lam
    empty = Selection.empty(scenario.L, scenario.K + 1, 1 if mode == "LoPS" else scenario.B)

    def problem(lam):
        return build_problem(pid, scenario, link, lam, cap)

    if xi >= prior_tr:
        rep = SolveReport(MIN_COST_STATIC, OK, empty, 0.0, 0.0, 0.0, 0, params,
                          rounded_value=0.0, rounded_error=prior_tr)
        rep.rounding = RoundingOutcome(empty, prior_tr, 0, 1, 0)
        rep.params["lambda"] = 0.0
        rep.ms = (time.perf_counter() - t0) * 1e3
        return rep

    top = solve_problem(problem(hi), fw_tol)
    if top.relaxed_value > xi:
        rep = _infeasible(MIN_COST_STATIC, params, (time.perf_counter() - t0) * 1e3)
        rep.relaxed_value = float("inf")
        return rep

    # pass 1: relaxed feasibility, monotone in lambda, certifies a cost lower bound
    lo, up, it = 0.0, hi, 0
    while up - lo > tol_lam and it < steps:
        mid = 0.5 * (lo + up)
        r = solve_problem(problem(mid), fw_tol)
        it += 1
        if r.relaxed_objective <= xi:
            up = mid
        else:
            lo = mid
    cost_lower = lo

    def boolean(lam):
        p = problem(lam)
        if certify == "exhaustive":
            sel, val = exhaustive(p)
            return (sel, val, None) if sel is not None else (None, np.inf, None)
        r = solve_problem(p, fw_tol)
        try:
            out = randomized_round(r.relaxed_selection, J, p.budget, p.batch_objective, "min", seed)
        except RoundingError:
            return None, np.inf, None
        return out.selection, out.value, out

    sel, val, out = boolean(hi)
    if sel is None or val > xi:
        rep = _infeasible(MIN_COST_STATIC, params, (time.perf_counter() - t0) * 1e3)
        rep.relaxed_value = cost_lower
        return rep
    best = (hi, sel, val, out)
    lo2, up2 = cost_lower, hi
    # pass 2: Boolean certificate; the cap shrinks to the certifying selection's own cost
    while up2 - lo2 > tol_lam and it < 2 * steps:
        mid = 0.5 * (lo2 + up2)
        s, v, o = boolean(mid)
        it += 1
        if s is not None and v <= xi:
            c = float(np.einsum("lkb,kb->", s.weights, problem(mid).budget.cost_cells))
            best = (c, s, v, o)
            up2 = min(mid, c)
        else:
            lo2 = mid
    c, s, v, o = best
    c = float(np.einsum("lkb,kb->", s.weights, problem(c).budget.cost_cells))
    params["lambda"] = c
    rep = SolveReport(MIN_COST_STATIC, OK, s, cost_lower, c, None, it, params,
                      relaxed_error=None, rounded_value=c, rounded_error=v)
    rep.rounding = o if o is not None else RoundingOutcome(s, v, 0, 1, 0)
    rep.ms = (time.perf_counter() - t0) * 1e3
    return rep


def solve_min_cost_dynamic(scenario, link=None, xi: float = None, mode: str = "LoPS",
                           cap: float | None = None, J: int = DEFAULT_J, seed: int = 0,
                           round_result: bool = True) -> SolveReport:
    """Cheapest selection whose steady-state Kalman error is at most ``xi``.

    The error target becomes the linear constraint ``gamma(s) >= xi_tilde``,
    so the relaxation is a single LP; rounding then looks for the cheapest
    Boolean draw meeting the same floor.
    """
    t0 = time.perf_counter()
    pid = DYNAMIC_LOPS if mode == "LoPS" else DYNAMIC_BLOPS
    link = build_link_table(scenario, "dynamic") if link is None else link
    dp = scenario.dynamic_prior
    xi_t = gamma_bound_from_error(xi, dp.a, dp.process_var)
    params = {"xi": xi, "xi_tilde": xi_t, "mode": mode}
    p = build_problem(pid, scenario, link, max_cost(scenario), cap)
    cost_obj = np.broadcast_to(p.budget.cost_cells, p.shape)
    if xi_t > float(p.coeffs.max(axis=(1, 2)).sum()) * (1 + 1e-12):
        return _infeasible(MIN_COST_DYNAMIC, params, (time.perf_counter() - t0) * 1e3)
    poly = p.polytope(extra_ub=[(-p.coeffs.ravel(), -xi_t)])
    res = poly.solve(cost_obj, "min")
    if not res.ok:
        return _infeasible(MIN_COST_DYNAMIC, params, (time.perf_counter() - t0) * 1e3)
    sel = Selection(res.x.reshape(p.shape))
    cost = float(res.value)
    params["lambda"] = cost
    rep = SolveReport(MIN_COST_DYNAMIC, OK, sel, cost, cost, None, res.iterations, params,
                      relaxed_error=p.error(p.objective(sel)), lp_calls=1)
    if round_result:
        cost_flat = p.budget.cost_cells.ravel()
        coeff_flat = p.coeffs.reshape(p.shape[0], -1)

        def floor_met(cells):
            return batch_gamma(coeff_flat, cells) >= xi_t * (1 - 1e-12)

        # the cost cap is lifted: cost is the objective here
        free = SelectionBudget(p.budget.cost_cells, p.budget.resource_cells, np.inf,
                               p.resource_cap, p.mode)
        try:
            out = randomized_round(sel, J, free, lambda c: cost_flat[c].sum(axis=1), "min", seed,
                                   accept=floor_met)
            rep.rounding = out
            rep.rounded_value = out.value
            rep.rounded_error = p.error(float(batch_gamma(coeff_flat, out.selection.assignment()[None])[0]))
        except RoundingError:
            rep.status = "rounding_failed"
    rep.ms = (time.perf_counter() - t0) * 1e3
    return rep


__all__ = [
    "PROBLEM_IDS", "FWResult", "SelectionProblem", "SolveReport", "StaticModel", "build_problem",
    "exhaustive", "frank_wolfe", "round_report", "solve_dynamic_blops", "solve_dynamic_lops",
    "solve_min_cost_dynamic", "solve_min_cost_static", "solve_problem", "solve_static_blops",
    "solve_static_lops", "InfeasibleBudget", "SolveError",
]
