"""Dense revised simplex for small box-bounded linear programs.

The selection problems have a few dozen rows (one per location plus the
coupling budgets) and a few hundred [0, 1]-bounded columns.  Bounds are
handled implicitly (bound flipping), so only the real constraints enter the
basis.  Pricing is Dantzig's rule with lowest-index tie breaking; after a run
of degenerate pivots the solver switches to Bland's rule, which cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

DEFAULT_TOL = 1e-9


class CyclingError(RuntimeError):
    """Raised if the pivot limit is hit even under Bland's rule."""


@dataclass
class LinearProgram:
    """``min|max c^T x`` s.t. ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``0 <= x <= upper``.

    ``upper`` defaults to ones (the unit box); entries may be 0 to pin a
    variable or ``inf`` to leave it unbounded above.
    """

    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    upper: np.ndarray | None = None
    sense: str = "min"

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A_ub = np.zeros((0, n)) if self.A_ub is None else np.atleast_2d(np.asarray(self.A_ub, dtype=float))
        self.b_ub = np.zeros(0) if self.b_ub is None else np.asarray(self.b_ub, dtype=float).ravel()
        self.A_eq = np.zeros((0, n)) if self.A_eq is None else np.atleast_2d(np.asarray(self.A_eq, dtype=float))
        self.b_eq = np.zeros(0) if self.b_eq is None else np.asarray(self.b_eq, dtype=float).ravel()
        self.upper = np.ones(n) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if self.A_ub.shape != (self.b_ub.size, n) or self.A_eq.shape != (self.b_eq.size, n):
            raise ValueError("constraint matrix dimensions are inconsistent")
        if self.upper.size != n or np.any(self.upper < 0):
            raise ValueError("upper bounds must be nonnegative, one per variable")
        if not (np.all(np.isfinite(self.b_ub)) and np.all(np.isfinite(self.b_eq))):
            raise ValueError("right-hand sides must be finite")
        if self.sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")

    @property
    def n(self) -> int:
        return self.c.size

    def dump(self) -> str:
        """Plain-text tableau for debugging."""
        rows = [f"{self.sense} " + " ".join(f"{v:+.6g}" for v in self.c)]
        for a, b in zip(self.A_ub, self.b_ub):
            rows.append(" ".join(f"{v:+.6g}" for v in a) + f" <= {b:.6g}")
        for a, b in zip(self.A_eq, self.b_eq):
            rows.append(" ".join(f"{v:+.6g}" for v in a) + f" == {b:.6g}")
        rows.append("ub " + " ".join(f"{v:.6g}" for v in self.upper))
        return "\n".join(rows)


@dataclass
class LPResult:
    x: np.ndarray | None
    value: float
    status: str
    iterations: int = 0
    dual_bound: float = float("nan")
    basis: tuple | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


class _Simplex:
    """Working state for one standard-form problem ``A x = b, 0 <= x <= u``."""

    def __init__(self, A, b, u, tol, max_iter):
        self.A, self.b, self.u = A, b, u
        self.tol = tol
        self.max_iter = max_iter
        self.iterations = 0

    def nonbasic_values(self, basis, at_upper):
        x = np.where(at_upper, self.u, 0.0)
        x[basis] = 0.0
        return x

    def primal(self, basis, at_upper):
        x = self.nonbasic_values(basis, at_upper)
        xB = np.linalg.solve(self.A[:, basis], self.b - self.A @ x)
        x[basis] = xB
        return x, xB

    def run(self, c, basis, at_upper):
        """Optimise ``c`` from a primal-feasible basis. Returns (status, basis, at_upper)."""
        A, u, tol = self.A, self.u, self.tol
        m, n = A.shape
        basis = list(basis)
        at_upper = at_upper.copy()
        movable = u > 0
        bland = False
        degenerate_run = 0
        while True:
            if self.iterations >= self.max_iter:
                if bland:
                    raise CyclingError(f"simplex exceeded {self.max_iter} pivots under Bland's rule")
                bland = True
                self.max_iter *= 2
            self.iterations += 1
            B = A[:, basis]
            _, xB = self.primal(basis, at_upper)
            y = np.linalg.solve(B.T, c[basis])
            d = c - A.T @ y
            is_basic = np.zeros(n, dtype=bool)
            is_basic[basis] = True
            improving = ~is_basic & movable & np.where(at_upper, d > tol, d < -tol)
            cand = np.flatnonzero(improving)
            if cand.size == 0:
                return OPTIMAL, basis, at_upper
            if bland:
                j = int(cand[0])
            else:
                j = int(cand[np.argmax(np.abs(d[cand]))])  # argmax keeps the lowest index on ties
            sigma = -1.0 if at_upper[j] else 1.0
            col = np.linalg.solve(B, A[:, j])
            dxB = -sigma * col
            uB = u[basis]
            piv_tol = 1e-11
            with np.errstate(divide="ignore", invalid="ignore"):
                to_lower = np.where(dxB < -piv_tol, xB / -dxB, np.inf)
                to_upper = np.where((dxB > piv_tol) & np.isfinite(uB), (uB - xB) / dxB, np.inf)
            ratios = np.maximum(np.minimum(to_lower, to_upper), 0.0)
            t_basic = ratios.min() if m else np.inf
            t_flip = u[j]
            if not np.isfinite(t_basic) and not np.isfinite(t_flip):
                return UNBOUNDED, basis, at_upper
            if t_flip <= t_basic:
                at_upper[j] = not at_upper[j]
                degenerate_run = 0
                continue
            ties = np.flatnonzero(ratios <= t_basic + 1e-12)
            if bland:
                r = int(ties[np.argmin(np.asarray(basis)[ties])])
            else:
                r = int(ties[np.argmax(np.abs(col[ties]))])
            leaving = basis[r]
            at_upper[leaving] = bool(to_upper[r] < to_lower[r])
            basis[r] = j
            at_upper[j] = False
            if t_basic <= tol:
                degenerate_run += 1
                if degenerate_run > 50:
                    bland = True
            else:
                degenerate_run = 0


def _row_scale(A):
    s = np.max(np.abs(A), axis=1) if A.size else np.ones(A.shape[0])
    return np.where(s > 0, s, 1.0)


def _standard_form(lp: LinearProgram):
    m_ub, m_eq, n = lp.b_ub.size, lp.b_eq.size, lp.n
    # rows are equilibrated so one pricing tolerance suits a row in Hz and a row in currency
    r_ub, r_eq = _row_scale(lp.A_ub), _row_scale(lp.A_eq)
    A = np.zeros((m_ub + m_eq, n + m_ub))
    A[:m_ub, :n] = lp.A_ub / r_ub[:, None]
    A[:m_ub, n:] = np.eye(m_ub)
    A[m_ub:, :n] = lp.A_eq / r_eq[:, None]
    b = np.concatenate([lp.b_ub / r_ub, lp.b_eq / r_eq])
    u = np.concatenate([lp.upper, np.full(m_ub, np.inf)])
    return A, b, u


def solve_lp(lp: LinearProgram, tol: float = DEFAULT_TOL, max_iter: int = 50_000,
             warm_start: tuple | None = None) -> LPResult:
    """Solve ``lp`` to an optimal basic solution.

    ``warm_start`` is the ``basis`` attribute of an earlier result on a
    problem with the same constraints; it skips phase one when still feasible.
    """
    A, b, u = _standard_form(lp)
    m, n_std = A.shape
    c_min = lp.c if lp.sense == "min" else -lp.c
    c = np.concatenate([c_min, np.zeros(n_std - lp.n)])
    sign = 1.0 if lp.sense == "min" else -1.0

    if m == 0:
        x = np.where(c < 0, u, 0.0)
        if np.any(np.isinf(x)):
            return LPResult(None, sign * -np.inf, UNBOUNDED)
        val = float(c @ x)
        return LPResult(x[:lp.n], sign * val, OPTIMAL, 0, sign * val, ([], np.zeros(n_std, dtype=bool)))

    solver = None
    basis = at_upper = None
    iterations = 0
    if warm_start is not None:
        wb, wu = warm_start
        if len(wb) == m and wu.size >= n_std:
            solver = _Simplex(A, b, u, tol, max_iter)
            try:
                x, xB = solver.primal(list(wb), wu[:n_std])
                ub = u[list(wb)]
                if np.all(xB >= -1e-9) and np.all(xB <= ub + 1e-9):
                    basis, at_upper = list(wb), wu[:n_std].copy()
            except np.linalg.LinAlgError:
                pass

    if basis is None:
        # phase one: artificial columns wherever a slack cannot start feasible
        m_ub = lp.b_ub.size
        art_rows = [i for i in range(m) if not (i < m_ub and b[i] >= 0)]
        n_art = len(art_rows)
        A1 = np.hstack([A, np.zeros((m, n_art))])
        for t, i in enumerate(art_rows):
            A1[i, n_std + t] = 1.0 if b[i] >= 0 else -1.0
        u1 = np.concatenate([u, np.full(n_art, np.inf)])
        c1 = np.concatenate([np.zeros(n_std), np.ones(n_art)])
        basis = []
        art_of = dict(zip(art_rows, range(n_art)))
        for i in range(m):
            basis.append(n_std + art_of[i] if i in art_of else lp.n + i)
        at_upper = np.zeros(n_std + n_art, dtype=bool)
        phase1 = _Simplex(A1, b, u1, tol, max_iter)
        status, basis, at_upper = phase1.run(c1, basis, at_upper)
        iterations += phase1.iterations
        x1, _ = phase1.primal(basis, at_upper)
        infeas = float(c1 @ x1)
        if infeas > max(tol, 1e-9 * max(1.0, np.abs(b).max())):
            return LPResult(None, float("nan"), INFEASIBLE, iterations)
        # phase two keeps the artificial columns pinned at zero
        A, u = A1, np.concatenate([u, np.zeros(n_art)])
        c = np.concatenate([c, np.zeros(n_art)])
        solver = _Simplex(A, b, u, tol, max_iter)
    else:
        solver = _Simplex(A, b, u, tol, max_iter)

    status, basis, at_upper = solver.run(c, basis, at_upper)
    iterations += solver.iterations
    if status == UNBOUNDED:
        return LPResult(None, sign * -np.inf, UNBOUNDED, iterations)

    x, _ = solver.primal(basis, at_upper)
    fin = np.isfinite(u)
    x = np.clip(x, 0.0, np.where(fin, u, np.inf))
    near_lo = np.abs(x) <= 1e-12
    near_hi = fin & (np.abs(x - np.where(fin, u, 0.0)) <= 1e-12)
    x[near_lo] = 0.0
    x[near_hi] = u[near_hi]
    value = float(c @ x)

    # Lagrangian bound from the final basis; inequality multipliers are
    # clipped to their sign so the bound stays valid despite pricing tolerance
    y = np.linalg.solve(A[:, basis].T, c[basis])
    y[:lp.b_ub.size] = np.minimum(y[:lp.b_ub.size], 0.0)
    d = c - A.T @ y
    ub_fin = np.where(fin, u, 0.0)
    dual = float(y @ b + np.sum(np.where(fin, np.minimum(d, 0.0) * ub_fin, 0.0)))
    if np.any(~fin & (d < 0)):
        dual = -np.inf
    full_upper = np.zeros(max(at_upper.size, n_std), dtype=bool)
    full_upper[:at_upper.size] = at_upper
    keep = tuple(basis) if max(basis) < n_std else None
    warm = (list(keep), full_upper[:n_std]) if keep is not None else None
    return LPResult(x[:lp.n].copy(), sign * value, OPTIMAL, iterations, sign * dual, warm)


# ---------------------------------------------------------------------------
# selection polytope

class SelectionPolytope:
    """Relaxed selection set: one unit of mass per location, cost and resource caps.

    ``mode="LoPS"`` charges one channel per placed sensor against
    ``resource_cap``; ``mode="BLoPS"`` charges the resource block ``w_b``.
    The auxiliary type (k = 0) never consumes budget.  ``allowed`` masks
    cells out of the set (selection restrictions); the auxiliary type is
    always allowed.
    """

    def __init__(self, costs, widths, L: int, cost_cap: float, resource_cap: float,
                 mode: str = "BLoPS", allowed=None, extra_ub=None):
        costs = np.asarray(costs, dtype=float)
        widths = np.asarray(widths, dtype=float)
        K1, B = costs.size, widths.size
        self.shape = (L, K1, B)
        if mode == "BLoPS":
            resource = np.tile(widths, (K1, 1))
        elif mode == "LoPS":
            resource = np.ones((K1, B))
        else:
            raise ValueError(f"unknown mode {mode!r}")
        resource[0, :] = 0.0
        cost_cells = np.repeat(costs[:, None], B, axis=1)
        n = L * K1 * B
        A_eq = np.kron(np.eye(L), np.ones((1, K1 * B)))
        A_ub = np.vstack([np.tile(cost_cells.ravel(), L), np.tile(resource.ravel(), L)])
        b_ub = np.array([cost_cap, resource_cap], dtype=float)
        if extra_ub is not None:
            for row, rhs in extra_ub:
                A_ub = np.vstack([A_ub, np.asarray(row, dtype=float).ravel()])
                b_ub = np.append(b_ub, rhs)
        upper = np.ones(n)
        if allowed is not None:
            mask = np.array(allowed, dtype=bool).reshape(L, K1, B)
            mask[:, 0, :] = True
            upper = mask.ravel().astype(float)
        self.mode = mode
        self.cost_cells = cost_cells
        self.resource_cells = resource
        self.cost_cap = float(cost_cap)
        self.resource_cap = float(resource_cap)
        self.upper = upper
        self._template = LinearProgram(np.zeros(n), A_ub, b_ub, A_eq, np.ones(L), upper)
        self._warm = None
        self.lp_calls = 0
        self.lp_pivots = 0

    def linear_program(self, objective, sense: str = "min") -> LinearProgram:
        t = self._template
        return LinearProgram(np.asarray(objective, dtype=float).ravel(), t.A_ub, t.b_ub,
                             t.A_eq, t.b_eq, t.upper, sense)

    def solve(self, objective, sense: str = "min", tol: float = DEFAULT_TOL) -> LPResult:
        res = solve_lp(self.linear_program(objective, sense), tol=tol, warm_start=self._warm)
        self.lp_calls += 1
        self.lp_pivots += res.iterations
        if res.ok and res.basis is not None:
            self._warm = res.basis
        return res

    def minimize(self, objective, tol: float = DEFAULT_TOL) -> np.ndarray:
        """Vertex minimising ``<objective, s>``, shaped (L, K+1, B)."""
        return self.minimize_bounded(objective, tol)[0]

    def minimize_bounded(self, objective, tol: float = DEFAULT_TOL):
        """Vertex plus a rigorous lower bound on the linear minimum."""
        res = self.solve(objective, "min", tol)
        if not res.ok:
            raise InfeasibleBudget(f"selection polytope is {res.status}")
        return res.x.reshape(self.shape), min(res.value, res.dual_bound)

    def cost(self, s) -> float:
        return float(np.einsum("lkb,kb->", np.asarray(s).reshape(self.shape), self.cost_cells))

    def resource(self, s) -> float:
        return float(np.einsum("lkb,kb->", np.asarray(s).reshape(self.shape), self.resource_cells))


class InfeasibleBudget(ValueError):
    pass


def lmo_selection_polytope(objective, costs, widths, cost_cap: float, resource_cap: float,
                           mode: str = "BLoPS", allowed=None):
    """Vertex of the relaxed selection polytope minimising a linear objective.

    Returns ``(vertex, result)``; ``vertex`` is None when the budgets are
    infeasible (negative cost cap).
    """
    objective = np.asarray(objective, dtype=float)
    L = objective.shape[0]
    poly = SelectionPolytope(costs, widths, L, cost_cap, resource_cap, mode, allowed)
    res = poly.solve(objective)
    if not res.ok:
        return None, res
    return res.x.reshape(poly.shape), res
