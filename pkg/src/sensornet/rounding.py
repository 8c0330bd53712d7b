"""Randomized rounding of relaxed selections and the exhaustive oracle.

A Boolean selection is carried as an integer vector ``cells`` with one flat
cell index ``k * B + b`` per location, which keeps batch feasibility checks
and objective evaluations vectorised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .objective import Selection

FEAS_RTOL = 1e-12
DEFAULT_J = 1000
DEFAULT_MAX_REGEN = 20
ENUMERATION_CAP = 20_000_000
_CHUNK = 1 << 16


class RoundingError(RuntimeError):
    pass


class EnumerationTooLarge(ValueError):
    pass


def _rng(seed: int, *key: int) -> np.random.Generator:
    # counter-based stream, so each (seed, key) is independent of call order
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


@dataclass(frozen=True)
class SelectionBudget:
    """Cost and resource caps over cells; the auxiliary type uses neither."""

    cost_cells: np.ndarray  # (K+1, B)
    resource_cells: np.ndarray  # (K+1, B): w_b (BLoPS) or 1 (LoPS), row 0 zero
    cost_cap: float
    resource_cap: float
    mode: str = "BLoPS"

    def __post_init__(self):
        c = np.asarray(self.cost_cells, dtype=float)
        r = np.asarray(self.resource_cells, dtype=float)
        if c.shape != r.shape:
            raise ValueError("cost and resource tables must have the same shape")
        if np.any(c[0] != 0) or np.any(r[0] != 0):
            raise ValueError("the auxiliary type must not consume budget")
        object.__setattr__(self, "cost_cells", c)
        object.__setattr__(self, "resource_cells", r)

    @classmethod
    def from_catalog(cls, costs, widths, cost_cap, resource_cap, mode="BLoPS"):
        costs = np.asarray(costs, dtype=float)
        widths = np.asarray(widths, dtype=float)
        cost_cells = np.repeat(costs[:, None], widths.size, axis=1)
        if mode == "BLoPS":
            res = np.tile(widths, (costs.size, 1))
        elif mode == "LoPS":
            res = np.ones((costs.size, widths.size))
        else:
            raise ValueError(f"unknown mode {mode!r}")
        res[0] = 0.0
        return cls(cost_cells, res, float(cost_cap), float(resource_cap), mode)

    @property
    def shape(self):
        return self.cost_cells.shape

    def totals(self, cells):
        cells = np.atleast_2d(cells)
        return self.cost_cells.ravel()[cells].sum(axis=1), self.resource_cells.ravel()[cells].sum(axis=1)

    def feasible(self, cells) -> np.ndarray:
        cost, res = self.totals(cells)
        return (cost <= self.cost_cap * (1 + FEAS_RTOL) + FEAS_RTOL) & \
               (res <= self.resource_cap * (1 + FEAS_RTOL) + FEAS_RTOL)


@dataclass(frozen=True)
class Verdict:
    passed: bool
    violations: tuple[str, ...] = ()
    cost: float = 0.0
    resource: float = 0.0

    def __bool__(self):
        return self.passed


def feasibility_check(sel: Selection, budget: SelectionBudget) -> Verdict:
    """Check a Boolean selection against the one-cell-per-location rule and both caps."""
    w = np.asarray(sel.weights if isinstance(sel, Selection) else sel, dtype=float)
    violations = []
    L = w.shape[0]
    flat = w.reshape(L, -1)
    if not np.all((flat == 0) | (flat == 1)):
        violations.append("selection is not Boolean")
    nnz = np.count_nonzero(flat, axis=1)
    for l in np.flatnonzero(nnz != 1):
        violations.append(f"||S_{l}||_0 = {int(nnz[l])}, expected 1")
    cost = float(np.einsum("lkb,kb->", w, budget.cost_cells))
    res = float(np.einsum("lkb,kb->", w, budget.resource_cells))
    if cost > budget.cost_cap * (1 + FEAS_RTOL) + FEAS_RTOL:
        violations.append(f"cost {cost!r} exceeds cap {budget.cost_cap!r}")
    if res > budget.resource_cap * (1 + FEAS_RTOL) + FEAS_RTOL:
        what = "bandwidth" if budget.mode == "BLoPS" else "channel count"
        violations.append(f"{what} {res!r} exceeds cap {budget.resource_cap!r}")
    return Verdict(not violations, tuple(violations), cost, res)


@dataclass(frozen=True)
class RoundingOutcome:
    selection: Selection
    value: float
    draws: int  # realizations drawn over all rounds
    feasible_count: int  # feasible realizations in the accepted round
    regen_rounds: int
    index: int = field(default=0)  # winning realization within its round

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "draws": self.draws,
            "feasible_count": self.feasible_count,
            "regen_rounds": self.regen_rounds,
            "counts_by_type": self.selection.counts_by_type(),
            "counts_by_bw": self.selection.counts_by_bandwidth(),
            "cells": [int(c) for c in self.selection.assignment()],
        }


def sample_cells(probs: np.ndarray, J: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``J`` cell vectors; location ``l`` picks cell ``c`` with probability ``probs[l, c]``."""
    L, C = probs.shape
    cdf = np.cumsum(probs, axis=1)
    cdf[:, -1] = 1.0
    u = rng.random((J, L))
    out = np.empty((J, L), dtype=np.int64)
    for l in range(L):
        out[:, l] = np.searchsorted(cdf[l], u[:, l], side="right")
    np.minimum(out, C - 1, out=out)
    return out


def _best(values: np.ndarray, sense: str) -> int:
    # argmin/argmax return the first hit, so ties go to the lowest index
    return int(np.argmin(values) if sense == "min" else np.argmax(values))


def randomized_round(relaxed: Selection, J: int, budget: SelectionBudget,
                     objective_fn: Callable[[np.ndarray], np.ndarray], sense: str = "min",
                     seed: int = 0, max_regen: int = DEFAULT_MAX_REGEN,
                     accept: Callable[[np.ndarray], np.ndarray] | None = None,
                     shrink: bool = True) -> RoundingOutcome:
    """Sample Boolean selections from ``relaxed`` and keep the best feasible one.

    ``objective_fn`` maps an (n, L) array of cells to n objective values.
    ``accept`` optionally adds a further feasibility predicate of the same
    shape (e.g. an information floor).

    Round 0 samples the relaxed weights as they are.  A relaxed point can put
    all its mass on draws that break a budget, in which case resampling the
    same distribution never helps; regeneration round ``r`` therefore moves a
    share ``r / (max_regen + 1)`` of every location's mass onto the auxiliary
    type (``shrink=True``), which always fits the budgets.
    """
    if J < 1:
        raise ValueError("J must be at least 1")
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    w = np.asarray(relaxed.weights, dtype=float)
    L, K1, B = w.shape
    probs = np.clip(w.reshape(L, -1), 0.0, None)
    probs /= probs.sum(axis=1, keepdims=True)
    draws = 0
    for rnd in range(max_regen + 1):
        p = probs
        if shrink and rnd > 0:
            mu = rnd / (max_regen + 1)
            p = (1.0 - mu) * probs
            p[:, :B] += mu / B  # auxiliary cells are the first B of each row
        cells = sample_cells(p, J, _rng(seed, rnd))
        draws += J
        ok = budget.feasible(cells)
        if accept is not None:
            ok &= np.asarray(accept(cells), dtype=bool)
        idx = np.flatnonzero(ok)
        if idx.size == 0:
            continue
        vals = np.asarray(objective_fn(cells[idx]), dtype=float)
        i = _best(vals, sense)
        return RoundingOutcome(Selection.from_assignment(cells[idx[i]], K1, B), float(vals[i]),
                               draws, int(idx.size), rnd, int(idx[i]))
    raise RoundingError(f"no feasible realization in {draws} draws over {max_regen + 1} rounds; "
                        "raise J or max_regen, or loosen the budgets")


def enumeration_size(L: int, C: int) -> int:
    return C ** L


def exhaustive_search(shape, budget: SelectionBudget, objective_fn, sense: str = "min",
                      cap: int = ENUMERATION_CAP, accept=None):
    """Exact Boolean optimum by enumerating every cell assignment.

    ``shape`` is (L, K+1, B).  Returns ``(Selection, value)``, or
    ``(None, nan)`` if nothing is feasible.  Ties keep the lexicographically
    first assignment.
    """
    L, K1, B = shape
    C = K1 * B
    total = enumeration_size(L, C)
    if total > cap:
        raise EnumerationTooLarge(f"{total} candidates exceed the cap of {cap}; use randomized rounding")
    radix = C ** np.arange(L - 1, -1, -1, dtype=np.int64)
    best_val, best_cells = None, None
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        cells = (idx[:, None] // radix[None, :]) % C
        ok = budget.feasible(cells)
        if accept is not None:
            ok &= np.asarray(accept(cells), dtype=bool)
        if not ok.any():
            continue
        cand = cells[ok]
        vals = np.asarray(objective_fn(cand), dtype=float)
        i = _best(vals, sense)
        v = float(vals[i])
        if best_val is None or (v < best_val if sense == "min" else v > best_val):
            best_val, best_cells = v, cand[i]
    if best_cells is None:
        return None, float("nan")
    return Selection.from_assignment(best_cells, K1, B), best_val
