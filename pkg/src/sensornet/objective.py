"""Estimation-error objectives.

Static vector source: the trace of the posterior (MMSE) covariance, an
A-optimal design criterion that is convex in the relaxed selection.
Dynamic scalar source: the steady-state Kalman error, a monotone function of
the linear information weight ``gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .link import LinkTable

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Selection:
    """Selection weights ``s[l, k, b]``; each location's weights sum to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 3:
            raise ValueError(f"selection must be L x (K+1) x B, got shape {w.shape}")
        if np.any(w < -ROW_SUM_TOL) or np.any(w > 1 + ROW_SUM_TOL):
            raise ValueError("selection weights must lie in [0, 1]")
        sums = w.sum(axis=(1, 2))
        if np.any(np.abs(sums - 1.0) > ROW_SUM_TOL * max(1, w.shape[1] * w.shape[2])):
            bad = int(np.argmax(np.abs(sums - 1.0)))
            raise ValueError(f"weights at location {bad} sum to {sums[bad]!r}, not 1")
        w = np.clip(w, 0.0, 1.0)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def shape(self):
        return self.weights.shape

    @property
    def is_boolean(self) -> bool:
        return bool(np.all((self.weights == 0.0) | (self.weights == 1.0)))

    @classmethod
    def empty(cls, L: int, K1: int, B: int) -> "Selection":
        w = np.zeros((L, K1, B))
        w[:, 0, 0] = 1.0
        return cls(w)

    @classmethod
    def from_assignment(cls, cells, K1: int, B: int) -> "Selection":
        """Boolean selection from flat cell indices ``k * B + b``, one per location."""
        cells = np.asarray(cells, dtype=int)
        w = np.zeros((cells.size, K1 * B))
        w[np.arange(cells.size), cells] = 1.0
        return cls(w.reshape(cells.size, K1, B))

    def assignment(self) -> np.ndarray:
        """Flat cell index per location; only meaningful for Boolean selections."""
        L = self.shape[0]
        return self.weights.reshape(L, -1).argmax(axis=1)

    def types(self) -> np.ndarray:
        return self.assignment() // self.shape[2]

    def counts_by_type(self) -> list[int]:
        """Number of placed sensors of each real type (k = 1..K)."""
        per_type = self.weights.sum(axis=(0, 2))
        return [int(round(x)) for x in per_type[1:]]

    def counts_by_bandwidth(self) -> list[int]:
        per_bw = self.weights[:, 1:, :].sum(axis=(0, 1))
        return [int(round(x)) for x in per_bw]


@dataclass(frozen=True)
class GammaCoefficients:
    values: np.ndarray  # (L, K+1, B), zero for the auxiliary type

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("gamma coefficients must be finite and nonnegative")
        if np.any(v[:, 0, :] != 0):
            raise ValueError("auxiliary-type coefficients must be exactly zero")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


# ---------------------------------------------------------------------------
# static source

def _cell_weights(link: LinkTable, scheme: str, B: int) -> np.ndarray:
    w = link.info_weights(scheme)
    if B == link.B:
        return w
    if B == 1 and scheme == "analog":
        # analog columns are identical across b; a collapsed selection uses one
        return w[:, :, :1]
    raise ValueError(f"selection has {B} bandwidth columns, link table has {link.B}")


def _location_weights(link: LinkTable, sel: Selection | np.ndarray, scheme: str) -> np.ndarray:
    s = sel.weights if isinstance(sel, Selection) else np.asarray(sel, dtype=float)
    if s.shape[:2] != link.shape[:2]:
        raise ValueError(f"selection shape {s.shape} does not match link table {link.shape}")
    return np.einsum("lkb,lkb->l", s, _cell_weights(link, scheme, s.shape[2]))


def fisher_matrix(prior, link: LinkTable, sel, scheme: str) -> np.ndarray:
    """Inverse posterior covariance ``prior^-1 + sum_l w_l h_l h_l^T``."""
    wl = _location_weights(link, sel, scheme)
    H = link.h
    return linalg.inv(np.asarray(prior, dtype=float)) + (H.T * wl) @ H


def _cholesky(F):
    try:
        return linalg.cho_factor(F, lower=True)
    except linalg.LinAlgError:
        raise ValueError("information matrix is not positive definite") from None


def static_error_trace(prior, link: LinkTable, sel, scheme: str) -> float:
    """Trace of the MMSE error covariance for selection ``sel``."""
    c, low = _cholesky(fisher_matrix(prior, link, sel, scheme))
    Linv = linalg.solve_triangular(c, np.eye(c.shape[0]), lower=low)
    return float(np.sum(Linv * Linv))


def static_gradient(prior, link: LinkTable, sel, scheme: str) -> np.ndarray:
    """Gradient of :func:`static_error_trace` with respect to every weight.

    d tr(F^-1) / d s[l,k,b] = -w[l,k,b] * ||F^-1 h_l||^2.
    """
    s = sel.weights if isinstance(sel, Selection) else np.asarray(sel, dtype=float)
    cf = _cholesky(fisher_matrix(prior, link, s, scheme))
    Z = linalg.cho_solve(cf, link.h.T)  # (m, L)
    norms = np.sum(Z * Z, axis=0)
    return -_cell_weights(link, scheme, s.shape[2]) * norms[:, None, None]


def trace_along(prior_inv_plus, D):
    """Return ``phi(t) = tr((F + t D)^-1)`` and its derivative, exactly, via one eigensolve."""
    c, low = _cholesky(prior_inv_plus)
    Ci = linalg.solve_triangular(c, np.eye(c.shape[0]), lower=low)  # C^-1, F = C C^T
    M = Ci @ D @ Ci.T
    lam, U = linalg.eigh((M + M.T) / 2)
    V = Ci.T @ U
    q = np.sum(V * V, axis=0)

    def phi(t):
        return float(np.sum(q / (1.0 + t * lam)))

    def dphi(t):
        return float(-np.sum(q * lam / (1.0 + t * lam) ** 2))

    return phi, dphi, lam


def batch_static_trace(prior, H, cell_weights, cells) -> np.ndarray:
    """Error traces for many Boolean selections at once.

    ``cell_weights`` is (L, C) information weights per flat cell, ``cells`` is
    an (n, L) integer array of chosen cells.
    """
    cells = np.atleast_2d(cells)
    L = H.shape[0]
    wl = cell_weights[np.arange(L)[None, :], cells]  # (n, L)
    F = linalg.inv(np.asarray(prior, dtype=float))[None] + np.einsum("nl,li,lj->nij", wl, H, H)
    C = np.linalg.cholesky(F)
    eye = np.broadcast_to(np.eye(H.shape[1]), F.shape)
    Ci = np.linalg.solve(C, eye)
    return np.sum(Ci * Ci, axis=(1, 2))


# ---------------------------------------------------------------------------
# dynamic scalar source

def gamma_coefficients(link: LinkTable, scheme: str) -> GammaCoefficients:
    """Per-cell information weight of a scalar source (``h_l^2`` over the equivalent noise)."""
    if link.h.shape[1] != 1:
        raise ValueError("gamma coefficients are defined for a scalar source only")
    h2 = link.h[:, 0] ** 2
    sx2 = link.sigma_x2[:, None, None]
    if scheme == "analog":
        gP = link.g[:, None, None] * link.P_hat * link.channels[None, None, :]
        den = link.sigma_v2 * gP + sx2 * link.sigma_phi2
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.where(gP > 0, h2[:, None, None] * gP / den, 0.0)
    elif scheme == "digital":
        with np.errstate(over="ignore"):
            c = h2[:, None, None] / (link.sigma_v2 + sx2 / (link.Q * link.Q))
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    c = np.array(c, dtype=float)
    c[:, 0, :] = 0.0
    return GammaCoefficients(c)


def gamma(sel, coeffs: GammaCoefficients) -> float:
    s = sel.weights if isinstance(sel, Selection) else np.asarray(sel, dtype=float)
    c = coeffs.values
    if s.shape[2] == 1 and c.shape[2] > 1:
        c = c[:, :, :1]
    if s.shape != c.shape:
        raise ValueError(f"selection shape {s.shape} does not match coefficients {c.shape}")
    return float(np.sum(s * c))


def kalman_mmse_from_gamma(gamma_value, a: float, process_var: float):
    """Steady-state Kalman estimation error for aggregate information ``gamma_value``.

    Positive root of ``a^2 g M^2 + (1 + q g - a^2) M - q = 0`` in the
    cancellation-free form ``2q / (b + sqrt(b^2 + 4 a^2 g q))``.
    """
    g = np.asarray(gamma_value, dtype=float)
    if np.any(g < 0):
        raise ValueError("gamma must be nonnegative")
    q = process_var
    b = 1.0 + q * g - a * a
    with np.errstate(over="ignore", invalid="ignore"):
        M = 2.0 * q / (b + np.sqrt(b * b + 4.0 * a * a * g * q))
    M = np.where(np.isinf(g), 0.0, M)
    return M if M.ndim else float(M)


def kalman_mmse_radical(gamma_value: float, a: float, process_var: float) -> float:
    """Textbook closed form of the same root; loses precision at small gamma."""
    g, q, a2 = gamma_value, process_var, a * a
    rad = np.sqrt((1 - a2) ** 2 / g ** 2 + (2 * (1 - a2) * q + 4 * a2 * q) / g + q * q)
    return float(rad / (2 * a2) - ((1 - a2) / g + q) / (2 * a2))


class RiccatiDivergence(RuntimeError):
    def __init__(self, message, last):
        super().__init__(message)
        self.last = last


def kalman_riccati_iterate(gamma_value: float, a: float, process_var: float,
                           tol: float = 1e-13, max_iter: int = 100_000) -> float:
    """Run the scalar Riccati recursion from the stationary prior to its fixed point."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = process_var / (1.0 - a * a)
    for _ in range(max_iter):
        Mp = a * a * M + process_var
        new = Mp / (1.0 + gamma_value * Mp)
        if abs(new - M) < tol:
            return new
        M = new
    raise RiccatiDivergence(f"no convergence within {max_iter} iterations", M)


def gamma_bound_from_error(xi: float, a: float, process_var: float) -> float:
    """Smallest information weight whose steady-state error is at most ``xi``."""
    prior_var = process_var / (1.0 - a * a)
    if not 0.0 < xi <= prior_var:
        raise ValueError(f"target error {xi!r} outside (0, {prior_var!r}]")
    return max(0.0, (process_var - (1.0 - a * a) * xi) / (a * a * xi * xi + process_var * xi))


def batch_gamma(coeff_cells: np.ndarray, cells) -> np.ndarray:
    """``gamma`` for many Boolean selections; ``coeff_cells`` is (L, C)."""
    cells = np.atleast_2d(cells)
    L = coeff_cells.shape[0]
    return coeff_cells[np.arange(L)[None, :], cells].sum(axis=1)
