"""Per-(location, type, bandwidth) link quantities for analog and digital transmission.

Every function here accepts scalars or numpy arrays and broadcasts.  The "no
sensor" auxiliary type is carried as an infinite equivalent-noise variance,
i.e. zero information weight.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .scenario import (BOLTZMANN, Scenario, channel_gains, harvested_powers,
                       measurement_gains, node_powers)

SNAP_RTOL = 1e-9
_LOG_MAX = math.log(np.finfo(float).max)


def _out(x):
    x = np.asarray(x, dtype=float)
    return x if x.ndim else float(x)


def per_channel_power(P, T, tau0, N_b):
    """Transmit power on each of ``N_b`` channels when the energy of ``T`` seconds is split."""
    return _out(np.asarray(P, dtype=float) * T / (tau0 * np.asarray(N_b, dtype=float)))


def receiver_noise(temperature, w0):
    return BOLTZMANN * temperature * w0


def snr(P, g, temperature, w_b):
    """Received SNR per channel use for a sensor occupying resource block ``w_b``."""
    return _out(np.asarray(P, dtype=float) * g / (BOLTZMANN * temperature * np.asarray(w_b, dtype=float)))


def snr_from_grid(P, g, temperature, T, W, N_T, N_F, N_b):
    """Same SNR, assembled from one particular time/frequency factorisation of the grid."""
    tau0 = T / N_T
    w0 = W / N_F
    P_hat = per_channel_power(P, T, tau0, N_b)
    return _out(np.asarray(P_hat) * g / receiver_noise(temperature, w0))


def snr_with_copies(P_hat, g, sigma_phi2, n_copies):
    """SNR after averaging ``n_copies`` repeats of an analog observation at the receiver."""
    n = np.asarray(n_copies, dtype=float)
    if np.any(n < 1):
        raise ValueError("n_copies must be at least 1")
    with np.errstate(divide="ignore", invalid="ignore"):
        return _out(np.asarray(P_hat, dtype=float) * g / (sigma_phi2 / n))


def measurement_power(h, prior, sigma_v2) -> float:
    h = np.atleast_1d(np.asarray(h, dtype=float))
    prior = np.atleast_2d(np.asarray(prior, dtype=float))
    if prior.shape != (h.size, h.size):
        raise ValueError(f"regressor of length {h.size} does not match prior of shape {prior.shape}")
    return float(h @ prior @ h) + sigma_v2


def analog_noise_var(h, prior, sigma_v2, g, P_hat, sigma_phi2):
    """Equivalent noise of an amplify-and-forward observation.

    Nothing reaches the receiver when ``g * P_hat`` is zero; the result is
    then ``inf`` (no information) rather than a division error.
    """
    sigma_x2 = measurement_power(h, prior, sigma_v2)
    return _analog_from_sigma_x(sigma_x2, sigma_v2, g, P_hat, sigma_phi2)


def _analog_from_sigma_x(sigma_x2, sigma_v2, g, P_hat, sigma_phi2):
    gp = np.asarray(g, dtype=float) * np.asarray(P_hat, dtype=float)
    num = np.asarray(sigma_x2, dtype=float) * sigma_phi2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(gp > 0, sigma_v2 + num / np.where(gp > 0, gp, 1.0), np.inf)
    return _out(out)


def _snap_floor(v, overflow):
    """``floor(v)`` with integer snapping; ``inf`` where ``overflow`` is set."""
    v = np.asarray(v, dtype=float)
    r = np.rint(v)
    with np.errstate(invalid="ignore"):
        q = np.where(np.abs(v - r) <= SNAP_RTOL * np.maximum(r, 1.0), r, np.floor(v))
    q = np.where(overflow, np.inf, q)
    return _out(np.maximum(q, 1.0))


def _floor_exp(log_value):
    y = np.asarray(log_value, dtype=float)
    with np.errstate(over="ignore"):
        v = np.exp(np.minimum(y, _LOG_MAX))
    return _snap_floor(v, y >= _LOG_MAX)


def quantization_levels(snr_value, N_b):
    """Largest level count a rate-``log2(1+snr)`` code carries over ``N_b`` channels."""
    s = np.asarray(snr_value, dtype=float)
    n = np.asarray(N_b, dtype=float)
    y = n * np.log1p(s)
    base = 1.0 + s
    # a direct power is exact for bases like 2 or 3, exp(log) is not past 2**40 or so
    with np.errstate(over="ignore"):
        v = np.where(base - 1.0 == s, np.power(base, n), np.exp(np.minimum(y, _LOG_MAX)))
    return _snap_floor(v, (y >= _LOG_MAX) | ~np.isfinite(v))


def quantization_var(sigma_x2, snr_value, N_b):
    Q = np.asarray(quantization_levels(snr_value, N_b), dtype=float)
    with np.errstate(over="ignore"):
        return _out(np.asarray(sigma_x2, dtype=float) / (Q * Q))


def quantization_var_limit(sigma_x2, P, g, N, temperature, W):
    """Distortion floor reached as the resource block grows without bound.

    Returns ``(sigma_q2, saturated)``.  ``saturated`` is true when the level
    count overflows floating point, in which case the distortion is reported
    as 0.
    """
    x = float(P) * g * N / (BOLTZMANN * temperature * W)
    Q = _floor_exp(x)
    saturated = not math.isfinite(Q)
    return (0.0 if saturated else float(sigma_x2) / (Q * Q)), saturated


def digital_noise_var(sigma_v2, sigma_q2):
    return _out(np.asarray(sigma_q2, dtype=float) + sigma_v2)


@dataclass(frozen=True)
class LinkTable:
    """Precomputed link quantities, arrays indexed [l], [l, k] or [l, k, b]."""

    source_model: str  # "static" or "dynamic"
    h: np.ndarray  # (L, m)
    g: np.ndarray  # (L,)
    rho: np.ndarray  # (L,)
    prior: np.ndarray  # (m, m) covariance behind sigma_x2
    sigma_v2: float
    sigma_phi2: float
    temperature: float  # effective; reproduces sigma_phi2 on one base channel
    costs: np.ndarray  # (K+1,)
    widths: np.ndarray  # (B,)
    channels: np.ndarray  # (B,)
    P: np.ndarray  # (L, K+1)
    P_hat: np.ndarray  # (L, K+1, B)
    snr: np.ndarray
    sigma_x2: np.ndarray  # (L,)
    sigma_e2: np.ndarray
    Q: np.ndarray
    sigma_q2: np.ndarray
    sigma_etilde2: np.ndarray

    def __post_init__(self):
        for v in self.__dict__.values():
            if isinstance(v, np.ndarray):
                v.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.P_hat.shape

    @property
    def L(self) -> int:
        return self.shape[0]

    @property
    def K(self) -> int:
        return self.shape[1] - 1

    @property
    def B(self) -> int:
        return self.shape[2]

    def noise_var(self, scheme: str) -> np.ndarray:
        if scheme == "analog":
            return self.sigma_e2
        if scheme == "digital":
            return self.sigma_etilde2
        raise ValueError(f"unknown scheme {scheme!r}")

    def info_weights(self, scheme: str) -> np.ndarray:
        """1/variance per cell; exactly 0 for the auxiliary type."""
        with np.errstate(divide="ignore"):
            w = 1.0 / np.asarray(self.noise_var(scheme))
        w[:, 0, :] = 0.0
        return w

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["l", "k", "b", "P", "P_hat", "snr", "sigma_x2", "sigma_e2", "Q",
                     "sigma_q2", "sigma_etilde2"])
        L, K1, B = self.shape
        for l in range(L):
            for k in range(K1):
                for b in range(B):
                    wr.writerow([l, k, b] + [repr(float(x)) for x in (
                        self.P[l, k], self.P_hat[l, k, b], self.snr[l, k, b], self.sigma_x2[l],
                        self.sigma_e2[l, k, b], self.Q[l, k, b], self.sigma_q2[l, k, b],
                        self.sigma_etilde2[l, k, b])])
        return buf.getvalue()


def build_link_table(scenario: Scenario, source_model: str = "static",
                     receiver_noise_var: float | None = None) -> LinkTable:
    """Materialise every link quantity of ``scenario``.

    With ``source_model="dynamic"`` the measurement power uses the stationary
    variance of the scalar Gauss-Markov source instead of the static prior.
    ``receiver_noise_var`` overrides the scenario's receiver noise (0 gives an
    ideal channel).
    """
    if source_model == "static":
        prior = np.array(scenario.static_prior, dtype=float)
    elif source_model == "dynamic":
        if scenario.m != 1:
            raise ValueError("dynamic source model needs a scalar source (m = 1)")
        prior = np.array([[scenario.dynamic_prior.stationary_var]])
    else:
        raise ValueError(f"unknown source model {source_model!r}")

    grid = scenario.grid
    sigma_v2 = scenario.measurement_var
    sigma_phi2 = scenario.receiver_noise_var if receiver_noise_var is None else float(receiver_noise_var)
    temperature = sigma_phi2 / (BOLTZMANN * grid.w0)

    h = measurement_gains(scenario)
    g = channel_gains(scenario)
    rho = harvested_powers(scenario)
    P = node_powers(scenario)
    widths = scenario.widths
    nb = scenario.channel_counts.astype(float)

    sigma_x2 = np.einsum("li,ij,lj->l", h, prior, h) + sigma_v2
    P3 = P[:, :, None]
    Pg = P3 * g[:, None, None]
    P_hat = P3 * grid.T / (grid.tau0 * nb[None, None, :])
    noise_psd = sigma_phi2 / grid.w0
    with np.errstate(divide="ignore", invalid="ignore"):
        snr3 = np.where(Pg > 0, Pg / (noise_psd * widths[None, None, :]), 0.0)
        # analog: the energy is split over N_b copies that the receiver averages
        snr_avg = np.where(Pg > 0, P_hat * g[:, None, None] * nb[None, None, :] / sigma_phi2, 0.0)
        sigma_e2 = np.where(snr_avg > 0, sigma_v2 + sigma_x2[:, None, None] / snr_avg, np.inf)
    Q = np.asarray(quantization_levels(snr3, nb[None, None, :]), dtype=float)
    with np.errstate(over="ignore"):
        sigma_q2 = sigma_x2[:, None, None] / (Q * Q)
    sigma_et2 = sigma_v2 + sigma_q2
    sigma_e2[:, 0, :] = np.inf
    sigma_et2[:, 0, :] = np.inf

    return LinkTable(
        source_model=source_model, h=h, g=g, rho=rho, prior=prior, sigma_v2=sigma_v2,
        sigma_phi2=sigma_phi2, temperature=temperature, costs=scenario.costs,
        widths=widths, channels=nb, P=P, P_hat=P_hat, snr=snr3, sigma_x2=sigma_x2,
        sigma_e2=sigma_e2, Q=Q, sigma_q2=sigma_q2, sigma_etilde2=sigma_et2,
    )
