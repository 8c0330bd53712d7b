"""Monte Carlo check of the analytic error predictions.

Trials run in fixed-size blocks; block ``i`` draws from its own counter-based
stream keyed by ``(seed, i)``, so the result does not depend on how blocks
are scheduled.  The digital chain uses the additive Gaussian quantization
abstraction (received value = measurement + N(0, sigma_q^2)); no real
quantizer or channel code is simulated.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats

from .link import LinkTable
from .objective import Selection, kalman_mmse_from_gamma, static_error_trace
from .scenario import Scenario

BLOCK = 10_000
CONFIDENCE = 0.95
BURN_IN = 0.2


def _stream(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(block)])))


@dataclass(frozen=True)
class SimReport:
    empirical_mse: float
    ci_halfwidth: float
    trials: int
    predicted: float
    scheme: str
    problem_id: str
    steps: int | None = None
    filter_variance: float | None = None  # dynamic: the filter's final error variance
    per_trial: np.ndarray | None = None

    @property
    def rel_error(self) -> float:
        return abs(self.empirical_mse - self.predicted) / self.predicted

    def to_dict(self) -> dict:
        return {
            "problem_id": self.problem_id,
            "scheme": self.scheme,
            "trials": self.trials,
            "steps": self.steps,
            "empirical_mse": self.empirical_mse,
            "ci_halfwidth": self.ci_halfwidth,
            "predicted": self.predicted,
            "filter_variance": self.filter_variance,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def trace_csv(self) -> str:
        if self.per_trial is None:
            raise ValueError("per-trial trace was not recorded (simulate with keep_trace=True)")
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["trial", "squared_error"])
        for i, e in enumerate(self.per_trial):
            wr.writerow([i, repr(float(e))])
        return buf.getvalue()


def _summarise(errors: np.ndarray, confidence: float):
    n = errors.size
    mean = float(np.sum(errors) / n)  # numpy sums pairwise
    if n < 2:
        return mean, 0.0
    z = stats.norm.ppf(0.5 + confidence / 2)
    return mean, float(z * np.std(errors, ddof=1) / math.sqrt(n))


def _active(link: LinkTable, sel: Selection, scheme: str):
    """(location, type, bandwidth) triples of the placed sensors."""
    w = np.asarray(sel.weights, dtype=float)
    if not sel.is_boolean:
        raise ValueError("simulation needs a Boolean selection")
    if w.shape[:2] != link.shape[:2]:
        raise ValueError(f"selection shape {w.shape} does not match link table {link.shape}")
    if w.shape[2] not in (1, link.B):
        raise ValueError(f"selection has {w.shape[2]} bandwidth columns, link table has {link.B}")
    if w.shape[2] == 1 and link.B > 1 and scheme != "analog":
        raise ValueError("a collapsed (one-column) selection is only meaningful for the analog scheme")
    l, k, b = np.nonzero(w)
    keep = k > 0
    return l[keep], k[keep], b[keep]


def _static(scenario: Scenario, link: LinkTable, sel: Selection, trials: int, seed: int,
            scheme: str, weight_scale, keep_trace: bool, confidence: float, problem_id: str) -> SimReport:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if link.source_model != "static":
        raise ValueError("static simulation needs a static link table")
    l, k, b = _active(link, sel, scheme)
    prior = np.asarray(scenario.static_prior, dtype=float)
    Hs = link.h[l]  # (S, m)
    sv2 = link.sigma_v2
    sx = np.sqrt(link.sigma_x2[l])
    if scheme == "analog":
        # amplify-and-forward of x over N_b energy-split copies, averaged at the FC
        gain = np.sqrt(link.g[l] * link.P_hat[l, k, b]) / sx
        chan_sd = np.sqrt(link.sigma_phi2 / link.channels[b])
        extra_sd = None
    else:
        gain = chan_sd = None
        extra_sd = np.sqrt(link.sigma_q2[l, k, b])
    var = link.noise_var(scheme)[l, k, b]
    wts = 1.0 / var
    if weight_scale is not None:
        wts = wts * np.asarray(weight_scale, dtype=float)
    F = linalg.inv(prior) + (Hs.T * wts) @ Hs
    G = linalg.solve(F, Hs.T * wts, assume_a="pos")  # (m, S) estimator gain
    C = linalg.cholesky(prior, lower=True)
    m, S = prior.shape[0], l.size
    errors = np.empty(trials)
    for blk, start in enumerate(range(0, trials, BLOCK)):
        n = min(BLOCK, trials - start)
        rng = _stream(seed, blk)
        theta = rng.standard_normal((n, m)) @ C.T
        x = theta @ Hs.T + math.sqrt(sv2) * rng.standard_normal((n, S))
        if scheme == "analog":
            y = x * gain + chan_sd * rng.standard_normal((n, S))
            z = y / gain
        else:
            z = x + extra_sd * rng.standard_normal((n, S))
        est = z @ G.T
        errors[start:start + n] = np.sum((theta - est) ** 2, axis=1)
    mean, hw = _summarise(errors, confidence)
    predicted = static_error_trace(prior, link, sel, scheme)
    return SimReport(mean, hw, trials, predicted, scheme, problem_id,
                     per_trial=errors if keep_trace else None)


def simulate_static_analog(scenario: Scenario, link: LinkTable, sel: Selection, trials: int = 100_000,
                           seed: int = 0, weight_scale=None, keep_trace: bool = False,
                           confidence: float = CONFIDENCE) -> SimReport:
    """Empirical MSE of the posterior-mean estimate under analog transmission.

    ``weight_scale`` multiplies the estimator's per-sensor weights (for
    sensitivity checks); the default is the exact MMSE estimator.
    """
    return _static(scenario, link, sel, trials, seed, "analog", weight_scale, keep_trace,
                   confidence, "StaticLoPS")


def simulate_static_digital(scenario: Scenario, link: LinkTable, sel: Selection, trials: int = 100_000,
                            seed: int = 0, weight_scale=None, keep_trace: bool = False,
                            confidence: float = CONFIDENCE) -> SimReport:
    return _static(scenario, link, sel, trials, seed, "digital", weight_scale, keep_trace,
                   confidence, "StaticBLoPS")


def simulate_dynamic(scenario: Scenario, link: LinkTable, sel: Selection, steps: int = 10_000,
                     trials: int = 50, seed: int = 0, scheme: str = "analog",
                     burn_in: float = BURN_IN, keep_trace: bool = False,
                     confidence: float = CONFIDENCE) -> SimReport:
    """Track a scalar Gauss-Markov source with a Kalman filter fed by the selected sensors.

    Each trial's error is the mean squared error over the steps after the
    burn-in fraction; the report averages trials.
    """
    if scenario.m != 1 or link.h.shape[1] != 1:
        raise ValueError("dynamic simulation needs a scalar source")
    if link.source_model != "dynamic":
        raise ValueError("dynamic simulation needs a dynamic link table")
    if trials < 1 or steps < 1:
        raise ValueError("steps and trials must be positive")
    if not 0.0 <= burn_in < 1.0:
        raise ValueError("burn_in must lie in [0, 1)")
    first = int(math.floor(burn_in * steps))
    l, k, b = _active(link, sel, scheme)
    h = link.h[l, 0]
    var = link.noise_var(scheme)[l, k, b]
    info = h / var
    gam = float(np.sum(h * info))
    dp = scenario.dynamic_prior
    a, q = dp.a, dp.process_var
    noise_sd = np.sqrt(var)
    S = l.size

    errors = np.empty(trials)
    M_final = None
    for blk, start in enumerate(range(0, trials, BLOCK)):
        n = min(BLOCK, trials - start)
        rng = _stream(seed, blk)
        theta = dp.initial_mean + math.sqrt(dp.stationary_var) * rng.standard_normal(n)
        est = np.full(n, dp.initial_mean)
        M = dp.stationary_var
        acc = np.zeros(n)
        for t in range(steps):
            theta = a * theta + math.sqrt(q) * rng.standard_normal(n)
            z = theta[:, None] * h + noise_sd * rng.standard_normal((n, S))
            pred = a * est
            Mp = a * a * M + q
            M = Mp / (1.0 + gam * Mp)
            est = pred + M * ((z - pred[:, None] * h) @ info)
            if t >= first:
                acc += (theta - est) ** 2
        errors[start:start + n] = acc / (steps - first)
        M_final = M
    mean, hw = _summarise(errors, confidence)
    predicted = float(kalman_mmse_from_gamma(gam, a, q))
    pid = "DynamicLoPS" if scheme == "analog" else "DynamicBLoPS"
    return SimReport(mean, hw, trials, predicted, scheme, pid, steps, M_final,
                     per_trial=errors if keep_trace else None)
