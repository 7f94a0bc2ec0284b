"""Empirical L^q spectrum from greedy ball packings, compared with beta(q)."""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, ResourceError
from .ifs_core import cylinder, require_valid, stopping_words
from .measure_eval import interval_masses
from .spectrum import beta_many

MASS_FLOOR = 1e-300
TRANSIENT_RESIDUAL = 0.1


@dataclass(frozen=True)
class ThetaSample:
    q: float
    r: float
    theta: float
    balls_used: int


@dataclass(frozen=True)
class TauEstimate:
    q: float
    tau_hat: float
    beta_theory: float
    residual: float
    experimental: bool = False


@dataclass(frozen=True)
class Packing:
    r: float
    centers: np.ndarray
    masses: np.ndarray


def _threads():
    try:
        return max(1, int(os.environ.get("FRACTAL_SPECTRA_THREADS", "1")))
    except ValueError:
        return 1


def greedy_centers(candidates, r):
    """Left-to-right maximal family of centers whose closed r-balls are disjoint."""
    chosen = []
    last = -np.inf
    for c in np.sort(candidates):
        if c - last > 2.0 * r:
            chosen.append(c)
            last = c
    return np.array(chosen)


def packing(model, r):
    """Greedy packing at radius r with centers at left ends of Gamma_r cylinders."""
    require_valid(model)
    if not 0.0 < r < model.hull_length / 4.0:
        raise DomainError(f"radius must lie in (0, hull/4), got {r}")
    words = stopping_words(model, r)
    centers = np.array([cylinder(model, w).interval[0] for w in words])
    centers = greedy_centers(centers, r)
    s = model.similarity_dimension()
    tol = 1e-4 * r**s
    lo, hi, _, status = interval_masses(model, centers - r, centers + r, tol)
    if np.any(status != _kernels.OK):
        raise ResourceError(f"ball masses at r={r:.3g} not resolved")
    return Packing(float(r), centers, 0.5 * (lo + hi))


def theta_from_packing(pack, q):
    m = pack.masses
    if q < 0:
        m = m[m >= MASS_FLOOR]
    if m.size == 0:
        raise ResourceError("no ball above the mass floor")
    return ThetaSample(float(q), pack.r, float(np.sum(m**q)), int(m.size))


def theta(model, q, r):
    """Greedy lower estimate of sup sum_i mu(B(x_i, r))^q."""
    return theta_from_packing(packing(model, r), q)


def _fit(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.max(np.abs(A @ coef - y)))
    return float(coef[0]), resid


def _slope(neg_log_r, log_theta):
    slope, resid = _fit(neg_log_r, log_theta)
    if resid > TRANSIENT_RESIDUAL and neg_log_r.size > 4:
        slope, resid = _fit(neg_log_r[2:], log_theta[2:])
    return slope, resid


def packings(model, n_min, n_max, rho):
    if not n_min < n_max:
        raise DomainError("need n_min < n_max")
    if not 0.0 < rho < 1.0:
        raise DomainError("rho must lie in (0,1)")
    radii = [rho**n for n in range(n_min, n_max + 1)]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(lambda r: packing(model, r), radii))


def _estimates(model, qs, packs):
    neg_log_r = -np.log([p.r for p in packs])
    theory = beta_many(model, qs)
    out = []
    for q, bq in zip(qs, theory):
        log_theta = np.log([theta_from_packing(p, q).theta for p in packs])
        slope, resid = _slope(neg_log_r, log_theta)
        out.append(TauEstimate(float(q), slope, float(bq), resid, bool(q < 0)))
    return out


def tau_estimate(model, q, n_min, n_max, rho):
    """Least-squares slope of log theta(q; rho^n) against -log rho^n.

    Negative q is flagged experimental: finite ladders are biased there.
    """
    return _estimates(model, [float(q)], packings(model, n_min, n_max, rho))[0]


@dataclass
class BetaComparison:
    estimates: list
    max_deviation: float


def compare_beta(model, q_grid, n_min=3, n_max=10, rho=1 / 3):
    """tau_hat(q) against beta(q) for every q; ball masses are shared across q."""
    packs = packings(model, n_min, n_max, rho)
    est = _estimates(model, [float(q) for q in q_grid], packs)
    dev = max(abs(e.tau_hat - e.beta_theory) for e in est)
    return BetaComparison(est, float(dev))
