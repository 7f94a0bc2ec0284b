"""Pressure equation, its Legendre transform, and divergence-point dimensions."""

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, MalformedIntervalError
from .ifs_core import require_valid

Q_CAP_BETA = 200.0
Q_CAP_LEGENDRE = 50.0
DEGENERATE_TOL = 1e-9
RANGE_TOL = 1e-12
GRID_POINTS = 1024
OPT_TOL = 1e-8


def beta_many(model, qs):
    """Vectorised solution b(q) of sum_i p_i^q r_i^b = 1."""
    qs = np.atleast_1d(np.asarray(qs, dtype=np.float64))
    if np.any(np.abs(qs) > Q_CAP_BETA):
        raise DomainError(f"|q| must not exceed {Q_CAP_BETA}")
    return _kernels.pressure_roots(model.log_p, model.log_r, qs)


def beta(model, q):
    require_valid(model)
    return float(beta_many(model, [q])[0])


def _alpha_from(log_p, log_r, qs, bs):
    e = qs[:, None] * log_p[None, :] + bs[:, None] * log_r[None, :]
    w = np.exp(e - e.max(axis=1, keepdims=True))
    return (w @ log_p) / (w @ log_r)


def alpha_many(model, qs):
    qs = np.atleast_1d(np.asarray(qs, dtype=np.float64))
    bs = beta_many(model, qs)
    return _alpha_from(model.log_p, model.log_r, qs, bs)


def alpha(model, q):
    """alpha(q) = -beta'(q), via implicit differentiation of the pressure equation."""
    require_valid(model)
    return float(alpha_many(model, [q])[0])


def gibbs_weights(model, q):
    """nu_i = p_i^q r_i^beta(q); a probability vector."""
    b = beta(model, q)
    w = np.exp(q * model.log_p + b * model.log_r)
    return w / w.sum()


def alpha_range(model):
    require_valid(model)
    ratios = model.log_p / model.log_r
    return float(ratios.min()), float(ratios.max())


def is_degenerate(model):
    lo, hi = alpha_range(model)
    return hi - lo < DEGENERATE_TOL


def dimension(model):
    """s = beta(0), the dimension of the attractor."""
    return beta(model, 0.0)


@dataclass(frozen=True)
class LegendreValue:
    fstar: float
    q_at: float
    approximate: bool = False

    def __iter__(self):
        return iter((self.fstar, self.q_at))


def _solve_q_many(model, targets, q_cap):
    """Bisection for alpha(q) = target on [-q_cap, q_cap]; alpha is non-increasing."""
    targets = np.asarray(targets, dtype=np.float64)
    lo = np.full(targets.shape, -q_cap)
    hi = np.full(targets.shape, q_cap)
    a_left = alpha_many(model, [-q_cap])[0]
    a_right = alpha_many(model, [q_cap])[0]
    clamped_left = targets >= a_left
    clamped_right = targets <= a_right
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        moved = (mid != lo) & (mid != hi)
        if not moved.any():
            break
        am = alpha_many(model, mid)
        right = am > targets
        lo = np.where(right & moved, mid, lo)
        hi = np.where(~right & moved, mid, hi)
    q = 0.5 * (lo + hi)
    q = np.where(clamped_left, -q_cap, q)
    q = np.where(clamped_right, q_cap, q)
    return q, clamped_left | clamped_right


def legendre_many(model, alphas, q_cap=Q_CAP_LEGENDRE):
    """beta*(alpha) = inf_q (alpha q + beta(q)) for an array of alphas.

    Returns ``(fstar, q_at, approximate)`` arrays. Endpoint targets that need
    ``|q| > q_cap`` use the clamped q and are flagged approximate.
    """
    require_valid(model)
    alphas = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
    a_min, a_max = alpha_range(model)
    if np.any(alphas < a_min - RANGE_TOL) or np.any(alphas > a_max + RANGE_TOL):
        raise DomainError(f"alpha outside [{a_min:.12g}, {a_max:.12g}]")
    if a_max - a_min < DEGENERATE_TOL:
        s = dimension(model)
        n = alphas.shape[0]
        return np.full(n, s), np.zeros(n), np.zeros(n, dtype=bool)
    q, approx = _solve_q_many(model, alphas, q_cap)
    fstar = q * alphas + beta_many(model, q)
    return fstar, q, approx


def legendre(model, alpha_target, q_cap=Q_CAP_LEGENDRE):
    f, q, approx = legendre_many(model, [alpha_target], q_cap)
    return LegendreValue(float(f[0]), float(q[0]), bool(approx[0]))


def spectrum_max_point(model):
    """alpha(0), where beta* attains its maximum s."""
    return alpha(model, 0.0)


@dataclass
class DimensionReport:
    interval_in: tuple
    clipped: object
    classification: str
    dim_P_equal: object
    dim_P_subset: object
    dim_H_equal: object
    dim_H_subset: object
    approximate: bool = False

    def to_dict(self):
        d = asdict(self)
        d["interval_in"] = list(self.interval_in)
        d["clipped"] = None if self.clipped is None else list(self.clipped)
        return d


def _golden_max(f, a, b, tol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def sup_inf_fstar(model, a, b):
    """(sup, inf, argsup, approximate) of beta* over [a, b] inside the admissible range.

    beta* is concave, so it is unimodal on [a, b]: a 1024-point pre-scan brackets
    the peak and golden-section search refines it; the infimum of a concave
    function sits at an endpoint.
    """
    if b - a <= 0.0:
        f, _, approx = legendre_many(model, [a])
        return float(f[0]), float(f[0]), a, bool(approx[0])
    grid = np.linspace(a, b, GRID_POINTS)
    f, _, approx = legendre_many(model, grid)
    k = int(np.argmax(f))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, GRID_POINTS - 1)]

    def fs(x):
        return float(legendre_many(model, [x])[0][0])

    x_star = _golden_max(fs, lo, hi, OPT_TOL)
    sup = max(fs(x_star), float(f[k]))
    if sup == float(f[k]):
        x_star = float(grid[k])
    inf = float(min(f[0], f[-1]))
    return sup, inf, x_star, bool(approx.any())


def sup_point(model, a, b):
    """The point of [a, b] where beta* is largest: alpha(0) clipped into [a, b]."""
    a0 = spectrum_max_point(model)
    return float(min(max(a0, a), b))


def as_interval(interval):
    """Normalise a scalar, singleton or pair into closed endpoints (a, b)."""
    if np.isscalar(interval):
        return float(interval), float(interval)
    vals = [float(v) for v in interval]
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2:
        raise MalformedIntervalError(f"expected 1 or 2 endpoints, got {len(vals)}")
    a, b = vals
    if a > b:
        raise MalformedIntervalError(f"interval endpoints out of order: {a} > {b}")
    return a, b


def divergence_dimensions(model, interval):
    """Dimensions of K_I = {A(D(x)) = I} and K^I = {A(D(x)) subset of I}."""
    require_valid(model)
    a, b = as_interval(interval)
    a_min, a_max = alpha_range(model)
    lo, hi = max(a, a_min), min(b, a_max)
    inside = a >= a_min - RANGE_TOL and b <= a_max + RANGE_TOL
    if lo > hi + RANGE_TOL:
        return DimensionReport((a, b), None, "empty", None, None, None, None)
    lo, hi = min(lo, hi), max(lo, hi)
    sup, inf, _, approx = sup_inf_fstar(model, lo, hi)
    if not inside:
        return DimensionReport((a, b), (lo, hi), "empty", None, sup, None, sup, approx)
    return DimensionReport((a, b), (lo, hi), "valid", sup, sup, inf, sup, approx)


@dataclass(frozen=True)
class SpectrumPoint:
    q: float
    beta: float
    alpha: float
    fstar: float


@dataclass
class SpectrumTable:
    rows: list
    fingerprint: str

    def columns(self):
        return {k: np.array([getattr(r, k) for r in self.rows]) for k in ("q", "beta", "alpha", "fstar")}


def spectrum_table(model, q_min, q_max, steps):
    require_valid(model)
    if not q_min < q_max or steps < 2:
        raise DomainError("need q_min < q_max and steps >= 2")
    qs = np.linspace(q_min, q_max, int(steps))
    bs = beta_many(model, qs)
    als = _alpha_from(model.log_p, model.log_r, qs, bs)
    fs = qs * als + bs
    rows = [SpectrumPoint(float(q), float(b), float(a), float(f)) for q, b, a, f in zip(qs, bs, als, fs)]
    return SpectrumTable(rows, model.fingerprint())
