"""Certified evaluation of the self-similar measure on intervals of the line."""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, ResourceError, UndefinedError
from .ifs_core import EDGE_TOL, require_valid

DEFAULT_DEPTH_CAP = 1000


@dataclass(frozen=True)
class MeasureEnclosure:
    lo: float
    hi: float
    depth_used: int

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)


def _model_arrays(model):
    a, _ = model.hull
    img_lo = np.array([m(a) - a for m in model.maps])
    return img_lo, model.ratios, model.p, a, model.hull_length


def interval_masses(model, a, b, tol, depth_cap=DEFAULT_DEPTH_CAP):
    """Batch enclosures; returns arrays (lo, hi, depth, status) without raising."""
    img_lo, ratios, probs, h0, hl = _model_arrays(model)
    return _kernels.interval_masses(a, b, tol, img_lo, ratios, probs, h0, hl, depth_cap)


def mu_interval(model, a, b, tol, depth_cap=DEFAULT_DEPTH_CAP):
    """Enclosure lo <= mu([a, b]) <= hi with hi - lo <= tol."""
    require_valid(model)
    if a > b:
        raise DomainError(f"need a <= b, got [{a}, {b}]")
    if not tol > 0:
        raise DomainError("tol must be positive")
    lo, hi, depth, status = interval_masses(model, [a], [b], [tol], depth_cap)
    enc = MeasureEnclosure(float(lo[0]), float(min(hi[0], 1.0)), int(depth[0]))
    if status[0] != _kernels.OK:
        raise ResourceError(
            f"enclosure width {enc.hi - enc.lo:.3g} above tol {tol:.3g} at depth {enc.depth_used}",
            partial=enc,
        )
    return enc


@dataclass
class LocalDimTrace:
    x: float
    rho: float
    n: np.ndarray
    r: np.ndarray
    mu: np.ndarray
    D: np.ndarray
    off_support: np.ndarray

    def rows(self):
        return list(zip(self.n.tolist(), self.r.tolist(), self.mu.tolist(), self.D.tolist()))


def local_dim_trace(model, x, rho, n_max, tol, depth_cap=DEFAULT_DEPTH_CAP):
    """D_r(x) = log mu(B(x, r)) / log r along r = rho**n, n = 1..n_max.

    Ball measures use the relative tolerance ``tol * r``. Rows where the ball
    carries no mass are flagged off-support and get D = nan.
    """
    require_valid(model)
    h0, h1 = model.hull
    slack = EDGE_TOL * (h1 - h0)
    if not h0 - slack <= x <= h1 + slack:
        raise DomainError(f"x={x} outside hull [{h0}, {h1}]")
    if not 0.0 < rho < 1.0 or n_max < 1:
        raise DomainError("need 0 < rho < 1 and n_max >= 1")
    n = np.arange(1, n_max + 1)
    r = rho ** n.astype(np.float64)
    lo, hi, depth, status = interval_masses(model, x - r, x + r, tol * r, depth_cap)
    if np.any(status != _kernels.OK):
        k = int(np.argmax(status != _kernels.OK))
        raise ResourceError(
            f"ball at n={k + 1} not resolved within depth {depth_cap}",
            partial=MeasureEnclosure(float(lo[k]), float(hi[k]), int(depth[k])),
        )
    mu = 0.5 * (lo + hi)
    off = hi <= 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        D = np.where(off, np.nan, np.log(mu) / np.log(r))
    return LocalDimTrace(float(x), float(rho), n, r, mu, D, off)


def accumulation_estimate(trace, tail_start):
    """(min, max) of D over on-support rows with n >= tail_start."""
    if tail_start >= int(trace.n[-1]) + 1:
        raise DomainError("tail_start beyond the last row")
    sel = (trace.n >= tail_start) & ~trace.off_support
    if not sel.any():
        raise UndefinedError("every tail row is off the support")
    d = trace.D[sel]
    return float(d.min()), float(d.max())


def point_from_digits(model, digits):
    """Left end of the cylinder of ``digits`` (a point of K, to double precision)."""
    x = model.hull[0]
    for d in reversed([int(v) for v in digits]):
        x = model.maps[d - 1](x)
    return x


def constant_trace(values, rho=0.5):
    """A synthetic trace holding the given D values (for testing consumers)."""
    values = np.asarray(values, dtype=np.float64)
    n = np.arange(1, values.size + 1)
    r = rho ** n.astype(np.float64)
    return LocalDimTrace(math.nan, rho, n, r, r**values, values, np.isnan(values))
