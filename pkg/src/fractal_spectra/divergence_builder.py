"""Digit sequences whose cylinder quotients accumulate on a prescribed interval.

The construction follows the grid-and-block scheme used to build points of K_I:
a sequence of target exponents sweeps I ever more finely, each target gets a
block of digits, and every block is long enough to swamp everything before it.
Blocks realise their exponent through Gibbs digit frequencies rather than
explicit word families.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError, ResourceError
from .ifs_core import require_valid
from .spectrum import (
    RANGE_TOL,
    alpha_range,
    as_interval,
    gibbs_weights,
    is_degenerate,
    legendre,
    sup_point,
)

MAX_TOTAL = 2**62
MAX_EMIT = 10**8
VISIT_GRID = 1e-3


@dataclass(frozen=True)
class AlphaGrid:
    levels: tuple
    anchor: float

    def flat(self):
        return [(i + 1, a) for i, lev in enumerate(self.levels) for a in lev]


def _segment(u, v, h):
    length = abs(v - u)
    if length == 0.0:
        return []
    k = max(1, math.ceil(length / h - 1e-9))
    return [u + (v - u) * t / k for t in range(1, k + 1)]


def alpha_grid(interval, i_max, alpha_0, fine=False):
    """Levels 1..i_max of target exponents covering I, each ending at ``alpha_0``.

    Level i has mesh at most 1/i (``fine=True`` tightens it to width/(i-1), which
    gives i points per sweep). A level starts at the far end of I when that end
    is within 1/(i-1) of the previous level's last point, otherwise it starts at
    ``alpha_0`` and goes out to both ends before returning.
    """
    a, b = as_interval(interval)
    if not a - RANGE_TOL <= alpha_0 <= b + RANGE_TOL:
        raise DomainError(f"alpha_0={alpha_0} not in [{a}, {b}]")
    if i_max < 1:
        raise DomainError("i_max must be >= 1")
    width = b - a
    if width == 0.0:
        return AlphaGrid(tuple((a,) for _ in range(i_max)), a)
    far, near = (a, b) if alpha_0 - a >= b - alpha_0 else (b, a)
    levels = []
    for i in range(1, i_max + 1):
        h = 1.0 / i
        if fine and width / max(i - 1, 1) > 0.0:
            h = min(h, width / max(i - 1, 1))
        start_far = i == 1 or abs(far - alpha_0) <= 1.0 / (i - 1) + 1e-12
        if start_far:
            waypoints = [far, near, alpha_0]
        else:
            waypoints = [alpha_0, near, far, alpha_0]
        pts = [waypoints[0]]
        for u, v in zip(waypoints, waypoints[1:]):
            pts.extend(_segment(u, v, h))
        pts[-1] = alpha_0
        levels.append(tuple(pts))
    return AlphaGrid(tuple(levels), float(alpha_0))


@dataclass(frozen=True)
class FrequencyChoice:
    nu: np.ndarray
    q: float
    endpoint: bool


def freq_for_alpha(model, alpha_target):
    """Gibbs frequencies nu_i = p_i^q r_i^beta(q) at the q with alpha(q) = target."""
    require_valid(model)
    a_min, a_max = alpha_range(model)
    if not a_min - RANGE_TOL <= alpha_target <= a_max + RANGE_TOL:
        raise DomainError(f"alpha {alpha_target} outside [{a_min:.12g}, {a_max:.12g}]")
    if is_degenerate(model):
        q = 0.0
        endpoint = False
    else:
        lv = legendre(model, alpha_target)
        q, endpoint = lv.q_at, lv.approximate
    return FrequencyChoice(gibbs_weights(model, q), float(q), bool(endpoint))


def block_exponent(model, nu):
    return float(np.dot(nu, model.log_p) / np.dot(nu, model.log_r))


@dataclass(frozen=True)
class Block:
    alpha: float
    freq: np.ndarray
    length: int
    level: int
    endpoint: bool = False


@dataclass
class BlockSchedule:
    blocks: list
    interval: tuple
    alpha_0: float
    base_len: int
    lengths: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.lengths = np.array([b.length for b in self.blocks], dtype=np.int64)

    @property
    def total(self):
        return int(sum(b.length for b in self.blocks))

    def starts(self):
        """Number of digits before each block (exact Python ints)."""
        out, acc = [], 0
        for b in self.blocks:
            out.append(acc)
            acc += b.length
        return out

    def freqs(self):
        return np.vstack([b.freq for b in self.blocks])

    def to_dict(self):
        return {
            "interval": list(self.interval),
            "alpha_0": self.alpha_0,
            "base_len": self.base_len,
            "blocks": [
                {
                    "alpha": b.alpha,
                    "freq": [float(v) for v in b.freq],
                    "len": b.length,
                    "level": b.level,
                    "endpoint": b.endpoint,
                }
                for b in self.blocks
            ],
        }

    @classmethod
    def from_dict(cls, d):
        blocks = [
            Block(float(b["alpha"]), np.array(b["freq"], dtype=float), int(b["len"]), int(b.get("level", 1)), bool(b.get("endpoint", False)))
            for b in d["blocks"]
        ]
        return cls(blocks, tuple(d["interval"]), float(d["alpha_0"]), int(d["base_len"]))

    def to_json(self):
        return json.dumps(self.to_dict())


def block_lengths(levels, base_len):
    """N_m = max(base_len, 2**(level_m - 1) * sum of earlier lengths)."""
    out, acc = [], 0
    for lev in levels:
        n = max(base_len, (1 << (lev - 1)) * acc)
        out.append(n)
        acc += n
        if acc > MAX_TOTAL:
            raise ResourceError(f"schedule length exceeds 2^62 at level {lev}; reduce i_max", partial=out)
    return out


def schedule(model, interval, i_max, base_len, fine=False):
    """Block schedule for the accumulation target I."""
    require_valid(model)
    a, b = as_interval(interval)
    a_min, a_max = alpha_range(model)
    if a < a_min - RANGE_TOL or b > a_max + RANGE_TOL:
        raise DomainError(f"I=[{a}, {b}] not inside [{a_min:.12g}, {a_max:.12g}]")
    if base_len < 1:
        raise DomainError("base_len must be >= 1")
    a0 = sup_point(model, a, b)
    grid = alpha_grid((a, b), i_max, a0, fine=fine)
    flat = grid.flat()
    lengths = block_lengths([lev for lev, _ in flat], base_len)
    cache = {}
    blocks = []
    for (lev, target), n in zip(flat, lengths):
        key = round(target, 15)
        if key not in cache:
            cache[key] = freq_for_alpha(model, target)
        fc = cache[key]
        blocks.append(Block(float(target), fc.nu, int(n), int(lev), fc.endpoint))
    return BlockSchedule(blocks, (a, b), float(a0), int(base_len))


def emit_digits(model, sched, n, cap=MAX_EMIT):
    """First n digits (1-based, int8) of the proportional fill over the schedule."""
    if n > sched.total:
        raise DomainError(f"n={n} exceeds schedule length {sched.total}")
    if n > cap:
        raise ResourceError(f"refusing to materialise {n} digits (cap {cap})")
    # blocks beyond n are never reached; clip lengths to keep int64 safe
    lengths = np.array([min(b.length, n) for b in sched.blocks], dtype=np.int64)
    return _kernels.fill_digits(sched.freqs(), lengths, int(n))


def digits_to_text(digits):
    if digits.size and int(digits.max()) > 9:
        return ",".join(str(int(d)) for d in digits)
    return (digits.astype(np.uint8) + ord("0")).tobytes().decode("ascii")


@dataclass
class QuotientTrace:
    n: np.ndarray
    ln_p: np.ndarray
    ln_r: np.ndarray
    T: np.ndarray
    error_bound: np.ndarray = None

    def __post_init__(self):
        if self.error_bound is None:
            self.error_bound = np.zeros_like(self.T)

    def __len__(self):
        return self.T.size


def cylinder_quotient_trace(model, digits):
    """Running log p, log r of the prefixes of ``digits`` and their quotient."""
    digits = np.asarray(digits)
    if digits.size == 0:
        raise DomainError("empty digit sequence")
    idx = digits.astype(np.int64) - 1
    ln_p = np.cumsum(model.log_p[idx])
    ln_r = np.cumsum(model.log_r[idx])
    return QuotientTrace(np.arange(1, digits.size + 1, dtype=np.int64), ln_p, ln_r, ln_p / ln_r)


def fill_discrepancy_bound(n_symbols):
    """Bound on |count_i(j) - nu_i j| for the proportional fill over n_symbols digits.

    A digit is chosen only when its lag is maximal, hence positive, so every
    lag stays above -1; lags sum to zero, so each is below n_symbols - 1.
    """
    return max(1, n_symbols - 1)


def step_constant(model):
    a_max = alpha_range(model)[1]
    return float(np.max(np.abs(model.log_p)) + a_max * np.max(np.abs(model.log_r)))


def schedule_trace(model, sched, samples=64, grid=VISIT_GRID):
    """Sampled quotient trace of the full schedule, without emitting digits.

    Counts are replaced by their frequency limits nu * j. The exact trace differs
    by at most ``error_bound`` per row (see :func:`fill_discrepancy_bound`).
    Rows are placed geometrically inside each block and at every crossing of a
    ``grid``-spaced level of T, so the visited set has no gaps wider than ``grid``.
    """
    log_p, log_r = model.log_p, model.log_r
    c_step = float(np.sum(np.abs(log_p)) + alpha_range(model)[1] * np.sum(np.abs(log_r)))
    disc = fill_discrepancy_bound(model.n)
    min_lr = float(np.min(np.abs(log_r)))
    P = R = 0.0
    start = 0
    ns, lps, lrs, errs = [], [], [], []
    for m, blk in enumerate(sched.blocks, start=1):
        a = float(blk.freq @ log_p)
        b = float(blk.freq @ log_r)
        N = blk.length
        js = set(np.unique(np.round(np.geomspace(1, N, samples))).astype(np.int64).tolist())
        js.add(N)
        t0 = (P + a) / (R + b)
        t1 = (P + N * a) / (R + N * b)
        lo_t, hi_t = sorted((t0, t1))
        levels = np.arange(math.ceil(lo_t / grid), math.floor(hi_t / grid) + 1) * grid
        for t in levels:
            den = a - t * b
            if den != 0.0:
                j = (t * R - P) / den
                if 1.0 <= j <= N:
                    js.add(int(math.floor(j)))
                    js.add(min(int(math.floor(j)) + 1, N))
        js = np.array(sorted(js), dtype=np.float64)
        n_abs = start + js
        ns.append(start + js.astype(np.int64))
        lps.append(P + js * a)
        lrs.append(R + js * b)
        errs.append(m * disc * c_step / (n_abs * min_lr))
        P += N * a
        R += N * b
        start += N
    ln_p = np.concatenate(lps)
    ln_r = np.concatenate(lrs)
    return QuotientTrace(np.concatenate(ns), ln_p, ln_r, ln_p / ln_r, np.concatenate(errs))


@dataclass(frozen=True)
class AccumulationReport:
    hull_distance: float
    passed: bool
    visited_min: float
    visited_max: float
    rows_used: int

    def to_dict(self):
        return {
            "hull_distance": self.hull_distance,
            "pass": self.passed,
            "visited_min": self.visited_min,
            "visited_max": self.visited_max,
            "rows_used": self.rows_used,
        }


def hausdorff_to_interval(values, a, b, grid=VISIT_GRID):
    """Hausdorff distance between a finite set (snapped to ``grid``) and [a, b]."""
    v = np.unique(np.round(np.asarray(values) / grid) * grid)
    out_of = float(np.max(np.maximum(a - v, 0.0) + np.maximum(v - b, 0.0)))
    probes = np.unique(np.concatenate([np.arange(a, b, grid), [a, b]]))
    k = np.searchsorted(v, probes)
    left = np.abs(probes - v[np.clip(k - 1, 0, v.size - 1)])
    right = np.abs(v[np.clip(k, 0, v.size - 1)] - probes)
    cover = float(np.max(np.minimum(left, right)))
    return max(out_of, cover)


def verify_accumulation(trace, interval, tail_fraction, tol, grid=VISIT_GRID):
    """Pass iff the tail's visited T values are within ``tol`` of I in Hausdorff distance.

    ``trace`` is a :class:`QuotientTrace` or a plain array of T values.
    """
    if not 0.0 < tail_fraction < 1.0:
        raise DomainError("tail_fraction must lie in (0,1)")
    a, b = as_interval(interval)
    values = np.asarray(getattr(trace, "T", trace), dtype=np.float64)
    if values.size == 0:
        raise DomainError("empty trace")
    k = max(1, math.ceil(tail_fraction * values.size))
    tail = values[-k:]
    d = hausdorff_to_interval(tail, a, b, grid)
    return AccumulationReport(d, bool(d <= tol), float(tail.min()), float(tail.max()), int(k))


def geometric_crosscheck(model, digits, n_max, tol=1e-6):
    """Pair T_n with the ball local dimension D at r = r_{omega|n}.

    x is the point of K coded by ``digits`` (double precision, so keep
    ``r_{omega|n_max}`` well above 1e-15). Meaningful for strongly separated
    models only.
    """
    from .measure_eval import interval_masses, point_from_digits

    digits = np.asarray(digits)
    tr = cylinder_quotient_trace(model, digits[:n_max])
    x = point_from_digits(model, digits)
    r = np.exp(tr.ln_r)
    lo, hi, _, status = interval_masses(model, x - r, x + r, tol * r)
    if np.any(status != _kernels.OK):
        raise ResourceError("ball masses not resolved in cross-check")
    D = np.log(0.5 * (lo + hi)) / tr.ln_r
    return tr.T, D
