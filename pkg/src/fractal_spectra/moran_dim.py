"""Packing dimension of homogeneous Moran sets.

A level is a list of child ratios, optionally with multiplicities (stored as
natural logs so that astronomically large classes stay representable). A spec
is a run-length list of levels, so very deep constructions cost only as much
as their number of distinct runs.
"""

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from . import _kernels
from .errors import DomainError

ROOT_TOL = 1e-12
REALIZABLE_TOL = 1e-12
TREND_LIMIT = 0.05


@dataclass(frozen=True)
class MoranLevel:
    """Children of one level, as log ratios with log multiplicities."""

    log_ratios: tuple
    log_mult: tuple = None

    def __post_init__(self):
        lr = tuple(float(c) for c in self.log_ratios)
        if not lr:
            raise DomainError("a Moran level needs at least one child")
        if any(not (c < 0.0 and math.isfinite(c)) for c in lr):
            raise DomainError("Moran ratios must lie in (0,1)")
        lm = (0.0,) * len(lr) if self.log_mult is None else tuple(float(v) for v in self.log_mult)
        if len(lm) != len(lr) or any(v < 0 for v in lm):
            raise DomainError("log multiplicities must be non-negative, one per ratio")
        object.__setattr__(self, "log_ratios", lr)
        object.__setattr__(self, "log_mult", lm)
        if self.log_mass() > REALIZABLE_TOL * max(1.0, max(lm)):
            raise DomainError("children do not fit disjointly in the parent (sum of ratios > 1)")

    @classmethod
    def of(cls, ratios, mult=None):
        ratios = [float(c) for c in ratios]
        if any(not 0.0 < c < 1.0 for c in ratios):
            raise DomainError("Moran ratios must lie in (0,1)")
        lm = None if mult is None else [math.log(m) for m in mult]
        return cls(tuple(math.log(c) for c in ratios), lm)

    @property
    def ratios(self):
        return tuple(math.exp(c) for c in self.log_ratios)

    def log_mass(self):
        """log of sum_j mult_j * c_j (at most 0 for a level realisable on the line)."""
        return float(logsumexp(np.add(self.log_mult, self.log_ratios)))

    def log_count(self):
        return float(logsumexp(self.log_mult))

    def g(self, s):
        """log sum_j mult_j c_j^s, vectorised in s; strictly decreasing."""
        s = np.asarray(s, dtype=np.float64)
        e = np.asarray(self.log_mult)[None, :] + np.multiply.outer(s.ravel(), self.log_ratios)
        return logsumexp(e, axis=1).reshape(s.shape)

    @property
    def log_c_min(self):
        return min(self.log_ratios)

    @property
    def log_c_max(self):
        return max(self.log_ratios)

    def to_json_obj(self):
        if all(v == 0.0 for v in self.log_mult) and self.log_c_min > -700:
            return list(self.ratios)
        return {"log_ratios": list(self.log_ratios), "log_mult": list(self.log_mult)}


@dataclass
class MoranSpec:
    runs: list  # (MoranLevel, times)
    metadata: dict = None

    def __post_init__(self):
        if not self.runs:
            raise DomainError("empty Moran spec")
        self.runs = [(lev if isinstance(lev, MoranLevel) else MoranLevel.of(lev), int(t)) for lev, t in self.runs]
        if any(t < 1 for _, t in self.runs):
            raise DomainError("run lengths must be positive")
        self.metadata = dict(self.metadata or {})
        self._ends = np.cumsum([t for _, t in self.runs], dtype=object)

    @classmethod
    def from_levels(cls, levels, metadata=None):
        return cls([(lev, 1) for lev in levels], metadata)

    @property
    def n_levels(self):
        return int(self._ends[-1])

    def run_bounds(self):
        """[(first_k, last_k)] per run, 1-based inclusive."""
        out, prev = [], 0
        for e in self._ends:
            out.append((prev + 1, int(e)))
            prev = int(e)
        return out

    def prefix_counts(self, k):
        """How many levels of each run lie in the first k levels."""
        out = []
        left = k
        for _, t in self.runs:
            take = min(t, left)
            out.append(take)
            left -= take
        return np.array(out, dtype=np.float64)

    def level(self, k):
        for (lev, _), (a, b) in zip(self.runs, self.run_bounds()):
            if a <= k <= b:
                return lev
        raise DomainError(f"level {k} beyond {self.n_levels}")

    def to_dict(self):
        d = {"repeat": [{"level": lev.to_json_obj(), "times": t} for lev, t in self.runs]}
        if self.metadata:
            d["metadata"] = self.metadata
        return d

    @classmethod
    def from_dict(cls, d):
        runs = []
        for lev in d.get("levels", []):
            runs.append((_level_from_json(lev), 1))
        for item in d.get("repeat", []):
            lev = item.get("level", item)
            runs.append((_level_from_json(lev), int(item.get("times", 1))))
        return cls(runs, d.get("metadata"))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _level_from_json(obj):
    if isinstance(obj, dict):
        if "log_ratios" in obj:
            return MoranLevel(obj["log_ratios"], obj.get("log_mult"))
        lm = obj.get("log_mult")
        return MoranLevel(tuple(math.log(c) for c in obj["ratios"]), lm)
    return MoranLevel.of(obj)


def _padded(spec):
    """Per-run child arrays padded with -inf multiplicities, shape (runs, children)."""
    width = max(len(lev.log_ratios) for lev, _ in spec.runs)
    LR = np.zeros((len(spec.runs), width))
    LM = np.full((len(spec.runs), width), -np.inf)
    for i, (lev, _) in enumerate(spec.runs):
        LR[i, : len(lev.log_ratios)] = lev.log_ratios
        LM[i, : len(lev.log_mult)] = lev.log_mult
    return LR, LM


def s_k_many(spec, ks):
    """Roots of prod_{i<=k} sum_j c_{i,j}^s = 1 for each k, by joint bisection to 1e-12."""
    ks = [int(k) for k in ks]
    if any(not 1 <= k <= spec.n_levels for k in ks):
        raise DomainError(f"k must lie in 1..{spec.n_levels}")
    counts = np.array([spec.prefix_counts(k) for k in ks])
    LR, LM = _padded(spec)
    log_count = logsumexp(LM, axis=1)
    log_n = counts @ log_count
    # g(s) <= log n + s log c_max, so the root is below log n / sum(-log c_max)
    c_max = LR.max(axis=1, where=np.isfinite(LM), initial=-np.inf)
    hi = np.where(log_n > 0, log_n / np.maximum(counts @ -c_max, 1e-300), 0.0) * (1 + 1e-9) + 1e-12
    lo = np.zeros_like(hi)
    while np.max(hi - lo) > ROOT_TOL:
        mid = 0.5 * (lo + hi)
        g = logsumexp(LM[None] + mid[:, None, None] * LR[None], axis=2)
        up = (counts * g).sum(axis=1) > 0
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    return np.where(log_n > 0, 0.5 * (lo + hi), 0.0)


def s_k(spec, k):
    """Root of prod_{i<=k} sum_j c_{i,j}^s = 1, by bisection to 1e-12."""
    return float(s_k_many(spec, [k])[0])


@dataclass
class SkSequence:
    k: list
    s_k: np.ndarray
    log_c_k: np.ndarray
    log_M_k: np.ndarray
    ratio_log: np.ndarray
    condition_ok: bool

    @property
    def c_k(self):
        return np.exp(self.log_c_k)

    @property
    def M_k(self):
        return np.exp(self.log_M_k)

    def rows(self):
        return list(zip(self.k, self.s_k.tolist(), self.c_k.tolist(), self.M_k.tolist(), self.ratio_log.tolist()))


def _sample_ks(spec, k_max, max_rows):
    if k_max <= max_rows:
        return list(range(1, k_max + 1))
    ks = {1, k_max}
    for a, b in spec.run_bounds():
        for k in (a, b):
            if k <= k_max:
                ks.add(k)
    ks.update(int(v) for v in np.unique(np.round(np.geomspace(1, k_max, max_rows))))
    return sorted(ks)


def trend_ok(ks, ratio_log):
    """Fit ratio_log against 1/k over the last half; pass if the k -> inf intercept is small."""
    ks = np.asarray(ks, dtype=np.float64)
    half = slice(len(ks) // 2, None)
    x = 1.0 / ks[half]
    y = np.asarray(ratio_log)[half]
    if x.size < 2 or np.ptp(x) == 0:
        return bool(y[-1] <= TREND_LIMIT)
    slope, intercept = np.polyfit(x, y, 1)
    return bool(intercept <= TREND_LIMIT)


def condition_26(spec, k_max, max_rows=4096):
    """Rows (k, s_k, c_k, M_k, log c_k / log M_k) and the vanishing-ratio trend flag."""
    if not 1 <= k_max <= spec.n_levels:
        raise DomainError(f"k_max must lie in 1..{spec.n_levels}")
    ks = _sample_ks(spec, k_max, max_rows)
    c_max = np.array([lev.log_c_max for lev, _ in spec.runs])
    logM = np.array([spec.prefix_counts(k) @ c_max for k in ks])
    ck = np.array([spec.level(k).log_c_min for k in ks])
    ratio = ck / logM
    return SkSequence(ks, s_k_many(spec, ks), ck, logM, ratio, trend_ok(ks, ratio))


@dataclass
class PackingResult:
    dim: float
    s_sequence: SkSequence
    condition_ok: bool
    argmax_k: int


def packing_dim(spec, k_max, tail_window, max_rows=4096):
    """max of s_k over k in (k_max - tail_window, k_max], the finite limsup surrogate.

    Inside a run s_k moves monotonically toward that run's own root, so the
    maximum over the window is attained at a window end or a run boundary.
    """
    if not 1 <= tail_window <= k_max:
        raise DomainError("need 1 <= tail_window <= k_max")
    seq = condition_26(spec, k_max, max_rows)
    first = k_max - tail_window + 1
    cands = {first, k_max}
    for a, b in spec.run_bounds():
        for k in (a - 1, a, b):
            if first <= k <= k_max:
                cands.add(k)
    if k_max - first < 64:
        cands.update(range(first, k_max + 1))
    cands = sorted(cands)
    vals = s_k_many(spec, cands)
    best = int(np.argmax(vals))
    return PackingResult(float(vals[best]), seq, seq.condition_ok, cands[best])


def brute_force_sum(spec, k, s):
    """Literal sum over every word of D_k of r_w^s (small specs only)."""
    total = np.array([1.0])
    for i in range(1, k + 1):
        lev = spec.level(i)
        child = np.repeat(np.exp(s * np.array(lev.log_ratios)), np.round(np.exp(lev.log_mult)).astype(np.int64))
        total = np.outer(total, child).ravel()
    return float(total.sum())


def word_type(nu, length):
    """Digit counts of the first ``length`` digits of the proportional fill with frequencies nu."""
    digits = _kernels.fill_digits(np.atleast_2d(nu), np.array([length]), length)
    return np.bincount(digits.astype(np.int64) - 1, minlength=len(nu))


def typed_word_level(model, counts):
    """All words with the given digit counts: one ratio class, multinomial multiplicity."""
    counts = np.asarray(counts, dtype=np.int64)
    log_ratio = float(counts @ model.log_r)
    log_mult = float(gammaln(counts.sum() + 1) - gammaln(counts + 1).sum())
    return MoranLevel((log_ratio,), (max(log_mult, 0.0),))


def from_schedule(model, sched):
    """Moran structure of the schedule's word blocks.

    A block of target alpha and length N becomes N // L repetitions of the level
    "all words of length L with the block's digit type", where the type is the
    proportional fill of L digits and L = base_len * 2**(level - 1) (capped at
    N) grows with the grid level. A remainder shorter than L adds one level.
    """
    runs = []
    for blk in sched.blocks:
        L = min(blk.length, sched.base_len * (1 << (blk.level - 1)))
        reps, rem = divmod(blk.length, L)
        runs.append((typed_word_level(model, word_type(blk.freq, L)), reps))
        if rem:
            runs.append((typed_word_level(model, word_type(blk.freq, rem)), 1))
    meta = {
        "construction": "typed-word levels",
        "approximate": True,
        "interval": list(sched.interval),
        "base_len": sched.base_len,
    }
    return MoranSpec(runs, meta)
