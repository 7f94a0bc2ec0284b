"""IFS model on the real line, validation, and the symbolic cylinder algebra."""

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidModelError, MalformedWordError, ResourceError

PROB_TOL = 1e-12
# relative slack used for "touching" image intervals and for Gamma_r comparisons
EDGE_TOL = 1e-12
DEFAULT_NODE_CAP = 10**7


@dataclass(frozen=True)
class SimilarityMap:
    """x -> ratio * x + offset."""

    ratio: float
    offset: float

    def __call__(self, x):
        return self.ratio * x + self.offset

    @property
    def fixed_point(self):
        return self.offset / (1.0 - self.ratio)


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    indices: tuple = ()

    def to_dict(self):
        return {"kind": self.kind, "message": self.message, "indices": list(self.indices)}


@dataclass(frozen=True)
class IFSModel:
    """Similarities ``maps`` with weights ``probs``.

    The hull (convex hull of the attractor) is derived: with orientation
    preserving maps, inf K and sup K are the smallest and largest fixed points.
    Construction never fails on bad numbers; call :func:`validate`.
    """

    maps: tuple
    probs: tuple
    hull: tuple = field(init=False)

    def __post_init__(self):
        maps = tuple(m if isinstance(m, SimilarityMap) else SimilarityMap(*m) for m in self.maps)
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        fixed = [m.fixed_point for m in maps if 0.0 < m.ratio < 1.0]
        hull = (min(fixed), max(fixed)) if fixed else (0.0, 0.0)
        object.__setattr__(self, "hull", hull)

    @classmethod
    def from_lists(cls, ratios, offsets, probs):
        return cls(tuple(SimilarityMap(float(r), float(t)) for r, t in zip(ratios, offsets)), tuple(probs))

    @classmethod
    def from_dict(cls, data):
        try:
            maps = tuple(SimilarityMap(float(m["ratio"]), float(m["offset"])) for m in data["maps"])
            probs = tuple(float(p) for p in data["probs"])
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed model JSON: {exc}") from exc
        return cls(maps, probs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())

    def to_dict(self):
        return {
            "maps": [{"ratio": m.ratio, "offset": m.offset} for m in self.maps],
            "probs": list(self.probs),
        }

    def fingerprint(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @property
    def n(self):
        return len(self.maps)

    @property
    def ratios(self):
        return np.array([m.ratio for m in self.maps])

    @property
    def offsets(self):
        return np.array([m.offset for m in self.maps])

    @property
    def p(self):
        return np.array(self.probs)

    @property
    def log_p(self):
        return np.log(self.p)

    @property
    def log_r(self):
        return np.log(self.ratios)

    @property
    def hull_length(self):
        return self.hull[1] - self.hull[0]

    @property
    def r_min(self):
        return min(m.ratio for m in self.maps)

    def image_intervals(self):
        a, b = self.hull
        return [(m(a), m(b)) for m in self.maps]

    def similarity_dimension(self):
        """Root of sum r_i^s = 1 (dimension of K under OSC)."""
        from . import _kernels

        return float(_kernels.pressure_roots(np.zeros(self.n), self.log_r, [0.0])[0])


def weighted_cantor(p1=0.3, p2=0.7):
    """Middle-thirds Cantor system with weights (p1, p2)."""
    return IFSModel.from_lists([1 / 3, 1 / 3], [0.0, 2 / 3], [p1, p2])


def validate(model):
    """Return the list of violated invariants (empty means valid)."""
    out = []
    n = len(model.maps)
    if n < 2:
        out.append(Violation("too-few-maps", f"need at least 2 maps, got {n}"))
    if len(model.probs) != n:
        out.append(Violation("length-mismatch", f"{n} maps but {len(model.probs)} probabilities"))
    bad = tuple(i for i, m in enumerate(model.maps) if not (0.0 < m.ratio < 1.0) or not math.isfinite(m.offset))
    if bad:
        out.append(Violation("ratio-range", "contraction ratios must lie in (0,1)", bad))
    bad_p = tuple(i for i, p in enumerate(model.probs) if not p > 0.0)
    if bad_p:
        out.append(Violation("prob-positive", "probabilities must be positive", bad_p))
    total = math.fsum(model.probs)
    if abs(total - 1.0) > PROB_TOL:
        out.append(Violation("prob-sum", f"probabilities sum to {total:.12g}"))
    if bad or n < 2:
        return out
    a, b = model.hull
    if not b > a:
        out.append(Violation("degenerate-hull", "all fixed points coincide; attractor is a point"))
        return out
    slack = EDGE_TOL * (b - a)
    images = model.image_intervals()
    outside = tuple(i for i, (lo, hi) in enumerate(images) if lo < a - slack or hi > b + slack)
    if outside:
        out.append(Violation("hull-invariance", "maps must send the hull into itself", outside))
    order = sorted(range(n), key=lambda i: images[i])
    for i, j in zip(order, order[1:]):
        if images[j][0] < images[i][1] - slack:
            out.append(
                Violation(
                    "osc-overlap",
                    f"images overlap: maps {i + 1} and {j + 1} share interior",
                    (i, j),
                )
            )
    return out


def require_valid(model):
    violations = validate(model)
    if violations:
        raise InvalidModelError(violations)
    return model


@dataclass(frozen=True)
class CylinderData:
    word: tuple
    p_u: float
    r_u: float
    interval: tuple


def _check_word(model, word):
    word = tuple(int(d) for d in word)
    for d in word:
        if not 1 <= d <= model.n:
            raise MalformedWordError(f"digit {d} outside 1..{model.n}")
    return word


def cylinder(model, word):
    """Mass, scale and hull image of the cylinder S_u."""
    word = _check_word(model, word)
    a, b = model.hull
    lo, hi = a, b
    p_u = 1.0
    r_u = 1.0
    for d in reversed(word):
        m = model.maps[d - 1]
        lo, hi = m(lo), m(hi)
        p_u *= model.probs[d - 1]
        r_u *= m.ratio
    return CylinderData(word, p_u, r_u, (lo, hi))


def stopping_words(model, r, node_cap=DEFAULT_NODE_CAP):
    """Words u with r_u < r <= r_{u^-}, depth-first in lexicographic order.

    Comparisons are done on logs with a 1e-12 slack so that a scale equal to
    ``r`` in exact arithmetic (e.g. 3**-n against (1/3)**n) is never counted as
    strictly below it.
    """
    if not 0.0 < r < 1.0:
        raise DomainError(f"stopping scale must lie in (0,1), got {r}")
    log_r = model.log_r
    target = math.log(r) - EDGE_TOL
    out = []
    stack = [((), 0.0)]
    visited = 0
    n = model.n
    while stack:
        word, lr = stack.pop()
        visited += 1
        if visited > node_cap:
            raise ResourceError(f"Gamma_r enumeration exceeded {node_cap} nodes", partial=out)
        if lr < target:
            out.append(word)
            continue
        for d in range(n, 0, -1):
            stack.append((word + (d,), lr + log_r[d - 1]))
    return out


def word_logs(model, words):
    """Arrays (log p_u, log r_u) for a list of words."""
    lp = model.log_p
    lr = model.log_r
    out_p = np.empty(len(words))
    out_r = np.empty(len(words))
    for k, w in enumerate(words):
        idx = np.asarray(w, dtype=np.int64) - 1
        out_p[k] = lp[idx].sum()
        out_r[k] = lr[idx].sum()
    return out_p, out_r


def antichain_weight_sum(model, q, beta, antichain):
    """sum over u of p_u**q * r_u**beta."""
    lp, lr = word_logs(model, antichain)
    return math.fsum(np.exp(q * lp + beta * lr))
