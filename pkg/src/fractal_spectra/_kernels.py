"""Hot inner loops.

Every kernel exists twice: a pure numpy/Python implementation (``*_py``) and a
numba-compiled one (``*_jit``). The module-level name without suffix points at
the compiled kernel unless ``FRACTAL_SPECTRA_JIT`` is set to ``0`` or numba is
missing. Both paths must agree to floating point round-off; the test suite
checks this on every kernel.
"""

import functools
import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

JIT_REQUESTED = os.environ.get("FRACTAL_SPECTRA_JIT", "1").strip().lower() not in (
    "0",
    "false",
    "no",
    "off",
)
USE_JIT = JIT_REQUESTED and numba is not None

# status codes returned by interval_masses
OK = 0
DEPTH_CAP = 1
WIDTH_OVERFLOW = 2


def _bracket(log_p, log_r, q):
    # f(lo) > 0 > f(hi) by construction, see pressure_roots docstring
    m = np.min(np.abs(log_r))
    c = np.max(np.abs(log_p)) / m
    aq = abs(q)
    lo = -aq * c - 1.0
    hi = aq * c + math.log(log_p.shape[0]) / m + 1.0
    return lo, hi


def pressure_roots_py(log_p, log_r, qs, max_iter=200):
    """Solve ``sum_i exp(q*log_p[i] + b*log_r[i]) = 1`` for b, vectorised over ``qs``.

    The bracket ``[-|q|C - 1, |q|C + ln N / m + 1]`` with ``m = min|log r|`` and
    ``C = max|log p| / m`` always straddles the root, so no expansion is needed.
    Bisection runs until the midpoint stops moving (full double precision).
    """
    qs = np.asarray(qs, dtype=np.float64)
    log_p = np.asarray(log_p, dtype=np.float64)
    log_r = np.asarray(log_r, dtype=np.float64)
    m = np.min(np.abs(log_r))
    c = np.max(np.abs(log_p)) / m
    aq = np.abs(qs)
    lo = -aq * c - 1.0
    hi = aq * c + np.log(log_p.shape[0]) / m + 1.0
    qp = qs[:, None] * log_p[None, :]
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        e = qp + mid[:, None] * log_r[None, :]
        emax = e.max(axis=1)
        f = emax + np.log(np.exp(e - emax[:, None]).sum(axis=1))
        pos = f > 0.0
        moved = (mid != lo) & (mid != hi)
        lo = np.where(pos & moved, mid, lo)
        hi = np.where(~pos & moved, mid, hi)
        if not moved.any():
            break
    return 0.5 * (lo + hi)


def pressure_roots_loop(log_p, log_r, qs, max_iter=200):
    n = log_p.shape[0]
    m = np.inf
    big = 0.0
    for i in range(n):
        m = min(m, abs(log_r[i]))
        big = max(big, abs(log_p[i]))
    c = big / m
    out = np.empty(qs.shape[0])
    for k in range(qs.shape[0]):
        q = qs[k]
        aq = abs(q)
        lo = -aq * c - 1.0
        hi = aq * c + math.log(n) / m + 1.0
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            emax = -np.inf
            for i in range(n):
                e = q * log_p[i] + mid * log_r[i]
                if e > emax:
                    emax = e
            s = 0.0
            for i in range(n):
                s += math.exp(q * log_p[i] + mid * log_r[i] - emax)
            if emax + math.log(s) > 0.0:
                lo = mid
            else:
                hi = mid
        out[k] = 0.5 * (lo + hi)
    return out


def fill_digits_py(freqs, lengths, n, tie_tol=1e-12):
    """Deterministic proportional fill over consecutive blocks.

    Within a block, position ``j`` (1-based) receives the digit whose running
    count lags furthest behind ``freq[i] * j``; ties go to the lowest index.
    Returns 1-based digits as int8.
    """
    n_blocks, n_digits = freqs.shape
    out = np.empty(n, dtype=np.int8)
    counts = np.zeros(n_digits, dtype=np.int64)
    pos = 0
    for b in range(n_blocks):
        if pos >= n:
            break
        for i in range(n_digits):
            counts[i] = 0
        length = lengths[b]
        j = 0
        while j < length and pos < n:
            j += 1
            best = -np.inf
            for i in range(n_digits):
                d = freqs[b, i] * j - counts[i]
                if d > best:
                    best = d
            pick = 0
            for i in range(n_digits):
                if freqs[b, i] * j - counts[i] >= best - tie_tol:
                    pick = i
                    break
            counts[pick] += 1
            out[pos] = pick + 1
            pos += 1
    return out


def interval_masses_py(a, b, tol, img_lo, ratios, probs, hull_lo, hull_len, depth_cap):
    """Enclose mu([a_k, b_k]) for a batch of intervals.

    Breadth-first descent of the cylinder tree. A cylinder inside the interval
    is decided in full, one outside (or meeting it in a single point, which has
    zero mass because the measure is non-atomic) is dropped, and straddlers are
    refined until their total mass is at most ``tol_k``.

    ``img_lo[i]`` is ``S_i(hull_lo) - hull_lo``, so child ``i`` of a cylinder with
    left end ``c`` and scale ``s`` has left end ``c + s*img_lo[i]``.
    """
    n_maps = ratios.shape[0]
    width = 8 * n_maps + 8
    n_int = a.shape[0]
    lo_out = np.zeros(n_int)
    hi_out = np.zeros(n_int)
    depth_out = np.zeros(n_int, dtype=np.int64)
    status = np.zeros(n_int, dtype=np.int64)
    cur_c = np.empty(width)
    cur_s = np.empty(width)
    cur_p = np.empty(width)
    nxt_c = np.empty(width)
    nxt_s = np.empty(width)
    nxt_p = np.empty(width)
    for k in range(n_int):
        ak = a[k]
        bk = b[k]
        if bk <= ak:
            continue
        decided = 0.0
        cur_c[0] = hull_lo
        cur_s[0] = 1.0
        cur_p[0] = 1.0
        n_cur = 1
        depth = 0
        undecided = 0.0
        while True:
            n_nxt = 0
            undecided = 0.0
            for t in range(n_cur):
                c = cur_c[t]
                s = cur_s[t]
                d = c + s * hull_len
                p = cur_p[t]
                if c >= ak and d <= bk:
                    decided += p
                elif d <= ak or c >= bk:
                    pass
                else:
                    if n_nxt >= width:
                        status[k] = WIDTH_OVERFLOW
                        break
                    nxt_c[n_nxt] = c
                    nxt_s[n_nxt] = s
                    nxt_p[n_nxt] = p
                    n_nxt += 1
                    undecided += p
            if status[k] != OK:
                break
            if undecided <= tol[k]:
                break
            if depth >= depth_cap:
                status[k] = DEPTH_CAP
                break
            # expand straddlers into the current buffers
            if n_nxt * n_maps > width:
                status[k] = WIDTH_OVERFLOW
                break
            n_cur = 0
            for t in range(n_nxt):
                for i in range(n_maps):
                    cur_c[n_cur] = nxt_c[t] + nxt_s[t] * img_lo[i]
                    cur_s[n_cur] = nxt_s[t] * ratios[i]
                    cur_p[n_cur] = nxt_p[t] * probs[i]
                    n_cur += 1
            depth += 1
        lo_out[k] = decided
        hi_out[k] = decided + undecided
        depth_out[k] = depth
    return lo_out, hi_out, depth_out, status


if numba is not None:
    _jit = functools.partial(numba.njit, cache=True, nogil=True)
    pressure_roots_jit = _jit(pressure_roots_loop)
    fill_digits_jit = _jit(fill_digits_py)
    interval_masses_jit = _jit(interval_masses_py)
else:  # pragma: no cover
    pressure_roots_jit = pressure_roots_loop
    fill_digits_jit = fill_digits_py
    interval_masses_jit = interval_masses_py


def _as_f64(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def pressure_roots(log_p, log_r, qs):
    qs = np.atleast_1d(_as_f64(qs))
    if USE_JIT:
        return pressure_roots_jit(_as_f64(log_p), _as_f64(log_r), qs)
    return pressure_roots_py(log_p, log_r, qs)


def fill_digits(freqs, lengths, n):
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    lengths = np.ascontiguousarray(lengths, dtype=np.int64)
    fn = fill_digits_jit if USE_JIT else fill_digits_py
    return fn(freqs, lengths, int(n), 1e-12)


def interval_masses(a, b, tol, img_lo, ratios, probs, hull_lo, hull_len, depth_cap):
    a = np.atleast_1d(_as_f64(a))
    b = np.atleast_1d(_as_f64(b))
    tol = np.broadcast_to(_as_f64(tol), a.shape).copy()
    fn = interval_masses_jit if USE_JIT else interval_masses_py
    return fn(
        a,
        b,
        tol,
        _as_f64(img_lo),
        _as_f64(ratios),
        _as_f64(probs),
        float(hull_lo),
        float(hull_len),
        int(depth_cap),
    )
