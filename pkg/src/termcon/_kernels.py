"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Set ``TERMCON_DISABLE_NUMBA=1`` to force the numpy implementations (or when
numba is unavailable). Sampling is bit-identical across the two paths;
edit distances agree up to float rounding (exactly, for integral weights).

Random numbers come from a counter-based splitmix64 stream: draw ``k`` of a
stream is a pure function of ``(key, k)``, which is what makes per-line
sampling independent of sharding and worker count.
"""

from __future__ import annotations

import os

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
INV53 = 1.0 / 9007199254740992.0  # 2**-53
TOL = 1e-9

# path codes for the edit-distance backtrace
OP_MATCH, OP_SUB, OP_HYP, OP_REF = 0, 1, 2, 3


def _numba_requested() -> bool:
    return os.environ.get("TERMCON_DISABLE_NUMBA", "").strip().lower() not in ("1", "true", "yes", "on")


try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _numba_requested()


def _njit(fn):
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


# -- counter-based RNG ---------------------------------------------------------


def _mix_np(z: np.ndarray) -> np.ndarray:
    z = z + GAMMA
    z = (z ^ (z >> np.uint64(30))) * MIX1
    z = (z ^ (z >> np.uint64(27))) * MIX2
    return z ^ (z >> np.uint64(31))


def stream_keys(seed: int, line_indices) -> np.ndarray:
    """Per-line stream keys derived from a global seed and line numbers."""
    lines = np.atleast_1d(np.asarray(line_indices, dtype=np.uint64))
    return _mix_np(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ _mix_np(lines))


def uniforms_np(key, start: int, count: int) -> np.ndarray:
    counters = np.arange(start, start + count, dtype=np.uint64)
    bits = _mix_np(np.uint64(key) + counters * GAMMA)
    return (bits >> np.uint64(11)).astype(np.float64) * INV53


def draws_at(keys, counters) -> np.ndarray:
    """Elementwise draw ``counters[i]`` of stream ``keys[i]`` (numpy only; cheap)."""
    keys = np.asarray(keys, dtype=np.uint64)
    counters = np.asarray(counters, dtype=np.uint64)
    bits = _mix_np(keys + counters * GAMMA)
    return (bits >> np.uint64(11)).astype(np.float64) * INV53


@_njit
def _uniform_nb(key, counter):
    z = key + np.uint64(counter) * np.uint64(0x9E3779B97F4A7C15)
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return np.float64(z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@_njit
def _uniforms_nb(key, start, count):
    out = np.empty(count, dtype=np.float64)
    for k in range(count):
        out[k] = _uniform_nb(key, start + k)
    return out


def uniforms(key, start: int, count: int) -> np.ndarray:
    if USE_NUMBA:
        return _uniforms_nb(np.uint64(key), start, count)
    return uniforms_np(key, start, count)


# -- constraint span sampling ----------------------------------------------------
#
# Draw layout per sentence: counter 0 decides the skip, counter 1 + t is the
# draw for token t. Every token consumes exactly one draw whatever the state.


@_njit
def _sample_spans_nb(lengths, keys, s, e, n):
    total = 0
    for i in range(lengths.shape[0]):
        total += lengths[i]
    sent = np.empty(total, dtype=np.int64)
    starts = np.empty(total, dtype=np.int64)
    ends = np.empty(total, dtype=np.int64)
    m = 0
    for i in range(lengths.shape[0]):
        key = keys[i]
        if not _uniform_nb(key, 0) > n:
            continue
        T = lengths[i]
        is_open = False
        start = 0
        for t in range(T):
            r = _uniform_nb(key, 1 + t)
            if is_open:
                if r < e:
                    sent[m] = i
                    starts[m] = start
                    ends[m] = t
                    m += 1
                    is_open = False
            elif r < s:
                is_open = True
                start = t
        if is_open:
            sent[m] = i
            starts[m] = start
            ends[m] = T
            m += 1
    return sent[:m], starts[:m], ends[:m]


def _sample_spans_np(lengths, keys, s, e, n):
    lengths = np.asarray(lengths, dtype=np.int64)
    keys = np.asarray(keys, dtype=np.uint64)
    B = lengths.shape[0]
    T = int(lengths.max()) if B else 0
    counters = np.arange(T + 1, dtype=np.uint64)
    bits = _mix_np(keys[:, None] + counters[None, :] * GAMMA)
    draws = (bits >> np.uint64(11)).astype(np.float64) * INV53
    active = draws[:, 0] > n
    is_open = np.zeros(B, dtype=bool)
    start = np.zeros(B, dtype=np.int64)
    out_sent, out_start, out_end = [], [], []
    # vectorised over sentences, sequential over token position
    for t in range(T):
        live = active & (t < lengths)
        r = draws[:, 1 + t]
        closing = live & is_open & (r < e)
        opening = live & ~is_open & (r < s)
        idx = np.flatnonzero(closing)
        if idx.size:
            out_sent.append(idx)
            out_start.append(start[idx])
            out_end.append(np.full(idx.size, t, dtype=np.int64))
        is_open[closing] = False
        is_open[opening] = True
        start[opening] = t
    idx = np.flatnonzero(is_open)
    if idx.size:
        out_sent.append(idx)
        out_start.append(start[idx])
        out_end.append(lengths[idx])
    if not out_sent:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy(), empty.copy()
    sent = np.concatenate(out_sent).astype(np.int64)
    starts = np.concatenate(out_start).astype(np.int64)
    ends = np.concatenate(out_end).astype(np.int64)
    order = np.lexsort((starts, sent))
    return sent[order], starts[order], ends[order]


def sample_spans(lengths, keys, s: float, e: float, n: float):
    """Sample constraint spans for a batch of sentences.

    Returns parallel arrays ``(sentence, start, end)`` ordered by sentence and
    start. A constraint closed by a draw ends before the closing token; one
    still open at the end runs to the sentence end.
    """
    lengths = np.ascontiguousarray(lengths, dtype=np.int64)
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    if USE_NUMBA:
        return _sample_spans_nb(lengths, keys, float(s), float(e), float(n))
    return _sample_spans_np(lengths, keys, s, e, n)


# -- weighted edit distance ------------------------------------------------------


@_njit
def _wed_nb(hyp, ref, hw, rw):
    nh = hyp.shape[0]
    nr = ref.shape[0]
    D = np.empty((nh + 1, nr + 1), dtype=np.float64)
    D[0, 0] = 0.0
    for j in range(1, nr + 1):
        D[0, j] = D[0, j - 1] + rw[j - 1]
    for i in range(1, nh + 1):
        D[i, 0] = D[i - 1, 0] + hw[i - 1]
        for j in range(1, nr + 1):
            if hyp[i - 1] == ref[j - 1]:
                diag = D[i - 1, j - 1]
            else:
                diag = D[i - 1, j - 1] + max(hw[i - 1], rw[j - 1])
            up = D[i - 1, j] + hw[i - 1]
            best = diag if diag < up else up
            left = D[i, j - 1] + rw[j - 1]
            D[i, j] = best if best < left else left
    return D


def _wed_np(hyp, ref, hw, rw):
    nh, nr = hyp.shape[0], ref.shape[0]
    D = np.empty((nh + 1, nr + 1), dtype=np.float64)
    D[0, 0] = 0.0
    D[0, 1:] = np.cumsum(rw)
    # left moves inside a row are a running minimum over cumulative ref weight
    cref = np.concatenate(([0.0], np.cumsum(rw)))
    for i in range(1, nh + 1):
        sub = np.where(ref == hyp[i - 1], 0.0, np.maximum(hw[i - 1], rw))
        cand = np.empty(nr + 1, dtype=np.float64)
        cand[0] = D[i - 1, 0] + hw[i - 1]
        cand[1:] = np.minimum(D[i - 1, :-1] + sub, D[i - 1, 1:] + hw[i - 1])
        D[i] = cref + np.minimum.accumulate(cand - cref)
    return D


@_njit
def _backtrace_nb(D, hyp, ref, hw, rw):
    i = hyp.shape[0]
    j = ref.shape[0]
    ops = np.empty(i + j, dtype=np.int8)
    k = 0
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            same = hyp[i - 1] == ref[j - 1]
            cost = 0.0 if same else max(hw[i - 1], rw[j - 1])
            if abs(D[i, j] - (D[i - 1, j - 1] + cost)) <= 1e-9:
                ops[k] = 0 if same else 1
                k += 1
                i -= 1
                j -= 1
                continue
        if i > 0 and abs(D[i, j] - (D[i - 1, j] + hw[i - 1])) <= 1e-9:
            ops[k] = 2
            k += 1
            i -= 1
            continue
        ops[k] = 3
        k += 1
        j -= 1
    return ops[:k][::-1].copy()


def weighted_edit_distance(hyp, ref, hw, rw, with_path: bool = False):
    """Weighted Levenshtein distance between integer token-id arrays.

    An unmatched hypothesis token costs its own weight, an unmatched reference
    token its own weight, and a substitution the larger of the two. With
    ``with_path`` the op sequence (``OP_*`` codes, left to right) is returned
    too.
    """
    hyp = np.ascontiguousarray(hyp, dtype=np.int64)
    ref = np.ascontiguousarray(ref, dtype=np.int64)
    hw = np.ascontiguousarray(hw, dtype=np.float64)
    rw = np.ascontiguousarray(rw, dtype=np.float64)
    if USE_NUMBA:
        D = _wed_nb(hyp, ref, hw, rw)
        if with_path:
            return float(D[-1, -1]), _backtrace_nb(D, hyp, ref, hw, rw)
        return float(D[-1, -1])
    D = _wed_np(hyp, ref, hw, rw)
    if with_path:
        return float(D[-1, -1]), _backtrace_py(D, hyp, ref, hw, rw)
    return float(D[-1, -1])


def _backtrace_py(D, hyp, ref, hw, rw):
    i, j = hyp.shape[0], ref.shape[0]
    ops = []
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            same = hyp[i - 1] == ref[j - 1]
            cost = 0.0 if same else max(hw[i - 1], rw[j - 1])
            if abs(D[i, j] - (D[i - 1, j - 1] + cost)) <= TOL:
                ops.append(OP_MATCH if same else OP_SUB)
                i -= 1
                j -= 1
                continue
        if i > 0 and abs(D[i, j] - (D[i - 1, j] + hw[i - 1])) <= TOL:
            ops.append(OP_HYP)
            i -= 1
            continue
        ops.append(OP_REF)
        j -= 1
    return np.array(ops[::-1], dtype=np.int8)


@_njit
def _shifted_costs_nb(hyp, ref, hw, rw, cands):
    # cands rows: (start, length, dest) with dest an insertion index into the
    # sequence after the block has been removed
    out = np.empty(cands.shape[0], dtype=np.float64)
    n = hyp.shape[0]
    buf = np.empty(n, dtype=np.int64)
    wbuf = np.empty(n, dtype=np.float64)
    for c in range(cands.shape[0]):
        i = cands[c, 0]
        L = cands[c, 1]
        d = cands[c, 2]
        _apply_shift(hyp, hw, i, L, d, buf, wbuf)
        D = _wed_nb(buf, ref, wbuf, rw)
        out[c] = D[n, ref.shape[0]]
    return out


@_njit
def _apply_shift(hyp, hw, i, L, d, buf, wbuf):
    n = hyp.shape[0]
    k = 0
    # rest = hyp without the block; output = rest[:d] + block + rest[d:]
    r = 0
    for p in range(n):
        if p >= i and p < i + L:
            continue
        if r == d:
            for q in range(L):
                buf[k] = hyp[i + q]
                wbuf[k] = hw[i + q]
                k += 1
        buf[k] = hyp[p]
        wbuf[k] = hw[p]
        k += 1
        r += 1
    if r == d:
        for q in range(L):
            buf[k] = hyp[i + q]
            wbuf[k] = hw[i + q]
            k += 1


def apply_shift(hyp, hw, i: int, L: int, d: int):
    rest = np.concatenate((hyp[:i], hyp[i + L:]))
    rest_w = np.concatenate((hw[:i], hw[i + L:]))
    return (
        np.concatenate((rest[:d], hyp[i:i + L], rest[d:])),
        np.concatenate((rest_w[:d], hw[i:i + L], rest_w[d:])),
    )


def shifted_costs(hyp, ref, hw, rw, cands) -> np.ndarray:
    """Edit distance after each candidate block shift ``(start, length, dest)``."""
    hyp = np.ascontiguousarray(hyp, dtype=np.int64)
    ref = np.ascontiguousarray(ref, dtype=np.int64)
    hw = np.ascontiguousarray(hw, dtype=np.float64)
    rw = np.ascontiguousarray(rw, dtype=np.float64)
    cands = np.ascontiguousarray(cands, dtype=np.int64).reshape(-1, 3)
    if USE_NUMBA:
        return _shifted_costs_nb(hyp, ref, hw, rw, cands)
    out = np.empty(cands.shape[0], dtype=np.float64)
    for c, (i, L, d) in enumerate(cands):
        h2, w2 = apply_shift(hyp, hw, int(i), int(L), int(d))
        out[c] = _wed_np(h2, ref, w2, rw)[-1, -1]
    return out


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
