"""Dynamic-programming kernels over integer-encoded symbol sequences.

All kernels take ``int64`` arrays and are compiled with numba when enabled
(see :mod:`cognatephylo._accel`).  Global alignment follows Gotoh's affine
scheme: a gap of length ``L`` costs ``gap_open + (L - 1) * gap_extend``.
"""

import numpy as np

from ._accel import jit

NEG = -1e300


@jit
def edit_distance_kernel(a, b):
    n = a.shape[0]
    m = b.shape[0]
    prev = np.arange(m + 1)
    cur = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        cur[0] = i
        for j in range(1, m + 1):
            sub = prev[j - 1] + (0 if a[i - 1] == b[j - 1] else 1)
            dele = prev[j] + 1
            ins = cur[j - 1] + 1
            best = sub
            if dele < best:
                best = dele
            if ins < best:
                best = ins
            cur[j] = best
        for j in range(m + 1):
            prev[j] = cur[j]
    return prev[m]


@jit
def _fill(a, b, scores, gap_open, gap_extend, M, X, Y):
    n = a.shape[0]
    m = b.shape[0]
    M[0, 0] = 0.0
    X[0, 0] = NEG
    Y[0, 0] = NEG
    for i in range(1, n + 1):
        M[i, 0] = NEG
        X[i, 0] = gap_open + (i - 1) * gap_extend
        Y[i, 0] = NEG
    for j in range(1, m + 1):
        M[0, j] = NEG
        X[0, j] = NEG
        Y[0, j] = gap_open + (j - 1) * gap_extend
    for i in range(1, n + 1):
        ai = a[i - 1]
        for j in range(1, m + 1):
            best = M[i - 1, j - 1]
            if X[i - 1, j - 1] > best:
                best = X[i - 1, j - 1]
            if Y[i - 1, j - 1] > best:
                best = Y[i - 1, j - 1]
            M[i, j] = best + scores[ai, b[j - 1]]

            best = M[i - 1, j] + gap_open
            v = X[i - 1, j] + gap_extend
            if v > best:
                best = v
            v = Y[i - 1, j] + gap_open
            if v > best:
                best = v
            X[i, j] = best

            best = M[i, j - 1] + gap_open
            v = Y[i, j - 1] + gap_extend
            if v > best:
                best = v
            v = X[i, j - 1] + gap_open
            if v > best:
                best = v
            Y[i, j] = best


@jit
def align_score(a, b, scores, gap_open, gap_extend):
    """Optimal global alignment score."""
    n = a.shape[0]
    m = b.shape[0]
    M = np.empty((n + 1, m + 1))
    X = np.empty((n + 1, m + 1))
    Y = np.empty((n + 1, m + 1))
    _fill(a, b, scores, gap_open, gap_extend, M, X, Y)
    best = M[n, m]
    if X[n, m] > best:
        best = X[n, m]
    if Y[n, m] > best:
        best = Y[n, m]
    return best


@jit
def align_trace(a, b, scores, gap_open, gap_extend):
    """Optimal global alignment.

    Returns ``(score, pairs)`` where ``pairs`` is a ``(L, 2)`` array of
    aligned positions; ``-1`` marks a gap.  Ties prefer match, then a gap in
    ``b``, then a gap in ``a``.
    """
    n = a.shape[0]
    m = b.shape[0]
    M = np.empty((n + 1, m + 1))
    X = np.empty((n + 1, m + 1))
    Y = np.empty((n + 1, m + 1))
    _fill(a, b, scores, gap_open, gap_extend, M, X, Y)
    state = 0
    best = M[n, m]
    if X[n, m] > best:
        best = X[n, m]
        state = 1
    if Y[n, m] > best:
        best = Y[n, m]
        state = 2
    out = np.empty((n + m, 2), dtype=np.int64)
    k = 0
    i = n
    j = m
    while i > 0 or j > 0:
        if state == 0:
            out[k, 0] = i - 1
            out[k, 1] = j - 1
            prev = M[i - 1, j - 1]
            nxt = 0
            if X[i - 1, j - 1] > prev:
                prev = X[i - 1, j - 1]
                nxt = 1
            if Y[i - 1, j - 1] > prev:
                nxt = 2
            i -= 1
            j -= 1
            state = nxt
        elif state == 1:
            out[k, 0] = i - 1
            out[k, 1] = -1
            if i == 1 and j == 0:
                nxt = 0
            else:
                prev = M[i - 1, j] + gap_open
                nxt = 0
                v = X[i - 1, j] + gap_extend
                if v > prev:
                    prev = v
                    nxt = 1
                v = Y[i - 1, j] + gap_open
                if v > prev:
                    nxt = 2
                if j == 0:
                    nxt = 1
            i -= 1
            state = nxt
        else:
            out[k, 0] = -1
            out[k, 1] = j - 1
            if j == 1 and i == 0:
                nxt = 0
            else:
                prev = M[i, j - 1] + gap_open
                nxt = 0
                v = Y[i, j - 1] + gap_extend
                if v > prev:
                    prev = v
                    nxt = 2
                v = X[i, j - 1] + gap_open
                if v > prev:
                    nxt = 1
                if i == 0:
                    nxt = 2
            j -= 1
            state = nxt
        k += 1
    res = np.empty((k, 2), dtype=np.int64)
    for t in range(k):
        res[t, 0] = out[k - 1 - t, 0]
        res[t, 1] = out[k - 1 - t, 1]
    return best, res


@jit
def batch_scores(flat, offsets, left, right, scores, gap_open, gap_extend):
    """Alignment scores for many sequence pairs.

    Sequence ``s`` is ``flat[offsets[s]:offsets[s + 1]]``; pair ``p`` aligns
    sequences ``left[p]`` and ``right[p]``.
    """
    out = np.empty(left.shape[0])
    for p in range(left.shape[0]):
        a = flat[offsets[left[p]]:offsets[left[p] + 1]]
        b = flat[offsets[right[p]]:offsets[right[p] + 1]]
        out[p] = align_score(a, b, scores, gap_open, gap_extend)
    return out


@jit
def batch_count(flat, offsets, left, right, scores, gap_open, gap_extend, counts):
    """Align each pair and add the matched symbol pairs into ``counts``.

    ``counts[x, y]`` is incremented for every aligned column with symbol
    ``x`` from the left sequence and ``y`` from the right one.  Gap columns
    are not counted.  Returns the number of matched columns added.
    """
    total = 0
    for p in range(left.shape[0]):
        a = flat[offsets[left[p]]:offsets[left[p] + 1]]
        b = flat[offsets[right[p]]:offsets[right[p] + 1]]
        _, pairs = align_trace(a, b, scores, gap_open, gap_extend)
        for t in range(pairs.shape[0]):
            i = pairs[t, 0]
            j = pairs[t, 1]
            if i >= 0 and j >= 0:
                counts[a[i], b[j]] += 1.0
                total += 1
    return total


def pack(sequences):
    """Concatenate integer sequences into ``(flat, offsets)``."""
    lengths = np.array([len(s) for s in sequences], dtype=np.int64)
    offsets = np.zeros(len(sequences) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    flat = np.concatenate([np.asarray(s, dtype=np.int64) for s in sequences]) if sequences else np.zeros(0, np.int64)
    return flat.astype(np.int64), offsets
