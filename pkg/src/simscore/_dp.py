"""Dynamic-programming kernels (tree edit distance forest loop, Levenshtein).

Plain-Python definitions, JIT-compiled with numba when it is installed.
Both paths compute identical values; numba only buys speed on the large
ConPlag fragments.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit as _njit
except ImportError:  # pragma: no cover - numba is an optional extra
    _njit = None


def _zhang_shasha(lmld1, lmld2, kr1, kr2, lab1, lab2, ci, cd, cr):
    """Ordered tree edit distance (Zhang-Shasha). Arrays are 1-based
    postorder: lmld = leftmost-leaf-descendant index, kr = keyroots,
    lab = integer node labels. ci/cd/cr are insert/delete/rename costs."""
    n1 = lab1.shape[0] - 1
    n2 = lab2.shape[0] - 1
    td = np.zeros((n1 + 1, n2 + 1))
    for ii in range(kr1.shape[0]):
        i = kr1[ii]
        li = lmld1[i]
        m = i - li + 2
        for jj in range(kr2.shape[0]):
            j = kr2[jj]
            lj = lmld2[j]
            n = j - lj + 2
            fd = np.zeros((m, n))
            for x in range(1, m):
                fd[x, 0] = fd[x - 1, 0] + cd
            for y in range(1, n):
                fd[0, y] = fd[0, y - 1] + ci
            for x in range(1, m):
                for y in range(1, n):
                    if lmld1[x + li - 1] == li and lmld2[y + lj - 1] == lj:
                        rename = 0.0 if lab1[x + li - 1] == lab2[y + lj - 1] else cr
                        best = fd[x - 1, y] + cd
                        alt = fd[x, y - 1] + ci
                        if alt < best:
                            best = alt
                        alt = fd[x - 1, y - 1] + rename
                        if alt < best:
                            best = alt
                        fd[x, y] = best
                        td[x + li - 1, y + lj - 1] = best
                    else:
                        p = lmld1[x + li - 1] - li
                        q = lmld2[y + lj - 1] - lj
                        best = fd[x - 1, y] + cd
                        alt = fd[x, y - 1] + ci
                        if alt < best:
                            best = alt
                        alt = fd[p, q] + td[x + li - 1, y + lj - 1]
                        if alt < best:
                            best = alt
                        fd[x, y] = best
    return td[n1, n2]


def _levenshtein(a, b):
    """Unit-cost edit distance between two int sequences."""
    m = a.shape[0]
    n = b.shape[0]
    if m == 0:
        return n
    if n == 0:
        return m
    prev = np.empty(n + 1, dtype=np.int64)
    cur = np.empty(n + 1, dtype=np.int64)
    for j in range(n + 1):
        prev[j] = j
    for i in range(1, m + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, n + 1):
            sub = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            ins = cur[j - 1] + 1
            dele = prev[j] + 1
            best = sub
            if ins < best:
                best = ins
            if dele < best:
                best = dele
            cur[j] = best
        prev, cur = cur, prev
    return int(prev[n])


if _njit is not None:
    zhang_shasha = _njit(cache=True)(_zhang_shasha)
    levenshtein = _njit(cache=True)(_levenshtein)
else:  # pragma: no cover
    zhang_shasha = _zhang_shasha
    levenshtein = _levenshtein
