"""Compiled twins of the selection routines in :mod:`dpselect.select_core`.

The logic mirrors the generic implementation statement for statement so the
counts agree exactly; the test suite checks that on random and exhaustive
inputs.  ``cnt`` is a length-2 int64 buffer ``[comparisons, swaps]``.
"""

import numba as nb
import numpy as np

ALGO_DUAL = 0
ALGO_CLASSIC = 1

RANK_UNIFORM = 0
RANK_MIN = 1
RANK_MAX = 2
RANK_FIXED = 3


@nb.njit(cache=True, nogil=True)
def partition_dual(a, left, right, cnt):
    cnt[0] += 1
    if a[right] < a[left]:
        p = a[right]
        q = a[left]
    else:
        p = a[left]
        q = a[right]
    l = left + 1
    g = right - 1
    k = l
    while k <= g:
        cnt[0] += 1
        if a[k] < p:
            t = a[k]; a[k] = a[l]; a[l] = t
            cnt[1] += 1
            l += 1
        else:
            cnt[0] += 1
            if not a[k] < q:
                while True:
                    cnt[0] += 1
                    if q < a[g] and k < g:
                        g -= 1
                    else:
                        break
                cnt[0] += 1
                if not a[g] < p:
                    t = a[k]; a[k] = a[g]; a[g] = t
                    cnt[1] += 1
                else:
                    t = a[k]; a[k] = a[g]; a[g] = t
                    t = a[k]; a[k] = a[l]; a[l] = t
                    cnt[1] += 2
                    l += 1
                g -= 1
        k += 1
    l -= 1
    g += 1
    a[left] = a[l]
    a[l] = p
    a[right] = a[g]
    a[g] = q
    cnt[1] += 2
    return l, g


@nb.njit(cache=True, nogil=True)
def partition_hoare(a, left, right, cnt):
    if right == left:
        return left
    v = a[left]
    i = left
    j = right + 1
    while True:
        i += 1
        while True:
            cnt[0] += 1
            if not a[i] < v or i == right:
                break
            i += 1
        j -= 1
        while True:
            cnt[0] += 1
            if not v < a[j]:
                break
            j -= 1
        if i >= j:
            break
        t = a[i]; a[i] = a[j]; a[j] = t
        cnt[1] += 1
    t = a[left]; a[left] = a[j]; a[j] = t
    cnt[1] += 1
    return j


@nb.njit(cache=True, nogil=True)
def select_dual(a, rank, cnt):
    target = rank - 1
    left = 0
    right = a.shape[0] - 1
    while right > left:
        ip, iq = partition_dual(a, left, right, cnt)
        if target < ip:
            right = ip - 1
        elif target == ip:
            return a[ip]
        elif target < iq:
            left = ip + 1
            right = iq - 1
        elif target == iq:
            return a[iq]
        else:
            left = iq + 1
    return a[left]


@nb.njit(cache=True, nogil=True)
def select_classic(a, rank, cnt):
    target = rank - 1
    left = 0
    right = a.shape[0] - 1
    while right > left:
        j = partition_hoare(a, left, right, cnt)
        if target < j:
            right = j - 1
        elif target > j:
            left = j + 1
        else:
            return a[j]
    return a[left]


@nb.njit(cache=True, nogil=True)
def run_batch(n, trial_seeds, algo, rank_mode, fixed_rank, out_cmp, out_swp):
    """One selection per seed on a fresh uniformly shuffled ``1..n``.

    Each trial reseeds the generator from its own seed, so a trial's outcome
    depends only on that seed and never on how trials are batched.
    """
    a = np.empty(n, np.int64)
    cnt = np.zeros(2, np.int64)
    for t in range(trial_seeds.shape[0]):
        np.random.seed(trial_seeds[t])
        for i in range(n):
            a[i] = i + 1
        for i in range(n - 1, 0, -1):
            j = np.random.randint(0, i + 1)
            tmp = a[i]; a[i] = a[j]; a[j] = tmp
        if rank_mode == RANK_UNIFORM:
            r = np.random.randint(1, n + 1)
        elif rank_mode == RANK_MIN:
            r = 1
        elif rank_mode == RANK_MAX:
            r = n
        else:
            r = fixed_rank
        cnt[0] = 0
        cnt[1] = 0
        if algo == ALGO_DUAL:
            v = select_dual(a, r, cnt)
        else:
            v = select_classic(a, r, cnt)
        if v != r:
            raise RuntimeError("selection returned the wrong order statistic")
        out_cmp[t] = cnt[0]
        out_swp[t] = cnt[1]


@nb.njit(cache=True)
def enumerate_dual(perms, ranks):
    """Total comparisons of dual Quickselect over every row of ``perms`` and rank."""
    m, n = perms.shape
    a = np.empty(n, np.int64)
    cnt = np.zeros(2, np.int64)
    total = 0
    for i in range(m):
        for r in ranks:
            a[:] = perms[i]
            cnt[0] = 0
            select_dual(a, r, cnt)
            total += cnt[0]
    return total
