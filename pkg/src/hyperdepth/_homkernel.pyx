# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hom-counting kernel; same contract as ``_homkernel_py.count``.

Masks are limited to 64 reds on either side and counts to 64 bits; the
wrapper falls back to the pure-Python kernel when either limit is hit.
"""

from libc.stdlib cimport malloc, free
from libc.stdint cimport uint64_t

cdef extern from *:
    """
    static inline int hk_popcount(unsigned long long x) { return __builtin_popcountll(x); }
    static inline int hk_mul_overflow(unsigned long long a, unsigned long long b, unsigned long long *r) {
        return __builtin_mul_overflow(a, b, r);
    }
    static inline int hk_add_overflow(unsigned long long a, unsigned long long b, unsigned long long *r) {
        return __builtin_add_overflow(a, b, r);
    }
    """
    int hk_popcount(unsigned long long x) nogil
    int hk_mul_overflow(unsigned long long a, unsigned long long b, unsigned long long *r) nogil
    int hk_add_overflow(unsigned long long a, unsigned long long b, unsigned long long *r) nogil


cdef struct Ctx:
    int nb
    int nr
    uint64_t *src
    uint64_t *tgt
    int *allowed_start
    int *allowed
    int *members_start
    int *members
    int *touch_start
    int *touch
    uint64_t *cur
    uint64_t *saved
    int *h_e
    uint64_t *need
    uint64_t *covered
    int *left
    int equality
    unsigned long long total
    int overflow


cdef unsigned long long leaf_inclusion(Ctx *c) nogil:
    cdef unsigned long long p = 1
    cdef int v
    for v in range(c.nr):
        if hk_mul_overflow(p, <unsigned long long>hk_popcount(c.cur[v]), &p):
            c.overflow = 1
            return 0
        if p == 0:
            return 0
    return p


cdef unsigned long long assign(Ctx *c, int v) nogil:
    if v == c.nr:
        return 1
    cdef unsigned long long acc = 0, sub
    cdef uint64_t opts = c.cur[v], bit
    cdef int j, e, ok
    cdef int lo = c.touch_start[v], hi = c.touch_start[v + 1]
    cdef uint64_t *old = c.saved + (c.nb + 1) * c.nr + v * c.nb
    while opts:
        bit = opts & (~opts + 1)
        opts ^= bit
        ok = 1
        for j in range(lo, hi):
            e = c.touch[j]
            old[j - lo] = c.covered[e]
            c.covered[e] |= bit
            c.left[e] -= 1
            if hk_popcount(c.need[e] & ~c.covered[e]) > c.left[e]:
                ok = 0
        if ok:
            sub = assign(c, v + 1)
            if hk_add_overflow(acc, sub, &acc):
                c.overflow = 1
        for j in range(lo, hi):
            e = c.touch[j]
            c.covered[e] = old[j - lo]
            c.left[e] += 1
        if c.overflow:
            return 0
    return acc


cdef unsigned long long leaf_equality(Ctx *c) nogil:
    cdef int e
    for e in range(c.nb):
        c.need[e] = c.tgt[c.h_e[e]]
        c.covered[e] = 0
        c.left[e] = c.members_start[e + 1] - c.members_start[e]
    return assign(c, 0)


cdef void rec(Ctx *c, int d) nogil:
    cdef unsigned long long add
    if c.overflow:
        return
    if d == c.nb:
        if c.equality:
            add = leaf_equality(c)
        else:
            add = leaf_inclusion(c)
        if hk_add_overflow(c.total, add, &c.total):
            c.overflow = 1
        return
    cdef int a, f, j, v, n, ok
    cdef uint64_t tm, nm
    cdef int lo = c.members_start[d], hi = c.members_start[d + 1]
    cdef uint64_t *sv = c.saved + d * c.nr
    for a in range(c.allowed_start[d], c.allowed_start[d + 1]):
        f = c.allowed[a]
        tm = c.tgt[f]
        ok = 1
        n = 0
        for j in range(lo, hi):
            v = c.members[j]
            nm = c.cur[v] & tm
            sv[n] = c.cur[v]
            n += 1
            c.cur[v] = nm
            if nm == 0:
                ok = 0
                break
        if ok:
            c.h_e[d] = f
            rec(c, d + 1)
        for j in range(n):
            c.cur[c.members[lo + j]] = sv[j]
        if c.overflow:
            return


def count(src, int n_red, tgt, allowed, red_init, bint equality):
    cdef Ctx c
    cdef int nb = len(src), nt = len(tgt)
    cdef int i, j, k, e, v
    if n_red > 64:
        raise OverflowError("too many source reds for the compiled kernel")
    c.nb = nb
    c.nr = n_red
    c.equality = equality
    c.total = 0
    c.overflow = 0
    n_allowed = sum(len(a) for a in allowed)
    members = [[v for v in range(n_red) if (src[e] >> v) & 1] for e in range(nb)]
    touching = [[e for e in range(nb) if (src[e] >> v) & 1] for v in range(n_red)]
    n_mem = sum(len(m) for m in members)
    c.src = <uint64_t *>malloc(max(nb, 1) * sizeof(uint64_t))
    c.tgt = <uint64_t *>malloc(max(nt, 1) * sizeof(uint64_t))
    c.allowed_start = <int *>malloc((nb + 1) * sizeof(int))
    c.allowed = <int *>malloc(max(n_allowed, 1) * sizeof(int))
    c.members_start = <int *>malloc((nb + 1) * sizeof(int))
    c.members = <int *>malloc(max(n_mem, 1) * sizeof(int))
    c.touch_start = <int *>malloc((n_red + 1) * sizeof(int))
    c.touch = <int *>malloc(max(n_mem, 1) * sizeof(int))
    c.cur = <uint64_t *>malloc(max(n_red, 1) * sizeof(uint64_t))
    c.saved = <uint64_t *>malloc(max((nb + 1) * n_red + n_red * nb, 1) * sizeof(uint64_t))
    c.h_e = <int *>malloc(max(nb, 1) * sizeof(int))
    c.need = <uint64_t *>malloc(max(nb, 1) * sizeof(uint64_t))
    c.covered = <uint64_t *>malloc(max(nb, 1) * sizeof(uint64_t))
    c.left = <int *>malloc(max(nb, 1) * sizeof(int))
    try:
        for i in range(nb):
            c.src[i] = src[i]
        for i in range(nt):
            if tgt[i] >> 64:
                raise OverflowError("too many target reds for the compiled kernel")
            c.tgt[i] = tgt[i]
        k = 0
        for i in range(nb):
            c.allowed_start[i] = k
            for f in allowed[i]:
                c.allowed[k] = f
                k += 1
        c.allowed_start[nb] = k
        k = 0
        for i in range(nb):
            c.members_start[i] = k
            for v in members[i]:
                c.members[k] = v
                k += 1
        c.members_start[nb] = k
        k = 0
        for i in range(n_red):
            c.touch_start[i] = k
            for e in touching[i]:
                c.touch[k] = e
                k += 1
            if red_init[i] >> 64:
                raise OverflowError("too many target reds for the compiled kernel")
            c.cur[i] = red_init[i]
        c.touch_start[n_red] = k
        with nogil:
            rec(&c, 0)
        if c.overflow:
            raise OverflowError("count exceeds 64 bits")
        return c.total
    finally:
        free(c.src); free(c.tgt); free(c.allowed_start); free(c.allowed)
        free(c.members_start); free(c.members); free(c.touch_start); free(c.touch)
        free(c.cur); free(c.saved); free(c.h_e); free(c.need); free(c.covered); free(c.left)
