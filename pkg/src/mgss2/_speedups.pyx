# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; see ``_fallback.py`` for the reference."""

from libc.math cimport erfc, exp, sqrt, INFINITY, fabs
from libc.stdlib cimport malloc, free
from libc.stdint cimport uint64_t, int64_t

import numpy as np

cdef uint64_t FULL = 0xFFFFFFFFFFFFFFFFULL
cdef uint64_t NOT_A = 0xFEFEFEFEFEFEFEFEULL
cdef uint64_t NOT_H = 0x7F7F7F7F7F7F7F7FULL

cdef int SHIFTS[8]
cdef uint64_t MASKS[8]
SHIFTS[:] = [1, -1, 8, -8, 9, 7, -7, -9]
MASKS[:] = [NOT_A, NOT_H, FULL, FULL, NOT_A, NOT_H, NOT_A, NOT_H]

MIN_KIND = -1
MAX_KIND = 1


cdef inline uint64_t _shift(uint64_t bb, int shift, uint64_t mask) nogil:
    if shift > 0:
        return (bb << shift) & mask
    return (bb >> (-shift)) & mask


cdef uint64_t _legal(uint64_t me, uint64_t opp) nogil:
    cdef uint64_t empty = ~(me | opp)
    cdef uint64_t moves = 0, run
    cdef int d, k
    for d in range(8):
        run = _shift(me, SHIFTS[d], MASKS[d]) & opp
        for k in range(5):
            run |= _shift(run, SHIFTS[d], MASKS[d]) & opp
        moves |= _shift(run, SHIFTS[d], MASKS[d]) & empty
    return moves


cdef inline int _popcount(uint64_t bb) nogil:
    return __builtin_popcountll(bb)


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


def legal_mask(uint64_t me, uint64_t opp):
    return _legal(me, opp)


def flip_mask(uint64_t me, uint64_t opp, int sq):
    cdef uint64_t move = (<uint64_t>1) << sq
    cdef uint64_t flips = 0, run, cur
    cdef int d
    for d in range(8):
        run = 0
        cur = _shift(move, SHIFTS[d], MASKS[d])
        while cur & opp:
            run |= cur
            cur = _shift(cur, SHIFTS[d], MASKS[d])
        if cur & me:
            flips |= run
    return flips


def popcount(uint64_t bb):
    return _popcount(bb)


cdef class StaticEvaluator:
    cdef int64_t w[64]
    cdef readonly int64_t mobility_weight, disc_weight, late_empties
    cdef readonly tuple weights

    def __init__(self, weights, mobility_weight, disc_weight, late_empties):
        if len(weights) != 64:
            raise ValueError("weight table must have 64 entries")
        self.weights = tuple(int(x) for x in weights)
        for i in range(64):
            self.w[i] = self.weights[i]
        self.mobility_weight = mobility_weight
        self.disc_weight = disc_weight
        self.late_empties = late_empties

    def black(self, uint64_t black, uint64_t white):
        cdef int64_t score = 0
        cdef uint64_t bb = black
        cdef int nb, nw, empties
        while bb:
            score += self.w[__builtin_ctzll(bb)]
            bb &= bb - 1
        bb = white
        while bb:
            score -= self.w[__builtin_ctzll(bb)]
            bb &= bb - 1
        score += self.mobility_weight * (_popcount(_legal(black, white))
                                         - _popcount(_legal(white, black)))
        nb = _popcount(black)
        nw = _popcount(white)
        empties = 64 - nb - nw
        if empties <= self.late_empties:
            score += self.disc_weight * (self.late_empties - empties + 1) * (nb - nw)
        return score


# ---------------------------------------------------------------------------

cdef double SQRT2 = sqrt(2.0)
cdef double INV_SQRT2PI = 1.0 / sqrt(2.0 * 3.141592653589793)
cdef double GL_X[7]
cdef double GL_W[7]
GL_X[:] = [-0.9491079123427585, -0.7415311855993945, -0.4058451513773972, 0.0,
           0.4058451513773972, 0.7415311855993945, 0.9491079123427585]
GL_W[:] = [0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
           0.4179591836734694, 0.3818300505051189, 0.2797053914892766,
           0.1294849661688697]


cdef inline double _upper_tail(double z) nogil:
    return 0.5 * erfc(z / SQRT2)


cdef inline double _phi(double z) nogil:
    return INV_SQRT2PI * exp(-0.5 * z * z)


cdef struct Problem:
    int kind
    int t
    int s
    double mu
    double sigma
    double anchor
    double *stages
    int nstage
    int exact
    int crit
    double lo
    double hi
    double threshold


cdef class BackupKernel:
    cdef double[:, ::1] _values
    cdef double[:, ::1] _slopes
    cdef double[::1] _sat
    cdef readonly double z0, z1, step
    cdef readonly int npts, lmax

    def __init__(self, z0, step, values, slopes, saturation):
        self._values = np.ascontiguousarray(values, dtype=np.float64)
        self._slopes = np.ascontiguousarray(slopes, dtype=np.float64)
        self._sat = np.ascontiguousarray(saturation, dtype=np.float64)
        self.z0 = z0
        self.step = step
        self.npts = self._values.shape[1]
        self.lmax = self._values.shape[0] - 1
        self.z1 = self.z0 + self.step * (self.npts - 1)

    @property
    def saturation(self):
        return list(np.asarray(self._sat))

    cdef double _bmin_std(self, int l, double z) except? -1e300:
        cdef double u, t, t2, t3, h
        cdef int i
        if l == 0:
            return z
        if l > self.lmax:
            raise ValueError(f"successor count {l} exceeds table limit {self.lmax}")
        if z <= self.z0:
            return z
        if z >= self.z1:
            return self._sat[l]
        u = (z - self.z0) / self.step
        i = <int>u
        if i >= self.npts - 1:
            i = self.npts - 2
        t = u - i
        t2 = t * t
        t3 = t2 * t
        h = self.step
        return ((2 * t3 - 3 * t2 + 1) * self._values[l, i]
                + (t3 - 2 * t2 + t) * h * self._slopes[l, i]
                + (-2 * t3 + 3 * t2) * self._values[l, i + 1]
                + (t3 - t2) * h * self._slopes[l, i + 1])

    cdef double _bmin(self, int l, double mu, double sigma, double m) except? -1e300:
        if l == 0:
            return m
        if sigma == 0.0:
            return m if m < mu else mu
        if m == INFINITY:
            if l > self.lmax:
                raise ValueError(f"successor count {l} exceeds table limit {self.lmax}")
            return mu + sigma * self._sat[l]
        if m == -INFINITY:
            return m
        return mu + sigma * self._bmin_std(l, (m - mu) / sigma)

    cdef inline double _stage(self, int kind, int l, double mu, double sigma,
                              double m) except? -1e300:
        if kind == -1:
            return self._bmin(l, mu, sigma, m)
        return -self._bmin(l, -mu, sigma, -m)

    def bmin_std(self, int l, double z):
        return self._bmin_std(l, z)

    def bmin(self, int l, double mu, double sigma, double m):
        return self._bmin(l, mu, sigma, m)

    def bmax(self, int l, double mu, double sigma, double m):
        return -self._bmin(l, -mu, sigma, -m)

    def stage(self, int kind, int l, double mu, double sigma, double m):
        return self._stage(kind, l, mu, sigma, m)

    cdef double _compose(self, double *st, int n, double x) except? -1e300:
        cdef double y = x, bound
        cdef int i, kind
        for i in range(n):
            kind = <int>st[5 * i]
            bound = st[5 * i + 4]
            if kind == -1:
                if bound < y:
                    y = bound
            elif bound > y:
                y = bound
            y = self._stage(kind, <int>st[5 * i + 1], st[5 * i + 2], st[5 * i + 3], y)
        return y

    cdef double _single(self, double *st, double x, int crit, double lo,
                        double hi) except? -1e300:
        cdef double y = x
        if y < lo:
            y = lo
        if y > hi:
            y = hi
        if crit < 0:
            return y
        return self._stage(<int>st[5 * crit], <int>st[5 * crit + 1],
                           st[5 * crit + 2], st[5 * crit + 3], y)

    def compose(self, stages, double x):
        cdef int n = len(stages) // 5
        cdef double *st = _copy(stages)
        try:
            return self._compose(st, n, x)
        finally:
            free(st)

    def compose_single(self, stages, double x, int crit, double lo, double hi):
        cdef double *st = _copy(stages)
        try:
            return self._single(st, x, crit, lo, hi)
        finally:
            free(st)

    cdef double _top(self, Problem *p, double w) except? -1e300:
        cdef double y
        if p.kind == -1:
            y = self._bmin(p.t, p.mu, p.sigma, p.anchor if p.anchor < w else w)
        else:
            y = -self._bmin(p.t, -p.mu, p.sigma, -(p.anchor if p.anchor > w else w))
        if p.exact:
            return self._compose(p.stages, p.nstage, y)
        return self._single(p.stages, y, p.crit, p.lo, p.hi)

    cdef double _integrand(self, Problem *p, double w) except? -1e300:
        cdef double gain = self._top(p, w) - p.threshold
        cdef double z, dens
        if gain <= 0.0:
            return 0.0
        z = (w - p.mu) / p.sigma
        if p.kind == -1:
            dens = p.s * _phi(z) * _upper_tail(z) ** (p.s - 1) / p.sigma
        else:
            dens = p.s * _phi(z) * _upper_tail(-z) ** (p.s - 1) / p.sigma
        return dens * gain

    cdef double _gl(self, Problem *p, double a, double b) except? -1e300:
        cdef double half = 0.5 * (b - a), mid = 0.5 * (a + b), acc = 0.0
        cdef int i
        for i in range(7):
            acc += GL_W[i] * self._integrand(p, mid + half * GL_X[i])
        return acc * half

    cdef double _adaptive(self, Problem *p, double a, double b, double whole,
                          double tol, int depth) except? -1e300:
        cdef double mid = 0.5 * (a + b)
        cdef double left = self._gl(p, a, mid)
        cdef double right = self._gl(p, mid, b)
        if depth >= 24 or fabs(left + right - whole) <= tol:
            return left + right
        return (self._adaptive(p, a, mid, left, 0.5 * tol, depth + 1)
                + self._adaptive(p, mid, b, right, 0.5 * tol, depth + 1))

    def benefit(self, int kind, int l, int s, double mu, double sigma,
                double anchor, stages, double threshold, int crit=-2,
                double lo=-INFINITY, double hi=INFINITY, double tol=1e-7):
        cdef Problem p
        cdef double wlo, whi, mass = 0.0, total = 0.0, za, edge, a, b, c, width
        p.kind = kind
        p.t = l - s
        p.s = s
        p.mu = mu
        p.sigma = sigma
        p.anchor = anchor
        p.nstage = len(stages) // 5
        p.exact = crit == -2
        p.crit = crit
        p.lo = lo
        p.hi = hi
        p.threshold = threshold
        p.stages = _copy(stages)
        try:
            if sigma == 0.0:
                edge = self._top(&p, mu) - threshold
                return edge if edge > 0.0 else 0.0
            wlo = mu - 8.0 * sigma
            whi = mu + 8.0 * sigma
            if kind == -1:
                if anchor < INFINITY:
                    za = (anchor - mu) / sigma
                    mass = _upper_tail(za) ** s
                    if anchor < whi:
                        whi = anchor
            else:
                if anchor > -INFINITY:
                    za = (anchor - mu) / sigma
                    mass = _upper_tail(-za) ** s
                    if anchor > wlo:
                        wlo = anchor
            if self._top(&p, INFINITY) <= threshold:
                return 0.0
            if mass > 0.0:
                edge = self._top(&p, anchor)
                if edge > threshold:
                    total += mass * (edge - threshold)
            if whi <= wlo:
                return total
            if self._top(&p, whi) <= threshold:
                return total
            if self._top(&p, wlo) <= threshold:
                a = wlo
                b = whi
                width = 1e-10 * sigma
                while b - a > width:
                    c = 0.5 * (a + b)
                    if self._top(&p, c) > threshold:
                        b = c
                    else:
                        a = c
                wlo = a
            return total + self._adaptive(&p, wlo, whi, self._gl(&p, wlo, whi), tol, 0)
        finally:
            free(p.stages)


cdef double *_copy(stages) except NULL:
    cdef int n = len(stages)
    cdef double *st = <double *>malloc((n + 1) * sizeof(double))
    cdef int i
    if st == NULL:
        raise MemoryError()
    for i in range(n):
        st[i] = stages[i]
    return st
