"""Pure-Python versions of the hot kernels.

Every function here has a twin in ``_speedups.pyx`` with the same signature
and the same results (bit-identical for the integer Othello routines, equal
to rounding for the floating-point ones). ``mgss2.kernels`` picks one of the
two at import time.
"""
from __future__ import annotations

import math

FULL = 0xFFFFFFFFFFFFFFFF
NOT_A = 0xFEFEFEFEFEFEFEFE  # clears file a after a shift towards h
NOT_H = 0x7F7F7F7F7F7F7F7F  # clears file h after a shift towards a

# (shift, mask) pairs; positive shift means "<<"
_DIRECTIONS = (
    (1, NOT_A),
    (-1, NOT_H),
    (8, FULL),
    (-8, FULL),
    (9, NOT_A),
    (7, NOT_H),
    (-7, NOT_A),
    (-9, NOT_H),
)


def _shift(bb: int, shift: int, mask: int) -> int:
    if shift > 0:
        return ((bb << shift) & FULL) & mask
    return (bb >> -shift) & mask


def legal_mask(me: int, opp: int) -> int:
    """Bitboard of squares where ``me`` may play against ``opp``."""
    empty = ~(me | opp) & FULL
    moves = 0
    for shift, mask in _DIRECTIONS:
        run = _shift(me, shift, mask) & opp
        for _ in range(5):
            run |= _shift(run, shift, mask) & opp
        moves |= _shift(run, shift, mask) & empty
    return moves


def flip_mask(me: int, opp: int, sq: int) -> int:
    """Discs of ``opp`` flipped when ``me`` plays on ``sq`` (0 if none)."""
    move = 1 << sq
    flips = 0
    for shift, mask in _DIRECTIONS:
        run = 0
        cur = _shift(move, shift, mask)
        while cur & opp:
            run |= cur
            cur = _shift(cur, shift, mask)
        if cur & me:
            flips |= run
    return flips


def popcount(bb: int) -> int:
    return bin(bb).count("1")


class StaticEvaluator:
    """Positional table + mobility + late-game disc differential."""

    def __init__(self, weights, mobility_weight: int, disc_weight: int,
                 late_empties: int):
        if len(weights) != 64:
            raise ValueError("weight table must have 64 entries")
        self.weights = tuple(int(w) for w in weights)
        self.mobility_weight = int(mobility_weight)
        self.disc_weight = int(disc_weight)
        self.late_empties = int(late_empties)

    def black(self, black: int, white: int) -> int:
        """Static value from Black's side, in integer evaluation units."""
        weights = self.weights
        score = 0
        bb = black
        while bb:
            low = bb & -bb
            score += weights[low.bit_length() - 1]
            bb ^= low
        bb = white
        while bb:
            low = bb & -bb
            score -= weights[low.bit_length() - 1]
            bb ^= low
        mob_b = popcount(legal_mask(black, white))
        mob_w = popcount(legal_mask(white, black))
        score += self.mobility_weight * (mob_b - mob_w)
        nb = popcount(black)
        nw = popcount(white)
        empties = 64 - nb - nw
        if empties <= self.late_empties:
            score += self.disc_weight * (self.late_empties - empties + 1) * (nb - nw)
        return score


# ---------------------------------------------------------------------------
# Standardized backup tables and the value-of-computation integral

_SQRT2 = math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)

# 7-point Gauss-Legendre on [-1, 1]
_GL_X = (
    -0.9491079123427585, -0.7415311855993945, -0.4058451513773972, 0.0,
    0.4058451513773972, 0.7415311855993945, 0.9491079123427585,
)
_GL_W = (
    0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
    0.4179591836734694, 0.3818300505051189, 0.2797053914892766,
    0.1294849661688697,
)

MIN_KIND = -1
MAX_KIND = 1


def _upper_tail(z: float) -> float:
    """1 - Phi(z), accurate in the upper tail."""
    return 0.5 * math.erfc(z / _SQRT2)


def _phi(z: float) -> float:
    return _INV_SQRT2PI * math.exp(-0.5 * z * z)


class BackupKernel:
    """Scalar evaluator over a standardized b< table.

    ``values[l][i]`` is b<_{l,N(0,1)}(z0 + i*step) and ``slopes[l][i]`` its
    (limited) derivative. Row 0 is unused: with no unexamined successors the
    backup is the identity.
    """

    def __init__(self, z0, step, values, slopes, saturation):
        self.z0 = float(z0)
        self.step = float(step)
        self.values = [list(map(float, row)) for row in values]
        self.slopes = [list(map(float, row)) for row in slopes]
        self.saturation = [float(c) for c in saturation]
        self.npts = len(self.values[0])
        self.lmax = len(self.values) - 1
        self.z1 = self.z0 + self.step * (self.npts - 1)

    # -- single stages -----------------------------------------------------
    def bmin_std(self, l: int, z: float) -> float:
        if l == 0:
            return z
        if l > self.lmax:
            raise ValueError(f"successor count {l} exceeds table limit {self.lmax}")
        if z <= self.z0:
            return z
        if z >= self.z1:
            return self.saturation[l]
        u = (z - self.z0) / self.step
        i = int(u)
        if i >= self.npts - 1:
            i = self.npts - 2
        t = u - i
        t2 = t * t
        t3 = t2 * t
        ys = self.values[l]
        ds = self.slopes[l]
        h = self.step
        return ((2 * t3 - 3 * t2 + 1) * ys[i] + (t3 - 2 * t2 + t) * h * ds[i]
                + (-2 * t3 + 3 * t2) * ys[i + 1] + (t3 - t2) * h * ds[i + 1])

    def bmin(self, l: int, mu: float, sigma: float, m: float) -> float:
        if l == 0:
            return m
        if sigma == 0.0:
            return m if m < mu else mu
        if m == math.inf:
            if l > self.lmax:
                raise ValueError(f"successor count {l} exceeds table limit {self.lmax}")
            return mu + sigma * self.saturation[l]
        if m == -math.inf:
            return m
        return mu + sigma * self.bmin_std(l, (m - mu) / sigma)

    def bmax(self, l: int, mu: float, sigma: float, m: float) -> float:
        return -self.bmin(l, -mu, sigma, -m)

    def stage(self, kind: int, l: int, mu: float, sigma: float, m: float) -> float:
        if kind == MIN_KIND:
            return self.bmin(l, mu, sigma, m)
        return self.bmax(l, mu, sigma, m)

    # -- propagation ---------------------------------------------------------
    def compose(self, stages, x: float) -> float:
        """Propagate ``x`` up a path.

        ``stages`` is a flat sequence of 5-tuples (kind, l, mu, sigma, bound)
        ordered from the target's parent up to the top-level node.
        """
        y = x
        for i in range(0, len(stages), 5):
            kind = stages[i]
            bound = stages[i + 4]
            if kind == MIN_KIND:
                if bound < y:
                    y = bound
            elif bound > y:
                y = bound
            y = self.stage(kind, stages[i + 1], stages[i + 2], stages[i + 3], y)
        return y

    def compose_single(self, stages, x: float, crit: int, lo: float, hi: float) -> float:
        """Single-stage approximation: clamp, then one b stage."""
        y = x
        if y < lo:
            y = lo
        if y > hi:
            y = hi
        if crit < 0:
            return y
        i = 5 * crit
        return self.stage(stages[i], stages[i + 1], stages[i + 2], stages[i + 3], y)

    # -- value of computation -----------------------------------------------
    def benefit(self, kind: int, l: int, s: int, mu: float, sigma: float,
                anchor: float, stages, threshold: float, crit: int = -2,
                lo: float = -math.inf, hi: float = math.inf,
                tol: float = 1e-7) -> float:
        """Expected gain max(0, F(G(w)) - threshold) of drawing ``s`` successors.

        ``kind`` is the target's kind, ``anchor`` its current extremum (±inf
        when nothing is evaluated yet), ``w`` the extremum of the ``s`` draws
        from N(mu, sigma). ``crit == -2`` selects the exact nested F; any other
        value selects the single-stage approximation around stage ``crit``
        (-1: clamp only).
        """
        t = l - s
        exact = crit == -2

        def top(w):
            if kind == MIN_KIND:
                y = self.bmin(t, mu, sigma, anchor if anchor < w else w)
            else:
                y = self.bmax(t, mu, sigma, anchor if anchor > w else w)
            if exact:
                return self.compose(stages, y)
            return self.compose_single(stages, y, crit, lo, hi)

        if sigma == 0.0:
            gain = top(mu) - threshold
            return gain if gain > 0.0 else 0.0

        wlo = mu - 8.0 * sigma
        whi = mu + 8.0 * sigma
        # continuous region and the point mass where G is flat
        if kind == MIN_KIND:
            if anchor < math.inf:
                za = (anchor - mu) / sigma
                mass = _upper_tail(za) ** s
                if anchor < whi:
                    whi = anchor
            else:
                mass = 0.0
        else:
            if anchor > -math.inf:
                za = (anchor - mu) / sigma
                mass = _upper_tail(-za) ** s
                if anchor > wlo:
                    wlo = anchor
            else:
                mass = 0.0
        # F(G(.)) is nondecreasing, so its supremum sits at w = +inf
        if top(math.inf) <= threshold:
            return 0.0

        total = 0.0
        if mass > 0.0:
            edge = top(anchor)
            if edge > threshold:
                total += mass * (edge - threshold)
        if whi <= wlo:
            return total

        # the integrand is nondecreasing in w; find where it turns positive
        if top(whi) <= threshold:
            return total
        if top(wlo) <= threshold:
            a, b = wlo, whi
            width = 1e-10 * sigma
            while b - a > width:
                c = 0.5 * (a + b)
                if top(c) > threshold:
                    b = c
                else:
                    a = c
            wlo = a

        def integrand(w):
            gain = top(w) - threshold
            if gain <= 0.0:
                return 0.0
            z = (w - mu) / sigma
            if kind == MIN_KIND:
                dens = s * _phi(z) * _upper_tail(z) ** (s - 1) / sigma
            else:
                dens = s * _phi(z) * _upper_tail(-z) ** (s - 1) / sigma
            return dens * gain

        return total + _adaptive_gl(integrand, wlo, whi, _gl(integrand, wlo, whi), tol)


def _gl(f, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    acc = 0.0
    for x, w in zip(_GL_X, _GL_W):
        acc += w * f(mid + half * x)
    return acc * half


def _adaptive_gl(f, a: float, b: float, whole: float, tol: float,
                 depth: int = 0) -> float:
    mid = 0.5 * (a + b)
    left = _gl(f, a, mid)
    right = _gl(f, mid, b)
    if depth >= 24 or abs(left + right - whole) <= tol:
        return left + right
    return (_adaptive_gl(f, a, mid, left, 0.5 * tol, depth + 1)
            + _adaptive_gl(f, mid, b, right, 0.5 * tol, depth + 1))
