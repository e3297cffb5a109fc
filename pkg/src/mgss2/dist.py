"""Order-statistic distributions over normal successor models and the b< / b> backups.

A node whose unexamined successors are modelled as ``l`` i.i.d. draws from
``q = N(mean, std)`` backs up the expectation of the truncated minimum
(``backup_min``) or maximum (``backup_max``) instead of a plain min/max.
Everything is computed in standardized units and mapped back affinely, so a
single ``BackupTable`` over N(0, 1) serves every node.
"""
from __future__ import annotations

import functools
import hashlib
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import integrate, special

from . import kernels

SATURATION_TOL = 1e-9
INVERSE_TOL = 1e-6
TABLE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class NormalParams:
    """Successor-value distribution q. ``std == 0`` marks an exact value."""

    mean: float
    std: float

    def __post_init__(self):
        if not self.std >= 0.0 or not math.isfinite(self.std):
            raise ValueError(f"std must be finite and >= 0, got {self.std}")
        if not math.isfinite(self.mean):
            raise ValueError(f"mean must be finite, got {self.mean}")

    @property
    def exact(self) -> bool:
        return self.std == 0.0

    def cdf(self, x: float) -> float:
        if self.exact:
            return 1.0 if x >= self.mean else 0.0
        return float(special.ndtr((x - self.mean) / self.std))

    def sf(self, x: float) -> float:
        """1 - cdf, without cancellation in the upper tail."""
        if self.exact:
            return 0.0 if x >= self.mean else 1.0
        return float(special.ndtr((self.mean - x) / self.std))

    def pdf(self, x: float) -> float:
        if self.exact:
            raise ValueError("a point mass has no density")
        z = (x - self.mean) / self.std
        return math.exp(-0.5 * z * z) / (self.std * math.sqrt(2.0 * math.pi))

    def reflected(self) -> "NormalParams":
        return NormalParams(-self.mean, self.std)


STANDARD = NormalParams(0.0, 1.0)


@dataclass(frozen=True)
class MinStatModel:
    """Minimum of ``remaining`` i.i.d. draws from ``base``."""

    base: NormalParams
    remaining: int

    def __post_init__(self):
        if self.remaining < 0:
            raise ValueError("remaining must be >= 0")

    def cdf(self, x: float) -> float:
        return cdf_min(self, x)

    def pdf(self, x: float) -> float:
        return pdf_min(self, x)

    def mean(self) -> float:
        return expected_min(self.remaining, self.base)


@dataclass(frozen=True)
class TruncatedMinModel:
    """Overall minimum once evaluated successors already reach ``truncation``.

    Continuous density ``pdf_min`` below the truncation point plus a point mass
    of ``1 - cdf_min(truncation)`` at it.
    """

    model: MinStatModel
    truncation: float

    def point_mass(self) -> float:
        if self.model.remaining == 0:
            return 1.0
        return 1.0 - cdf_min(self.model, self.truncation)

    def density(self, x: float) -> float:
        if x >= self.truncation or self.model.remaining == 0:
            return 0.0
        return pdf_min(self.model, x)

    def mean(self) -> float:
        return backup_min(self.model.remaining, self.model.base, self.truncation)


# ---------------------------------------------------------------------------
# distributions

def cdf_min(model: MinStatModel, x: float) -> float:
    """P(min of ``remaining`` draws <= x) = 1 - (1 - Q(x))^l."""
    l = model.remaining
    if l == 0:
        return 0.0
    survive = model.base.sf(x)
    if survive <= 0.0:
        return 1.0
    return -math.expm1(l * math.log(survive))


def pdf_min(model: MinStatModel, x: float) -> float:
    """l q(x) (1 - Q(x))^(l-1)."""
    l = model.remaining
    if l == 0:
        raise ValueError("no density for the minimum of zero draws")
    return l * model.base.pdf(x) * model.base.sf(x) ** (l - 1)


def cdf_max(remaining: int, q: NormalParams, x: float) -> float:
    """P(max of ``remaining`` draws <= x) = Q(x)^l."""
    if remaining == 0:
        return 1.0
    return q.cdf(x) ** remaining


def pdf_max(remaining: int, q: NormalParams, x: float) -> float:
    if remaining == 0:
        raise ValueError("no density for the maximum of zero draws")
    return remaining * q.pdf(x) * q.cdf(x) ** (remaining - 1)


@functools.lru_cache(maxsize=None)
def min_stat_moments(remaining: int) -> tuple[float, float]:
    """Mean and variance of the minimum of ``remaining`` standard normals."""
    if remaining < 1:
        raise ValueError("remaining must be >= 1")
    l = remaining

    def dens(x):
        return l * math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi) * special.ndtr(-x) ** (l - 1)

    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
    mean = integrate.quad(lambda x: x * dens(x), -12.0, 12.0, **opts)[0]
    second = integrate.quad(lambda x: (x - mean) ** 2 * dens(x), -12.0, 12.0, **opts)[0]
    return mean, second


def expected_min(remaining: int, q: NormalParams) -> float:
    """Mean of the minimum of ``remaining`` draws; the m -> +inf limit of b<."""
    if remaining < 1:
        raise ValueError("expected_min needs at least one draw")
    if q.exact or remaining == 1:
        return q.mean
    return q.mean + q.std * min_stat_moments(remaining)[0]


def expected_max(remaining: int, q: NormalParams) -> float:
    return -expected_min(remaining, q.reflected())


# ---------------------------------------------------------------------------
# backups

def backup_min(remaining: int, q: NormalParams, m: float,
               table: "BackupTable | None" = None) -> float:
    """b<_{l,q}(m): expected overall minimum given the evaluated minimum ``m``."""
    if remaining < 0:
        raise ValueError("remaining must be >= 0")
    if remaining == 0:
        return m
    table = table or default_table()
    if remaining > table.lmax and not q.exact:
        return backup_min_direct(remaining, q, m)
    return table.kernel.bmin(remaining, q.mean, q.std, m)


def backup_max(remaining: int, q: NormalParams, m: float,
               table: "BackupTable | None" = None) -> float:
    """b>_{l,q}(m), the dual of ``backup_min``."""
    return -backup_min(remaining, q.reflected(), -m, table)


def backup_min_direct(remaining: int, q: NormalParams, m: float) -> float:
    """b< by adaptive quadrature of its defining integral (no table)."""
    if remaining == 0:
        return m
    if q.exact:
        return min(m, q.mean)
    if m == math.inf:
        return expected_min(remaining, q)
    if m == -math.inf:
        return m
    l = remaining
    z = (m - q.mean) / q.std

    def part(x):
        return x * l * math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi) * special.ndtr(-x) ** (l - 1)

    lo = min(z, -9.0) - 1.0
    partial = integrate.quad(part, lo, z, epsabs=1e-12, epsrel=1e-12, limit=400)[0] if z > lo else 0.0
    tail_mass = float(special.ndtr(-z)) ** l
    return q.mean + q.std * (partial + z * tail_mass)


def inverse_backup_min(remaining: int, q: NormalParams, v: float,
                       table: "BackupTable | None" = None,
                       tol: float = INVERSE_TOL) -> float:
    """The truncation point m with backup_min(remaining, q, m) == v.

    Raises ValueError when v is at or above the saturation value
    ``expected_min(remaining, q)``, which b< only approaches asymptotically.
    """
    if remaining == 0:
        return v
    if q.exact:
        if v < q.mean:
            return v
        raise ValueError(f"unreachable value {v}: backup saturates at {q.mean}")
    table = table or default_table()
    c = expected_min(remaining, q)
    if v >= c - SATURATION_TOL * max(1.0, q.std):
        raise ValueError(f"unreachable value {v}: backup saturates at {c}")
    zv = (v - q.mean) / q.std
    if zv <= table.zmin:
        return v
    f = (lambda z: table.kernel.bmin_std(remaining, z)) if remaining <= table.lmax else (
        lambda z: (backup_min_direct(remaining, q, q.mean + q.std * z) - q.mean) / q.std)
    # b<(z) <= z, so the root lies at or above zv
    lo, hi = zv, table.zmax
    if f(hi) <= zv:
        return q.mean + q.std * hi
    ztol = tol / q.std
    while hi - lo > ztol:
        mid = 0.5 * (lo + hi)
        if f(mid) < zv:
            lo = mid
        else:
            hi = mid
    return q.mean + q.std * 0.5 * (lo + hi)


def inverse_backup_max(remaining: int, q: NormalParams, v: float,
                       table: "BackupTable | None" = None) -> float:
    return -inverse_backup_min(remaining, q.reflected(), -v, table)


# ---------------------------------------------------------------------------
# the standardized table

class BackupTable:
    """Standardized b<_{l,N(0,1)} on a uniform grid, for l = 1..lmax.

    Grid values come from Gauss-Legendre integration of
    b<(z) = z - int_{-inf}^{z} (1 - (1 - Phi(x))^l) dx cell by cell; the
    interpolant is a cubic Hermite spline on the exact slopes (1 - Phi(z))^l,
    with Fritsch-Carlson limiting so it stays monotone.
    """

    def __init__(self, zmin: float, zmax: float, step: float, values: np.ndarray,
                 slopes: np.ndarray, saturation: np.ndarray):
        self.zmin = float(zmin)
        self.zmax = float(zmax)
        self.step = float(step)
        self.values = np.asarray(values, dtype=np.float64)
        self.slopes = np.asarray(slopes, dtype=np.float64)
        self.saturation = np.asarray(saturation, dtype=np.float64)
        self.lmax = self.values.shape[0] - 1
        self.kernel = kernels.BackupKernel(self.zmin, self.step, self.values,
                                           self.slopes, self.saturation)

    @property
    def grid(self) -> np.ndarray:
        return self.zmin + self.step * np.arange(self.values.shape[1])

    @classmethod
    def build(cls, lmax: int = 64, zmin: float = -8.0, zmax: float = 8.0,
              step: float = 0.01) -> "BackupTable":
        npts = int(round((zmax - zmin) / step)) + 1
        z = zmin + step * np.arange(npts)
        nodes, weights = np.polynomial.legendre.leggauss(8)
        mid = 0.5 * (z[:-1] + z[1:])
        half = 0.5 * step
        x = mid[:, None] + half * nodes[None, :]
        log_sf_x = np.log(special.ndtr(-x))
        log_sf_z = np.log(special.ndtr(-z))
        # tail beyond the grid for the upper saturation value
        tail_x = zmax + 2.0 + 2.0 * nodes  # [zmax, zmax + 4]
        log_sf_tail = np.log(special.ndtr(-tail_x))

        values = np.empty((lmax + 1, npts))
        slopes = np.empty((lmax + 1, npts))
        saturation = np.empty(lmax + 1)
        values[0] = z
        slopes[0] = 1.0
        saturation[0] = np.inf
        phi0 = math.exp(-0.5 * zmin * zmin) / math.sqrt(2 * math.pi)
        below = zmin * special.ndtr(zmin) + phi0  # int_{-inf}^{zmin} Phi
        for l in range(1, lmax + 1):
            cdf = -np.expm1(l * log_sf_x)
            cells = half * (cdf @ weights)
            acc = np.concatenate(([l * below], l * below + np.cumsum(cells)))
            values[l] = z - acc
            slopes[l] = np.exp(l * log_sf_z)
            saturation[l] = values[l, -1] + 2.0 * float(np.exp(l * log_sf_tail) @ weights)
            _limit_slopes(values[l], slopes[l], step)
        return cls(zmin, zmax, step, values, slopes, saturation)

    def bmin_std(self, l: int, z: float) -> float:
        return self.kernel.bmin_std(l, z)

    def evaluate(self, l: int, z) -> np.ndarray:
        """Vectorized interpolation of b<_{l,N(0,1)} (used by the oracles)."""
        z = np.asarray(z, dtype=np.float64)
        if l == 0:
            return z.copy()
        u = np.clip((z - self.zmin) / self.step, 0.0, self.values.shape[1] - 1 - 1e-12)
        i = np.minimum(u.astype(np.int64), self.values.shape[1] - 2)
        t = u - i
        ys, ds, h = self.values[l], self.slopes[l], self.step
        out = ((2 * t**3 - 3 * t**2 + 1) * ys[i] + (t**3 - 2 * t**2 + t) * h * ds[i]
               + (-2 * t**3 + 3 * t**2) * ys[i + 1] + (t**3 - t**2) * h * ds[i + 1])
        out = np.where(z <= self.zmin, z, out)
        return np.where(z >= self.zmax, self.saturation[l], out)

    # -- persistence -------------------------------------------------------
    def header(self) -> dict:
        return {
            "version": TABLE_FORMAT_VERSION,
            "lmax": self.lmax,
            "zmin": self.zmin,
            "zmax": self.zmax,
            "step": self.step,
            "checksum": self.checksum(),
        }

    def checksum(self) -> str:
        h = hashlib.sha256()
        for arr in (self.values, self.slopes, self.saturation):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()

    def save(self, path) -> None:
        path = Path(path)
        with path.open("wb") as fh:
            np.savez(fh, header=np.array(json.dumps(self.header())),
                     values=self.values, slopes=self.slopes,
                     saturation=self.saturation)

    @classmethod
    def load(cls, path, *, lmax=None, zmin=None, zmax=None, step=None) -> "BackupTable":
        """Load a cached table; raises ValueError if stale or corrupted."""
        with np.load(Path(path), allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            table = cls(header["zmin"], header["zmax"], header["step"],
                        data["values"], data["slopes"], data["saturation"])
        if header.get("version") != TABLE_FORMAT_VERSION:
            raise ValueError("table format version mismatch")
        if table.checksum() != header["checksum"]:
            raise ValueError("table checksum mismatch")
        wanted = {"lmax": lmax, "zmin": zmin, "zmax": zmax, "step": step}
        for key, val in wanted.items():
            if val is not None and header[key] != val:
                raise ValueError(f"cached table has {key}={header[key]}, wanted {val}")
        return table


def _limit_slopes(y: np.ndarray, d: np.ndarray, h: float) -> None:
    """Fritsch-Carlson: shrink slopes where the Hermite cubic could overshoot."""
    secant = np.diff(y) / h
    for i in np.nonzero(secant > 0)[0]:
        a = d[i] / secant[i]
        b = d[i + 1] / secant[i]
        r = a * a + b * b
        if r > 9.0:
            tau = 3.0 / math.sqrt(r)
            d[i] = tau * a * secant[i]
            d[i + 1] = tau * b * secant[i]
    d[np.concatenate((secant <= 0, [False]))] = 0.0


def table_for(lmax: int = 64, zmin: float = -8.0, zmax: float = 8.0,
              step: float = 0.01, cache_dir=None) -> BackupTable:
    """Build a table, going through the on-disk cache when ``cache_dir`` is set."""
    if cache_dir is None:
        return BackupTable.build(lmax, zmin, zmax, step)
    path = Path(cache_dir) / f"backup_l{lmax}_z{zmin:g}_{zmax:g}_h{step:g}.npz"
    if path.exists():
        try:
            return BackupTable.load(path, lmax=lmax, zmin=zmin, zmax=zmax, step=step)
        except (ValueError, OSError, KeyError):
            pass
    table = BackupTable.build(lmax, zmin, zmax, step)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.save(path)
    return table


@functools.lru_cache(maxsize=1)
def default_table() -> BackupTable:
    """Process-wide shared table (cached on disk if MGSS2_TABLE_CACHE is set)."""
    return table_for(cache_dir=os.environ.get("MGSS2_TABLE_CACHE"))
