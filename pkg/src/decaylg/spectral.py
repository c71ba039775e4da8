"""Reservoir coupling profiles.

A :class:`SpectralDensity` is the squared coupling ``|V(k)|^2`` of the local
state to reservoir mode ``k``; a :class:`RealSpacePotential` is the
real-space coupling ``Vbar(x)``.  Fourier convention: ``V(k) = int dx
exp(ikx) Vbar(x)`` and every k-integral carries ``dk/2pi`` unless noted.
Everything is dimensionless.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import GridDomainError, ParameterDomainError
from .quad import DEFAULT_TOL, integrate_halfline

LORENTZIAN = "lorentzian"
TABULATED = "tabulated"


@dataclass(frozen=True)
class SpectralDensity:
    """``|V(k)|^2``, either ``alpha q^(2m-1) / ((k-k0)^2 + q^2)^m`` or a table.

    The Lorentzian peak value is ``alpha/q`` for every ``m``.  Tables are
    linearly interpolated and vanish outside the sampled range.
    """

    family: str = LORENTZIAN
    alpha: float = 0.0
    q: float = 1.0
    k0: float = 0.0
    m: int = 1
    samples: Optional[tuple[tuple[float, float], ...]] = None

    def __post_init__(self):
        if self.family == LORENTZIAN:
            if not self.alpha >= 0:
                raise ParameterDomainError(f"alpha must be >= 0, got {self.alpha}")
            if not self.q > 0:
                raise ParameterDomainError(f"q must be > 0, got {self.q}")
            if int(self.m) != self.m or self.m < 1:
                raise ParameterDomainError(f"m must be a positive integer, got {self.m}")
            if not math.isfinite(self.k0):
                raise ParameterDomainError("k0 must be finite")
        elif self.family == TABULATED:
            if not self.samples or len(self.samples) < 2:
                raise ParameterDomainError("tabulated density needs at least two samples")
            ks = np.array([s[0] for s in self.samples], dtype=float)
            vs = np.array([s[1] for s in self.samples], dtype=float)
            if np.any(np.diff(ks) <= 0):
                raise ParameterDomainError("tabulated k samples must be strictly increasing")
            if np.any(vs < 0) or not np.all(np.isfinite(vs)):
                raise ParameterDomainError("tabulated values must be finite and nonnegative")
        else:
            raise ParameterDomainError(f"unknown spectral family {self.family!r}")

    @classmethod
    def lorentzian(cls, alpha: float, q: float, k0: float = 0.0, m: int = 1) -> "SpectralDensity":
        return cls(LORENTZIAN, float(alpha), float(q), float(k0), int(m))

    @classmethod
    def tabulated(cls, k: Sequence[float], values: Sequence[float]) -> "SpectralDensity":
        return cls(TABULATED, samples=tuple((float(a), float(b)) for a, b in zip(k, values)))

    @classmethod
    def from_csv(cls, path) -> "SpectralDensity":
        """Read a two-column ``k,value`` table; a header row is optional."""
        ks, vs = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            for i, row in enumerate(csv.reader(fh)):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    k, v = float(row[0]), float(row[1])
                except (ValueError, IndexError):
                    if i == 0:
                        continue
                    raise ParameterDomainError(f"{path}: cannot parse row {i + 1}: {row}")
                ks.append(k)
                vs.append(v)
        return cls.tabulated(ks, vs)

    @property
    def is_lorentzian(self) -> bool:
        return self.family == LORENTZIAN

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        if self.family == LORENTZIAN:
            q2 = self.q**2
            out = (self.alpha / self.q) * (q2 / ((k - self.k0) ** 2 + q2)) ** self.m
        else:
            ks, vs = self._table()
            out = np.interp(k, ks, vs, left=0.0, right=0.0)
        return out if out.ndim else float(out)

    def _table(self):
        ks = np.array([s[0] for s in self.samples], dtype=float)
        vs = np.array([s[1] for s in self.samples], dtype=float)
        return ks, vs

    @property
    def at_zero(self) -> float:
        """``|V(0)|^2``."""
        return float(self(0.0))

    @property
    def scale(self) -> float:
        """Momentum scale on which the density varies."""
        if self.family == LORENTZIAN:
            return self.q
        ks, _ = self._table()
        return float(np.min(np.diff(ks)))

    @property
    def center(self) -> float:
        if self.family == LORENTZIAN:
            return self.k0
        ks, vs = self._table()
        return float(ks[np.argmax(vs)])

    def even_curvature(self) -> float:
        """Second derivative at 0 of ``|V(k)|^2 + |V(-k)|^2``."""
        if self.family == LORENTZIAN:
            a, q, k0, m = self.alpha, self.q, self.k0, self.m
            u = k0**2 + q**2
            pref = a * q ** (2 * m - 1)
            f2 = pref * (-2 * m * u ** (-m - 1) + 4 * m * (m + 1) * k0**2 * u ** (-m - 2))
            return 2.0 * f2
        h = 1e-3 * self.scale
        return float((2 * self(h) + 2 * self(-h) - 4 * self(0.0)) / h**2)

    def total_weight(self) -> float:
        """``int dk |V(k)|^2``."""
        if self.family == LORENTZIAN:
            return self.alpha * math.pi * _lorentz_norm(self.m)
        ks, vs = self._table()
        return float(np.trapezoid(vs, ks))


def _lorentz_norm(m: int) -> float:
    # int du q^(2m-1) / (u^2+q^2)^m = pi * (2m-2)! / (4^(m-1) ((m-1)!)^2)
    return math.comb(2 * m - 2, m - 1) / 4 ** (m - 1)


def eval_spectral(sd: SpectralDensity, k):
    return sd(k)


@dataclass(frozen=True)
class FourierKernel:
    tau: float
    value: complex


def _phi1(z):
    """(e^z - 1)/z, safe near 0."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 0.5
    zs = z[small]
    acc = np.zeros_like(zs)
    term = np.ones_like(zs)
    for n in range(1, 25):
        acc += term
        term = term * zs / (n + 1)
    out[small] = acc
    zb = z[~small]
    out[~small] = np.expm1(zb) / zb
    return out


def _phi2(z):
    """((z-1) e^z + 1)/z^2 = int_0^1 v e^(zv) dv, safe near 0."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 0.5
    zs = z[small]
    acc = np.zeros_like(zs)
    fact = 1.0
    power = np.ones_like(zs)
    for n in range(0, 25):
        if n:
            fact *= n
        acc += power / (fact * (n + 2))
        power = power * zs
    out[small] = acc
    zb = z[~small]
    out[~small] = ((zb - 1) * np.exp(zb) + 1) / zb**2
    return out


def _tabulated_kernel(sd: SpectralDensity, tau: float) -> complex:
    ks, vs = sd._table()
    h = np.diff(ks)
    z = 1j * tau * h
    seg = np.exp(1j * tau * ks[:-1]) * h * (vs[:-1] * _phi1(z) + (vs[1:] - vs[:-1]) * _phi2(z))
    return complex(np.sum(seg))


def kernel(sd: SpectralDensity, tau: float, tol: float = DEFAULT_TOL) -> complex:
    """``K(tau) = int dp |V(p)|^2 exp(i p tau)`` for ``tau >= 0``."""
    if tau < 0:
        raise ParameterDomainError("kernel is defined for tau >= 0")
    if sd.family == TABULATED:
        return _tabulated_kernel(sd, float(tau))
    a, q, k0, m = sd.alpha, sd.q, sd.k0, sd.m
    if a == 0:
        return 0j
    phase = complex(math.cos(k0 * tau), math.sin(k0 * tau))
    if m == 1:
        return math.pi * a * math.exp(-q * tau) * phase
    # the density is even about k0: K = 2 e^{i k0 tau} int_0^inf f(k0+u) cos(u tau) du
    def f(u):
        return (a / q) * (q * q / (u * u + q * q)) ** m

    if tau == 0:
        res = integrate_halfline(f, 0.0, tol / 2)
    else:
        res = integrate_halfline(f, 0.0, tol / 2, weight="cos", omega=tau, scale=q)
    return 2.0 * res.value * phase


def kernel_samples(sd: SpectralDensity, taus: Sequence[float], tol: float = DEFAULT_TOL) -> list[FourierKernel]:
    return [FourierKernel(float(t), kernel(sd, t, tol)) for t in taus]


BOX = "box"
EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class RealSpacePotential:
    """Short-range complex coupling ``Vbar(x)``.

    ``box``: ``c`` on ``0 < x < w``; ``exponential``: ``c exp(-range_q |x|)``;
    ``tabulated``: linear interpolation of complex samples, zero outside.
    """

    profile: str
    c: complex = 1.0
    w: float = 1.0
    range_q: float = 1.0
    samples: Optional[tuple[tuple[float, complex], ...]] = None

    def __post_init__(self):
        if self.profile == BOX:
            if not self.w > 0:
                raise ParameterDomainError("box width must be positive")
        elif self.profile == EXPONENTIAL:
            if not self.range_q > 0:
                raise ParameterDomainError("exponential range q must be positive")
        elif self.profile == TABULATED:
            if not self.samples or len(self.samples) < 2:
                raise ParameterDomainError("tabulated potential needs at least two samples")
            xs = np.array([s[0] for s in self.samples], dtype=float)
            if np.any(np.diff(xs) <= 0):
                raise ParameterDomainError("tabulated x samples must be strictly increasing")
        else:
            raise ParameterDomainError(f"unknown potential profile {self.profile!r}")

    @classmethod
    def box(cls, c: complex, w: float) -> "RealSpacePotential":
        return cls(BOX, c=complex(c), w=float(w))

    @classmethod
    def exponential(cls, c: complex, q: float) -> "RealSpacePotential":
        return cls(EXPONENTIAL, c=complex(c), range_q=float(q))

    @classmethod
    def tabulated(cls, x: Sequence[float], values: Sequence[complex]) -> "RealSpacePotential":
        return cls(TABULATED, samples=tuple((float(a), complex(b)) for a, b in zip(x, values)))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.profile == BOX:
            out = np.where((x > 0) & (x < self.w), self.c, 0j)
        elif self.profile == EXPONENTIAL:
            out = self.c * np.exp(-self.range_q * np.abs(x))
        else:
            xs = np.array([s[0] for s in self.samples])
            vs = np.array([s[1] for s in self.samples])
            out = np.interp(x, xs, vs.real, left=0, right=0) + 1j * np.interp(x, xs, vs.imag, left=0, right=0)
        out = np.asarray(out, dtype=complex)
        return out if out.ndim else complex(out)

    def support(self, cutoff: float = 1e-14) -> tuple[float, float]:
        """Interval outside which ``|Vbar| <= cutoff * max|Vbar|``."""
        if self.profile == BOX:
            return 0.0, self.w
        if self.profile == EXPONENTIAL:
            r = -math.log(cutoff) / self.range_q
            return -r, r
        xs = [s[0] for s in self.samples]
        return xs[0], xs[-1]

    def breakpoints(self) -> tuple[float, ...]:
        if self.profile == BOX:
            return (0.0, self.w)
        if self.profile == EXPONENTIAL:
            return (0.0,)
        return tuple(s[0] for s in self.samples)


def eval_real_potential(rp: RealSpacePotential, x):
    return rp(x)


def check_grid_covers(rp: RealSpacePotential, grid: np.ndarray) -> None:
    lo, hi = rp.support()
    if grid[0] > lo or grid[-1] < hi:
        raise GridDomainError(
            f"grid [{grid[0]}, {grid[-1]}] does not cover the potential support [{lo}, {hi}]"
        )
