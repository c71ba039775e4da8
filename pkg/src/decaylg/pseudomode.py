"""Exact solution of the Lorentzian (m=1, k0=0) reservoir through a single
pseudomode.

The reservoir is replaced by an auxiliary level with complex energy ``-iq``
coupled to the local state with strength ``alpha_tilde``.  Measuring the local
projector at strength ``lam`` adds ``-lam [A, [A, rho]]`` to the non-Hermitian
evolution.  The antisymmetric part of the 2x2 density matrix decouples, which
leaves three real coordinates

    X = rho_00,   Y = i sqrt(2) rho_01,   Z = rho_11

evolving under a 3x3 generator ``L``.  With ``L' = L + q`` its spectrum is
``r`` and ``-(lam+r)/2 +- Delta``, where ``r`` is the real root in ``[0, q]``
of ``4 alpha_tilde^2 r = (lam + r)(q^2 - r^2)``.  ``exp(L t)`` is assembled from
three scalar functions by Cayley-Hamilton.

``alpha_tilde**2 = c_conv * alpha``.  ``c_conv`` defaults to pi, which is the
relation the source formulas quote; with ``V(k) = int dx exp(ikx) Vbar(x)`` and
``dk/2pi`` measures the memory kernel of the pseudomode matches the reservoir
only for ``c_conv = 1/2`` (:data:`FOURIER_CONVENTION`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketingError, DegenerateStateError, ParameterDomainError

PRINTED_CONVENTION = math.pi
FOURIER_CONVENTION = 0.5

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class PseudomodeParams:
    alpha_tilde: float
    q: float
    lam: float = 0.0
    c_conv: float = PRINTED_CONVENTION

    def __post_init__(self):
        if not self.alpha_tilde >= 0:
            raise ParameterDomainError(f"alpha_tilde must be >= 0, got {self.alpha_tilde}")
        if not self.q > 0:
            raise ParameterDomainError(f"q must be > 0, got {self.q}")
        if not self.lam >= 0:
            raise ParameterDomainError(f"measurement strength must be >= 0, got {self.lam}")
        if not self.c_conv > 0:
            raise ParameterDomainError("c_conv must be positive")

    @classmethod
    def from_alpha(cls, alpha: float, q: float, lam: float = 0.0,
                   c_conv: float = PRINTED_CONVENTION) -> "PseudomodeParams":
        if not alpha >= 0:
            raise ParameterDomainError(f"alpha must be >= 0, got {alpha}")
        return cls(math.sqrt(c_conv * alpha), float(q), float(lam), float(c_conv))

    @classmethod
    def from_coupling(cls, coupling: float, q: float, lam: float = 0.0,
                      c_conv: float = PRINTED_CONVENTION) -> "PseudomodeParams":
        """Build from the dimensionless ratio ``4 alpha_tilde^2 / q^2``."""
        if not coupling >= 0:
            raise ParameterDomainError(f"coupling must be >= 0, got {coupling}")
        return cls(q * math.sqrt(coupling) / 2, float(q), float(lam), float(c_conv))

    @property
    def alpha(self) -> float:
        return self.alpha_tilde**2 / self.c_conv

    @property
    def coupling(self) -> float:
        return 4 * self.alpha_tilde**2 / self.q**2


@dataclass(frozen=True)
class ReducedState:
    X: float
    Y: float
    Z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.Z])


@dataclass(frozen=True)
class ReducedLiouvillian:
    matrix: np.ndarray
    r: float
    eigenvalues: tuple[complex, complex, complex]


@dataclass(frozen=True)
class PropagatorCoefficients:
    a: float
    b: float
    c: float
    delta: complex
    t: float


def liouvillian_matrix(params: PseudomodeParams) -> np.ndarray:
    g = SQRT2 * params.alpha_tilde
    lam, q = params.lam, params.q
    return np.array([
        [0.0, g, 0.0],
        [-g, -lam - q, g],
        [0.0, -g, -2 * q],
    ])


def eig_residual(params: PseudomodeParams, L: complex) -> complex:
    """Characteristic polynomial of ``L'``: ``-4 at^2 L - (L^2 - q^2)(L + lam)``."""
    a2 = 4 * params.alpha_tilde**2
    return -a2 * L - (L * L - params.q**2) * (L + params.lam)


def solve_r(params: PseudomodeParams) -> float:
    """Real root ``r`` in ``[0, q]`` of the cubic for the slowest mode.

    For ``lam = 0`` the cubic factorises to ``L (L^2 - q^2 + 4 at^2)`` and the
    root is ``sqrt(q^2 - 4 at^2)``, or 0 once the coupling exceeds ``q^2/4``.
    Otherwise ``h(r) = (lam + r)(q^2 - r^2) - 4 at^2 r`` is concave on
    ``[0, q]`` with ``h(0) > 0 >= h(q)``: bisection to machine precision, then a
    Newton polish kept inside the bracket.
    """
    q, lam = params.q, params.lam
    a2 = 4 * params.alpha_tilde**2
    if lam == 0:
        return math.sqrt(max(q * q - a2, 0.0))
    if a2 == 0:
        return q

    def h(r):
        return (lam + r) * (q * q - r * r) - a2 * r

    lo, hi = 0.0, q
    h_lo, h_hi = h(lo), h(hi)
    # h(0) = lam q^2 may underflow to 0 for subnormal lam; bisection still converges
    if not (h_lo >= 0 and h_hi <= 0):
        raise BracketingError(f"no sign change of the root equation on (0, {q}]: h(0)={h_lo}, h(q)={h_hi}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
    r = 0.5 * (lo + hi)
    dh = q * q - lam * 2 * r - 3 * r * r - a2
    if dh != 0:
        step = h(r) / dh
        if lo <= r - step <= hi and abs(h(r - step)) < abs(h(r)):
            r -= step
    return r


def _delta_squared(params: PseudomodeParams, r: float) -> float:
    # Delta^2 = s^2 - lam q^2 / r.  For small r the product is rewritten from
    # the cubic so that r = 0 (lam = 0, strong coupling) stays finite; the
    # direct form is exact at lam = 0 and keeps Re(-s +- Delta) <= 0.
    s = 0.5 * (params.lam + r)
    if r > 1e-3 * params.q:
        p = params.lam * params.q**2 / r
    else:
        p = 4 * params.alpha_tilde**2 - params.q**2 + r * (params.lam + r)
    return s * s - p


def build_liouvillian(params: PseudomodeParams) -> ReducedLiouvillian:
    r = solve_r(params)
    s = 0.5 * (params.lam + r)
    delta = np.sqrt(complex(_delta_squared(params, r)))
    eig = (complex(r), complex(-s + delta), complex(-s - delta))
    return ReducedLiouvillian(liouvillian_matrix(params), r, eig)


def stationary_state(params: PseudomodeParams, r: float | None = None) -> ReducedState:
    """Eigenvector of ``L`` for eigenvalue ``r - q``, normalised to ``X = 1``."""
    if r is None:
        r = solve_r(params)
    q = params.q
    if q - r <= 1e-12 * q or params.alpha_tilde == 0:
        raise DegenerateStateError(
            f"r={r!r} coincides with q={q!r}: the local state is decoupled and the decaying state is undefined"
        )
    return ReducedState(1.0, -(q - r) / (SQRT2 * params.alpha_tilde), (q - r) / (q + r))


def sinc(z: complex) -> complex:
    """``sin(z)/z`` with ``sinc(0) = 1``, for complex ``z``."""
    if abs(z) < 1e-4:
        z2 = z * z
        return 1 - z2 / 6 + z2 * z2 / 120
    return np.sin(z) / z


def sinhc(z: complex) -> complex:
    """``sinh(z)/z = sinc(iz)``."""
    return sinc(1j * z)


def _exp_divdiff2(x0: complex, x1: complex, x2: complex, t: float) -> complex:
    """Second divided difference of ``x -> exp(x t)`` at three points.

    Nearby or coincident points go through the series
    ``exp(m t) sum_n t^(n+2) h_n(y) / (n+2)!`` about their mean ``m``, where
    ``h_n`` are complete homogeneous symmetric polynomials of the offsets.
    """
    xs = (x0, x1, x2)
    spread = max(abs(xs[i] - xs[j]) for i in range(3) for j in range(i + 1, 3)) * t
    if spread < 1.0:
        m = (x0 + x1 + x2) / 3
        y = [(x - m) * t for x in xs]
        # h_n(y) built one variable at a time
        nmax = 40
        h = [y[0] ** n for n in range(nmax)]
        for yk in y[1:]:
            for n in range(1, nmax):
                h[n] = h[n] + yk * h[n - 1]
        total = 0j
        fact = 2.0
        for n in range(nmax):
            total += h[n] / fact
            fact *= n + 3
        return np.exp(m * t) * t * t * total

    def dd1(u, v):
        z = (u - v) * t
        if abs(z) < 1e-3:
            phi = 1 + z / 2 + z * z / 6 + z**3 / 24 + z**4 / 120
        else:
            phi = np.expm1(z) / z
        return np.exp(v * t) * t * phi

    pairs = [(0, 2, 1), (0, 1, 2), (1, 2, 0)]
    i, j, k = max(pairs, key=lambda p: abs(xs[p[0]] - xs[p[1]]))
    a, c, b = xs[i], xs[j], xs[k]
    return (dd1(a, b) - dd1(b, c)) / (a - c)


def propagator_coefficients(params: PseudomodeParams, t: float, r: float | None = None,
                            shift: float = 0.0) -> PropagatorCoefficients:
    """Scalars of ``exp((L - shift) t) = (a + b s + c s^2) 1 + (b + 2 s c) L' + c L'^2``.

    ``s = (lam + r)/2``.  ``c`` is the second divided difference of ``exp`` over
    the spectrum of ``L - shift``; ``b = exp(-(q+s+shift) t) t sinh(Delta t)/(Delta t)``
    and ``a = exp(-(q+s+shift) t) cosh(Delta t) - c Delta^2``.  All three are even in
    ``Delta`` and therefore real also when ``Delta`` is imaginary.
    """
    if t < 0:
        raise ParameterDomainError("propagator is defined for t >= 0")
    if r is None:
        r = solve_r(params)
    q = params.q
    s = 0.5 * (params.lam + r)
    d2 = _delta_squared(params, r)
    delta = np.sqrt(complex(d2))
    centre = -q - s - shift
    lp, lm = centre + delta, centre - delta
    if abs(delta * t) < 1.0:
        decay = np.exp(centre * t)
        b = decay * t * sinhc(delta * t)
        ch = decay * np.cosh(delta * t)
    else:
        b = (np.exp(lp * t) - np.exp(lm * t)) / (2 * delta)
        ch = 0.5 * (np.exp(lp * t) + np.exp(lm * t))
    c = _exp_divdiff2(complex(r - q - shift), lp, lm, t)
    a = ch - c * d2
    return PropagatorCoefficients(float(np.real(a)), float(np.real(b)), float(np.real(c)), complex(delta), float(t))


def propagator(params: PseudomodeParams, t: float, r: float | None = None, shift: float = 0.0) -> np.ndarray:
    """``exp(L t)`` (times ``exp(-shift t)``) as a 3x3 real matrix."""
    if r is None:
        r = solve_r(params)
    co = propagator_coefficients(params, t, r, shift)
    s = 0.5 * (params.lam + r)
    lp = liouvillian_matrix(params) + params.q * np.eye(3)
    return (co.a + co.b * s + co.c * s * s) * np.eye(3) + (co.b + 2 * s * co.c) * lp + co.c * (lp @ lp)


def lambda0_propagator(params: PseudomodeParams, t: float) -> np.ndarray:
    """Noninvasive-limit propagator; same construction as :func:`propagator`."""
    if params.lam != 0:
        raise ParameterDomainError("lambda0_propagator requires lam == 0")
    return propagator(params, t)


def measure(state: np.ndarray) -> np.ndarray:
    """Anticommutator with the local projector, ``{A, rho}/2``, in (X, Y, Z)."""
    X, Y, _ = state
    return np.array([X, Y / 2, 0.0])


def conditional_avg(params: PseudomodeParams, t: float, r: float | None = None) -> float:
    """``<a(t) a(0)>_Q / <a(t)>_Q`` in the decaying state.

    The mean decays as ``exp((r - q) t)``, so the ratio is the X component of
    ``exp((L - (r - q)) t)`` applied to the measured stationary state.
    """
    if r is None:
        r = solve_r(params)
    v = stationary_state(params, r).as_array()
    u = propagator(params, t, r, shift=r - params.q)
    return float((u @ measure(v))[0] / v[0])


def conditional_curve(params: PseudomodeParams, times) -> np.ndarray:
    r = solve_r(params)
    return np.array([conditional_avg(params, float(t), r) for t in times])


def evolve(params: PseudomodeParams, state, t: float) -> np.ndarray:
    return propagator(params, t) @ np.asarray(state, dtype=float)
