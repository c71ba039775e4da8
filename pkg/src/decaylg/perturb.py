"""Lowest-order (in the coupling) results for arbitrary spectral densities.

Conventions: ``V(k) = int dx exp(ikx) Vbar(x)``; k-integrals carry ``dk/2pi``
so that the golden-rule rate is ``R = |V(0)|^2``.

Most integrals here contain ``(|V(0)|^2 - |V(k)|^2)/k^2``.  They are folded
onto ``k >= 0`` through the even combination

    S(k) = (2|V(0)|^2 - |V(k)|^2 - |V(-k)|^2) / (2 pi k^2),

which is regular at ``k = 0`` for smooth densities; the cosine/sine factors are
then handled by Fourier-weighted quadrature.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .curve import COR2, PT0, CorrelationCurve
from .errors import (
    ConvergenceError,
    GridDomainError,
    IllConditionedOverlapError,
    ParameterDomainError,
)
from .quad import (
    integrate_halfline,
    integrate_interval,
    integrate_line,
    integrate_pv,
)
from .spectral import RealSpacePotential, SpectralDensity, check_grid_covers

TOL = 1e-12
REL = 1e-12  # relative floor: O(1) integrands cannot reach TOL absolutely
PATCH = 1e-4  # |k| < PATCH * scale uses the Taylor limit of S(k)


@dataclass(frozen=True)
class DecayRates:
    gamma: complex
    lam: float = 0.0
    epsilon: float = 1e-8
    iterations: int = 0

    @property
    def R(self) -> float:
        return 2.0 * self.gamma.real


def _even_kernel(sd: SpectralDensity):
    """``S(k)`` for ``k >= 0`` with the removable point patched."""
    v0 = sd.at_zero
    kp = PATCH * sd.scale
    s0 = -sd.even_curvature() / (4 * math.pi)

    def S(k):
        if k < kp:
            return s0
        return (2 * v0 - sd(k) - sd(-k)) / (2 * math.pi * k * k)

    return S


# -- decay constant ---------------------------------------------------------

def _gamma_map(sd: SpectralDensity, gamma: complex, eps: float, tol: float) -> complex:
    """``int dk/2pi |V(k)|^2 / (eps - gamma - ik)`` continued analytically in gamma.

    The line of integration is moved to ``Im k = kappa`` with
    ``Re(gamma) - eps < kappa < q`` so the pole stays on the side it had for
    ``Re(gamma) < eps``; the Lorentzian family is analytic in that strip.
    """
    q, k0 = sd.q, sd.k0
    if gamma.real - eps >= q:
        raise ConvergenceError(f"Re Gamma={gamma.real:.4g} reached the analyticity strip width q={q}",
                               [gamma])
    kappa = max(0.5 * q, 0.5 * (q + gamma.real - eps))
    a, m = sd.alpha, sd.m

    def f(u):
        k = complex(u, kappa)
        return a * q ** (2 * m - 1) / ((k - k0) ** 2 + q * q) ** m / (eps - gamma - 1j * k)

    return complex(integrate_line(f, tol, center=k0, rel=REL).value) / (2 * math.pi)


def _golden_rule(sd: SpectralDensity, tol: float) -> complex:
    """First iterate at ``eps -> 0+``: ``|V(0)|^2/2 + (i/2pi) PV int |V(k)|^2/k dk``."""
    shift = integrate_pv(lambda k: float(sd(k)) / k, 0.0, tol, radius=0.25 * sd.scale, rel=1e-10).value
    return complex(0.5 * sd.at_zero, shift / (2 * math.pi))


def solve_gamma(sd: SpectralDensity, epsilon: float = 1e-8, tol: float = 1e-12,
                max_iter: int = 500, richardson: bool = True) -> DecayRates:
    """Self-consistent ``Gamma = int dk/2pi |V(k)|^2 / (eps - Gamma - ik)``.

    Fixed-point iteration seeded at ``Gamma = 0``, which selects the root with
    the smallest real part.  With ``richardson`` the result is extrapolated
    from ``eps`` and ``eps/2`` to ``eps -> 0``.  ``max_iter=1`` returns the
    first iterate at ``eps -> 0+`` (golden rule plus level shift); that is
    the only value available for tabulated densities, which are not analytic.
    """
    if not epsilon > 0:
        raise ParameterDomainError("epsilon must be positive")
    if max_iter == 1:
        return DecayRates(_golden_rule(sd, tol), 0.0, 0.0, 1)
    if not sd.is_lorentzian:
        raise ParameterDomainError(
                "self-consistent Gamma needs a density analytic near the real axis; "
                "use max_iter=1 for the golden-rule value of a tabulated density")
    if sd.alpha == 0:
        return DecayRates(0j, 0.0, epsilon, 0)

    def iterate(eps):
        g = 0j
        history = [g]
        for n in range(1, max_iter + 1):
            g_new = _gamma_map(sd, g, eps, tol * 0.1)
            history.append(g_new)
            if abs(g_new - g) < tol:
                resid = abs(g_new - _gamma_map(sd, g_new, eps, tol * 0.1))
                if resid < tol:
                    return g_new, n
            g = g_new
        raise ConvergenceError(f"Gamma iteration did not contract within {max_iter} steps",
                               history[-2:])

    g1, n1 = iterate(epsilon)
    if not richardson:
        return DecayRates(g1, 0.0, epsilon, n1)
    g2, n2 = iterate(epsilon / 2)
    return DecayRates(2 * g2 - g1, 0.0, epsilon, n1 + n2)


# -- conditional averages ----------------------------------------------------

def saturation(sd: SpectralDensity, tol: float = TOL) -> float:
    """Long-time excess ``PV int dk (|V(0)|^2 - |V(k)|^2) / (2 pi k^2)``."""
    v0 = sd.at_zero

    def f(k):
        return (v0 - float(sd(k))) / (2 * math.pi * k * k)

    return float(integrate_pv(f, 0.0, tol, radius=0.25 * sd.scale, levels=6, rel=1e-10).value)


def _tail_split(sd: SpectralDensity, lam: float) -> float:
    # below this k the measurement-broadened factors vary on the scale lam
    return 50.0 * lam if lam < 0.02 * sd.scale else 0.0


def _half_fourier(g, t: float, weight: str | None, split: float, tol: float, scale: float) -> float:
    """``int_0^inf g(k) w(k t) dk`` with w = 1, cos or sin."""
    total = 0.0
    if split > 0:
        if weight is None:
            h = g
        elif weight == "cos":
            def h(k):
                return g(k) * math.cos(k * t)
        else:
            def h(k):
                return g(k) * math.sin(k * t)
        pts = [p for p in (split / 50, split / 10) if p < split]
        total += integrate_interval(h, 0.0, split, tol / 2, points=pts, rel=REL).value
    total += integrate_halfline(g, split, tol / 2, weight=weight, omega=t, scale=scale, rel=REL).value
    return float(total)


def even_saturation(sd: SpectralDensity, tol: float = TOL) -> float:
    """Saturation value from the folded, nonsingular integrand."""
    return _half_fourier(_even_kernel(sd), 0.0, None, 0.0, tol, sd.scale)


def conditional_pt0(sd: SpectralDensity, t: float, tol: float = TOL) -> float:
    """``1 + |V(0)|^2 t/2 - int dk |V(k)|^2 sin^2(kt/2) / (pi k^2)``.

    Using ``int dk sin^2(kt/2)/(pi k^2) = t/2`` this is
    ``1 + int_0^inf S(k) (1 - cos kt) dk``.
    """
    if t < 0:
        raise ParameterDomainError("t must be >= 0")
    if t == 0 or sd.alpha == 0 and sd.is_lorentzian:
        return 1.0
    S = _even_kernel(sd)
    flat = _half_fourier(S, 0.0, None, 0.0, tol / 2, sd.scale)
    osc = _half_fourier(S, t, "cos", 0.0, tol / 2, sd.scale)
    return 1.0 + flat - osc


def conditional_cor2(sd: SpectralDensity, lam: float, t: float, tol: float = TOL) -> float:
    """``1 + Re int (1 - exp(-(lam-ik)t)) |V(k)|^2 dk / (2 pi (lam-ik)^2)``.

    The constant part ``|V(0)|^2`` integrates to zero against the kernel for
    ``lam > 0`` (all poles in one half plane), so only ``|V(k)|^2 - |V(0)|^2``
    is integrated; this also yields the correct ``lam -> 0+`` limit, which
    coincides with :func:`conditional_pt0`.
    """
    if t < 0 or lam < 0:
        raise ParameterDomainError("t and lam must be >= 0")
    if t == 0 or sd.alpha == 0 and sd.is_lorentzian:
        return 1.0
    S = _even_kernel(sd)
    l2 = lam * lam

    if lam == 0:
        flat = S
    else:
        def flat(k):
            return S(k) * k * k * (k * k - l2) / (l2 + k * k) ** 2

    def sine(k):
        return S(k) * 2 * lam * k**3 / (l2 + k * k) ** 2

    split = _tail_split(sd, lam)
    damp = math.exp(-lam * t)
    w = sd.scale
    total = _half_fourier(flat, 0.0, None, split, tol / 3, w)
    if damp > 0:
        total -= damp * _half_fourier(flat, t, "cos", split, tol / 3, w)
        if lam > 0:
            total -= damp * _half_fourier(sine, t, "sin", split, tol / 3, w)
    return 1.0 + total


def cor2_saturation(sd: SpectralDensity, lam: float, tol: float = TOL) -> float:
    """``t -> inf`` limit of :func:`conditional_cor2` minus one."""
    if lam == 0:
        return even_saturation(sd, tol)
    S = _even_kernel(sd)
    l2 = lam * lam
    return _half_fourier(lambda k: S(k) * k * k * (k * k - l2) / (l2 + k * k) ** 2, 0.0, None,
                         _tail_split(sd, lam), tol, sd.scale)


def decay_rate_lambda(sd: SpectralDensity, lam: float, tol: float = TOL) -> float:
    """Decay rate under measurement, ``int lam |V(k)|^2 dk / (pi (lam^2 + k^2))``.

    Substituting ``k = lam tan(theta)`` turns the Lorentzian weight into
    ``d theta``, so the integral is ``(1/pi) int_{-pi/2}^{pi/2} |V(lam tan theta)|^2``.
    """
    if not lam > 0:
        raise ParameterDomainError("lam must be > 0")
    half = math.pi / 2

    def f(theta):
        return float(sd(lam * math.tan(theta)))

    pts = [math.atan(sd.center / lam)]
    if sd.is_lorentzian:
        w = sd.q / lam
        pts += [math.atan((sd.center + s * sd.q) / lam) for s in (-3, -1, 1, 3)] if w < 1 else []
    res = integrate_interval(f, -half, half, tol, points=pts, rel=REL)
    return float(res.value) / math.pi


def coherence_strong(R: float, lam: float, t: float) -> float:
    """Strong-decoherence excess ``R (1 - exp(-lam t)) / (2 lam)``."""
    if not lam > 0:
        raise ParameterDomainError("lam must be > 0")
    return -R * math.expm1(-lam * t) / (2 * lam)


def curve_pt0(sd: SpectralDensity, times, tol: float = TOL) -> CorrelationCurve:
    vals = [conditional_pt0(sd, float(t), tol) for t in times]
    return CorrelationCurve(np.asarray(times, float), np.array(vals), PT0, _sd_params(sd))


def curve_cor2(sd: SpectralDensity, lam: float, times, tol: float = TOL) -> CorrelationCurve:
    vals = [conditional_cor2(sd, lam, float(t), tol) for t in times]
    params = _sd_params(sd)
    params["lambda"] = lam
    return CorrelationCurve(np.asarray(times, float), np.array(vals), COR2, params)


def _sd_params(sd: SpectralDensity) -> dict:
    if sd.is_lorentzian:
        return {"family": sd.family, "alpha": sd.alpha, "q": sd.q, "k0": sd.k0, "m": sd.m}
    return {"family": sd.family, "samples": len(sd.samples)}


# -- decaying / antidecaying states -----------------------------------------

@dataclass(frozen=True)
class WavefunctionProfile:
    grid: np.ndarray
    psi: np.ndarray
    psi_tilde: np.ndarray
    gamma: complex
    omega_amplitude: complex = 1.0


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_X = 0.5 * (_GL_X + 1.0)  # nodes on [0, 1]
_GL_W = 0.5 * _GL_W


def decaying_wavefunctions(rp: RealSpacePotential, gamma: complex, grid) -> WavefunctionProfile:
    """Reservoir parts of the decaying and antidecaying eigenstates.

    ``psi(x) = -i int_{-inf}^x Vbar(y) exp(Gamma (x-y)) dy`` and
    ``psi~(x) = i int_x^inf Vbar(y) exp(Gamma* (y-x)) dy``, accumulated cell by
    cell with 8-point Gauss-Legendre rules (exact jumps are handled when the
    grid contains the potential's breakpoints).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise GridDomainError("grid must be strictly increasing with at least two points")
    check_grid_covers(rp, grid)
    gamma = complex(gamma)
    gs = gamma.conjugate()
    h = np.diff(grid)
    nodes = grid[:-1, None] + h[:, None] * _GL_X[None, :]
    vbar = rp(nodes)
    # forward: int_{x_j}^{x_{j+1}} Vbar(y) exp(Gamma (x_{j+1} - y)) dy
    fwd = np.sum(_GL_W * vbar * np.exp(gamma * (grid[1:, None] - nodes)), axis=1) * h
    # backward: int_{x_j}^{x_{j+1}} Vbar(y) exp(Gamma* (y - x_j)) dy
    bwd = np.sum(_GL_W * vbar * np.exp(gs * (nodes - grid[:-1, None])), axis=1) * h
    n = grid.size
    psi = np.zeros(n, dtype=complex)
    psit = np.zeros(n, dtype=complex)
    step = np.exp(gamma * h)
    step_t = np.exp(gs * h)
    for j in range(n - 1):
        psi[j + 1] = step[j] * psi[j] - 1j * fwd[j]
    for j in range(n - 2, -1, -1):
        psit[j] = step_t[j] * psit[j + 1] + 1j * bwd[j]
    return WavefunctionProfile(grid, psi, psit, gamma)


def overlap(profile: WavefunctionProfile) -> complex:
    """``<psi~|psi>`` including the unit amplitudes on the local state."""
    integrand = np.conj(profile.psi_tilde) * profile.psi
    return complex(np.conj(profile.omega_amplitude) * profile.omega_amplitude
                   + np.trapezoid(integrand, profile.grid))


def decay_shift(profile: WavefunctionProfile, lam: float, min_overlap: float = 1e-8) -> float:
    """Lowest-order change of the decay rate under measurement strength ``lam``.

    For the local projector both local amplitudes are 1, so
    ``R' - R = 2 lam (Re(1/S) - 1/|S|^2)`` with ``S = <psi~|psi>``.
    """
    if lam < 0:
        raise ParameterDomainError("lam must be >= 0")
    S = overlap(profile)
    if abs(S) < min_overlap:
        raise IllConditionedOverlapError(f"|<psi~|psi>| = {abs(S):.3e} below {min_overlap}")
    return 2 * lam * ((1 / S).real - 1 / abs(S) ** 2)


# -- coherence: potential from the curve ------------------------------------

@dataclass(frozen=True)
class ExtractedPotential:
    k: np.ndarray
    values: np.ndarray
    t_cut: float
    saturated: bool
    warnings: tuple = field(default_factory=tuple)


def second_derivative(values: np.ndarray, h: float) -> np.ndarray:
    g = np.asarray(values, float)
    if g.size < 4:
        raise GridDomainError("need at least four samples for second differences")
    d2 = np.empty_like(g)
    d2[1:-1] = (g[2:] - 2 * g[1:-1] + g[:-2]) / h**2
    d2[0] = (2 * g[0] - 5 * g[1] + 4 * g[2] - g[3]) / h**2
    d2[-1] = (2 * g[-1] - 5 * g[-2] + 4 * g[-3] - g[-4]) / h**2
    return d2


def extract_potential(curve: CorrelationCurve, k, rel_increment: float = 1e-6) -> ExtractedPotential:
    """Recover ``|V(k)|^2 + |V(-k)|^2 = -int_0^inf 4 cos(kt) g''(t) dt``.

    ``g''`` comes from second differences of the uniformly sampled curve; the
    time integral stops once all later increments of the curve stay below
    ``rel_increment`` times its total excursion.
    """
    t = curve.times
    g = curve.values
    if t.size < 4:
        raise GridDomainError("curve too short for second differences")
    h = t[1] - t[0]
    if not np.allclose(np.diff(t), h, rtol=1e-9, atol=0):
        raise GridDomainError("extract_potential needs a uniform time grid")
    ks = np.atleast_1d(np.asarray(k, dtype=float))
    excursion = float(np.max(np.abs(g - g[0])))
    notes = []
    if excursion == 0.0:
        return ExtractedPotential(ks, np.zeros_like(ks), float(t[0]), True, ())
    inc = np.abs(np.diff(g))
    big = np.nonzero(inc >= rel_increment * excursion)[0]
    last = big[-1] + 1 if big.size else 0
    saturated = bool(last < inc.size)
    if not saturated:
        notes.append("curve not saturated within sampled range; truncation biases the result")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
    cut = min(last + 1, t.size - 1)
    d2 = second_derivative(g, h)[: cut + 1]
    tt = t[: cut + 1]
    vals = np.array([-np.trapezoid(4 * np.cos(kk * tt) * d2, tt) for kk in ks])
    return ExtractedPotential(ks, vals, float(tt[-1]), saturated, tuple(notes))
