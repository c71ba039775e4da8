"""Quadrature helpers: whole-line, half-line (optionally Fourier weighted),
Laplace-type and Cauchy principal-value integrals.

The adaptive work is delegated to QUADPACK through :func:`scipy.integrate.quad`
(QAGI for infinite ranges, QAWF/QAWO for cosine/sine weights).  The principal
value routine is implemented here: symmetric excision around the pole with
geometric radii and Richardson extrapolation in the excision radius.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import IntegrationError, PoleOrderError

DEFAULT_TOL = 1e-10
DEFAULT_LIMIT = 500
CYCLES = 8  # periods covered by panels before the QAWF tail
MAX_SPAN = 1e30  # panel range cap, in units of the integrand scale
FLOOR = 1e-14  # relative accuracy below which roundoff warnings are not errors


@dataclass(frozen=True)
class IntegrationResult:
    value: complex | float
    error_estimate: float
    evaluations: int

    def __float__(self):
        return float(np.real(self.value))

    def __add__(self, other: "IntegrationResult") -> "IntegrationResult":
        return IntegrationResult(
            self.value + other.value,
            self.error_estimate + other.error_estimate,
            self.evaluations + other.evaluations,
        )

    def scaled(self, factor) -> "IntegrationResult":
        return IntegrationResult(self.value * factor, self.error_estimate * abs(factor), self.evaluations)


ZERO = IntegrationResult(0.0, 0.0, 0)


class _Counter:
    def __init__(self, f):
        self.f = f
        self.n = 0

    def __call__(self, x):
        self.n += 1
        return self.f(x)


def _is_complex(f, probe: float) -> bool:
    return isinstance(f(probe), (complex, np.complexfloating))


def _quad(f, a, b, tol, *, rel=0.0, limit=DEFAULT_LIMIT, probe=None, **kwargs) -> IntegrationResult:
    counted = _Counter(f)
    if probe is None:
        probe = a if math.isfinite(a) else (b if math.isfinite(b) else 0.0)
    complex_func = kwargs.pop("complex_func", None)
    if complex_func is None:
        complex_func = _is_complex(f, probe)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        if complex_func:
            value, err = quad(counted, a, b, epsabs=tol, epsrel=rel, limit=limit,
                              complex_func=True, **kwargs)
            err = abs(err)
        else:
            value, err = quad(counted, a, b, epsabs=tol, epsrel=rel, limit=limit, **kwargs)
    if not np.isfinite(value):
        raise IntegrationError(f"non-finite integral over [{a}, {b}]", value, err)
    if caught and err > max(tol, rel * abs(value), FLOOR * abs(value)):
        raise IntegrationError(
            f"quadrature over [{a}, {b}] reached error {err:.3e} > tol {tol:.3e}: {caught[0].message}",
            value,
            err,
        )
    return IntegrationResult(value, float(err), counted.n)


def integrate_interval(
    f: Callable[[float], complex],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    *,
    points: Optional[Sequence[float]] = None,
    rel: float = 0.0,
    limit: int = DEFAULT_LIMIT,
) -> IntegrationResult:
    """Adaptive integral of ``f`` over a finite interval ``[a, b]``."""
    if a == b:
        return ZERO
    pts = None
    if points is not None:
        pts = sorted(p for p in points if min(a, b) < p < max(a, b))
        pts = pts or None
    return _quad(f, a, b, tol, rel=rel, limit=limit, points=pts)


def integrate_line(
    f: Callable[[float], complex],
    tol: float = DEFAULT_TOL,
    *,
    center: float = 0.0,
    rel: float = 0.0,
    limit: int = DEFAULT_LIMIT,
) -> IntegrationResult:
    """Integral of ``f`` over the whole real line.

    Each half-line is mapped onto a finite interval and subdivided adaptively
    (QUADPACK QAGI).  ``center`` should sit near the bulk of the integrand.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    left = _quad(f, -np.inf, center, tol / 2, rel=rel, limit=limit, probe=center)
    right = _quad(f, center, np.inf, tol / 2, rel=rel, limit=limit, probe=center)
    return left + right


def integrate_halfline(
    f: Callable[[float], float],
    a: float = 0.0,
    tol: float = DEFAULT_TOL,
    *,
    weight: Optional[str] = None,
    omega: float = 0.0,
    scale: float = 1.0,
    rel: float = 0.0,
    limit: int = DEFAULT_LIMIT,
) -> IntegrationResult:
    """Integral over ``[a, inf)``.

    With ``weight='cos'`` or ``'sin'`` the integrand is multiplied by
    ``cos(omega x)`` / ``sin(omega x)``.  QAWF alone mis-integrates structure
    that is narrow compared with one period (it can return wrong values with
    tiny error estimates), so the range is cut at
    ``B = a + max(scale, CYCLES periods)``: ``[a, B]`` is covered by panels of
    doubling width starting at ``scale`` (QAWO), and only ``[B, inf)`` goes
    to QAWF.  ``scale`` is the width over which ``f`` varies; ``f`` must be real.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if weight is None or omega == 0.0:
        if weight == "sin":
            return ZERO
        return _quad(f, a, np.inf, tol, rel=rel, limit=limit)
    if weight not in ("cos", "sin"):
        raise ValueError(f"unknown weight {weight!r}")
    if not scale > 0:
        raise ValueError("scale must be positive")
    sign = 1.0
    if omega < 0:
        omega = -omega
        if weight == "sin":
            sign = -1.0
    span = CYCLES * 2 * math.pi / omega
    slow = not span < MAX_SPAN * scale
    b = a + (MAX_SPAN * scale if slow else max(scale, span))
    edges = [a]
    width = scale
    while edges[-1] + width < b:
        edges.append(edges[-1] + width)
        width *= 2
    edges.append(b)
    share = tol / len(edges)
    res = ZERO
    for lo, hi in zip(edges[:-1], edges[1:]):
        res = res + _quad(f, lo, hi, share, rel=rel, limit=limit, weight=weight, wvar=omega,
                          complex_func=False)
    if slow:
        # frequency too low for QAWF; the remote tail barely oscillates
        trig = math.cos if weight == "cos" else math.sin
        res = res + _quad(lambda x: f(x) * trig(omega * x), b, np.inf, share, rel=rel, limit=limit,
                          complex_func=False)
    else:
        res = res + _quad(f, b, np.inf, share, rel=rel, limit=limit, weight=weight, wvar=omega,
                          complex_func=False)
    return res.scaled(sign)


def integrate_laplace(
    f: Callable[[float], complex],
    s: complex,
    tol: float = DEFAULT_TOL,
    *,
    limit: int = DEFAULT_LIMIT,
) -> IntegrationResult:
    """``int_0^inf f(z) exp(s z) dz``; ``f`` must decay faster than ``exp(-Re s z)``."""
    def g(z):
        fz = f(z)
        # far-out nodes of the mapped range: f underflows before exp(s z) overflows
        return 0j if fz == 0 else fz * np.exp(s * z)

    return _quad(g, 0.0, np.inf, tol, limit=limit, complex_func=True)


def _richardson(seq: list, orders: Sequence[int], ratio: float = 2.0):
    """Richardson table for a sequence sampled at h, h/ratio, h/ratio**2, ...

    Returns the most extrapolated value and the last correction size.
    """
    table = [list(seq)]
    for p in orders:
        prev = table[-1]
        if len(prev) < 2:
            break
        fac = ratio**p - 1.0
        table.append([prev[i + 1] + (prev[i + 1] - prev[i]) / fac for i in range(len(prev) - 1)])
    best = table[-1][-1]
    if len(table) >= 2:
        err = abs(best - table[-2][-1])
    else:
        err = float("inf")
    return best, err


def integrate_pv(
    f: Callable[[float], float],
    pole: float,
    tol: float = DEFAULT_TOL,
    *,
    a: float = -np.inf,
    b: float = np.inf,
    radius: float = 0.25,
    levels: int = 10,
    order: int = 4,
    rel: float = 1e-12,
) -> IntegrationResult:
    """Cauchy principal value of ``f`` over ``(a, b)`` with a simple pole at ``pole``.

    The excised integral ``I(d) = int_{|k-pole|>d} f`` is built for radii
    ``d = radius / 2**j``.  Because the pole part cancels under symmetric
    excision, ``I(d) = PV - s(0) d - s''(0) d**3/6 - ...`` for the symmetrised
    integrand ``s(u) = f(pole+u) + f(pole-u)``; the odd powers are removed by
    Richardson extrapolation.  Growing shell contributions signal a pole of
    higher order and raise :class:`PoleOrderError`.
    """
    if not (a < pole < b):
        raise ValueError("pole must lie strictly inside (a, b)")
    radius = min(radius, pole - a, b - pole)
    if radius <= 0:
        raise ValueError("radius must be positive")

    def outer(lo, hi):
        if lo >= hi:
            return ZERO
        return _quad(f, lo, hi, tol / 4, rel=rel, probe=hi if math.isinf(lo) else lo)

    total = outer(a, pole - radius) + outer(pole + radius, b)

    def sym(u):
        return f(pole + u) + f(pole - u)

    partial = [total.value]
    shells = []
    evals = total.evaluations
    err = total.error_estimate
    d = radius
    for _ in range(levels):
        # roundoff floor set by the size of the two cancelling halves
        floor = 64 * np.finfo(float).eps * d * (abs(f(pole + d)) + abs(f(pole - d)))
        shell = _quad(sym, d / 2, d, max(tol / (4 * levels), floor), rel=rel)
        shells.append(shell.value)
        evals += 2 * shell.evaluations
        err += shell.error_estimate
        partial.append(partial[-1] + shell.value)
        d /= 2
    tail = [abs(s) for s in shells[-4:]]
    if len(tail) >= 3 and all(tail[i + 1] > 0.9 * tail[i] for i in range(len(tail) - 1)) and tail[-1] > tol:
        raise PoleOrderError(
            f"principal value diverges at k={pole}: shell contributions do not shrink "
            f"({tail[-3]:.3e}, {tail[-2]:.3e}, {tail[-1]:.3e})",
            partial[-1],
            tail[-1],
        )
    orders = [2 * i + 1 for i in range(order)]
    value, rich_err = _richardson(partial[-(order + 2):], orders)
    return IntegrationResult(value, float(err + rich_err), evals)
