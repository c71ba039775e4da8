"""Leggett-Garg-type margins, classical null models and violation scans.

Two classical bounds are checked for a dichotomic-like observable with values
in ``[0, 1]``: the conditional average ``<a(0)||a(t)> <= 1`` and the Hoelder
bound ``<a^3(t) a(0)>^4 <= <a^4(t)>^3 <a^4(0)>``.  Positive margins certify
violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .curve import CLASSICAL, CorrelationCurve
from .errors import ParameterDomainError
from .pseudomode import PseudomodeParams, conditional_avg, solve_r
from .sweep import BRANCH_IDS, SweepSpec, evaluate_grid, figure_value

CERTIFY = 1e-9  # margins above this count as violations


@dataclass(frozen=True)
class ViolationRecord:
    t: float
    margin: float
    branch: str
    parameters: dict = field(default_factory=dict)
    value: float = math.nan
    status: str = "ok"

    @property
    def violates(self) -> bool:
        return self.margin > CERTIFY


@dataclass(frozen=True)
class MomentTuple:
    c31: float  # <a^3(t) a(0)>
    m4t: float  # <a^4(t)>
    m40: float  # <a^4(0)>


def lg_margin(curve: CorrelationCurve, t: float) -> float:
    """``<a(0)||a(t)> - 1`` with linear interpolation between samples."""
    return curve.at(t) - 1.0


def acor_margin(moments: MomentTuple) -> float:
    """``c31^4 - m4t^3 m40``."""
    vals = (moments.c31, moments.m4t, moments.m40)
    if not all(math.isfinite(v) for v in vals):
        raise ParameterDomainError("moments must be finite")
    return moments.c31**4 - moments.m4t**3 * moments.m40


def projector_moments(conditional: float, mean_t: float, mean_0: float = 1.0) -> MomentTuple:
    """Moments of a projector (``A^n = A``): ``c31 = <a(t)a(0)> = g <a(t)>``."""
    return MomentTuple(conditional * mean_t, mean_t, mean_0)


def decaying_moments(conditional: float, R: float, t: float) -> MomentTuple:
    """Projector moments in a state whose mean decays as ``exp(-R t)``."""
    return projector_moments(conditional, math.exp(-R * t))


def pseudomode_moments(params: PseudomodeParams, t: float) -> MomentTuple:
    r = solve_r(params)
    return decaying_moments(conditional_avg(params, t, r), params.q - r, t)


# -- classical null models ---------------------------------------------------

@dataclass(frozen=True)
class ClassicalChain:
    """Continuous-time Markov chain on {0, 1} with observable values ``a``.

    ``rate_down`` is the 1 -> 0 rate, ``rate_up`` the 0 -> 1 rate; ``p0`` is the
    initial occupation of (state 0, state 1).
    """

    rate_down: float
    rate_up: float = 0.0
    p0: tuple[float, float] = (0.0, 1.0)
    a: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.rate_down < 0 or self.rate_up < 0:
            raise ParameterDomainError("rates must be >= 0")
        if min(self.p0) < 0 or not math.isclose(sum(self.p0), 1.0, rel_tol=0, abs_tol=1e-12):
            raise ParameterDomainError("p0 must be a probability vector")
        if not all(0.0 <= v <= 1.0 for v in self.a):
            raise ParameterDomainError("observable values must lie in [0, 1]")

    def transition(self, t: float) -> np.ndarray:
        """``P[i, j]`` = probability of ``j`` at ``t`` given ``i`` at 0."""
        Q = np.array([[-self.rate_up, self.rate_up], [self.rate_down, -self.rate_down]])
        return expm(Q * t)

    def _pair(self, t: float, f0, ft) -> float:
        P = self.transition(t)
        p0, a = np.asarray(self.p0), np.asarray(self.a)
        return float(np.sum(p0[:, None] * f0(a)[:, None] * P * ft(a)[None, :]))

    def mean(self, t: float) -> float:
        return self._pair(t, np.ones_like, lambda a: a)

    def correlation(self, t: float) -> float:
        """``<a(t) a(0)>``."""
        return self._pair(t, lambda a: a, lambda a: a)

    def conditional(self, t: float) -> float:
        return self.correlation(t) / self.mean(t)

    def moments(self, t: float) -> MomentTuple:
        c31 = self._pair(t, lambda a: a, lambda a: a**3)
        m4t = self._pair(t, np.ones_like, lambda a: a**4)
        m40 = float(np.dot(self.p0, np.asarray(self.a) ** 4))
        return MomentTuple(c31, m4t, m40)

    def curve(self, times) -> CorrelationCurve:
        times = np.asarray(times, float)
        vals = np.array([self.conditional(float(t)) for t in times])
        params = {"rate_down": self.rate_down, "rate_up": self.rate_up,
                  "p0": list(self.p0), "a": list(self.a)}
        return CorrelationCurve(times, vals, CLASSICAL, params)


def death_process(R: float) -> ClassicalChain:
    """Occupied state decaying at rate ``R`` with no return."""
    return ClassicalChain(rate_down=R)


# -- scans ---------------------------------------------------------------------

def scan_violation(spec: SweepSpec, tol: float = 1e-12, jobs: int = 1) -> list[ViolationRecord]:
    """Margins over the grid in row-major axis order; point failures stay in-row."""
    out = []
    branch = BRANCH_IDS[spec.branch]
    for p, g, status in evaluate_grid(spec, tol, jobs):
        margin = g - 1.0
        value = figure_value(spec.branch, p, g) if status == "ok" else math.nan
        out.append(ViolationRecord(float(p["t"]) if "t" in p else 0.0, margin, branch, p, value, status))
    return out
