"""Parameter grids and single-point evaluation shared by scans and the CLI."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .curve import COR2, PSEUDOMODE, PT0
from .errors import DecayError, ParameterDomainError
from .perturb import conditional_cor2, conditional_pt0
from .pseudomode import PRINTED_CONVENTION, PseudomodeParams, conditional_avg
from .spectral import SpectralDensity

AXIS_NAMES = ("t", "q", "alpha", "lambda", "k0", "m", "coupling")
FIXED_NAMES = AXIS_NAMES + ("alpha_tilde", "c_conv")
BRANCH_IDS = {"pt0": PT0, "cor2": COR2, "pseudomode": PSEUDOMODE}
DEFAULTS = {"q": 1.0, "lambda": 0.0, "k0": 0.0, "m": 1, "c_conv": PRINTED_CONVENTION}


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ParameterDomainError(f"unknown axis {self.name!r}; expected one of {AXIS_NAMES}")
        if int(self.count) != self.count or self.count < 0:
            raise ParameterDomainError(f"axis {self.name!r}: count must be a nonnegative integer")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ParameterDomainError(f"axis {self.name!r}: bounds must be finite")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.start)])
        return np.linspace(self.start, self.stop, int(self.count))


@dataclass(frozen=True)
class SweepSpec:
    branch: str
    axes: tuple[Axis, ...]
    fixed: dict = field(default_factory=dict)
    output_path: str | None = None

    def __post_init__(self):
        if self.branch not in BRANCH_IDS:
            raise ParameterDomainError(f"unknown branch {self.branch!r}; expected one of {tuple(BRANCH_IDS)}")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ParameterDomainError("axis names must be distinct")
        clash = set(names) & set(self.fixed)
        if clash:
            raise ParameterDomainError(f"names both swept and fixed: {sorted(clash)}")
        unknown = set(self.fixed) - set(FIXED_NAMES)
        if unknown:
            raise ParameterDomainError(f"unknown fixed parameters: {sorted(unknown)}")
        for k, v in self.fixed.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParameterDomainError(f"fixed parameter {k!r} must be a finite number")

    @classmethod
    def from_dict(cls, cfg: dict) -> "SweepSpec":
        if not isinstance(cfg, dict):
            raise ParameterDomainError("config must be a JSON object")
        try:
            axes = []
            for a in cfg.get("axes", []):
                if isinstance(a, dict):
                    axes.append(Axis(a["name"], float(a["start"]), float(a["stop"]), a["count"]))
                else:
                    name, start, stop, count = a
                    axes.append(Axis(name, float(start), float(stop), count))
            fixed = {k: v for k, v in cfg.get("fixed", {}).items()}
            return cls(cfg["branch"], tuple(axes), fixed, cfg.get("output_path"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterDomainError(f"malformed sweep config: {exc!r}") from None

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "axes": [[a.name, a.start, a.stop, a.count] for a in self.axes],
            "fixed": dict(self.fixed),
        }

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(a.count) for a in self.axes)

    def points(self) -> list[dict]:
        """Parameter dicts in row-major order of the axes (first axis slowest)."""
        vals = [a.values() for a in self.axes]
        out = []
        for combo in itertools.product(*vals):
            p = dict(DEFAULTS)
            p.update(self.fixed)
            p.update({a.name: float(v) for a, v in zip(self.axes, combo)})
            out.append(p)
        return out


def _density(p: dict) -> SpectralDensity:
    if "alpha" not in p:
        raise ParameterDomainError("perturbative branches need alpha")
    m = p["m"]
    if float(m) != int(round(float(m))):
        raise ParameterDomainError(f"m must be an integer, got {m}")
    return SpectralDensity.lorentzian(float(p["alpha"]), float(p["q"]), float(p["k0"]), int(round(float(m))))


def pseudomode_params(p: dict) -> PseudomodeParams:
    if float(p.get("k0", 0.0)) != 0.0 or int(round(float(p.get("m", 1)))) != 1:
        raise ParameterDomainError("the pseudomode branch covers only m=1, k0=0")
    q, lam, c = float(p["q"]), float(p["lambda"]), float(p["c_conv"])
    given = [k for k in ("coupling", "alpha_tilde", "alpha") if k in p]
    if len(given) != 1:
        raise ParameterDomainError("pseudomode needs exactly one of coupling, alpha_tilde, alpha")
    if "coupling" in p:
        return PseudomodeParams.from_coupling(float(p["coupling"]), q, lam, c)
    if "alpha_tilde" in p:
        return PseudomodeParams(float(p["alpha_tilde"]), q, lam, c)
    return PseudomodeParams.from_alpha(float(p["alpha"]), q, lam, c)


def check_point(branch: str, p: dict) -> None:
    """Raise :class:`ParameterDomainError` for inputs no evaluation can accept."""
    if branch == "pseudomode":
        pseudomode_params(p)
    else:
        if "coupling" in p or "alpha_tilde" in p:
            raise ParameterDomainError("coupling/alpha_tilde apply only to the pseudomode branch")
        _density(p)
    if "t" not in p:
        raise ParameterDomainError("t must be an axis or a fixed value")
    if float(p["t"]) < 0:
        raise ParameterDomainError("t must be >= 0")


def evaluate(branch: str, p: dict, tol: float) -> float:
    """Conditional average ``<a(0)||a(t)>`` at one parameter point."""
    t = float(p["t"])
    if branch == "pt0":
        return conditional_pt0(_density(p), t, tol)
    if branch == "cor2":
        return conditional_cor2(_density(p), float(p["lambda"]), t, tol)
    return conditional_avg(pseudomode_params(p), t)


def figure_value(branch: str, p: dict, g: float) -> float:
    """Figure convention: ``(g - 1)/alpha`` for perturbative branches, raw ``g`` otherwise."""
    if branch == "pseudomode":
        return g
    a = float(p["alpha"])
    return (g - 1.0) / a if a != 0 else math.nan


def _worker(args):
    branch, p, tol = args
    try:
        g = evaluate(branch, p, tol)
        if not math.isfinite(g):
            return math.nan, "non-finite result"
        return g, "ok"
    except DecayError as exc:
        return math.nan, f"{type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")


def evaluate_grid(spec: SweepSpec, tol: float, jobs: int = 1) -> list[tuple[dict, float, str]]:
    """Evaluate every point; result order is grid order whatever ``jobs`` is."""
    pts = spec.points()
    for p in pts:
        check_point(spec.branch, p)
    tasks = [(spec.branch, p, tol) for p in pts]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            res = list(pool.map(_worker, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        res = [_worker(t) for t in tasks]
    return [(p, g, s) for p, (g, s) in zip(pts, res)]
