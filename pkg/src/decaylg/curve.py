"""Sampled correlation curves and their CSV form."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterDomainError

PT0 = "perturbative_pt0"
COR2 = "perturbative_cor2"
PSEUDOMODE = "pseudomode_exact"
CLASSICAL = "classical_null"
BRANCHES = (PT0, COR2, PSEUDOMODE, CLASSICAL)


def fmt(x: float) -> str:
    """Round-trip float formatting used in every CSV we write."""
    return f"{float(x):.16e}"


def json_header(obj) -> str:
    return "# " + json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class CorrelationCurve:
    """``t -> <a(0)||a(t)>_Q`` with the inputs that produced it."""

    times: np.ndarray
    values: np.ndarray
    branch: str
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ParameterDomainError("times and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.times) <= 0) or (self.times.size and self.times[0] < 0):
            raise ParameterDomainError("times must be nonnegative and strictly increasing")
        if self.branch not in BRANCHES:
            raise ParameterDomainError(f"unknown branch {self.branch!r}")

    def __len__(self):
        return self.times.size

    def at(self, t: float) -> float:
        """Linear interpolation inside the sampled range."""
        from .errors import RangeError

        if not self.times[0] <= t <= self.times[-1]:
            raise RangeError(f"t={t} outside sampled range [{self.times[0]}, {self.times[-1]}]")
        return float(np.interp(t, self.times, self.values))

    def to_csv(self, fh=None, extra_header: dict | None = None) -> str:
        buf = io.StringIO()
        head = {"branch": self.branch, "parameters": self.parameters}
        if extra_header:
            head.update(extra_header)
        buf.write(json_header(head) + "\n")
        buf.write("t,value,branch\n")
        for t, v in zip(self.times, self.values):
            buf.write(f"{fmt(t)},{fmt(v)},{self.branch}\n")
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "CorrelationCurve":
        """Parse text written by :meth:`to_csv` (path or open file)."""
        if hasattr(source, "read"):
            text = source.read()
        else:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        params, branch = {}, None
        ts, vs = [], []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                try:
                    head = json.loads(line[1:])
                except json.JSONDecodeError:
                    continue
                if isinstance(head, dict) and "branch" in head:
                    params = head.get("parameters", {})
                    branch = head["branch"]
                continue
            cells = line.split(",")
            if cells[0] == "t":
                continue
            try:
                ts.append(float(cells[0]))
                vs.append(float(cells[1]))
            except (ValueError, IndexError):
                raise ParameterDomainError(f"cannot parse curve row: {line!r}")
            if branch is None and len(cells) > 2:
                branch = cells[2]
        if branch is None:
            raise ParameterDomainError("curve CSV carries no branch")
        return cls(np.array(ts), np.array(vs), branch, params)
