"""Independent reference computations used only for validation.

Nothing here shares code with the production solvers: the dense matrix
exponential is a plain scaling-and-squaring Taylor series, the 4x4 generator is
written out in the full density-matrix basis, and the survival amplitude is
integrated directly in the time domain from the memory kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ParameterDomainError, RangeError, StepSizeError


def expm_dense(M, t: float = 1.0, *, depth: int | None = None) -> np.ndarray:
    """``exp(M t)`` for a small dense matrix.

    Scale by ``2**-depth`` until the 1-norm is below 1/4, sum the Taylor series
    to convergence, square back.  ``depth`` may be forced for self-consistency
    checks.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or not 2 <= M.shape[0] <= 4:
        raise ParameterDomainError(f"expected a 2x2..4x4 matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ParameterDomainError("matrix has non-finite entries")
    dtype = complex if np.iscomplexobj(M) else float
    A = M.astype(dtype) * t
    n = A.shape[0]
    norm = np.linalg.norm(A, 1)
    if depth is None:
        depth = max(0, math.ceil(math.log2(norm / 0.25))) if norm > 0.25 else 0
    B = A / 2.0**depth
    S = np.eye(n, dtype=dtype)
    term = np.eye(n, dtype=dtype)
    for k in range(1, 60):
        term = term @ B / k
        S = S + term
        if np.linalg.norm(term, 1) <= 1e-18 * np.linalg.norm(S, 1):
            break
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(depth):
            S = S @ S
    if not np.all(np.isfinite(S)):
        raise RangeError(f"matrix exponential overflows (|M t|_1 = {norm:.3e})")
    return S


def dense_eigenvalues(M) -> np.ndarray:
    return np.linalg.eigvals(np.asarray(M))


def lindblad4_generator(alpha_tilde: float, q: float, lam: float) -> np.ndarray:
    """Generator on (rho00, rho01, rho10, rho11) for H = [[0, A], [A, -iq]]
    with ``[H, rho] -> H rho - rho H^dag`` and dephasing ``-lam [P, [P, rho]]``."""
    A, B, g = alpha_tilde, q, lam
    i = 1j
    return np.array([
        [0, i * A, -i * A, 0],
        [i * A, -g - B, 0, -i * A],
        [-i * A, 0, -g - B, i * A],
        [0, -i * A, i * A, -2 * B],
    ], dtype=complex)


def lindblad4_evolve(params, rho0, t: float) -> np.ndarray:
    """Evolve the flattened 2x2 density matrix of the pseudomode model."""
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (4,) or not np.all(np.isfinite(rho0)):
        raise ParameterDomainError("rho0 must be 4 finite components (rho00, rho01, rho10, rho11)")
    G = lindblad4_generator(params.alpha_tilde, params.q, params.lam)
    return expm_dense(G, t) @ rho0


def to_reduced(rho4) -> np.ndarray:
    r00, r01, _, r11 = rho4
    return np.array([r00.real, (1j * math.sqrt(2) * r01).real, r11.real])


def from_reduced(xyz) -> np.ndarray:
    X, Y, Z = xyz
    s = math.sqrt(2)
    return np.array([X, -1j * Y / s, 1j * Y / s, Z], dtype=complex)


def nonhermitian_amplitude(alpha_tilde: float, q: float, t: float) -> complex:
    """Local-state amplitude of the 2x2 model ``i dc/dt = H c``, ``c(0) = (1, 0)``."""
    H = np.array([[0, alpha_tilde], [alpha_tilde, -1j * q]], dtype=complex)
    return complex(expm_dense(-1j * H, t)[0, 0])


@dataclass(frozen=True)
class SurvivalTrace:
    times: np.ndarray
    amplitudes: np.ndarray
    kernel_id: str = ""


def survival_amplitude(
    kernel: Callable[[np.ndarray], np.ndarray],
    T: float,
    dt: float,
    *,
    memory: float | None = None,
    decaying: bool = True,
    kernel_id: str = "",
) -> SurvivalTrace:
    """Integrate ``dc/dt = -int_0^t K(t-s) c(s) ds`` with ``c(0) = 1``.

    Trapezoidal memory sum, Euler predictor and one trapezoidal corrector
    (second order).  ``memory`` truncates the kernel support to speed up long
    runs of short-memory kernels.  For decaying kernels ``|c|`` may never
    exceed 1; growth beyond ``1 + 1e-6`` raises :class:`StepSizeError`.
    """
    if not (T > 0 and dt > 0):
        raise ParameterDomainError("T and dt must be positive")
    if dt > T / 100:
        raise ParameterDomainError(f"dt={dt} too coarse for T={T}; need dt <= T/100")
    n = int(round(T / dt))
    times = np.arange(n + 1) * dt
    try:
        K = np.asarray(kernel(times), dtype=complex)
    except TypeError:  # scalar-only kernel
        K = None
    if K is None or K.shape != times.shape:
        K = np.array([kernel(x) for x in times], dtype=complex)
    window = n if memory is None else max(1, int(math.ceil(memory / dt)))
    c = np.zeros(n + 1, dtype=complex)
    c[0] = 1.0
    f = 0j  # dc/dt at the current step
    half_k0 = 0.5 * K[0]
    for i in range(n):
        # history part of the memory integral at t_{i+1}, excluding s = t_{i+1}
        j0 = max(0, i + 1 - window)
        hist = np.dot(K[i + 1 - j0:0:-1], c[j0:i + 1]) if i + 1 - j0 > 0 else 0j
        if j0 == 0:
            hist -= 0.5 * K[i + 1] * c[0]
        hist *= dt
        pred = c[i] + dt * f
        f_pred = -(hist + dt * half_k0 * pred)
        c[i + 1] = c[i] + 0.5 * dt * (f + f_pred)
        f = -(hist + dt * half_k0 * c[i + 1])
        if decaying and abs(c[i + 1]) > 1 + 1e-6:
            raise StepSizeError(f"|c| grew to {abs(c[i + 1]):.8f} at t={times[i + 1]:.4g}; reduce dt")
    return SurvivalTrace(times, c, kernel_id)


def fit_decay_rate(trace: SurvivalTrace, t_start: float, t_end: float) -> float:
    """Occupation decay rate ``R`` from a least-squares fit of ``log|c|``
    (``|c|^2 ~ exp(-R t)``) over ``[t_start, t_end]``."""
    sel = (trace.times >= t_start) & (trace.times <= t_end)
    if sel.sum() < 2:
        raise ParameterDomainError("fit window contains fewer than two samples")
    slope = np.polyfit(trace.times[sel], np.log(np.abs(trace.amplitudes[sel])), 1)[0]
    return -2.0 * slope
