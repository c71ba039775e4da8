"""Pseudomode reduction of the Lorentzian reservoir."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from decaylg.errors import DegenerateStateError, ParameterDomainError
from decaylg.oracle import expm_dense
from decaylg.pseudomode import (
    FOURIER_CONVENTION,
    PRINTED_CONVENTION,
    PseudomodeParams,
    _exp_divdiff2,
    build_liouvillian,
    conditional_avg,
    conditional_curve,
    eig_residual,
    evolve,
    lambda0_propagator,
    liouvillian_matrix,
    measure,
    propagator,
    propagator_coefficients,
    sinc,
    sinhc,
    solve_r,
    stationary_state,
)

couplings = st.floats(0.0, 6.0)
lams = st.floats(0.0, 20.0)
qs = st.floats(0.2, 5.0)


def closed_form_lambda0(coupling, q, t):
    """``<a(0)||a(t)>`` at lam=0 from the 2x2 amplitude (oscillatory regime)."""
    w = q * math.sqrt(coupling - 1)
    x = w * t / 2
    return math.cos(x) * (math.cos(x) + q / w * math.sin(x))


class TestParams:
    def test_conventions(self):
        p = PseudomodeParams.from_alpha(0.2, 1.0)
        assert p.c_conv == PRINTED_CONVENTION
        assert p.alpha_tilde**2 == pytest.approx(math.pi * 0.2)
        assert p.alpha == pytest.approx(0.2)
        p = PseudomodeParams.from_alpha(0.2, 1.0, c_conv=FOURIER_CONVENTION)
        assert p.alpha_tilde**2 == pytest.approx(0.1)

    def test_coupling(self):
        p = PseudomodeParams.from_coupling(1.5, 2.0)
        assert p.coupling == pytest.approx(1.5)
        assert 4 * p.alpha_tilde**2 == pytest.approx(6.0)

    @pytest.mark.parametrize("args", [(-0.1, 1.0), (0.1, 0.0), (0.1, 1.0, -1.0), (0.1, 1.0, 0.0, 0.0)])
    def test_domain(self, args):
        with pytest.raises(ParameterDomainError):
            PseudomodeParams(*args)
        with pytest.raises(ParameterDomainError):
            PseudomodeParams.from_alpha(-1.0, 1.0)


class TestRoot:
    def test_lambda0_closed_form(self):
        assert solve_r(PseudomodeParams.from_coupling(0.36, 1.0)) == pytest.approx(0.8)
        assert solve_r(PseudomodeParams.from_coupling(2.0, 1.0)) == 0.0

    def test_zero_coupling(self):
        assert solve_r(PseudomodeParams(0.0, 1.3, 0.4)) == 1.3

    def test_zeno_limit(self):
        # strong measurement pins the local state: q - r ~ 2 at^2 / lam
        p = PseudomodeParams.from_coupling(0.5, 1.0, 1e4)
        r = solve_r(p)
        assert (1.0 - r) * 1e4 == pytest.approx(0.25, rel=1e-3)

    @settings(max_examples=200, deadline=None)
    @given(couplings, qs, lams)
    def test_root_in_range_with_small_residual(self, c, q, lam):
        p = PseudomodeParams.from_coupling(c, q, lam)
        r = solve_r(p)
        assert 0.0 <= r <= q
        scale = max(1.0, q**3, lam * q * q)
        assert abs(eig_residual(p, r)) < 1e-12 * scale

    @settings(max_examples=100, deadline=None)
    @given(couplings, qs, lams)
    def test_spectrum_matches_dense(self, c, q, lam):
        # trace, determinant and cubic residual; dense eigenvalues lose accuracy at triple roots
        p = PseudomodeParams.from_coupling(c, q, lam)
        L = build_liouvillian(p)
        Lp = liouvillian_matrix(p) + q * np.eye(3)
        ev = np.array(L.eigenvalues)
        scale = max(1.0, q, lam)
        assert ev.sum() == pytest.approx(np.trace(Lp), abs=1e-10 * scale)
        assert np.prod(ev) == pytest.approx(np.linalg.det(Lp), abs=1e-9 * scale**3)
        for e in ev:
            assert abs(eig_residual(p, e)) < 1e-9 * scale**3
        assert all(e.real <= 1e-12 for e in ev[1:])


class TestPropagator:
    @pytest.mark.parametrize("coupling", [0.1, 0.5, 1.0 - 1e-10, 1.0, 1.0 + 1e-10, 1.5, 3.0])
    @pytest.mark.parametrize("lam", [0.0, 0.01, 0.3, 5.0])
    def test_against_expm(self, coupling, lam):
        p = PseudomodeParams.from_coupling(coupling, 1.0, lam)
        L = liouvillian_matrix(p)
        for t in (0.0, 0.1, 1.0, 5.0, 10.0, 40.0):
            np.testing.assert_allclose(propagator(p, t), expm_dense(L, t), atol=1e-12)

    @pytest.mark.parametrize("t", [0.5, 2.0, 8.0])
    def test_continuous_across_degeneracy(self, t):
        # lam = 0, 4 alpha_tilde^2 = q^2: left and right limits in alpha agree
        q, c = 1.0, FOURIER_CONVENTION
        alpha = q * q / (4 * c)
        left = PseudomodeParams.from_alpha(alpha - 1e-8, q, 0.0, c)
        right = PseudomodeParams.from_alpha(alpha + 1e-8, q, 0.0, c)
        mid = PseudomodeParams.from_alpha(alpha, q, 0.0, c)
        np.testing.assert_allclose(propagator(left, t), propagator(right, t), atol=1e-6)
        np.testing.assert_allclose(propagator(mid, t), expm_dense(liouvillian_matrix(mid), t), atol=1e-12)
        np.testing.assert_allclose(propagator(left, t), expm_dense(liouvillian_matrix(left), t), atol=1e-12)

    def test_identity_at_zero(self):
        p = PseudomodeParams.from_coupling(0.7, 1.0, 0.2)
        np.testing.assert_allclose(propagator(p, 0.0), np.eye(3), atol=1e-15)

    def test_semigroup(self):
        p = PseudomodeParams.from_coupling(2.2, 1.0, 0.05)
        np.testing.assert_allclose(propagator(p, 3.7), propagator(p, 1.2) @ propagator(p, 2.5), atol=1e-13)

    def test_shift(self):
        p = PseudomodeParams.from_coupling(0.4, 1.0, 0.1)
        np.testing.assert_allclose(propagator(p, 2.0, shift=-0.3), math.exp(0.6) * propagator(p, 2.0), rtol=1e-13)

    def test_coefficients_real_for_imaginary_delta(self):
        co = propagator_coefficients(PseudomodeParams.from_coupling(3.0, 1.0), 2.0)
        assert co.delta.real == 0 and co.delta.imag > 0
        assert all(isinstance(x, float) for x in (co.a, co.b, co.c))

    def test_negative_time(self):
        with pytest.raises(ParameterDomainError):
            propagator(PseudomodeParams.from_coupling(0.4, 1.0), -1.0)

    def test_lambda0_variant(self):
        p = PseudomodeParams.from_coupling(0.4, 1.0)
        np.testing.assert_array_equal(lambda0_propagator(p, 1.0), propagator(p, 1.0))
        with pytest.raises(ParameterDomainError):
            lambda0_propagator(PseudomodeParams.from_coupling(0.4, 1.0, 0.1), 1.0)

    def test_evolve_preserves_trace_decay(self):
        p = PseudomodeParams.from_coupling(0.4, 1.0)
        s = evolve(p, [1.0, 0.0, 0.0], 1.0)
        assert s.shape == (3,)


class TestScalarHelpers:
    @pytest.mark.parametrize("z", [0.0, 1e-6, 1e-3, 0.5, 3.0, 2 + 1j])
    def test_sinc(self, z):
        ref = 1.0 if z == 0 else np.sin(z) / z
        assert sinc(z) == pytest.approx(ref, rel=1e-14)
        assert sinhc(z) == pytest.approx(1.0 if z == 0 else np.sinh(z) / z, rel=1e-14)

    @pytest.mark.parametrize("xs", [(0.0, -1.0, -2.5), (-1.0, -1.0, -1.0), (-1.0, -1.0 + 1e-9, -3.0),
                                    (-0.5, -0.75 + 0.3j, -0.75 - 0.3j), (0.0, -40.0, -41.0)])
    def test_divided_difference(self, xs):
        t = 1.7
        # oracle: exp of the 3x3 bidiagonal matrix holds the divided difference
        M = np.diag(np.array(xs, dtype=complex)) + np.diag([1.0, 1.0], -1)
        ref = expm_dense(M, t)[2, 0]
        assert _exp_divdiff2(*map(complex, xs), t) == pytest.approx(ref, rel=1e-10, abs=1e-300)


class TestConditional:
    def test_stationary_state_is_eigenvector(self):
        p = PseudomodeParams.from_coupling(0.6, 1.0, 0.2)
        r = solve_r(p)
        v = stationary_state(p, r).as_array()
        np.testing.assert_allclose(liouvillian_matrix(p) @ v, (r - p.q) * v, atol=1e-14)

    def test_degenerate(self):
        with pytest.raises(DegenerateStateError):
            stationary_state(PseudomodeParams(0.0, 1.0))

    def test_measure(self):
        np.testing.assert_array_equal(measure(np.array([2.0, 4.0, 1.0])), [2.0, 2.0, 0.0])

    def test_unity_at_zero(self):
        for c in (0.1, 1.5):
            for lam in (0.0, 0.5):
                assert conditional_avg(PseudomodeParams.from_coupling(c, 1.0, lam), 0.0) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("coupling", [1.5, 3.0])
    def test_lambda0_strong_coupling_closed_form(self, coupling):
        p = PseudomodeParams.from_coupling(coupling, 1.0)
        for t in (0.3, 1.0, 2.5, 4.0):
            assert conditional_avg(p, t) == pytest.approx(closed_form_lambda0(coupling, 1.0, t), abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.01, 0.99), qs, st.floats(0.0, 5.0))
    def test_initial_slope(self, c, q, lam):
        p = PseudomodeParams.from_coupling(c, q, lam)
        r = solve_r(p)
        assume(q - r > 1e-6 * q)
        h = 1e-5 / q
        slope = (conditional_avg(p, h, r) - 1.0) / h
        assert slope == pytest.approx((q - r) / 2, rel=1e-3)

    def test_weak_coupling_matches_perturbative_closed_form(self):
        # 1 + alpha (1 - exp(-q t)) / (2 q^2) with alpha_tilde^2 = alpha / 2
        alpha, q = 1e-4, 1.0
        p = PseudomodeParams.from_alpha(alpha, q, c_conv=FOURIER_CONVENTION)
        ts = np.linspace(0, 10, 21)
        ref = 1 + alpha * (1 - np.exp(-q * ts)) / (2 * q * q)
        np.testing.assert_allclose(conditional_curve(p, ts), ref, atol=5e-8)
