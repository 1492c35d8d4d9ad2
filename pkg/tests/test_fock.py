"""Oracle tests for the truncated Fock-basis states, gates, and quadratures."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvpinn import fock
from cvpinn.exceptions import TruncationError

CUTOFF = 50
EXACT_TOL = 1e-12
GATE_TOL = 1e-10

rng = np.random.default_rng(20240817)


class TestStates:
    def test_vacuum_is_unit_n0(self):
        state = fock.vacuum(CUTOFF)
        assert state[0] == 1.0
        assert np.all(state[1:] == 0.0)

    def test_coherent_closed_form_entries(self):
        """c_n = exp(-|a|^2/2) a^n / sqrt(n!), checked against direct factorials."""
        alpha = 0.7 + 0.2j
        state = fock.coherent(alpha, CUTOFF)
        from math import factorial

        for n in range(12):
            expected = np.exp(-0.5 * abs(alpha) ** 2) * alpha**n / np.sqrt(factorial(n))
            assert abs(state[n] - expected) < EXACT_TOL, f"entry n={n} off"

    def test_coherent_vacuum_amplitude(self):
        # |c_0| = e^{-1/2} for |alpha| = 1
        state = fock.coherent(1.0, CUTOFF)
        assert abs(state[0] - np.exp(-0.5)) < EXACT_TOL

    def test_coherent_mean_photon_number(self):
        alpha = 1.3
        state = fock.coherent(alpha, CUTOFF)
        n_op = np.arange(CUTOFF)
        mean_n = float(np.sum(n_op * np.abs(state) ** 2))
        assert abs(mean_n - abs(alpha) ** 2) < 1e-8

    def test_coherent_norm_guard_trips(self):
        """alpha = 2*pi at cutoff 50 leaks past the guard and must raise."""
        with pytest.raises(TruncationError) as excinfo:
            fock.coherent(2.0 * np.pi, CUTOFF)
        assert excinfo.value.norm is not None
        assert excinfo.value.norm < fock.NORM_GUARD

    @pytest.mark.parametrize("bad", [1, 0, -3, 2.5])
    def test_cutoff_validation(self, bad):
        with pytest.raises(ValueError):
            fock.vacuum(bad)


class TestGates:
    def test_displacement_matches_coherent_column(self):
        """D(alpha)|0> equals the closed-form coherent amplitudes."""
        for alpha in (0.4, -1.1, 0.9 + 0.4j, 1.5j):
            displaced = fock.displacement_matrix(alpha, CUTOFF) @ fock.vacuum(CUTOFF)
            expected = fock.coherent(alpha, CUTOFF)
            assert np.max(np.abs(displaced - expected)) < GATE_TOL, f"alpha={alpha}"

    def test_displacement_shifts_quadrature_mean(self):
        # hbar = 2: real displacement beta moves <x> by 2*beta
        beta = 0.8
        state = fock.displacement_matrix(beta, CUTOFF) @ fock.vacuum(CUTOFF)
        result = fock.quad_expectation(state)
        assert abs(result.mean - 2.0 * beta) < 1e-10
        assert abs(result.variance - 1.0) < 1e-10

    def test_displacement_inverse_on_low_photon_block(self):
        """D(a) D(-a) acts as the identity away from the cutoff corner.

        The product is exactly unitary but truncation distorts the highest
        photon rows, so the identity check is restricted to n <= 20 where
        leakage from alpha <= 2 is far below the tolerance.
        """
        alpha = 1.7
        product = fock.displacement_matrix(alpha, CUTOFF) @ fock.displacement_matrix(
            -alpha, CUTOFF
        )
        block = product[:21, :21]
        assert np.max(np.abs(block - np.eye(21))) < 1e-8

    def test_rotation_phases_are_exact(self):
        phi = 0.37
        gate = fock.rotation_matrix(phi, CUTOFF)
        n = np.arange(CUTOFF)
        assert np.max(np.abs(np.diag(gate) - np.exp(1j * phi * n))) == 0.0
        assert np.max(np.abs(gate - np.diag(np.diag(gate)))) == 0.0

    def test_rotation_maps_coherent_to_rotated_coherent(self):
        phi = np.pi / 2
        rotated = fock.rotation_matrix(phi, CUTOFF) @ fock.coherent(1.0, CUTOFF)
        expected = fock.coherent(np.exp(1j * phi), CUTOFF)
        assert np.max(np.abs(rotated - expected)) < EXACT_TOL

    @pytest.mark.parametrize("r", [-0.5, -0.25, 0.25, 0.5])
    def test_squeezed_vacuum_variance(self, r):
        """Var(x) of S(r,0)|0> is exp(-2r): squeezing scales phase space."""
        state = fock.squeezing_matrix(r, 0.0, CUTOFF) @ fock.vacuum(CUTOFF)
        result = fock.quad_expectation(state)
        assert abs(result.variance - np.exp(-2.0 * r)) < 1e-6, f"r={r}"
        assert abs(result.mean) < 1e-10

    @pytest.mark.parametrize("r", [-1.0, 1.0])
    def test_squeezed_vacuum_variance_truncation_floor(self, r):
        """At |r| = 1 the cutoff-50 tail limits the variance accuracy.

        The photon-number tail reflected at the cutoff enters the variance
        weighted by ~n, leaving a floor near 4e-5 that no cutoff-50
        construction avoids (cropping the exact untruncated unitary is
        slightly worse). Larger cutoffs recover the value: the error falls
        below 1e-6 by cutoff 70.
        """
        state = fock.squeezing_matrix(r, 0.0, CUTOFF) @ fock.vacuum(CUTOFF)
        result = fock.quad_expectation(state)
        assert abs(result.variance - np.exp(-2.0 * r)) < 1e-4, f"r={r}"
        state125 = fock.squeezing_matrix(r, 0.0, 125) @ fock.vacuum(125)
        assert abs(fock.quad_expectation(state125).variance - np.exp(-2.0 * r)) < 1e-9

    def test_squeezed_vacuum_parity(self):
        """The two-photon generator populates only even photon numbers."""
        state = fock.squeezing_matrix(0.5, 0.0, CUTOFF) @ fock.vacuum(CUTOFF)
        assert np.max(np.abs(state[1::2])) < 1e-14

    def test_squeeze_phase_pi_flips_axis(self):
        # z = r e^{i pi} = -r, so the x variance grows instead of shrinking
        r = 0.5
        state = fock.squeezing_matrix(r, np.pi, CUTOFF) @ fock.vacuum(CUTOFF)
        result = fock.quad_expectation(state)
        assert abs(result.variance - np.exp(2.0 * r)) < 1e-6

    def test_squeeze_magnitude_limit(self):
        with pytest.raises(ValueError):
            fock.squeezing_matrix(3.5, 0.0, CUTOFF)

    def test_kerr_phases_are_exact(self):
        kappa = 0.21
        gate = fock.kerr_matrix(kappa, CUTOFF)
        n = np.arange(CUTOFF)
        assert np.max(np.abs(np.diag(gate) - np.exp(1j * kappa * n * n))) == 0.0

    def test_kerr_preserves_photon_distribution(self):
        state = fock.coherent(1.0, CUTOFF)
        kicked = fock.kerr_matrix(0.7, CUTOFF) @ state
        assert np.max(np.abs(np.abs(kicked) ** 2 - np.abs(state) ** 2)) < EXACT_TOL

    def test_displacement_against_high_precision_exponential(self):
        """scipy's expm agrees with a 40-digit mpmath exponential of the generator."""
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 40
        cutoff = 12
        alpha = 0.7 + 0.3j
        a = np.diag(np.sqrt(np.arange(1, cutoff)), k=1).astype(complex)
        gen = alpha * a.conj().T - np.conjugate(alpha) * a
        reference = mp.expm(mp.matrix(gen))
        ours = fock.displacement_matrix(alpha, cutoff)
        worst = max(
            abs(complex(reference[i, j]) - ours[i, j])
            for i in range(cutoff)
            for j in range(cutoff)
        )
        assert worst < 1e-12

    @settings(max_examples=25, deadline=None)
    @given(phi=st.floats(-10.0, 10.0, allow_nan=False))
    def test_rotation_unitary_property(self, phi):
        gate = fock.rotation_matrix(phi, 30)
        assert np.max(np.abs(gate.conj().T @ gate - np.eye(30))) < EXACT_TOL

    @settings(max_examples=25, deadline=None)
    @given(
        mag=st.floats(0.0, 2.0, allow_nan=False),
        angle=st.floats(0.0, 2 * np.pi, allow_nan=False),
    )
    def test_displacement_unitary_property(self, mag, angle):
        """Anti-Hermitian generator: the truncated exponential stays unitary."""
        gate = fock.displacement_matrix(mag * np.exp(1j * angle), 30)
        assert np.max(np.abs(gate.conj().T @ gate - np.eye(30))) < GATE_TOL

    @settings(max_examples=25, deadline=None)
    @given(
        r=st.floats(-1.0, 1.0, allow_nan=False),
        phi=st.floats(0.0, 2 * np.pi, allow_nan=False),
    )
    def test_squeezing_unitary_property(self, r, phi):
        gate = fock.squeezing_matrix(r, phi, 30)
        assert np.max(np.abs(gate.conj().T @ gate - np.eye(30))) < GATE_TOL


class TestQuadExpectation:
    def test_vacuum_moments(self):
        result = fock.quad_expectation(fock.vacuum(CUTOFF))
        assert abs(result.mean) < EXACT_TOL
        assert abs(result.variance - 1.0) < EXACT_TOL
        assert abs(result.state_norm - 1.0) < EXACT_TOL

    def test_single_photon_moments(self):
        # <x> = 0 and Var(x) = 2n + 1 = 3 for |1>
        state = np.zeros(CUTOFF, dtype=complex)
        state[1] = 1.0
        result = fock.quad_expectation(state)
        assert abs(result.mean) < EXACT_TOL
        assert abs(result.variance - 3.0) < EXACT_TOL

    def test_coherent_moments(self):
        result = fock.quad_expectation(fock.coherent(0.3, CUTOFF))
        assert abs(result.mean - 0.6) < 1e-10
        assert abs(result.variance - 1.0) < 1e-8

    def test_norm_guard_raises(self):
        with pytest.raises(TruncationError):
            fock.quad_expectation(0.9 * fock.vacuum(CUTOFF))

    def test_norm_ceiling_raises(self):
        with pytest.raises(ValueError):
            fock.quad_expectation(1.1 * fock.vacuum(CUTOFF))


class TestPlumbing:
    def test_apply_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fock.apply(np.eye(10), fock.vacuum(12))

    def test_apply_does_not_renormalize(self):
        state = 0.999 * fock.vacuum(8)
        out = fock.apply(np.eye(8), state)
        assert np.allclose(out, state)

    def test_matrix_exponential_rejects_non_finite(self):
        bad = np.array([[0.0, np.nan], [0.0, 0.0]])
        with pytest.raises(ValueError):
            fock.matrix_exponential(bad)

    def test_gate_caches_return_readonly_views(self):
        gate = fock.rotation_matrix(0.1, 20)
        with pytest.raises(ValueError):
            gate[0, 0] = 0.0

    def test_norm_preservation_random_states(self):
        """Diagonal gates preserve norm exactly; D and S to truncation level."""
        states = rng.normal(size=(30, 20)) + 1j * rng.normal(size=(30, 20))
        states /= np.linalg.norm(states, axis=0, keepdims=True)
        big = np.zeros((CUTOFF, 20), dtype=complex)
        big[:30] = states  # support well below the cutoff
        for gate, tol in (
            (fock.rotation_matrix(0.9, CUTOFF), EXACT_TOL),
            (fock.kerr_matrix(0.4, CUTOFF), EXACT_TOL),
            (fock.displacement_matrix(1.2, CUTOFF), 1e-6),
            (fock.squeezing_matrix(0.8, 0.3, CUTOFF), 1e-6),
        ):
            norms = np.linalg.norm(gate @ big, axis=0)
            assert np.max(np.abs(norms - 1.0)) < tol
