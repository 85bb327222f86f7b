import numpy as np
import pytest
import scipy.linalg

import telespin as ts
from properties import check_su2_algebra, check_unitarity_and_norm, random_state

RNG = np.random.default_rng(42)


class TestAngularMomentum:
    def test_pauli_halves_for_single_particle(self):
        jx, jy, jz = (op.matrix for op in ts.angular_momentum_ops(1))
        assert np.allclose(jx, np.array([[0, 1], [1, 0]]) / 2)
        assert np.allclose(jy, np.array([[0, -1j], [1j, 0]]) / 2)
        assert np.allclose(jz, np.diag([0.5, -0.5]))

    def test_commutator_identity(self):
        for n in (1, 3, 7):
            jx, jy, jz = (op.matrix for op in ts.angular_momentum_ops(n))
            assert np.abs(jx @ jy - jy @ jx - 1j * jz).max() < 1e-12

    def test_jz_spectrum_n10(self):
        _, _, jz = ts.angular_momentum_ops(10)
        eigs = np.sort(np.linalg.eigvalsh(jz.matrix))[::-1]
        assert np.allclose(eigs, np.arange(5, -6, -1), atol=1e-12)

    def test_rejects_nonpositive_n(self):
        with pytest.raises(ValueError):
            ts.angular_momentum_ops(0)

    def test_su2_property_suite(self):
        check_su2_algebra(range(1, 13))


class TestCoherentState:
    def test_poles(self):
        for n in (1, 6):
            north = ts.coherent_state(n, ts.BlochPoint(0.0, 1.3))
            assert abs(abs(north.amplitudes[0]) - 1.0) < 1e-12
            south = ts.coherent_state(n, ts.BlochPoint(np.pi, 0.0))
            assert abs(abs(south.amplitudes[-1]) - 1.0) < 1e-12

    def test_mean_excitation_matches_binomial(self):
        for theta in (0.3, 1.2, 2.5):
            state = ts.coherent_state(10, ts.BlochPoint(theta, 0.7))
            k = np.arange(11)
            mean_k = float(k @ (np.abs(state.amplitudes) ** 2))
            assert abs(mean_k - 10 * np.sin(theta / 2) ** 2) < 1e-10

    def test_equals_rotated_pole(self):
        # independent construction through the rotation operators
        for n in (1, 5, 9):
            theta, phi = 1.1, 2.3
            _, jy, jz = (op.matrix for op in ts.angular_momentum_ops(n))
            pole = np.zeros(n + 1, dtype=complex)
            pole[0] = 1.0
            rotated = scipy.linalg.expm(-1j * phi * jz) @ scipy.linalg.expm(-1j * theta * jy) @ pole
            state = ts.coherent_state(n, ts.BlochPoint(theta, phi))
            assert np.abs(state.amplitudes - rotated).max() < 1e-10

    def test_mean_spin_direction(self):
        # pins the sign and phase conventions
        for n in (1, 4):
            jx, jy, jz = (op.matrix for op in ts.angular_momentum_ops(n))
            for theta, phi in ((0.6, 0.9), (2.1, 4.4)):
                state = ts.coherent_state(n, ts.BlochPoint(theta, phi))
                vec = np.array([ts.expectation(op, state) for op in (jx, jy, jz)])
                want = (n / 2) * np.array(
                    [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
                )
                assert np.abs(vec - want).max() < 1e-10


class TestDickeState:
    def test_zero_excitations_is_north_pole(self):
        assert ts.fidelity(ts.dicke_state(7, 0), ts.coherent_state(7, ts.BlochPoint(0, 0))) > 1 - 1e-12

    def test_index_arithmetic(self):
        state = ts.dicke_state(4, 2)
        assert abs(state.amplitudes[2] - 1.0) < 1e-15  # m = 0 sits at index 2

    def test_jz_expectation(self):
        _, _, jz = ts.angular_momentum_ops(9)
        for k in (0, 3, 9):
            state = ts.dicke_state(9, k)
            assert abs(ts.expectation(jz, state) - (9 / 2 - k)) < 1e-12

    def test_range_check(self):
        with pytest.raises(ValueError):
            ts.dicke_state(4, 5)
        with pytest.raises(ValueError):
            ts.dicke_state(4, -1)


class TestTensorAndEmbed:
    def test_norm_multiplicative(self):
        comp = ts.tensor_product([random_state(3, RNG), random_state(2, RNG)])
        assert abs(np.linalg.norm(comp.amplitudes) - 1.0) < 1e-12

    def test_pole_pair_index(self):
        n = 3
        comp = ts.tensor_product([ts.dicke_state(n, 0), ts.dicke_state(n, n)])
        flat = np.zeros((n + 1) ** 2)
        flat[n] = 1.0  # (k_A, k_B) = (0, N) in row-major order
        assert np.abs(np.abs(comp.amplitudes) - flat).max() < 1e-12

    def test_triple_norm(self):
        states = [random_state(10, RNG) for _ in range(3)]
        comp = ts.tensor_product(states)
        assert abs(np.linalg.norm(comp.amplitudes) - 1.0) < 1e-12

    def test_rejects_short_list(self):
        with pytest.raises(ValueError):
            ts.tensor_product([random_state(2, RNG)])

    def test_embed_identity(self):
        out = ts.embed_local(np.eye(3), 1, (2, 3, 2))
        assert np.allclose(out, np.eye(12))

    def test_embed_jz_slot0(self):
        _, _, jz = ts.angular_momentum_ops(1)
        out = ts.embed_local(jz, 0, (2, 2))
        assert np.allclose(out.matrix, np.diag([0.5, 0.5, -0.5, -0.5]))

    def test_disjoint_embeddings_commute(self):
        jx, jy, _ = (op.matrix for op in ts.angular_momentum_ops(2))
        a = ts.embed_local(jx, 0, (3, 3))
        b = ts.embed_local(jy, 1, (3, 3))
        assert np.abs(a @ b - b @ a).max() < 1e-12

    def test_embed_dimension_mismatch(self):
        with pytest.raises(ValueError):
            ts.embed_local(np.eye(3), 0, (2, 2))


class TestPartialTrace:
    def test_product_state_is_pure(self):
        comp = ts.tensor_product([random_state(2, RNG), random_state(3, RNG)])
        rho = ts.partial_trace(comp, [0])
        assert abs(np.trace(rho @ rho).real - 1.0) < 1e-10

    def test_bell_state_reduces_to_maximally_mixed(self):
        bell = ts.CompositeState((2, 2), np.array([1, 0, 0, 1]) / np.sqrt(2))
        rho = ts.partial_trace(bell, [0])
        assert np.abs(rho - np.eye(2) / 2).max() < 1e-12

    def test_unit_trace_random(self):
        comp = ts.tensor_product([random_state(3, RNG), random_state(4, RNG), random_state(2, RNG)])
        for keep in ([0], [1], [0, 2]):
            rho = ts.partial_trace(comp, keep)
            assert abs(np.trace(rho).real - 1.0) < 1e-12

    def test_invalid_index(self):
        comp = ts.tensor_product([random_state(2, RNG), random_state(2, RNG)])
        with pytest.raises(ValueError):
            ts.partial_trace(comp, [2])


class TestRotationUnitary:
    def test_zero_angles_identity(self):
        for params in (ts.EulerAngles(0, 0, 0), ts.TwoAxisAngles(0, 0)):
            u = ts.rotation_unitary(params, 4)
            assert np.abs(u.matrix - np.eye(5)).max() < 1e-12

    def test_pi_flip(self):
        u = ts.rotation_unitary(ts.EulerAngles(0, np.pi, 0), 1)
        flipped = u.matrix @ np.array([1, 0], dtype=complex)
        assert abs(abs(flipped[1]) - 1.0) < 1e-12

    def test_two_axis_matches_direct_exponential(self):
        # independent oracle: Pade-based matrix exponential
        jx, jy, _ = (op.matrix for op in ts.angular_momentum_ops(1))
        for tx, ty in ((0.4, -1.2), (2.0, 0.7), (0.0, 0.0)):
            u = ts.rotation_unitary(ts.TwoAxisAngles(tx, ty), 1).matrix
            direct = scipy.linalg.expm(-1j * (tx * jx + ty * jy))
            assert np.abs(u - direct).max() < 1e-12

    def test_unitarity_property_suite(self):
        check_unitarity_and_norm(np.random.default_rng(5), trials=30)


class TestFidelity:
    def test_identical_and_orthogonal(self):
        psi = random_state(5, RNG)
        assert abs(ts.fidelity(psi, psi) - 1.0) < 1e-12
        assert ts.fidelity(ts.dicke_state(5, 1), ts.dicke_state(5, 4)) == 0.0

    def test_coherent_overlap_formula(self):
        for n in (2, 10):
            pole = ts.coherent_state(n, ts.BlochPoint(0, 0))
            for theta in (0.4, 1.5):
                other = ts.coherent_state(n, ts.BlochPoint(theta, 2.2))
                assert abs(ts.fidelity(pole, other) - np.cos(theta / 2) ** (2 * n)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            ts.fidelity(random_state(2, RNG), random_state(3, RNG))


class TestTypeInvariants:
    def test_spin_state_norm_enforced(self):
        with pytest.raises(ValueError):
            ts.SpinState(2, np.array([1.0, 1.0, 0.0]))

    def test_bloch_point_ranges(self):
        with pytest.raises(ValueError):
            ts.BlochPoint(-0.1, 0.0)
        with pytest.raises(ValueError):
            ts.BlochPoint(1.0, 2 * np.pi)

    def test_hermitian_validation(self):
        with pytest.raises(ValueError):
            ts.HermitianOperator(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_unitary_validation(self):
        with pytest.raises(ValueError):
            ts.UnitaryOperator(np.eye(2) * 2.0)

    def test_angle_ranges(self):
        with pytest.raises(ValueError):
            ts.EulerAngles(4.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            ts.TwoAxisAngles(0.0, -3.5)

    def test_composite_length_checked(self):
        with pytest.raises(ValueError):
            ts.CompositeState((2, 2), np.array([1.0, 0.0, 0.0]))
