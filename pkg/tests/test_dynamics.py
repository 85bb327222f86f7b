import numpy as np
import pytest

import telespin as ts
from properties import check_energy_and_norm_conservation, random_state

RNG = np.random.default_rng(7)


def pole_pair(n1, n2):
    return ts.tensor_product([ts.dicke_state(n1, 0), ts.dicke_state(n2, n2)])


class TestHamiltonians:
    def test_opposite_pole_ground_state(self):
        coeffs = ts.LinearCoefficients(species_1=(0, 0, -1.0), species_2=(0, 0, 1.0))
        h = ts.build_linear_hamiltonian(coeffs, (4, 4))
        w, v = np.linalg.eigh(h.matrix)
        ground = v[:, 0]
        want = pole_pair(3, 3).amplitudes
        assert abs(abs(np.vdot(ground, want)) - 1.0) < 1e-10

    def test_single_species_minus_jz(self):
        coeffs = ts.LinearCoefficients(species_1=(0, 0, -1.0))
        h = ts.build_linear_hamiltonian(coeffs, (5, 2))
        _, _, jz = ts.angular_momentum_ops(4)
        assert np.abs(h.matrix + ts.embed_local(jz, 0, (5, 2)).matrix).max() < 1e-12
        assert abs(np.linalg.eigvalsh(h.matrix)[0] + 2.0) < 1e-12  # j = 2 at the pole

    def test_zero_coefficients(self):
        h = ts.build_linear_hamiltonian(ts.LinearCoefficients(), (3, 3))
        assert np.abs(h.matrix).max() == 0.0
        hq = ts.build_quadratic_hamiltonian(ts.QuadraticCoefficient(0.0), (3, 3))
        assert np.abs(hq.matrix).max() == 0.0

    def test_chi_sign_flip_negates_spectrum(self):
        hp = ts.build_quadratic_hamiltonian(ts.QuadraticCoefficient(1.0), (3, 4))
        hm = ts.build_quadratic_hamiltonian(ts.QuadraticCoefficient(-1.0), (3, 4))
        assert np.allclose(np.linalg.eigvalsh(hp.matrix), -np.linalg.eigvalsh(hm.matrix)[::-1])

    def test_bell_state_after_quarter_pi(self):
        hq = ts.build_quadratic_hamiltonian(ts.QuadraticCoefficient(1.0), (2, 2))
        evolved = ts.evolve(pole_pair(1, 1), hq, np.pi / 4)
        basis = ts.bell_basis()
        want = (1j / np.sqrt(2)) * (-basis.vectors[1] + basis.vectors[2])
        assert np.abs(evolved.amplitudes - want).max() < 1e-12

    def test_dims_validated(self):
        with pytest.raises(ValueError):
            ts.build_quadratic_hamiltonian(ts.QuadraticCoefficient(1.0), (2, 2, 2))


class TestEvolve:
    def test_zero_time_is_identity(self):
        state = ts.tensor_product([random_state(2, RNG), random_state(2, RNG)])
        h = ts.build_quadratic_hamiltonian(ts.QuadraticCoefficient(1.0), state.dims)
        assert np.abs(ts.evolve(state, h, 0.0).amplitudes - state.amplitudes).max() < 1e-12

    def test_reversibility(self):
        state = ts.tensor_product([random_state(3, RNG), random_state(3, RNG)])
        h = ts.build_quadratic_hamiltonian(ts.QuadraticCoefficient(1.0), state.dims)
        back = ts.evolve(ts.evolve(state, h, 0.7), ts.HermitianOperator(-h.matrix), 0.7)
        assert np.abs(back.amplitudes - state.amplitudes).max() < 1e-9

    def test_multiparticle_entangling_time(self):
        state = pole_pair(10, 10)
        h = ts.build_quadratic_hamiltonian(ts.QuadraticCoefficient(1.0), state.dims)
        evolved = ts.evolve(state, h, 0.094)
        assert ts.entanglement_entropy(evolved, [0]) > 0.0

    def test_dimension_mismatch(self):
        state = pole_pair(2, 2)
        h = ts.build_quadratic_hamiltonian(ts.QuadraticCoefficient(1.0), (2, 2))
        with pytest.raises(ValueError):
            ts.evolve(state, h, 0.1)

    def test_energy_conservation_suite(self):
        check_energy_and_norm_conservation(np.random.default_rng(3), trials=6)

    def test_mean_zero_persistence(self):
        state = pole_pair(4, 4)
        h = ts.build_quadratic_hamiltonian(ts.QuadraticCoefficient(1.0), state.dims)
        ops = []
        for slot, n in ((0, 4), (1, 4)):
            jx, jy, _ = (op.matrix for op in ts.angular_momentum_ops(n))
            ops.extend([ts.embed_local(jx, slot, state.dims), ts.embed_local(jy, slot, state.dims)])
        for t in np.linspace(0.0, 1.5, 7):
            evolved = ts.evolve(state, h, float(t))
            for op in ops:
                assert abs(ts.expectation(op, evolved)) < 1e-9


class TestEntropy:
    def test_product_state_zero(self):
        comp = ts.tensor_product([random_state(3, RNG), random_state(2, RNG)])
        assert ts.entanglement_entropy(comp, [0]) < 1e-10

    def test_bell_state_ln2(self):
        bell = ts.CompositeState((2, 2), np.array([1, 0, 0, 1]) / np.sqrt(2))
        assert abs(ts.entanglement_entropy(bell, [0]) - np.log(2)) < 1e-10

    def test_qubit_pair_maximal_at_quarter_pi(self):
        h = ts.build_quadratic_hamiltonian(ts.QuadraticCoefficient(1.0), (2, 2))
        evolved = ts.evolve(pole_pair(1, 1), h, np.pi / 4)
        assert abs(ts.entanglement_entropy(evolved, [0]) - np.log(2)) < 1e-9

    def test_schmidt_symmetry(self):
        comp = ts.CompositeState(
            (4, 5),
            (lambda v: v / np.linalg.norm(v))(RNG.normal(size=20) + 1j * RNG.normal(size=20)),
        )
        s_a = ts.entanglement_entropy(comp, [0])
        s_b = ts.entanglement_entropy(comp, [1])
        assert abs(s_a - s_b) < 1e-9


class TestVarianceBounds:
    def test_uncorrelated_poles(self):
        snap = ts.variance_bounds(pole_pair(5, 5))
        assert snap.cxx == pytest.approx(0.0, abs=1e-12)
        assert snap.cxy == pytest.approx(0.0, abs=1e-12)
        assert snap.phi_opt == 0.0
        assert snap.sigma_plus_sq == pytest.approx(snap.sigma1_sq + snap.sigma2_sq, abs=1e-12)
        assert snap.sigma_minus_sq == pytest.approx(snap.sigma1_sq + snap.sigma2_sq, abs=1e-12)

    def test_sum_rule_along_evolution(self):
        state = pole_pair(10, 10)
        h = ts.build_quadratic_hamiltonian(ts.QuadraticCoefficient(1.0), state.dims)
        for t in np.linspace(0.0, 0.2, 9):
            snap = ts.variance_bounds(ts.evolve(state, h, float(t)))
            lhs = 2 * (snap.sigma1_sq + snap.sigma2_sq)
            assert abs(lhs - snap.sigma_plus_sq - snap.sigma_minus_sq) < 1e-9
            assert snap.sigma_minus_sq > -1e-9

    def test_direct_variance_oracle(self):
        # brute-force second moment of Jx1 +/- (Jx2 cos(phi) + Jy2 sin(phi))
        state = pole_pair(6, 6)
        h = ts.build_quadratic_hamiltonian(ts.QuadraticCoefficient(1.0), state.dims)
        jx1 = ts.embed_local(ts.angular_momentum_ops(6)[0], 0, state.dims).matrix
        jx2 = ts.embed_local(ts.angular_momentum_ops(6)[0], 1, state.dims).matrix
        jy2 = ts.embed_local(ts.angular_momentum_ops(6)[1], 1, state.dims).matrix
        for t in (0.05, 0.094, 0.17):
            evolved = ts.evolve(state, h, t)
            snap = ts.variance_bounds(evolved)
            rotated = jx2 * np.cos(snap.phi_opt) + jy2 * np.sin(snap.phi_opt)
            psi = evolved.amplitudes
            for sign, want in ((+1, snap.sigma_plus_sq), (-1, snap.sigma_minus_sq)):
                op = jx1 + sign * rotated
                direct = float(np.vdot(psi, op @ (op @ psi)).real)
                assert abs(direct - want) < 1e-9

    def test_requires_two_species(self):
        comp = ts.tensor_product([random_state(2, RNG)] * 3)
        with pytest.raises(ValueError):
            ts.variance_bounds(comp)

    def test_snapshot_validates_sum_rule(self):
        with pytest.raises(ValueError):
            ts.CorrelationSnapshot(1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0)


class TestMeanOccupation:
    def test_poles(self):
        assert ts.mean_occupation(ts.dicke_state(8, 0)) == pytest.approx(0.0, abs=1e-12)
        assert ts.mean_occupation(ts.dicke_state(8, 8)) == pytest.approx(8.0, abs=1e-12)

    def test_equator(self):
        state = ts.coherent_state(10, ts.BlochPoint(np.pi / 2, 1.0))
        assert ts.mean_occupation(state) == pytest.approx(5.0, abs=1e-9)
