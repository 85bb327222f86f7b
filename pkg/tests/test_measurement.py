import numpy as np
import pytest

import telespin as ts
from telespin.measurement import OutcomeLabel
from properties import check_measurement_completeness, random_state

RNG = np.random.default_rng(21)


def ideal_qubit_joint(psi_c):
    """ABC state with the t = pi/4 entangled pair and a given C qubit."""
    sc = ts.Scenario(scheme="qubit", case="I", n_a=1, n_b=1, n_c=1)
    pair = ts.prepare_entangled_pair(sc)
    return ts.CompositeState((2, 2, 2), np.kron(pair.amplitudes, psi_c.amplitudes))


class TestBellBasis:
    def test_orthonormal_and_complete(self):
        basis = ts.bell_basis()
        gram = basis.vectors.conj() @ basis.vectors.T
        assert np.abs(gram - np.eye(4)).max() < 1e-12
        assert len(basis) == 4

    def test_entangled_pair_decomposition(self):
        sc = ts.Scenario(scheme="qubit", case="I", n_a=1, n_b=1, n_c=1)
        pair = ts.prepare_entangled_pair(sc)
        basis = ts.bell_basis()
        want = (1j / np.sqrt(2)) * (-basis.vectors[1] + basis.vectors[2])
        assert np.abs(pair.amplitudes - want).max() < 1e-12

    def test_ideal_teleportation_probabilities(self):
        # brute-force projection of every outcome for several inputs
        for theta, phi in ((0.0, 0.0), (1.0, 2.0), (2.7, 5.1)):
            joint = ideal_qubit_joint(ts.coherent_state(1, ts.BlochPoint(theta, phi)))
            records = ts.enumerate_outcomes(joint, ts.bell_basis())
            assert len(records) == 4
            for rec in records:
                assert rec.probability == pytest.approx(0.25, abs=1e-12)


class TestObservableEigenbasis:
    def test_jz_gives_dicke_order(self):
        _, _, jz = ts.angular_momentum_ops(4)
        values, vectors = ts.observable_eigenbasis(jz)
        assert np.allclose(values, [2, 1, 0, -1, -2])
        assert np.abs(vectors - np.eye(5)).max() < 1e-12

    def test_jx_qubit(self):
        jx, _, _ = ts.angular_momentum_ops(1)
        values, vectors = ts.observable_eigenbasis(jx)
        assert np.allclose(values, [0.5, -0.5])
        s = 1 / np.sqrt(2)
        assert np.abs(vectors[0] - [s, s]).max() < 1e-12
        assert np.abs(vectors[1] - [s, -s]).max() < 1e-12

    def test_spectral_reconstruction(self):
        jx, _, _ = ts.angular_momentum_ops(10)
        values, vectors = ts.observable_eigenbasis(jx)
        rebuilt = (vectors.T * values) @ vectors.conj()
        assert np.abs(rebuilt - jx.matrix).max() < 1e-10

    def test_phase_convention(self):
        _, jy, _ = ts.angular_momentum_ops(6)
        _, vectors = ts.observable_eigenbasis(jy)
        for row in vectors:
            lead = row[np.abs(row) > 1e-12][0]
            assert abs(lead.imag) < 1e-12 and lead.real > 0


class TestAcBasis:
    def test_outcome_count(self):
        basis = ts.ac_measurement_basis(10, 10)
        assert len(basis) == 121

    def test_completeness_and_orthonormality(self):
        basis = ts.ac_measurement_basis(3, 2)
        vecs = basis.vectors
        resolution = vecs.T @ vecs.conj()
        assert np.abs(resolution - np.eye(12)).max() < 1e-9
        gram = vecs.conj() @ vecs.T
        assert np.abs(gram - np.eye(12)).max() < 1e-10

    def test_labels_joint_indexing(self):
        basis = ts.ac_measurement_basis(2, 3)
        assert basis.labels[0] == OutcomeLabel.joint(0, 0)
        assert basis.labels[-1] == OutcomeLabel.joint(2, 3)

    def test_unknown_observable(self):
        with pytest.raises(ValueError):
            ts.ac_measurement_basis(2, 2, obs_a="jq")


class TestProjection:
    def test_product_state_returns_b_factor(self):
        # index bookkeeping oracle: A (x) B (x) C with known factors
        va = ts.coherent_state(2, ts.BlochPoint(0.7, 1.1)).amplitudes
        vc = ts.coherent_state(3, ts.BlochPoint(2.2, 0.4)).amplitudes
        psi_b = random_state(4, RNG)
        amps = np.kron(va, np.kron(psi_b.amplitudes, vc))
        joint = ts.CompositeState((3, 5, 4), amps)
        rec = ts.project_outcome(joint, np.kron(va, vc), OutcomeLabel.joint(0, 0))
        assert rec.probability == pytest.approx(1.0, abs=1e-12)
        overlap = abs(np.vdot(rec.conditional_b.amplitudes, psi_b.amplitudes))
        assert overlap == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_vector_flagged(self):
        psi_b = random_state(2, RNG)
        amps = np.kron([1, 0], np.kron(psi_b.amplitudes, [1, 0]))
        joint = ts.CompositeState((2, 3, 2), amps)
        rec = ts.project_outcome(joint, np.kron([0, 1], [0, 1]), OutcomeLabel.joint(1, 1))
        assert rec.negligible
        assert rec.probability == pytest.approx(0.0, abs=1e-15)
        assert rec.conditional_b is None

    def test_probabilities_sum_to_one(self):
        check_measurement_completeness(np.random.default_rng(2), pairs=((2, 3),))

    def test_su11_record_count(self):
        sc = ts.Scenario(scheme="su11", n_a=10, n_b=10, n_c=10)
        pair = ts.prepare_entangled_pair(sc)
        psi_c = ts.coherent_state(10, ts.BlochPoint(1.0, 0.5))
        records = ts.couple_and_measure(pair, psi_c, sc)
        assert len(records) == 121
        assert sum(r.probability for r in records) == pytest.approx(1.0, abs=1e-9)

    def test_records_sorted_by_label(self):
        sc = ts.Scenario(scheme="su11", n_a=2, n_b=2, n_c=2)
        pair = ts.prepare_entangled_pair(sc)
        records = ts.couple_and_measure(pair, ts.coherent_state(2, ts.BlochPoint(1.0, 0.0)), sc)
        keys = [r.label.sort_key for r in records]
        assert keys == sorted(keys)


class TestOutcomeLabel:
    def test_string_round_trip(self):
        for label in (OutcomeLabel.bell(3), OutcomeLabel.joint(4, 11)):
            assert OutcomeLabel.from_string(label.to_string()) == label

    def test_validation(self):
        with pytest.raises(ValueError):
            OutcomeLabel.bell(5)
        with pytest.raises(ValueError):
            OutcomeLabel.joint(-1, 0)
        with pytest.raises(ValueError):
            OutcomeLabel.from_string("weird:1")
