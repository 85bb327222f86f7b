"""Measurement bases on the A-C pair and projection onto outcomes.

Two kinds of bases are built: the four-vector Bell basis for single-qubit
runs, and the product eigenbasis of commuting single-species observables
(Jx on A, Jy on C by default) for multi-particle runs.  Projecting the
joint ABC state onto a basis vector leaves a conditional B state.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .spins import CompositeState, SpinState, _as_matrix, spin_matrices

ORTHONORMAL_TOL = 1e-10
PROB_THRESHOLD = 1e-12


@dataclass(frozen=True)
class OutcomeLabel:
    """Label of a measurement outcome: Bell index 1..4 or a joint (iA, iC) pair."""

    kind: str
    indices: tuple

    def __post_init__(self):
        if self.kind not in ("bell", "joint"):
            raise ValueError(f"unknown outcome kind {self.kind!r}")
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    @classmethod
    def bell(cls, index: int) -> "OutcomeLabel":
        if not 1 <= index <= 4:
            raise ValueError(f"Bell index must be 1..4, got {index}")
        return cls("bell", (index,))

    @classmethod
    def joint(cls, i_a: int, i_c: int) -> "OutcomeLabel":
        if i_a < 0 or i_c < 0:
            raise ValueError(f"joint indices must be >= 0, got ({i_a}, {i_c})")
        return cls("joint", (i_a, i_c))

    @property
    def sort_key(self):
        return (self.kind, self.indices)

    def to_string(self) -> str:
        return f"{self.kind}:" + ",".join(str(i) for i in self.indices)

    @classmethod
    def from_string(cls, text: str) -> "OutcomeLabel":
        kind, _, rest = text.partition(":")
        idx = tuple(int(p) for p in rest.split(","))
        if kind == "bell":
            return cls.bell(idx[0])
        if kind == "joint":
            return cls.joint(*idx)
        raise ValueError(f"cannot parse outcome label {text!r}")


@dataclass(frozen=True)
class MeasurementBasis:
    """Complete orthonormal basis on A tensor C with one label per vector."""

    subsystem_dims: tuple
    vectors: np.ndarray  # rows of length dim_A * dim_C
    labels: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.subsystem_dims)
        object.__setattr__(self, "subsystem_dims", dims)
        vecs = np.array(self.vectors, dtype=complex)
        total = dims[0] * dims[1]
        if vecs.shape != (total, total):
            raise ValueError(
                f"basis must have {total} vectors of length {total}, got {vecs.shape}"
            )
        gram = vecs.conj() @ vecs.T
        if np.abs(gram - np.eye(total)).max() > ORTHONORMAL_TOL:
            raise ValueError("basis vectors are not orthonormal within 1e-10")
        if len(self.labels) != total:
            raise ValueError("one label per basis vector required")
        vecs.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class OutcomeRecord:
    """Projection result: outcome probability and the conditional B state."""

    label: OutcomeLabel
    probability: float
    conditional_b: Optional[SpinState]

    @property
    def negligible(self) -> bool:
        return self.conditional_b is None


@lru_cache(maxsize=None)
def bell_basis() -> MeasurementBasis:
    """The four Bell vectors on a pair of qubits.

    Ordering and phases are pinned by two requirements that must hold
    jointly: the pair entangled by the quadratic interaction at t = pi/4
    decomposes exactly as (i/sqrt2)(-Phi_2 + Phi_3), and the per-outcome
    exact correction angles line up index-by-index with the Euler-angle
    tables used for the qubit scenarios.  That forces

        Phi_1 = (|00> - |11>)/sqrt2
        Phi_2 = i(|01> - |10>)/sqrt2
        Phi_3 = -(|01> + |10>)/sqrt2
        Phi_4 = (|00> + |11>)/sqrt2

    (|0> = m=+1/2).  The phase factors on Phi_2/Phi_3 have no physical
    effect on probabilities, conditional states, or optimal corrections.
    """
    s = 1.0 / np.sqrt(2.0)
    vecs = np.array(
        [
            [s, 0, 0, -s],
            [0, 1j * s, -1j * s, 0],
            [0, -s, -s, 0],
            [s, 0, 0, s],
        ],
        dtype=complex,
    )
    labels = tuple(OutcomeLabel.bell(i) for i in (1, 2, 3, 4))
    return MeasurementBasis((2, 2), vecs, labels)


def observable_eigenbasis(op):
    """Eigenvalues and eigenvectors of a Hermitian observable.

    Returns
    -------
    (values, vectors)
        Eigenvalues sorted descending; ``vectors[k]`` is the matching
        eigenvector (row), with phase fixed so its first component larger
        than 1e-12 in modulus is real positive.
    """
    m = _as_matrix(op)
    if np.abs(m - m.conj().T).max() > 1e-12:
        raise ValueError("observable must be Hermitian")
    w, v = np.linalg.eigh(m)
    order = np.argsort(w)[::-1]
    w = w[order]
    vecs = v[:, order].T.copy()
    for row in vecs:
        nz = np.nonzero(np.abs(row) > 1e-12)[0]
        phase = row[nz[0]] / abs(row[nz[0]])
        row *= phase.conjugate()
    return w, vecs


_OBSERVABLE_INDEX = {"jx": 0, "jy": 1, "jz": 2}


@lru_cache(maxsize=None)
def ac_measurement_basis(
    n_a: int, n_c: int, obs_a: str = "jx", obs_c: str = "jy"
) -> MeasurementBasis:
    """Product eigenbasis of commuting observables on A and C.

    Vectors are kron(v_A, v_C) for every eigenvector pair, labelled
    joint(iA, iC) with indices ordered by descending eigenvalue; there are
    (N_A + 1)(N_C + 1) outcomes.
    """
    if n_a < 1 or n_c < 1:
        raise ValueError("particle numbers must be >= 1")
    try:
        ops_a = spin_matrices(n_a)[_OBSERVABLE_INDEX[obs_a]]
        ops_c = spin_matrices(n_c)[_OBSERVABLE_INDEX[obs_c]]
    except KeyError as err:
        raise ValueError(f"unknown observable {err.args[0]!r}; use jx|jy|jz") from None
    _, va = observable_eigenbasis(ops_a)
    _, vc = observable_eigenbasis(ops_c)
    vecs = np.einsum("am,cn->acmn", va, vc).reshape(
        (n_a + 1) * (n_c + 1), (n_a + 1) * (n_c + 1)
    )
    labels = tuple(
        OutcomeLabel.joint(ia, ic) for ia in range(n_a + 1) for ic in range(n_c + 1)
    )
    return MeasurementBasis((n_a + 1, n_c + 1), vecs, labels)


def _measured_amplitude_matrix(psi: CompositeState, measured=(0, 2)) -> np.ndarray:
    """Amplitudes reshaped to (d_measured, d_rest) with exactly one leftover slot."""
    measured = tuple(int(i) for i in measured)
    rest = [i for i in range(psi.n_subsystems) if i not in measured]
    if len(set(measured)) != len(measured) or any(
        i < 0 or i >= psi.n_subsystems for i in measured
    ):
        raise ValueError(f"invalid measured slots {measured} for dims {psi.dims}")
    if len(rest) != 1:
        raise ValueError("projection must leave exactly one unmeasured subsystem")
    tens = psi.tensor().transpose(list(measured) + rest)
    d_meas = int(np.prod([psi.dims[i] for i in measured]))
    return tens.reshape(d_meas, psi.dims[rest[0]]), psi.dims[rest[0]]


def project_outcome(
    psi: CompositeState,
    vector: np.ndarray,
    label: OutcomeLabel,
    measured=(0, 2),
    prob_threshold: float = PROB_THRESHOLD,
) -> OutcomeRecord:
    """Project the measured pair onto one basis vector.

    The probability is the squared norm of the partial inner product;
    below ``prob_threshold`` the record is flagged negligible and carries
    no conditional state.
    """
    mat, d_b = _measured_amplitude_matrix(psi, measured)
    if vector.shape != (mat.shape[0],):
        raise ValueError(
            f"basis vector length {vector.shape} does not match measured dims"
        )
    amp = vector.conj() @ mat
    prob = float(np.vdot(amp, amp).real)
    if prob < prob_threshold:
        return OutcomeRecord(label, prob, None)
    return OutcomeRecord(label, prob, SpinState(d_b - 1, amp / np.sqrt(prob)))


def enumerate_outcomes(
    psi: CompositeState,
    basis: MeasurementBasis,
    measured=(0, 2),
    prob_threshold: float = PROB_THRESHOLD,
):
    """Project onto every basis vector, ordered by outcome label.

    Probabilities over the basis sum to 1 for any normalized input.
    """
    mat, d_b = _measured_amplitude_matrix(psi, measured)
    if basis.vectors.shape[1] != mat.shape[0]:
        raise ValueError("basis does not match the measured subsystem dimensions")
    amps = basis.vectors.conj() @ mat
    probs = np.einsum("ij,ij->i", amps.conj(), amps).real
    records = []
    for label, p, row in zip(basis.labels, probs, amps):
        if p < prob_threshold:
            records.append(OutcomeRecord(label, float(p), None))
        else:
            records.append(
                OutcomeRecord(label, float(p), SpinState(d_b - 1, row / np.sqrt(p)))
            )
    records.sort(key=lambda r: r.label.sort_key)
    return records
