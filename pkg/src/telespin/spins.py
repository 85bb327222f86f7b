"""Finite-dimensional collective-spin algebra in the Dicke basis.

States live in the (N+1)-dimensional symmetric sector of N spin-1/2
particles (j = N/2).  Amplitude vectors are indexed by excitation number
k = 0..N, i.e. by m = j - k descending from the north pole |j, j>.
All operators are dense complex matrices with hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Sequence, Union

import numpy as np
from scipy.special import gammaln

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BlochPoint:
    """Direction on the Bloch sphere: theta in [0, pi], phi in [0, 2*pi)."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta!r}")
        if not 0.0 <= self.phi < 2.0 * np.pi:
            raise ValueError(f"phi must lie in [0, 2*pi), got {self.phi!r}")


@dataclass(frozen=True)
class SpinState:
    """Pure state of one spin ensemble, as amplitudes over the Dicke basis.

    Parameters
    ----------
    n_particles : int
        Ensemble size N >= 1; the state vector has N + 1 entries.
    amplitudes : array_like of complex
        Probability amplitudes indexed by excitation number k = j - m.
        Must be normalized to 1 within 1e-10.
    """

    n_particles: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("n_particles must be a positive integer")
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.n_particles + 1,):
            raise ValueError(
                f"expected {self.n_particles + 1} amplitudes, got shape {amps.shape}"
            )
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |psi| = {nrm!r}")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @property
    def dim(self) -> int:
        return self.n_particles + 1


@dataclass(frozen=True)
class CompositeState:
    """Pure state of several ensembles, row-major over the subsystem order.

    ``dims`` lists the per-subsystem dimensions (N_i + 1); the amplitude
    vector has length prod(dims) with the first subsystem varying slowest.
    """

    dims: tuple
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 2 or any(d < 2 for d in dims):
            raise ValueError(f"need >= 2 subsystems of dimension >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)
        amps = np.array(self.amplitudes, dtype=complex)
        total = int(np.prod(dims))
        if amps.shape != (total,):
            raise ValueError(f"expected {total} amplitudes, got shape {amps.shape}")
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |psi| = {nrm!r}")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per subsystem."""
        return self.amplitudes.reshape(self.dims)


@dataclass(frozen=True)
class HermitianOperator:
    """Dense Hermitian matrix (M = M^dag within 1e-12 entrywise)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        if np.abs(m - m.conj().T).max() > HERMITIAN_TOL:
            raise ValueError("matrix is not Hermitian within 1e-12")
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class UnitaryOperator:
    """Dense unitary matrix (U^dag U = 1 within 1e-10 entrywise)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        defect = np.abs(m.conj().T @ m - np.eye(m.shape[0])).max()
        if defect > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary within 1e-10 (defect {defect:g})")
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _check_angle(name: str, value: float) -> None:
    if not -np.pi <= value <= np.pi:
        raise ValueError(f"{name} must lie in [-pi, pi], got {value!r}")


@dataclass(frozen=True)
class EulerAngles:
    """zxz Euler triple for exp(-i*gamma*Jz) exp(-i*beta*Jx) exp(-i*alpha*Jz)."""

    alpha: float
    beta: float
    gamma: float
    kind = "euler"

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            _check_angle(name, getattr(self, name))

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma])


@dataclass(frozen=True)
class TwoAxisAngles:
    """Pair (theta_x, theta_y) for exp(-i*(theta_x*Jx + theta_y*Jy))."""

    theta_x: float
    theta_y: float
    kind = "two_axis"

    def __post_init__(self):
        for name in ("theta_x", "theta_y"):
            _check_angle(name, getattr(self, name))

    def as_array(self) -> np.ndarray:
        return np.array([self.theta_x, self.theta_y])


UnitaryParams = Union[EulerAngles, TwoAxisAngles]

#: angle-vector length per parameterization tag
PARAM_SIZES = {"euler": 3, "two_axis": 2}


def params_from_array(kind: str, x: Sequence[float]) -> UnitaryParams:
    """Build UnitaryParams from a flat angle vector ('euler' or 'two_axis')."""
    x = np.asarray(x, dtype=float)
    if kind == "euler":
        if x.shape != (3,):
            raise ValueError(f"euler parameterization needs 3 angles, got {x.shape}")
        return EulerAngles(*x)
    if kind == "two_axis":
        if x.shape != (2,):
            raise ValueError(f"two_axis parameterization needs 2 angles, got {x.shape}")
        return TwoAxisAngles(*x)
    raise ValueError(f"unknown parameterization {kind!r}")


@lru_cache(maxsize=None)
def spin_matrices(n_particles: int):
    """Raw (Jx, Jy, Jz) ndarrays for N particles in the descending-m basis."""
    if n_particles < 1:
        raise ValueError("n_particles must be >= 1")
    j = n_particles / 2.0
    m = j - np.arange(n_particles + 1)
    jz = np.diag(m.astype(complex))
    # J+ raises m, i.e. maps index k to k-1
    off = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    jp = np.zeros((n_particles + 1, n_particles + 1), dtype=complex)
    jp[np.arange(n_particles), np.arange(1, n_particles + 1)] = off
    jm = jp.conj().T
    jx = (jp + jm) / 2.0
    jy = (jp - jm) / 2.0j
    return _readonly(jx), _readonly(jy), _readonly(jz)


def angular_momentum_ops(n_particles: int):
    """Collective spin operators (Jx, Jy, Jz) for N particles.

    Returns
    -------
    tuple of HermitianOperator
        (N+1)-dimensional matrices obeying [Jx, Jy] = i Jz and cyclic,
        with Jz = diag(j, j-1, ..., -j).
    """
    jx, jy, jz = spin_matrices(n_particles)
    return (HermitianOperator(jx), HermitianOperator(jy), HermitianOperator(jz))


def hermitian_expm(h: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """exp(-1j * scale * h) for Hermitian h, via eigendecomposition.

    Unitary to roundoff for any scale, unlike truncated series methods.
    """
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * scale * w)) @ v.conj().T


def coherent_state(n_particles: int, point: BlochPoint) -> SpinState:
    """Spin coherent state |theta, phi> = exp(-i*phi*Jz) exp(-i*theta*Jy) |j, j>.

    The amplitude on k excitations is
    sqrt(C(N,k)) cos^(N-k)(theta/2) sin^k(theta/2) e^(-i*m*phi) with
    m = j - k, so that <J> points along (theta, phi) and the mean
    excitation is N sin^2(theta/2).
    """
    n = n_particles
    if n < 1:
        raise ValueError("n_particles must be >= 1")
    k = np.arange(n + 1)
    j = n / 2.0
    log_binom = 0.5 * (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))
    amps = (
        np.exp(log_binom)
        * np.cos(point.theta / 2.0) ** (n - k)
        * np.sin(point.theta / 2.0) ** k
        * np.exp(-1j * (j - k) * point.phi)
    )
    amps /= np.linalg.norm(amps)
    return SpinState(n, amps)


def dicke_state(n_particles: int, n_excitations: int) -> SpinState:
    """Dicke basis state |j, m> with m = j - n_excitations."""
    if not 0 <= n_excitations <= n_particles:
        raise ValueError(
            f"n_excitations must lie in [0, {n_particles}], got {n_excitations}"
        )
    amps = np.zeros(n_particles + 1, dtype=complex)
    amps[n_excitations] = 1.0
    return SpinState(n_particles, amps)


def tensor_product(states: Sequence[SpinState]) -> CompositeState:
    """Kronecker product of >= 2 ensemble states, in the given order."""
    if len(states) < 2:
        raise ValueError("tensor_product needs at least two states")
    amps = reduce(np.kron, [s.amplitudes for s in states])
    dims = tuple(s.dim for s in states)
    return CompositeState(dims, amps)


def _as_matrix(op) -> np.ndarray:
    return op.matrix if hasattr(op, "matrix") else np.asarray(op, dtype=complex)


def embed_local(op, slot: int, dims: Sequence[int]):
    """Place a single-subsystem operator at ``slot``, identity elsewhere.

    Kronecker placement matches CompositeState ordering (slot 0 slowest).
    Returns the same wrapper type as the input (or a raw ndarray).
    """
    dims = tuple(int(d) for d in dims)
    if not 0 <= slot < len(dims):
        raise ValueError(f"slot {slot} out of range for {len(dims)} subsystems")
    m = _as_matrix(op)
    if m.shape != (dims[slot], dims[slot]):
        raise ValueError(
            f"operator dimension {m.shape[0]} does not match dims[{slot}] = {dims[slot]}"
        )
    factors = [m if i == slot else np.eye(d, dtype=complex) for i, d in enumerate(dims)]
    full = reduce(np.kron, factors)
    if isinstance(op, HermitianOperator):
        return HermitianOperator(full)
    if isinstance(op, UnitaryOperator):
        return UnitaryOperator(full)
    return full


def partial_trace(state: CompositeState, keep) -> np.ndarray:
    """Reduced density matrix over the kept subsystems (ascending slot order).

    For a pure input the result is positive semidefinite with unit trace;
    it is computed as psi_mat psi_mat^dag without forming the full density
    matrix.
    """
    keep = sorted(set(int(i) for i in (keep if np.iterable(keep) else [keep])))
    if not keep or any(i < 0 or i >= state.n_subsystems for i in keep):
        raise ValueError(f"invalid subsystem indices {keep} for dims {state.dims}")
    drop = [i for i in range(state.n_subsystems) if i not in keep]
    tens = state.tensor().transpose(keep + drop)
    d_keep = int(np.prod([state.dims[i] for i in keep]))
    mat = tens.reshape(d_keep, -1)
    return mat @ mat.conj().T


def rotation_unitary(params: UnitaryParams, n_particles: int) -> UnitaryOperator:
    """Correction rotation for the given parameterization.

    Euler variant: exp(-i*gamma*Jz) exp(-i*beta*Jx) exp(-i*alpha*Jz).
    Two-axis variant: exp(-i*(theta_x*Jx + theta_y*Jy)).
    """
    jx, jy, jz = spin_matrices(n_particles)
    mz = jz.diagonal().real
    if isinstance(params, EulerAngles):
        u = hermitian_expm(jx, params.beta)
        u = np.exp(-1j * params.gamma * mz)[:, None] * u
        u = u * np.exp(-1j * params.alpha * mz)[None, :]
    elif isinstance(params, TwoAxisAngles):
        u = hermitian_expm(params.theta_x * jx + params.theta_y * jy)
    else:
        raise ValueError(f"unsupported parameterization {type(params).__name__}")
    return UnitaryOperator(u)


def apply_unitary(u, state: SpinState) -> SpinState:
    """Apply a unitary to a SpinState; the norm is preserved by construction."""
    m = _as_matrix(u)
    out = m @ state.amplitudes
    return SpinState(state.n_particles, out)


def expectation(op, state) -> float:
    """Real expectation value <psi| M |psi> of a Hermitian operator."""
    m = _as_matrix(op)
    psi = state.amplitudes
    return float(np.vdot(psi, m @ psi).real)


def fidelity(target: SpinState, candidate: SpinState) -> float:
    """Squared overlap |<target|candidate>|^2."""
    if target.dim != candidate.dim:
        raise ValueError(
            f"dimension mismatch: target {target.dim}, candidate {candidate.dim}"
        )
    return float(abs(np.vdot(target.amplitudes, candidate.amplitudes)) ** 2)
