"""Two-species Hamiltonians, exact unitary evolution, and entanglement
diagnostics for the entangling stage of the protocol.

The interaction H_Q = chi[(Jx1+Jx2)^2 + (Jy1+Jy2)^2] generates the
correlations; the linear part H_L selects the initial poles.  Evolution is
by eigendecomposition (dimensions stay <= ~1500), never by time stepping.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass

import numpy as np

from .spins import (
    CompositeState,
    HermitianOperator,
    SpinState,
    _as_matrix,
    embed_local,
    expectation,
    spin_matrices,
)

SUM_RULE_TOL = 1e-9


@dataclass(frozen=True)
class LinearCoefficients:
    """Couplings (kx, ky, kz) per species for H_L = sum_i k_ai * J_ai."""

    species_1: tuple = (0.0, 0.0, 0.0)
    species_2: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("species_1", "species_2"):
            trip = tuple(float(c) for c in getattr(self, name))
            if len(trip) != 3 or not all(np.isfinite(trip)):
                raise ValueError(f"{name} must be three finite reals, got {trip}")
            object.__setattr__(self, name, trip)


@dataclass(frozen=True)
class QuadraticCoefficient:
    """Interaction strength chi of the quadratic Hamiltonian (default 1)."""

    chi: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.chi):
            raise ValueError(f"chi must be finite, got {self.chi!r}")


@dataclass(frozen=True)
class CorrelationSnapshot:
    """Second moments of the two-species state and their extremal combinations.

    sigma_plus_sq/sigma_minus_sq are the variances of
    Jx1 +/- (Jx2 cos(phi_opt) + Jy2 sin(phi_opt)); the sum rule
    2(sigma1^2 + sigma2^2) = sigma+^2 + sigma-^2 holds by construction.
    """

    sigma1_sq: float
    sigma2_sq: float
    cxx: float
    cxy: float
    sigma_plus_sq: float
    sigma_minus_sq: float
    phi_opt: float

    def __post_init__(self):
        lhs = 2.0 * (self.sigma1_sq + self.sigma2_sq)
        rhs = self.sigma_plus_sq + self.sigma_minus_sq
        if abs(lhs - rhs) > SUM_RULE_TOL:
            raise ValueError(f"variance sum rule violated: {lhs!r} vs {rhs!r}")
        if self.sigma_minus_sq < -SUM_RULE_TOL:
            raise ValueError(f"sigma_minus_sq negative: {self.sigma_minus_sq!r}")


def build_linear_hamiltonian(coeffs: LinearCoefficients, dims) -> HermitianOperator:
    """H_L = sum over species of kx*Jx + ky*Jy + kz*Jz, each on its slot."""
    dims = tuple(int(d) for d in dims)
    if len(dims) != 2:
        raise ValueError(f"expected two subsystems, got dims {dims}")
    total = np.zeros((dims[0] * dims[1],) * 2, dtype=complex)
    for slot, trip in enumerate((coeffs.species_1, coeffs.species_2)):
        ops = spin_matrices(dims[slot] - 1)
        for coeff, op in zip(trip, ops):
            if coeff != 0.0:
                total += coeff * embed_local(op, slot, dims)
    return HermitianOperator(total)


def build_quadratic_hamiltonian(chi: QuadraticCoefficient, dims) -> HermitianOperator:
    """H_Q = chi[(Jx1 + Jx2)^2 + (Jy1 + Jy2)^2] on the joint space."""
    dims = tuple(int(d) for d in dims)
    if len(dims) != 2:
        raise ValueError(f"expected two subsystems, got dims {dims}")
    jx1, jy1, _ = (embed_local(m, 0, dims) for m in spin_matrices(dims[0] - 1))
    jx2, jy2, _ = (embed_local(m, 1, dims) for m in spin_matrices(dims[1] - 1))
    sx = jx1 + jx2
    sy = jy1 + jy2
    return HermitianOperator(chi.chi * (sx @ sx + sy @ sy))


# read-mostly eigendecomposition cache, keyed by matrix content
_EIG_CACHE: dict = {}
_EIG_LOCK = threading.Lock()


def _eigh_cached(h: np.ndarray):
    key = (h.shape[0], hashlib.sha1(np.ascontiguousarray(h).tobytes()).digest())
    hit = _EIG_CACHE.get(key)
    if hit is None:
        w, v = np.linalg.eigh(h)
        with _EIG_LOCK:
            hit = _EIG_CACHE.setdefault(key, (w, v))
    return hit


def evolution_operator(h, t: float) -> np.ndarray:
    """exp(-i*H*t) as a dense matrix, reusing cached eigendecompositions."""
    m = _as_matrix(h)
    w, v = _eigh_cached(m)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def evolve(state, h, t: float):
    """Evolve a SpinState or CompositeState by exp(-i*H*t)."""
    m = _as_matrix(h)
    if m.shape[0] != state.amplitudes.shape[0]:
        raise ValueError(
            f"Hamiltonian dimension {m.shape[0]} does not match state "
            f"dimension {state.amplitudes.shape[0]}"
        )
    w, v = _eigh_cached(m)
    out = v @ (np.exp(-1j * w * t) * (v.conj().T @ state.amplitudes))
    out /= np.linalg.norm(out)
    if isinstance(state, CompositeState):
        return CompositeState(state.dims, out)
    return SpinState(state.n_particles, out)


def entanglement_entropy(state: CompositeState, partition) -> float:
    """Von Neumann entropy (nats) of the reduced state over ``partition``.

    Computed from the Schmidt coefficients of the pure bipartite split, so
    it is symmetric under swapping the partition with its complement.
    """
    keep = sorted(set(int(i) for i in (partition if np.iterable(partition) else [partition])))
    if not keep or any(i < 0 or i >= state.n_subsystems for i in keep):
        raise ValueError(f"invalid partition {partition} for dims {state.dims}")
    drop = [i for i in range(state.n_subsystems) if i not in keep]
    if not drop:
        return 0.0
    d_keep = int(np.prod([state.dims[i] for i in keep]))
    mat = state.tensor().transpose(keep + drop).reshape(d_keep, -1)
    s = np.linalg.svd(mat, compute_uv=False)
    p = s**2
    p = p[p > 1e-12]
    return float(-np.sum(p * np.log(p)))


def variance_bounds(state: CompositeState) -> CorrelationSnapshot:
    """Extremal variances of Jx1 +/- rotated species-2 quadrature.

    Uses raw second moments (the entangling evolution from pole states
    keeps all first moments at zero).  phi_opt is the rotation maximizing
    the variance split, atan2(<Jx1 Jy2>, <Jx1 Jx2>), with 0 when both
    correlators vanish.
    """
    if state.n_subsystems != 2:
        raise ValueError("variance_bounds expects a two-species state")
    dims = state.dims
    jx1 = embed_local(spin_matrices(dims[0] - 1)[0], 0, dims)
    jx2, jy2, _ = (embed_local(m, 1, dims) for m in spin_matrices(dims[1] - 1))
    psi = state.amplitudes

    def mom(m):
        return float(np.vdot(psi, m @ psi).real)

    s1 = mom(jx1 @ jx1)
    s2 = mom(jx2 @ jx2)
    cxx = mom(jx1 @ jx2)
    cxy = mom(jx1 @ jy2)
    if abs(cxx) < 1e-14 and abs(cxy) < 1e-14:
        phi = 0.0
    else:
        phi = float(np.arctan2(cxy, cxx))
    split = 2.0 * np.hypot(cxx, cxy)
    return CorrelationSnapshot(
        sigma1_sq=s1,
        sigma2_sq=s2,
        cxx=cxx,
        cxy=cxy,
        sigma_plus_sq=s1 + s2 + split,
        sigma_minus_sq=s1 + s2 - split,
        phi_opt=phi,
    )


def mean_occupation(state: SpinState) -> float:
    """Mean excitation number <j - Jz> = N/2 - <Jz>."""
    _, _, jz = spin_matrices(state.n_particles)
    return state.n_particles / 2.0 - expectation(jz, state)
