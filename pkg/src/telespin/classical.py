"""Closed-form classical (no-entanglement) fidelity benchmarks.

These are the measure-and-prepare bounds the learned protocol must beat:
the coherent-state bound (mean_n + 1)/(2*mean_n + 1), the qubit limit 2/3,
and the heterodyne-analogue Dicke-state bound.  Factorials go through
log-gamma so large N stays finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln


@dataclass(frozen=True)
class BenchmarkCurve:
    """Sampled classical-fidelity curve for CSV emission and plotting."""

    kind: str
    abscissa: tuple
    values: tuple
    abscissa_name: str = "mean_n"

    def __post_init__(self):
        if len(self.abscissa) != len(self.values):
            raise ValueError("abscissa and values must have equal length")
        if any(not 0.0 < v <= 1.0 for v in self.values):
            raise ValueError("classical fidelities must lie in (0, 1]")


def classical_fidelity_coherent(mean_n: float) -> float:
    """Best classical mean fidelity for coherent inputs with mean occupation mean_n.

    Decreases from 1 at mean_n = 0 toward the 1/2 asymptote.
    """
    if mean_n < 0:
        raise ValueError(f"mean occupation must be >= 0, got {mean_n!r}")
    return (mean_n + 1.0) / (2.0 * mean_n + 1.0)


def vmf_mean_occupation(n_particles: int, beta: float) -> float:
    """Mean excitation (N/2)(1 - coth(beta) + 1/beta) under the sphere prior.

    beta = 0 is the uniform limit N/2; small |beta| uses the series
    expansion 1 - beta/3 + beta^3/45 to avoid catastrophic cancellation.
    """
    if n_particles < 1:
        raise ValueError("n_particles must be >= 1")
    half = n_particles / 2.0
    if beta == 0.0:
        return half
    if abs(beta) < 1e-4:
        return half * (1.0 - beta / 3.0 + beta**3 / 45.0)
    return half * (1.0 - 1.0 / np.tanh(beta) + 1.0 / beta)


def vmf_beta_for_mean_occupation(n_particles: int, mean_n: float) -> float:
    """Inverse of vmf_mean_occupation on beta > 0 (north-pole-peaked priors).

    Only targets below the uniform limit N/2 are reachable with positive
    beta; the root is bracketed and solved to 1e-12.
    """
    from scipy.optimize import brentq

    half = n_particles / 2.0
    if not 0.0 < mean_n < half:
        raise ValueError(f"mean_n must lie in (0, {half}), got {mean_n!r}")
    lo, hi = 1e-6, 10.0
    while vmf_mean_occupation(n_particles, hi) > mean_n:
        hi *= 2.0
        if hi > 1e9:
            raise ValueError(f"cannot bracket beta for mean_n = {mean_n!r}")
    return float(
        brentq(lambda b: vmf_mean_occupation(n_particles, b) - mean_n, lo, hi, xtol=1e-12)
    )


def dicke_conditional_prob(n_particles: int, n_excitations: int, theta: float) -> float:
    """Heterodyne-analogue density of detecting |theta, phi> given Dicke level n.

    (N+1)!/(4*pi*n!*(N-n)!) * cos^(2n)(theta/2) * sin^(2(N-n))(theta/2);
    phi-independent and normalized against the sin(theta) measure.
    """
    n, k = n_particles, n_excitations
    if not 0 <= k <= n:
        raise ValueError(f"n_excitations must lie in [0, {n}], got {k}")
    if not 0.0 <= theta <= np.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta!r}")
    log_pref = gammaln(n + 2) - gammaln(k + 1) - gammaln(n - k + 1) - np.log(4 * np.pi)
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return float(np.exp(log_pref) * c ** (2 * k) * s ** (2 * (n - k)))


def dicke_classical_fidelity(n_particles: int, n_excitations: int) -> float:
    """Best classical mean fidelity for the Dicke level n_excitations.

    (N+1)! N! (2n)! (2N-2n)! / ([n!(N-n)!]^2 (2N+1)!), evaluated in
    log space; symmetric under n <-> N-n.
    """
    n, k = n_particles, n_excitations
    if not 0 <= k <= n:
        raise ValueError(f"n_excitations must lie in [0, {n}], got {k}")
    log_f = (
        gammaln(n + 2)
        + gammaln(n + 1)
        + gammaln(2 * k + 1)
        + gammaln(2 * (n - k) + 1)
        - 2.0 * (gammaln(k + 1) + gammaln(n - k + 1))
        - gammaln(2 * n + 2)
    )
    return float(np.exp(log_f))


def qubit_classical_limit() -> float:
    """Classical teleportation fidelity limit for a single qubit."""
    return 2.0 / 3.0


def fcl_curve(mean_n_values) -> BenchmarkCurve:
    """classical_fidelity_coherent sampled over a mean-occupation grid."""
    xs = tuple(float(x) for x in mean_n_values)
    return BenchmarkCurve(
        kind="fcl", abscissa=xs, values=tuple(classical_fidelity_coherent(x) for x in xs)
    )


def dicke_curve(n_particles: int, levels=None) -> BenchmarkCurve:
    """dicke_classical_fidelity sampled over excitation levels."""
    if levels is None:
        levels = range(n_particles + 1)
    ks = tuple(int(k) for k in levels)
    return BenchmarkCurve(
        kind="dicke",
        abscissa=ks,
        values=tuple(dicke_classical_fidelity(n_particles, k) for k in ks),
        abscissa_name="n_excitations",
    )
