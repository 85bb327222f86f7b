"""Bounded local minimization of the negative-overlap objective.

The learning step: for one (input, outcome) pair, find rotation angles x
minimizing -|<target| U(x) |conditional_B>|^2.  Overlaps and analytic
gradients are evaluated from a cached eigendecomposition of Jx, so a
single evaluation costs a handful of small matrix-vector products and no
matrix exponential.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.optimize

from .spins import PARAM_SIZES, SpinState, UnitaryParams, params_from_array, spin_matrices

DEFAULT_BOUND = np.pi


def wrap_angles(x: np.ndarray) -> np.ndarray:
    """Wrap angles into [-pi, pi); shifts by 2*pi change rotations only by
    a global phase, so the objective is unaffected."""
    return (np.asarray(x, dtype=float) + np.pi) % (2.0 * np.pi) - np.pi


@lru_cache(maxsize=None)
def _rotation_context(dim: int):
    """Eigensystem of Jx plus the cached matrices reused by every overlap.

    ky = W^dag Jy W and the eigenvalue sum/difference tables let both the
    two-axis overlap and its exact gradient run on vector operations only.
    """
    jx, jy, jz = spin_matrices(dim - 1)
    lam, w = np.linalg.eigh(jx)
    mz = jz.diagonal().real.copy()
    wd = w.conj().T.copy()
    ky = wd @ jy @ w
    lam_mean = 0.5 * (lam[:, None] + lam[None, :])
    lam_diff = 0.5 * (lam[:, None] - lam[None, :])
    for arr in (lam, mz, w, wd, ky, lam_mean, lam_diff):
        arr.setflags(write=False)
    return lam, w, wd, mz, ky, lam_mean, lam_diff


@dataclass(frozen=True)
class ObjectiveSpec:
    """Target/conditional pair and the rotation parameterization to search."""

    target: SpinState
    conditional_b: SpinState
    parameterization: str = "euler"

    def __post_init__(self):
        if self.target.dim != self.conditional_b.dim:
            raise ValueError(
                f"dimension mismatch: target {self.target.dim}, "
                f"conditional {self.conditional_b.dim}"
            )
        if self.parameterization not in PARAM_SIZES:
            raise ValueError(f"unknown parameterization {self.parameterization!r}")

    @property
    def n_angles(self) -> int:
        return PARAM_SIZES[self.parameterization]


@dataclass(frozen=True)
class OptimizerSettings:
    """Bounds, starting point and convergence knobs for minimize_bounded."""

    bounds: Optional[tuple] = None  # per-angle (lo, hi); default [-pi, pi]
    x0: Optional[tuple] = None
    tol_f: float = 1e-12
    tol_x: float = 1e-9
    max_iter: int = 200
    method: str = "l-bfgs-b"  # or "slsqp"
    use_gradient: bool = True

    def __post_init__(self):
        if self.tol_f <= 0 or self.tol_x <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.method not in ("l-bfgs-b", "slsqp"):
            raise ValueError(f"unknown method {self.method!r}")

    def resolved_bounds(self, n: int):
        if self.bounds is None:
            return [(-DEFAULT_BOUND, DEFAULT_BOUND)] * n
        bounds = [tuple(float(v) for v in b) for b in self.bounds]
        if len(bounds) != n or any(lo >= hi for lo, hi in bounds):
            raise ValueError(f"need {n} nonempty (lo, hi) bounds, got {self.bounds}")
        return bounds


def _overlap_euler(t, b, x, ctx, want_grad):
    lam, w, wd, mz, _, _, _ = ctx
    alpha, beta, gamma = x
    u = np.exp(-1j * alpha * mz) * b
    v = wd @ u
    ve = np.exp(-1j * beta * lam) * v
    y = w @ ve
    dg = np.exp(-1j * gamma * mz)
    z = np.vdot(t, dg * y)
    if not want_grad:
        return z, None
    dz_gamma = -1j * np.vdot(t, mz * (dg * y))
    dz_beta = -1j * np.vdot(t, dg * (w @ (lam * ve)))
    dz_alpha = -1j * np.vdot(t, dg * (w @ (np.exp(-1j * beta * lam) * (wd @ (mz * u)))))
    return z, np.array([dz_alpha, dz_beta, dz_gamma])


def _overlap_two_axis(t, b, x, ctx, want_grad):
    lam, w, wd, mz, ky, lam_mean, lam_diff = ctx
    tx, ty = x
    r = np.hypot(tx, ty)
    psi = np.arctan2(ty, tx)
    # theta_x*Jx + theta_y*Jy = r * D(psi) Jx D(psi)^dag with D = exp(-i*psi*Jz),
    # so the generator's eigensystem is (r*lam, D W): no fresh diagonalization
    rot = np.exp(1j * psi * mz)
    tv = wd @ (rot * t)
    bv = wd @ (rot * b)
    ph = np.exp(-1j * r * lam)
    z = np.vdot(tv, ph * bv)
    if not want_grad:
        return z, None
    # Frechet derivative of exp(-i G) via divided differences of e^{-i x};
    # sin(x)/x is exact on the diagonal and uniformly accurate elsewhere
    diff = r * lam_diff
    ratio = np.sinc(diff / np.pi)
    loewner = -1j * np.exp(-1j * r * lam_mean) * ratio
    outer = tv.conj()[:, None] * (loewner * bv[None, :])
    # in the rotated frame: V^dag Jx V = cos(psi)*diag(lam) - sin(psi)*ky
    #                       V^dag Jy V = sin(psi)*diag(lam) + cos(psi)*ky
    s_lam = np.vdot(tv, (np.diagonal(loewner) * lam) * bv)
    s_ky = (outer * ky).sum()
    c, s = np.cos(psi), np.sin(psi)
    return z, np.array([c * s_lam - s * s_ky, s * s_lam + c * s_ky])


def _evaluate_fast(spec: ObjectiveSpec, x, want_grad: bool):
    ctx = _rotation_context(spec.target.dim)
    t = spec.target.amplitudes
    b = spec.conditional_b.amplitudes
    if spec.parameterization == "euler":
        z, dz = _overlap_euler(t, b, x, ctx, want_grad)
    else:
        z, dz = _overlap_two_axis(t, b, x, ctx, want_grad)
    f = -(z.real**2 + z.imag**2)
    if not want_grad:
        return f, None
    return f, -2.0 * (np.conj(z) * dz).real


def _evaluate(spec: ObjectiveSpec, x, want_grad: bool):
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.n_angles,):
        raise ValueError(
            f"{spec.parameterization} parameterization expects "
            f"{spec.n_angles} angles, got shape {x.shape}"
        )
    return _evaluate_fast(spec, x, want_grad)


def objective_value(spec: ObjectiveSpec, x) -> float:
    """-|<target| U(x) |conditional_B>|^2, in [-1, 0]."""
    return _evaluate(spec, x, want_grad=False)[0]


def objective_gradient(spec: ObjectiveSpec, x) -> np.ndarray:
    """Analytic gradient of objective_value with respect to the angles."""
    return _evaluate(spec, x, want_grad=True)[1]


@dataclass(frozen=True)
class MinimizeOutcome:
    x: np.ndarray
    fun: float
    converged: bool
    n_evaluations: int


def minimize_bounded(spec: ObjectiveSpec, settings: OptimizerSettings = OptimizerSettings()) -> MinimizeOutcome:
    """Local bounded minimization of the overlap objective.

    Never raises on hitting max_iter; the best point found is returned
    with converged=False.  The result is deterministic for fixed inputs
    and never worse than the starting point.
    """
    n = spec.n_angles
    bounds = settings.resolved_bounds(n)
    if settings.x0 is None:
        x0 = np.zeros(n)
    else:
        x0 = wrap_angles(settings.x0)
        x0 = np.clip(x0, [b[0] for b in bounds], [b[1] for b in bounds])
    if x0.shape != (n,):
        raise ValueError(f"x0 must have {n} entries, got {x0.shape}")

    if settings.method == "l-bfgs-b":
        # the functional interface has much lower per-call overhead than
        # scipy.optimize.minimize, which matters over ~10^5 library pairs
        if settings.use_gradient:
            func = lambda x: _evaluate_fast(spec, x, True)
            approx = False
        else:
            func = lambda x: _evaluate_fast(spec, x, False)[0]
            approx = True
        x_res, f_res, info = scipy.optimize.fmin_l_bfgs_b(
            func,
            x0,
            approx_grad=approx,
            bounds=bounds,
            factr=settings.tol_f / np.finfo(float).eps,
            # step-size criterion realized through the projected gradient
            pgtol=settings.tol_x,
            epsilon=1e-7,
            maxiter=settings.max_iter,
        )
        converged = info["warnflag"] == 0
        nfev = int(info["funcalls"])
    else:
        if settings.use_gradient:
            fun = lambda x: _evaluate_fast(spec, x, True)
            jac = True
        else:
            fun = lambda x: _evaluate_fast(spec, x, False)[0]
            jac = None
        res = scipy.optimize.minimize(
            fun, x0, jac=jac, bounds=bounds, method="slsqp",
            options={"maxiter": settings.max_iter, "ftol": settings.tol_f, "eps": 1e-7},
        )
        x_res, f_res, converged = res.x, res.fun, bool(res.success)
        nfev = int(getattr(res, "nfev", 0))
    f0 = _evaluate_fast(spec, x0, False)[0]
    if f_res <= f0:
        x_best, f_best = np.asarray(x_res, dtype=float), float(f_res)
    else:  # safety net: keep monotonicity even if the line search misbehaved
        x_best, f_best = x0, f0
    return MinimizeOutcome(x=x_best, fun=f_best, converged=converged, n_evaluations=nfev)


@dataclass(frozen=True)
class CorrectionResult:
    """Learned correction for one (input, outcome) pair."""

    params: UnitaryParams
    fidelity: float
    converged: bool


def optimize_correction(
    target: SpinState,
    conditional_b: SpinState,
    parameterization: str = "euler",
    x0=None,
    settings: Optional[OptimizerSettings] = None,
) -> CorrectionResult:
    """Find correction angles maximizing the overlap with the target.

    Returned angles are wrapped into [-pi, pi]; a non-converged search is
    reported through the ``converged`` flag rather than an exception.
    """
    spec = ObjectiveSpec(target, conditional_b, parameterization)
    base = settings if settings is not None else OptimizerSettings()
    if x0 is not None:
        base = OptimizerSettings(
            bounds=base.bounds,
            x0=tuple(np.asarray(x0, dtype=float)),
            tol_f=base.tol_f,
            tol_x=base.tol_x,
            max_iter=base.max_iter,
            method=base.method,
            use_gradient=base.use_gradient,
        )
    out = minimize_bounded(spec, base)
    params = params_from_array(parameterization, wrap_angles(out.x))
    return CorrectionResult(params=params, fidelity=-out.fun, converged=out.converged)
