"""Euclidean inner products attached to a Minkowski submersion.

Every nonzero ``u`` carries the inner product ``g_u = Hess E(u)``.  The tangent
map of the lift at ``v`` is an isometry from ``(V2, g2_v)`` onto the
``g1_{h(v)}``-orthogonal complement of the kernel.  Derivatives of the lift
and of the subduced energy are taken by central finite differences here, so
these checks stay independent of the analytic formulas in :mod:`minksub`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ZeroVector
from .minksub import LinearSurjection, SolverConfig, lift, subduced_norm

FD_STEP = 1e-5
FD_STEP_SECOND = 1e-3


@dataclass(frozen=True)
class InnerProductAt:
    base_point: np.ndarray
    G: np.ndarray

    def __call__(self, x, y) -> float:
        return float(np.asarray(x) @ self.G @ np.asarray(y))


def inner_product_at(spec, u) -> InnerProductAt:
    u = np.asarray(u, dtype=float)
    return InnerProductAt(u.copy(), spec.hess_energy(u))


def _nonzero(v) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if not np.any(v):
        raise ZeroVector("the lift is only differentiable off the origin")
    return v


def lift_jacobian(spec, surj: LinearSurjection, v, fd_step: float = FD_STEP,
                  cfg: Optional[SolverConfig] = None) -> np.ndarray:
    """``d1 x d2`` central-difference Jacobian of the lift at ``v``."""
    v = _nonzero(v)
    step = fd_step * np.linalg.norm(v)
    J = np.empty((surj.d1, surj.d2))
    for i in range(surj.d2):
        e = np.zeros(surj.d2)
        e[i] = step
        J[:, i] = (lift(spec, surj, v + e, cfg).point - lift(spec, surj, v - e, cfg).point) / (2 * step)
    return J


def horizontality_defect(spec, surj: LinearSurjection, v, fd_step: float = FD_STEP,
                         cfg: Optional[SolverConfig] = None) -> float:
    """Worst normalised ``|g1_{h(v)}(J e_i, k_a)|`` over coordinate directions and kernel columns."""
    v = _nonzero(v)
    J = lift_jacobian(spec, surj, v, fd_step, cfg)
    G = spec.hess_energy(lift(spec, surj, v, cfg).point)
    if surj.K.shape[1] == 0:
        return 0.0
    gnorm = np.linalg.norm(G, 2)
    cross = np.abs(J.T @ G @ surj.K)
    denom = gnorm * np.outer(np.linalg.norm(J, axis=0), np.linalg.norm(surj.K, axis=0))
    return float(np.max(cross / denom))


def subduced_hessian(spec, surj: LinearSurjection, v, fd_step: float = FD_STEP_SECOND,
                     cfg: Optional[SolverConfig] = None) -> np.ndarray:
    """``g2_v``: central second differences of ``F2^2 / 2`` at ``v``."""
    v = _nonzero(v)
    h = fd_step * np.linalg.norm(v)
    n = surj.d2

    def E2(x):
        return 0.5 * subduced_norm(spec, surj, x, cfg) ** 2

    H = np.empty((n, n))
    E0 = E2(v)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        H[i, i] = (E2(v + ei) - 2 * E0 + E2(v - ei)) / h**2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            H[i, j] = H[j, i] = (E2(v + ei + ej) - E2(v + ei - ej) - E2(v - ei + ej) + E2(v - ei - ej)) / (4 * h**2)
    return H


def euclidean_submersion_defect(spec, surj: LinearSurjection, v, x, y,
                                cfg: Optional[SolverConfig] = None) -> float:
    """Normalised ``|g2_v(x, y) - g1_{h(v)}(J x, J y)|``.

    The normalisation divides by ``||g1||_2 |J x| |J y|``.
    """
    v = _nonzero(v)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    J = lift_jacobian(spec, surj, v, cfg=cfg)
    G1 = spec.hess_energy(lift(spec, surj, v, cfg).point)
    G2 = subduced_hessian(spec, surj, v, cfg=cfg)
    Jx, Jy = J @ x, J @ y
    lhs = x @ G2 @ y
    rhs = Jx @ G1 @ Jy
    denom = np.linalg.norm(G1, 2) * np.linalg.norm(Jx) * np.linalg.norm(Jy)
    return float(abs(lhs - rhs) / denom)
