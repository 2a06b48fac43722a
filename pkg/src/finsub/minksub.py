"""Nonlinear lifts through linear surjections and the subduced Minkowski norm.

For a surjection ``mu: V1 -> V2`` and a Minkowski norm ``F1`` on ``V1`` the lift
``h(v)`` is the unique minimiser of ``F1`` on the fibre ``mu^-1(v)`` and the
subduced norm is ``F2(v) = F1(h(v))``.  Fibres are parametrised as
``u(w) = R v + K w`` with ``K`` spanning the kernel and ``R`` a right inverse.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, MaxIterations, NonConvexEncountered, RankDeficient, ZeroVector
from .norms import VerificationReport, sphere_directions

_EXACT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LinearSurjection:
    """``mu`` as a ``d2 x d1`` matrix ``M`` with kernel basis ``K`` and right inverse ``R``."""

    M: np.ndarray
    K: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.M, dtype=float))
        d2, d1 = M.shape
        K = np.asarray(self.K, dtype=float).reshape(d1, d1 - d2)
        R = np.asarray(self.R, dtype=float).reshape(d1, d2)
        scale = max(1.0, np.abs(M).max())
        if np.abs(M @ K).max(initial=0.0) > _EXACT_TOL * scale:
            raise ValueError("columns of K are not in the kernel of M")
        if np.abs(M @ R - np.eye(d2)).max() > _EXACT_TOL * scale:
            raise ValueError("R is not a right inverse of M")
        if np.linalg.matrix_rank(np.hstack([R, K])) < d1:
            raise RankDeficient("[R | K] is not invertible")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "R", R)

    @property
    def d1(self) -> int:
        return self.M.shape[1]

    @property
    def d2(self) -> int:
        return self.M.shape[0]

    def __call__(self, u) -> np.ndarray:
        return self.M @ np.asarray(u, dtype=float)

    def to_json(self) -> dict:
        return {"M": self.M.tolist()}


def make_surjection(M) -> LinearSurjection:
    """Orthonormal kernel basis and minimum-norm right inverse of ``M``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    d2, d1 = M.shape
    if d2 > d1 or np.linalg.matrix_rank(M) < d2:
        raise RankDeficient(f"M ({d2}x{d1}) does not have full row rank")
    K = scipy.linalg.null_space(M)
    R = np.linalg.pinv(M)
    # polish so that M R = I and M K = 0 hold to rounding
    R = R + np.linalg.pinv(M) @ (np.eye(d2) - M @ R)
    K = K - np.linalg.pinv(M) @ (M @ K)
    return LinearSurjection(M, K, R)


def projection_surjection(d1: int, keep) -> LinearSurjection:
    """Coordinate projection onto the indices ``keep``, with exact coordinate bases."""
    keep = list(keep)
    drop = [i for i in range(d1) if i not in keep]
    eye = np.eye(d1)
    return LinearSurjection(eye[keep], eye[:, drop], eye[:, keep])


@dataclass
class SolverConfig:
    tol: float = 1e-11
    max_iter: int = 100
    armijo_c: float = 1e-4
    max_backtracks: int = 60

    @classmethod
    def from_json(cls, data: dict) -> "SolverConfig":
        extra = set(data) - {"tol", "max_iter"}
        if extra:
            raise ValueError(f"unexpected keys in solver config: {sorted(extra)}")
        return cls(tol=float(data.get("tol", 1e-11)), max_iter=int(data.get("max_iter", 100)))


@dataclass
class LiftSolution:
    point: np.ndarray
    value: float
    residual: float
    iterations: int
    converged: bool
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "point": self.point.tolist(),
            "value": float(self.value),
            "residual": float(self.residual),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "degenerate": bool(self.degenerate),
        }


def _fibre_newton(spec, surj: LinearSurjection, v_unit: np.ndarray, w0: np.ndarray, cfg: SolverConfig):
    """Damped Newton on ``w -> E1(R v + K w)``; returns (w, residual, iterations)."""
    R, K = surj.R, surj.K
    base = R @ v_unit
    w = w0.copy()

    def energy(w):
        return 0.5 * spec.eval(base + K @ w) ** 2

    E = energy(w)
    for it in range(cfg.max_iter + 1):
        u = base + K @ w
        if not spec.eval(u) > 0.0:
            # E = F^2/2 has spurious minima where F changes sign
            raise NonConvexEncountered(f"norm is not positive on the fibre (F = {spec.eval(u):.3g})")
        g = K.T @ spec.grad_energy(u)
        residual = float(np.abs(g).max())
        if residual <= cfg.tol * max(1.0, E):
            F = spec.eval(u)
            if np.abs(g).max() / F > 1e-6 * max(1.0, np.abs(spec.grad_energy(u)).max() / F):
                raise NonConvexEncountered("energy is stationary only because F vanishes on the fibre")
            return w, residual, it
        if it == cfg.max_iter:
            break
        H = K.T @ spec.hess_energy(u) @ K
        try:
            c = scipy.linalg.cho_factor(H)
        except np.linalg.LinAlgError as exc:
            raise NonConvexEncountered("reduced Hessian is not positive definite") from exc
        p = -scipy.linalg.cho_solve(c, g)
        slope = float(g @ p)
        if not slope < 0.0:
            raise NonConvexEncountered("Newton direction is not a descent direction")
        t = 1.0
        for _ in range(cfg.max_backtracks):
            E_new = energy(w + t * p)
            if E_new <= E + cfg.armijo_c * t * slope:
                break
            t *= 0.5
        else:
            # Armijo can stall at rounding level next to the minimiser; take
            # the full step if it does not increase the energy beyond rounding.
            t = 1.0
            E_new = energy(w + p)
            if E_new > E + 1e-15 * max(1.0, abs(E)):
                raise MaxIterations("line search failed to find sufficient decrease")
        w = w + t * p
        E = E_new
    raise MaxIterations(f"lift did not converge in {cfg.max_iter} iterations (residual {residual:.3g})")


def lift(spec, surj: LinearSurjection, v, cfg: Optional[SolverConfig] = None, w0=None) -> LiftSolution:
    """The fibre minimiser ``h(v)`` of ``spec`` over ``{u : mu(u) = v}``.

    The problem is solved for ``v / |v|`` and rescaled, which is exact by
    positive homogeneity of the lift.  ``w0`` sets the initial kernel
    coordinates of the normalised problem (default zero).
    """
    cfg = cfg or SolverConfig()
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (surj.d2,):
        raise DimensionMismatch(f"v must have length {surj.d2}, got shape {v.shape}")
    if spec.dim != surj.d1:
        raise DimensionMismatch(f"norm has dimension {spec.dim}, surjection domain is {surj.d1}")
    scale = float(np.linalg.norm(v))
    if scale == 0.0:
        return LiftSolution(np.zeros(surj.d1), 0.0, 0.0, 0, True, degenerate=True)
    v_unit = v / scale
    k = surj.d1 - surj.d2
    if k == 0:
        point = surj.R @ v
        return LiftSolution(point, spec.eval(point), 0.0, 0, True)
    w_start = np.zeros(k) if w0 is None else np.asarray(w0, dtype=float).reshape(k)
    w, residual, iterations = _fibre_newton(spec, surj, v_unit, w_start, cfg)
    point = scale * (surj.R @ v_unit + surj.K @ w)
    return LiftSolution(point, spec.eval(point), residual, iterations, True)


def subduced_norm(spec, surj: LinearSurjection, v, cfg: Optional[SolverConfig] = None) -> float:
    """``F2(v) = inf{F1(u) : mu(u) = v}``, attained at the lift."""
    return lift(spec, surj, v, cfg).value


def homogeneity_defect(spec, surj: LinearSurjection, v, lam: float, cfg: Optional[SolverConfig] = None) -> float:
    """Relative defect ``|h(lam v) - lam h(v)| / (lam |h(v)|)``."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if not np.any(v):
        raise ZeroVector("homogeneity is tested off the origin")
    h1 = lift(spec, surj, v, cfg).point
    h2 = lift(spec, surj, lam * v, cfg).point
    return float(np.linalg.norm(h2 - lam * h1) / (lam * np.linalg.norm(h1)))


@dataclass(eq=False)
class SubducedNorm:
    """The subduced norm as a norm-like object with analytic derivatives.

    The gradient follows from stationarity on the fibre,
    ``grad E2(v) = R^T grad E1(h(v))``, and the Hessian is
    ``J^T g1 J`` with ``J = (I - K (K^T g1 K)^-1 K^T g1) R`` the derivative of
    the lift.  Instances can be passed to :func:`verify_minkowski`.
    """

    spec: object
    surj: LinearSurjection
    cfg: SolverConfig = field(default_factory=SolverConfig)

    @property
    def dim(self) -> int:
        return self.surj.d2

    def lift(self, v) -> LiftSolution:
        return lift(self.spec, self.surj, v, self.cfg)

    def eval(self, v) -> float:
        return self.lift(v).value

    def eval_many(self, V) -> np.ndarray:
        return np.array([self.eval(v) for v in np.asarray(V, dtype=float)])

    __call__ = eval

    def grad_energy(self, v) -> np.ndarray:
        sol = self.lift(v)
        if sol.degenerate:
            raise ZeroVector("derivatives of a Minkowski norm are undefined at the origin")
        return self.surj.R.T @ self.spec.grad_energy(sol.point)

    def lift_jacobian(self, v) -> np.ndarray:
        sol = self.lift(v)
        if sol.degenerate:
            raise ZeroVector("the lift is not differentiable at the origin")
        G = self.spec.hess_energy(sol.point)
        K, R = self.surj.K, self.surj.R
        if K.shape[1] == 0:
            return R.copy()
        return R - K @ np.linalg.solve(K.T @ G @ K, K.T @ G @ R)

    def hess_energy(self, v) -> np.ndarray:
        sol = self.lift(v)
        if sol.degenerate:
            raise ZeroVector("derivatives of a Minkowski norm are undefined at the origin")
        J = self.lift_jacobian(v)
        H = J.T @ self.spec.hess_energy(sol.point) @ J
        return 0.5 * (H + H.T)


def brute_force_subduced(spec, surj: LinearSurjection, v, grid_radius: float = 5.0,
                         grid_steps: int = 2001, refinements: int = 10) -> float:
    """Minimise ``F1`` over the fibre by exhaustive grid search, then pattern refinement.

    Independent of the Newton solver: a full grid over kernel coordinates in
    ``[-grid_radius, grid_radius]^k``, followed by ``refinements`` passes that
    halve the spacing on a 3^k stencil around the incumbent.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    base = surj.R @ v
    K = surj.K
    k = K.shape[1]
    if k == 0:
        return spec.eval(base)
    axis = np.linspace(-grid_radius, grid_radius, grid_steps)
    best_val, best_w = np.inf, None
    if k == 1:
        chunks = [axis[:, None]]
    else:
        # one chunk per value of the first coordinate bounds memory
        rest = np.array(list(itertools.product(axis, repeat=k - 1)))
        chunks = (np.hstack([np.full((rest.shape[0], 1), a), rest]) for a in axis)
    for W in chunks:
        vals = spec.eval_many(base + W @ K.T)
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_w = float(vals[i]), W[i].copy()
    spacing = axis[1] - axis[0] if grid_steps > 1 else grid_radius
    stencil = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=k)))
    for _ in range(refinements):
        spacing *= 0.5
        # walk at this spacing until the incumbent is the stencil minimum
        while True:
            W = best_w + spacing * stencil
            vals = spec.eval_many(base + W @ K.T)
            i = int(np.argmin(vals))
            if vals[i] < best_val:
                best_val, best_w = float(vals[i]), W[i].copy()
            else:
                break
    return best_val


def verify_submersion(spec1, surj: LinearSurjection, spec2, n_samples: int = 200, seed: int = 0,
                      tol: float = 1e-9, cfg: Optional[SolverConfig] = None) -> VerificationReport:
    """Check that ``mu: (V1, spec1) -> (V2, spec2)`` is a Minkowski submersion.

    (a) ``spec2`` equals the subduced norm on sampled directions of V2;
    (b) ``spec2(mu(u)) <= spec1(u)`` on sampled ``u`` in V1.
    """
    if spec2.dim != surj.d2:
        raise DimensionMismatch(f"spec2 has dimension {spec2.dim}, expected {surj.d2}")
    V = np.vstack([np.eye(surj.d2), -np.eye(surj.d2), sphere_directions(surj.d2, n_samples, seed)])
    worst_match, match_witness = 0.0, None
    for v in V:
        f2 = spec2.eval(v)
        sub = subduced_norm(spec1, surj, v, cfg)
        err = abs(f2 - sub) / max(1.0, abs(sub))
        if err > worst_match:
            worst_match, match_witness = err, v
    U = sphere_directions(surj.d1, n_samples, seed + 1)
    worst_ineq, ineq_witness = -np.inf, None
    for u in U:
        excess = (spec2.eval(surj(u)) - spec1.eval(u)) / max(1.0, spec1.eval(u))
        if excess > worst_ineq:
            worst_ineq, ineq_witness = excess, u
    ok_match = worst_match <= tol
    ok_ineq = worst_ineq <= tol
    witness = None
    if not ok_match:
        witness = match_witness
    elif not ok_ineq:
        witness = ineq_witness
    return VerificationReport(
        passed=bool(ok_match and ok_ineq),
        samples_used=int(V.shape[0] + U.shape[0]),
        failure_witness=None if witness is None else np.asarray(witness, dtype=float),
        details={"worst_value_mismatch": float(worst_match), "worst_inequality_excess": float(worst_ineq)},
    )
