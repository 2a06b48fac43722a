"""Closed-form Minkowski norm candidates and numerical certification of the axioms.

Three families are supported::

    euclidean     F(u) = sqrt(u^T A u)
    randers       F(u) = sqrt(u^T A u) + b.u
    quartic_root  F(u) = (sum_j (u^T Q_j u)^2)^(1/4)

All derivatives are taken of the energy E = F^2 / 2, whose Hessian is the
fundamental tensor g_u.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidNorm, ZeroVector

FAMILIES = ("euclidean", "randers", "quartic_root")

_SYM_TOL = 1e-12


def _as_vector(u, dim: int) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.shape[0] != dim:
        raise DimensionMismatch(f"expected a vector of length {dim}, got shape {u.shape}")
    return u


def _check_nonzero(u: np.ndarray) -> None:
    if not np.any(u):
        raise ZeroVector("derivatives of a Minkowski norm are undefined at the origin")


@dataclass(frozen=True, eq=False)
class NormSpec:
    """A Minkowski-norm candidate from one of the closed-form families.

    Construction validates shapes, symmetry, and the definiteness needed for
    F to be positive off the origin (A positive definite, sum of Q_j positive
    definite).  The Randers bound ``b^T A^-1 b < 1`` is *not* enforced here so
    that counterexamples can be built and rejected by :func:`verify_minkowski`;
    see :meth:`structural_problems`.
    """

    family: str
    A: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None
    Q: Optional[np.ndarray] = None
    dim: int = field(init=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidNorm(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family in ("euclidean", "randers"):
            if self.A is None:
                raise InvalidNorm(f"{self.family} norm needs a matrix A")
            A = np.array(self.A, dtype=float)
            if A.ndim != 2 or A.shape[0] != A.shape[1]:
                raise InvalidNorm(f"A must be square, got shape {A.shape}")
            if not np.allclose(A, A.T, rtol=0, atol=_SYM_TOL):
                raise InvalidNorm("A must be symmetric")
            A = 0.5 * (A + A.T)
            if np.linalg.eigvalsh(A).min() <= 0:
                raise InvalidNorm("A must be positive definite")
            object.__setattr__(self, "A", A)
            object.__setattr__(self, "dim", A.shape[0])
            if self.family == "randers":
                if self.b is None:
                    raise InvalidNorm("randers norm needs a covector b")
                b = np.array(self.b, dtype=float)
                if b.shape != (A.shape[0],):
                    raise InvalidNorm(f"b must have length {A.shape[0]}, got shape {b.shape}")
                object.__setattr__(self, "b", b)
            else:
                object.__setattr__(self, "b", None)
            object.__setattr__(self, "Q", None)
        else:
            if self.Q is None:
                raise InvalidNorm("quartic_root norm needs a list of quadratic forms Q")
            Q = np.array(self.Q, dtype=float)
            if Q.ndim == 2:
                Q = Q[None]
            if Q.ndim != 3 or Q.shape[1] != Q.shape[2] or Q.shape[0] == 0:
                raise InvalidNorm(f"Q must be a non-empty stack of square matrices, got {Q.shape}")
            if not np.allclose(Q, Q.transpose(0, 2, 1), rtol=0, atol=_SYM_TOL):
                raise InvalidNorm("every Q_j must be symmetric")
            Q = 0.5 * (Q + Q.transpose(0, 2, 1))
            scale = max(1.0, np.abs(Q).max())
            if np.linalg.eigvalsh(Q).min() < -1e-12 * scale:
                raise InvalidNorm("every Q_j must be positive semidefinite")
            if np.linalg.eigvalsh(Q.sum(axis=0)).min() <= 1e-14 * scale:
                raise InvalidNorm("sum of the Q_j must be positive definite")
            object.__setattr__(self, "Q", Q)
            object.__setattr__(self, "A", None)
            object.__setattr__(self, "b", None)
            object.__setattr__(self, "dim", Q.shape[1])

    # -- constructors -----------------------------------------------------

    @classmethod
    def euclidean(cls, A) -> "NormSpec":
        return cls("euclidean", A=A)

    @classmethod
    def randers(cls, A, b) -> "NormSpec":
        return cls("randers", A=A, b=b)

    @classmethod
    def quartic_root(cls, Q: Sequence) -> "NormSpec":
        return cls("quartic_root", Q=Q)

    def structural_problems(self) -> list[str]:
        """Violated structural invariants that construction does not reject."""
        problems = []
        if self.family == "randers":
            beta = float(self.b @ np.linalg.solve(self.A, self.b))
            if beta >= 1.0:
                problems.append(f"randers drift too large: b^T A^-1 b = {beta:.6g} >= 1")
        return problems

    # -- evaluation -------------------------------------------------------

    def eval(self, u) -> float:
        u = _as_vector(u, self.dim)
        return float(self.eval_many(u[None])[0])

    def eval_many(self, U) -> np.ndarray:
        """Vectorised evaluation over the rows of ``U`` (shape ``(n, dim)``)."""
        U = np.asarray(U, dtype=float)
        if U.ndim != 2 or U.shape[1] != self.dim:
            raise DimensionMismatch(f"expected shape (n, {self.dim}), got {U.shape}")
        if self.family == "quartic_root":
            q = np.einsum("ni,jik,nk->nj", U, self.Q, U)
            return np.sqrt(np.sqrt(np.sum(q * q, axis=1)))
        alpha = np.sqrt(np.maximum(np.einsum("ni,ik,nk->n", U, self.A, U), 0.0))
        if self.family == "randers":
            return alpha + U @ self.b
        return alpha

    def __call__(self, u) -> float:
        return self.eval(u)

    def energy(self, u) -> float:
        return 0.5 * self.eval(u) ** 2

    def grad_energy(self, u) -> np.ndarray:
        u = _as_vector(u, self.dim)
        _check_nonzero(u)
        if self.family == "euclidean":
            return self.A @ u
        if self.family == "randers":
            Au = self.A @ u
            alpha = np.sqrt(u @ Au)
            F = alpha + self.b @ u
            return F * (Au / alpha + self.b)
        q, P, S = self._quartic_parts(u)
        return P / np.sqrt(S)

    def grad_norm(self, u) -> np.ndarray:
        """Gradient of F itself, ``grad E / F``."""
        return self.grad_energy(u) / self.eval(u)

    def hess_energy(self, u) -> np.ndarray:
        u = _as_vector(u, self.dim)
        _check_nonzero(u)
        if self.family == "euclidean":
            return self.A.copy()
        if self.family == "randers":
            Au = self.A @ u
            alpha = np.sqrt(u @ Au)
            F = alpha + self.b @ u
            dF = Au / alpha + self.b
            d2F = (self.A - np.outer(Au, Au) / alpha**2) / alpha
            H = np.outer(dF, dF) + F * d2F
        else:
            q, P, S = self._quartic_parts(u)
            Qu = np.einsum("jik,k->ji", self.Q, u)
            dP = np.einsum("j,jik->ik", q, self.Q) + 2.0 * np.einsum("ji,jk->ik", Qu, Qu)
            H = dP / np.sqrt(S) - 2.0 * np.outer(P, P) / S**1.5
        return 0.5 * (H + H.T)

    def _quartic_parts(self, u):
        Qu = np.einsum("jik,k->ji", self.Q, u)
        q = Qu @ u
        S = float(q @ q)
        if S <= 0.0:
            raise ZeroVector("quartic-root norm vanishes at this vector")
        P = q @ Qu
        return q, P, S

    # -- serialisation ----------------------------------------------------

    def to_json(self) -> dict:
        out: dict = {"family": self.family}
        if self.A is not None:
            out["A"] = self.A.tolist()
        if self.b is not None:
            out["b"] = self.b.tolist()
        if self.Q is not None:
            out["Q"] = self.Q.tolist()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "NormSpec":
        if not isinstance(data, dict) or "family" not in data:
            raise InvalidNorm("norm JSON must be an object with a 'family' key")
        extra = set(data) - {"family", "A", "b", "Q"}
        if extra:
            raise InvalidNorm(f"unexpected keys in norm JSON: {sorted(extra)}")
        return cls(data["family"], A=data.get("A"), b=data.get("b"), Q=data.get("Q"))


# Module-level aliases so callers can use either style.

def eval(spec, u) -> float:  # noqa: A001 - mirrors the operation name
    return spec.eval(u)


def grad_energy(spec, u) -> np.ndarray:
    return spec.grad_energy(u)


def hess_energy(spec, u) -> np.ndarray:
    return spec.hess_energy(u)


def fundamental_defect(spec, u, x) -> float:
    """``x . grad F(u) - F(x)``; non-positive for a Minkowski norm, zero iff x = a*u, a > 0."""
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    _check_nonzero(u)
    _check_nonzero(x)
    return float(x @ spec.grad_norm(u) - spec.eval(x))


@dataclass
class VerificationReport:
    passed: bool
    min_hessian_eigenvalue: float = float("nan")
    worst_homogeneity_defect: float = 0.0
    worst_triangle_defect: float = 0.0
    worst_fundamental_defect: float = 0.0
    samples_used: int = 0
    failure_witness: Optional[np.ndarray] = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "passed": bool(self.passed),
            "min_hessian_eigenvalue": float(self.min_hessian_eigenvalue),
            "worst_homogeneity_defect": float(self.worst_homogeneity_defect),
            "worst_triangle_defect": float(self.worst_triangle_defect),
            "worst_fundamental_defect": float(self.worst_fundamental_defect),
            "samples_used": int(self.samples_used),
            "failure_witness": None if self.failure_witness is None else np.asarray(self.failure_witness).tolist(),
            "details": {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in self.details.items()},
        }


def sphere_directions(dim: int, n: int, seed: int) -> np.ndarray:
    """``n`` Euclidean-uniform unit vectors in ``R^dim`` from a seeded generator."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, dim))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


HOMOGENEITY_FACTORS = (0.5, 2.0, 7.0)


def verify_minkowski(spec, n_samples: int = 500, seed: int = 0, tol: float = 1e-9) -> VerificationReport:
    """Sample the Minkowski axioms on the unit sphere and report the worst defects.

    ``spec`` may be any object with ``dim``, ``eval``, ``grad_energy`` and
    ``hess_energy`` (e.g. a subduced norm).  The signed coordinate axes are
    checked in addition to the ``n_samples`` random directions.  Failures are
    reported, never raised.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    d = spec.dim
    axes = np.vstack([np.eye(d), -np.eye(d)])
    U = np.vstack([axes, sphere_directions(d, n_samples, seed)])
    n = U.shape[0]
    rng = np.random.default_rng(seed + 1)

    values = np.array([spec.eval(u) for u in U])
    witness = None
    positive = bool(np.all(values > 0))
    if not positive:
        witness = U[int(np.argmin(values))].copy()

    worst_hom = 0.0
    for lam in HOMOGENEITY_FACTORS:
        scaled = np.array([spec.eval(lam * u) for u in U])
        denom = np.maximum(np.abs(lam * values), np.finfo(float).tiny)
        worst_hom = max(worst_hom, float(np.max(np.abs(scaled - lam * values) / denom)))

    min_eig = np.inf
    worst_eig_u = None
    for u in U:
        ev = float(np.linalg.eigvalsh(spec.hess_energy(u)).min())
        if ev < min_eig:
            min_eig, worst_eig_u = ev, u

    # triangle inequality on random pairs with random positive weights
    partner = rng.permutation(n)
    weights = rng.uniform(0.1, 3.0, size=(n, 2))
    worst_tri = -np.inf
    worst_tri_u = None
    for i in range(n):
        x = weights[i, 0] * U[i]
        y = weights[i, 1] * U[partner[i]]
        fx, fy = spec.eval(x), spec.eval(y)
        defect = (spec.eval(x + y) - fx - fy) / max(abs(fx) + abs(fy), 1.0)
        if defect > worst_tri:
            worst_tri, worst_tri_u = defect, x

    worst_fund = -np.inf
    worst_fund_u = None
    if positive:
        for i in range(n):
            u, x = U[i], weights[i, 1] * U[partner[i]]
            fx = spec.eval(x)
            defect = (x @ spec.grad_energy(u) / values[i] - fx) / max(fx, 1.0)
            if defect > worst_fund:
                worst_fund, worst_fund_u = defect, u
    else:
        worst_fund = np.inf

    passed = positive and min_eig > tol and worst_hom <= tol and worst_tri <= tol and worst_fund <= tol
    if not passed and witness is None:
        if min_eig <= tol:
            witness = worst_eig_u
        elif worst_tri > tol:
            witness = worst_tri_u
        elif worst_fund > tol:
            witness = worst_fund_u
    return VerificationReport(
        passed=bool(passed),
        min_hessian_eigenvalue=float(min_eig),
        worst_homogeneity_defect=float(worst_hom),
        worst_triangle_defect=float(max(worst_tri, 0.0)),
        worst_fundamental_defect=float(worst_fund),
        samples_used=int(n),
        failure_witness=None if witness is None else np.asarray(witness, dtype=float),
        details={"positive": positive, "min_value_on_sphere": float(values.min())},
    )
