"""Structure constants, Killing form and adjoint actions, with the so(4) = h + m example.

Structure constants are stored as ``C[a, b, c] = C^c_{ab}``, i.e.
``[E_a, E_b] = sum_c C[a, b, c] E_c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotInGroup, NotInvariant, SingularKilling, ZeroVector
from .minksub import SolverConfig, SubducedNorm, projection_surjection
from .norms import NormSpec, sphere_directions


def _expand(rep: np.ndarray, X) -> np.ndarray:
    """Coordinates of ``X`` in span(rep) via the Frobenius Gram matrix (exact for orthogonal bases)."""
    B = rep.reshape(rep.shape[0], -1)
    return np.linalg.solve(B @ B.T, B @ np.asarray(X, dtype=float).ravel())


@dataclass(frozen=True, eq=False)
class StructureConstants:
    dim: int
    C: np.ndarray
    rep: Optional[np.ndarray] = None

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        if C.shape != (self.dim,) * 3:
            raise DimensionMismatch(f"C must have shape {(self.dim,) * 3}, got {C.shape}")
        object.__setattr__(self, "C", C)
        if self.rep is not None:
            rep = np.asarray(self.rep, dtype=float)
            if rep.ndim != 3 or rep.shape[0] != self.dim or rep.shape[1] != rep.shape[2]:
                raise DimensionMismatch("rep must be a stack of dim square matrices")
            object.__setattr__(self, "rep", rep)

    @classmethod
    def from_rep(cls, rep) -> "StructureConstants":
        """Read the structure constants off a faithful matrix representation."""
        rep = np.asarray(rep, dtype=float)
        n = rep.shape[0]
        C = np.empty((n, n, n))
        for a in range(n):
            for b in range(n):
                C[a, b] = _expand(rep, rep[a] @ rep[b] - rep[b] @ rep[a])
        return cls(n, C, rep)

    def coords(self, X) -> np.ndarray:
        """Coordinates of a matrix ``X`` in the representation basis."""
        if self.rep is None:
            raise ValueError("no matrix representation attached")
        return _expand(self.rep, X)

    def matrix(self, xi) -> np.ndarray:
        return np.einsum("a,aij->ij", np.asarray(xi, dtype=float), self.rep)

    def to_json(self) -> dict:
        out = {"dim": self.dim, "C": self.C.tolist()}
        if self.rep is not None:
            out["rep"] = self.rep.tolist()
        return out


def _vec(sc: StructureConstants, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (sc.dim,):
        raise DimensionMismatch(f"expected a vector of length {sc.dim}, got shape {xi.shape}")
    return xi


def bracket(sc: StructureConstants, xi, eta) -> np.ndarray:
    return np.einsum("abc,a,b->c", sc.C, _vec(sc, xi), _vec(sc, eta))


def ad_matrix(sc: StructureConstants, xi) -> np.ndarray:
    """Matrix of ``ad_xi`` acting on coordinates: ``(ad_xi)[c, b] = xi^a C^c_{ab}``."""
    return np.einsum("a,abc->cb", _vec(sc, xi), sc.C)


def antisymmetry_defect(sc: StructureConstants) -> float:
    return float(np.abs(sc.C + sc.C.transpose(1, 0, 2)).max())


def jacobi_defect(sc: StructureConstants) -> float:
    # [[a,b],c] + [[b,c],a] + [[c,a],b]
    t = np.einsum("abd,dce->abce", sc.C, sc.C)
    cyc = t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)
    return float(np.abs(cyc).max())


def rep_defect(sc: StructureConstants) -> float:
    if sc.rep is None:
        return 0.0
    worst = 0.0
    for a in range(sc.dim):
        for b in range(sc.dim):
            comm = sc.rep[a] @ sc.rep[b] - sc.rep[b] @ sc.rep[a]
            worst = max(worst, float(np.abs(comm - np.einsum("c,cij->ij", sc.C[a, b], sc.rep)).max()))
    return worst


def killing_matrix(sc: StructureConstants) -> np.ndarray:
    """``kappa_ab = tr(ad_{E_a} ad_{E_b}) = C^d_{ac} C^c_{bd}``."""
    return np.einsum("acd,bdc->ab", sc.C, sc.C)


def killing(sc: StructureConstants, xi, eta) -> float:
    return float(np.trace(ad_matrix(sc, xi) @ ad_matrix(sc, eta)))


def killing_scale(sc: StructureConstants) -> float:
    """The constant ``s`` with ``kappa = s * I`` in this basis (raises if not diagonal-uniform)."""
    K = killing_matrix(sc)
    s = K[0, 0]
    if not np.allclose(K, s * np.eye(sc.dim), atol=1e-12):
        raise ValueError("Killing form is not a multiple of the identity in this basis")
    return float(s)


def _killing_checked(sc: StructureConstants) -> np.ndarray:
    K = killing_matrix(sc)
    if np.linalg.matrix_rank(K) < sc.dim:
        raise SingularKilling("Killing form is degenerate; the algebra is not semisimple")
    return K


def flat(sc: StructureConstants, xi) -> np.ndarray:
    """Covector ``eta -> kappa(xi, eta)`` in dual-basis coordinates."""
    return _killing_checked(sc) @ _vec(sc, xi)


def sharp(sc: StructureConstants, theta) -> np.ndarray:
    return np.linalg.solve(_killing_checked(sc), _vec(sc, theta))


def check_orthogonal(g, tol: float = 1e-10) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise NotInGroup("group element must be a square matrix")
    if np.abs(g.T @ g - np.eye(g.shape[0])).max() > tol or abs(np.linalg.det(g) - 1.0) > tol:
        raise NotInGroup("matrix is not in the special orthogonal group")
    return g


def Ad_matrix(sc: StructureConstants, g) -> np.ndarray:
    """Matrix of ``Ad_g`` on coordinates; column ``a`` is ``Ad_g E_a``."""
    g = check_orthogonal(g)
    if sc.rep is None:
        raise ValueError("Ad needs a matrix representation")
    if g.shape[0] != sc.rep.shape[1]:
        raise DimensionMismatch("group element does not act on the representation space")
    return np.stack([_expand(sc.rep, g @ E @ g.T) for E in sc.rep], axis=1)


def Ad(sc: StructureConstants, g, xi) -> np.ndarray:
    return Ad_matrix(sc, g) @ _vec(sc, xi)


def Ad_star_matrix(sc: StructureConstants, g) -> np.ndarray:
    """Coadjoint action on dual coordinates, ``(Ad*_g p)(eta) = p(Ad_{g^-1} eta)``."""
    return Ad_matrix(sc, np.asarray(g, dtype=float).T).T


def random_rotation(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """``expm`` of a random skew-symmetric matrix."""
    X = scale * rng.standard_normal((n, n))
    return scipy.linalg.expm(X - X.T)


def ad_invariance_residual(sc: StructureConstants, f, w) -> np.ndarray:
    """``sum_{b,c} C^c_{ab} w^b df/dw^c`` for each ``a``.

    ``f`` is a :class:`NormSpec` (derivative of F), a square matrix ``Q``
    (the quadratic form ``w^T Q w``) or a vector ``c`` (the linear form ``c.w``).
    """
    w = _vec(sc, w)
    if hasattr(f, "grad_energy"):
        if not np.any(w):
            raise ZeroVector("norm gradients are undefined at the origin")
        grad = f.grad_energy(w) / f.eval(w)
    else:
        f = np.asarray(f, dtype=float)
        grad = 2.0 * f @ w if f.ndim == 2 else f
    return np.einsum("abc,b,c->a", sc.C, w, grad)


class ReductiveSplit:
    """``g = h + m`` given by index sets, with ``[h, h] < h`` and ``[h, m] < m``."""

    def __init__(self, sc: StructureConstants, h_idx: Sequence[int], m_idx: Sequence[int], tol: float = 1e-12):
        self.sc = sc
        self.h_idx = tuple(int(i) for i in h_idx)
        self.m_idx = tuple(int(i) for i in m_idx)
        if sorted(self.h_idx + self.m_idx) != list(range(sc.dim)):
            raise ValueError("h_idx and m_idx must partition the basis")
        if self.reductivity_defect() > tol:
            raise ValueError("the split is not reductive")

    def reductivity_defect(self) -> float:
        C = self.sc.C
        h, m = list(self.h_idx), list(self.m_idx)
        subalgebra = np.abs(C[np.ix_(h, h, m)]).max(initial=0.0)
        invariant = np.abs(C[np.ix_(h, m, h)]).max(initial=0.0)
        return float(max(subalgebra, invariant))

    def embed_m(self, zeta) -> np.ndarray:
        xi = np.zeros(self.sc.dim)
        xi[list(self.m_idx)] = zeta
        return xi

    def project_m(self, xi) -> np.ndarray:
        return np.asarray(xi, dtype=float)[list(self.m_idx)]


# --------------------------------------------------------------------------
# so(4) with h = so(3) in the upper-left block and m = the last column

def _skew4(i: int, j: int) -> np.ndarray:
    X = np.zeros((4, 4))
    X[i, j], X[j, i] = 1.0, -1.0
    return X


SO4_BASIS = np.stack([_skew4(2, 1), _skew4(0, 2), _skew4(1, 0), _skew4(3, 0), _skew4(3, 1), _skew4(3, 2)])


def _levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k], eps[j, i, k] = 1.0, -1.0
    return eps


def so4_structure_constants_from_table() -> np.ndarray:
    """``[E_i,E_j] = e_ijk E_k``, ``[E_i,E_{j+3}] = e_ijk E_{k+3}``, ``[E_{i+3},E_{j+3}] = e_ijk E_k``."""
    eps = _levi_civita()
    C = np.zeros((6, 6, 6))
    C[:3, :3, :3] = eps
    C[:3, 3:, 3:] = eps
    C[3:, :3, 3:] = eps
    C[3:, 3:, :3] = eps
    return C


def so4() -> ReductiveSplit:
    sc = StructureConstants.from_rep(SO4_BASIS)
    return ReductiveSplit(sc, (0, 1, 2), (3, 4, 5))


def block_rotation(A) -> np.ndarray:
    """The element ``diag(A, 1)`` of the isotropy subgroup ``SO(3) < SO(4)``."""
    A = check_orthogonal(A)
    if A.shape != (3, 3):
        raise NotInGroup("block rotation needs a 3x3 rotation")
    g = np.eye(4)
    g[:3, :3] = A
    return g


def check_block(g, tol: float = 1e-10) -> np.ndarray:
    g = check_orthogonal(g, tol)
    if g.shape != (4, 4) or np.abs(g[:3, 3]).max() > tol or np.abs(g[3, :3]).max() > tol or abs(g[3, 3] - 1) > tol:
        raise NotInGroup("element is not in the block SO(3) subgroup")
    return g


def invariant_polys() -> tuple[np.ndarray, np.ndarray]:
    """Gram matrices of ``L1 = sum_i (w^i + w^{i+3})^2`` and ``L2 = sum_i (w^i - w^{i+3})^2``."""
    eye = np.eye(3)
    L1 = np.block([[eye, eye], [eye, eye]])
    L2 = np.block([[eye, -eye], [-eye, eye]])
    return L1, L2


def candidate_norms() -> tuple[NormSpec, NormSpec, NormSpec]:
    """``F = ((L1+L2)^2)^(1/4)``, ``F_hat = (L1^2+L2^2)^(1/4)``, ``F_tilde = ((L1+L2)^2+L1^2)^(1/4)``."""
    L1, L2 = invariant_polys()
    F = NormSpec.quartic_root([L1 + L2])
    F_hat = NormSpec.quartic_root([L1, L2])
    F_tilde = NormSpec.quartic_root([L1 + L2, L1])
    return F, F_hat, F_tilde


def ad_h_invariance_defect(split: ReductiveSplit, spec, n: int = 20, seed: int = 0) -> float:
    """Worst relative ``|F(Ad_h xi) - F(xi)|`` over seeded block rotations and directions."""
    rng = np.random.default_rng(seed)
    xs = sphere_directions(split.sc.dim, n, seed + 1)
    worst = 0.0
    for xi in xs:
        Adh = Ad_matrix(split.sc, block_rotation(random_rotation(3, rng)))
        f = spec.eval(xi)
        worst = max(worst, abs(spec.eval(Adh @ xi) - f) / f)
    return worst


class MSubduction(NamedTuple):
    lift: object
    norm: SubducedNorm


def subduce_to_m(split: ReductiveSplit, spec, check_samples: int = 20, seed: int = 0,
                 tol: float = 1e-9, cfg: Optional[SolverConfig] = None) -> MSubduction:
    """The Ad(H)-equivariant lift ``m -> g`` and the subduced norm on ``m``.

    Returns ``(lift, norm)``; ``lift(zeta)`` is the lifted vector in ``g`` and
    ``norm`` is a :class:`SubducedNorm` on ``m``-coordinates.
    """
    if split.sc.rep is not None and check_samples > 0:
        defect = ad_h_invariance_defect(split, spec, check_samples, seed)
        if defect > tol:
            raise NotInvariant(f"norm is not Ad(H)-invariant (defect {defect:.3g})")
    sub = SubducedNorm(spec, projection_surjection(split.sc.dim, split.m_idx), cfg or SolverConfig())

    def lift_fn(zeta) -> np.ndarray:
        return sub.lift(np.asarray(zeta, dtype=float)).point

    return MSubduction(lift_fn, sub)


def Ad_on_m(split: ReductiveSplit, h_elem) -> np.ndarray:
    """Restriction of ``Ad_h`` to ``m``-coordinates for ``h`` in the isotropy subgroup."""
    Adh = Ad_matrix(split.sc, check_block(h_elem))
    m = list(split.m_idx)
    return Adh[np.ix_(m, m)]


def equivariance_defect(split: ReductiveSplit, spec, h_elem, zeta, cfg: Optional[SolverConfig] = None) -> float:
    """``|lift(Ad_h zeta) - Ad_h lift(zeta)| / |lift(zeta)|``."""
    Adh = Ad_matrix(split.sc, check_block(h_elem))
    lift_fn, _ = subduce_to_m(split, spec, check_samples=0, cfg=cfg)
    zeta = np.asarray(zeta, dtype=float)
    base = lift_fn(zeta)
    moved = lift_fn(split.project_m(Adh @ split.embed_m(zeta)))
    return float(np.linalg.norm(moved - Adh @ base) / np.linalg.norm(base))


def cone_sample(split: ReductiveSplit, spec, n: int, seed: int = 0, cfg: Optional[SolverConfig] = None) -> np.ndarray:
    """Lifts of ``n`` seeded unit directions of ``m``: samples of the horizontal cone."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lift_fn, _ = subduce_to_m(split, spec, check_samples=0, cfg=cfg)
    dirs = sphere_directions(len(split.m_idx), n, seed)
    return np.array([lift_fn(z) for z in dirs])
