"""Chart-level Finsler subduction on a trivialised bundle ``(x, y) -> x``.

A :class:`ChartFinsler` assigns a :class:`NormSpec` on velocities ``(v, w)``
to every chart point ``(x, y)``.  The induced splitting coefficients
``h(x, y, v)`` are the kernel coordinates of the fibrewise lift; the spray
tangency condition is checked through ``dE/dy`` on the image of the
splitting.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, InvalidNorm, TangencyViolated
from .minksub import LinearSurjection, SolverConfig, SubducedNorm, lift, projection_surjection
from .norms import NormSpec

TANGENCY_TOL = 1e-8
FD_STEP = 1e-5

_TARGET = re.compile(r"^(A|b|Q)((?:\[\d+\])+)$")


@dataclass(frozen=True)
class Monomial:
    powers_x: tuple
    powers_y: tuple
    coef: float

    def __call__(self, x: np.ndarray, y: np.ndarray) -> float:
        return self.coef * float(np.prod(x ** np.asarray(self.powers_x)) * np.prod(y ** np.asarray(self.powers_y)))


@dataclass(frozen=True)
class PolyDep:
    """A polynomial in ``(x, y)`` added to one entry of the base norm.

    Off-diagonal matrix entries are mirrored so the matrices stay symmetric.
    """

    target: str
    monomials: tuple

    def index(self) -> tuple:
        m = _TARGET.match(self.target.replace(" ", ""))
        if m is None:
            raise InvalidNorm(f"bad polynomial target {self.target!r}")
        return m.group(1), tuple(int(i) for i in re.findall(r"\d+", m.group(2)))

    def __call__(self, x, y) -> float:
        return sum(mono(x, y) for mono in self.monomials)


@dataclass(frozen=True, eq=False)
class ChartFinsler:
    n_x: int
    n_y: int
    base_spec: NormSpec
    poly_deps: tuple = ()
    box_x: Optional[np.ndarray] = None
    box_y: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.base_spec.dim != self.n_x + self.n_y:
            raise DimensionMismatch(f"base norm has dimension {self.base_spec.dim}, expected {self.n_x + self.n_y}")
        for name, n in (("box_x", self.n_x), ("box_y", self.n_y)):
            box = getattr(self, name)
            box = np.tile([-1.0, 1.0], (n, 1)) if box is None else np.asarray(box, dtype=float).reshape(n, 2)
            object.__setattr__(self, name, box)
        for dep in self.poly_deps:
            kind, idx = dep.index()
            if getattr(self.base_spec, kind) is None:
                raise InvalidNorm(f"target {dep.target!r} does not exist for family {self.base_spec.family}")
            for mono in dep.monomials:
                if len(mono.powers_x) != self.n_x or len(mono.powers_y) != self.n_y:
                    raise InvalidNorm(f"monomial powers for {dep.target!r} do not match chart dimensions")

    @property
    def dim(self) -> int:
        return self.n_x + self.n_y

    def at(self, x, y) -> NormSpec:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if x.shape != (self.n_x,) or y.shape != (self.n_y,):
            raise DimensionMismatch("chart point has the wrong dimensions")
        if not self.poly_deps:
            return self.base_spec
        arrays = {k: (None if getattr(self.base_spec, k) is None else getattr(self.base_spec, k).copy())
                  for k in ("A", "b", "Q")}
        for dep in self.poly_deps:
            kind, idx = dep.index()
            value = dep(x, y)
            arrays[kind][idx] += value
            if kind != "b" and idx[-1] != idx[-2]:
                mirrored = idx[:-2] + (idx[-1], idx[-2])
                arrays[kind][mirrored] += value
        return NormSpec(self.base_spec.family, A=arrays["A"], b=arrays["b"], Q=arrays["Q"])

    def surjection(self) -> LinearSurjection:
        return projection_surjection(self.dim, range(self.n_x))

    def centre_y(self) -> np.ndarray:
        return self.box_y.mean(axis=1)

    def to_json(self) -> dict:
        return {
            "n_x": self.n_x,
            "n_y": self.n_y,
            "base_spec": self.base_spec.to_json(),
            "poly_deps": [
                {"target": d.target,
                 "monomials": [{"powers_x": list(m.powers_x), "powers_y": list(m.powers_y), "coef": m.coef}
                               for m in d.monomials]}
                for d in self.poly_deps
            ],
            "box": {"x": self.box_x.tolist(), "y": self.box_y.tolist()},
        }

    @classmethod
    def from_json(cls, data: dict) -> "ChartFinsler":
        deps = tuple(
            PolyDep(d["target"], tuple(Monomial(tuple(m["powers_x"]), tuple(m["powers_y"]), float(m["coef"]))
                                       for m in d["monomials"]))
            for d in data.get("poly_deps", [])
        )
        box = data.get("box", {})
        return cls(int(data["n_x"]), int(data["n_y"]), NormSpec.from_json(data["base_spec"]), deps,
                   box.get("x"), box.get("y"))


def _vec(a) -> np.ndarray:
    return np.atleast_1d(np.asarray(a, dtype=float))


def lifted_point(cf: ChartFinsler, x, y, v, cfg: Optional[SolverConfig] = None) -> np.ndarray:
    return lift(cf.at(x, y), cf.surjection(), _vec(v), cfg).point


def splitting_coeffs(cf: ChartFinsler, x, y, v, cfg: Optional[SolverConfig] = None) -> np.ndarray:
    """``h^alpha(x, y, v)``: the fibre coordinates of the lifted velocity."""
    return lifted_point(cf, x, y, v, cfg)[cf.n_x:]


def euler_defect(cf: ChartFinsler, x, y, v, fd_step: float = FD_STEP,
                 cfg: Optional[SolverConfig] = None) -> float:
    """``|v^i dh/dv^i - h|`` with the directional derivative by central differences."""
    v = _vec(v)
    h = splitting_coeffs(cf, x, y, v, cfg)
    dh = (splitting_coeffs(cf, x, y, (1 + fd_step) * v, cfg)
          - splitting_coeffs(cf, x, y, (1 - fd_step) * v, cfg)) / (2 * fd_step)
    return float(np.linalg.norm(dh - h) / max(1.0, np.linalg.norm(h)))


def tangency_defect(cf: ChartFinsler, x, y, v, fd_step: float = FD_STEP,
                    cfg: Optional[SolverConfig] = None) -> np.ndarray:
    """``dE/dy^alpha`` at ``(x, y, v, h(x, y, v))`` with the velocity held fixed."""
    x, y = _vec(x), _vec(y)
    u = lifted_point(cf, x, y, v, cfg)
    out = np.empty(cf.n_y)
    for a in range(cf.n_y):
        step = fd_step * max(1.0, abs(y[a]))
        e = np.zeros(cf.n_y)
        e[a] = step
        out[a] = (cf.at(x, y + e).energy(u) - cf.at(x, y - e).energy(u)) / (2 * step)
    return out


def _require_tangency(cf: ChartFinsler, x, ys, v, tol: float, cfg) -> None:
    for y in ys:
        d = tangency_defect(cf, x, y, v, cfg=cfg)
        if np.abs(d).max() > tol:
            raise TangencyViolated(f"tangency defect {np.abs(d).max():.3g} exceeds {tol:g} at y={np.asarray(y).tolist()}")


def fiber_independence_defect(cf: ChartFinsler, x, y1, y2, v, tol: float = TANGENCY_TOL,
                              n_segment: int = 5, cfg: Optional[SolverConfig] = None) -> float:
    """``|h(x, y1, v) - h(x, y2, v)|`` after certifying tangency along the segment."""
    y1, y2 = _vec(y1), _vec(y2)
    ts = np.linspace(0.0, 1.0, max(n_segment, 2))
    _require_tangency(cf, x, [(1 - t) * y1 + t * y2 for t in ts], v, tol, cfg)
    return float(np.linalg.norm(splitting_coeffs(cf, x, y1, v, cfg) - splitting_coeffs(cf, x, y2, v, cfg)))


def fibre_samples(cf: ChartFinsler, n: int = 8, seed: int = 0) -> list:
    """Box centre, box corners (up to 2^n_y) and ``n`` seeded uniform points of the y-box."""
    rng = np.random.default_rng(seed)
    lo, hi = cf.box_y[:, 0], cf.box_y[:, 1]
    pts = [cf.centre_y()]
    if cf.n_y <= 4:
        for mask in range(2 ** cf.n_y):
            pts.append(np.where([(mask >> i) & 1 for i in range(cf.n_y)], hi, lo))
    pts.extend(lo + (hi - lo) * rng.random((n, cf.n_y)))
    return pts


def subduced_finsler(cf: ChartFinsler, x, v, tol: float = TANGENCY_TOL, seed: int = 0,
                     cfg: Optional[SolverConfig] = None) -> float:
    """``F2(x, v) = F1(h(x, y0, v))``; requires tangency across the y-box."""
    v = _vec(v)
    _require_tangency(cf, x, fibre_samples(cf, seed=seed), v, tol, cfg)
    return lift(cf.at(x, cf.centre_y()), cf.surjection(), v, cfg).value


def subduced_finsler_norm(cf: ChartFinsler, x, tol: float = TANGENCY_TOL, seed: int = 0,
                          cfg: Optional[SolverConfig] = None) -> SubducedNorm:
    """The Minkowski norm ``v -> F2(x, v)`` at fixed ``x`` as a :class:`SubducedNorm`.

    Tangency is certified along the coordinate directions of ``v``.
    """
    for i in range(cf.n_x):
        e = np.zeros(cf.n_x)
        e[i] = 1.0
        for v in (e, -e):
            _require_tangency(cf, x, fibre_samples(cf, seed=seed), v, tol, cfg)
    return SubducedNorm(cf.at(x, cf.centre_y()), cf.surjection(), cfg or SolverConfig())
