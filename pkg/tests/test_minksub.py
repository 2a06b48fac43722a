import math

import numpy as np
import pytest

from finsub import (
    LinearSurjection,
    MaxIterations,
    NonConvexEncountered,
    NormSpec,
    RankDeficient,
    SolverConfig,
    SubducedNorm,
    brute_force_subduced,
    homogeneity_defect,
    lift,
    make_surjection,
    projection_surjection,
    subduced_norm,
    verify_minkowski,
    verify_submersion,
)
from finsub.liealg import candidate_norms

from fd import fd_gradient, fd_hessian

SQRT3 = math.sqrt(3.0)
C_PLUS = 1.0 / (SQRT3 - 1.0)
C_MINUS = 1.0 / (SQRT3 + 1.0)


def last3():
    return projection_surjection(6, [3, 4, 5])


# -- make_surjection --------------------------------------------------------------

def test_make_surjection_row():
    s = make_surjection([[1.0, 0.0]])
    np.testing.assert_allclose(np.abs(s.K.ravel()), [0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(s.R.ravel(), [1.0, 0.0], atol=1e-15)


def test_make_surjection_block():
    s = make_surjection(np.hstack([np.eye(3), np.zeros((3, 3))]))
    assert np.abs(s.K[:3]).max() <= 1e-15
    assert np.linalg.matrix_rank(s.K[3:]) == 3
    assert np.abs(s.M @ s.K).max() <= 1e-12
    np.testing.assert_allclose(s.M @ s.R, np.eye(3), atol=1e-12)


def test_make_surjection_rank_deficient():
    with pytest.raises(RankDeficient):
        make_surjection([[1.0, 0.0], [2.0, 0.0]])


def test_make_surjection_generic_invariants():
    rng = np.random.default_rng(4)
    M = rng.standard_normal((2, 5))
    s = make_surjection(M)
    assert np.abs(M @ s.K).max() <= 1e-12
    np.testing.assert_allclose(M @ s.R, np.eye(2), atol=1e-12)
    assert np.linalg.matrix_rank(np.hstack([s.R, s.K])) == 5


def test_surjection_rejects_bad_bases():
    with pytest.raises(ValueError):
        LinearSurjection([[1.0, 0.0]], [[1.0], [0.0]], [[1.0], [0.0]])


# -- lift ------------------------------------------------------------------------

def test_randers_lift_positive_branch(randers, proj_v):
    sol = lift(randers, proj_v, [1.0])
    assert sol.converged
    np.testing.assert_allclose(sol.point, [1.0, 1.0 / (1.0 - SQRT3)], atol=1e-12)


def test_randers_lift_negative_branch(randers, proj_v):
    np.testing.assert_allclose(lift(randers, proj_v, [-1.0]).point, [-1.0, -1.0 / (1.0 + SQRT3)], atol=1e-12)


def test_lift_lies_in_half_plane(randers, proj_v):
    for v in np.linspace(-5, 5, 21):
        p = lift(randers, proj_v, [v]).point
        assert p[0] + 2 * p[1] <= 1e-12


def test_euclidean_orthogonal_lift():
    s = make_surjection(np.eye(3)[:2])
    np.testing.assert_allclose(lift(NormSpec.euclidean(np.eye(3)), s, [2.0, -3.0]).point, [2.0, -3.0, 0.0],
                               atol=1e-14)


def test_zero_is_degenerate(randers, proj_v):
    sol = lift(randers, proj_v, [0.0])
    assert sol.degenerate and sol.value == 0.0
    np.testing.assert_array_equal(sol.point, [0.0, 0.0])


def test_lift_json_has_all_fields(randers, proj_v):
    data = lift(randers, proj_v, [1.0]).to_json()
    assert set(data) == {"point", "value", "residual", "iterations", "converged", "degenerate"}


def test_nonconvex_detected():
    bad = NormSpec.randers(np.eye(2), [2.0, 0.0])
    with pytest.raises(NonConvexEncountered):
        lift(bad, make_surjection([[0.0, 1.0]]), [1.0])


def test_max_iterations():
    _, _, F_tilde = candidate_norms()
    with pytest.raises(MaxIterations):
        lift(F_tilde, last3(), [1.0, 1.0, 0.0], SolverConfig(tol=1e-11, max_iter=1))


def test_lift_independent_of_right_inverse(randers):
    s1 = make_surjection([[1.0, 0.0]])
    # another right inverse: sigma(1) = (1, 3)
    s2 = LinearSurjection([[1.0, 0.0]], [[0.0], [2.0]], [[1.0], [3.0]])
    for v in (-2.0, 0.7, 3.0):
        np.testing.assert_allclose(lift(randers, s1, [v]).point, lift(randers, s2, [v]).point, atol=1e-12)


def test_lift_independent_of_kernel_basis():
    _, _, F_tilde = candidate_norms()
    rng = np.random.default_rng(8)
    s1 = last3()
    s2 = make_surjection(np.hstack([np.zeros((3, 3)), np.eye(3)]))
    for _ in range(5):
        v = rng.standard_normal(3)
        np.testing.assert_allclose(lift(F_tilde, s1, v).point, lift(F_tilde, s2, v).point, atol=1e-10)


def test_uniqueness_under_restarts():
    _, _, F_tilde = candidate_norms()
    s = last3()
    rng = np.random.default_rng(5)
    v = np.array([1.0, 1.0, 0.0])
    ref = lift(F_tilde, s, v).point
    for _ in range(10):
        p = lift(F_tilde, s, v, w0=rng.uniform(-2, 2, 3)).point
        np.testing.assert_allclose(p, ref, atol=1e-8)


def test_fibre_feasibility():
    rng = np.random.default_rng(6)
    specs = [(NormSpec.randers(np.diag([1.0, 2.0, 3.0]), [0.3, -0.4, 0.5]), make_surjection(rng.standard_normal((1, 3))))]
    specs += [(n, last3()) for n in candidate_norms()]
    for spec, s in specs:
        for _ in range(20):
            v = rng.standard_normal(s.d2)
            p = lift(spec, s, v).point
            assert np.linalg.norm(s(p) - v) <= 1e-10 * np.linalg.norm(v)


# -- subduced norm ---------------------------------------------------------------

def test_randers_subduced_values(randers, proj_v):
    assert subduced_norm(randers, proj_v, [1.0]) == pytest.approx((1 + SQRT3) / 2, abs=1e-12)
    assert subduced_norm(randers, proj_v, [-1.0]) == pytest.approx(1 / (1 + SQRT3), abs=1e-12)


def test_subduced_homogeneous(randers, proj_v):
    for spec, s, v in [(randers, proj_v, np.array([0.8])), (candidate_norms()[2], last3(), np.array([0.3, -1.0, 2.0]))]:
        assert subduced_norm(spec, s, 3 * v) == pytest.approx(3 * subduced_norm(spec, s, v), rel=1e-9)


def test_subduced_zero(randers, proj_v):
    assert subduced_norm(randers, proj_v, [0.0]) == 0.0


def test_minimality_against_fibre_samples():
    rng = np.random.default_rng(9)
    _, _, F_tilde = candidate_norms()
    s = last3()
    for _ in range(10):
        v = rng.standard_normal(3)
        f2 = subduced_norm(F_tilde, s, v)
        for w in rng.uniform(-3, 3, (50, 3)):
            assert f2 <= F_tilde.eval(s.R @ v + s.K @ w) + 1e-8


def test_triangle_strictness_transfer():
    rng = np.random.default_rng(10)
    _, _, F_tilde = candidate_norms()
    s = last3()
    for _ in range(20):
        v, vt = rng.standard_normal(3), rng.standard_normal(3)
        lhs = subduced_norm(F_tilde, s, v + vt)
        assert lhs < subduced_norm(F_tilde, s, v) + subduced_norm(F_tilde, s, vt) - 1e-12


def test_homogeneity_defect(randers, proj_v):
    assert homogeneity_defect(randers, proj_v, [1.0], 2.0) <= 1e-8
    assert homogeneity_defect(randers, proj_v, [1.0], 1.0) <= 1e-12
    _, _, F_tilde = candidate_norms()
    assert homogeneity_defect(F_tilde, last3(), [1.0, 1.0, 0.0], 5.0) <= 1e-8


# -- analytic derivatives of the subduced norm ----------------------------------------

def test_subduced_gradient_and_hessian_match_fd():
    rng = np.random.default_rng(12)
    _, _, F_tilde = candidate_norms()
    sub = SubducedNorm(F_tilde, last3())
    for _ in range(5):
        v = rng.standard_normal(3)
        g = sub.grad_energy(v)
        np.testing.assert_allclose(g, fd_gradient(lambda x: 0.5 * sub.eval(x) ** 2, v), rtol=1e-6)
        H = sub.hess_energy(v)
        assert np.linalg.norm(H - fd_hessian(sub.grad_energy, v)) <= 1e-5 * np.linalg.norm(H)


def test_subduced_norm_is_minkowski(randers, proj_v):
    assert verify_minkowski(SubducedNorm(randers, proj_v), n_samples=20, seed=0).passed


# -- brute-force oracle ----------------------------------------------------------

def test_brute_force_randers(randers, proj_v):
    bf = brute_force_subduced(randers, proj_v, [1.0], grid_radius=5, grid_steps=2001)
    assert bf == pytest.approx(1.366025, abs=1e-4)
    assert bf == pytest.approx(subduced_norm(randers, proj_v, [1.0]), abs=2e-4)


def test_brute_force_euclidean():
    s = make_surjection(np.eye(3)[:2])
    assert brute_force_subduced(NormSpec.euclidean(np.eye(3)), s, [1.0, 1.0], 5, 201) == pytest.approx(
        math.sqrt(2), abs=1e-4)


def test_brute_force_ftilde():
    _, _, F_tilde = candidate_norms()
    bf = brute_force_subduced(F_tilde, last3(), [1.0, 0.0, 0.0], grid_radius=2, grid_steps=41)
    assert bf == pytest.approx(subduced_norm(F_tilde, last3(), [1.0, 0.0, 0.0]), abs=1e-3)


# -- verify_submersion ------------------------------------------------------------

def test_verify_submersion_randers_1d(randers, proj_v):
    a = ((C_PLUS + C_MINUS) / 2) ** 2
    b = (C_PLUS - C_MINUS) / 2
    spec2 = NormSpec.randers([[a]], [b])
    assert spec2.eval([1.0]) == pytest.approx(C_PLUS) and spec2.eval([-1.0]) == pytest.approx(C_MINUS)
    report = verify_submersion(randers, proj_v, spec2, n_samples=50)
    assert report.passed, report.details


def test_verify_submersion_doubling_fails():
    s = make_surjection(np.eye(3)[:2])
    report = verify_submersion(NormSpec.euclidean(np.eye(3)), s, NormSpec.euclidean(2 * np.eye(2)), n_samples=20)
    assert not report.passed


def test_verify_submersion_fhat_on_m():
    _, F_hat, _ = candidate_norms()
    spec2 = NormSpec.euclidean(math.sqrt(2) * np.eye(3))
    # brute force agrees with the closed form 2^(1/4)|w|
    v = np.array([0.3, -0.5, 0.8])
    assert brute_force_subduced(F_hat, last3(), v, 2, 41) == pytest.approx(spec2.eval(v), abs=2e-4)
    assert verify_submersion(F_hat, last3(), spec2, n_samples=50).passed
