import math

import numpy as np
import pytest

from finsub import NormSpec, ZeroVector, lift, make_surjection, projection_surjection
from finsub.euclid import (
    euclidean_submersion_defect,
    horizontality_defect,
    inner_product_at,
    lift_jacobian,
)
from finsub.liealg import candidate_norms

from fd import fd_hessian

SQRT3 = math.sqrt(3.0)


def test_inner_product_euclidean():
    A = np.array([[2.0, 0.3], [0.3, 1.0]])
    ip = inner_product_at(NormSpec.euclidean(A), [0.4, -1.0])
    np.testing.assert_array_equal(ip.G, A)
    assert ip([1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.3)


def test_inner_product_zero_homogeneous(randers):
    u = np.array([0.3, -0.7])
    np.testing.assert_allclose(inner_product_at(randers, 2 * u).G, inner_product_at(randers, u).G, rtol=1e-9)


def test_inner_product_randers_spd(randers):
    G = inner_product_at(randers, [1.0, 0.0]).G
    assert np.linalg.eigvalsh(G).min() > 0
    np.testing.assert_allclose(G, fd_hessian(randers.grad_energy, [1.0, 0.0]), atol=1e-4)


def test_inner_product_zero_raises(randers):
    with pytest.raises(ZeroVector):
        inner_product_at(randers, [0.0, 0.0])


def test_jacobian_euclidean():
    s = make_surjection(np.eye(3)[:2])
    J = lift_jacobian(NormSpec.euclidean(np.eye(3)), s, [0.5, -1.0])
    np.testing.assert_allclose(J, np.eye(3)[:, :2], atol=1e-7)


def test_jacobian_randers(randers, proj_v):
    J = lift_jacobian(randers, proj_v, [1.0])
    np.testing.assert_allclose(J[:, 0], [1.0, 1.0 / (1.0 - SQRT3)], atol=1e-7)


def test_jacobian_is_right_inverse():
    _, _, F_tilde = candidate_norms()
    s = projection_surjection(6, [3, 4, 5])
    rng = np.random.default_rng(0)
    J = lift_jacobian(F_tilde, s, [1.0, 1.0, 0.0])
    for x in rng.standard_normal((5, 3)):
        np.testing.assert_allclose(s(J @ x), x, atol=1e-7)


def test_horizontality_examples(randers, proj_v):
    s = make_surjection(np.eye(3)[:2])
    assert horizontality_defect(NormSpec.euclidean(np.eye(3)), s, [1.0, 2.0]) <= 1e-9
    assert horizontality_defect(randers, proj_v, [1.0]) <= 1e-5
    _, _, F_tilde = candidate_norms()
    assert horizontality_defect(F_tilde, projection_surjection(6, [3, 4, 5]), [1.0, 1.0, 0.0]) <= 1e-5


def test_cone_point_itself_need_not_be_horizontal():
    # Only the tangent space of the cone is g-orthogonal to the kernel; record
    # that the cone point and J v coincide here (h is homogeneous) so the
    # meaningful statement is the Jacobian-column one tested above.
    _, _, F_tilde = candidate_norms()
    s = projection_surjection(6, [3, 4, 5])
    v = np.array([1.0, 1.0, 0.0])
    J = lift_jacobian(F_tilde, s, v)
    G = F_tilde.hess_energy(lift(F_tilde, s, v).point)
    assert np.abs(J.T @ G @ s.K).max() <= 1e-5 * np.linalg.norm(G, 2)


def test_submersion_defect_examples(randers, proj_v):
    s = make_surjection(np.eye(3)[:2])
    assert euclidean_submersion_defect(NormSpec.euclidean(np.eye(3)), s, [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]) <= 1e-9
    assert euclidean_submersion_defect(randers, proj_v, [1.0], [1.0], [1.0]) <= 1e-4
    _, F_hat, _ = candidate_norms()
    rng = np.random.default_rng(2)
    x, y = rng.standard_normal(3), rng.standard_normal(3)
    assert euclidean_submersion_defect(F_hat, projection_surjection(6, [3, 4, 5]), [1.0, 2.0, 3.0], x, y) <= 1e-4
