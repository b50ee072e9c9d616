import numpy as np
import pytest

from ccskit.bundle import (ConnectionPath, alpha_form, chern_weil_form, cs_action, cs_one_connection,
                           cs_two_closed_form, cs_two_connections, curvature, curvature_form, period_over_fiber,
                           total_space_connection)
from ccskit.geometry import (Cell, FormField, SmoothMap, affine_cell, exterior_derivative, linear_map,
                             matrix_wedge, polynomial_wedge, pullback, sample_points, sampled_residual)
from ccskit.library import (hopf_atlas, instanton_atlas, instanton_curvature_oracle, s4_cells,
                            su2_torus_connection, trivial_atlas, u1_torus_connection)
from ccskit.lie_core import chern_polynomial, half_p1_polynomial
from ccskit.suites import (characteristic_number, cs_defining_residual, overlap_defect, total_samples,
                           two_connection_residual)

C1 = chern_polynomial(1, 1)
HALF_P1 = half_p1_polynomial()
BOX2 = ([0, 0], [1, 1])
BOX3 = ([0, 0, 0], [1, 1, 1])


def test_flat_maurer_cartan_total_space():
    atlas = trivial_atlas("su(2)", 1)
    theta = total_space_connection(atlas, "U")
    pts = total_samples(atlas, ([0], [1]), 10, seed=3)
    assert curvature_form(theta).max_abs(pts) <= 1e-6


def test_abelian_curvature_is_dA():
    A = u1_torus_connection(0.3, 2)
    pts = sample_points(*BOX2, 12, seed=1)
    assert sampled_residual(curvature_form(A), exterior_derivative(A), pts) == 0


def test_instanton_curvature_oracle():
    F = curvature(instanton_atlas())["N"]
    pts = np.vstack([np.zeros(4), sample_points([-1] * 4, [1] * 4, 10, seed=2)])
    assert np.max(np.abs(F.components(pts) - instanton_curvature_oracle(pts))) <= 1e-6


@pytest.mark.parametrize("atlas", [instanton_atlas(), hopf_atlas(1, 0.3)], ids=["instanton", "hopf"])
def test_gauge_covariance_on_overlaps(atlas):
    assert overlap_defect(atlas, seed=5) <= 1e-6


def test_flat_chern_weil_vanishes():
    atlas = trivial_atlas("su(2)", 4)
    pts = sample_points([-1] * 4, [1] * 4, 8, seed=1)
    assert chern_weil_form(HALF_P1, atlas.connections["U"]).max_abs(pts) == 0


def test_instanton_charge():
    assert characteristic_number(HALF_P1, instanton_atlas(), s4_cells()) == pytest.approx(1, abs=1e-3)


def _cap(theta0, theta1, chart):
    """Polar cap in (theta, phi); d/dtheta x d/dphi points outward, so orientation +1."""
    def f(s):
        th = theta0 + (theta1 - theta0) * s[:, 0]
        ph = 2 * np.pi * s[:, 1]
        return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1)

    return Cell(2, SmoothMap(2, 3, f), 1, 1, chart)


def test_hopf_monopole_chern_number():
    atlas = hopf_atlas(1)
    cells = {"N": [_cap(0, np.pi / 2, "N")], "S": [_cap(np.pi / 2, np.pi, "S")]}
    assert characteristic_number(C1, atlas, cells, order=16) == pytest.approx(1, abs=1e-6)


def test_cs_two_same_connection():
    A = su2_torus_connection(0.4, 3)
    atlas = trivial_atlas("su(2)", 3, A)
    cs = cs_two_connections(HALF_P1, ConnectionPath(atlas, atlas.with_connections({"U": A})))
    assert cs.max_abs(sample_points(*BOX3, 8, seed=1)) <= 1e-14


def test_cs_two_swap():
    a0, a1 = instanton_atlas(1.0), instanton_atlas(0.5)
    a1 = a0.with_connections(a1.connections)
    pts = sample_points([-1] * 4, [1] * 4, 6, seed=4)
    fwd = cs_two_connections(HALF_P1, ConnectionPath(a0, a1), "N", t_order=3)
    back = cs_two_connections(HALF_P1, ConnectionPath(a1, a0), "N", t_order=3)
    assert sampled_residual(fwd, back.scale(-1.0), pts) <= 1e-8


def test_cs_two_abelian_closed_form():
    A0, A1 = u1_torus_connection(0.3, 2), u1_torus_connection(-0.7, 2)
    atlas = trivial_atlas("u(1)", 2, A0)
    cs = cs_two_connections(C1, ConnectionPath(atlas, atlas.with_connections({"U": A1})))
    pts = sample_points(*BOX2, 12, seed=2)
    # c_1 of (A1 - A0) = (i/2pi)(A1 - A0)
    expected = np.real(1j / (2 * np.pi) * (A1.components(pts) - A0.components(pts)))[..., 0, 0]
    assert np.max(np.abs(cs.components(pts) - expected)) <= 1e-8


def test_cs_two_matches_transgression_oracle():
    a0 = instanton_atlas(1.0)
    a1 = a0.with_connections(instanton_atlas(0.5).connections)
    pts = sample_points([-1] * 4, [1] * 4, 4, seed=8)
    cs = cs_two_connections(HALF_P1, ConnectionPath(a0, a1), "N", t_order=3)
    oracle = cs_two_closed_form(HALF_P1, a0.connections["N"], a1.connections["N"], t_order=8)
    assert sampled_residual(cs, oracle, pts) <= 1e-6


def test_cs_one_flat_maurer_cartan():
    atlas = trivial_atlas("su(2)", 1)
    theta = total_space_connection(atlas, "U")
    cs = cs_one_connection(HALF_P1, atlas, t_order=3)
    # 2 int_0^1 (t^2 - t) dt lam(theta, theta^theta) = -(1/3) lam(theta ^ theta ^ theta)
    oracle = polynomial_wedge(HALF_P1, [theta, matrix_wedge(theta, theta)]).scale(-1.0 / 3.0)
    pts = total_samples(atlas, ([0], [1]), 10, seed=6)
    assert sampled_residual(cs, oracle, pts) <= 1e-6


def test_su2_fiber_period():
    atlas = trivial_atlas("su(2)", 1)
    assert period_over_fiber(HALF_P1, atlas, np.array([0.3]), t_order=3) == pytest.approx(1, abs=1e-3)


def test_u1_cs_one_closed_form():
    atlas = trivial_atlas("u(1)", 2, u1_torus_connection(0.3, 2))
    cs = cs_one_connection(C1, atlas, t_order=2)
    pts = total_samples(atlas, BOX2, 10, seed=7)
    x, y = pts[:, :2], pts[:, 2:]
    r2 = np.sum(y * y, axis=1)
    a = np.imag(atlas.connections["U"].components(x)[..., 0, 0])
    # (i/2pi)(i a + i dphi) = -(a + dphi)/2pi
    expected = -np.concatenate([a, np.stack([-y[:, 1] / r2, y[:, 0] / r2], axis=1)], axis=1) / (2 * np.pi)
    assert np.max(np.abs(cs.components(pts) - expected)) <= 1e-8


def test_alpha_constant_path():
    atlas = trivial_atlas("su(2)", 1, su2_torus_connection(0.4, 1))
    alpha = alpha_form(HALF_P1, ConnectionPath(atlas, atlas), t_order=3)
    pts = total_samples(atlas, ([0], [1]), 6, seed=1)
    assert alpha.max_abs(pts) <= 1e-12


def test_alpha_abelian_vanishes():
    a0 = trivial_atlas("u(1)", 2, u1_torus_connection(0.3, 2))
    a1 = a0.with_connections({"U": u1_torus_connection(-0.5, 2)})
    alpha = alpha_form(C1, ConnectionPath(a0, a1), t_order=2)
    assert alpha.max_abs(total_samples(a0, BOX2, 8, seed=2)) <= 1e-12


def test_flat_action_on_contractible_cell():
    atlas = trivial_atlas("su(2)", 3)
    section = SmoothMap(3, 7, lambda x: np.concatenate([x, np.tile([1.0, 0, 0, 0], (len(x), 1))], axis=1),
                        lambda x: np.broadcast_to(np.vstack([np.eye(3), np.zeros((4, 3))]), (len(x), 7, 3)))
    cube = affine_cell([0, 0, 0], np.eye(3))
    value, lift = cs_action(HALF_P1, atlas, section, [cube], t_order=3)
    assert min(value, 1 - value) <= 1e-10 and abs(lift) <= 1e-10


def test_path_endpoints_must_share_atlas():
    with pytest.raises(ValueError):
        ConnectionPath(instanton_atlas(), hopf_atlas())


@pytest.mark.parametrize("atlas,lam,box", [
    (hopf_atlas(1, 0.3), C1, ([0.2, 0.3, 0.4], [1, 1, 1])),
    (trivial_atlas("u(1)", 2, u1_torus_connection(0.3, 2)), C1, BOX2),
], ids=["hopf", "u1_torus"])
def test_cs_defining_identity(atlas, lam, box):
    assert cs_defining_residual(lam, atlas, atlas.chart_names()[0], box) <= 1e-4


def test_dcw_closed_instanton():
    cw = chern_weil_form(C1, hopf_atlas(1, 0.3).connections["N"])
    assert exterior_derivative(cw).max_abs(sample_points([0.2] * 3, [1] * 3, 8, seed=3)) <= 1e-4


def test_two_connection_identity_u1():
    a0 = hopf_atlas(1, 0.0)
    a1 = a0.with_connections(hopf_atlas(1, 0.3).connections)
    res = two_connection_residual(C1, a0, a1, "N", ([0.2, 0.3, 0.4], [1, 1, 1]))
    assert res["identity"] <= 1e-4 and res["closed_form"] <= 1e-8


def test_naturality_of_chern_weil():
    A = instanton_atlas().connections["N"]
    g = linear_map(np.array([[0.8, 0.1, 0, 0.2], [0, 1.1, 0.3, 0], [0.2, 0, 0.9, 0], [0, 0.1, 0, 1.2]]),
                   np.array([0.1, -0.2, 0, 0.3]))
    pts = sample_points([-1] * 4, [1] * 4, 6, seed=9)
    lhs = chern_weil_form(HALF_P1, pullback(g, A))
    rhs = pullback(g, chern_weil_form(HALF_P1, A))
    assert sampled_residual(lhs, rhs, pts) <= 1e-6
