import numpy as np
import pytest

from ccskit.ccs import (build_ccs, build_cheeger_simons, ccs_contract, check_def_q_hat, connection_dependence,
                        differential_trivialization, fiber_restriction, hopf_cheeger_simons, hopf_cone_class,
                        multiplicativity_defect, pi_star, torsor_difference, trivial_package, trivialization_report)
from ccskit.characters import (PeriodError, breve_p, characters_equal, cycle_basis, evaluate, pair, pullback,
                               random_character)
from ccskit.complexes import ChainMap, boundary_of_cube, cohomology, fundamental_cycle, imat
from ccskit.library import trivial_atlas, u1_torus_connection
from ccskit.lie_core import chern_polynomial


@pytest.fixture(scope="module")
def flat_u1():
    return trivial_package("u(1)", 2)


@pytest.fixture(scope="module")
def curved_u1(flat_u1):
    return trivial_package("u(1)", 2, u1_torus_connection(0.3, 2), atlas=flat_u1.atlas)


def test_flat_cheeger_simons_vanishes_on_cycles(flat_u1):
    w = build_cheeger_simons(flat_u1)
    assert np.max(np.abs(w.curvature)) == 0
    Z = cycle_basis(flat_u1.X, 1)
    assert all(min(evaluate(w, Z[:, j]), 1 - evaluate(w, Z[:, j])) <= 1e-12 for j in range(Z.shape[1]))


@pytest.mark.parametrize("which", ["flat_u1", "curved_u1"])
def test_contract(which, request):
    pkg = request.getfixturevalue(which)
    rep = ccs_contract(pkg)
    assert rep.passed, rep.text()
    assert rep.values["fiber CS period"] == pytest.approx(1.0, abs=1e-8)


def test_p_of_ccs_is_cheeger_simons(curved_u1):
    ok, disc = characters_equal(breve_p(build_ccs(curved_u1)), build_cheeger_simons(curved_u1), 1e-9)
    assert ok, disc


def test_matching_condition_enforced(curved_u1):
    from dataclasses import replace

    bad = replace(curved_u1, cw=curved_u1.cw + 0.5 / len(curved_u1.cw))
    with pytest.raises(PeriodError):
        build_cheeger_simons(bad)


def test_dependence_same_connection(flat_u1):
    assert connection_dependence(flat_u1, flat_u1).discrepancy <= 1e-12


def test_dependence_abelian(flat_u1, curved_u1):
    assert connection_dependence(flat_u1, curved_u1).discrepancy <= 1e-8


def test_dependence_needs_one_atlas(flat_u1):
    other = trivial_package("u(1)", 2, u1_torus_connection(0.3, 2))
    with pytest.raises(ValueError):
        connection_dependence(flat_u1, other)


def test_trivialization_defining_identity(curved_u1):
    tr = differential_trivialization(curved_u1)
    ok, disc, _ = check_def_q_hat(curved_u1, tr.q_hat, tr.rho)
    assert ok, disc
    assert pair(tr.q_hat.c, curved_u1.fiber_cycle) == 1
    # fiber restriction: curvature period equals the fiber CS period
    assert pair(tr.q_hat.omega, curved_u1.fiber_cycle) == pytest.approx(
        pair(curved_u1.cs, curved_u1.fiber_cycle), abs=1e-12)


def test_trivialization_rejects_bad_class(curved_u1):
    with pytest.raises(ValueError):
        differential_trivialization(curved_u1, q=[0] * curved_u1.E.rank(1))


def test_torsor(curved_u1, rng):
    tr = differential_trivialization(curved_u1)
    h = random_character(curved_u1.X, 1, rng, "float")
    q2 = tr.q_hat + pi_star(curved_u1, h)
    assert check_def_q_hat(curved_u1, q2, tr.rho - h.omega)[0]
    rec = torsor_difference(curved_u1, q2, tr.q_hat)
    assert rec is not None and characters_equal(rec, h, 1e-9)[0]
    assert characters_equal(fiber_restriction(curved_u1, q2), fiber_restriction(curved_u1, tr.q_hat), 1e-9)[0]


def test_trivialization_report(curved_u1):
    rep = trivialization_report(curved_u1, samples=5)
    assert rep.passed, rep.text()


def test_hopf_cheeger_simons():
    out = hopf_cheeger_simons(1)
    assert out["chern_number"] == 1
    assert out["period"] == pytest.approx(1, abs=1e-4)
    assert out["relation_on_fundamental_cycle"] <= 1e-9


def test_hopf_cone_class():
    out = hopf_cone_class()
    assert out["closed"] and out["maps_to_u"] and out["H2_cone"] == "Z"
    assert abs(out["coordinates"][0]) == 1


def _reflection(X):
    """Cellular map of the cube-boundary sphere induced by z -> -z (degree -1)."""
    mats = []
    for k, cells in enumerate(X.cells):
        M = imat(np.zeros((len(cells), len(cells)), dtype=int))
        for j, face in enumerate(cells):
            img = face[:2] + (-face[2],)
            M[X.index(k, img), j] = -1 if face[2] == 0 else 1
        mats.append(M)
    return ChainMap(X.chain, X.chain, mats)


def test_cheeger_simons_naturality_degree():
    x = hopf_cheeger_simons(1)["character"]
    X = boundary_of_cube(3)
    f = _reflection(X)
    H2 = cohomology(X.chain)[2]
    assert H2.coordinates(pullback(x, f).c) == tuple(-v for v in H2.coordinates(x.c))


def test_multiplicativity_abelian():
    atlas = trivial_atlas("u(1)", 3, u1_torus_connection(0.3, 3))
    c1 = chern_polynomial(1, 1)
    rep = multiplicativity_defect(c1, c1, atlas)
    assert rep.passed, rep.text()
    assert rep.values["max |d Delta| (finite differences)"] <= 1e-8


def test_multiplicativity_flat_second_factor():
    atlas = trivial_atlas("u(1)", 3)
    c1 = chern_polynomial(1, 1)
    rep = multiplicativity_defect(c1, c1, atlas)
    assert rep.passed and rep.values["max |d Delta| (finite differences)"] <= 1e-4
