from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ccskit.ccs import hopf_base_curvature
from ccskit.characters import (PeriodError, breve_i, breve_p, characters_equal, coboundary, cycle_basis,
                               defining_relation_defect, discretize_form, evaluate, from_curvature, iota, iota_pi,
                               is_zero_character, j_flat, pair, random_character, stokes_defect, verify_sequences,
                               zero_character)
from ccskit.complexes import (boundary_of_cube, circle_complex, circle_cw, circle_degree_map, cohomology,
                              cone_of_map, fundamental_cycle, identity_map, imatmul, solve_integer,
                              torus_circle_inclusion, torus_simplicial)
from ccskit.geometry import FormField, constant_form

T = torus_simplicial(3)
TC = T.chain


def frac(values):
    return np.array([Fraction(v) for v in values], dtype=object)


def test_zero_cycle():
    x = random_character(TC, 2, np.random.default_rng(1))
    assert evaluate(x, [0] * TC.rank(1)) == 0


def test_iota_on_cycles(rng):
    mu = frac(rng.integers(-20, 20, size=TC.rank(1))) / 7
    x = iota(TC, 2, mu, "rational")
    for j in range(cycle_basis(TC, 1).shape[1]):
        z = cycle_basis(TC, 1)[:, j]
        assert evaluate(x, z) == pair(mu, z) % 1


def test_iota_of_integral_closed_cochain_vanishes(rng):
    gen = cohomology(TC)[1].representatives
    mu = np.dot(gen, np.array([3, -2], dtype=object)) + coboundary(TC, 0, frac(rng.integers(-9, 9, size=TC.rank(0))) / 5)
    assert is_zero_character(iota(TC, 2, mu, "rational"))


def test_iota_zero_and_composites(rng):
    assert is_zero_character(iota(TC, 2, [0] * TC.rank(1)))
    mu = frac(rng.integers(-9, 9, size=TC.rank(1))) / 4
    x = iota(TC, 2, mu, "rational")
    assert list(x.curvature) == list(coboundary(TC, 1, mu))
    assert all(v == 0 for v in x.characteristic_class)


def _area_cochain():
    z = fundamental_cycle(T)
    return frac([int(v) for v in z]) / len(z)


def test_holonomy_along_homologous_cycles():
    x = from_curvature(TC, 2, _area_cochain(), mode="rational")
    Z = cycle_basis(TC, 1)
    rng = np.random.default_rng(4)
    for j in range(Z.shape[1]):
        a = np.array([int(v) for v in rng.integers(-2, 3, size=TC.rank(2))], dtype=object)
        moved = Z[:, j] + imatmul(TC.d(2), a.reshape(-1, 1)).reshape(-1)
        # brute force: x(z + da) - x(z) = <omega, a> - <c, a>
        expected = (evaluate(x, Z[:, j]) + pair(x.omega, a) - pair(x.c, a)) % 1
        assert evaluate(x, moved) == expected


def test_evaluate_rejects_non_cycle():
    x = zero_character(TC, 2)
    z = [0] * TC.rank(1)
    z[0] = 1
    with pytest.raises(ValueError):
        evaluate(x, z)


def test_j_flat_zero_and_pairing(rng):
    assert is_zero_character(j_flat(TC, 2, [0] * TC.rank(1)))
    u = np.dot(cohomology(TC)[1].representatives, frac([1, 2]) / 3)
    x = j_flat(TC, 2, u, "rational")
    assert all(v == 0 for v in x.curvature)
    for j in range(cycle_basis(TC, 1).shape[1]):
        z = cycle_basis(TC, 1)[:, j]
        assert evaluate(x, z) == pair(u, z) % 1


def test_j_flat_on_torsion_class():
    S = circle_cw()
    cone = cone_of_map(circle_degree_map(S, S, 2))
    H2 = cohomology(cone)[2]
    assert H2.torsion == [2]
    t = H2.representatives[:, 0]
    beta = solve_integer(cone.complex.delta(1), 2 * t)
    x = j_flat(cone, 2, frac(beta) / 2, "rational")
    assert all(v == 0 for v in x.omega)
    assert H2.coordinates(x.c) == (1,)


def test_j_flat_rejects_non_lift():
    with pytest.raises(ValueError):
        j_flat(TC, 2, [0.5] + [0] * (TC.rank(1) - 1))


def test_breve_composites(rng):
    phi, S, _ = torus_circle_inclusion(3)
    cone = cone_of_map(phi)
    for _ in range(3):
        y = random_character(phi.source, 1, rng)
        rel = breve_i(y, cone)
        assert is_zero_character(breve_p(rel))
        assert np.allclose(np.asarray(rel.covariant_derivative, dtype=float), -np.asarray(y.omega, dtype=float))
    flat = j_flat(phi.source, 1, [Fraction(1, 3)] * phi.source.rank(0), "rational")
    rel = breve_i(flat, cone)
    assert all(v == 0 for v in rel.omega)


def test_global_section_identity_cone(rng):
    cone = cone_of_map(identity_map(TC))
    rho = frac(rng.integers(-9, 9, size=TC.rank(1))) / 5
    x = iota_pi(cone, 2, rho, [0] * TC.rank(0), "rational")
    assert characters_equal(breve_p(x), iota(TC, 2, rho, "rational"))[0]


def test_float_snap_rejects_far_periods():
    omega = np.asarray(_area_cochain(), dtype=float) * (1 + 1e-3)
    with pytest.raises(PeriodError):
        from_curvature(TC, 2, omega)
    x = from_curvature(TC, 2, np.asarray(_area_cochain(), dtype=float) * (1 + 1e-9))
    assert x.snap_correction <= 1e-8


@pytest.mark.parametrize("model,k", [(circle_complex(3).chain, 1), (TC, 1), (TC, 2)], ids=["circle1", "torus1", "torus2"])
def test_short_sequences(model, k):
    res = verify_sequences(model, k, samples=5)
    assert res["passed"], [c for c in res["checks"] if not c.passed]


@pytest.mark.parametrize("k", [1, 2])
def test_long_sequence_torus_circle(k):
    res = verify_sequences(cone_of_map(torus_circle_inclusion(3)[0]), k, samples=5)
    assert res["passed"], [c for c in res["checks"] if not c.passed]


def test_discretize_zero():
    X = boundary_of_cube(3)
    assert np.all(discretize_form(constant_form(3, 2, {}), X.geometry[2]) == 0)


def test_hopf_curvature_total():
    X, cw = hopf_base_curvature(1)
    assert abs(abs(pair(cw, fundamental_cycle(X))) - 1) <= 1e-4


def test_stokes_compatibility():
    X = boundary_of_cube(3)
    w = FormField(3, 1, lambda x: np.stack([np.sin(x[:, 1]), x[:, 0] * x[:, 2], np.exp(0.2 * x[:, 0])], axis=1))
    assert stokes_defect(w, X.geometry[1], X.geometry[2], X.chain) <= 1e-4


@given(st.integers(0, 2 ** 31), st.sampled_from([1, 2]))
def test_defining_relation_rational(seed, k):
    rng = np.random.default_rng(seed)
    x = random_character(TC, k, rng, "rational")
    for _ in range(5):
        a = [int(v) for v in rng.integers(-3, 4, size=TC.rank(k))]
        assert defining_relation_defect(x, a) == 0


@given(st.integers(0, 2 ** 31))
def test_flat_characters_have_zero_curvature(seed):
    x = random_character(TC, 2, np.random.default_rng(seed), "rational", flat=True)
    assert all(v == 0 for v in x.curvature)
