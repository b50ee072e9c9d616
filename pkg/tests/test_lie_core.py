import math
from itertools import combinations, permutations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ccskit.lie_core import (PAULI, SU2_BASIS, AlgebraElement, bracket, chern_polynomial, evaluate_polynomial,
                             from_coefficients, half_p1_polynomial, membership_defect, pontryagin_polynomial,
                             random_element, random_group_element, standard_polynomial)

TAGS = ["su(2)", "su(3)", "u(2)", "so(3)", "so(4)"]


def eigen_chern(x, k):
    """e_k of the eigenvalues of (i/2pi) X, i.e. the t^k coefficient of det(I + t(i/2pi)X)."""
    ev = np.linalg.eigvals(1j / (2 * math.pi) * np.asarray(x))
    return sum(np.prod(c) for c in combinations(ev, k))


def polarize(lam, args):
    """Symmetric multilinear value from the diagonal via inclusion-exclusion."""
    k = len(args)
    total = 0.0
    for r in range(1, k + 1):
        for subset in combinations(range(k), r):
            s = sum(args[i] for i in subset)
            total += (-1) ** (k - r) * lam.evaluate_batch([s] * k)
    return total / math.factorial(k)


def test_membership_checks():
    assert membership_defect(SU2_BASIS[0], "su") == 0
    with pytest.raises(ValueError):
        AlgebraElement(np.eye(2), "su(2)")
    with pytest.raises(ValueError):
        AlgebraElement(1j * np.eye(2), "su(2)")
    AlgebraElement(1j * np.eye(2), "u(2)")
    with pytest.raises(ValueError):
        AlgebraElement(np.zeros((2, 2)), "su(3)")


def test_bracket_self_is_zero(rng):
    x = random_element("su(3)", rng)
    assert np.max(np.abs(bracket(x, x).entries)) == 0


def test_bracket_pauli_table():
    x = AlgebraElement(0.5j * PAULI[0], "su(2)")
    y = AlgebraElement(0.5j * PAULI[1], "su(2)")
    expected = -0.5j * PAULI[2]
    # 2x2 product by hand: sigma_x sigma_y = i sigma_z
    assert np.allclose(bracket(x, y).entries, expected, atol=1e-15)


def test_bracket_rejects_mismatch(rng):
    with pytest.raises(ValueError):
        bracket(random_element("su(2)", rng), random_element("u(2)", rng))


@pytest.mark.parametrize("tag", TAGS)
def test_jacobi_and_closure(tag, rng):
    for _ in range(20):
        x, y, z = (random_element(tag, rng) for _ in range(3))
        jac = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y))
        assert np.max(np.abs(jac.entries)) <= 1e-12
        assert membership_defect(bracket(x, y).entries, tag.split("(")[0]) <= 1e-12


@pytest.mark.parametrize("k", [1, 2, 3])
def test_chern_matches_eigenvalue_oracle(k, rng):
    lam = chern_polynomial(k, 3)
    for _ in range(10):
        x = random_element("u(3)", rng).entries
        assert abs(lam.evaluate_batch([x] * k) - eigen_chern(x, k).real) <= 1e-12
        assert abs(eigen_chern(x, k).imag) <= 1e-12


def test_chern2_on_sigma_z():
    a = AlgebraElement(0.5j * PAULI[2], "su(2)")
    # eigenvalues of (i/2pi)(i sigma_z/2) are -+1/(4pi); their product is -1/(16pi^2)
    assert evaluate_polynomial(chern_polynomial(2, 2), a, a) == pytest.approx(-1 / (16 * math.pi ** 2), abs=1e-15)


def test_chern1_is_trace():
    lam = standard_polynomial("chern_1", 1)
    f = np.array([[0.7j]])
    assert lam.evaluate_batch([f]) == pytest.approx((1j / (2 * math.pi) * 0.7j).real)
    assert standard_polynomial("chern_2", 2).degree == 2


def test_half_p1_is_c2():
    a, b = SU2_BASIS[0], SU2_BASIS[0] + SU2_BASIS[1]
    assert half_p1_polynomial().evaluate_batch([a, b]) == chern_polynomial(2, 2).evaluate_batch([a, b])


def test_pontryagin_sign(rng):
    x = random_element("so(4)", rng).entries
    assert pontryagin_polynomial(1, 4).evaluate_batch([x, x]) == pytest.approx(-eigen_chern(x, 2).real, abs=1e-12)


@pytest.mark.parametrize("tag,n", [("chern_3", 2), ("pontryagin_2", 3), ("half_p1", 3), ("euler", 2)])
def test_unsupported_tags(tag, n):
    with pytest.raises(ValueError):
        standard_polynomial(tag, n)


def test_arity_mismatch():
    with pytest.raises(ValueError):
        evaluate_polynomial(chern_polynomial(2, 2), SU2_BASIS[0])


def test_zero_argument_kills(rng):
    lam = chern_polynomial(3, 3)
    x, y = (random_element("u(3)", rng).entries for _ in range(2))
    assert lam.evaluate_batch([x, np.zeros((3, 3)), y]) == 0


def test_product_polynomial(rng):
    c1 = chern_polynomial(1, 2)
    x = random_element("u(2)", rng).entries
    assert (c1 * c1).evaluate_batch([x, x]) == pytest.approx(c1.evaluate_batch([x]) ** 2, abs=1e-12)


def test_custom_polynomial():
    lam = from_coefficients(2, {(2,): -1.0, (1, 1): 0.5})
    x = SU2_BASIS[2]
    assert lam.evaluate_batch([x, x]) == pytest.approx(0.5, abs=1e-15)


seeds = st.integers(0, 2 ** 31)


@given(seeds, st.sampled_from([1, 2, 3]))
def test_symmetry(seed, k):
    rng = np.random.default_rng(seed)
    lam = chern_polynomial(k, 3)
    args = [random_element("u(3)", rng).entries for _ in range(k)]
    ref = lam.evaluate_batch(args)
    for perm in permutations(range(k)):
        assert abs(lam.evaluate_batch([args[i] for i in perm]) - ref) <= 1e-10


@given(seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_multilinearity(seed, a, b):
    rng = np.random.default_rng(seed)
    lam = chern_polynomial(3, 3)
    x, y, z, w = (random_element("u(3)", rng).entries for _ in range(4))
    lhs = lam.evaluate_batch([a * x + b * y, z, w])
    rhs = a * lam.evaluate_batch([x, z, w]) + b * lam.evaluate_batch([y, z, w])
    assert abs(lhs - rhs) <= 1e-10


@given(seeds)
def test_polarization_oracle(seed):
    rng = np.random.default_rng(seed)
    lam = chern_polynomial(2, 3)
    args = [random_element("u(3)", rng).entries for _ in range(2)]
    assert abs(lam.evaluate_batch(args) - polarize(lam, args)) <= 1e-10


@pytest.mark.parametrize("tag,lam", [("su(2)", chern_polynomial(2, 2)), ("su(3)", chern_polynomial(3, 3)),
                                     ("so(4)", pontryagin_polynomial(1, 4)), ("su(2)", half_p1_polynomial())])
def test_ad_invariance(tag, lam, rng):
    for _ in range(100):
        g = random_group_element(tag, rng)
        args = [random_element(tag, rng) for _ in range(lam.degree)]
        moved = [a.adjoint(g) for a in args]
        assert abs(evaluate_polynomial(lam, *moved) - evaluate_polynomial(lam, *args)) <= 1e-10
