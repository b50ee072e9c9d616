import numpy as np
import pytest
from hypothesis import given, strategies as st

from ccskit.bundle import FIBER_ORIENTATION
from ccskit.complexes import hopf_cell_model
from ccskit.library import hopf_atlas, instanton_atlas, trivial_atlas, u1_torus_connection
from ccskit.lie_core import chern_polynomial, half_p1_polynomial
from ccskit.transgression import (SIGN_CONVENTIONS, transgression_routes_check, area_form_s2, base_generator, cap_fraction,
                                  constant_family, fiber_period_independence, interval_integral, latitude_family,
                                  loop_transgress_form, naturality_check, restrict_to_fiber, scaled_polynomial,
                                  transgress)

HOPF_PERMS = {"X": {"N": "S", "S": "N"}, "E": {"Nf0": "Sf0", "Sf0": "Nf0", "Nf1": "Sf1", "Sf1": "Nf1"}}
HOPF_SIGNS = {"X": {"b1": -1}, "E": {"b1f0": -1, "b1f1": -1, "b0f1": -1}, "F": {"f1": -1}}


@pytest.fixture(scope="module")
def model():
    return hopf_cell_model()


@pytest.fixture(scope="module")
def sweep():
    return loop_transgress_form(area_form_s2(), latitude_family())


def test_u1_fiber_period_and_independence():
    c1 = chern_polynomial(1, 1)
    a0 = trivial_atlas("u(1)", 2)
    a1 = a0.with_connections({"U": u1_torus_connection(0.3, 2)})
    res = fiber_period_independence(c1, a0, a1, [0.3, 0.7])
    assert res["period0"] == pytest.approx(1.0, abs=1e-8)
    assert res["difference"] <= 1e-8


def test_u1_fiber_form_is_angle_form():
    # group chart is the punctured plane; the flat CS form restricts to the normalized angle form,
    # with the sign absorbed by the fiber orientation
    r = restrict_to_fiber(chern_polynomial(1, 1), trivial_atlas("u(1)", 2), [0.1, 0.2])
    assert (r.form.degree, r.form.dim) == (1, 2)
    rng = np.random.default_rng(3)
    y = rng.normal(size=(12, 2))
    r2 = np.sum(y**2, axis=1)
    angle = FIBER_ORIENTATION["u(1)"] * np.stack([-y[:, 1], y[:, 0]], axis=1) / (2 * np.pi * r2[:, None])
    assert np.max(np.abs(np.real(r.form.components(y)) - angle)) <= 1e-8
    assert r.closedness_residual() <= 1e-4


def test_su2_fiber_period_and_independence():
    hp = half_p1_polynomial()
    b0 = instanton_atlas(1.0)
    b1 = b0.with_connections(instanton_atlas(0.5).connections)
    y = np.array([0.3, -0.2, 0.1, 0.4])
    chart = b0.chart_names()[0]
    res = fiber_period_independence(hp, b0, b1, y, chart)
    assert res["period0"] == pytest.approx(1.0, abs=1e-3)
    assert res["difference"] <= 1e-3
    assert restrict_to_fiber(hp, b0, y, chart).closedness_residual(samples=8) <= 1e-4


def test_restrict_to_fiber_rejects_bad_input():
    c1 = chern_polynomial(1, 1)
    a = trivial_atlas("u(1)", 2)
    with pytest.raises(ValueError):
        restrict_to_fiber(c1, a, [0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        restrict_to_fiber(c1, a, [0.1, 0.2], chart="nowhere")


def test_scaled_polynomial_scales_fiber_period():
    a = trivial_atlas("u(1)", 2)
    p = restrict_to_fiber(scaled_polynomial(chern_polynomial(1, 1), 3.0), a, [0.0, 0.0]).period()
    assert p == pytest.approx(3.0, abs=1e-8)


def test_constant_loops_transgress_to_zero():
    tau = loop_transgress_form(area_form_s2(), constant_family([0.0, 0.6, 0.8]))
    assert np.max(np.abs(tau.components(np.linspace(0, 1, 9)[:, None]))) <= 1e-14


def test_latitude_sweep_covers_sphere(sweep):
    assert interval_integral(sweep) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("beta", [0.1, 0.25, 0.5, 0.8])
def test_partial_sweep_matches_cap_area(sweep, beta):
    assert interval_integral(sweep, 0.0, beta) == pytest.approx(cap_fraction(beta), abs=1e-6)


def test_cap_fraction_endpoints():
    assert cap_fraction(0.0) == 0.0
    assert cap_fraction(0.5) == pytest.approx(0.5)
    assert cap_fraction(1.0) == pytest.approx(1.0)


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_loop_transgression_is_linear(a, b):
    om = area_form_s2()
    fam = latitude_family()
    lhs = loop_transgress_form(om.scale(a) + om.scale(b), fam)
    rhs = loop_transgress_form(om, fam).scale(a + b)
    z = np.linspace(0.05, 0.95, 5)[:, None]
    assert np.allclose(lhs.components(z), rhs.components(z), atol=1e-12)


def test_loop_transgress_rejects_mismatch():
    with pytest.raises(ValueError):
        loop_transgress_form(area_form_s2(), constant_family([0.0, 1.0]))


def test_cochain_transgression_generator(model):
    u = base_generator(model["X"])
    t = transgress(model, u, 2)
    assert t.coordinates == (-1,)
    assert SIGN_CONVENTIONS["hopf_cell_fiber"] * t.coordinates[0] == 1


@pytest.mark.parametrize("mult", [-2, 0, 1, 3])
def test_cochain_transgression_is_additive(model, mult):
    u = base_generator(model["X"])
    t = transgress(model, [mult * int(a) for a in u], 2)
    assert (t.coordinates[0] if t.coordinates else 0) == -mult


def test_naturality_under_relabeling(model):
    res = naturality_check(model, HOPF_PERMS, HOPF_SIGNS)
    assert res["natural"]
    assert abs(res["direct"][0]) == 1


def test_routes_agree_on_hopf(model):
    rep = transgression_routes_check(model)
    assert rep.passed, rep.text()
    table = {row[0]: row[1:] for row in rep.values["sign_table"]}
    for mult in (0, 1, 2):
        _, oriented, form, loop = table[f"{mult}u"]
        assert oriented == mult
        assert form == pytest.approx(mult, abs=1e-6)
        assert loop == pytest.approx(mult, abs=1e-6)


def test_hopf_fiber_period_other_chart():
    p = restrict_to_fiber(chern_polynomial(1, 1), hopf_atlas(1), [0.0, 0.0, -1.0], "S").period()
    assert p == pytest.approx(1.0, abs=1e-6)
