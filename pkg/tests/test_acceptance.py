"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import time
from fractions import Fraction

import numpy as np
import pytest

from ccskit.ccs import ccs_contract, connection_dependence, trivial_package, trivialization_report
from ccskit.characters import (coboundary, integer_cocycle_with_periods, iota, j_flat,
                               random_character)
from ccskit.cli import Settings, _atlases, _boxes, _polynomial, verify_all
from ccskit.complexes import (MappingCone, circle_cw, circle_degree_map, cohomology, hopf_cell_model, identity_map,
                              torus_circle_inclusion, torus_simplicial, verify_long_exact)
from ccskit.lie_core import chern_polynomial, half_p1_polynomial
from ccskit.library import instanton_atlas, s4_cells, su2_torus_connection, trivial_atlas, u1_torus_connection
from ccskit.scenario import BUILTIN_SCENARIOS, builtin_scenario
from ccskit.suites import (alpha_residual, characteristic_number, characters_suite, complexes_suite,
                           cs_defining_residual, snf_suite, two_connection_residual)
from ccskit.transgression import (_coord, transgression_routes_check, base_generator, fiber_period_independence,
                                  naturality_check, transgress)

# pinned tolerances and budgets
CHERN_NUMBER_TOL = 1e-3
IDENTITY_TOL = 1e-4
PAIR_TOL_SU2 = 1e-4
PAIR_TOL_ABELIAN = 1e-8
ALPHA_TOL = 1e-4
FIBER_TOL_SU2 = 1e-3
FIBER_TOL_U1 = 1e-8
ACTION_TOL = 1e-3
CONE_PERIOD_TOL = 1e-3
DEPENDENCE_TOL_SU2 = 1e-3
DEPENDENCE_TOL_ABELIAN = 1e-8
FORM_BUDGET_S = 30.0
LES_BUDGET_S = 10.0
VERIFY_ALL_BUDGET_S = 300.0

HOPF_PERMS = {"X": {"N": "S", "S": "N"}, "E": {"Nf0": "Sf0", "Sf0": "Nf0", "Nf1": "Sf1", "Sf1": "Nf1"}}
HOPF_SIGNS = {"X": {"b1": -1}, "E": {"b1f0": -1, "b1f1": -1, "b0f1": -1}, "F": {"f1": -1}}


def scenario_forms(name):
    scn = builtin_scenario(name)
    a0, a1 = _atlases(scn)
    return _polynomial(scn), a0, a1, _boxes(scn, a0)


@pytest.fixture(scope="module")
def su2_packages():
    p0 = trivial_package("su(2)", 3)
    p1 = trivial_package("su(2)", 3, su2_torus_connection(1.0, 3), atlas=p0.atlas)
    return p0, p1


@pytest.fixture(scope="module")
def u1_packages():
    p0 = trivial_package("u(1)", 2)
    p1 = trivial_package("u(1)", 2, u1_torus_connection(0.3, 2), atlas=p0.atlas)
    return p0, p1


def test_criterion_01_instanton_chern_number(criterion):
    start = time.perf_counter()
    atlas, lam = instanton_atlas(1.0), chern_polynomial(2, 2)
    v8 = characteristic_number(lam, atlas, s4_cells(), 8)
    v4 = characteristic_number(lam, atlas, s4_cells(), 4)
    elapsed = time.perf_counter() - start
    e8, e4 = abs(v8 - 1), abs(v4 - 1)
    ok = e8 <= CHERN_NUMBER_TOL and e8 <= e4 / 2 and elapsed <= FORM_BUDGET_S
    assert criterion(1, "instanton Chern number", ok,
                     f"order 8 -> {v8:.9f}, error {e4:.2e} at order 4 -> {e8:.2e} at order 8, {elapsed:.1f} s")


def test_criterion_02_cs_defining_identity(criterion):
    start = time.perf_counter()
    worst = 0.0
    for name in BUILTIN_SCENARIOS:
        lam, a0, a1, boxes = scenario_forms(name)
        for chart, box in boxes.items():
            for atlas in (a0, a1):
                worst = max(worst, cs_defining_residual(lam, atlas, chart, box))
    elapsed = time.perf_counter() - start
    ok = worst <= IDENTITY_TOL and elapsed <= FORM_BUDGET_S
    assert criterion(2, "dCS = pi^* CW on every bundled bundle", ok, f"worst residual {worst:.2e}, {elapsed:.1f} s")


def test_criterion_03_two_connection_identity(criterion):
    lam, a0, a1, boxes = scenario_forms("instanton")
    chart, box = next(iter(boxes.items()))
    su2 = two_connection_residual(lam, a0, a1, chart, box)["identity"]
    lam, a0, a1, boxes = scenario_forms("abelian_torus")
    chart, box = next(iter(boxes.items()))
    ab = two_connection_residual(lam, a0, a1, chart, box)["identity"]
    ok = su2 <= PAIR_TOL_SU2 and ab <= PAIR_TOL_ABELIAN
    assert criterion(3, "CW_1 - CW_0 = dCS(theta_0, theta_1)", ok, f"SU(2) pair {su2:.2e}, abelian pair {ab:.2e}")


def test_criterion_04_alpha_identity(criterion):
    worst = {}
    for name in BUILTIN_SCENARIOS:
        lam, a0, a1, boxes = scenario_forms(name)
        chart, box = next(iter(boxes.items()))
        worst[name] = alpha_residual(lam, a0, a1, chart, box)
    ok = max(worst.values()) <= ALPHA_TOL
    assert criterion(4, "CS_1 - CS_0 + d alpha = pi^* CS(theta_0, theta_1)", ok,
                     ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_criterion_05_fiber_level(criterion):
    b0 = instanton_atlas(1.0)
    b1 = b0.with_connections(instanton_atlas(0.5).connections)
    su2 = fiber_period_independence(half_p1_polynomial(), b0, b1, [0.3, -0.2, 0.1, 0.4], b0.chart_names()[0])
    a0 = trivial_atlas("u(1)", 2)
    a1 = a0.with_connections({"U": u1_torus_connection(0.3, 2)})
    u1 = fiber_period_independence(chern_polynomial(1, 1), a0, a1, [0.3, 0.7])
    ok = (abs(su2["period0"] - 1) <= FIBER_TOL_SU2 and su2["difference"] <= FIBER_TOL_SU2
          and abs(u1["period0"] - 1) <= FIBER_TOL_U1 and u1["difference"] <= FIBER_TOL_U1)
    assert criterion(5, "fiber periods of CS", ok,
                     f"su(2) {su2['period0']:.6f} (spread {su2['difference']:.1e}), "
                     f"u(1) {u1['period0']:.10f} (spread {u1['difference']:.1e})")


def test_criterion_06_level_quantization(criterion):
    from ccskit.ccs import boundary_action_check, winding_gauge_check

    w = winding_gauge_check()
    b = boundary_action_check()
    dw = abs(w["difference"] - w["nearest integer"])
    db = abs(b["difference"] - b["nearest integer"])
    ok = dw <= ACTION_TOL and abs(w["nearest integer"]) == 1 and db <= ACTION_TOL
    assert criterion(6, "CS action quantization", ok,
                     f"winding gauge {w['difference']:.6f}, fixed boundary {b['difference']:.6f}")


def test_criterion_07_exact_integer_algebra(criterion):
    snf = snf_suite(count=200, max_dim=40, entry=9)
    cx = complexes_suite()
    relevant = [c for c in cx.checks if c.name.startswith(("H^*", "d^2", "cone d^2"))]
    ok = snf.passed and all(c.passed for c in relevant)
    assert criterion(7, "Smith normal form, cohomology, d^2 = 0", ok,
                     f"200 SNF certificates, {len(relevant)} cohomology and d^2 checks")


def test_criterion_08_mapping_cone_sequences(criterion):
    start = time.perf_counter()
    S = circle_cw()
    pairs = [torus_circle_inclusion(3)[0], hopf_cell_model()["p"], circle_degree_map(S, S, 2)]
    results = [verify_long_exact(phi) for phi in pairs]
    junctions = sum(len(r["junctions"]) for r in results)
    acyclic = all(H.describe() == "0" for H in cohomology(MappingCone(identity_map(torus_simplicial(3).chain))))
    elapsed = time.perf_counter() - start
    ok = all(r["passed"] for r in results) and acyclic and elapsed <= LES_BUDGET_S
    assert criterion(8, "long exact sequences of mapping cones", ok,
                     f"{junctions} junctions over 3 pairs, identity cone acyclic {acyclic}, {elapsed:.1f} s")


def test_criterion_09_character_model(criterion):
    rep = characters_suite(boundaries=1000)
    rng = np.random.default_rng(9)
    C = torus_simplicial(3).chain
    composites = True
    for _ in range(10):
        mu = [Fraction(int(a), 7) for a in rng.integers(-20, 21, size=C.rank(1))]
        x = iota(C, 2, mu, "rational")
        composites &= list(x.curvature) == list(coboundary(C, 1, mu)) and not any(x.c)
        z = integer_cocycle_with_periods(C, 1, [int(a) for a in rng.integers(-3, 4, size=2)])
        u = [Fraction(int(a), 5) + int(b) for a, b in zip(z, rng.integers(-2, 3, size=C.rank(1)))]
        composites &= not any(j_flat(C, 2, u, "rational").curvature)
        y = random_character(C, 2, rng, "rational", flat=True)
        composites &= not any(y.curvature)
    ok = rep.passed and composites
    assert criterion(9, "cochain model of differential characters", ok,
                     f"{len(rep.checks)} suite checks, composites exact {composites}")


def test_criterion_10_ccs_contract(criterion, su2_packages, u1_packages):
    reps = [ccs_contract(su2_packages[0]), ccs_contract(u1_packages[0]), ccs_contract(u1_packages[1])]
    gaps = [c.value for c in reps[0].checks if c.name.startswith("cone periods")]
    ok = all(r.passed for r in reps) and gaps and gaps[0] <= CONE_PERIOD_TOL
    assert criterion(10, "Cheeger-Chern-Simons contract", ok,
                     f"SU(2) fiber CS period {reps[0].values['fiber CS period']:.9f}, cone period gap {gaps[0]:.1e}")


def test_criterion_11_connection_dependence(criterion, su2_packages, u1_packages):
    su2 = connection_dependence(*su2_packages).discrepancy
    ab = connection_dependence(*u1_packages).discrepancy
    ok = su2 <= DEPENDENCE_TOL_SU2 and ab <= DEPENDENCE_TOL_ABELIAN
    assert criterion(11, "connection dependence of CCS", ok, f"SU(2) {su2:.2e}, abelian {ab:.2e}")


def test_criterion_12_differential_trivialization(criterion, su2_packages):
    rep = trivialization_report(su2_packages[0], samples=20)
    names = {c.name for c in rep.checks}
    required = {"defining identity of q^", "rho unique (nullity 0)", "no second rho satisfies the identity",
                "torsor: q^ + pi^* h with rho - curv(h) (20 random h)",
                "q^ + iota(eta) rejected by the defining identity"}
    ok = rep.passed and required <= names
    assert criterion(12, "differential trivialization", ok, f"{len(rep.checks)} checks, missing {required - names or 'none'}")


def test_criterion_13_transgression(criterion):
    model = hopf_cell_model()
    t = transgress(model, base_generator(model["X"]), 2)
    generator = abs(_coord(t)) == 1 and t.quotient_free_rank == 1
    nat = naturality_check(model, HOPF_PERMS, HOPF_SIGNS)
    rep = transgression_routes_check(model)
    table = "; ".join(f"{r[0]}: cochain {r[1]} oriented {r[2]} form {r[3]:.6f} loop {r[4]:.6f}"
                      for r in rep.values["sign_table"])
    ok = generator and nat["natural"] and rep.passed
    assert criterion(13, "transgression routes on the Hopf fibration", ok, table)


def test_criterion_14_verify_all(criterion):
    start = time.perf_counter()
    summary, reports = verify_all(Settings())
    elapsed = time.perf_counter() - start
    failures = sum(not c.passed for r in reports for c in r.checks)
    ok = summary.passed and failures == 0 and elapsed <= VERIFY_ALL_BUDGET_S
    assert criterion(14, "verify-all", ok,
                     f"{sum(len(r.checks) for r in reports)} checks, {failures} failures, {elapsed:.1f} s")
