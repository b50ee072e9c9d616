"""Form level verification suites: characteristic numbers and Chern-Simons identities."""

from __future__ import annotations

from math import comb

import numpy as np

from .bundle import (
    BundleAtlas,
    ConnectionPath,
    alpha_form,
    chern_weil_form,
    compatibility_defect,
    cs_one_connection,
    cs_two_closed_form,
    cs_two_connections,
    curvature_form,
    projection,
)
from .geometry import (
    DEFAULT_FD_STEP,
    DEFAULT_QUAD_ORDER,
    FormField,
    evaluate_chunked,
    exterior_derivative,
    integrate,
    pullback,
)
from .lie_core import InvariantPolynomial
from .report import Check, Report


def base_samples(box, count: int = 8, seed: int = 0) -> np.ndarray:
    """Uniform points in ``box = (lower, upper)``."""
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    rng = np.random.default_rng(seed)
    return lo + (hi - lo) * rng.random((count, len(lo)))


def total_samples(atlas: BundleAtlas, box, count: int = 8, seed: int = 0) -> np.ndarray:
    """Base points from ``box`` paired with random points on the unit sphere of the group chart."""
    x = base_samples(box, count, seed)
    rng = np.random.default_rng(seed + 1)
    y = rng.normal(size=(count, atlas.group.m))
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    return np.concatenate([x, y], axis=1)


def _max_abs(form: FormField, pts: np.ndarray) -> float:
    v = evaluate_chunked(form, pts)
    return float(np.max(np.abs(v))) if v.size else 0.0


def max_curvature(atlas: BundleAtlas, boxes: dict, count: int = 16, seed: int = 0,
                  h: float = DEFAULT_FD_STEP) -> dict:
    """``max |F|`` per chart at sample points."""
    return {c: _max_abs(curvature_form(atlas.connections[c], h), base_samples(boxes[c], count, seed))
            for c in boxes}


def overlap_defect(atlas: BundleAtlas, seed: int = 0, h: float = DEFAULT_FD_STEP) -> float:
    """Largest gauge compatibility defect over the transitions."""
    worst = 0.0
    if atlas.overlap_samples is None:
        return worst
    samples = atlas.overlap_samples(seed)
    for tr in atlas.transitions:
        x = samples.get((tr.source, tr.target))
        if x is not None:
            worst = max(worst, compatibility_defect(atlas, tr, x, h))
    return worst


def characteristic_number(lam: InvariantPolynomial, atlas: BundleAtlas, cells: dict,
                          order: int = DEFAULT_QUAD_ORDER, h: float = DEFAULT_FD_STEP) -> float:
    """``sum_charts int CW(lam)`` over cells given per chart."""
    total = 0.0
    for chart, cs in cells.items():
        total += float(np.real(integrate(chern_weil_form(lam, atlas.connections[chart], h), cs, order)))
    return total


def convergence_study(lam: InvariantPolynomial, atlas: BundleAtlas, cells: dict, target: float,
                      orders=(4, 8, 16), h: float = DEFAULT_FD_STEP) -> list:
    """``(order, value, |value - target|)`` for a sequence of quadrature orders."""
    out = []
    for n in orders:
        v = characteristic_number(lam, atlas, cells, n, h)
        out.append((n, v, abs(v - target)))
    return out


def _pulled_cw(lam: InvariantPolynomial, atlas: BundleAtlas, chart: str, h: float) -> FormField:
    if 2 * lam.degree > atlas.base_dim:
        n, p = atlas.total_dim, 2 * lam.degree
        return FormField(n, p, lambda z: np.zeros((len(z), comb(n, p))), (), None, "0")
    return pullback(projection(atlas), chern_weil_form(lam, atlas.connections[chart], h))


def cs_defining_residual(lam: InvariantPolynomial, atlas: BundleAtlas, chart: str, box, count: int = 6,
                         seed: int = 0, t_order: int | None = None, h: float = DEFAULT_FD_STEP) -> float:
    """``max |d CS_theta(lam) - pi^* CW_theta(lam)|`` on the total space over ``chart``."""
    t_order = t_order or lam.degree + 1
    cs = cs_one_connection(lam, atlas, chart, t_order, h)
    cw = _pulled_cw(lam, atlas, chart, h)
    pts = total_samples(atlas, box, count, seed)
    return _max_abs(exterior_derivative(cs, h) - cw, pts)


def two_connection_residual(lam: InvariantPolynomial, atlas0: BundleAtlas, atlas1: BundleAtlas, chart: str, box,
                            count: int = 8, seed: int = 0, t_order: int | None = None,
                            h: float = DEFAULT_FD_STEP) -> dict:
    """``CW_1 - CW_0 - d CS(theta_0, theta_1)`` and the closed-form oracle comparison on a base chart."""
    t_order = t_order or lam.degree + 1
    path = ConnectionPath(atlas0, atlas1)
    cs = cs_two_connections(lam, path, chart, t_order, h)
    pts = base_samples(box, count, seed)
    oracle = cs_two_closed_form(lam, atlas0.connections[chart], atlas1.connections[chart], t_order, h)
    out = {"closed_form": _max_abs(cs - oracle, pts)}
    if 2 * lam.degree <= atlas0.base_dim:
        lhs = chern_weil_form(lam, atlas1.connections[chart], h) - chern_weil_form(lam, atlas0.connections[chart], h)
        out["identity"] = _max_abs(lhs - exterior_derivative(cs, h), pts)
    else:
        # top degree exceeded: both sides vanish identically
        out["identity"] = 0.0
    return out


def alpha_residual(lam: InvariantPolynomial, atlas0: BundleAtlas, atlas1: BundleAtlas, chart: str, box,
                   count: int = 4, seed: int = 0, t_order: int | None = None, h: float = DEFAULT_FD_STEP) -> float:
    """``max |CS_1 - CS_0 + d alpha - pi^* CS(theta_0, theta_1)|`` on the total space."""
    t_order = t_order or lam.degree + 1
    path = ConnectionPath(atlas0, atlas1)
    cs0 = cs_one_connection(lam, atlas0, chart, t_order, h)
    cs1 = cs_one_connection(lam, atlas1, chart, t_order, h)
    alpha = alpha_form(lam, path, chart, t_order, h)
    base = pullback(projection(atlas0), cs_two_connections(lam, path, chart, t_order, h))
    pts = total_samples(atlas0, box, count, seed)
    return _max_abs(cs1 - cs0 + exterior_derivative(alpha, h) - base, pts)


def form_identities_report(lam: InvariantPolynomial, atlas0: BundleAtlas, atlas1: BundleAtlas | None, boxes: dict,
                           tolerance: float = 1e-4, pair_tolerance: float | None = None, seed: int = 0,
                           t_order: int | None = None, h: float = DEFAULT_FD_STEP, alpha: bool = True) -> Report:
    """Defining identity on every chart, plus the two-connection and alpha identities for a pair."""
    t_order = t_order or lam.degree + 1
    rep = Report(f"Chern-Simons identities {lam.name} on {atlas0.name}",
                 environment={"fd_step": h, "t_order": t_order, "seed": seed})
    pair_tolerance = tolerance if pair_tolerance is None else pair_tolerance
    for chart, box in boxes.items():
        rep.add(Check.below(f"dCS - pi*CW [theta0:{chart}]",
                            cs_defining_residual(lam, atlas0, chart, box, seed=seed, t_order=t_order, h=h), tolerance))
    if atlas1 is not None:
        chart, box = next(iter(boxes.items()))
        rep.add(Check.below(f"dCS - pi*CW [theta1:{chart}]",
                            cs_defining_residual(lam, atlas1, chart, box, seed=seed, t_order=t_order, h=h), tolerance))
        two = two_connection_residual(lam, atlas0, atlas1, chart, box, seed=seed, t_order=t_order, h=h)
        rep.add(Check.below("CW1 - CW0 - dCS(theta0, theta1)", two["identity"], pair_tolerance))
        rep.add(Check.below("CS(theta0, theta1) vs closed form", two["closed_form"], pair_tolerance))
        if alpha:
            rep.add(Check.below("CS1 - CS0 + d alpha - pi*CS(theta0, theta1)",
                                alpha_residual(lam, atlas0, atlas1, chart, box, seed=seed, t_order=t_order, h=h),
                                tolerance))
    return rep


# exact algebra ----------------------------------------------------------------------------------


def snf_suite(count: int = 200, max_dim: int = 40, entry: int = 9, seed: int = 0) -> Report:
    """``U M V = D`` and the Smith conditions on random integer matrices."""
    from .complexes import smith_normal_form, verify_smith

    rng = np.random.default_rng(seed)
    failures = []
    for i in range(count):
        m, n = (int(v) for v in rng.integers(1, max_dim + 1, size=2))
        M = rng.integers(-entry, entry + 1, size=(m, n))
        res = verify_smith(M, smith_normal_form(M))
        if not all(res.values()):
            failures.append((i, m, n, [k for k, v in res.items() if not v]))
    rep = Report("Smith normal form", environment={"seed": seed, "count": count, "max_dim": max_dim})
    rep.add(Check.flag(f"U M V = D on {count} random matrices", not failures, f"failures {failures[:3]}" if failures else ""))
    return rep


def _cohomology_oracles() -> list:
    from .complexes import circle_complex, hopf_cell_model, lens_cw, rp2_simplicial, sphere_cw, torus_cw, torus_simplicial

    return [
        ("circle", circle_complex(4).chain, ["Z", "Z"]),
        ("torus (simplicial)", torus_simplicial(3).chain, ["Z", "Z + Z", "Z"]),
        ("torus T3 (cubical)", torus_cw(3).chain, ["Z", "Z + Z + Z", "Z + Z + Z", "Z"]),
        ("RP2", rp2_simplicial().chain, ["Z", "0", "Z/2"]),
        ("lens L(3,1)", lens_cw(3), ["Z", "0", "Z/3", "Z"]),
        ("S3 (Hopf total space)", hopf_cell_model()["E"].chain, ["Z", "0", "0", "Z"]),
        ("S3 (two-cell sphere)", sphere_cw(3, 4).chain, ["Z", "0", "0", "Z"]),
    ]


def _cone_pairs() -> list:
    from .complexes import circle_cw, circle_degree_map, hopf_cell_model, torus_circle_inclusion

    S = circle_cw()
    return [("circle in torus", torus_circle_inclusion(3)[0]),
            ("Hopf projection", hopf_cell_model()["p"]),
            ("degree 2 circle map", circle_degree_map(S, S, 2))]


def complexes_suite() -> Report:
    """Cohomology against known groups, ``d^2 = 0`` for complexes and cones, exact long sequences."""
    from .complexes import MappingCone, cohomology, identity_map, torus_simplicial, verify_long_exact

    rep = Report("integral cohomology and mapping cones")
    for name, C, expected in _cohomology_oracles():
        got = [H.describe() for H in cohomology(C)]
        rep.add(Check.flag(f"H^*({name}) = {', '.join(expected)}", got == expected, "" if got == expected else f"got {got}"))
        rep.add(Check.flag(f"d^2 = 0 on {name}", not C.boundary_squared_defects()))
    for name, phi in _cone_pairs():
        cone = MappingCone(phi)
        rep.add(Check.flag(f"cone d^2 = 0 [{name}]", not cone.complex.boundary_squared_defects()))
        les = verify_long_exact(phi)
        bad = [j.name for j in les["junctions"] if not j.passed]
        rep.add(Check.flag(f"long exact sequence [{name}]", les["passed"], f"{len(les['junctions'])} junctions"
                           + (f", failing {bad}" if bad else "")))
    T = torus_simplicial(3)
    acyclic = [H.describe() for H in cohomology(MappingCone(identity_map(T.chain)))]
    rep.add(Check.flag("cone of the identity is acyclic", all(g == "0" for g in acyclic)))
    return rep


def characters_suite(boundaries: int = 1000, samples: int = 10, seed: int = 0) -> Report:
    """Defining relation in rational mode, composites and short/long sequence membership."""
    from .characters import defining_relation_defect, random_character, verify_sequences
    from .complexes import MappingCone, torus_circle_inclusion, torus_simplicial

    rng = np.random.default_rng(seed)
    T = torus_simplicial(3)
    C = T.chain
    rep = Report("cochain model of differential characters", environment={"seed": seed})
    worst, count = 0.0, 0
    per = max(1, boundaries // 10)
    while count < boundaries:
        k = 1 + count // per % 2
        x = random_character(C, k, rng, "rational")
        for _ in range(min(per, boundaries - count)):
            a = [int(v) for v in rng.integers(-3, 4, size=C.rank(k))]
            worst = max(worst, defining_relation_defect(x, a))
            count += 1
    rep.add(Check.flag(f"x(da) = <omega, a> - <c, a> exactly on {boundaries} boundaries", worst == 0.0,
                       f"worst defect {worst}"))
    for k in (1, 2):
        res = verify_sequences(C, k, samples, seed)
        for c in res["checks"]:
            rep.add(Check.flag(f"torus k={k}: {c.name}", c.passed, c.detail))
    phi = torus_circle_inclusion(3)[0]
    cone = MappingCone(phi)
    for k in (1, 2):
        res = verify_sequences(cone, k, samples, seed)
        for c in res["checks"]:
            rep.add(Check.flag(f"cone k={k}: {c.name}", c.passed, c.detail))
    return rep
