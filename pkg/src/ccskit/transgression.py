"""Transgression at desk scale.

Three routes are provided: the Chern-Simons form restricted to a group fiber,
fiber integration of pulled-back forms over explicit circle families, and the
cochain transgression of a cellular bundle.  ``transgression_routes_check`` compares them
on the Hopf fibration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundle import DEFAULT_T_ORDER, BundleAtlas, cs_one_connection
from .complexes import (
    ChainMap,
    TransgressionResult,
    _quotient_group,
    cohomology_group,
    fundamental_cycle,
    imat,
    imatmul,
    relabel,
    solve_integer,
    transgression_T,
)
from .geometry import (
    DEFAULT_FD_STEP,
    DEFAULT_QUAD_ORDER,
    Cell,
    FormField,
    SmoothMap,
    evaluate_chunked,
    exterior_derivative,
    fiber_integrate,
    integrate,
    pullback,
)
from .lie_core import InvariantPolynomial, chern_polynomial
from .report import Check, Report

# Sign conventions shared by all routes.  ``fiber_integration`` restates the
# convention of geometry.fiber_integrate; ``hopf_cell_fiber`` identifies the
# oriented cell f1 of the cellular Hopf model with the oriented group fiber.
SIGN_CONVENTIONS = {
    "fiber_integration": "fiber coordinate last: int_S1 (w_I dx^I ^ ds) = (int w_I ds) dx^I",
    "group_fiber": "standard orientation times bundle.FIBER_ORIENTATION, so CS(chern_1) has fiber period +1",
    "hopf_cell_fiber": -1,
}


# fiber restriction ------------------------------------------------------------------------------


@dataclass
class FiberRestriction:
    """``i_x^* CS_theta(lam)`` as a form on the group chart."""

    atlas: BundleAtlas
    x: np.ndarray
    chart: str
    form: FormField

    @property
    def cells(self) -> list:
        return self.atlas.group.fiber_cells

    def period(self, order: int = DEFAULT_QUAD_ORDER) -> float:
        return float(integrate(self.form, self.cells, order))

    def closedness_residual(self, samples: int = 16, seed: int = 0, h: float = DEFAULT_FD_STEP) -> float:
        """Max ``|d form|`` at random points of the unit sphere of the group chart."""
        if self.form.degree >= self.form.dim:
            return 0.0
        rng = np.random.default_rng(seed)
        y = rng.normal(size=(samples, self.form.dim))
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        d = evaluate_chunked(exterior_derivative(self.form, h), y)
        return float(np.max(np.abs(d)))


def _fiber_lift(atlas: BundleAtlas, x: np.ndarray) -> SmoothMap:
    nb, m = atlas.base_dim, atlas.group.m
    J = np.zeros((nb + m, m))
    J[nb:] = np.eye(m)

    def f(y):
        y = np.atleast_2d(y)
        return np.concatenate([np.broadcast_to(x, (len(y), nb)), y], axis=1)

    return SmoothMap(m, nb + m, f, lambda y: np.broadcast_to(J, (len(np.atleast_2d(y)), nb + m, m)), "i_x")


def restrict_to_fiber(lam: InvariantPolynomial, atlas: BundleAtlas, x, chart: str | None = None,
                      t_order: int = DEFAULT_T_ORDER, h: float = DEFAULT_FD_STEP) -> FiberRestriction:
    """Pull ``CS_theta(lam)`` back to the fiber over ``x`` (given in ``chart``)."""
    if atlas.group is None or not atlas.group.fiber_cells:
        raise ValueError(f"atlas {atlas.name!r} has no fiber parametrization")
    chart = chart or atlas.chart_names()[0]
    if chart not in atlas.charts:
        raise ValueError(f"unknown chart {chart!r}")
    x = np.asarray(x, dtype=float).reshape(-1)
    if len(x) != atlas.base_dim:
        raise ValueError(f"base point has dimension {len(x)}, expected {atlas.base_dim}")
    cs = cs_one_connection(lam, atlas, chart, t_order, h)
    return FiberRestriction(atlas, x, chart, pullback(_fiber_lift(atlas, x), cs))


def fiber_period_independence(lam: InvariantPolynomial, atlas0: BundleAtlas, atlas1: BundleAtlas, x,
                              chart: str | None = None, order: int = DEFAULT_QUAD_ORDER,
                              t_order: int = DEFAULT_T_ORDER) -> dict:
    """Fiber periods of ``lam`` for two connections on the same bundle."""
    p0 = restrict_to_fiber(lam, atlas0, x, chart, t_order).period(order)
    p1 = restrict_to_fiber(lam, atlas1, x, chart, t_order).period(order)
    return {"period0": p0, "period1": p1, "difference": abs(p1 - p0)}


# loop families ----------------------------------------------------------------------------------


def loop_transgress_form(omega: FormField, family: SmoothMap, order: int = 16) -> FormField:
    """``int_{S^1} S^* omega`` for a family ``S: B x S^1 -> X``, circle coordinate last in ``[0, 1]``."""
    if family.target_dim != omega.dim:
        raise ValueError(f"family lands in dimension {family.target_dim}, form lives in {omega.dim}")
    if family.source_dim < 1:
        raise ValueError("family needs a circle coordinate")
    if omega.degree < 1:
        raise ValueError("transgression needs degree >= 1")
    return fiber_integrate(pullback(family, omega), fiber="circle", order=order)


def area_form_s2() -> FormField:
    """Normalized area form ``(x dy dz - y dx dz + z dx dy) / (4 pi r^3)`` on ``R^3 - 0``."""

    def f(p):
        r3 = np.linalg.norm(p, axis=1) ** 3 * 4 * np.pi
        return np.stack([p[:, 2], -p[:, 1], p[:, 0]], axis=1) / r3[:, None]

    return FormField(3, 2, f, (), lambda p: np.zeros((len(p), 1)), "area/4pi")


def latitude_family() -> SmoothMap:
    """Latitude circles of ``S^2``: ``(b, s)`` goes to polar angle ``pi b`` and azimuth ``2 pi s``."""

    def f(z):
        th, ph = np.pi * z[:, 0], 2 * np.pi * z[:, 1]
        return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1)

    def jac(z):
        th, ph = np.pi * z[:, 0], 2 * np.pi * z[:, 1]
        J = np.zeros((len(z), 3, 2))
        J[:, 0, 0] = np.pi * np.cos(th) * np.cos(ph)
        J[:, 1, 0] = np.pi * np.cos(th) * np.sin(ph)
        J[:, 2, 0] = -np.pi * np.sin(th)
        J[:, 0, 1] = -2 * np.pi * np.sin(th) * np.sin(ph)
        J[:, 1, 1] = 2 * np.pi * np.sin(th) * np.cos(ph)
        return J

    return SmoothMap(2, 3, f, jac, "latitudes")


def constant_family(point, base_dim: int = 1) -> SmoothMap:
    """Family of constant loops at ``point``."""
    p = np.asarray(point, dtype=float)
    n = len(p)
    return SmoothMap(base_dim + 1, n, lambda z: np.broadcast_to(p, (len(z), n)).copy(),
                     lambda z: np.zeros((len(z), n, base_dim + 1)), "const")


def cap_fraction(beta: float) -> float:
    """Normalized area of the polar cap of angle ``pi beta``."""
    return (1 - np.cos(np.pi * beta)) / 2


def interval_integral(form: FormField, a: float = 0.0, b: float = 1.0, order: int = 16) -> float:
    """Integral of a 1-form on ``R`` over ``[a, b]``."""
    seg = SmoothMap(1, 1, lambda t: a + (b - a) * t, lambda t: np.full((len(t), 1, 1), b - a), "seg")
    return float(integrate(form, [Cell(1, seg)], order))


# cochain transgression ----------------------------------------------------------------------------


def _signed_inverse(M: np.ndarray) -> np.ndarray:
    # relabel isomorphisms are signed permutations
    return M.T.copy()


def relabeled_bundle(model: dict, perms: dict, signs: dict | None = None) -> dict:
    """Relabeled copy of a cellular bundle ``{X, E, F, p, i}`` with the comparison isomorphisms."""
    signs = signs or {}
    out, iso = {}, {}
    for key in ("X", "E", "F"):
        out[key], iso[key] = relabel(model[key], perms.get(key, {}), signs.get(key), model[key].name + "'")

    def conj(f: ChainMap, src: str, dst: str) -> ChainMap:
        top = len(f.matrices)
        mats = []
        for k in range(top):
            Md = iso[dst][k] if k < len(iso[dst]) else None
            Ms = iso[src][k] if k < len(iso[src]) else None
            if Md is None or Ms is None or f[k].size == 0:
                mats.append(None)
            else:
                mats.append(imatmul(imatmul(Md, f[k]), _signed_inverse(Ms)))
        return ChainMap(out[src].chain, out[dst].chain, mats)

    out["p"] = conj(model["p"], "E", "X")
    out["i"] = conj(model["i"], "F", "E")
    return {"model": out, "iso": iso}


def base_generator(X) -> np.ndarray:
    """Integer top cocycle pairing to 1 with the fundamental cycle."""
    z = fundamental_cycle(X)
    u = solve_integer(imat(z, (1, len(z))), [1])
    if u is None:
        raise ValueError("fundamental cycle is not primitive")
    return np.asarray(u, dtype=object).reshape(-1)


def transgress(model: dict, u, degree: int) -> TransgressionResult:
    return transgression_T(model["p"], model["i"], u, degree=degree)


def naturality_check(model: dict, perms: dict, signs: dict | None = None, u=None, degree: int = 2) -> dict:
    """``Phi_F^* T_{p'}(u') = T_p(phi^* u')`` for a relabeled copy of the bundle."""
    rel = relabeled_bundle(model, perms, signs)
    new, iso = rel["model"], rel["iso"]
    if u is None:
        u = base_generator(new["X"])
    u_new = np.asarray(u, dtype=object).reshape(-1)
    u_old = imatmul(iso["X"][degree].T.copy(), imat(u_new, (len(u_new), 1))).reshape(-1)
    t_new = transgress(new, u_new, degree)
    t_old = transgress(model, u_old, degree)
    back = imatmul(iso["F"][degree - 1].T.copy(), imat(t_new.cocycle, (len(t_new.cocycle), 1))).reshape(-1)
    F, E = model["F"].chain, model["E"].chain
    HF, HE = cohomology_group(F, degree - 1), cohomology_group(E, degree - 1)
    image = [list(HF.coordinates(imatmul(model["i"][degree - 1].T.copy(), HE.representatives[:, j:j + 1]).reshape(-1)))
             for j in range(HE.representatives.shape[1])]
    Q = _quotient_group(HF, image)
    lhs = Q.vector(HF.coordinates(back)) if HF.ngens else ()
    return {"pulled_back": tuple(lhs), "direct": tuple(t_old.coordinates), "natural": tuple(lhs) == tuple(t_old.coordinates),
            "relabeled_coordinates": tuple(t_new.coordinates)}


def scaled_polynomial(lam: InvariantPolynomial, s: float) -> InvariantPolynomial:
    return InvariantPolynomial(lam.degree, tuple((complex(c) * s, p) for c, p in lam.terms), "custom",
                               f"{s:g}*{lam.name}", lam.algebra)


def _coord(t: TransgressionResult) -> int:
    return int(t.coordinates[0]) if t.coordinates else 0


def transgression_routes_check(model: dict | None = None, order: int = DEFAULT_QUAD_ORDER,
                     t_order: int = DEFAULT_T_ORDER) -> Report:
    """Cochain, fiber-restriction and loop routes of transgression on the Hopf fibration.

    Rows of the sign table are the classes ``0, u, 2u`` for the generator ``u``
    of ``H^2(S^2)``.  The cochain route reports coordinates in the dual of the
    cellular fiber cell, rescaled by ``SIGN_CONVENTIONS['hopf_cell_fiber']``;
    the form route reports the fiber period of ``i_x^* CS`` of the u(1) Hopf
    bundle; the loop route integrates the latitude transgression of the
    Chern-Weil form over the sweep parameter.
    """
    from .complexes import hopf_cell_model
    from .library import hopf_atlas

    model = model or hopf_cell_model()
    eps = SIGN_CONVENTIONS["hopf_cell_fiber"]
    u = base_generator(model["X"])
    atlas = hopf_atlas(1)
    c1 = chern_polynomial(1, 1)
    north = np.array([0.0, 0.0, 1.0])
    omega = area_form_s2()
    fam = latitude_family()
    rep = Report("transgression routes on the Hopf fibration",
                 environment={"quad_order": order, "t_order": t_order, "hopf_cell_fiber": eps})
    table = []
    for mult in (0, 1, 2):
        cochain = _coord(transgress(model, [mult * int(a) for a in u], 2))
        lam = scaled_polynomial(c1, mult)
        form = restrict_to_fiber(lam, atlas, north, "N", t_order).period(order) if mult else 0.0
        loop = interval_integral(loop_transgress_form(omega.scale(float(mult)), fam), order=16)
        table.append({"class": f"{mult}u", "cochain": cochain, "cochain_oriented": eps * cochain,
                      "form": form, "loop": loop})
        rep.add(Check.close(f"form route {mult}u", form, mult, 1e-6))
        rep.add(Check.close(f"loop route {mult}u", loop, mult, 1e-6))
        rep.add(Check.flag(f"cochain route {mult}u", eps * cochain == mult,
                           f"raw coordinate {cochain}, oriented {eps * cochain}"))
    rep.add(Check.flag("generator to generator", abs(table[1]["cochain"]) == 1 and round(table[1]["form"]) == 1))
    rep.add(Check.flag("routes agree", all(r["cochain_oriented"] == round(r["form"]) == round(r["loop"]) for r in table)))
    rep.values["sign_table"] = [[r["class"], r["cochain"], r["cochain_oriented"], round(r["form"], 9), round(r["loop"], 9)]
                                for r in table]
    rep.values["sign_table_columns"] = ["class", "cochain (cell f1)", "cochain (oriented fiber)", "form", "loop"]
    return rep


def transgression_report(order: int = DEFAULT_QUAD_ORDER, t_order: int = DEFAULT_T_ORDER,
                         su2_order: int = DEFAULT_QUAD_ORDER) -> Report:
    """Fiber restrictions, loop transgression, cochain transgression and naturality."""
    from .complexes import hopf_cell_model
    from .lie_core import half_p1_polynomial
    from .library import instanton_atlas, u1_torus_connection, trivial_atlas

    rep = Report("transgression", environment={"quad_order": order, "t_order": t_order})
    # u(1): flat vs non-flat connection on the trivial bundle over T^2
    c1 = chern_polynomial(1, 1)
    a0 = trivial_atlas("u(1)", 2)
    a1 = a0.with_connections({"U": u1_torus_connection(0.3, 2)})
    x = np.array([0.3, 0.7])
    r0 = restrict_to_fiber(c1, a0, x, t_order=t_order)
    ind = fiber_period_independence(c1, a0, a1, x, order=order, t_order=t_order)
    rep.add(Check.close("u(1) fiber period", ind["period0"], 1.0, 1e-8))
    rep.add(Check.below("u(1) connection independence", ind["difference"], 1e-8))
    rep.add(Check.below("u(1) fiber closedness", r0.closedness_residual(), 1e-4))
    # su(2): instanton at two scales, fiber over an interior point of the north chart
    hp = half_p1_polynomial()
    b0, b1 = instanton_atlas(1.0), instanton_atlas(0.5)
    b1 = b0.with_connections(b1.connections, b1.name)
    y = np.array([0.3, -0.2, 0.1, 0.4])
    chart = b0.chart_names()[0]
    s0 = restrict_to_fiber(hp, b0, y, chart, t_order)
    ind2 = fiber_period_independence(hp, b0, b1, y, chart, su2_order, t_order)
    rep.add(Check.close("su(2) fiber period", ind2["period0"], 1.0, 1e-3))
    rep.add(Check.below("su(2) connection independence", ind2["difference"], 1e-3))
    rep.add(Check.below("su(2) fiber closedness", s0.closedness_residual(samples=8), 1e-4))
    # loop families
    omega, fam = area_form_s2(), latitude_family()
    tau = loop_transgress_form(omega, fam)
    rep.add(Check.close("latitude sweep", interval_integral(tau), 1.0, 1e-6))
    rep.add(Check.close("half cap", interval_integral(tau, 0.0, 0.5), cap_fraction(0.5), 1e-6))
    const = loop_transgress_form(omega, constant_family([0.0, 0.6, 0.8]))
    rep.add(Check.below("constant loops", float(np.max(np.abs(const.components(np.linspace(0, 1, 7)[:, None])))), 1e-14))
    # cochain transgression and naturality on the Hopf model
    model = hopf_cell_model()
    t = transgress(model, base_generator(model["X"]), 2)
    rep.add(Check.flag("cochain transgression generator", abs(_coord(t)) == 1 and t.quotient_free_rank == 1,
                       f"coordinates {t.coordinates}"))
    perms = {"X": {"N": "S", "S": "N"}, "E": {"Nf0": "Sf0", "Sf0": "Nf0", "Nf1": "Sf1", "Sf1": "Nf1"}}
    signs = {"X": {"b1": -1}, "E": {"b1f0": -1, "b1f1": -1, "b0f1": -1}, "F": {"f1": -1}}
    nat = naturality_check(model, perms, signs)
    rep.add(Check.flag("naturality under relabeling", nat["natural"], f"{nat['pulled_back']} vs {nat['direct']}"))
    rep.extend(transgression_routes_check(model, order, t_order).checks)
    return rep
