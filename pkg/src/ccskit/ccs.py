"""Cheeger-Simons and Cheeger-Chern-Simons characters in the cochain model.

A package couples a bundle with connection to a finite cell model of the
projection ``pi: E -> X``.  For trivial bundles ``E = X x G`` with ``X`` a
torus ``R^d/Z^d`` and ``G`` carrying the equatorial cells of ``S^3`` (SU(2)) or
``S^1`` (U(1)); every cell is parametrized into the total space chart, so
Chern-Weil and Chern-Simons forms discretize to cochains by quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .bundle import (
    BundleAtlas,
    ConnectionPath,
    alpha_form,
    chern_weil_form,
    cs_action,
    cs_one_connection,
    cs_two_connections,
    projection,
)
from .characters import (
    CochainCharacter,
    PeriodError,
    RelativeCochainCharacter,
    characters_equal,
    circle_distance,
    coboundary,
    cycle_basis,
    discretize_form,
    evaluate,
    free_homology_basis,
    from_curvature,
    iota,
    iota_pi,
    breve_i,
    breve_p,
    pair,
    random_character,
)
from .complexes import (
    CellComplex,
    ChainMap,
    MappingCone,
    cohomology,
    fiber_inclusion,
    imat,
    imatmul,
    is_zero,
    product_complex,
    product_projection,
    section_inclusion,
    solve_integer,
    sphere_cw,
    sphere_cycle,
    torus_cw,
)
from .geometry import (
    DEFAULT_FD_STEP,
    DEFAULT_QUAD_ORDER,
    FormField,
    SmoothMap,
    exterior_derivative,
    pullback,
    sample_points,
    wedge,
)
from .library import trivial_atlas
from .lie_core import InvariantPolynomial, half_p1_polynomial, standard_polynomial
from .report import Check, Report

PACKAGE_SNAP_TOLERANCE = 1e-3
IDENTITY = ("e", 0, 1)


@lru_cache(maxsize=None)
def _trivial_complexes(base_dim: int, fiber_dim: int):
    base = torus_cw(base_dim)
    fiber = sphere_cw(fiber_dim, fiber_dim + 1)
    total = product_complex(base, fiber, f"T{base_dim}xS{fiber_dim}")
    pi = product_projection(total, base, fiber)
    return base, fiber, total, pi, MappingCone(pi)


@dataclass
class CCSPackage:
    """Bundle, invariant polynomial and compatible cell models of ``X`` and ``E``.

    ``u`` is an integer ``2k``-cocycle on the base model representing ``u(P)``.
    ``cw`` and ``cs`` are the discretized Chern-Weil form on ``X`` and the
    Chern-Simons form on ``E``.
    """

    lam: InvariantPolynomial
    atlas: BundleAtlas
    base: CellComplex
    fiber: CellComplex
    total: CellComplex
    pi: ChainMap
    cone: MappingCone
    u: np.ndarray
    cw: np.ndarray
    cs: np.ndarray
    section: ChainMap | None = None
    fiber_map: ChainMap | None = None
    fiber_cycle: np.ndarray | None = None
    order: int = DEFAULT_QUAD_ORDER
    t_order: int = 3
    h: float = DEFAULT_FD_STEP
    snap_tolerance: float = PACKAGE_SNAP_TOLERANCE
    notes: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.lam.degree

    @property
    def X(self):
        return self.base.chain

    @property
    def E(self):
        return self.total.chain


def default_polynomial(algebra: str) -> InvariantPolynomial:
    return half_p1_polynomial() if algebra == "su(2)" else standard_polynomial("chern_1", 1)


def trivial_package(algebra: str, base_dim: int, A: FormField | None = None, lam: InvariantPolynomial | None = None,
                    order: int = DEFAULT_QUAD_ORDER, t_order: int | None = None, h: float = DEFAULT_FD_STEP,
                    snap_tolerance: float = PACKAGE_SNAP_TOLERANCE, atlas: BundleAtlas | None = None) -> CCSPackage:
    """Package of the product bundle ``T^d x G`` with connection ``A`` (default: flat)."""
    if atlas is None:
        atlas = trivial_atlas(algebra, base_dim, A, name=f"{algebra} on T{base_dim}")
    elif A is not None:
        atlas = atlas.with_connections({"U": A})
    lam = lam or default_polynomial(algebra)
    fiber_dim = 3 if algebra == "su(2)" else 1
    if 2 * lam.degree - 1 != fiber_dim:
        raise ValueError("the fiber cycle must carry the Chern-Simons period: need 2k - 1 = dim G")
    base, fiber, total, pi, cone = _trivial_complexes(base_dim, fiber_dim)
    return build_package(lam, atlas, base, fiber, total, pi, cone, order, t_order, h, snap_tolerance)


def build_package(lam, atlas, base, fiber, total, pi, cone, order=DEFAULT_QUAD_ORDER, t_order=None,
                  h=DEFAULT_FD_STEP, snap_tolerance=PACKAGE_SNAP_TOLERANCE) -> CCSPackage:
    k = lam.degree
    # the t-integrand is polynomial of degree <= 2k - 2, so k + 1 Gauss nodes are exact
    t_order = t_order or k + 1
    chart = atlas.chart_names()[0]
    if 2 * k <= base.dim:
        cw = discretize_form(chern_weil_form(lam, atlas.connections[chart], h).map_values(np.real), base.geometry[2 * k], order)
    else:
        cw = np.zeros(base.chain.rank(2 * k))
    cs_form = cs_one_connection(lam, atlas, chart, t_order, h)
    cs = discretize_form(cs_form, total.geometry[2 * k - 1], order)
    u = imat([0] * base.chain.rank(2 * k), (base.chain.rank(2 * k), 1)).reshape(-1)
    sec = section_inclusion(total, base, fiber, IDENTITY)
    fmap = fiber_inclusion(total, base, fiber, base.cells[0][0])
    fc = imatmul(fmap[2 * k - 1], imat(sphere_cycle(fiber), (fiber.chain.rank(2 * k - 1), 1))).reshape(-1)
    fc = fc * fiber_cycle_sign(atlas, fiber, order)
    return CCSPackage(lam, atlas, base, fiber, total, pi, cone, u, cw, cs, sec, fmap, fc, order, t_order, h,
                      snap_tolerance)


def sphere_volume_form(m: int) -> FormField:
    """``sum_i (-1)^i y_i dy_0 ... (dy_i omitted) ... dy_{m-1}`` on ``R^m``: positive on outward-normal-last spheres."""

    def f(y):
        out = np.empty((len(y), m))
        for i in range(m):
            out[:, m - 1 - i] = (-1) ** i * y[:, i]
        return out

    return FormField(m, m - 1, f, (), None, "vol")


def fiber_cycle_sign(atlas: BundleAtlas, fiber: CellComplex, order: int = DEFAULT_QUAD_ORDER) -> int:
    """Sign turning ``e_+ + e_-`` into the fiber orientation fixed by the group chart."""
    vol = sphere_volume_form(atlas.group.m)
    n = fiber.dim
    ours = float(np.sum(discretize_form(vol, fiber.geometry[n], order)))
    ref = float(sum(np.sum(discretize_form(vol, [c], order)) for c in atlas.group.fiber_cells))
    return 1 if ours * ref > 0 else -1


# characters ---------------------------------------------------------------------------------------------


def _pull(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Cochain pullback along a chain map block ``M`` (float cochains)."""
    return np.asarray(M, dtype=float).T @ np.asarray(v, dtype=float) if M.size else np.zeros(M.shape[1])


def matching_condition(pkg: CCSPackage) -> Check:
    """Periods of the Chern-Weil cochain agree with the pairings of ``u``."""
    X, k = pkg.X, pkg.k
    Z = free_homology_basis(X, 2 * k)
    gap = max((abs(pair(pkg.cw, Z[:, j]) - float(pair(pkg.u, Z[:, j]))) for j in range(Z.shape[1])), default=0.0)
    return Check.below("CW periods match u", gap, pkg.snap_tolerance)


def build_cheeger_simons(pkg: CCSPackage) -> CochainCharacter:
    """``CW^_theta(lam, u)`` on the base model.

    With a global section and ``u = 0`` this is the canonical ``iota(sigma^* CS)``;
    otherwise a character with curvature ``cw`` and class ``u`` is solved for,
    flagged as one representative when ``H^{2k-1}(X; R) != 0``.
    """
    k = pkg.k
    m = matching_condition(pkg)
    if not m.passed:
        raise PeriodError(f"lambda and u are inconsistent: period gap {m.value:.3g}")
    if pkg.section is not None and is_zero(pkg.u):
        h = _pull(pkg.section[2 * k - 1], pkg.cs)
        x = iota(pkg.X, 2 * k, h, "float")
        corr = float(np.max(np.abs(x.omega - pkg.cw))) if len(pkg.cw) else 0.0
        if corr > pkg.snap_tolerance:
            raise PeriodError(f"delta(sigma^* CS) differs from CW by {corr:.3g}")
        x.snap_correction = corr
        x.notes.append("canonical representative iota(sigma^* CS) from the identity section")
        return x
    return from_curvature(pkg.X, 2 * k, pkg.cw, c=pkg.u, mode="float", snap_tolerance=pkg.snap_tolerance)


def cone_curvature(pkg: CCSPackage) -> np.ndarray:
    return pkg.cone.join(2 * pkg.k, pkg.cw, pkg.cs)


def build_ccs(pkg: CCSPackage) -> RelativeCochainCharacter:
    """``CCS^_theta(lam, u)``: relative character with ``(curv, cov) = (cw, cs)``.

    Raises :class:`PeriodError` naming the cone cycle when a period of
    ``(cw, cs)`` is not integral.
    """
    k = pkg.k
    omega = cone_curvature(pkg)
    closed = float(np.max(np.abs(coboundary(pkg.cone.complex, 2 * k, omega)), initial=0.0))
    if closed > pkg.snap_tolerance:
        raise PeriodError(f"(CW, CS) is not d_phi-closed: residual {closed:.3g}")
    x = from_curvature(pkg.cone, 2 * k, omega, mode="float", snap_tolerance=pkg.snap_tolerance)
    x.notes.append(f"d_phi-closedness residual {closed:.3g}")
    return x


def cone_periods(pkg: CCSPackage) -> list:
    Z = free_homology_basis(pkg.cone.complex, 2 * pkg.k)
    om = cone_curvature(pkg)
    return [pair(om, Z[:, j]) for j in range(Z.shape[1])]


def ccs_contract(pkg: CCSPackage, x: RelativeCochainCharacter | None = None,
                 w: CochainCharacter | None = None) -> Report:
    """Contract of the package: ``(curv, cov, c)`` and ``p^(CCS) = CW^``."""
    k = pkg.k
    x = build_ccs(pkg) if x is None else x
    w = build_cheeger_simons(pkg) if w is None else w
    tol = pkg.snap_tolerance
    rep = Report(f"CCS contract: {pkg.lam.name} on {pkg.total.name}")
    d_curv = float(np.max(np.abs(x.curvature - pkg.cw), initial=0.0))
    d_cov = float(np.max(np.abs(x.covariant_derivative - pkg.cs), initial=0.0))
    rep.add(Check.below("curv(CCS) = CW cochain", d_curv, tol))
    rep.add(Check.below("cov(CCS) = CS cochain", d_cov, tol))
    parts = x.parts()
    diff = np.array([int(a) - int(b) for a, b in zip(parts["c_X"], pkg.u)], dtype=object)
    same = is_zero(diff) or solve_integer(pkg.X.delta(2 * k - 1), diff) is not None
    rep.add(Check.flag("c(CCS) lifts u(P)", same))
    if pkg.fiber_cycle is not None:
        fc = pkg.cone.join(2 * k, imat([0] * pkg.X.rank(2 * k), (pkg.X.rank(2 * k), 1)).reshape(-1)
                           if pkg.X.rank(2 * k) else np.zeros(0, dtype=object), pkg.fiber_cycle)
        rep.values["cone class on (0, fiber)"] = int(pair(x.c, fc))
        rep.values["fiber CS period"] = pair(pkg.cs, pkg.fiber_cycle)
        rep.add(Check.close("fiber CS period", pair(pkg.cs, pkg.fiber_cycle), 1.0, tol))
    pers = cone_periods(pkg)
    gap = max((circle_distance(p, 0.0) for p in pers), default=0.0)
    rep.values["cone periods"] = [float(p) for p in pers]
    rep.add(Check.below("cone periods of (CW, CS) integral", gap, tol))
    ok, disc = characters_equal(breve_p(x), w, tol)
    rep.add(Check.below("p^(CCS) = CW^ on a cycle basis", disc, tol))
    rep.values["snap correction"] = x.snap_correction
    b = cohomology(pkg.cone.complex, "R")[2 * k - 1]
    rep.values[f"b_{2 * k - 1}(cone)"] = b
    return rep


# connection dependence ---------------------------------------------------------------------------------------


@dataclass
class DependenceResult:
    lhs: RelativeCochainCharacter
    rhs: RelativeCochainCharacter
    curvature_discrepancy: float
    evaluation_discrepancy: float

    @property
    def discrepancy(self) -> float:
        return max(self.curvature_discrepancy, self.evaluation_discrepancy)


def connection_dependence(pkg0: CCSPackage, pkg1: CCSPackage, t_order: int | None = None) -> DependenceResult:
    """Compare ``CCS^_1 - CCS^_0`` with ``iota_pi(CS(theta_0, theta_1), alpha)`` on a cone-cycle basis."""
    if not pkg0.atlas.same_atlas(pkg1.atlas) or pkg0.total is not pkg1.total:
        raise ValueError("connections must live on one atlas and one cell model")
    if pkg0.lam is not pkg1.lam and pkg0.lam.terms != pkg1.lam.terms:
        raise ValueError("packages use different polynomials")
    k = pkg0.k
    path = ConnectionPath(pkg0.atlas, pkg1.atlas)
    chart = pkg0.atlas.chart_names()[0]
    t_order = t_order or 2 * k + 1
    if 2 * k - 1 <= pkg0.base.dim:
        cs01 = discretize_form(cs_two_connections(pkg0.lam, path, chart, t_order, pkg0.h), pkg0.base.geometry[2 * k - 1], pkg0.order)
    else:
        cs01 = np.zeros(pkg0.X.rank(2 * k - 1))
    alpha = discretize_form(alpha_form(pkg0.lam, path, chart, t_order, pkg0.h), pkg0.total.geometry[2 * k - 2], pkg0.order)
    rhs = iota_pi(pkg0.cone, 2 * k, cs01, alpha, "float")
    lhs = build_ccs(pkg1) - build_ccs(pkg0)
    curv = float(np.max(np.abs(lhs.omega - rhs.omega), initial=0.0))
    Z = cycle_basis(pkg0.cone.complex, 2 * k - 1)
    ev = max((circle_distance(evaluate(lhs, Z[:, j]), evaluate(rhs, Z[:, j])) for j in range(Z.shape[1])), default=0.0)
    return DependenceResult(lhs, rhs, curv, ev)


# differential trivializations -------------------------------------------------------------------------------


@dataclass
class Trivialization:
    q_hat: CochainCharacter
    rho: np.ndarray
    b: np.ndarray


def _pi_star(pkg: CCSPackage, deg: int, v) -> np.ndarray:
    M = pkg.pi[deg]
    v = np.asarray(v)
    if v.dtype == object:
        return imatmul(M.T.copy(), imat(v, (len(v), 1))).reshape(-1) if M.size else np.zeros(M.shape[1], dtype=object)
    return _pull(M, v)


def trivialization_class_ok(pkg: CCSPackage, q) -> bool:
    """Fiber restriction of ``q`` is the transgressed generator: pairing 1 with the oriented fiber cycle."""
    k = pkg.k
    q = np.asarray(q, dtype=object)
    if not is_zero(coboundary(pkg.E, 2 * k - 1, q)):
        return False
    return int(pair(q, pkg.fiber_cycle)) == 1


def differential_trivialization(pkg: CCSPackage, q=None, x: RelativeCochainCharacter | None = None) -> Trivialization:
    """Solve ``-i^_pi(q^) = CCS^ - iota_pi(rho, 0)`` for ``(q^, rho)``.

    ``rho = h_X + b`` with ``delta b = c_X`` integral; ``q^ = (c_E - pi^* b, -h_E, cs - pi^* rho)``.
    A prescribed class ``q`` shifts ``b`` by an integer cocycle and gauges ``q^`` to ``c(q^) = q``.
    """
    k = pkg.k
    x = build_ccs(pkg) if x is None else x
    p = x.parts()
    X, E = pkg.X, pkg.E
    cX = p["c_X"]
    b = solve_integer(X.delta(2 * k - 1), cX) if X.rank(2 * k) else np.array([0] * X.rank(2 * k - 1), dtype=object)
    if b is None:
        raise ValueError("u(P) is not zero in the model: no differential trivialization")
    b = np.asarray(b, dtype=object)
    cE = np.asarray(p["c_A"], dtype=object)
    gamma = np.array([0] * E.rank(2 * k - 2), dtype=object)
    if q is not None:
        q = imat(np.asarray(q, dtype=object).reshape(-1), (E.rank(2 * k - 1), 1)).reshape(-1)
        if not trivialization_class_ok(pkg, q):
            raise ValueError("q does not restrict to the transgressed class on the fiber")
        # q - (cE - pi^* b) = -pi^* beta + delta gamma with delta beta = 0
        target = q - (cE - _pi_star(pkg, 2 * k - 1, b))
        P = pkg.pi[2 * k - 1].T.copy()
        D = E.delta(2 * k - 2)
        DX = X.delta(2 * k - 1)
        top = np.concatenate([-P, D], axis=1)
        bottom = np.concatenate([DX, np.zeros((DX.shape[0], D.shape[1]), dtype=object)], axis=1)
        M = np.concatenate([top, bottom], axis=0).astype(object)
        sol = solve_integer(M, list(target) + [0] * DX.shape[0])
        if sol is None:
            raise ValueError("q is not of the form c(CCS) - pi^* b in cohomology")
        beta, gamma = sol[:X.rank(2 * k - 1)], sol[X.rank(2 * k - 1):]
        b = b + beta
    rho = np.asarray(p["h_X"], dtype=float) + b.astype(float)
    c_q = cE - _pi_star(pkg, 2 * k - 1, b) + (coboundary(E, 2 * k - 2, gamma) if len(gamma) else 0)
    h_q = -np.asarray(p["h_A"], dtype=float) - gamma.astype(float)
    om_q = np.asarray(p["theta"], dtype=float) - _pi_star(pkg, 2 * k - 1, rho)
    qh = CochainCharacter(E, 2 * k - 1, c_q, h_q, om_q, "float", max(1e-9, x.tolerance))
    return Trivialization(qh, rho, b)


def solve_rho(pkg: CCSPackage, q_hat: CochainCharacter, x: RelativeCochainCharacter | None = None):
    """All ``rho`` with ``curv(q^) = cs - pi^* rho`` and ``delta rho = cw``: ``(particular, residual, nullity)``."""
    k = pkg.k
    x = build_ccs(pkg) if x is None else x
    P = np.asarray(pkg.pi[2 * k - 1], dtype=float).T
    D = np.asarray(pkg.X.delta(2 * k - 1), dtype=float)
    M = np.concatenate([P, D], axis=0)
    rhs = np.concatenate([np.asarray(x.covariant_derivative, dtype=float) - q_hat.omega,
                          np.asarray(x.curvature, dtype=float)])
    if M.shape[1] == 0:
        return np.zeros(0), float(np.max(np.abs(rhs), initial=0.0)), 0
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    res = float(np.max(np.abs(M @ sol - rhs), initial=0.0))
    nullity = M.shape[1] - np.linalg.matrix_rank(M)
    return sol, res, int(nullity)


def check_def_q_hat(pkg: CCSPackage, q_hat: CochainCharacter, rho=None,
                    x: RelativeCochainCharacter | None = None, tol: float = 1e-9) -> tuple[bool, float, str]:
    """Does ``-i^_pi(q^) = CCS^ - iota_pi(rho, 0)`` hold?  ``rho=None`` searches for one."""
    k = pkg.k
    x = build_ccs(pkg) if x is None else x
    if rho is None:
        rho, res, _ = solve_rho(pkg, q_hat, x)
        if res > max(tol, 1e-9):
            return False, res, "curvature of q^ is not cs - pi^* rho for any rho"
    rho = np.asarray(rho, dtype=float)
    lhs = -breve_i(q_hat, pkg.cone)
    rhs = x - iota_pi(pkg.cone, 2 * k, rho, np.zeros(pkg.E.rank(2 * k - 2)), "float")
    ok, disc = characters_equal(lhs, rhs, tol)
    return ok, disc, "" if ok else "characters differ on the cone"


def weak_counterexample(pkg: CCSPackage, q_hat: CochainCharacter, scale: float = 0.25):
    """``q^ + iota(eta)`` with ``eta`` vanishing on the fiber cells but not basic.

    ``eta`` is a multiple of an elementary ``(2k-2)``-cochain on a product cell
    of positive base and fiber dimension whose coboundary is not a pullback.
    Returns ``(character, eta)``.
    """
    k = pkg.k
    deg = 2 * k - 2
    E = pkg.E
    P = np.asarray(pkg.pi[deg + 1], dtype=float).T
    for i, (s, t) in enumerate(pkg.total.cells[deg]):
        if s in pkg.base.cells[0] or t in pkg.fiber.cells[0]:
            continue
        eta = np.zeros(E.rank(deg))
        eta[i] = scale
        d_eta = coboundary(E, deg, eta)
        if P.shape[1]:
            sol, *_ = np.linalg.lstsq(P, d_eta, rcond=None)
            basic = np.max(np.abs(P @ sol - d_eta), initial=0.0) < 1e-9
        else:
            basic = not np.any(d_eta)
        if not basic:
            return q_hat + iota(E, deg + 1, eta, "float"), eta
    raise ValueError("no fiberwise-vanishing non-basic cochain in this model")


def fiber_restriction(pkg: CCSPackage, y: CochainCharacter) -> CochainCharacter:
    from .characters import pullback as char_pullback

    return char_pullback(y, pkg.fiber_map)


def pi_star(pkg: CCSPackage, y: CochainCharacter) -> CochainCharacter:
    from .characters import pullback as char_pullback

    return char_pullback(y, pkg.pi)


def torsor_difference(pkg: CCSPackage, q1: CochainCharacter, q2: CochainCharacter, tol: float = 1e-9):
    """``h`` on ``X`` with ``q1 - q2 = pi^* h`` (via the section), or ``None``."""
    from .characters import pullback as char_pullback

    d = q1 - q2
    h = char_pullback(d, pkg.section)
    ok, _ = characters_equal(pi_star(pkg, h), d, tol)
    return h if ok else None


def trivialization_report(pkg: CCSPackage, samples: int = 20, seed: int = 0) -> Report:
    """Solver, uniqueness of ``rho``, torsor action and the weak counterexample."""
    k = pkg.k
    rep = Report(f"differential trivialization: {pkg.lam.name} on {pkg.total.name}")
    x = build_ccs(pkg)
    tr = differential_trivialization(pkg, x=x)
    ok, disc, _ = check_def_q_hat(pkg, tr.q_hat, tr.rho, x)
    rep.add(Check.below("defining identity of q^", disc, 1e-9))
    curv_gap = float(np.max(np.abs(tr.q_hat.omega - (x.covariant_derivative - _pi_star(pkg, 2 * k - 1, tr.rho))), initial=0.0))
    rep.add(Check.below("curv(q^) = CS - pi^* rho", curv_gap, 1e-9))
    rep.add(Check.flag("c(q^) restricts to T(u) on the fiber", trivialization_class_ok(pkg, tr.q_hat.c)))
    rep.values["fiber evaluation of q^ curvature"] = pair(tr.q_hat.omega, pkg.fiber_cycle)
    rep.values["rho"] = [float(v) for v in tr.rho]
    # uniqueness of rho
    _, res, nullity = solve_rho(pkg, tr.q_hat, x)
    rep.add(Check.flag("rho unique (nullity 0)", nullity == 0, f"nullity {nullity}"))
    rng = np.random.default_rng(seed)
    rejected = True
    for j in range(len(tr.rho)):
        alt = tr.rho.copy()
        alt[j] += 0.1 + rng.random()
        rejected &= not check_def_q_hat(pkg, tr.q_hat, alt, x)[0]
    rep.add(Check.flag("no second rho satisfies the identity", rejected))
    # torsor
    ok_t = True
    ok_rec = True
    for _ in range(samples):
        hh = random_character(pkg.X, 2 * k - 1, rng, "float")
        q2 = tr.q_hat + pi_star(pkg, hh)
        rho2 = tr.rho - hh.omega
        ok_t &= check_def_q_hat(pkg, q2, rho2, x)[0]
        rec = torsor_difference(pkg, q2, tr.q_hat)
        ok_rec &= rec is not None and characters_equal(rec, hh, 1e-9)[0]
    rep.add(Check.flag(f"torsor: q^ + pi^* h with rho - curv(h) ({samples} random h)", ok_t))
    rep.add(Check.flag("difference of trivializations recovered as pi^* h", ok_rec))
    # weak counterexample
    try:
        weak, eta = weak_counterexample(pkg, tr.q_hat)
    except ValueError as exc:
        rep.values["weak counterexample"] = str(exc)
    else:
        same_on_fiber = characters_equal(fiber_restriction(pkg, weak), fiber_restriction(pkg, tr.q_hat), 1e-9)[0]
        rep.add(Check.flag("weak condition holds for q^ + iota(eta)", same_on_fiber))
        rep.add(Check.flag("q^ + iota(eta) rejected by the defining identity", not check_def_q_hat(pkg, weak, None, x)[0]))
    rep.values["pi^* kernel on characters"] = "trivial (section)"
    return rep


# multiplicativity ----------------------------------------------------------------------------------------------


def multiplicativity_defect(lam1: InvariantPolynomial, lam2: InvariantPolynomial, atlas: BundleAtlas,
                            points: int = 4, seed: int = 0, t_order: int | None = None,
                            h: float = 1e-3, stencil: int = 4) -> Report:
    """``Delta = CS(lam1) ^ pi^* CW(lam2) - CS(lam1 lam2)`` on the total space chart.

    Reports the sampled ``|d Delta|`` (finite differences) and the independent
    value ``|pi^*CW(lam1) ^ pi^*CW(lam2) - pi^*CW(lam1 lam2)|``.
    """
    k1, k2 = lam1.degree, lam2.degree
    chart = atlas.chart_names()[0]
    A = atlas.connections[chart]
    n = atlas.total_dim
    prod = lam1 * lam2
    if 2 * (k1 + k2) > n:
        raise ValueError("degrees exceed the total space dimension")
    t1 = t_order or k1 + 1
    t12 = t_order or k1 + k2 + 1
    cs1 = cs_one_connection(lam1, atlas, chart, t1, DEFAULT_FD_STEP).map_values(np.real)
    cs12 = cs_one_connection(prod, atlas, chart, t12, DEFAULT_FD_STEP).map_values(np.real)
    pr = projection(atlas)
    nb = atlas.base_dim

    def pulled_cw(lam):
        if 2 * lam.degree <= nb:
            return pullback(pr, chern_weil_form(lam, A, DEFAULT_FD_STEP).map_values(np.real))
        return FormField(n, 2 * lam.degree, lambda z: np.zeros((len(z), _ncomb(n, 2 * lam.degree))), (), None, "0")

    cw2 = pulled_cw(lam2)
    delta = wedge(cs1, cw2) - cs12
    rng = np.random.default_rng(seed)
    pts = rng.random((points, n))
    pts[:, nb:] = pts[:, nb:] * 2 - 1
    d_delta = exterior_derivative(delta, h, stencil).components(pts)
    analytic = (wedge(pulled_cw(lam1), cw2) - pulled_cw(prod)).components(pts)
    rep = Report(f"multiplicativity defect {lam1.name} x {lam2.name}")
    rep.values["max |d Delta| (finite differences)"] = float(np.max(np.abs(d_delta)))
    rep.values["max |pi^*CW1 ^ pi^*CW2 - pi^*CW12|"] = float(np.max(np.abs(analytic)))
    rep.values["max |Delta|"] = float(np.max(np.abs(delta.components(pts))))
    rep.add(Check.below("Delta closed", rep.values["max |d Delta| (finite differences)"], 1e-6))
    rep.add(Check.below("Chern-Weil multiplicative", rep.values["max |pi^*CW1 ^ pi^*CW2 - pi^*CW12|"], 1e-10))
    return rep


def _ncomb(n: int, p: int) -> int:
    from math import comb

    return comb(n, p)


# actions -------------------------------------------------------------------------------------------------------


def _section_map(nb: int, m: int, g=None, jac=None, name: str = "sigma") -> SmoothMap:
    """``x -> (x, g(x))`` into ``chart x group chart``; ``g=None`` is the identity section."""

    def f(x):
        x = np.atleast_2d(x)
        y = np.zeros((len(x), m))
        if g is None:
            y[:, 0] = 1.0
        else:
            y = g(x)
        return np.concatenate([x, y], 1)

    return SmoothMap(nb, nb + m, f, None, name)


def gauge_action_difference(lam: InvariantPolynomial, atlas: BundleAtlas, cells, gauge, order: int = DEFAULT_QUAD_ORDER,
                            t_order: int | None = None) -> dict:
    """``int sigma_g^* CS - int sigma^* CS`` over closed cells for ``sigma_g = sigma * g``."""
    chart = atlas.chart_names()[0]
    nb, m = atlas.base_dim, atlas.group.m
    t_order = t_order or lam.degree + 1
    cs = cs_one_connection(lam, atlas, chart, t_order).map_values(np.real)
    a0 = cs_action(lam, atlas, _section_map(nb, m), cells, chart, order, cs=cs)
    a1 = cs_action(lam, atlas, _section_map(nb, m, gauge, name="sigma*g"), cells, chart, order, cs=cs)
    return {"action": a0.lift, "gauged": a1.lift, "difference": a1.lift - a0.lift}


def _quaternion_section(q_of_x, nb: int) -> SmoothMap:
    return _section_map(nb, 4, q_of_x, name="sigma*g")


def winding_gauge_check(strength: float = 0.5, order: int = DEFAULT_QUAD_ORDER) -> dict:
    """CS action on ``S^3`` before and after the winding-one gauge ``g(x) = x / |x|``.

    The connection is the scale-invariant one of :func:`ccskit.library.su2_sphere3_connection`.
    """
    from .library import su2_sphere3_connection

    atlas = trivial_atlas("su(2)", 4, su2_sphere3_connection(strength), name="S3 gauge test")
    cells = sphere_cw(3, 4).geometry[3]
    out = gauge_action_difference(half_p1_polynomial(), atlas, cells,
                                  lambda x: x / np.linalg.norm(x, axis=1, keepdims=True), order)
    out["nearest integer"] = int(round(out["difference"]))
    return out


def _bump_gauge(center, radius: float):
    """``g = cos(pi r) + sin(pi r) c/|c|`` with ``r = (1 + cos(pi |c|/R))/2`` inside the ball, ``1`` outside.

    Degree one onto ``SU(2)`` and identically ``1`` near the boundary of the cube.
    """
    center = np.asarray(center, dtype=float)

    def g(x):
        c = np.atleast_2d(x) - center
        r = np.linalg.norm(c, axis=1)
        t = np.clip(r / radius, 0.0, 1.0)
        rho = 0.5 * (1 + np.cos(np.pi * t))
        out = np.zeros((len(c), 4))
        out[:, 0] = np.cos(np.pi * rho)
        safe = np.where(r > 0, r, 1.0)
        out[:, 1:] = (np.sin(np.pi * rho) / safe)[:, None] * c
        return out

    return g


def boundary_action_check(strength: float = 1.0, subdivisions: int = 2, order: int = DEFAULT_QUAD_ORDER) -> dict:
    """Two sections over the cube ``[0,1]^3`` agreeing on its boundary give actions equal mod 1."""
    from .geometry import affine_cell
    from .library import su2_torus_connection

    atlas = trivial_atlas("su(2)", 3, su2_torus_connection(strength, 3), name="cube")
    n = subdivisions
    cells = [affine_cell(np.array(ijk, dtype=float) / n, np.eye(3) / n)
             for ijk in np.ndindex(n, n, n)]
    out = gauge_action_difference(half_p1_polynomial(), atlas, cells, _bump_gauge([0.5, 0.5, 0.5], 0.45), order)
    out["nearest integer"] = int(round(out["difference"]))
    return out


# the Hopf bundle on the cube-boundary sphere -------------------------------------------------------------------


def hopf_base_curvature(charge: int = 1, order: int = DEFAULT_QUAD_ORDER, h: float = DEFAULT_FD_STEP):
    """Base model ``dI^3`` and the discretized first Chern form of the monopole (bottom face in chart S)."""
    from .complexes import boundary_of_cube
    from .library import hopf_atlas

    atlas = hopf_atlas(charge)
    X = boundary_of_cube(3)
    lam = standard_polynomial("chern_1", 1)
    forms = {c: chern_weil_form(lam, atlas.connections[c], h).map_values(np.real) for c in ("N", "S")}
    cw = np.array([discretize_form(forms["S" if face == (0, 0, -1) else "N"], [cell], order)[0]
                   for face, cell in zip(X.cells[2], X.geometry[2])])
    return X, cw


def hopf_cheeger_simons(charge: int = 1, order: int = DEFAULT_QUAD_ORDER) -> dict:
    """``CW^(chern_1, u)`` of the monopole bundle with ``u`` the class of its Chern number."""
    from .characters import integer_cocycle_with_periods
    from .complexes import fundamental_cycle

    X, cw = hopf_base_curvature(charge, order)
    z = fundamental_cycle(X)
    period = pair(cw, z)
    n = int(round(period))
    u = integer_cocycle_with_periods(X.chain, 2, [n], imat(z, (len(z), 1)))
    x = from_curvature(X.chain, 2, cw, c=u, mode="float", snap_tolerance=PACKAGE_SNAP_TOLERANCE)
    rel = circle_distance(pair(x.omega, z) - float(pair(x.c, z)), 0.0)
    return {"character": x, "period": period, "chern_number": n, "relation_on_fundamental_cycle": rel}


def hopf_cone_class() -> dict:
    """Lift of the generator of ``H^2(S^2)`` to the cone of the cellular Hopf projection."""
    from .complexes import fundamental_cycle

    m = hopf_cell_model_cached()
    X, E, p = m["X"], m["E"], m["p"]
    cone = MappingCone(p)
    z = fundamental_cycle(X)
    u = solve_integer(imat(z, (1, len(z))), [1])
    pu = imatmul(p[2].T.copy(), imat(u, (len(u), 1))).reshape(-1)
    b = solve_integer(E.chain.delta(1), pu)
    if b is None:
        raise ValueError("p^* u is not exact: no cone lift")
    c = cone.join(2, u, b)
    closed = is_zero(coboundary(cone.complex, 2, c))
    H = cohomology(cone.complex)[2]
    coords = H.coordinates(c)
    return {"cone_cocycle": c, "closed": closed, "maps_to_u": list(cone.split(2, c)[0]) == list(u),
            "H2_cone": H.describe(), "coordinates": coords}


@lru_cache(maxsize=None)
def hopf_cell_model_cached():
    from .complexes import hopf_cell_model

    return hopf_cell_model()
