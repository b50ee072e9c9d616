"""Principal bundles from local data: curvature, Chern-Weil and Chern-Simons forms.

A bundle is described by base charts, transition functions and one local
connection 1-form per chart.  The total space over a chart is modeled as
``chart x (ambient group chart)``; the group chart is an open subset of R^m
(``R^4 - 0`` for SU(2), ``R^2 - 0`` for U(1)) retracting onto the group by
normalization, so every form built there is pulled back from the group.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Callable, Sequence

import numpy as np

from .geometry import (
    DEFAULT_FD_STEP,
    DEFAULT_QUAD_ORDER,
    Cell,
    Chart,
    FormField,
    SingularChain,
    SmoothMap,
    exterior_derivative,
    fiber_integrate,
    gauss_legendre_01,
    index_lookup,
    multi_indices,
    integrate,
    matrix_wedge,
    polynomial_wedge,
    pullback,
    sphere_cell,
)
from .lie_core import InvariantPolynomial, quaternion_matrix

DEFAULT_T_ORDER = 16


# group charts -------------------------------------------------------------------------


@dataclass
class GroupChart:
    """Ambient chart for a compact matrix group.

    ``element(y)`` returns ``(N, n, n)`` matrices, ``derivative(y)`` returns
    ``(N, m, n, n)`` partial derivatives.  ``fiber_cells`` is an oriented
    fundamental cycle of the group inside the chart.
    """

    name: str
    algebra: str
    m: int
    n: int
    element: Callable
    derivative: Callable
    fiber_cells: list = field(default_factory=list)

    def maurer_cartan(self) -> FormField:
        """``g^{-1} dg`` on the group chart."""

        def f(y):
            g = self.element(y)
            dg = self.derivative(y)
            ginv = np.conj(np.swapaxes(g, -1, -2))
            return np.einsum("nij,najk->naik", ginv, dg)

        return FormField(self.m, 1, f, (self.n, self.n), None, "g^-1dg")


def _su2_element(y):
    y = np.atleast_2d(y)
    r = np.linalg.norm(y, axis=1, keepdims=True)
    return quaternion_matrix(y / r)


_QBASIS = quaternion_matrix(np.eye(4))  # (4, 2, 2)


def _su2_derivative(y):
    y = np.atleast_2d(y)
    r = np.linalg.norm(y, axis=1)
    Q = quaternion_matrix(y)  # (N,2,2)
    term1 = _QBASIS[None, :, :, :] / r[:, None, None, None]
    term2 = Q[:, None, :, :] * (y / r[:, None] ** 3)[:, :, None, None]
    return term1 - term2


def _u1_element(y):
    y = np.atleast_2d(y)
    r = np.linalg.norm(y, axis=1)
    return ((y[:, 0] + 1j * y[:, 1]) / r)[:, None, None]


def _u1_derivative(y):
    y = np.atleast_2d(y)
    r = np.linalg.norm(y, axis=1)
    z = y[:, 0] + 1j * y[:, 1]
    base = np.stack([np.ones_like(z), 1j * np.ones_like(z)], axis=1) / r[:, None]
    corr = z[:, None] * y / r[:, None] ** 3
    return (base - corr)[:, :, None, None]


# Orientation of the group fibers.  The standard orientations (outward normal
# last on S^3, counterclockwise on S^1) are multiplied by these signs so that
# the fiber period of the Chern-Simons form of the positive generator is +1.
FIBER_ORIENTATION = {"su(2)": -1, "u(1)": -1}


def su2_group_chart() -> GroupChart:
    cell = sphere_cell(3)
    cell.orientation *= FIBER_ORIENTATION["su(2)"]
    return GroupChart("SU(2)", "su(2)", 4, 2, _su2_element, _su2_derivative, [cell])


def u1_group_chart() -> GroupChart:
    param = SmoothMap(1, 2, lambda s: np.stack([np.cos(2 * np.pi * s[:, 0]), np.sin(2 * np.pi * s[:, 0])], 1),
                      lambda s: (2 * np.pi * np.stack([-np.sin(2 * np.pi * s[:, 0]), np.cos(2 * np.pi * s[:, 0])], 1))[:, :, None],
                      "S1")
    cell = Cell(1, param, 1, FIBER_ORIENTATION["u(1)"], None, "S1")
    return GroupChart("U(1)", "u(1)", 2, 1, _u1_element, _u1_derivative, [cell])


def group_chart(algebra: str) -> GroupChart:
    if algebra == "su(2)":
        return su2_group_chart()
    if algebra == "u(1)":
        return u1_group_chart()
    raise ValueError(f"no group chart for {algebra!r}")


# atlases -----------------------------------------------------------------------------------


@dataclass
class Transition:
    """``g_ij`` on chart ``i`` together with the coordinate change to chart ``j``."""

    source: str
    target: str
    g: Callable
    coords: SmoothMap


@dataclass
class BundleAtlas:
    """Local data of a principal bundle with connection.

    Parameters
    ----------
    algebra : str
        ``'su(2)'`` or ``'u(1)'``.
    charts : dict
        Base charts by name.
    connections : dict
        Matrix valued 1-forms ``A_i`` by chart name.
    transitions : list of Transition
        On overlaps ``A_j = g_ij^{-1} A_i g_ij + g_ij^{-1} d g_ij``.
    """

    name: str
    algebra: str
    base_dim: int
    charts: dict
    connections: dict
    transitions: list = field(default_factory=list)
    group: GroupChart | None = None
    overlap_samples: Callable | None = None

    def __post_init__(self):
        if self.group is None:
            self.group = group_chart(self.algebra)
        for name, A in self.connections.items():
            if name not in self.charts:
                raise ValueError(f"connection given on unknown chart {name!r}")
            if A.degree != 1 or A.dim != self.base_dim:
                raise ValueError(f"connection on {name} is not a 1-form on the base")

    @property
    def n(self) -> int:
        return self.group.n

    @property
    def total_dim(self) -> int:
        return self.base_dim + self.group.m

    def chart_names(self) -> list[str]:
        return list(self.charts)

    def with_connections(self, connections: dict, name: str | None = None) -> "BundleAtlas":
        return BundleAtlas(name or self.name, self.algebra, self.base_dim, self.charts, connections,
                           self.transitions, self.group, self.overlap_samples)

    def same_atlas(self, other: "BundleAtlas") -> bool:
        return (self.algebra == other.algebra and self.base_dim == other.base_dim
                and list(self.charts) == list(other.charts) and self.transitions is other.transitions)

    # invariants ----------------------------------------------------------------
    def transition_defects(self, points: dict | None = None, h: float = DEFAULT_FD_STEP) -> dict:
        """Sampled connection compatibility and cocycle defects on overlaps."""
        out = {}
        pts = points if points is not None else (self.overlap_samples() if self.overlap_samples else {})
        for tr in self.transitions:
            x = pts.get((tr.source, tr.target))
            if x is None:
                continue
            out[(tr.source, tr.target)] = compatibility_defect(self, tr, x, h)
        return out


def compatibility_defect(atlas: BundleAtlas, tr: Transition, x: np.ndarray, h: float = DEFAULT_FD_STEP) -> float:
    """``max |phi^* A_j - (g^{-1} A_i g + g^{-1} dg)|`` at sample points of chart ``i``."""
    Ai = atlas.connections[tr.source].components(x)
    Aj = pullback(tr.coords, atlas.connections[tr.target]).components(x)
    g = tr.g(x)
    ginv = np.linalg.inv(g)
    n = x.shape[1]
    steps = h * np.eye(n)
    dg = np.stack([(tr.g(x + steps[a]) - tr.g(x - steps[a])) / (2 * h) for a in range(n)], axis=1)
    rhs = np.einsum("nij,najk,nkl->nail", ginv, Ai, g) + np.einsum("nij,najk->naik", ginv, dg)
    return float(np.max(np.abs(Aj - rhs)))


def cocycle_defect(gij: Callable, gjk: Callable, gik: Callable, x: np.ndarray) -> float:
    """``max |g_ij g_jk - g_ik|`` on triple-overlap samples (all in chart i coordinates)."""
    return float(np.max(np.abs(gij(x) @ gjk(x) - gik(x))))


# curvature and Chern-Weil -------------------------------------------------------------------


def curvature_form(A: FormField, h: float = DEFAULT_FD_STEP) -> FormField:
    """``F = dA + A ^ A`` (the same as ``dA + 1/2 [A ^ A]``)."""
    dA = exterior_derivative(A, h)
    AA = matrix_wedge(A, A)

    def f(x):
        return dA.components(x) + AA.components(x)

    return FormField(A.dim, 2, f, A.value_shape, None, "F", A.chart)


def curvature(atlas: BundleAtlas, h: float = DEFAULT_FD_STEP) -> dict:
    """Curvature 2-form on every chart."""
    return {name: curvature_form(A, h) for name, A in atlas.connections.items()}


def chern_weil_form(lam: InvariantPolynomial, A: FormField, h: float = DEFAULT_FD_STEP) -> FormField:
    """``lam(F^k)`` for the connection form ``A``."""
    k = lam.degree
    if 2 * k > A.dim:
        raise ValueError(f"{lam.name} has degree {2 * k} > chart dimension {A.dim}")
    F = curvature_form(A, h)
    return polynomial_wedge(lam, [F] * k, f"CW({lam.name})")


def chern_weil(lam: InvariantPolynomial, atlas: BundleAtlas, h: float = DEFAULT_FD_STEP) -> dict:
    """Chern-Weil form on every chart."""
    return {name: chern_weil_form(lam, A, h) for name, A in atlas.connections.items()}


# connection families ---------------------------------------------------------------------------


def straight_line_family(A0: FormField, A1: FormField) -> FormField:
    """Connection ``(1-t) A0 + t A1`` on ``chart x [0,1]`` with ``t`` appended last."""
    if (A0.dim, A0.value_shape) != (A1.dim, A1.value_shape):
        raise ValueError("connections live on different charts")
    n = A0.dim
    vs = A0.value_shape

    bc = (slice(None),) + (None,) * (1 + len(vs))

    def f(x):
        t = x[:, n]
        y = x[:, :n]
        a = (1 - t)[bc] * A0.components(y) + t[bc] * A1.components(y)
        out = np.zeros((len(x), n + 1) + vs, dtype=a.dtype)
        out[:, :n] = a
        return out

    d = None
    if A0.d_func is not None and A1.d_func is not None:
        lookup = index_lookup(n + 1, 2)
        old_pos = np.array([lookup[I] for I in multi_indices(n, 2)], dtype=int)
        t_pos = np.array([lookup[(i, n)] for i in range(n)], dtype=int)

        def d(x):
            t = x[:, n]
            y = x[:, :n]
            out = np.zeros((len(x), comb(n + 1, 2)) + vs, dtype=complex)
            if len(old_pos):
                out[:, old_pos] = (1 - t)[bc] * A0.d_func(y) + t[bc] * A1.d_func(y)
            # d(t A1 + (1-t) A0) contains dt ^ (A1 - A0) = -(A1 - A0)_i dx^i ^ dt
            out[:, t_pos] = -(A1.components(y) - A0.components(y))
            return out

    return FormField(n + 1, 1, f, vs, d, "Theta")


def cs_two_forms(lam: InvariantPolynomial, A0: FormField, A1: FormField, t_order: int = DEFAULT_T_ORDER,
                 h: float = DEFAULT_FD_STEP) -> FormField:
    """``CS(A0, A1; lam) = - fint_[0,1] CW(lam)`` of the straight-line family."""
    Theta = straight_line_family(A0, A1)
    CW = chern_weil_form(lam, Theta, h) if 2 * lam.degree <= Theta.dim else None
    if CW is None:
        raise ValueError("degree exceeds dimension")
    return fiber_integrate(CW, fiber="interval", order=t_order).scale(-1.0)


def cs_two_closed_form(lam: InvariantPolynomial, A0: FormField, A1: FormField, t_order: int = DEFAULT_T_ORDER,
                       h: float = DEFAULT_FD_STEP) -> FormField:
    """Oracle ``k int_0^1 lam(A1 - A0, F_t^{k-1}) dt`` computed directly on the chart."""
    k = lam.degree
    n = A0.dim
    ts, ws = gauss_legendre_01(t_order)
    diff = A1 - A0

    def f(x):
        total = None
        for t, w in zip(ts, ws):
            At = A0.scale(1 - t) + A1.scale(t)
            Ft = curvature_form(At, h)
            val = polynomial_wedge(lam, [diff] + [Ft] * (k - 1)).components(x)
            total = w * val if total is None else total + w * val
        return k * total

    return FormField(n, 2 * k - 1, f, (), None, "CS_closed")


# total space ---------------------------------------------------------------------------------------


def total_space_connection(atlas: BundleAtlas, chart: str, A: FormField | None = None) -> FormField:
    """``theta = g^{-1} A g + g^{-1} dg`` on ``chart x group chart``."""
    A = atlas.connections[chart] if A is None else A
    G = atlas.group
    nb, m = atlas.base_dim, G.m

    def f(z):
        x, y = z[:, :nb], z[:, nb:]
        g = G.element(y)
        ginv = np.conj(np.swapaxes(g, -1, -2))
        a = A.components(x)
        dg = G.derivative(y)
        out = np.empty((len(z), nb + m, G.n, G.n), dtype=complex)
        out[:, :nb] = np.einsum("nij,najk,nkl->nail", ginv, a, g)
        out[:, nb:] = np.einsum("nij,najk->naik", ginv, dg)
        return out

    # gauge covariance: d theta = g^{-1} F_A g - theta ^ theta
    F_A = curvature_form(A) if nb >= 2 else None
    lookup = index_lookup(nb + m, 2)
    base_pos = np.array([lookup[I] for I in multi_indices(nb, 2)], dtype=int)
    theta = FormField(nb + m, 1, f, (G.n, G.n), None, "theta")
    tt = matrix_wedge(theta, theta)

    def d(z):
        x, y = z[:, :nb], z[:, nb:]
        g = G.element(y)
        ginv = np.conj(np.swapaxes(g, -1, -2))
        out = -tt.components(z).astype(complex)
        if len(base_pos):
            out[:, base_pos] += ginv[:, None] @ F_A.components(x) @ g[:, None]
        return out

    return FormField(nb + m, 1, f, (G.n, G.n), d, "theta")


def projection(atlas: BundleAtlas) -> SmoothMap:
    nb, D = atlas.base_dim, atlas.total_dim
    P = np.zeros((nb, D))
    P[:, :nb] = np.eye(nb)
    return SmoothMap(D, nb, lambda z: z[:, :nb], lambda z: np.broadcast_to(P, (len(z), nb, D)), "pi")


def cs_one_form(lam: InvariantPolynomial, theta: FormField, t_order: int = DEFAULT_T_ORDER,
                h: float = DEFAULT_FD_STEP) -> FormField:
    """``CS(theta_taut, pi^* theta)`` in the trivialization of ``pi^*P`` by the diagonal section.

    There the tautological connection has local form 0 and ``pi^* theta`` has
    local form ``theta``.
    """
    zero = FormField(theta.dim, 1, lambda z: np.zeros((len(z), theta.dim) + theta.value_shape, dtype=complex),
                     theta.value_shape,
                     lambda z: np.zeros((len(z), comb(theta.dim, 2)) + theta.value_shape, dtype=complex), "0")
    return cs_two_forms(lam, zero, theta, t_order, h)


def cs_one_connection(lam: InvariantPolynomial, atlas: BundleAtlas, chart: str | None = None,
                      t_order: int = DEFAULT_T_ORDER, h: float = DEFAULT_FD_STEP) -> FormField:
    """Chern-Simons form ``CS_theta(lam)`` on the total space over ``chart``."""
    chart = chart or atlas.chart_names()[0]
    return cs_one_form(lam, total_space_connection(atlas, chart), t_order, h)


@dataclass
class ConnectionPath:
    """Straight line between two connections on one atlas."""

    start: BundleAtlas
    end: BundleAtlas

    def __post_init__(self):
        if not self.start.same_atlas(self.end):
            raise ValueError("connection path endpoints live on different atlases")

    def at(self, t: float) -> BundleAtlas:
        conns = {c: self.start.connections[c].scale(1 - t) + self.end.connections[c].scale(t)
                 for c in self.start.connections}
        return self.start.with_connections(conns, f"theta({t})")


def cs_two_connections(lam: InvariantPolynomial, path: ConnectionPath, chart: str | None = None,
                       t_order: int = DEFAULT_T_ORDER, h: float = DEFAULT_FD_STEP) -> FormField:
    """``CS(theta_0, theta_1; lam)`` on a base chart."""
    chart = chart or path.start.chart_names()[0]
    return cs_two_forms(lam, path.start.connections[chart], path.end.connections[chart], t_order, h)


def _total_space_family(path: ConnectionPath, chart: str) -> FormField:
    """``theta(t)`` on ``P|chart x [0,1]``, coordinates ``(x, y, t)``, no dt component."""
    atlas = path.start
    th0 = total_space_connection(atlas, chart, path.start.connections[chart])
    th1 = total_space_connection(atlas, chart, path.end.connections[chart])
    return straight_line_family(th0, th1)


def alpha_form(lam: InvariantPolynomial, path: ConnectionPath, chart: str | None = None,
               t_order: int = DEFAULT_T_ORDER, h: float = DEFAULT_FD_STEP) -> FormField:
    """``alpha`` with ``fint_[0,1] CS_{theta(t)} = -alpha``."""
    chart = chart or path.start.chart_names()[0]
    fam = _total_space_family(path, chart)
    cs_family = cs_one_form(lam, fam, t_order, h)
    return fiber_integrate(cs_family, fiber="interval", order=t_order).scale(-1.0)


# Chern-Simons action ---------------------------------------------------------------------------------


@dataclass
class ActionResult:
    value: float  # in [0, 1)
    lift: float

    def __iter__(self):
        yield self.value
        yield self.lift


def cs_action(lam: InvariantPolynomial, atlas: BundleAtlas, section: SmoothMap, cells: Sequence[Cell] | SingularChain,
              chart: str | None = None, order: int = DEFAULT_QUAD_ORDER, t_order: int = DEFAULT_T_ORDER,
              h: float = DEFAULT_FD_STEP, cs: FormField | None = None) -> ActionResult:
    """``int_M sigma^* CS_theta(lam)`` modulo 1, together with its real lift.

    ``section`` maps the parameter chart of ``M`` into ``chart x group chart``;
    composing a map ``f: M -> X`` with a section of ``f^*P`` is the caller's job.
    """
    chart = chart or atlas.chart_names()[0]
    if section.target_dim != atlas.total_dim:
        raise ValueError("section does not land in the total space chart")
    form = cs if cs is not None else cs_one_connection(lam, atlas, chart, t_order, h)
    lift = integrate(pullback(section, form), cells, order)
    return ActionResult(lift % 1.0, lift)


def period_over_fiber(lam: InvariantPolynomial, atlas: BundleAtlas, x: np.ndarray, chart: str | None = None,
                      order: int = DEFAULT_QUAD_ORDER, t_order: int = DEFAULT_T_ORDER, h: float = DEFAULT_FD_STEP) -> float:
    """``int_{P_x} i^* CS_theta(lam)`` over the oriented group fiber at base point ``x``."""
    chart = chart or atlas.chart_names()[0]
    cs = cs_one_connection(lam, atlas, chart, t_order, h)
    nb = atlas.base_dim
    x = np.asarray(x, dtype=float)
    total = 0.0
    for cell in atlas.group.fiber_cells:
        m = cell.param.target_dim
        lift = SmoothMap(cell.dim, nb + m,
                         lambda s, c=cell: np.concatenate([np.broadcast_to(x, (len(np.atleast_2d(s)), nb)), c.param(s)], 1),
                         lambda s, c=cell: np.concatenate([np.zeros((len(np.atleast_2d(s)), nb, cell.dim)), c.param.jac(s)], 1))
        total += integrate(cs, [Cell(cell.dim, lift, cell.coefficient, cell.orientation)], order)
    return total
