"""Bundled example bundles, connections and chains."""

from __future__ import annotations

import numpy as np

from .bundle import BundleAtlas, Transition
from .geometry import (
    Cell,
    Chart,
    FormField,
    SmoothMap,
    hyperspherical,
    outward_normal_last_sign,
)
from .lie_core import SU2_BASIS, quaternion_matrix

_E = quaternion_matrix(np.eye(4))  # images of 1, i, j, k


def _dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


# S^4 and the instanton ------------------------------------------------------------------


def stereo_north(x):
    """Inverse stereographic chart around the north pole of S^4 in R^5."""
    x = np.atleast_2d(x)
    r2 = np.sum(x * x, axis=1, keepdims=True)
    return np.concatenate([2 * x, 1 - r2], axis=1) / (1 + r2)


def stereo_south(y):
    y = np.atleast_2d(y)
    r2 = np.sum(y * y, axis=1, keepdims=True)
    return np.concatenate([2 * y, r2 - 1], axis=1) / (1 + r2)


def inversion():
    def f(x):
        return x / np.sum(x * x, axis=1, keepdims=True)

    def j(x):
        r2 = np.sum(x * x, axis=1)
        eye = np.eye(x.shape[1])[None]
        return eye / r2[:, None, None] - 2 * np.einsum("ni,nj->nij", x, x) / r2[:, None, None] ** 2

    return SmoothMap(4, 4, f, j, "inversion")


def instanton_atlas(rho: float = 1.0, anti: bool = False) -> BundleAtlas:
    """BPST connection of scale ``rho`` on the two-chart atlas of S^4.

    North chart: ``A = Im(xbar dx) / (rho^2 + |x|^2)``; south chart (``y = x/|x|^2``):
    ``A = -rho^2 Im(dy ybar) / (1 + rho^2 |y|^2)``; ``g_NS = xbar / |x|``.
    ``anti`` replaces ``x`` by its conjugate (orientation reversed charge).
    """
    conj = np.array([1.0, -1.0, -1.0, -1.0]) if anti else np.ones(4)

    def a_north(x):
        xq = x * conj
        X = quaternion_matrix(xq)
        Xd = _dagger(X)
        E = _E * conj[:, None, None]
        num = 0.5 * (np.einsum("nij,ajk->naik", Xd, E) - np.einsum("aij,njk->naik", _dagger(E), X))
        return num / (rho**2 + np.sum(x * x, axis=1))[:, None, None, None]

    def a_south(y):
        yq = y * conj
        Y = quaternion_matrix(yq)
        E = _E * conj[:, None, None]
        num = 0.5 * (np.einsum("aij,njk->naik", E, _dagger(Y)) - np.einsum("nij,ajk->naik", Y, _dagger(E)))
        return -rho**2 * num / (1 + rho**2 * np.sum(y * y, axis=1))[:, None, None, None]

    def g_ns(x):
        xq = x * conj
        return _dagger(quaternion_matrix(xq)) / np.linalg.norm(x, axis=1)[:, None, None]

    charts = {"N": Chart("N", 4, embedding=stereo_north), "S": Chart("S", 4, embedding=stereo_south)}
    conns = {"N": FormField(4, 1, a_north, (2, 2), None, "A_N", "N"),
             "S": FormField(4, 1, a_south, (2, 2), None, "A_S", "S")}
    trans = [Transition("N", "S", g_ns, inversion())]

    def samples(seed=0, count=16):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(count, 4))
        x *= (0.5 + rng.random((count, 1))) / np.linalg.norm(x, axis=1, keepdims=True)
        return {("N", "S"): x}

    return BundleAtlas(f"instanton(rho={rho})", "su(2)", 4, charts, conns, trans, None, samples)


def ball_cell(chart: str, embed, radius: float = 1.0) -> Cell:
    """Polar cell ``[0,1]^4 -> |x| <= radius`` oriented by the outward-normal-last rule on S^4."""
    sph = hyperspherical(3)
    span = np.array([np.pi, np.pi, 2 * np.pi])

    def f(s):
        s = np.atleast_2d(s)
        return radius * s[:, :1] * sph(s[:, 1:] * span)

    param = SmoothMap(4, 4, f, name=f"ball_{chart}")
    sign = outward_normal_last_sign(embed, param, lambda p: p, np.array([0.5, 0.5, 0.5, 0.5]))
    return Cell(4, param, 1, sign, chart, f"ball_{chart}")


def s4_cells() -> dict:
    """The two hemispheres of S^4 as cells in the N and S charts."""
    return {"N": [ball_cell("N", stereo_north)], "S": [ball_cell("S", stereo_south)]}


def instanton_charge_density(x: np.ndarray, rho: float = 1.0) -> np.ndarray:
    """Closed form ``(6 / pi^2) rho^4 / (rho^2 + |x|^2)^4`` of the charge density."""
    r2 = np.sum(np.atleast_2d(x) ** 2, axis=1)
    return 6.0 / np.pi**2 * rho**4 / (rho**2 + r2) ** 4


def instanton_curvature_oracle(x: np.ndarray, rho: float = 1.0) -> np.ndarray:
    """Closed-form curvature ``F = rho^2 dxbar ^ dx / (rho^2+|x|^2)^2`` (imaginary part).

    Returns components ``(N, 6, 2, 2)`` in the order of index pairs ``(a, b)``, ``a < b``.
    """
    x = np.atleast_2d(x)
    r2 = np.sum(x * x, axis=1)
    out = []
    for a in range(4):
        for b in range(a + 1, 4):
            m = _dagger(_E[a]) @ _E[b] - _dagger(_E[b]) @ _E[a]
            out.append(m)
    comps = np.array(out)[None] * (rho**2 / (rho**2 + r2) ** 2)[:, None, None, None]
    return 0.5 * (comps - _dagger(comps))


# Hopf monopole on S^2 ----------------------------------------------------------------------------


def hopf_atlas(charge: int = 1, extra: float = 0.0) -> BundleAtlas:
    """u(1) monopole on S^2 with radially invariant forms on R^3 - 0.

    ``A_N = -charge * (i/2) (x dy - y dx) / (r (r + z))`` plus an optional global
    term ``i * extra * (z/r) (x dy - y dx)/r^2``.
    """
    s = -float(charge)

    def rot(x):
        r = np.linalg.norm(x, axis=1)
        w = np.zeros((len(x), 3))
        w[:, 0] = -x[:, 1]
        w[:, 1] = x[:, 0]
        return w, r

    def glob(x):
        w, r = rot(x)
        return extra * (x[:, 2] / r)[:, None] * w / r[:, None] ** 2

    def a_n(x):
        w, r = rot(x)
        a = s * 0.5 * w / (r * (r + x[:, 2]))[:, None] + glob(x)
        return (1j * a)[:, :, None, None]

    def a_s(x):
        w, r = rot(x)
        a = -s * 0.5 * w / (r * (r - x[:, 2]))[:, None] + glob(x)
        return (1j * a)[:, :, None, None]

    def g_ns(x):
        rho = np.hypot(x[:, 0], x[:, 1])
        return (((x[:, 0] + 1j * x[:, 1]) / rho) ** int(round(-s)))[:, None, None]

    ident = SmoothMap(3, 3, lambda x: x, lambda x: np.broadcast_to(np.eye(3), (len(x), 3, 3)), "id")
    charts = {"N": Chart("N", 3), "S": Chart("S", 3)}
    conns = {"N": FormField(3, 1, a_n, (1, 1), None, "A_N", "N"),
             "S": FormField(3, 1, a_s, (1, 1), None, "A_S", "S")}

    def samples(seed=0, count=16):
        # equatorial band, away from the z axis where g_NS winds
        rng = np.random.default_rng(seed)
        phi = 2 * np.pi * rng.random(count)
        rho = 0.5 + rng.random(count)
        z = rho * (0.6 * rng.random(count) - 0.3)
        return {("N", "S"): np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)}

    return BundleAtlas(f"hopf(charge={charge})", "u(1)", 3, charts, conns,
                       [Transition("N", "S", g_ns, ident)], None, samples)


def s2_sphere_chart_of(point: np.ndarray) -> str:
    return "S" if point[2] < 0 and abs(point[2]) >= max(abs(point[0]), abs(point[1])) else "N"


# trivial bundles ---------------------------------------------------------------------------------


def trivial_atlas(algebra: str, base_dim: int, A: FormField | None = None, name: str = "trivial") -> BundleAtlas:
    """Product bundle with one chart; ``A = 0`` gives the flat Maurer-Cartan connection."""
    n = 2 if algebra == "su(2)" else 1
    if A is None:
        A = FormField(base_dim, 1, lambda x: np.zeros((len(x), base_dim, n, n), dtype=complex), (n, n), None, "0")
    return BundleAtlas(name, algebra, base_dim, {"U": Chart("U", base_dim)}, {"U": A})


def su2_torus_connection(strength: float = 0.4, base_dim: int = 2) -> FormField:
    """A periodic, non-flat su(2) connection on the torus with unit-period coordinates.

    For ``base_dim >= 3`` every direction carries a component and a constant
    part ``strength * sum_j T_j dx_j`` is added, so the Chern-Simons integral
    over the zero section of ``T^3`` is not zero.
    """
    T = SU2_BASIS

    def f(x):
        out = np.zeros((len(x), base_dim, 2, 2), dtype=complex)
        c = np.cos(2 * np.pi * x[:, 0])
        s = np.sin(2 * np.pi * x[:, -1])
        out[:, 0] = strength * (c[:, None, None] * T[0] + s[:, None, None] * T[2])
        out[:, -1] = strength * (s[:, None, None] * T[1] + 0.5 * c[:, None, None] * T[0])
        for j in range(1, base_dim - 1):
            cj = np.cos(2 * np.pi * x[:, j + 1])
            sj = np.sin(2 * np.pi * x[:, j - 1])
            out[:, j] = strength * (cj[:, None, None] * T[j % 3] + sj[:, None, None] * T[(j + 1) % 3])
        if base_dim >= 3:
            # constant part: the A^3 term gives a non-zero Chern-Simons integral over T^3
            for j in range(3):
                out[:, j] += strength * T[j]
        return out

    return FormField(base_dim, 1, f, (2, 2), None, "A_su2")


def u1_torus_connection(strength: float = 0.3, base_dim: int = 2) -> FormField:
    """``i a`` with ``a`` periodic and ``da`` exact on the torus."""

    def f(x):
        out = np.zeros((len(x), base_dim, 1, 1), dtype=complex)
        out[:, 0, 0, 0] = 1j * strength * np.sin(2 * np.pi * x[:, -1])
        out[:, -1, 0, 0] = 1j * strength * 0.5 * np.cos(2 * np.pi * x[:, 0])
        return out

    return FormField(base_dim, 1, f, (1, 1), None, "A_u1")


def su2_sphere3_connection(strength: float = 0.5) -> FormField:
    """su(2) connection on R^4 - 0 invariant under scaling (so it lives on S^3)."""

    def f(x):
        r2 = np.sum(x * x, axis=1)
        out = np.zeros((len(x), 4, 2, 2), dtype=complex)
        out[:, 0] = strength * (x[:, 1] / r2)[:, None, None] * SU2_BASIS[0]
        out[:, 1] = -strength * (x[:, 0] / r2)[:, None, None] * SU2_BASIS[0]
        out[:, 2] = strength * (x[:, 3] / r2)[:, None, None] * SU2_BASIS[1]
        out[:, 3] = -strength * (x[:, 2] / r2)[:, None, None] * SU2_BASIS[2]
        return out

    return FormField(4, 1, f, (2, 2), None, "A_S3")
