"""Differential characters in a finite cochain model.

A degree ``k`` character on a chain complex is a triple ``(c, h, omega)`` of an
integer ``k``-cocycle, a real ``(k-1)``-cochain and a real ``k``-cocycle with
``delta h = omega - c``.  It acts on ``(k-1)``-cycles by ``z -> <h, z> mod 1``.
Relative characters are characters on a mapping cone; their curvature cochain
splits into the curvature on ``X`` and the covariant derivative on ``A``.

Two arithmetic modes are supported: ``'rational'`` (``Fraction`` entries,
exact) and ``'float'`` (numpy floats, with a snap tolerance for periods).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .complexes import (
    ChainComplex,
    ChainMap,
    FGGroup,
    MappingCone,
    cohomology,
    imat,
    imatmul,
    integer_kernel,
    is_zero,
    rational_rank,
    rational_solve,
    solve_integer,
)
from .geometry import DEFAULT_QUAD_ORDER, FormField, cell_integrals

DEFAULT_SNAP_TOLERANCE = 1e-6
DEFAULT_FLOAT_TOLERANCE = 1e-9


class PeriodError(ValueError):
    """Curvature periods are too far from integers to be snapped."""

    def __init__(self, message: str, cycle=None, period=None):
        super().__init__(message)
        self.cycle = cycle
        self.period = period


# cochain helpers -----------------------------------------------------------------------------------


def _as_mode(v, mode: str) -> np.ndarray:
    v = np.asarray(v).reshape(-1)
    if mode == "rational":
        out = np.empty(len(v), dtype=object)
        for i, a in enumerate(v):
            out[i] = a if isinstance(a, Fraction) else Fraction(a) if not isinstance(a, float) else Fraction(a).limit_denominator(10**12)
        return out
    return np.asarray([float(a) for a in v], dtype=float)


def coboundary(C: ChainComplex, k: int, v) -> np.ndarray:
    """``delta_k v`` for a ``k``-cochain with integer, rational or float entries."""
    D = C.delta(k)
    v = np.asarray(v).reshape(-1)
    if D.shape[0] == 0:
        return np.zeros(0, dtype=v.dtype)
    if v.dtype == object:
        return np.dot(D, v) if D.shape[1] else np.array([0] * D.shape[0], dtype=object)
    return np.asarray(D, dtype=float) @ v.astype(float)


def pair(cochain, chain) -> object:
    """Kronecker pairing ``<cochain, chain>``."""
    a = np.asarray(cochain).reshape(-1)
    b = np.asarray(chain).reshape(-1)
    if len(a) != len(b):
        raise ValueError("cochain and chain have different lengths")
    if a.dtype == object or b.dtype == object:
        return sum((x * int(y) for x, y in zip(a, b) if y), Fraction(0) if a.dtype == object else 0)
    return float(np.dot(a, b.astype(float)))


def mod1(x):
    return x % 1 if isinstance(x, Fraction) else float(x) % 1.0


def circle_distance(a, b) -> float:
    """Distance of two reals in R/Z."""
    d = float((a - b) % 1)
    return min(d, 1.0 - d)


def cycle_basis(C: ChainComplex, k: int) -> np.ndarray:
    """Columns form a Z-basis of the cycle group ``Z_k``."""
    if C.rank(k) == 0:
        return imat([], (0, 0))
    D = C.d(k)
    return integer_kernel(D) if D.shape[0] else imat(np.eye(C.rank(k), dtype=int), (C.rank(k), C.rank(k)))


def homology_basis(C: ChainComplex, k: int) -> tuple[np.ndarray, list]:
    """Cycles generating ``H_k``: returns ``(columns, orders)`` with order 0 for free generators."""
    K = cycle_basis(C, k)
    if K.shape[1] == 0:
        return K, []
    B = C.d(k + 1)
    cols = []
    for j in range(B.shape[1]):
        c = solve_integer(K, B[:, j])
        cols.append(c)
    Bk = imat(np.array(cols, dtype=object).T, (K.shape[1], len(cols))) if cols else imat([], (K.shape[1], 0))
    G = FGGroup(K.shape[1], Bk)
    gens = G.generators()
    orders = [d for d in G.orders if d != 1]
    return imatmul(K, gens), orders


def free_homology_basis(C: ChainComplex, k: int) -> np.ndarray:
    gens, orders = homology_basis(C, k)
    keep = [i for i, d in enumerate(orders) if d == 0]
    return gens[:, keep] if keep else imat([], (C.rank(k), 0))


def periods(C: ChainComplex, k: int, omega) -> list:
    Z = free_homology_basis(C, k)
    return [pair(omega, Z[:, j]) for j in range(Z.shape[1])]


def integer_cocycle_with_periods(C: ChainComplex, k: int, values: Sequence[int], Z: np.ndarray | None = None) -> np.ndarray:
    """An integer cocycle taking the given values on the free homology generators."""
    Z = free_homology_basis(C, k) if Z is None else Z
    n = C.rank(k)
    D = C.delta(k)
    M = np.concatenate([D, Z.T.copy()], axis=0) if Z.shape[1] else D
    rhs = [0] * D.shape[0] + [int(v) for v in values]
    if M.shape[0] == 0:
        return imat([0] * n, (n, 1)).reshape(-1)
    sol = solve_integer(M, rhs)
    if sol is None:
        raise ValueError("no integer cocycle with these periods")
    return sol


def real_solve(D: np.ndarray, target, mode: str):
    """A solution of ``D x = target``: exact in rational mode, least squares in float mode."""
    n = D.shape[1]
    if mode == "rational":
        if D.shape[0] == 0 or n == 0:
            return _as_mode([0] * n, mode), 0
        sol = rational_solve(D, target)
        if sol is None:
            raise ValueError("inconsistent linear system")
        return _as_mode(sol, mode), 0
    if n == 0:
        return np.zeros(0), float(np.max(np.abs(target))) if len(target) else 0.0
    A = np.asarray(D, dtype=float)
    x, *_ = np.linalg.lstsq(A, np.asarray(target, dtype=float), rcond=None)
    res = float(np.max(np.abs(A @ x - target))) if len(target) else 0.0
    return x, res


# characters --------------------------------------------------------------------------------------


@dataclass
class CochainCharacter:
    """Differential character ``(c, h, omega)`` of degree ``k`` on a chain complex."""

    complex: ChainComplex
    degree: int
    c: np.ndarray
    h: np.ndarray
    omega: np.ndarray
    mode: str = "float"
    tolerance: float = DEFAULT_FLOAT_TOLERANCE
    snap_correction: float = 0.0
    notes: list = field(default_factory=list)

    def __post_init__(self):
        C, k = self.complex, self.degree
        if self.mode not in ("rational", "float"):
            raise ValueError(f"unknown mode {self.mode!r}")
        self.c = imat(np.asarray(self.c, dtype=object).reshape(-1), (C.rank(k), 1)).reshape(-1) if C.rank(k) else imat([], (0, 1)).reshape(-1)
        self.h = _as_mode(self.h, self.mode)
        self.omega = _as_mode(self.omega, self.mode)
        if len(self.h) != C.rank(k - 1) or len(self.omega) != C.rank(k):
            raise ValueError("cochain sizes do not match the complex")
        if not is_zero(coboundary(C, k, self.c)):
            raise ValueError("c is not a cocycle")
        r = self.relation_residual()
        if r > (0 if self.mode == "rational" else self.tolerance):
            raise ValueError(f"defining relation delta h = omega - c violated by {r:.3g}")

    # structure -------------------------------------------------------------
    def relation_residual(self) -> float:
        lhs = coboundary(self.complex, self.degree - 1, self.h) if self.degree >= 1 else np.zeros(0)
        diff = [a - (b - int(c)) for a, b, c in zip(lhs, self.omega, self.c)]
        return float(max((abs(d) for d in diff), default=0))

    @property
    def curvature(self) -> np.ndarray:
        return self.omega

    @property
    def characteristic_class(self) -> np.ndarray:
        return self.c

    def _new(self, c, h, omega) -> "CochainCharacter":
        return replace(self, c=c, h=h, omega=omega, notes=list(self.notes))

    def __add__(self, other: "CochainCharacter") -> "CochainCharacter":
        _check_same(self, other)
        return self._new(self.c + other.c, self.h + other.h, self.omega + other.omega)

    def __neg__(self) -> "CochainCharacter":
        return self._new(-self.c, -self.h, -self.omega)

    def __sub__(self, other: "CochainCharacter") -> "CochainCharacter":
        return self + (-other)

    def scale(self, n: int) -> "CochainCharacter":
        return self._new(self.c * int(n), self.h * int(n), self.omega * int(n))

    def evaluate(self, z) -> object:
        return evaluate(self, z)

    def to_dict(self) -> dict:
        conv = (lambda v: str(v)) if self.mode == "rational" else float
        return {"degree": self.degree, "mode": self.mode, "c": [int(v) for v in self.c],
                "h": [conv(v) for v in self.h], "omega": [conv(v) for v in self.omega]}


@dataclass
class RelativeCochainCharacter(CochainCharacter):
    """Character on the mapping cone of ``phi: A -> X``."""

    cone: MappingCone | None = None

    def __post_init__(self):
        if self.cone is None:
            raise ValueError("relative characters need their mapping cone")
        if self.complex is not self.cone.complex:
            raise ValueError("complex must be the cone complex")
        super().__post_init__()

    @property
    def curvature(self) -> np.ndarray:
        return self.cone.split(self.degree, self.omega)[0]

    @property
    def covariant_derivative(self) -> np.ndarray:
        return self.cone.split(self.degree, self.omega)[1]

    def parts(self) -> dict:
        k = self.degree
        cX, cA = self.cone.split(k, self.c)
        hX, hA = self.cone.split(k - 1, self.h)
        return {"c_X": cX, "c_A": cA, "h_X": hX, "h_A": hA, "omega": self.curvature, "theta": self.covariant_derivative}


def same_complex(A: ChainComplex, B: ChainComplex) -> bool:
    """Equal up to trailing zero groups (chain maps pad their ends)."""
    if A is B:
        return True
    top = max(A.top, B.top)
    return all(A.rank(k) == B.rank(k) and np.array_equal(A.d(k), B.d(k)) for k in range(top + 1))


def _check_same(a: CochainCharacter, b: CochainCharacter) -> None:
    if not same_complex(a.complex, b.complex) or a.degree != b.degree or a.mode != b.mode:
        raise ValueError("characters live on different complexes, degrees or modes")


def _make(template_cone: MappingCone | None, C: ChainComplex, k: int, c, h, omega, mode: str, tol: float,
          correction: float = 0.0, notes=None) -> CochainCharacter:
    if template_cone is not None:
        return RelativeCochainCharacter(C, k, c, h, omega, mode, tol, correction, list(notes or []), template_cone)
    return CochainCharacter(C, k, c, h, omega, mode, tol, correction, list(notes or []))


def _complex_of(target) -> tuple[ChainComplex, MappingCone | None]:
    if isinstance(target, MappingCone):
        return target.complex, target
    return target, None


# operations ------------------------------------------------------------------------------------------


def evaluate(x: CochainCharacter, z) -> object:
    """``x(z) in R/Z`` for an integer ``(k-1)``-cycle ``z`` (a value in ``[0, 1)``)."""
    k = x.degree
    z = np.asarray(z).reshape(-1)
    if len(z) != x.complex.rank(k - 1):
        raise ValueError("chain has the wrong length")
    if any(int(v) != v for v in z):
        raise ValueError("cycles must have integer coefficients")
    if k - 1 >= 1 and not is_zero(imatmul(x.complex.d(k - 1), imat(z, (len(z), 1)))):
        raise ValueError("not a cycle")
    return mod1(pair(x.h, z))


def zero_character(target, k: int, mode: str = "float") -> CochainCharacter:
    C, cone = _complex_of(target)
    return _make(cone, C, k, [0] * C.rank(k), [0] * C.rank(k - 1), [0] * C.rank(k), mode, DEFAULT_FLOAT_TOLERANCE)


def iota(target, k: int, mu, mode: str = "float") -> CochainCharacter:
    """Topological trivialization ``iota(mu) = (0, mu, delta mu)``."""
    C, cone = _complex_of(target)
    mu = _as_mode(mu, mode)
    return _make(cone, C, k, [0] * C.rank(k), mu, coboundary(C, k - 1, mu), mode, DEFAULT_FLOAT_TOLERANCE)


def j_flat(target, k: int, u_tilde, mode: str = "float", tolerance: float = DEFAULT_SNAP_TOLERANCE) -> CochainCharacter:
    """Flat character of an R/Z-cocycle, given by a real lift ``u_tilde`` with ``delta u_tilde`` integral.

    ``j(u) = (-delta u_tilde, u_tilde, 0)``.
    """
    C, cone = _complex_of(target)
    u = _as_mode(u_tilde, mode)
    du = coboundary(C, k - 1, u)
    rounded = [int(round(float(v))) for v in du]
    bad = max((abs(float(v) - r) for v, r in zip(du, rounded)), default=0.0)
    if (mode == "rational" and bad != 0) or bad > tolerance:
        raise ValueError("u_tilde is not the lift of an R/Z-cocycle")
    return _make(cone, C, k, [-r for r in rounded], u, [0] * C.rank(k), mode, max(tolerance, DEFAULT_FLOAT_TOLERANCE))


def from_curvature(target, k: int, omega, c=None, mode: str = "float",
                   snap_tolerance: float = DEFAULT_SNAP_TOLERANCE) -> CochainCharacter:
    """A character with prescribed curvature cochain ``omega``.

    ``c`` defaults to an integer cocycle with the rounded periods of ``omega``
    on the free homology generators.  In float mode ``h`` is a least-squares
    solution and ``omega`` is snapped to ``delta h + c``; the size of the
    correction is recorded.  When ``H^{k-1}(R)`` is nonzero the result is one
    representative and a note says so.
    """
    C, cone = _complex_of(target)
    omega = _as_mode(omega, mode)
    notes = []
    dom = coboundary(C, k, omega)
    dres = float(max((abs(v) for v in dom), default=0))
    if (mode == "rational" and dres != 0) or dres > snap_tolerance:
        raise PeriodError(f"curvature cochain is not closed (residual {dres:.3g})")
    Z = free_homology_basis(C, k)
    pers = [pair(omega, Z[:, j]) for j in range(Z.shape[1])]
    rounded = [int(round(float(p))) for p in pers]
    for j, (p, r) in enumerate(zip(pers, rounded)):
        off = abs(float(p) - r)
        if (mode == "rational" and p != r) or off > snap_tolerance:
            raise PeriodError(f"period {float(p):.9g} on homology generator {j} is not integral", Z[:, j], float(p))
    if c is None:
        c = integer_cocycle_with_periods(C, k, rounded, Z)
    else:
        c = imat(np.asarray(c, dtype=object).reshape(-1), (C.rank(k), 1)).reshape(-1)
        if not is_zero(coboundary(C, k, c)):
            raise ValueError("c is not a cocycle")
        cp = [pair(c, Z[:, j]) for j in range(Z.shape[1])]
        if list(map(int, cp)) != rounded:
            raise PeriodError("c does not match the periods of omega")
    target_vec = omega - (c.astype(float) if mode == "float" else c)
    h, res = real_solve(C.delta(k - 1), target_vec, mode)
    correction = 0.0
    if mode == "float":
        new_omega = coboundary(C, k - 1, h) + c.astype(float) if k >= 1 else c.astype(float)
        correction = float(np.max(np.abs(new_omega - omega))) if len(omega) else 0.0
        if correction > snap_tolerance:
            raise PeriodError(f"snap correction {correction:.3g} exceeds tolerance")
        omega = new_omega
    b = cohomology(C, "R")[k - 1] if k >= 1 and C.top >= k - 1 else 0
    if b:
        notes.append(f"representative only: H^{k - 1}(R) has rank {b}")
    return _make(cone, C, k, c, h, omega, mode, max(DEFAULT_FLOAT_TOLERANCE, 10 * correction), correction, notes)


def breve_p(x: RelativeCochainCharacter) -> CochainCharacter:
    """Forget the ``A``-parts: ``(c_X, h_X, omega)``."""
    p = x.parts()
    X = x.cone.phi.target
    return CochainCharacter(X, x.degree, p["c_X"], p["h_X"], p["omega"], x.mode, x.tolerance, x.snap_correction)


def breve_i(y: CochainCharacter, cone: MappingCone) -> RelativeCochainCharacter:
    """``y`` of degree ``k-1`` on ``A`` to degree ``k`` on the cone; ``cov = -curv(y)``.

    ``c = (0, -c_y)``, ``h = (0, h_y)``, curvature ``(0, -omega_y)``.
    """
    if not same_complex(y.complex, cone.phi.source):
        raise ValueError("character does not live on the source of the cone map")
    k = y.degree + 1
    X = cone.phi.target
    zc = [0] * X.rank(k)
    zh = [0] * X.rank(k - 1)
    c = cone.join(k, imat(zc, (len(zc), 1)).reshape(-1) if zc else np.zeros(0, dtype=object), -y.c)
    h = cone.join(k - 1, _as_mode(zh, y.mode), y.h)
    om = cone.join(k, _as_mode([0] * X.rank(k), y.mode), -y.omega)
    return RelativeCochainCharacter(cone.complex, k, c, h, om, y.mode, y.tolerance, y.snap_correction, [], cone)


def iota_pi(cone: MappingCone, k: int, mu, nu, mode: str = "float") -> RelativeCochainCharacter:
    """``iota_phi(mu, nu)`` with curvature ``d_phi(mu, nu) = (delta mu, phi^* mu - delta nu)``."""
    h = cone.join(k - 1, _as_mode(mu, mode), _as_mode(nu, mode))
    return iota(cone, k, h, mode)


def pullback(x: CochainCharacter, f: ChainMap) -> CochainCharacter:
    """``f^* x`` along a chain map ``f: B -> C`` with ``x`` on ``C``."""
    k = x.degree
    c = imatmul(f[k].T.copy(), imat(x.c, (len(x.c), 1))).reshape(-1) if len(x.c) else np.zeros(f.source.rank(k), dtype=object)

    def pb(v, deg):
        M = f[deg]
        if x.mode == "rational":
            return np.dot(M.T, v) if M.size else _as_mode([0] * f.source.rank(deg), "rational")
        return np.asarray(M, dtype=float).T @ v.astype(float)

    return CochainCharacter(f.source, k, c, pb(x.h, k - 1), pb(x.omega, k), x.mode, x.tolerance, x.snap_correction)


def characters_equal(x: CochainCharacter, y: CochainCharacter, tol: float | None = None) -> tuple[bool, float]:
    """Equal curvature and equal evaluations on a Z-basis of the ``(k-1)``-cycles."""
    _check_same(x, y)
    tol = (0 if x.mode == "rational" else 1e-9) if tol is None else tol
    disc = max((abs(float(a - b)) for a, b in zip(x.omega, y.omega)), default=0.0)
    Z = cycle_basis(x.complex, x.degree - 1)
    for j in range(Z.shape[1]):
        disc = max(disc, circle_distance(evaluate(x, Z[:, j]), evaluate(y, Z[:, j])))
    return disc <= tol, disc


def is_zero_character(x: CochainCharacter, tol: float | None = None) -> bool:
    return characters_equal(x, zero_character(_target(x), x.degree, x.mode), tol)[0]


def _target(x: CochainCharacter):
    return x.cone if isinstance(x, RelativeCochainCharacter) else x.complex


def discretize_form(form: FormField, cells: Sequence, order: int = DEFAULT_QUAD_ORDER) -> np.ndarray:
    """Real cochain ``cell -> int_cell form`` (cell orientation included)."""
    if not cells:
        return np.zeros(0)
    if any(c.dim != form.degree for c in cells):
        raise ValueError("form degree does not match the cell dimension")
    return np.asarray(cell_integrals(form, list(cells), order), dtype=float)


# solving modulo integers ----------------------------------------------------------------------------------


def _rational_left_null(L) -> np.ndarray:
    """Integer rows spanning the left null space of a rational matrix."""
    L = np.asarray(L, dtype=object)
    m, n = L.shape
    if m == 0:
        return imat([], (0, 0))
    # null space of L^T by Gauss-Jordan
    rows = [[Fraction(L[i, j]) for i in range(m)] for j in range(n)]
    pivots, r = [], 0
    for col in range(m):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][col]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * m
        v[fcol] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][fcol]
        den = 1
        for a in v:
            den = den * a.denominator // np.gcd(den, a.denominator)
        basis.append([int(a * den) for a in v])
    return imat(basis, (len(basis), m)) if basis else imat([], (0, m))


def solve_mod_integers(L, t) -> tuple[list, list] | None:
    """Rational ``x`` and integer ``m`` with ``L x = t + m``, or ``None``."""
    L = np.asarray(L, dtype=object)
    t = [Fraction(v) for v in np.asarray(t).reshape(-1)]
    N = _rational_left_null(L)
    if N.shape[0]:
        Nt = [sum((int(N[i, j]) * t[j] for j in range(len(t))), Fraction(0)) for i in range(N.shape[0])]
        if any(v.denominator != 1 for v in Nt):
            return None
        m = solve_integer(N, [-int(v) for v in Nt])
        if m is None:
            return None
        m = [int(v) for v in m]
    else:
        m = [0] * len(t)
    rhs = [a + b for a, b in zip(t, m)]
    if L.shape[1] == 0:
        return ([], m) if all(v == 0 for v in rhs) else None
    x = rational_solve(L, rhs)
    if x is None:
        return None
    return x, m


# exact sequences --------------------------------------------------------------------------------------------


def _random_rational(rng, n: int, den: int = 7) -> np.ndarray:
    return _as_mode([Fraction(int(v), den) for v in rng.integers(-3 * den, 3 * den + 1, size=n)], "rational")


def random_character(target, k: int, rng, mode: str = "rational", flat: bool = False,
                     topologically_trivial: bool = False) -> CochainCharacter:
    """Random character: integer cocycle from cohomology generators plus coboundaries, random ``h``."""
    C, cone = _complex_of(target)
    n_k, n_km1 = C.rank(k), C.rank(k - 1)
    H = cohomology(C)[k] if k <= C.top else None
    c = np.array([0] * n_k, dtype=object)
    if H is not None and H.representatives.shape[1] and not topologically_trivial:
        coeffs = rng.integers(-2, 3, size=H.representatives.shape[1])
        c = c + np.dot(H.representatives, np.array([int(v) for v in coeffs], dtype=object))
    b = np.array([int(v) for v in rng.integers(-2, 3, size=n_km1)], dtype=object)
    c = c + (coboundary(C, k - 1, b) if n_km1 else 0)
    if flat:
        # delta h = -c: integral coboundaries and torsion classes, plus real cocycles
        c = coboundary(C, k - 1, b) if n_km1 else np.array([0] * n_k, dtype=object)
        h = np.array([Fraction(-int(v)) for v in b], dtype=object)
        if H is not None:
            for i, order in enumerate(H.torsion):
                a = int(rng.integers(0, order))
                t = H.representatives[:, i]
                beta = solve_integer(C.delta(k - 1), t * order)
                c = c + a * t
                h = h - np.array([Fraction(a * int(v), order) for v in beta], dtype=object)
        if n_km1:
            Hm = cohomology(C)[k - 1]
            if Hm.representatives.shape[1]:
                coef = _random_rational(rng, Hm.representatives.shape[1])
                h = h + np.dot(np.asarray(Hm.representatives, dtype=object), coef)
            if k >= 2 and C.rank(k - 2):
                h = h + coboundary(C, k - 2, _random_rational(rng, C.rank(k - 2)))
        return _make(cone, C, k, c, _as_mode(h, mode), [0] * n_k, mode, DEFAULT_FLOAT_TOLERANCE)
    h = _as_mode(_random_rational(rng, n_km1), mode)
    omega = coboundary(C, k - 1, h) + (c if mode == "rational" else c.astype(float))
    return _make(cone, C, k, c, h, omega, mode, DEFAULT_FLOAT_TOLERANCE)


@dataclass
class SequenceCheck:
    name: str
    passed: bool
    detail: str = ""


def verify_short_sequences(target, k: int, samples: int = 10, seed: int = 0) -> list[SequenceCheck]:
    """Membership and composite checks for the two short exact sequences (rational mode).

    ``ker c = im iota``, ``ker curv = im j``, ``curv o iota = delta``,
    ``c o iota = 0``, ``curv o j = 0``, and the count of flat characters against
    ``H^{k-1}(R/Z)``.
    """
    C, cone = _complex_of(target)
    rng = np.random.default_rng(seed)
    out = []
    ok_ci, ok_cj, ok_kc, ok_kj, ok_kerj, ok_keri = True, True, True, True, True, True
    for _ in range(samples):
        mu = _random_rational(rng, C.rank(k - 1))
        x = iota(target, k, mu, "rational")
        ok_ci &= all(v == 0 for v in x.c) and list(x.omega) == list(coboundary(C, k - 1, mu))
        # ker c = im iota: topologically trivial character has an iota witness
        y = random_character(target, k, rng, "rational", topologically_trivial=True)
        b = solve_integer(C.delta(k - 1), y.c) if C.rank(k - 1) else None
        if b is None and not is_zero(y.c):
            ok_kc = False
        else:
            bb = np.array([0] * C.rank(k - 1), dtype=object) if b is None else b
            w = iota(target, k, y.h + bb, "rational")
            ok_kc &= characters_equal(w, y, 0)[0]
        # ker curv = im j
        f = random_character(target, k, rng, "rational", flat=True)
        jf = j_flat(target, k, f.h, "rational")
        ok_kj &= characters_equal(jf, f, 0)[0] and all(v == 0 for v in jf.omega)
        ok_cj &= all(v == 0 for v in jf.omega)
        # kernel of iota: closed forms with integral periods
        if C.rank(k - 1):
            Hm = cohomology(C)[k - 1]
            z = np.array([0] * C.rank(k - 1), dtype=object)
            if Hm.representatives.shape[1]:
                z = z + np.dot(Hm.representatives, np.array([int(v) for v in rng.integers(-2, 3, Hm.representatives.shape[1])], dtype=object))
            if k >= 2 and C.rank(k - 2):
                z = z + coboundary(C, k - 2, _random_rational(rng, C.rank(k - 2)))
            ok_keri &= is_zero_character(iota(target, k, z, "rational"), 0)
            # kernel of j: integral lifts
            zi = np.array([0] * C.rank(k - 1), dtype=object)
            if Hm.representatives.shape[1]:
                zi = zi + np.dot(Hm.representatives, np.array([int(v) for v in rng.integers(-2, 3, Hm.representatives.shape[1])], dtype=object))
            ok_kerj &= is_zero_character(j_flat(target, k, zi, "rational"), 0)
    out.append(SequenceCheck("curv o iota = delta, c o iota = 0", ok_ci))
    out.append(SequenceCheck("curv o j = 0", ok_cj))
    out.append(SequenceCheck("ker c = im iota (witness)", ok_kc))
    out.append(SequenceCheck("ker curv = im j (witness)", ok_kj))
    out.append(SequenceCheck("iota kills closed integral cochains", ok_keri))
    out.append(SequenceCheck("j kills integral classes", ok_kerj))
    # flat characters vs H^{k-1}(R/Z)
    uct = cohomology(C, "R/Z")[k - 1] if k - 1 <= C.top else (0, [])
    dim_flat = _flat_dimension(C, k)
    tors = _flat_torsion(C, k)
    out.append(SequenceCheck("flat characters ~ H^{k-1}(R/Z)", dim_flat == uct[0] and sorted(tors) == sorted(uct[1]),
                             f"torus dim {dim_flat} vs {uct[0]}, finite {tors} vs {uct[1]}"))
    return out


def _flat_dimension(C: ChainComplex, k: int) -> int:
    """Dimension of real cocycles modulo coboundaries in degree ``k-1`` (identity component of flat characters)."""
    n = C.rank(k - 1)
    rk_d = rational_rank(C.delta(k - 1)) if C.delta(k - 1).size else 0
    rk_b = rational_rank(C.delta(k - 2)) if k >= 2 and C.delta(k - 2).size else 0
    return n - rk_d - rk_b


def _flat_torsion(C: ChainComplex, k: int) -> list:
    """Components of the flat characters: torsion of ``H^k(Z)`` (Bockstein image)."""
    return list(cohomology(C)[k].torsion) if k <= C.top else []


def verify_long_sequence(cone: MappingCone, k: int, samples: int = 10, seed: int = 0) -> list[SequenceCheck]:
    """Membership checks for ``H^{k-2}(X;R/Z) -> H^{k-1}(A)^ -> H^k(phi)^ -> H^k(X)^ -> H^k(A;Z)``.

    At each differential junction random kernel elements are tested for a
    witness in the image, and composites are checked to vanish.
    """
    rng = np.random.default_rng(seed)
    phi = cone.phi
    A, X = phi.source, phi.target
    out = []
    # composite checks
    ok_pi, ok_cp = True, True
    for _ in range(samples):
        y = random_character(A, k - 1, rng, "rational")
        ok_pi &= is_zero_character(breve_p(breve_i(y, cone)), 0)
        x = random_character(cone, k, rng, "rational")
        px = breve_p(x)
        phic = imatmul(phi[k].T.copy(), imat(px.c, (len(px.c), 1))).reshape(-1) if len(px.c) else px.c
        ok_cp &= (solve_integer(A.delta(k - 1), phic) is not None) if A.rank(k) else True
    out.append(SequenceCheck("p o i = 0", ok_pi))
    out.append(SequenceCheck("phi^* c o p = 0", ok_cp))
    # junction at H^k(phi): ker p = im i
    ok = True
    for _ in range(samples):
        y = random_character(A, k - 1, rng, "rational")
        beta = _random_rational(rng, X.rank(k - 2)) if k >= 2 else None
        x = breve_i(y, cone)
        if beta is not None and len(beta):
            # gauge by iota_phi(delta beta, phi^* beta), an exact relative character
            mu = coboundary(X, k - 2, beta)
            nu = np.dot(np.asarray(phi[k - 2], dtype=object).T, beta) if phi[k - 2].size else _as_mode([0] * A.rank(k - 2), "rational")
            x = x + iota_pi(cone, k, mu, nu, "rational")
        w = _witness_i(x, cone)
        ok &= w is not None and characters_equal(breve_i(w, cone), x, 0)[0]
    out.append(SequenceCheck("ker p = im i at H^k(phi)", ok))
    # junction at H^k(X): ker phi^*c = im p
    ok = True
    for _ in range(samples):
        x = random_character(X, k, rng, "rational")
        phic = imatmul(phi[k].T.copy(), imat(x.c, (len(x.c), 1))).reshape(-1) if len(x.c) else x.c
        b = solve_integer(A.delta(k - 1), phic) if A.rank(k) else np.zeros(A.rank(k - 1), dtype=object)
        if b is None:
            continue  # not in the kernel
        lift = _witness_p(x, cone, b)
        ok &= characters_equal(breve_p(lift), x, 0)[0]
    out.append(SequenceCheck("ker phi^*c = im p at H^k(X)", ok))
    # junction at H^{k-1}(A): ker i = im phi^* j
    ok = True
    for _ in range(samples):
        u = _random_rational(rng, X.rank(k - 2)) if k >= 2 else np.zeros(0, dtype=object)
        if k >= 2 and X.rank(k - 2):
            Hm = cohomology(X)[k - 2]
            if Hm.representatives.shape[1]:
                u = np.dot(np.asarray(Hm.representatives, dtype=object), _random_rational(rng, Hm.representatives.shape[1]))
            else:
                u = _as_mode([0] * X.rank(k - 2), "rational")
        pu = np.dot(np.asarray(phi[k - 2], dtype=object).T, u) if phi[k - 2].size else _as_mode([0] * A.rank(k - 2), "rational")
        y = j_flat(A, k - 1, pu, "rational")
        ok &= is_zero_character(breve_i(y, cone), 0)
        w = _witness_j(y, cone)
        ok &= w is not None
    out.append(SequenceCheck("ker i = im phi^* j at H^{k-1}(A)", ok))
    return out


def _witness_i(x: RelativeCochainCharacter, cone: MappingCone) -> CochainCharacter | None:
    """``y`` with ``i(y) = x`` when ``p(x) = 0``."""
    k = x.degree
    phi = cone.phi
    A, X = phi.source, phi.target
    p = x.parts()
    if any(v != 0 for v in p["omega"]):
        return None
    # h_X = b + delta beta with b integral on cycles
    hX = p["h_X"]
    if k >= 2 and X.rank(k - 2):
        sol = solve_mod_integers(np.asarray(X.delta(k - 2), dtype=object), hX)
        if sol is None:
            return None
        beta = _as_mode(sol[0], "rational")
    else:
        if any(Fraction(v).denominator != 1 for v in hX):
            return None
        beta = _as_mode([0] * X.rank(k - 2), "rational") if k >= 2 else np.zeros(0, dtype=object)
    pb = np.dot(np.asarray(phi[k - 2], dtype=object).T, beta) if k >= 2 and phi[k - 2].size else _as_mode([0] * A.rank(k - 2), "rational")
    h_y = p["h_A"] - pb
    om_y = -p["theta"]
    c_y = om_y - coboundary(A, k - 2, h_y)
    if any(Fraction(v).denominator != 1 for v in c_y):
        return None
    return CochainCharacter(A, k - 1, [int(v) for v in c_y], h_y, om_y, "rational")


def _witness_p(x: CochainCharacter, cone: MappingCone, b) -> RelativeCochainCharacter:
    """Section ``x'`` with ``p(x') = x`` from ``phi^* c(x) = delta b``."""
    k = x.degree
    phi = cone.phi
    A = phi.source
    hA = _as_mode([0] * A.rank(k - 2), "rational")
    theta = np.dot(np.asarray(phi[k - 1], dtype=object).T, x.h) if phi[k - 1].size else _as_mode([0] * A.rank(k - 1), "rational")
    theta = theta + np.array([Fraction(int(v)) for v in b], dtype=object) if len(b) else theta
    c = cone.join(k, x.c, imat([int(v) for v in b], (len(b), 1)).reshape(-1) if len(b) else np.zeros(0, dtype=object))
    h = cone.join(k - 1, x.h, hA)
    om = cone.join(k, x.omega, theta)
    return RelativeCochainCharacter(cone.complex, k, c, h, om, "rational", cone=cone)


def _witness_j(y: CochainCharacter, cone: MappingCone) -> list | None:
    """Real ``(k-2)``-cochain ``w`` on ``X`` with ``delta w`` integral and ``phi^* j(w) = y``."""
    k = y.degree + 1
    phi = cone.phi
    A, X = phi.source, phi.target
    if any(v != 0 for v in y.omega):
        return None
    ZA = cycle_basis(A, k - 2)
    P = np.asarray(phi[k - 2], dtype=object)
    rows_eval = np.dot(ZA.T, P.T) if ZA.shape[1] and P.size else imat([], (ZA.shape[1], X.rank(k - 2)))
    D = np.asarray(X.delta(k - 2), dtype=object)
    L = np.concatenate([rows_eval, D], axis=0) if D.shape[0] else rows_eval
    t = [pair(y.h, ZA[:, j]) for j in range(ZA.shape[1])] + [0] * D.shape[0]
    if L.shape[0] == 0:
        return []
    sol = solve_mod_integers(L, t)
    return None if sol is None else sol[0]


def defining_relation_defect(x: CochainCharacter, a) -> float:
    """Circle distance between ``x(da)`` and ``<omega, a> - <c, a>`` for an integer ``k``-chain ``a``."""
    k = x.degree
    a = np.asarray(a, dtype=object).reshape(-1)
    z = imatmul(x.complex.d(k), imat(a, (len(a), 1))).reshape(-1) if k >= 1 else a
    lhs = evaluate(x, z)
    rhs = mod1(pair(x.omega, a) - pair(x.c, a))
    if x.mode == "rational":
        return 0.0 if lhs == rhs else circle_distance(lhs, rhs) or float("inf")
    return circle_distance(lhs, rhs)


def stokes_defect(form: FormField, cells_k: Sequence, cells_k1: Sequence, C: ChainComplex,
                  order: int = DEFAULT_QUAD_ORDER, h: float | None = None) -> float:
    """``max |delta(discretize form) - discretize(d form)|`` on the ``(k+1)``-cells."""
    from .geometry import DEFAULT_FD_STEP, exterior_derivative

    k = form.degree
    lhs = coboundary(C, k, discretize_form(form, cells_k, order))
    rhs = discretize_form(exterior_derivative(form, h or DEFAULT_FD_STEP), cells_k1, order)
    return float(np.max(np.abs(lhs - rhs))) if len(rhs) else 0.0


def verify_sequences(model, k: int, samples: int = 10, seed: int = 0) -> dict:
    """All sequence checks for a complex (short sequences) or a mapping cone (both).

    Returns ``{"checks": [SequenceCheck], "passed": bool}``.
    """
    checks = verify_short_sequences(model, k, samples, seed)
    if isinstance(model, MappingCone):
        checks += verify_long_sequence(model, k, samples, seed)
    C, _ = _complex_of(model)
    # ker(curv, c) = iota(closed cochains): a torus of dimension b_{k-1}
    b = cohomology(C, "R")[k - 1] if 0 <= k - 1 <= C.top else 0
    flat_trivial = _flat_dimension(C, k)
    checks.append(SequenceCheck("ker(curv, c) ~ H^{k-1}(R)/H^{k-1}(Z)_R", flat_trivial == b,
                                f"dimension {flat_trivial} vs {b}"))
    return {"checks": checks, "passed": all(c.passed for c in checks)}
