"""Integer chain complexes, mapping cones and cohomology via Smith normal form.

All integer linear algebra uses Python integers (numpy ``object`` arrays at the
API boundary), so there is no overflow.  Cochains are column vectors and the
coboundary is the transpose of the boundary, ``delta = d^T``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

# ----------------------------------------------------------------------------
# integer matrices


def imat(rows, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Integer matrix as an object array of Python ints."""
    if shape is not None and (shape[0] == 0 or shape[1] == 0):
        return np.zeros(shape, dtype=object)
    a = np.array(rows, dtype=object)
    if a.ndim == 1:
        a = a.reshape(1, -1) if shape is None else a.reshape(shape)
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = int(v)
    return out


def izeros(m: int, n: int) -> np.ndarray:
    out = np.empty((m, n), dtype=object)
    out.fill(0)
    return out


def ieye(n: int) -> np.ndarray:
    out = izeros(n, n)
    for i in range(n):
        out[i, i] = 1
    return out


def imatmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    if a.shape[0] == 0 or b.shape[1] == 0 or a.shape[1] == 0:
        return izeros(a.shape[0], b.shape[1])
    return np.dot(a.astype(object), b.astype(object))


def is_zero(a: np.ndarray) -> bool:
    return all(v == 0 for v in np.asarray(a).flat)


def _det_int(m: list[list[int]]) -> int:
    """Exact determinant by fraction-free Bareiss elimination."""
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def int_det(m: np.ndarray) -> int:
    return _det_int([[int(v) for v in row] for row in np.asarray(m)])


@dataclass
class SmithForm:
    """``U M V = D`` with ``U``, ``V`` unimodular and ``D`` diagonal.

    ``Uinv`` and ``Vinv`` are tracked alongside so solves stay exact.
    """

    U: np.ndarray
    D: np.ndarray
    V: np.ndarray
    Uinv: np.ndarray
    Vinv: np.ndarray

    @property
    def diagonal(self) -> list[int]:
        return [int(self.D[i, i]) for i in range(min(self.D.shape))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    def __iter__(self):
        yield self.U
        yield self.D
        yield self.V


def smith_normal_form(M) -> SmithForm:
    """Smith normal form over Z with pivot-magnitude minimization."""
    A = [[int(v) for v in row] for row in np.asarray(M, dtype=object).reshape(np.shape(M))]
    m = len(A)
    n = len(A[0]) if m else (np.shape(M)[1] if np.ndim(M) == 2 else 0)
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    Ui = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]
    Vi = [[int(i == j) for j in range(n)] for i in range(n)]

    # elementary operations, each applied to A and mirrored on U/Ui or V/Vi
    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]
        for row in Ui:
            row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        Vi[i], Vi[j] = Vi[j], Vi[i]

    def add_row(src, dst, q):  # row_dst += q * row_src
        if q == 0:
            return
        a_s, a_d = A[src], A[dst]
        for c in range(n):
            if a_s[c]:
                a_d[c] += q * a_s[c]
        u_s, u_d = U[src], U[dst]
        for c in range(m):
            if u_s[c]:
                u_d[c] += q * u_s[c]
        for row in Ui:  # Ui <- Ui * E^{-1}: col_src -= q * col_dst
            if row[dst]:
                row[src] -= q * row[dst]

    def add_col(src, dst, q):  # col_dst += q * col_src
        if q == 0:
            return
        for row in A:
            if row[src]:
                row[dst] += q * row[src]
        for row in V:
            if row[src]:
                row[dst] += q * row[src]
        v_s, v_d = Vi[src], Vi[dst]  # Vi <- E^{-1} Vi: row_src -= q * row_dst
        for c in range(n):
            if v_d[c]:
                v_s[c] -= q * v_d[c]

    def negate_row(i):
        A[i] = [-v for v in A[i]]
        U[i] = [-v for v in U[i]]
        for row in Ui:
            row[i] = -row[i]

    def nearest_quotient(a, b):
        q, r = divmod(a, b)
        if 2 * r > abs(b) if b > 0 else 2 * r < -abs(b):
            q += 1
        return q

    t = 0
    while t < min(m, n):
        # choose the smallest nonzero entry of the remaining block as pivot
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        if i != t:
            swap_rows(i, t)
        if j != t:
            swap_cols(j, t)
        while True:
            changed = False
            p = A[t][t]
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(t, i, -nearest_quotient(A[i][t], p))
                    if A[i][t]:
                        changed = True
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(t, j, -nearest_quotient(A[t][j], p))
                    if A[t][j]:
                        changed = True
            if changed:
                # move the smallest remainder in row/column t to the pivot
                best = (abs(A[t][t]), t, t)
                for i in range(t + 1, m):
                    if A[i][t] and abs(A[i][t]) < best[0]:
                        best = (abs(A[i][t]), i, t)
                for j in range(t + 1, n):
                    if A[t][j] and abs(A[t][j]) < best[0]:
                        best = (abs(A[t][j]), t, j)
                _, i, j = best
                if i != t:
                    swap_rows(i, t)
                if j != t:
                    swap_cols(j, t)
                continue
            # divisibility: every remaining entry must be a multiple of the pivot
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(bad, t, 1)
        if A[t][t] < 0:
            negate_row(t)
        t += 1
    return SmithForm(imat(U, (m, m)), imat(A, (m, n)), imat(V, (n, n)), imat(Ui, (m, m)), imat(Vi, (n, n)))


def verify_smith(M, snf: SmithForm) -> dict:
    """Exact checks: ``U M V = D``, diagonal, divisibility chain, unimodularity."""
    M = imat(np.asarray(M, dtype=object), np.shape(M)) if np.size(M) else izeros(*np.shape(M))
    prod = imatmul(imatmul(snf.U, M), snf.V)
    D = snf.D
    diag_ok = all(D[i, j] == 0 for i in range(D.shape[0]) for j in range(D.shape[1]) if i != j)
    d = snf.diagonal
    nz = [x for x in d if x != 0]
    chain_ok = all(x > 0 for x in nz) and all(nz[i + 1] % nz[i] == 0 for i in range(len(nz) - 1))
    chain_ok = chain_ok and all(x == 0 for x in d[len(nz):])
    return {
        "product": bool(np.array_equal(prod, D)),
        "diagonal": diag_ok,
        "divisibility": chain_ok,
        "unimodular_U": abs(int_det(snf.U)) == 1,
        "unimodular_V": abs(int_det(snf.V)) == 1,
        "inverses": bool(np.array_equal(imatmul(snf.U, snf.Uinv), ieye(D.shape[0]))
                         and np.array_equal(imatmul(snf.V, snf.Vinv), ieye(D.shape[1]))),
    }


def solve_integer(M, b) -> np.ndarray | None:
    """An integer solution of ``M x = b`` or ``None``."""
    M = np.asarray(M, dtype=object)
    b = imat(np.asarray(b, dtype=object).reshape(-1), (M.shape[0], 1)).reshape(-1) if M.shape[0] else izeros(0, 1).reshape(-1)
    snf = smith_normal_form(M)
    c = imatmul(snf.U, b.reshape(-1, 1)).reshape(-1) if M.shape[0] else b
    d = snf.diagonal
    y = [0] * M.shape[1]
    for i in range(M.shape[0]):
        di = d[i] if i < len(d) else 0
        if di == 0:
            if c[i] != 0:
                return None
        else:
            if c[i] % di:
                return None
            y[i] = c[i] // di
    return imatmul(snf.V, imat(y, (M.shape[1], 1))).reshape(-1) if M.shape[1] else izeros(0, 1).reshape(-1)


def integer_kernel(M) -> np.ndarray:
    """Columns form a Z-basis of ``ker M``."""
    M = np.asarray(M, dtype=object)
    snf = smith_normal_form(M)
    return snf.V[:, snf.rank:]


def in_lattice(basis: np.ndarray, v) -> bool:
    if basis.shape[1] == 0:
        return is_zero(v)
    return solve_integer(basis, v) is not None


def lattices_equal(a: np.ndarray, b: np.ndarray) -> bool:
    return all(in_lattice(b, a[:, j]) for j in range(a.shape[1])) and \
        all(in_lattice(a, b[:, j]) for j in range(b.shape[1]))


# rational linear algebra ---------------------------------------------------------------


def rational_solve(M, b) -> list[Fraction] | None:
    """One exact rational solution of ``M x = b`` (Gauss-Jordan), or ``None``."""
    rows = [[Fraction(v) for v in row] + [Fraction(bv)] for row, bv in zip(np.asarray(M), np.asarray(b).reshape(-1))]
    m = len(rows)
    n = np.shape(M)[1]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][c]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * bb for a, bb in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    if any(all(v == 0 for v in row[:-1]) and row[-1] != 0 for row in rows):
        return None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = rows[i][-1]
    return x


def rational_rank(M) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    rows = [[Fraction(v) for v in row] for row in M]
    rank, m, n = 0, len(rows), len(rows[0])
    for c in range(n):
        piv = next((i for i in range(rank, m) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(rank + 1, m):
            if rows[i][c] != 0:
                f = rows[i][c] / rows[rank][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


# finitely generated abelian groups ------------------------------------------------------


@dataclass
class FGGroup:
    """``Z^n / span(relations)`` in Smith coordinates.

    ``coordinates(x)`` returns ``(torsion coordinates, free coordinates)``.
    """

    n: int
    relations: np.ndarray

    def __post_init__(self):
        rel = self.relations if self.relations.size else izeros(self.n, 0)
        self.relations = rel
        self._snf = smith_normal_form(rel) if self.n else None
        d = self._snf.diagonal if self.n else []
        d = d + [0] * (self.n - len(d))
        self.orders = d
        self.torsion = [x for x in d if x > 1]
        self.free_rank = sum(1 for x in d if x == 0)

    def coordinates(self, x) -> tuple[tuple[int, ...], tuple[int, ...]]:
        if self.n == 0:
            return (), ()
        y = imatmul(self._snf.U, imat(np.asarray(x, dtype=object).reshape(-1), (self.n, 1))).reshape(-1)
        tors = tuple(int(y[i]) % d for i, d in enumerate(self.orders) if d > 1)
        free = tuple(int(y[i]) for i, d in enumerate(self.orders) if d == 0)
        return tors, free

    def vector(self, x) -> tuple[int, ...]:
        t, f = self.coordinates(x)
        return t + f

    def generators(self) -> np.ndarray:
        """Columns of ``U^{-1}`` for the nontrivial Smith coordinates."""
        if self.n == 0:
            return izeros(0, 0)
        keep = [i for i, d in enumerate(self.orders) if d != 1]
        return self._snf.Uinv[:, keep]

    def relation_matrix(self) -> np.ndarray:
        """Relations in the reduced ``(torsion, free)`` coordinates."""
        k = len(self.torsion) + self.free_rank
        R = izeros(k, len(self.torsion))
        for i, d in enumerate(self.torsion):
            R[i, i] = d
        return R

    def is_trivial(self) -> bool:
        return not self.torsion and self.free_rank == 0


# chain complexes ---------------------------------------------------------------------------


@dataclass
class ChainComplex:
    """Free chain complex ``C_0 <- C_1 <- ... <- C_top`` over Z.

    ``boundaries[k]`` is the matrix of ``d_k: C_k -> C_{k-1}`` (shape
    ``(n_{k-1}, n_k)``); ``boundaries[0]`` is the zero map to 0.
    """

    ranks: list[int]
    boundaries: list[np.ndarray]
    labels: list[list] | None = None
    name: str = ""

    def __post_init__(self):
        if len(self.boundaries) != len(self.ranks):
            raise ValueError("need one boundary matrix per degree")
        for k, d in enumerate(self.boundaries):
            exp = (self.ranks[k - 1] if k > 0 else 0, self.ranks[k])
            if tuple(d.shape) != exp:
                raise ValueError(f"boundary in degree {k} has shape {d.shape}, expected {exp}")
        bad = self.boundary_squared_defects()
        if bad:
            raise ValueError(f"d o d != 0 in degrees {bad}")

    @property
    def top(self) -> int:
        return len(self.ranks) - 1

    def rank(self, k: int) -> int:
        return self.ranks[k] if 0 <= k < len(self.ranks) else 0

    def d(self, k: int) -> np.ndarray:
        """``d_k`` with zero matrices outside the range."""
        if 0 < k < len(self.ranks):
            return self.boundaries[k]
        return izeros(self.rank(k - 1), self.rank(k))

    def delta(self, k: int) -> np.ndarray:
        """Coboundary ``C^k -> C^{k+1}``."""
        return self.d(k + 1).T.copy()

    def boundary_squared_defects(self) -> list[int]:
        return [k for k in range(2, len(self.ranks)) if not is_zero(imatmul(self.boundaries[k - 1], self.boundaries[k]))]

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * r for k, r in enumerate(self.ranks))

    def cohomology(self, k: int) -> "CohomologyGroup":
        return cohomology_group(self, k)


def pad_complex(C: ChainComplex, top: int) -> ChainComplex:
    """Extend with zero groups up to degree ``top``."""
    if C.top >= top:
        return C
    ranks = C.ranks + [0] * (top - C.top)
    bds = list(C.boundaries) + [izeros(ranks[k - 1], 0) for k in range(C.top + 1, top + 1)]
    labels = None if C.labels is None else C.labels + [[] for _ in range(top - C.top)]
    return ChainComplex(ranks, bds, labels, C.name)


@dataclass
class ChainMap:
    """Chain map ``phi_k: C_k(A) -> C_k(X)``."""

    source: ChainComplex
    target: ChainComplex
    matrices: list[np.ndarray]

    def __post_init__(self):
        top = max(self.source.top, self.target.top)
        self.source = pad_complex(self.source, top)
        self.target = pad_complex(self.target, top)
        mats = list(self.matrices) + [None] * (top + 1 - len(self.matrices))
        self.matrices = [izeros(self.target.rank(k), self.source.rank(k)) if mats[k] is None else mats[k]
                         for k in range(top + 1)]
        for k, M in enumerate(self.matrices):
            if tuple(M.shape) != (self.target.rank(k), self.source.rank(k)):
                raise ValueError(f"chain map in degree {k} has shape {M.shape}")
        bad = self.commutation_defects()
        if bad:
            raise ValueError(f"not a chain map: d phi != phi d in degrees {bad}")

    def __getitem__(self, k: int) -> np.ndarray:
        if 0 <= k < len(self.matrices):
            return self.matrices[k]
        return izeros(self.target.rank(k), self.source.rank(k))

    def commutation_defects(self) -> list[int]:
        bad = []
        for k in range(1, len(self.matrices)):
            lhs = imatmul(self.target.d(k), self.matrices[k])
            rhs = imatmul(self.matrices[k - 1], self.source.d(k))
            if not np.array_equal(lhs, rhs):
                bad.append(k)
        return bad

    def pullback(self, k: int, cochain) -> np.ndarray:
        """``phi^*`` on k-cochains (any numeric dtype)."""
        return np.asarray(self[k]).T.dot(np.asarray(cochain))

    def compose(self, other: "ChainMap") -> "ChainMap":
        """``self o other``."""
        top = max(len(self.matrices), len(other.matrices))
        return ChainMap(other.source, self.target, [imatmul(self[k], other[k]) for k in range(top)])


def identity_map(C: ChainComplex) -> ChainMap:
    return ChainMap(C, C, [ieye(r) for r in C.ranks])


@dataclass
class MappingCone:
    """Cone of ``phi: A -> X``: ``C_k = C_k(X) + C_{k-1}(A)``, ``d(v, w) = (dv + phi w, -dw)``."""

    phi: ChainMap
    complex: ChainComplex = field(init=False)

    def __post_init__(self):
        A, X = self.phi.source, self.phi.target
        top = max(X.top, A.top + 1)
        ranks = [X.rank(k) + A.rank(k - 1) for k in range(top + 1)]
        bds = []
        for k in range(top + 1):
            d = izeros(ranks[k - 1] if k > 0 else 0, ranks[k])
            if k > 0:
                nx0, nx1 = X.rank(k - 1), X.rank(k)
                d[:nx0, :nx1] = X.d(k)
                d[:nx0, nx1:] = self.phi[k - 1]
                d[nx0:, nx1:] = -A.d(k - 1) if k - 1 > 0 else izeros(A.rank(k - 2), A.rank(k - 1))
            bds.append(d)
        labels = [[("X", i) for i in range(X.rank(k))] + [("A", i) for i in range(A.rank(k - 1))]
                  for k in range(top + 1)]
        self.complex = ChainComplex(ranks, bds, labels, f"cone({A.name}->{X.name})")

    def split(self, k: int, vec) -> tuple[np.ndarray, np.ndarray]:
        """Split a degree-k cone (co)chain into its X and A parts."""
        nx = self.phi.target.rank(k)
        v = np.asarray(vec)
        return v[:nx], v[nx:]

    def join(self, k: int, x_part, a_part) -> np.ndarray:
        x = np.asarray(x_part).reshape(-1)
        a = np.asarray(a_part).reshape(-1)
        if len(x) != self.phi.target.rank(k) or len(a) != self.phi.source.rank(k - 1):
            raise ValueError("cone cochain parts have wrong sizes")
        dtype = object if (x.dtype == object or a.dtype == object) else np.result_type(x, a)
        return np.concatenate([x.astype(dtype), a.astype(dtype)])


def cone_of_map(phi: ChainMap) -> MappingCone:
    return MappingCone(phi)


# cohomology ----------------------------------------------------------------------------------------


@dataclass
class CohomologyGroup:
    """``H^k`` as ``Z^{free_rank} + sum Z/t``, with cocycle representatives."""

    degree: int
    free_rank: int
    torsion: list[int]
    representatives: np.ndarray  # columns: torsion generators first, then free generators
    _kernel: np.ndarray = field(repr=False, default=None)
    _kernel_snf: SmithForm = field(repr=False, default=None)
    _quot: FGGroup = field(repr=False, default=None)
    _cochain_dim: int = 0

    def coordinates(self, cocycle) -> tuple[int, ...]:
        """Coordinates of the class of an integer cocycle: ``(torsion..., free...)``."""
        z = np.asarray(cocycle, dtype=object).reshape(-1)
        if len(z) != self._cochain_dim:
            raise ValueError("cochain has the wrong length")
        if self._kernel.shape[1] == 0:
            if not is_zero(z):
                raise ValueError("not a cocycle")
            return ()
        c = solve_integer(self._kernel, z)
        if c is None:
            raise ValueError("not a cocycle")
        return self._quot.vector(c)

    def is_zero_class(self, cocycle) -> bool:
        return all(v == 0 for v in self.coordinates(cocycle))

    def relation_matrix(self) -> np.ndarray:
        return self._quot.relation_matrix() if self._quot is not None else izeros(0, 0)

    @property
    def ngens(self) -> int:
        return len(self.torsion) + self.free_rank

    def describe(self) -> str:
        parts = (["Z"] * self.free_rank if self.free_rank else []) + [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


def cohomology_group(C: ChainComplex, k: int) -> CohomologyGroup:
    n = C.rank(k)
    if n == 0:
        return CohomologyGroup(k, 0, [], izeros(0, 0), izeros(0, 0), None, FGGroup(0, izeros(0, 0)), 0)
    dk = C.delta(k)
    K = integer_kernel(dk) if dk.shape[0] else ieye(n)
    B = C.delta(k - 1)  # n x n_{k-1}
    # express coboundaries in kernel coordinates
    cols = []
    for j in range(B.shape[1]):
        c = solve_integer(K, B[:, j])
        if c is None:
            raise RuntimeError("coboundary outside the cocycle lattice")
        cols.append(c)
    Bk = imat(np.array(cols, dtype=object).T, (K.shape[1], len(cols))) if cols else izeros(K.shape[1], 0)
    quot = FGGroup(K.shape[1], Bk)
    gens = imatmul(K, quot.generators()) if K.shape[1] else izeros(n, 0)
    return CohomologyGroup(k, quot.free_rank, list(quot.torsion), gens, K, None, quot, n)


def cohomology(C: ChainComplex | MappingCone, ring: str = "Z") -> list:
    """Cohomology in all degrees.

    ``ring='Z'``: :class:`CohomologyGroup` per degree.  ``'R'``: Betti numbers.
    ``'R/Z'``: ``(torus dimension, finite part)`` by universal coefficients.
    """
    cx = C.complex if isinstance(C, MappingCone) else C
    if ring == "Z":
        return [cohomology_group(cx, k) for k in range(cx.top + 1)]
    if ring == "R":
        out = []
        for k in range(cx.top + 1):
            rk_out = rational_rank(cx.delta(k)) if cx.delta(k).size else 0
            rk_in = rational_rank(cx.delta(k - 1)) if cx.delta(k - 1).size else 0
            out.append(cx.rank(k) - rk_out - rk_in)
        return out
    if ring in ("R/Z", "U1"):
        Z = [cohomology_group(cx, k) for k in range(cx.top + 1)]
        out = []
        for k in range(cx.top + 1):
            finite = Z[k + 1].torsion if k + 1 <= cx.top else []
            out.append((Z[k].free_rank, list(finite)))
        return out
    raise ValueError(f"unknown coefficient ring {ring!r}")


def induced_map(f_cochain: np.ndarray, source: CohomologyGroup, target: CohomologyGroup) -> np.ndarray:
    """Integer matrix of a cochain map on cohomology in generator coordinates."""
    cols = []
    for j in range(source.representatives.shape[1]):
        img = imatmul(f_cochain, source.representatives[:, j:j + 1]).reshape(-1)
        cols.append(list(target.coordinates(img)))
    return imat(np.array(cols, dtype=object).T, (target.ngens, source.ngens)) if cols else izeros(target.ngens, 0)


@dataclass
class Junction:
    name: str
    passed: bool
    image_rank: int
    kernel_rank: int
    detail: str = ""


def exact_at(F: np.ndarray, G: np.ndarray, R_mid: np.ndarray, R_out: np.ndarray, name: str) -> Junction:
    """Exactness of ``G1 -F-> G2 -G-> G3`` with relation matrices of G2, G3."""
    n2 = R_mid.shape[0]
    im = np.concatenate([F, R_mid], axis=1) if F.size or R_mid.size else izeros(n2, 0)
    im = im if im.shape[0] == n2 else izeros(n2, 0)
    if n2 == 0:
        return Junction(name, True, 0, 0, "trivial middle group")
    stacked = np.concatenate([G, -R_out], axis=1) if R_out.shape[1] else G
    if stacked.shape[0] == 0:
        ker = ieye(n2)
    else:
        ker = integer_kernel(stacked)[:n2, :]
    comp_ok = all(in_lattice(R_out, imatmul(G, F[:, j:j + 1]).reshape(-1)) if R_out.shape[1] or G.shape[0]
                  else True for j in range(F.shape[1])) if G.shape[0] else True
    eq = lattices_equal(im, ker) if ker.shape[1] or im.shape[1] else True
    return Junction(name, bool(eq and comp_ok), rational_rank(im) if im.size else 0,
                    rational_rank(ker) if ker.size else 0, "" if eq else "image != kernel")


def long_exact_sequence(phi: ChainMap) -> list[Junction]:
    """Check ``... H^{k-1}(A) -> H^k(phi) -> H^k(X) -> H^k(A) -> H^{k+1}(phi) ...`` at every spot."""
    cone = MappingCone(phi)
    A, X, C = phi.source, phi.target, cone.complex
    top = C.top
    HX = [cohomology_group(X, k) for k in range(top + 2)]
    HA = [cohomology_group(A, k) for k in range(top + 2)]
    HC = [cohomology_group(C, k) for k in range(top + 2)]

    def to_cone(k):  # H^{k-1}(A) -> H^k(phi): theta -> (0, theta)
        n_x, n_a = X.rank(k), A.rank(k - 1)
        M = izeros(n_x + n_a, n_a)
        for i in range(n_a):
            M[n_x + i, i] = 1
        return induced_map(M, HA[k - 1], HC[k]) if k >= 1 else izeros(HC[k].ngens, 0)

    def to_x(k):  # H^k(phi) -> H^k(X)
        n_x, n_a = X.rank(k), A.rank(k - 1)
        M = izeros(n_x, n_x + n_a)
        for i in range(n_x):
            M[i, i] = 1
        return induced_map(M, HC[k], HX[k])

    def restrict(k):  # H^k(X) -> H^k(A)
        return induced_map(phi[k].T.copy(), HX[k], HA[k])

    out = []
    for k in range(top + 1):
        out.append(exact_at(to_cone(k), to_x(k), HC[k].relation_matrix(), HX[k].relation_matrix(),
                            f"H^{k}(cone)"))
        out.append(exact_at(to_x(k), restrict(k), HX[k].relation_matrix(), HA[k].relation_matrix(),
                            f"H^{k}(X)"))
        out.append(exact_at(restrict(k), to_cone(k + 1), HA[k].relation_matrix(), HC[k + 1].relation_matrix(),
                            f"H^{k}(A)"))
    return out


def verify_long_exact(phi: ChainMap) -> dict:
    junctions = long_exact_sequence(phi)
    return {"junctions": junctions, "passed": all(j.passed for j in junctions)}


# cell complexes ---------------------------------------------------------------------------------------


@dataclass
class CellComplex:
    """Chain complex with named cells and optional parametrizations.

    ``cells[k]`` lists hashable cell keys; ``geometry[k][i]`` (optional) is a
    :class:`ccskit.geometry.Cell` realizing cell ``i`` of degree ``k``.
    """

    cells: list[list]
    boundary: list[dict]
    name: str = ""
    geometry: list[list] | None = None
    chain: ChainComplex = field(init=False)

    def __post_init__(self):
        ranks = [len(c) for c in self.cells]
        index = [{c: i for i, c in enumerate(cs)} for cs in self.cells]
        bds = [izeros(0, ranks[0])]
        for k in range(1, len(ranks)):
            M = izeros(ranks[k - 1], ranks[k])
            for j, cell in enumerate(self.cells[k]):
                for face, coeff in self.boundary[k].get(cell, {}).items():
                    M[index[k - 1][face], j] += coeff
            bds.append(M)
        self._index = index
        self.chain = ChainComplex(ranks, bds, [list(c) for c in self.cells], self.name)

    def index(self, k: int, cell) -> int:
        return self._index[k][cell]

    @property
    def dim(self) -> int:
        return len(self.cells) - 1

    def cochain_from(self, k: int, values: dict, dtype=object) -> np.ndarray:
        out = np.zeros(len(self.cells[k]), dtype=dtype)
        if dtype is object:
            out[:] = 0
        for cell, v in values.items():
            out[self.index(k, cell)] = v
        return out


def simplicial_complex(facets: Iterable[Sequence], name: str = "") -> CellComplex:
    """Simplicial complex from maximal simplices; simplices oriented by sorted vertices."""
    simplices: dict[int, set] = {}
    for f in facets:
        f = tuple(sorted(f))
        for r in range(1, len(f) + 1):
            for s in combinations(f, r):
                simplices.setdefault(r - 1, set()).add(s)
    top = max(simplices)
    cells = [sorted(simplices.get(k, ())) for k in range(top + 1)]
    boundary = [{}]
    for k in range(1, top + 1):
        bd = {}
        for s in cells[k]:
            bd[s] = {s[:i] + s[i + 1:]: (-1) ** i for i in range(len(s))}
        boundary.append(bd)
    return CellComplex(cells, boundary, name)


def simplicial_map(src: CellComplex, dst: CellComplex, vertex_map: dict) -> ChainMap:
    """Chain map induced by a simplicial vertex map (degenerate images map to 0)."""
    mats = []
    for k in range(src.dim + 1):
        M = izeros(len(dst.cells[k]) if k <= dst.dim else 0, len(src.cells[k]))
        for j, s in enumerate(src.cells[k]):
            img = [vertex_map[(v,)] if isinstance(vertex_map.get((v,)), int) else vertex_map[v] for v in s]
            if len(set(img)) < len(img) or k > dst.dim:
                continue
            order = sorted(range(len(img)), key=lambda i: img[i])
            sign = _perm_parity(order)
            M[dst.index(k, tuple(sorted(img))), j] += sign
        mats.append(M)
    return ChainMap(src.chain, dst.chain, mats)


def _perm_parity(order: Sequence[int]) -> int:
    sign = 1
    order = list(order)
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if order[i] > order[j]:
                sign = -sign
    return sign


def product_complex(a: CellComplex, b: CellComplex, name: str = "") -> CellComplex:
    """Cartesian product; ``d(s x t) = ds x t + (-1)^{|s|} s x dt``."""
    top = a.dim + b.dim
    cells = [[] for _ in range(top + 1)]
    geom = [[] for _ in range(top + 1)] if (a.geometry and b.geometry) else None
    for p in range(a.dim + 1):
        for q in range(b.dim + 1):
            for i, s in enumerate(a.cells[p]):
                for j, t in enumerate(b.cells[q]):
                    cells[p + q].append((s, t))
                    if geom is not None:
                        geom[p + q].append(_product_cell(a.geometry[p][i], b.geometry[q][j]))
    boundary = [{}]
    for k in range(1, top + 1):
        bd = {}
        for cell in cells[k]:
            s, t = cell
            p = _dim_of(a, s)
            q = k - p
            entry = {}
            if p > 0:
                for f, c in a.boundary[p].get(s, {}).items():
                    entry[(f, t)] = entry.get((f, t), 0) + c
            if q > 0:
                for f, c in b.boundary[q].get(t, {}).items():
                    entry[(s, f)] = entry.get((s, f), 0) + (-1) ** p * c
            bd[cell] = {f: c for f, c in entry.items() if c}
        boundary.append(bd)
    return CellComplex(cells, boundary, name or f"{a.name}x{b.name}", geom)


def _dim_of(cx: CellComplex, cell) -> int:
    for k in range(cx.dim + 1):
        if cell in cx._index[k]:
            return k
    raise KeyError(cell)


def _product_cell(c1, c2):
    from .geometry import Cell, SmoothMap

    p, q = c1.dim, c2.dim
    n1, n2 = c1.param.target_dim, c2.param.target_dim

    def f(s):
        s = np.atleast_2d(s)
        return np.concatenate([c1.param(s[:, :p]) if p else np.broadcast_to(c1.param(np.zeros((1, 0))), (len(s), n1)),
                               c2.param(s[:, p:]) if q else np.broadcast_to(c2.param(np.zeros((1, 0))), (len(s), n2))], 1)

    def j(s):
        s = np.atleast_2d(s)
        J = np.zeros((len(s), n1 + n2, p + q))
        if p:
            J[:, :n1, :p] = c1.param.jac(s[:, :p])
        if q:
            J[:, n1:, p:] = c2.param.jac(s[:, p:])
        return J

    return Cell(p + q, SmoothMap(p + q, n1 + n2, f, j, "prod"), 1, c1.orientation * c2.orientation)


def product_projection(prod: CellComplex, a: CellComplex, b: CellComplex) -> ChainMap:
    """Chain map of ``pr_1: A x B -> A`` (cells with a positive-dimensional B factor map to 0)."""
    mats = []
    for k in range(prod.dim + 1):
        M = izeros(len(a.cells[k]) if k <= a.dim else 0, len(prod.cells[k]))
        for j, (s, t) in enumerate(prod.cells[k]):
            if _dim_of(b, t) == 0 and k <= a.dim:
                M[a.index(k, s), j] = 1
        mats.append(M)
    return ChainMap(prod.chain, a.chain, mats)


def fiber_inclusion(prod: CellComplex, a: CellComplex, b: CellComplex, vertex) -> ChainMap:
    """Chain map ``B -> A x B``, ``t -> (vertex, t)``."""
    mats = []
    for k in range(b.dim + 1):
        M = izeros(len(prod.cells[k]), len(b.cells[k]))
        for j, t in enumerate(b.cells[k]):
            M[prod.index(k, (vertex, t)), j] = 1
        mats.append(M)
    return ChainMap(b.chain, prod.chain, mats)


def section_inclusion(prod: CellComplex, a: CellComplex, b: CellComplex, vertex) -> ChainMap:
    """Chain map ``A -> A x B``, ``s -> (s, vertex)``."""
    mats = []
    for k in range(a.dim + 1):
        M = izeros(len(prod.cells[k]), len(a.cells[k]))
        for j, s in enumerate(a.cells[k]):
            M[prod.index(k, (s, vertex)), j] = 1
        mats.append(M)
    return ChainMap(a.chain, prod.chain, mats)


def point_complex(name: str = "pt") -> ChainComplex:
    return ChainComplex([1], [izeros(0, 1)], [["*"]], name)


def point_inclusion(X: ChainComplex, vertex: int = 0) -> ChainMap:
    M = izeros(X.rank(0), 1)
    M[vertex, 0] = 1
    return ChainMap(point_complex(), X, [M])


# cochain-level transgression ----------------------------------------------------------------------------


@dataclass
class TransgressionResult:
    degree: int
    cocycle: np.ndarray  # (k-1)-cocycle on the fiber
    coordinates: tuple  # class in H^{k-1}(F) / i^* H^{k-1}(E)
    quotient_torsion: list
    quotient_free_rank: int
    image_rank: int
    nu: np.ndarray
    consistent: bool = True


def _quotient_group(HF: CohomologyGroup, image_cols: list) -> FGGroup:
    rel = HF.relation_matrix()
    cols = [rel] + ([imat(np.array(image_cols, dtype=object).T, (HF.ngens, len(image_cols)))] if image_cols else [])
    R = np.concatenate(cols, axis=1) if cols else izeros(HF.ngens, 0)
    return FGGroup(HF.ngens, R)


def transgression_T(p: ChainMap, fiber: ChainMap, u, basepoint: int | None = None,
                    degree: int | None = None) -> TransgressionResult:
    """Cochain transgression ``u -> [f_x^* alpha - i^* nu]``.

    ``p: E -> X`` is the projection, ``fiber: F -> E`` the inclusion of the
    fiber over ``basepoint`` (default: the first vertex of ``X``), and ``u`` an
    integer ``k``-cocycle on ``X``.  Solves ``p^* u = delta nu`` and
    ``i_x^* u = delta alpha`` over Z.
    """
    E, X, F = p.source, p.target, fiber.source
    u = imat(np.asarray(u, dtype=object).reshape(-1), (X.rank(degree or 0) if degree is not None else len(np.asarray(u).reshape(-1)), 1)).reshape(-1)
    k = degree if degree is not None else next(i for i in range(X.top + 1) if X.rank(i) == len(u))
    x = 0 if basepoint is None else basepoint
    if not (0 <= x < X.rank(0)):
        raise ValueError(f"basepoint {x} is not a vertex")
    if not is_zero(imatmul(X.delta(k), u.reshape(-1, 1))):
        raise ValueError("u is not a cocycle")
    # the fiber must sit over the basepoint
    pf = p.compose(fiber)
    for j in range(F.rank(0)):
        col = pf[0][:, j]
        if not (col[x] == 1 and sum(abs(int(v)) for v in col) == 1):
            raise ValueError("fiber inclusion does not sit over the basepoint")
    pu = imatmul(p[k].T.copy(), u.reshape(-1, 1)).reshape(-1)
    if k == 0:
        raise ValueError("transgression needs degree >= 1")
    nu = solve_integer(E.delta(k - 1), pu)
    if nu is None:
        raise ValueError("u is not transgressive: p^* u is not a coboundary")
    # i_x^* u lives on a point; it vanishes in degree >= 1, so alpha = 0 solves delta alpha = i_x^* u
    alpha = izeros(1, 1).reshape(-1) if k - 1 == 0 else izeros(0, 1).reshape(-1)
    fx_alpha = imatmul(imat(np.ones((F.rank(k - 1), 1), dtype=object), (F.rank(k - 1), 1)), alpha.reshape(-1, 1)).reshape(-1) \
        if k - 1 == 0 else izeros(F.rank(k - 1), 1).reshape(-1)
    i_nu = imatmul(fiber[k - 1].T.copy(), nu.reshape(-1, 1)).reshape(-1)
    t = fx_alpha - i_nu
    HF = cohomology_group(F, k - 1)
    HE = cohomology_group(E, k - 1)
    image_cols = [list(HF.coordinates(imatmul(fiber[k - 1].T.copy(), HE.representatives[:, j:j + 1]).reshape(-1)))
                  for j in range(HE.representatives.shape[1])]
    Q = _quotient_group(HF, image_cols)
    coords = Q.vector(HF.coordinates(t)) if HF.ngens else ()
    # second solution: shift nu by a cocycle and re-check the coset
    consistent = True
    ker = integer_kernel(E.delta(k - 1)) if E.delta(k - 1).shape[0] else ieye(E.rank(k - 1))
    if ker.shape[1]:
        shift = ker.sum(axis=1) if ker.shape[1] else 0
        t2 = fx_alpha - imatmul(fiber[k - 1].T.copy(), (nu + shift).reshape(-1, 1)).reshape(-1)
        coords2 = Q.vector(HF.coordinates(t2)) if HF.ngens else ()
        consistent = coords2 == coords
    return TransgressionResult(k, t, coords, list(Q.torsion), Q.free_rank, len(image_cols), nu, consistent)


# bundled complexes ---------------------------------------------------------------------------------------


def circle_complex(m: int = 3, name: str = "S1") -> CellComplex:
    """Circle with ``m`` vertices and ``m`` edges ``e_j = [v_j, v_{j+1}]``."""
    verts = [("v", j) for j in range(m)]
    edges = [("e", j) for j in range(m)]
    bd = {("e", j): ({("v", (j + 1) % m): 1, ("v", j): -1} if m > 1 else {}) for j in range(m)}
    return CellComplex([verts, edges], [{}, bd], name)


def circle_cw() -> CellComplex:
    """One vertex, one edge."""
    return circle_complex(1, "S1_cw")


def circle_degree_map(src: CellComplex, dst: CellComplex, degree: int) -> ChainMap:
    """Cellular degree-``d`` map between one-vertex circles."""
    return ChainMap(src.chain, dst.chain, [imat([[1]]), imat([[degree]])])


def torus_simplicial(n: int = 3) -> CellComplex:
    """Triangulated ``n x n`` grid torus (``n >= 3``)."""
    if n < 3:
        raise ValueError("need n >= 3 for a simplicial torus")
    facets = []
    v = lambda i, j: (i % n) * n + (j % n)
    for i in range(n):
        for j in range(n):
            facets.append((v(i, j), v(i + 1, j), v(i + 1, j + 1)))
            facets.append((v(i, j), v(i, j + 1), v(i + 1, j + 1)))
    return simplicial_complex(facets, f"T2_{n}")


def torus_circle_inclusion(n: int = 3) -> tuple[ChainMap, CellComplex, CellComplex]:
    """Inclusion of the circle ``{i = 0}`` into the grid torus."""
    T = torus_simplicial(n)
    facets = [(j, (j + 1) % n) for j in range(n)]
    S = simplicial_complex(facets, f"S1_{n}")
    vmap = {j: j for j in range(n)}  # vertex (0, j) has label j
    return simplicial_map(S, T, vmap), S, T


def rp2_simplicial() -> CellComplex:
    facets = [(1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6), (1, 6, 2),
              (2, 3, 5), (3, 4, 6), (4, 5, 2), (5, 6, 3), (6, 2, 4)]
    return simplicial_complex(facets, "RP2")


def lens_cw(p: int = 3) -> ChainComplex:
    """Cellular chain complex of the lens space ``L(p, 1)``: ``Z <-0- Z <-p- Z <-0- Z``."""
    return ChainComplex([1, 1, 1, 1], [izeros(0, 1), imat([[0]]), imat([[p]]), imat([[0]])], None, f"L({p},1)")


def boundary_of_cube(n: int, name: str | None = None) -> CellComplex:
    """Faces of ``[-1, 1]^n`` (a cubical ``S^{n-1}``) with affine parametrizations."""
    from .geometry import Cell, linear_map

    cells = [[] for _ in range(n)]
    geom = [[] for _ in range(n)]
    # a face is a tuple with entries -1, 1 (fixed) or 0 (free)
    for code in np.ndindex(*(3,) * n):
        face = tuple((-1, 0, 1)[c] for c in code)
        free = [i for i, v in enumerate(face) if v == 0]
        if len(free) == n:
            continue
        cells[len(free)].append(face)
    for k in range(n):
        cells[k].sort()
        for face in cells[k]:
            free = [i for i, v in enumerate(face) if v == 0]
            origin = np.array([(-1.0 if v == 0 else float(v)) for v in face])
            E = np.zeros((n, k))
            for c, i in enumerate(free):
                E[i, c] = 2.0
            geom[k].append(Cell(k, linear_map(E, origin, "face"), 1, 1, None, face))
    boundary = [{}]
    for k in range(1, n):
        bd = {}
        for face in cells[k]:
            free = [i for i, v in enumerate(face) if v == 0]
            entry = {}
            for c, i in enumerate(free):
                for end, sgn in ((1, 1), (-1, -1)):
                    sub = list(face)
                    sub[i] = end
                    entry[tuple(sub)] = ((-1) ** c) * sgn
            bd[face] = entry
        boundary.append(bd)
    return CellComplex(cells, boundary, name or f"dI{n}", geom)


def fundamental_cycle(cx: CellComplex, k: int | None = None) -> np.ndarray:
    """Generator of the top homology of a closed oriented cell complex (sign as found)."""
    k = cx.dim if k is None else k
    ker = integer_kernel(cx.chain.d(k))
    if ker.shape[1] != 1:
        raise ValueError("top homology is not Z")
    return ker[:, 0]


def hopf_cell_model() -> dict:
    """Cellular model of the Hopf fibration ``S^1 -> S^3 -> S^2``.

    Base: vertex ``b0``, equator ``b1``, disks ``N`` and ``S``.  Total space cells
    are products with the fiber vertex ``f0`` and fiber edge ``f1``; the clutching
    of the two disks contributes ``d(S f0) = -b1 f0 + b0 f1``.
    """
    X = CellComplex([["b0"], ["b1"], ["N", "S"]],
                    [{}, {"b1": {}}, {"N": {"b1": 1}, "S": {"b1": -1}}], "S2_cw")
    E = CellComplex(
        [["b0f0"], ["b0f1", "b1f0"], ["b1f1", "Nf0", "Sf0"], ["Nf1", "Sf1"]],
        [{},
         {"b0f1": {}, "b1f0": {}},
         {"b1f1": {}, "Nf0": {"b1f0": 1}, "Sf0": {"b1f0": -1, "b0f1": 1}},
         {"Nf1": {"b1f1": 1}, "Sf1": {"b1f1": -1}}],
        "S3_hopf")
    F = CellComplex([["f0"], ["f1"]], [{}, {"f1": {}}], "S1_fiber")
    proj = {"b0f0": "b0", "b1f0": "b1", "Nf0": "N", "Sf0": "S"}
    mats = []
    for k in range(4):
        M = izeros(len(X.cells[k]) if k <= 2 else 0, len(E.cells[k]))
        for j, c in enumerate(E.cells[k]):
            if c in proj:
                M[X.index(k, proj[c]), j] = 1
        mats.append(M)
    p = ChainMap(E.chain, X.chain, mats)
    inc = ChainMap(F.chain, E.chain, [imat([[1]]), imat([[1], [0]])])
    return {"X": X, "E": E, "F": F, "p": p, "i": inc}


def relabel(cx: CellComplex, perm: dict, signs: dict | None = None, name: str = "") -> tuple[CellComplex, list]:
    """Relabeled copy with cells renamed by ``perm`` and optionally re-oriented.

    Returns the copy and the chain isomorphism matrices ``old -> new``.
    """
    signs = signs or {}
    cells = [[perm.get(c, c) for c in sorted(cs, key=lambda c: str(perm.get(c, c)))] for cs in cx.cells]
    boundary = [{}]
    for k in range(1, cx.dim + 1):
        bd = {}
        for c, faces in cx.boundary[k].items():
            sc = signs.get(c, 1)
            bd[perm.get(c, c)] = {perm.get(f, f): v * sc * signs.get(f, 1) for f, v in faces.items()}
        boundary.append(bd)
    new = CellComplex(cells, boundary, name or cx.name + "'")
    mats = []
    for k in range(cx.dim + 1):
        M = izeros(len(new.cells[k]), len(cx.cells[k]))
        for j, c in enumerate(cx.cells[k]):
            M[new.index(k, perm.get(c, c)), j] = signs.get(c, 1)
        mats.append(M)
    return new, mats


# geometric cell complexes ----------------------------------------------------------------------------------


def circle_geometric(m: int = 1, name: str = "S1") -> CellComplex:
    """Circle ``R/Z`` with ``m`` vertices at ``j/m`` and edges between them."""
    from .geometry import Cell, SmoothMap

    cx = circle_complex(m, name)
    verts = [Cell(0, SmoothMap(0, 1, lambda s, j=j: np.full((len(np.atleast_2d(s)), 1), j / m),
                               lambda s: np.zeros((len(np.atleast_2d(s)), 1, 0))), 1, 1, None, ("v", j))
             for j in range(m)]
    edges = [Cell(1, SmoothMap(1, 1, lambda s, j=j: (j + np.atleast_2d(s)) / m,
                               lambda s: np.full((len(np.atleast_2d(s)), 1, 1), 1.0 / m)), 1, 1, None, ("e", j))
             for j in range(m)]
    cx.geometry = [verts, edges]
    return cx


def torus_cw(d: int, m: int = 1, name: str | None = None) -> CellComplex:
    """``d``-torus ``R^d / Z^d`` as a product of geometric circles."""
    cx = circle_geometric(m, "S1")
    for _ in range(d - 1):
        cx = product_complex(cx, circle_geometric(m, "S1"))
    cx.name = name or f"T{d}"
    return cx


# boundary signs of the equatorial cells, fixed by a numerical Stokes check
_EQUATOR_SIGN = {2: -1, 3: 1}


def _hemisphere_param(j: int, side: int, ambient: int):
    from .geometry import SmoothMap, hyperspherical

    if j == 0:
        return SmoothMap(0, ambient, lambda s: np.tile(np.eye(ambient)[0] * side, (len(np.atleast_2d(s)), 1)),
                         lambda s: np.zeros((len(np.atleast_2d(s)), ambient, 0)))
    if j == 1:
        def f1(s):
            s = np.atleast_2d(s)
            out = np.zeros((len(s), ambient))
            out[:, 0] = np.cos(np.pi * s[:, 0])
            out[:, 1] = side * np.sin(np.pi * s[:, 0])
            return out

        def j1(s):
            s = np.atleast_2d(s)
            out = np.zeros((len(s), ambient, 1))
            out[:, 0, 0] = -np.pi * np.sin(np.pi * s[:, 0])
            out[:, 1, 0] = side * np.pi * np.cos(np.pi * s[:, 0])
            return out

        return SmoothMap(1, ambient, f1, j1, f"e1{'+' if side > 0 else '-'}")
    sph = hyperspherical(j - 1)
    span = np.array([np.pi] * (j - 2) + [2 * np.pi])

    def f(s):
        s = np.atleast_2d(s)
        b = 0.5 * np.pi * s[:, 0]
        w = sph(s[:, 1:] * span)
        out = np.zeros((len(s), ambient))
        out[:, :j] = np.sin(b)[:, None] * w
        out[:, j] = side * np.cos(b)
        return out

    return SmoothMap(j, ambient, f, None, f"e{j}{'+' if side > 0 else '-'}")


def sphere_cw(n: int, ambient: int | None = None, name: str | None = None) -> CellComplex:
    """Equatorial cell structure on ``S^n``: cells ``e^j_+ , e^j_-`` for ``0 <= j <= n``.

    ``e^j_(+/-)`` is the half of ``S^j`` (first ``j+1`` coordinates) with
    ``+/- y_j >= 0``; vertex ``e^0_+`` is the first basis vector.  Every cell is
    oriented outward-normal-last within ``S^j``.
    """
    from .geometry import Cell, outward_normal_last_sign

    if n > 3:
        raise ValueError("equatorial cells are provided up to S^3")
    ambient = n + 1 if ambient is None else ambient
    cells, geom = [], []
    for j in range(n + 1):
        cells.append([("e", j, 1), ("e", j, -1)])
        row = []
        for side in (1, -1):
            param = _hemisphere_param(j, side, ambient)
            orient = 1
            if j >= 1:
                sub = param
                if ambient > j + 1:
                    from .geometry import SmoothMap

                    sub = SmoothMap(j, j + 1, lambda s, p=param: p(s)[:, :j + 1],
                                    lambda s, p=param: p.jac(s)[:, :j + 1, :])
                orient = outward_normal_last_sign(lambda y: y, sub, lambda y: y, np.full(j, 0.37))
            row.append(Cell(j, param, 1, orient, None, ("e", j, side)))
        geom.append(row)
    boundary = [{}]
    for j in range(1, n + 1):
        bd = {}
        for side in (1, -1):
            if j == 1:
                bd[("e", 1, side)] = {("e", 0, 1): side, ("e", 0, -1): -side}
            else:
                eps = _EQUATOR_SIGN.get(j, 1) * side
                bd[("e", j, side)] = {("e", j - 1, 1): eps, ("e", j - 1, -1): eps}
        boundary.append(bd)
    return CellComplex(cells, boundary, name or f"S{n}_eq", geom)


def sphere_cycle(sph: CellComplex) -> np.ndarray:
    """``e^n_+ + e^n_-``: the fundamental cycle in the outward-normal-last orientation."""
    n = sph.dim
    return sph.cochain_from(n, {("e", n, 1): 1, ("e", n, -1): 1})
