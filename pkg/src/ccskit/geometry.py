"""Differential forms as vectorized evaluators on coordinate charts.

A degree ``p`` form on an ``n``-dimensional chart is a callable taking an
``(N, n)`` array of points and returning an ``(N, C(n, p), *value_shape)``
array of components.  Components are ordered like
``itertools.combinations(range(n), p)``.  Scalar forms have
``value_shape == ()``; Lie algebra valued forms carry a trailing matrix shape.

Chains are sums of parametrized cubes ``[0, 1]^p -> chart`` with integer
coefficients and orientation signs.  Integration uses tensor Gauss-Legendre
quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Callable, Sequence

import numpy as np

DEFAULT_FD_STEP = 1e-4
DEFAULT_QUAD_ORDER = 8


@lru_cache(maxsize=None)
def multi_indices(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations(range(n), p))


@lru_cache(maxsize=None)
def index_lookup(n: int, p: int) -> dict[tuple[int, ...], int]:
    return {idx: k for k, idx in enumerate(multi_indices(n, p))}


def _perm_sign(seq: Sequence[int]) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class Chart:
    """Coordinate chart: an open box in parameter space.

    ``embedding`` optionally maps chart points to an ambient Euclidean space;
    it is used to orient spheres by the outward-normal-last rule.
    """

    name: str
    dim: int
    lower: tuple[float, ...] | None = None
    upper: tuple[float, ...] | None = None
    embedding: Callable | None = None

    def __post_init__(self):
        if self.dim < 0:
            raise ValueError("chart dimension must be non-negative")
        if self.lower is not None and self.upper is not None:
            if len(self.lower) != self.dim or len(self.upper) != self.dim:
                raise ValueError("chart box has the wrong dimension")
            if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
                raise ValueError(f"chart {self.name} has an empty domain")

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        if self.lower is None:
            return np.ones(len(x), dtype=bool)
        return np.all((x >= np.asarray(self.lower)) & (x <= np.asarray(self.upper)), axis=1)


class FormField:
    """Degree ``p`` differential form on an ``n``-dimensional chart.

    Parameters
    ----------
    dim : int
        Dimension of the chart.
    degree : int
        Form degree ``p``.
    func : callable
        ``func(X) -> components`` with ``X`` of shape ``(N, dim)``.
    value_shape : tuple
        ``()`` for scalar forms, ``(n, n)`` for matrix valued forms.
    d_func : callable, optional
        Analytic exterior derivative, in the same component layout.
    """

    def __init__(self, dim: int, degree: int, func: Callable, value_shape: tuple = (),
                 d_func: Callable | None = None, name: str = "", chart: str | None = None):
        if degree < 0 or degree > dim:
            raise ValueError(f"degree {degree} impossible on a {dim}-dimensional chart")
        self.dim = dim
        self.degree = degree
        self.func = func
        self.value_shape = tuple(value_shape)
        self.d_func = d_func
        self.name = name
        self.chart = chart

    @property
    def ncomp(self) -> int:
        return comb(self.dim, self.degree)

    @property
    def has_analytic_derivative(self) -> bool:
        return self.d_func is not None

    def components(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x2 = np.atleast_2d(x)
        out = np.asarray(self.func(x2))
        expected = (len(x2), self.ncomp) + self.value_shape
        if out.shape != expected:
            out = np.broadcast_to(out, expected)
        return out[0] if single else out

    def __call__(self, x: np.ndarray, *vectors: np.ndarray):
        """Evaluate at one point on ``p`` tangent vectors."""
        if len(vectors) != self.degree:
            raise ValueError(f"a {self.degree}-form takes {self.degree} vectors")
        comps = self.components(np.asarray(x, dtype=float))
        if self.degree == 0:
            return comps[0]
        v = np.stack([np.asarray(u, dtype=float) for u in vectors], axis=1)  # (dim, p)
        dets = np.array([np.linalg.det(v[list(idx), :]) for idx in multi_indices(self.dim, self.degree)])
        return np.tensordot(dets, comps, axes=(0, 0))

    # arithmetic -------------------------------------------------------------
    def _check(self, other: "FormField") -> None:
        if (self.dim, self.degree, self.value_shape) != (other.dim, other.degree, other.value_shape):
            raise ValueError("forms live in different spaces")

    def __add__(self, other: "FormField") -> "FormField":
        self._check(other)
        d = None
        if self.d_func is not None and other.d_func is not None:
            d = lambda x, a=self.d_func, b=other.d_func: a(x) + b(x)
        return FormField(self.dim, self.degree, lambda x: self.components(x) + other.components(x),
                         self.value_shape, d, f"({self.name}+{other.name})", self.chart)

    def __sub__(self, other: "FormField") -> "FormField":
        return self + other.scale(-1.0)

    def __neg__(self) -> "FormField":
        return self.scale(-1.0)

    def scale(self, c) -> "FormField":
        d = None if self.d_func is None else (lambda x, f=self.d_func: c * f(x))
        return FormField(self.dim, self.degree, lambda x: c * self.components(x),
                         self.value_shape, d, f"{c}*{self.name}", self.chart)

    def map_values(self, fn: Callable, value_shape: tuple = ()) -> "FormField":
        """Apply a linear map to the values, e.g. a trace or a real part."""
        return FormField(self.dim, self.degree, lambda x: fn(self.components(x)), value_shape,
                         None, self.name, self.chart)

    def max_abs(self, points: np.ndarray) -> float:
        vals = self.components(points)
        return float(np.max(np.abs(vals))) if vals.size else 0.0


def zero_form(dim: int, degree: int, value_shape: tuple = ()) -> FormField:
    shape = (comb(dim, degree),) + tuple(value_shape)

    def f(x):
        return np.zeros((len(x),) + shape)

    d = None
    if degree < dim:
        d = lambda x: np.zeros((len(x), comb(dim, degree + 1)) + tuple(value_shape))
    return FormField(dim, degree, f, value_shape, d, "0")


def function_form(dim: int, fn: Callable, grad: Callable | None = None, name: str = "f") -> FormField:
    """Scalar 0-form from a vectorized function ``fn(X) -> (N,)``."""
    d = None
    if grad is not None:
        d = lambda x: np.asarray(grad(x))
    return FormField(dim, 0, lambda x: np.asarray(fn(x))[:, None], (), d, name)


def constant_form(dim: int, degree: int, coefficients: dict, name: str = "c") -> FormField:
    """Constant-coefficient scalar form from ``{index tuple: value}``."""
    vec = np.zeros(comb(dim, degree))
    lookup = index_lookup(dim, degree)
    for idx, val in coefficients.items():
        key = tuple(sorted(idx))
        vec[lookup[key]] += _perm_sign(idx) * val
    d = (lambda x: np.zeros((len(x), comb(dim, degree + 1)))) if degree < dim else None
    return FormField(dim, degree, lambda x: np.broadcast_to(vec, (len(x), len(vec))).copy(), (), d, name)


# exterior derivative ----------------------------------------------------------


@lru_cache(maxsize=None)
def _d_table(n: int, p: int):
    """For each (p+1)-index J: list of (coordinate, p-index position, sign)."""
    lookup = index_lookup(n, p)
    table = []
    for J in multi_indices(n, p + 1):
        row = []
        for a, j in enumerate(J):
            rest = J[:a] + J[a + 1:]
            row.append((j, lookup[rest], -1 if a % 2 else 1))
        table.append(row)
    coords = np.array([[r[0] for r in row] for row in table], dtype=int).reshape(len(table), p + 1)
    pos = np.array([[r[1] for r in row] for row in table], dtype=int).reshape(len(table), p + 1)
    sgn = np.array([[r[2] for r in row] for row in table], dtype=float).reshape(len(table), p + 1)
    return coords, pos, sgn


def partial_derivatives(form: FormField, x: np.ndarray, h: float = DEFAULT_FD_STEP, stencil: int = 2) -> np.ndarray:
    """Central differences of all components, shape ``(N, dim, ncomp, *vs)``.

    ``stencil=4`` uses the five-point formula (error ``O(h^4)``).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = form.dim
    N = len(x)
    if stencil == 2:
        steps, weights = (1.0, -1.0), (0.5, -0.5)
    elif stencil == 4:
        steps, weights = (2.0, 1.0, -1.0, -2.0), (-1 / 12, 8 / 12, -8 / 12, 1 / 12)
    else:
        raise ValueError("stencil must be 2 or 4")
    eye = np.eye(n)[:, None, :]
    shifts = np.concatenate([x[None, :, :] + a * h * eye for a in steps], axis=0)
    vals = form.components(shifts.reshape(len(steps) * n * N, n)).reshape((len(steps), n, N, form.ncomp) + form.value_shape)
    der = sum(w * vals[i] for i, w in enumerate(weights)) / h
    return np.moveaxis(der, 0, 1)


def exterior_derivative(form: FormField, h: float = DEFAULT_FD_STEP, stencil: int = 2) -> FormField:
    """``d`` of a form; analytic if available, otherwise central differences."""
    n, p = form.dim, form.degree
    if p >= n:
        raise ValueError(f"cannot differentiate a {p}-form on a {n}-dimensional chart")
    if form.d_func is not None:
        return FormField(n, p + 1, form.d_func, form.value_shape, None, f"d{form.name}", form.chart)
    coords, pos, sgn = _d_table(n, p)
    extra = (None,) * len(form.value_shape)

    def dfunc(x):
        der = partial_derivatives(form, x, h, stencil)  # (N, n, ncomp, *vs)
        terms = der[:, coords, pos]  # (N, nJ, p+1, *vs)
        return np.sum(terms * sgn[(None, Ellipsis) + extra], axis=2)

    return FormField(n, p + 1, dfunc, form.value_shape, None, f"d{form.name}", form.chart)


# wedge products -----------------------------------------------------------------


@lru_cache(maxsize=None)
def shuffle_table(n: int, degrees: tuple[int, ...]):
    """Index table for multi-wedges of forms of the given degrees.

    Returns ``(idx, sgn)`` with ``idx`` of shape ``(nK, nterms, len(degrees))``
    and ``sgn`` of shape ``(nK, nterms)``.
    """
    total = sum(degrees)
    lookups = [index_lookup(n, d) for d in degrees]
    rows_idx, rows_sgn = [], []
    for K in multi_indices(n, total):
        idx_row, sgn_row = [], []
        for assignment in _ordered_splits(K, degrees):
            flat = [i for block in assignment for i in block]
            idx_row.append([lookups[b][assignment[b]] for b in range(len(degrees))])
            sgn_row.append(_perm_sign([K.index(i) for i in flat]))
        rows_idx.append(idx_row)
        rows_sgn.append(sgn_row)
    nK = len(rows_idx)
    nt = len(rows_idx[0]) if nK else 0
    return (np.array(rows_idx, dtype=int).reshape(nK, nt, len(degrees)),
            np.array(rows_sgn, dtype=float).reshape(nK, nt))


def _ordered_splits(K: tuple[int, ...], degrees: tuple[int, ...]):
    if not degrees:
        yield ()
        return
    first, rest = degrees[0], degrees[1:]
    for block in combinations(K, first):
        remaining = tuple(i for i in K if i not in block)
        for tail in _ordered_splits(remaining, rest):
            yield (block,) + tail


def multi_wedge(forms: Sequence[FormField], combine: Callable, value_shape: tuple = (),
                name: str = "wedge") -> FormField:
    """``combine(w_1, ..., w_m)`` applied along the wedge of the given forms.

    ``combine`` receives stacked component values ``(M, *vs_i)`` and must be
    multilinear; it returns ``(M, *value_shape)``.
    """
    n = forms[0].dim
    if any(f.dim != n for f in forms):
        raise ValueError("forms live on charts of different dimension")
    degrees = tuple(f.degree for f in forms)
    if sum(degrees) > n:
        raise ValueError("degrees exceed chart dimension")
    idx, sgn = shuffle_table(n, degrees)
    nK, nt = sgn.shape

    def func(x):
        N = len(x)
        comps = [f.components(x) for f in forms]
        args = []
        for b, c in enumerate(comps):
            g = c[:, idx[:, :, b]]  # (N, nK, nt, *vs)
            args.append(g.reshape((N * nK * nt,) + c.shape[2:]))
        vals = np.asarray(combine(*args))
        vals = vals.reshape((N, nK, nt) + tuple(value_shape))
        extra = (None,) * len(value_shape)
        return np.sum(vals * sgn[(None, Ellipsis) + extra], axis=2)

    return FormField(n, sum(degrees), func, value_shape, None, name, forms[0].chart)


def wedge(a: FormField, b: FormField, product: Callable | None = None, value_shape: tuple | None = None) -> FormField:
    """Wedge product; ``product`` combines values (default: multiplication)."""
    if product is None:
        if a.value_shape and b.value_shape:
            raise ValueError("matrix valued forms need an explicit product")
        product = lambda u, v: (u[(...,) + (None,) * len(b.value_shape)] * v) if not a.value_shape else u * v[(...,) + (None,) * len(a.value_shape)]
        vs = a.value_shape or b.value_shape
    else:
        vs = value_shape if value_shape is not None else a.value_shape
    return multi_wedge([a, b], product, vs, f"{a.name}^{b.name}")


def matrix_wedge(a: FormField, b: FormField) -> FormField:
    """Wedge of matrix valued forms with matrix multiplication."""
    return multi_wedge([a, b], np.matmul, a.value_shape, f"{a.name}^{b.name}")


def polynomial_wedge(lam, forms: Sequence[FormField], name: str = "") -> FormField:
    """Scalar form ``lam(w_1 ^ ... ^ w_k)`` for matrix valued forms."""
    if len(forms) != lam.degree:
        raise ValueError(f"{lam.name} needs {lam.degree} forms")
    return multi_wedge(list(forms), lambda *a: lam.evaluate_batch(a), (), name or f"{lam.name}(...)")


# pullback ---------------------------------------------------------------------------


def fd_jacobian(fmap: Callable, x: np.ndarray, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Jacobian ``(N, n_out, n_in)`` by central differences."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    N, m = x.shape
    shifts = np.concatenate([x[None] + h * np.eye(m)[:, None, :], x[None] - h * np.eye(m)[:, None, :]], axis=0)
    vals = np.asarray(fmap(shifts.reshape(2 * m * N, m)))
    n = vals.shape[-1]
    vals = vals.reshape(2, m, N, n)
    return np.transpose((vals[0] - vals[1]) / (2 * h), (1, 2, 0))


@dataclass
class SmoothMap:
    """Vectorized map between charts with optional analytic Jacobian."""

    source_dim: int
    target_dim: int
    func: Callable
    jacobian: Callable | None = None
    name: str = "f"
    fd_step: float = DEFAULT_FD_STEP

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(np.atleast_2d(x)))

    def jac(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(x))
        return fd_jacobian(self.func, x, self.fd_step)


def identity_map(n: int) -> SmoothMap:
    return SmoothMap(n, n, lambda x: x, lambda x: np.broadcast_to(np.eye(n), (len(x), n, n)), "id")


def linear_map(matrix: np.ndarray, offset: np.ndarray | None = None, name: str = "L") -> SmoothMap:
    M = np.asarray(matrix, dtype=float)
    b = np.zeros(M.shape[0]) if offset is None else np.asarray(offset, dtype=float)
    return SmoothMap(M.shape[1], M.shape[0], lambda x: x @ M.T + b,
                     lambda x: np.broadcast_to(M, (len(x),) + M.shape), name)


def compose(f: SmoothMap, g: SmoothMap) -> SmoothMap:
    """``f o g``."""
    if g.target_dim != f.source_dim:
        raise ValueError("maps do not compose")
    return SmoothMap(g.source_dim, f.target_dim, lambda x: f(g(x)),
                     lambda x: np.einsum("nij,njk->nik", f.jac(g(x)), g.jac(x)), f"{f.name}o{g.name}")


@lru_cache(maxsize=None)
def _minor_tables(n: int, m: int, p: int):
    rows = np.array(multi_indices(n, p), dtype=int).reshape(-1, p)
    cols = np.array(multi_indices(m, p), dtype=int).reshape(-1, p)
    return rows, cols


def minors(J: np.ndarray, p: int) -> np.ndarray:
    """All p x p minors of ``J`` (N, n, m) -> (N, C(n,p), C(m,p))."""
    N, n, m = J.shape
    if p == 0:
        return np.ones((N, 1, 1))
    rows, cols = _minor_tables(n, m, p)
    sub = J[:, rows[:, None, :, None], cols[None, :, None, :]]  # (N, R, C, p, p)
    if p == 1:
        return sub[..., 0, 0]
    return np.linalg.det(sub)


def pullback(fmap: SmoothMap, form: FormField) -> FormField:
    """``f^* w`` with ``(f^*w)(v) = w(df v)``."""
    if fmap.target_dim != form.dim:
        raise ValueError(f"map lands in dimension {fmap.target_dim}, form lives in {form.dim}")
    p = form.degree
    if p > fmap.source_dim:
        raise ValueError(f"cannot pull a {p}-form back to dimension {fmap.source_dim}")

    def func(x):
        y = fmap(x)
        comps = form.components(y)  # (N, C(n,p), *vs)
        if p == 0:
            return comps
        M = minors(fmap.jac(x), p)  # (N, C(n,p), C(m,p))
        return np.einsum("nik,ni...->nk...", M, comps)

    d = None
    if form.d_func is not None and p < fmap.source_dim:
        dform = FormField(form.dim, p + 1, form.d_func, form.value_shape)
        d = lambda x: pullback(fmap, dform).components(x)
    return FormField(fmap.source_dim, p, func, form.value_shape, d, f"{fmap.name}*{form.name}")


# chains and integration -------------------------------------------------------------------


@dataclass
class Cell:
    """Parametrized cube ``[0,1]^p -> chart`` with coefficient and orientation."""

    dim: int
    param: SmoothMap
    coefficient: int = 1
    orientation: int = 1
    chart: str | None = None
    label: object = None

    @property
    def weight(self) -> int:
        return self.coefficient * self.orientation


@dataclass
class SingularChain:
    cells: list[Cell] = field(default_factory=list)

    def __post_init__(self):
        dims = {c.dim for c in self.cells}
        if len(dims) > 1:
            raise ValueError(f"chain mixes cell dimensions {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.cells[0].dim if self.cells else 0

    def __add__(self, other: "SingularChain") -> "SingularChain":
        return SingularChain(self.cells + other.cells)

    def __neg__(self) -> "SingularChain":
        return SingularChain([Cell(c.dim, c.param, -c.coefficient, c.orientation, c.chart, c.label) for c in self.cells])


@lru_cache(maxsize=None)
def gauss_legendre_01(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def tensor_grid(p: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = gauss_legendre_01(order)
    if p == 0:
        return np.zeros((1, 0)), np.ones(1)
    mesh = np.stack(np.meshgrid(*([x] * p), indexing="ij"), axis=-1).reshape(-1, p)
    wts = np.prod(np.stack(np.meshgrid(*([w] * p), indexing="ij"), axis=-1).reshape(-1, p), axis=1)
    return mesh, wts


EVAL_CHUNK = 128


def evaluate_chunked(form: FormField, Y: np.ndarray, chunk: int = EVAL_CHUNK) -> np.ndarray:
    """``form.components(Y)`` in blocks of at most ``chunk`` points (bounds peak memory)."""
    if len(Y) <= chunk:
        return form.components(Y)
    return np.concatenate([form.components(Y[i:i + chunk]) for i in range(0, len(Y), chunk)], axis=0)


def cell_integrals(form: FormField, cells: Sequence[Cell], order: int = DEFAULT_QUAD_ORDER) -> np.ndarray:
    """Integral of ``form`` over each cell (orientation included, coefficient not)."""
    p = form.degree
    out = np.zeros((len(cells),) + form.value_shape, dtype=float if not form.value_shape else complex)
    if not cells:
        return out
    if any(c.dim != p for c in cells):
        raise ValueError(f"cannot integrate a {p}-form over cells of other dimensions")
    pts, wts = tensor_grid(p, order)
    # group cells sharing a parametrization family for vectorization
    xs, jacs = [], []
    for c in cells:
        y = c.param(pts)
        if y.shape[1] != form.dim:
            raise ValueError(f"cell lands in dimension {y.shape[1]}, form lives in {form.dim}")
        xs.append(y)
        jacs.append(c.param.jac(pts) if p > 0 else None)
    Y = np.concatenate(xs, axis=0)
    comps = evaluate_chunked(form, Y)
    Q = len(wts)
    comps = comps.reshape((len(cells), Q, form.ncomp) + form.value_shape)
    for i, c in enumerate(cells):
        if p == 0:
            dens = comps[i, :, 0]
        else:
            M = minors(jacs[i], p)[:, :, 0]  # (Q, C(n,p))
            dens = np.einsum("qi,qi...->q...", M, comps[i])
        out[i] = c.orientation * np.tensordot(wts, dens, axes=(0, 0))
    if not form.value_shape:
        out = out.real
    return out


def integrate(form: FormField, chain: SingularChain | Sequence[Cell], order: int = DEFAULT_QUAD_ORDER):
    """``sum_cells coefficient * orientation * int_cell form``."""
    cells = chain.cells if isinstance(chain, SingularChain) else list(chain)
    vals = cell_integrals(form, cells, order)
    coeffs = np.array([c.coefficient for c in cells], dtype=float)
    if form.value_shape:
        return np.tensordot(coeffs, vals, axes=(0, 0))
    return float(np.sum(coeffs * vals))


def cube_faces(cell: Cell) -> list[Cell]:
    """Boundary ``sum_i (-1)^i (c|x_i=1 - c|x_i=0)`` as a list of cells."""
    p = cell.dim
    faces = []
    for i in range(p):
        for end, sgn in ((1.0, 1), (0.0, -1)):
            def f(u, i=i, end=end):
                u = np.atleast_2d(u)
                full = np.insert(u, i, end, axis=1)
                return cell.param(full)

            def jf(u, i=i, end=end):
                u = np.atleast_2d(u)
                full = np.insert(u, i, end, axis=1)
                J = cell.param.jac(full)
                return np.delete(J, i, axis=2)

            sign = sgn * (-1 if i % 2 else 1)
            faces.append(Cell(p - 1, SmoothMap(p - 1, cell.param.target_dim, f, jf, f"face{i}{int(end)}"),
                              cell.coefficient, cell.orientation * sign, cell.chart))
    return faces


def boundary_chain(chain: SingularChain) -> SingularChain:
    return SingularChain([f for c in chain.cells for f in cube_faces(c)])


def affine_cell(origin, edges, chart: str | None = None, orientation: int = 1) -> Cell:
    """Cell ``s -> origin + sum_i s_i edges[i]``."""
    o = np.asarray(origin, dtype=float)
    E = np.asarray(edges, dtype=float).reshape(-1, len(o))
    return Cell(E.shape[0], linear_map(E.T, o, "affine"), 1, orientation, chart)


# fiber integration ---------------------------------------------------------------------------


def fiber_integrate(form: FormField, axis: int | None = None, fiber: str = "interval",
                    order: int = 16, scale: float = 1.0) -> FormField:
    """Integrate out one coordinate (``[0,1]``, or a circle parametrized by ``[0,1]``).

    Convention: the fiber direction is moved to the last slot,
    ``w = sum_I w_I dx^I ^ ds + (terms without ds)``, and the result is
    ``sum_I (int_0^1 w_I ds) dx^I``.  This equals ``(-1)^{k-1} int_0^1 w_s ds``
    when ``w = ds ^ w_s`` and ``k = deg w``.  ``scale`` rescales the fiber
    coordinate (circle of circumference ``scale``).
    """
    if fiber not in ("interval", "circle"):
        raise ValueError(f"unknown fiber {fiber!r}")
    n, k = form.dim, form.degree
    a = n - 1 if axis is None else axis
    if k < 1:
        raise ValueError("fiber integration needs degree >= 1")
    lookup = index_lookup(n, k)
    pos, sgn = [], []
    for I in multi_indices(n - 1, k - 1):
        lifted = tuple(i if i < a else i + 1 for i in I)
        full = tuple(sorted(lifted + (a,)))
        pos.append(lookup[full])
        sgn.append((-1) ** sum(1 for i in lifted if i > a))
    pos = np.array(pos, dtype=int)
    sgn = np.array(sgn, dtype=float)
    ts, ws = gauss_legendre_01(order)
    extra = (None,) * len(form.value_shape)

    def func(x):
        N = len(x)
        full = np.insert(np.repeat(x, len(ts), axis=0), a, np.tile(ts * scale, N), axis=1)
        comps = form.components(full).reshape((N, len(ts), form.ncomp) + form.value_shape)
        picked = comps[:, :, pos] * sgn[(None, None, Ellipsis) + extra]
        return scale * np.einsum("nt...,t->n...", picked, ws)

    return FormField(n - 1, k - 1, func, form.value_shape, None, f"fint({form.name})")


def product_with_fiber(form: FormField) -> FormField:
    """``pr_X^* w`` on ``X x F`` with the fiber coordinate appended last."""
    n, p = form.dim, form.degree
    lookup = index_lookup(n + 1, p)
    pos = np.array([lookup[I] for I in multi_indices(n, p)], dtype=int)
    ncomp = comb(n + 1, p)

    def func(x):
        comps = form.components(x[:, :n])
        out = np.zeros((len(x), ncomp) + form.value_shape, dtype=comps.dtype)
        out[:, pos] = comps
        return out

    return FormField(n + 1, p, func, form.value_shape, None, f"pr*{form.name}")


def sample_points(lower, upper, count: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    lo, hi = np.asarray(lower, float), np.asarray(upper, float)
    return lo + (hi - lo) * rng.random((count, len(lo)))


def sampled_residual(a: FormField, b: FormField, points: np.ndarray) -> float:
    """``max |a - b|`` over components at the sample points."""
    return float(np.max(np.abs(a.components(points) - b.components(points))))


# spheres -----------------------------------------------------------------------------------


def hyperspherical(n: int):
    """Map angles ``(a_1, ..., a_n)`` to the unit sphere ``S^n`` in R^{n+1}."""

    def f(a):
        a = np.atleast_2d(a)
        N = len(a)
        out = np.ones((N, n + 1))
        s = np.ones(N)
        for i in range(n):
            out[:, i] = s * np.cos(a[:, i])
            s = s * np.sin(a[:, i])
        out[:, n] = s
        return out

    return f


def outward_normal_last_sign(embed: Callable, param: SmoothMap, normal: Callable, at: np.ndarray) -> int:
    """Sign of ``det[d(embed o param) e_1, ..., e_p, normal]`` at one point."""
    emb = SmoothMap(param.target_dim, len(np.atleast_1d(normal(np.atleast_2d(embed(param(at[None])))[0]))),
                    embed)
    J = compose(emb, param).jac(at[None])[0]
    n = np.asarray(normal(np.atleast_2d(embed(param(at[None])))[0]), dtype=float)
    M = np.column_stack([J, n])
    d = np.linalg.det(M)
    if abs(d) < 1e-12:
        raise ValueError("degenerate point for orientation test")
    return 1 if d > 0 else -1


def sphere_cell(n: int, ranges: Sequence[tuple[float, float]] | None = None, radius: float = 1.0,
                chart: str | None = None) -> Cell:
    """Polar-coordinate cell on ``S^n`` (or a sub-box of angles), oriented outward-normal-last."""
    if ranges is None:
        ranges = [(0.0, np.pi)] * (n - 1) + [(0.0, 2 * np.pi)]
    lo = np.array([r[0] for r in ranges], dtype=float)
    span = np.array([r[1] - r[0] for r in ranges], dtype=float)
    sph = hyperspherical(n)
    param = SmoothMap(n, n + 1, lambda s: radius * sph(lo + span * np.atleast_2d(s)), name=f"S{n}")
    center = np.full(n, 0.5)
    sign = outward_normal_last_sign(lambda y: y, param, lambda y: y, center)
    return Cell(n, param, 1, sign, chart, label=f"S{n}")
