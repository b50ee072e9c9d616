"""Matrix Lie algebras and invariant polynomials.

Every polynomial is stored as a linear combination of trace monomials
``tr(X^{a_1}) tr(X^{a_2}) ...``.  The multilinear form is recovered by
polarization: the arguments are distributed over the monomial slots and the
result is averaged over all permutations of the arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

ALGEBRA_TAGS = ("su", "so", "u")
NORMALIZATION_TAGS = ("chern_k", "pontryagin_k", "half_p1", "custom")

_TOL = 1e-12


def _split_tag(tag: str) -> tuple[str, int | None]:
    """'su(2)' -> ('su', 2); 'u' -> ('u', None)."""
    tag = tag.strip().lower()
    if "(" in tag:
        base, rest = tag.split("(", 1)
        return base, int(rest.rstrip(")"))
    return tag, None


def membership_defect(entries: np.ndarray, tag: str) -> float:
    """Size of the violation of the defining condition of ``tag``."""
    base, _ = _split_tag(tag)
    m = np.asarray(entries)
    if base == "so":
        return float(np.max(np.abs(m + m.T)) + np.max(np.abs(np.imag(m))))
    herm = float(np.max(np.abs(m + m.conj().T)))
    if base == "u":
        return herm
    if base == "su":
        return herm + abs(complex(np.trace(m)))
    raise ValueError(f"unknown algebra tag {tag!r}")


@dataclass(frozen=True)
class AlgebraElement:
    """An element of a matrix Lie algebra ``su(n)``, ``so(n)`` or ``u(n)``."""

    entries: np.ndarray
    algebra_tag: str
    tol: float = _TOL

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("algebra elements are square matrices")
        base, n = _split_tag(self.algebra_tag)
        if base not in ALGEBRA_TAGS:
            raise ValueError(f"unknown algebra tag {self.algebra_tag!r}")
        if n is not None and n != m.shape[0]:
            raise ValueError(f"{self.algebra_tag} expects {n}x{n} matrices")
        defect = membership_defect(m, base)
        if defect > self.tol * max(1.0, float(np.max(np.abs(m), initial=0.0))):
            raise ValueError(f"matrix is not in {self.algebra_tag} (defect {defect:.2e})")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "algebra_tag", f"{base}({m.shape[0]})")

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _check_same(self, other)
        return AlgebraElement(self.entries + other.entries, self.algebra_tag)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        _check_same(self, other)
        return AlgebraElement(self.entries - other.entries, self.algebra_tag)

    def __mul__(self, scalar: float) -> "AlgebraElement":
        return AlgebraElement(float(scalar) * self.entries, self.algebra_tag)

    __rmul__ = __mul__

    def adjoint(self, g: np.ndarray) -> "AlgebraElement":
        """Ad_g X = g X g^{-1}."""
        g = np.asarray(g, dtype=complex)
        return AlgebraElement(g @ self.entries @ np.linalg.inv(g), self.algebra_tag, tol=1e-10)


def _check_same(x: AlgebraElement, y: AlgebraElement) -> None:
    if x.algebra_tag != y.algebra_tag:
        raise ValueError(f"algebra mismatch: {x.algebra_tag} vs {y.algebra_tag}")


def bracket(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """Commutator ``XY - YX``."""
    _check_same(x, y)
    return AlgebraElement(x.entries @ y.entries - y.entries @ x.entries, x.algebra_tag, tol=1e-10)


# Pauli matrices and the standard su(2) basis T_a = i sigma_a / 2.
PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
SU2_BASIS = tuple(0.5j * s for s in PAULI)


def quaternion_matrix(q: np.ndarray) -> np.ndarray:
    """Map quaternions ``q = (q0, q1, q2, q3)`` (last axis) to 2x2 complex matrices.

    ``1 -> I`` and ``(i, j, k) -> (i sigma_z, i sigma_y, i sigma_x)`` so the
    multiplication table is preserved.  Unit quaternions land in SU(2).
    """
    q = np.asarray(q, dtype=float)
    a = q[..., 0] + 1j * q[..., 1]
    b = q[..., 2] + 1j * q[..., 3]
    out = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = -np.conj(b)
    out[..., 1, 1] = np.conj(a)
    return out


def random_element(tag: str, rng: np.random.Generator, scale: float = 1.0) -> AlgebraElement:
    base, n = _split_tag(tag)
    if n is None:
        raise ValueError("random_element needs an explicit size, e.g. 'su(2)'")
    z = rng.normal(size=(n, n)) + (0 if base == "so" else 1j * rng.normal(size=(n, n)))
    m = 0.5 * (z - z.conj().T)
    if base == "su":
        m = m - np.trace(m) / n * np.eye(n)
    return AlgebraElement(scale * m, tag)


def random_group_element(tag: str, rng: np.random.Generator) -> np.ndarray:
    """exp of a random algebra element, i.e. an element of the group."""
    from scipy.linalg import expm

    return expm(random_element(tag, rng).entries)


# --------------------------------------------------------------------------
# invariant polynomials


Partition = tuple[int, ...]


def _elementary_in_power_sums(k: int) -> dict[Partition, Fraction]:
    """e_k as a polynomial in the power sums p_j (Newton's identities)."""
    e: list[dict[Partition, Fraction]] = [{(): Fraction(1)}]
    for m in range(1, k + 1):
        acc: dict[Partition, Fraction] = {}
        for j in range(1, m + 1):
            sign = 1 if j % 2 == 1 else -1
            for part, coeff in e[m - j].items():
                key = tuple(sorted(part + (j,), reverse=True))
                acc[key] = acc.get(key, Fraction(0)) + Fraction(sign, m) * coeff
        e.append({p: c for p, c in acc.items() if c != 0})
    return e[k]


@dataclass(frozen=True)
class InvariantPolynomial:
    """Symmetric Ad-invariant multilinear map built from trace monomials.

    Parameters
    ----------
    degree : int
        Number of arguments ``k``.
    terms : tuple of (coefficient, partition)
        ``sum coeff * prod_j tr(X^{a_j})`` with ``sum a_j = k``.
    normalization_tag : str
        One of ``chern_k``, ``pontryagin_k``, ``half_p1``, ``custom``.
    name : str
        Human readable label such as ``chern_2``.
    """

    degree: int
    terms: tuple[tuple[complex, Partition], ...]
    normalization_tag: str = "custom"
    name: str = "custom"
    algebra: str | None = None
    _plan: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be positive")
        if self.normalization_tag not in NORMALIZATION_TAGS:
            raise ValueError(f"unknown normalization tag {self.normalization_tag!r}")
        for _, part in self.terms:
            if sum(part) != self.degree or any(a < 1 for a in part):
                raise ValueError(f"trace monomial {part} does not have degree {self.degree}")
        # For every permutation and monomial, the slot blocks as index tuples.
        plan = []
        norm = 1.0 / math.factorial(self.degree)
        for coeff, part in self.terms:
            for perm in permutations(range(self.degree)):
                blocks, pos = [], 0
                for a in part:
                    blocks.append(perm[pos : pos + a])
                    pos += a
                plan.append((complex(coeff) * norm, tuple(blocks)))
        object.__setattr__(self, "_plan", tuple(plan))

    def evaluate_batch(self, args: Sequence[np.ndarray]) -> np.ndarray:
        """Evaluate on stacks of matrices, each of shape ``(..., n, n)``.

        Returns the real part; the imaginary part is roundoff for algebra
        valued inputs.
        """
        if len(args) != self.degree:
            raise ValueError(f"expected {self.degree} arguments, got {len(args)}")
        args = [np.asarray(a, dtype=complex) for a in args]
        shape = np.broadcast_shapes(*(a.shape[:-2] for a in args))
        total = np.zeros(shape, dtype=complex)
        cache: dict[tuple[int, ...], np.ndarray] = {}
        for coeff, blocks in self._plan:
            prod = coeff
            for block in blocks:
                tr = cache.get(block)
                if tr is None:
                    mat = args[block[0]]
                    for idx in block[1:]:
                        mat = mat @ args[idx]
                    tr = np.trace(mat, axis1=-2, axis2=-1)
                    cache[block] = tr
                prod = prod * tr
            total = total + prod
        return total.real

    def __call__(self, *args) -> float:
        return evaluate_polynomial(self, *args)

    def __mul__(self, other: "InvariantPolynomial") -> "InvariantPolynomial":
        """Product polynomial ``(l1 l2)(X) = l1(X) l2(X)``."""
        terms: dict[Partition, complex] = {}
        for c1, p1 in self.terms:
            for c2, p2 in other.terms:
                key = tuple(sorted(p1 + p2, reverse=True))
                terms[key] = terms.get(key, 0) + complex(c1) * complex(c2)
        return InvariantPolynomial(
            self.degree + other.degree,
            tuple((c, p) for p, c in sorted(terms.items())),
            "custom",
            f"{self.name}*{other.name}",
            self.algebra,
        )


def evaluate_polynomial(lam: InvariantPolynomial, *args) -> float:
    """Evaluate ``lam`` on ``k`` algebra elements (or raw matrices)."""
    if len(args) != lam.degree:
        raise ValueError(f"{lam.name} takes {lam.degree} arguments, got {len(args)}")
    mats = [a.entries if isinstance(a, AlgebraElement) else np.asarray(a) for a in args]
    tags = {a.algebra_tag for a in args if isinstance(a, AlgebraElement)}
    if len(tags) > 1:
        raise ValueError(f"mixed algebras {sorted(tags)}")
    return float(lam.evaluate_batch(mats))


def from_coefficients(degree: int, coefficients: dict, name: str = "custom") -> InvariantPolynomial:
    """Custom polynomial from ``{partition: coefficient}``."""
    terms = tuple((complex(c), tuple(int(a) for a in p)) for p, c in coefficients.items())
    return InvariantPolynomial(degree, terms, "custom", name)


def chern_polynomial(k: int, n: int | None = None) -> InvariantPolynomial:
    """c_k: coefficient of t^k in det(I + t (i/2pi) X)."""
    scale = (1j / (2 * math.pi)) ** k
    terms = tuple(
        (complex(float(c)) * scale, p) for p, c in sorted(_elementary_in_power_sums(k).items())
    )
    return InvariantPolynomial(k, terms, "chern_k", f"chern_{k}", None if n is None else f"u({n})")


def pontryagin_polynomial(k: int, n: int | None = None) -> InvariantPolynomial:
    """p_k = (-1)^k c_{2k} of the complexification."""
    c = chern_polynomial(2 * k, n)
    sign = -1 if k % 2 else 1
    terms = tuple((sign * coeff, p) for coeff, p in c.terms)
    return InvariantPolynomial(2 * k, terms, "pontryagin_k", f"pontryagin_{k}", None if n is None else f"so({n})")


def half_p1_polynomial() -> InvariantPolynomial:
    """Generator of degree-four integral classes for su(2) = spin(3).

    Pinned to ``c_2`` so that the bundled instanton has period +1.
    """
    c2 = chern_polynomial(2, 2)
    return InvariantPolynomial(2, c2.terms, "half_p1", "half_p1", "su(2)")


def standard_polynomial(tag: str, n: int) -> InvariantPolynomial:
    """Standard normalized polynomial from a tag such as ``'chern_2'``."""
    tag = tag.strip().lower()
    if tag == "half_p1":
        if n != 2:
            raise ValueError("half_p1 is provided for su(2) only")
        return half_p1_polynomial()
    if tag.startswith("chern_"):
        k = int(tag.split("_", 1)[1])
        if k < 1 or k > n:
            raise ValueError(f"chern_{k} is not defined for rank {n}")
        return chern_polynomial(k, n)
    if tag.startswith("pontryagin_"):
        k = int(tag.split("_", 1)[1])
        if k < 1 or 2 * k > n:
            raise ValueError(f"pontryagin_{k} is not defined for so({n})")
        return pontryagin_polynomial(k, n)
    raise ValueError(f"unsupported polynomial tag {tag!r}")


def det_expansion_coefficient(x: np.ndarray, k: int) -> complex:
    """Coefficient of t^k in det(I + t (i/2pi) X), by polynomial fitting.

    Independent of the trace-monomial route; used as a test oracle.
    """
    n = x.shape[0]
    ts = np.arange(n + 1, dtype=float)
    vals = [np.linalg.det(np.eye(n) + t * (1j / (2 * math.pi)) * x) for t in ts]
    coeffs = np.linalg.solve(np.vander(ts, n + 1, increasing=True), np.array(vals))
    return complex(coeffs[k]) if k <= n else 0j


def polynomial_from_iterable(tags: Iterable[str], n: int) -> list[InvariantPolynomial]:
    return [standard_polynomial(t, n) for t in tags]
