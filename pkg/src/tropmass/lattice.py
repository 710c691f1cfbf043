"""Exact integral-affine geometry of weighted simplices.

A weighted simplex with positive integer multiplicities ``b = (b_0, ..., b_p)``
is the rational polytope ``sigma = {w in R_{>=0}^{p+1} : sum_i b_i w_i = 1}``.
This module computes, in exact integer/rational arithmetic:

* the lattice-normalized volume of ``sigma``,
* the index of the rescaling map between the tangent lattices of ``sigma``
  and of the reduced (all-multiplicities-one) simplex, via an explicit
  integer normal form (independent of the closed-form product formula),
* the constant density of the lattice-normalized Lebesgue measure in the
  standard affine chart that drops one coordinate.

No floating point is used anywhere in this module: the values double as
oracles for the Monte-Carlo estimators elsewhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


def _validate_multiplicities(b: Sequence[int]) -> tuple[int, ...]:
    if len(b) == 0:
        raise ValueError("multiplicity vector must be nonempty")
    out = []
    for i, x in enumerate(b):
        if x != int(x):
            raise ValueError(f"multiplicity b_{i} = {x!r} is not an integer")
        x = int(x)
        if x < 1:
            raise ValueError(f"multiplicity b_{i} = {x} must be >= 1")
        out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class ZSimplex:
    """Simplex ``{w >= 0 : sum b_i w_i = 1}`` with integer multiplicities.

    Parameters
    ----------
    b : tuple of int
        Positive multiplicities ``(b_0, ..., b_p)``.

    Attributes
    ----------
    dim : int
        Affine dimension ``p = len(b) - 1``.
    multiplicity : int
        ``gcd(b_0, ..., b_p)``, the multiplicity of the simplex itself.
    """

    b: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "b", _validate_multiplicities(self.b))

    @property
    def dim(self) -> int:
        return len(self.b) - 1

    @property
    def multiplicity(self) -> int:
        return math.gcd(*self.b) if len(self.b) > 1 else self.b[0]

    def vertex(self, i: int) -> tuple[Fraction, ...]:
        """Barycentric coordinates of the i-th vertex, ``w_i = 1/b_i``."""
        return tuple(
            Fraction(1, self.b[i]) if j == i else Fraction(0)
            for j in range(len(self.b))
        )

    def contains(self, w: Sequence[Fraction]) -> bool:
        """Exact membership test for a rational point."""
        if len(w) != len(self.b):
            return False
        if any(x < 0 for x in w):
            return False
        return sum(Fraction(bi) * Fraction(wi) for bi, wi in zip(self.b, w)) == 1


@dataclass(frozen=True)
class AffineFunctionOnSimplex:
    """Affine function ``w -> sum_i c_i w_i`` on a weighted simplex.

    The value at the i-th vertex (where ``w_i = 1/b_i``) is ``c_i / b_i``.
    """

    simplex: ZSimplex
    coefficients: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        coeffs = tuple(Fraction(c) for c in self.coefficients)
        if len(coeffs) != len(self.simplex.b):
            raise ValueError(
                f"expected {len(self.simplex.b)} coefficients, got {len(coeffs)}"
            )
        object.__setattr__(self, "coefficients", coeffs)

    def __call__(self, w: Sequence[Fraction]) -> Fraction:
        if len(w) != len(self.coefficients):
            raise ValueError("point dimension mismatch")
        return sum(
            (c * Fraction(x) for c, x in zip(self.coefficients, w)),
            start=Fraction(0),
        )

    def vertex_value(self, i: int) -> Fraction:
        return self.coefficients[i] / self.simplex.b[i]

    def vertex_values(self) -> tuple[Fraction, ...]:
        return tuple(self.vertex_value(i) for i in range(len(self.coefficients)))

    def min_value(self) -> Fraction:
        """Minimum over the simplex (attained at a vertex)."""
        return min(self.vertex_values())

    def max_value(self) -> Fraction:
        return max(self.vertex_values())

    def is_constant(self) -> bool:
        vals = self.vertex_values()
        return all(v == vals[0] for v in vals)


def simplex_volume(b: Sequence[int] | ZSimplex) -> Fraction:
    """Lattice-normalized volume of the weighted simplex.

    The volume is measured against the integer tangent lattice
    ``{w in Z^{p+1} : sum b_i w_i = 0}`` and equals
    ``gcd(b) / (p! * prod(b))``.

    Examples
    --------
    >>> simplex_volume((1, 1))
    Fraction(1, 1)
    >>> simplex_volume((2, 3))
    Fraction(1, 6)
    >>> simplex_volume((6, 10, 15))
    Fraction(1, 1800)
    """
    if isinstance(b, ZSimplex):
        b = b.b
    b = _validate_multiplicities(b)
    p = len(b) - 1
    g = math.gcd(*b) if len(b) > 1 else b[0]
    return Fraction(g, math.factorial(p) * math.prod(b))


def kernel_basis(b: Sequence[int]) -> list[tuple[int, ...]]:
    """Integer basis of the lattice ``{w in Z^n : sum b_i w_i = 0}``.

    Uses the successive-gcd triangular construction: the k-th basis vector is
    supported on coordinates ``0..k`` with last entry ``-g_{k-1}/g_k`` where
    ``g_k = gcd(b_0, ..., b_k)``.

    Returns a list of ``n - 1`` integer vectors (empty for ``n = 1``).
    """
    b = _validate_multiplicities(b)
    n = len(b)
    if n == 1:
        return []
    # u[k] holds integer coefficients with sum(b[i]*u[i] for i <= k) == g_k.
    u = [0] * n
    u[0] = 1
    g = b[0]
    basis: list[tuple[int, ...]] = []
    for k in range(1, n):
        g_next = math.gcd(g, b[k])
        vec = [0] * n
        for i in range(k):
            vec[i] = (b[k] // g_next) * u[i]
        vec[k] = -(g // g_next)
        basis.append(tuple(vec))
        # extended gcd step: g_next = s*g + t*b[k]
        s, t = _bezout(g, b[k])
        for i in range(k):
            u[i] *= s
        u[k] = t
        g = g_next
    return basis


def _bezout(a: int, c: int) -> tuple[int, int]:
    """Integers (s, t) with s*a + t*c == gcd(a, c)."""
    old_r, r = a, c
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_s, old_t


def _bareiss_det(m: list[list[int]]) -> int:
    """Determinant of an integer matrix by fraction-free Bareiss elimination."""
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if pivot is None:
                return 0
            a[k], a[pivot] = a[pivot], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _solve_integer_coords(
    basis: list[tuple[int, ...]], vec: tuple[int, ...]
) -> list[int]:
    """Coordinates of ``vec`` in the given lattice basis (must be integral)."""
    k = len(basis)
    if k == 0:
        if any(vec):
            raise ValueError("nonzero vector in rank-0 lattice")
        return []
    n = len(vec)
    # Solve the overdetermined system basis^T x = vec exactly with Fractions.
    rows = [[Fraction(basis[j][i]) for j in range(k)] + [Fraction(vec[i])] for i in range(n)]
    # Gauss-Jordan elimination, one pivot row per column.
    next_row = 0
    pivots: list[tuple[int, int]] = []
    for col in range(k):
        piv = next((i for i in range(next_row, n) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[next_row], rows[piv] = rows[piv], rows[next_row]
        inv = 1 / rows[next_row][col]
        rows[next_row] = [x * inv for x in rows[next_row]]
        for i in range(n):
            if i != next_row and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[next_row])]
        pivots.append((next_row, col))
        next_row += 1
    x = [Fraction(0)] * k
    for r, c in pivots:
        x[c] = rows[r][k]
    # Consistency check: reconstruct vec.
    for i in range(n):
        s = sum((x[j] * basis[j][i] for j in range(k)), start=Fraction(0))
        if s != vec[i]:
            raise ValueError("vector not in the lattice spanned by the basis")
    out = []
    for v in x:
        if v.denominator != 1:
            raise ValueError("vector not in the integer span of the basis")
        out.append(int(v))
    return out


def lattice_index(b: Sequence[int]) -> int:
    """Index of the rescaled tangent lattice inside the reduced one.

    The coordinatewise rescaling ``phi(w)_i = b_i * w_i`` maps the tangent
    lattice ``T = {w in Z^{p+1} : sum b_i w_i = 0}`` of the weighted simplex
    into the tangent lattice ``T' = {w in Z^{p+1} : sum w_i = 0}`` of the
    reduced simplex.  This function computes ``[T' : phi(T)]`` by an explicit
    integer normal-form computation (basis of ``T`` and of ``T'``, change of
    basis, fraction-free determinant) rather than by the closed-form product
    formula — so it serves as an independent oracle for `simplex_volume`
    through the identity ``simplex_volume(b) * lattice_index(b) == 1/p!``.

    Examples
    --------
    >>> lattice_index((1, 1))
    1
    >>> lattice_index((2, 3))
    6
    """
    b = _validate_multiplicities(b)
    t_basis = kernel_basis(b)
    t_red_basis = kernel_basis((1,) * len(b))
    phi = [tuple(bi * wi for bi, wi in zip(b, v)) for v in t_basis]
    coords = [_solve_integer_coords(t_red_basis, v) for v in phi]
    det = _bareiss_det([list(row) for row in coords])
    if det == 0:
        raise ValueError("rescaled lattice is degenerate")  # unreachable for valid b
    return abs(det)


def chart_volume(b: Sequence[int], drop: int = 0) -> Fraction:
    """Euclidean volume of the chart image of the simplex.

    Dropping coordinate ``w_drop`` identifies the simplex with
    ``{w >= 0 : sum_{i != drop} b_i w_i <= 1}`` in ``R^p``, whose euclidean
    volume is ``1 / (p! * prod_{i != drop} b_i)``.
    """
    b = _validate_multiplicities(b)
    p = len(b) - 1
    if not 0 <= drop < len(b):
        raise ValueError(f"drop index {drop} out of range")
    denom = math.factorial(p) * math.prod(x for i, x in enumerate(b) if i != drop)
    return Fraction(1, denom)


def normalized_density_chart(b: Sequence[int] | ZSimplex, drop: int = 0) -> Fraction:
    """Density of the lattice-normalized Lebesgue measure in an affine chart.

    In the chart that drops coordinate ``w_drop`` (expressing it as
    ``w_drop = b_drop^{-1} (1 - sum_{i != drop} b_i w_i)``), the measure on
    the simplex normalized by the integer tangent lattice is a constant
    multiple of ``|dw_1 ... dw_p|``; this function returns that constant,
    ``gcd(b) / b_drop``.

    The value is pinned by the consistency requirement
    ``normalized_density_chart(b, drop) * chart_volume(b, drop)
    == simplex_volume(b)``.

    Examples
    --------
    >>> normalized_density_chart((1, 1))
    Fraction(1, 1)
    >>> normalized_density_chart((1, 2))
    Fraction(1, 1)
    >>> normalized_density_chart((1, 2), drop=1)
    Fraction(1, 2)
    """
    if isinstance(b, ZSimplex):
        b = b.b
    b = _validate_multiplicities(b)
    if not 0 <= drop < len(b):
        raise ValueError(f"drop index {drop} out of range")
    g = math.gcd(*b) if len(b) > 1 else b[0]
    return Fraction(g, b[drop])


def sublattice_index(generators: Sequence[Sequence[int]], n: int) -> int:
    """Index in ``Z^n`` of the sublattice spanned by integer generators.

    Computes the absolute value of the product of pivots of the integer row
    echelon (Hermite) form.  Raises if the generators do not span a
    finite-index sublattice.
    """
    rows = [list(map(int, g)) for g in generators]
    for r in rows:
        if len(r) != n:
            raise ValueError("generator length mismatch")
    det = 1
    col_rows = rows
    for c in range(n):
        nz = [r for r in col_rows if r[c] != 0]
        rest = [r for r in col_rows if r[c] == 0]
        if not nz:
            raise ValueError("generators do not span a finite-index sublattice")
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[c]))
            head = nz[0]
            reduced = []
            for r in nz[1:]:
                q = r[c] // head[c]
                newr = [x - q * y for x, y in zip(r, head)]
                if newr[c] != 0:
                    reduced.append(newr)
                else:
                    rest.append(newr)
            nz = [head] + reduced
        det *= abs(nz[0][c])
        col_rows = rest
    return det
