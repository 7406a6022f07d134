"""Exact linear algebra over the rationals.

Vectors are tuples of :class:`fractions.Fraction`; matrices are immutable
row-major grids of them.  Every operation in this module is exact: there
is no tolerance anywhere and none is needed, because ambient dimensions
stay at desk scale (<= 32 or so) and dense Gaussian elimination with
exact pivoting is always cheap there.

Subspaces are kept in reduced row echelon form, which is a canonical
representative: two subspaces are equal iff their stored bases are equal
tuple-for-tuple.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence

Q = Fraction

Vector = tuple[Q, ...]


class DimensionMismatch(ValueError):
    """Operands have inconsistent dimensions."""


def vec(entries: Iterable) -> Vector:
    return tuple(Q(e) for e in entries)


def zero_vec(n: int) -> Vector:
    return (Q(0),) * n


def unit_vec(n: int, i: int) -> Vector:
    return tuple(Q(1) if j == i else Q(0) for j in range(n))


def vec_add(u: Vector, v: Vector) -> Vector:
    if len(u) != len(v):
        raise DimensionMismatch(f"vector lengths {len(u)} != {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u: Vector, v: Vector) -> Vector:
    if len(u) != len(v):
        raise DimensionMismatch(f"vector lengths {len(u)} != {len(v)}")
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, v: Vector) -> Vector:
    c = Q(c)
    return tuple(c * a for a in v)


def vec_neg(v: Vector) -> Vector:
    return tuple(-a for a in v)


def vec_is_zero(v: Vector) -> bool:
    return all(a == 0 for a in v)


def vec_dot(u: Vector, v: Vector) -> Q:
    if len(u) != len(v):
        raise DimensionMismatch(f"vector lengths {len(u)} != {len(v)}")
    return sum((a * b for a, b in zip(u, v)), Q(0))


class Matrix:
    """Immutable dense rational matrix."""

    __slots__ = ("nrows", "ncols", "data")

    def __init__(self, data: Sequence[Sequence]) -> None:
        rows = tuple(tuple(Q(e) for e in row) for row in data)
        self.data: tuple[Vector, ...] = rows
        self.nrows = len(rows)
        self.ncols = len(rows[0]) if rows else 0
        for row in rows:
            if len(row) != self.ncols:
                raise DimensionMismatch("ragged matrix rows")

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "Matrix":
        return cls([[0] * ncols for _ in range(nrows)])

    @classmethod
    def from_columns(cls, cols: Sequence[Vector]) -> "Matrix":
        if not cols:
            return cls.zeros(0, 0)
        n = len(cols[0])
        return cls([[cols[j][i] for j in range(len(cols))] for i in range(n)])

    def row(self, i: int) -> Vector:
        return self.data[i]

    def col(self, j: int) -> Vector:
        return tuple(row[j] for row in self.data)

    def columns(self) -> list[Vector]:
        return [self.col(j) for j in range(self.ncols)]

    def apply(self, v: Vector) -> Vector:
        """Matrix times column vector."""
        if len(v) != self.ncols:
            raise DimensionMismatch(f"matrix has {self.ncols} cols, vector {len(v)}")
        return tuple(vec_dot(row, v) for row in self.data)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise DimensionMismatch(f"{self.ncols} != {other.nrows}")
        ot = other.transpose()
        return Matrix([[vec_dot(r, c) for c in ot.data] for r in self.data])

    def transpose(self) -> "Matrix":
        return Matrix([[self.data[i][j] for i in range(self.nrows)]
                       for j in range(self.ncols)])

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.nrows != other.nrows:
            raise DimensionMismatch(f"{self.nrows} != {other.nrows}")
        return Matrix([self.data[i] + other.data[i] for i in range(self.nrows)])

    def scale(self, c) -> "Matrix":
        c = Q(c)
        return Matrix([[c * e for e in row] for row in self.data])

    def add(self, other: "Matrix") -> "Matrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise DimensionMismatch("matrix shapes differ")
        return Matrix([vec_add(r, s) for r, s in zip(self.data, other.data)])

    def rank(self) -> int:
        return len(rref([list(r) for r in self.data])[1])

    def is_identity(self) -> bool:
        return self.nrows == self.ncols and all(
            self.data[i][j] == (1 if i == j else 0)
            for i in range(self.nrows) for j in range(self.ncols))

    def is_zero(self) -> bool:
        return all(e == 0 for row in self.data for e in row)

    def __eq__(self, other) -> bool:
        return isinstance(other, Matrix) and self.data == other.data

    def __hash__(self) -> int:
        return hash(self.data)

    def __repr__(self) -> str:
        return f"Matrix({[list(map(str, r)) for r in self.data]})"


def rref(rows: list[list[Q]]) -> tuple[list[list[Q]], list[int]]:
    """Reduced row echelon form (in place on a copy) and pivot columns."""
    rows = [list(r) for r in rows]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(rows)):
            if rows[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][c]
        if pv != 1:
            rows[r] = [e / pv for e in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


class Subspace:
    """A linear subspace of Q^n stored by its canonical RREF basis."""

    __slots__ = ("ambient", "basis", "pivots")

    def __init__(self, ambient: int, basis: Sequence[Vector], pivots: Sequence[int]):
        self.ambient = ambient
        self.basis: tuple[Vector, ...] = tuple(tuple(v) for v in basis)
        self.pivots: tuple[int, ...] = tuple(pivots)

    @classmethod
    def span(cls, ambient: int, vectors: Iterable[Sequence]) -> "Subspace":
        rows = []
        for v in vectors:
            v = vec(v)
            if len(v) != ambient:
                raise DimensionMismatch(f"vector length {len(v)} != ambient {ambient}")
            if not vec_is_zero(v):
                rows.append(list(v))
        basis, pivots = rref(rows)
        return cls(ambient, [tuple(r) for r in basis], pivots)

    @classmethod
    def zero(cls, ambient: int) -> "Subspace":
        return cls(ambient, [], [])

    @classmethod
    def full(cls, ambient: int) -> "Subspace":
        return cls.span(ambient, [unit_vec(ambient, i) for i in range(ambient)])

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reduce(self, v: Sequence) -> Vector:
        """Residual of v after eliminating this subspace's pivot coordinates.

        The residual is the canonical coset representative of v modulo the
        subspace; it vanishes iff v lies in the subspace.
        """
        v = list(vec(v))
        if len(v) != self.ambient:
            raise DimensionMismatch(f"vector length {len(v)} != ambient {self.ambient}")
        for row, p in zip(self.basis, self.pivots):
            f = v[p]
            if f != 0:
                v = [a - f * b for a, b in zip(v, row)]
        return tuple(v)

    def coefficients_of(self, v: Sequence) -> Optional[Vector]:
        """Coefficients of v in this basis, or None if v is not a member."""
        v = vec(v)
        coeffs = []
        w = list(v)
        for row, p in zip(self.basis, self.pivots):
            f = w[p]
            coeffs.append(f)
            if f != 0:
                w = [a - f * b for a, b in zip(w, row)]
        if not vec_is_zero(tuple(w)):
            return None
        return tuple(coeffs)

    def contains(self, v: Sequence) -> bool:
        return vec_is_zero(self.reduce(v))

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def sum(self, other: "Subspace") -> "Subspace":
        if self.ambient != other.ambient:
            raise DimensionMismatch("ambient dimensions differ")
        return Subspace.span(self.ambient, list(self.basis) + list(other.basis))

    def intersect(self, other: "Subspace") -> "Subspace":
        """Zassenhaus-free intersection via the kernel of [U^T | -V^T]."""
        if self.ambient != other.ambient:
            raise DimensionMismatch("ambient dimensions differ")
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient)
        m, n = self.dim, other.dim
        # Columns are (a, b) coefficient vectors with a.U = b.V.
        stacked = Matrix([[self.basis[j][i] for j in range(m)]
                          + [-other.basis[j][i] for j in range(n)]
                          for i in range(self.ambient)])
        ker = nullspace(stacked)
        vectors = []
        for coeff in ker.basis:
            w = zero_vec(self.ambient)
            for j in range(m):
                w = vec_add(w, vec_scale(coeff[j], self.basis[j]))
            vectors.append(w)
        return Subspace.span(self.ambient, vectors)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Subspace) and self.ambient == other.ambient
                and self.basis == other.basis)

    def __hash__(self) -> int:
        return hash((self.ambient, self.basis))

    def __repr__(self) -> str:
        return f"Subspace(ambient={self.ambient}, dim={self.dim})"


def solve(a: Matrix, b: Sequence) -> Optional[Vector]:
    """One exact solution of A x = b, or None.

    The solution returned is canonical: RREF back-substitution with all
    free variables pinned to zero, so repeated calls agree bit for bit.
    """
    b = vec(b)
    if len(b) != a.nrows:
        raise DimensionMismatch(f"matrix has {a.nrows} rows, rhs {len(b)}")
    aug = [list(a.data[i]) + [b[i]] for i in range(a.nrows)]
    red, pivots = rref(aug)
    x = [Q(0)] * a.ncols
    for row, p in zip(red, pivots):
        if p == a.ncols:
            return None  # inconsistent: pivot in the augmented column
        x[p] = row[a.ncols]
    return tuple(x)


def nullspace(a: Matrix) -> Subspace:
    """Kernel of A as a subspace of Q^(ncols)."""
    red, pivots = rref([list(r) for r in a.data])
    free = [c for c in range(a.ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Q(0)] * a.ncols
        v[f] = Q(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return Subspace.span(a.ncols, basis)


def column_space(a: Matrix) -> Subspace:
    return Subspace.span(a.nrows, a.columns())


def preimage(a: Matrix, s: Subspace) -> Subspace:
    """The subspace {x : A x in S} of Q^(ncols)."""
    if s.ambient != a.nrows:
        raise DimensionMismatch(f"subspace ambient {s.ambient} != rows {a.nrows}")
    if s.dim == 0:
        return nullspace(a)
    # Solve A x - B^T c = 0 jointly and project onto the x block.
    bt = Matrix.from_columns(list(s.basis))
    joint = a.hstack(bt.scale(-1))
    ker = nullspace(joint)
    return Subspace.span(a.ncols, [v[:a.ncols] for v in ker.basis])


def quotient_dim(ambient: int, s: Subspace) -> int:
    if s.ambient != ambient:
        raise DimensionMismatch(f"subspace ambient {s.ambient} != {ambient}")
    return ambient - s.dim


def matrix_from_json(data) -> Matrix:
    return Matrix([[Q(e) for e in row] for row in data])


def matrix_to_json(m: Matrix) -> list[list[str]]:
    return [[str(e) for e in row] for row in m.data]


def vector_from_json(data) -> Vector:
    return vec(Q(e) for e in data)


def vector_to_json(v: Vector) -> list[str]:
    return [str(e) for e in v]
