"""Exact rational linear programming.

A small two-phase primal simplex over Fraction arithmetic, Bland's rule
throughout, so termination is guaranteed and results are exact.  Problems
are given in standard form

    minimize c.x  subject to  A x = b,  x >= 0,

and helpers convert free variables and inequality rows.  Sizes stay tiny
(cone pieces in dimension <= 3 with a handful of generators), so the
dense tableau is fine.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

Q = Fraction


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible", "unbounded"
    x: Optional[tuple[Q, ...]] = None
    objective: Optional[Q] = None


def _pivot(tableau: list[list[Q]], basis: list[int], row: int, col: int) -> None:
    piv = tableau[row][col]
    tableau[row] = [e / piv for e in tableau[row]]
    for i, r in enumerate(tableau):
        if i != row and r[col] != 0:
            f = r[col]
            tableau[i] = [a - f * b for a, b in zip(r, tableau[row])]
    basis[row] = col


def _simplex(tableau: list[list[Q]], basis: list[int], ncols: int) -> str:
    """Run Bland-rule simplex on a tableau whose last row is the objective."""
    m = len(tableau) - 1
    while True:
        obj = tableau[m]
        col = next((j for j in range(ncols) if obj[j] < 0), None)
        if col is None:
            return "optimal"
        best_row = None
        best_ratio = None
        for i in range(m):
            a = tableau[i][col]
            if a > 0:
                ratio = tableau[i][ncols] / a
                if (best_ratio is None or ratio < best_ratio
                        or (ratio == best_ratio and basis[i] < basis[best_row])):
                    best_ratio = ratio
                    best_row = i
        if best_row is None:
            return "unbounded"
        _pivot(tableau, basis, best_row, col)


def solve_standard(a: Sequence[Sequence], b: Sequence, c: Sequence) -> LPResult:
    """minimize c.x s.t. A x = b, x >= 0, all data rational."""
    a = [[Q(e) for e in row] for row in a]
    b = [Q(e) for e in b]
    c = [Q(e) for e in c]
    m = len(a)
    n = len(c)
    for i in range(m):
        if b[i] < 0:
            a[i] = [-e for e in a[i]]
            b[i] = -b[i]

    # Phase 1: artificial variables, minimize their sum.
    ncols = n + m
    tableau = [a[i] + [Q(1) if j == i else Q(0) for j in range(m)] + [b[i]]
               for i in range(m)]
    basis = [n + i for i in range(m)]
    obj = [Q(0)] * (ncols + 1)
    for i in range(m):
        for j in range(ncols + 1):
            obj[j] -= tableau[i][j]
    for j in range(n, ncols):
        obj[j] += Q(1)
    tableau.append(obj)
    _simplex(tableau, basis, ncols)  # phase 1 is bounded below by zero
    if tableau[m][ncols] != 0:
        return LPResult("infeasible")
    # Drive artificials out of the basis where possible.
    for i in range(m):
        if basis[i] >= n:
            col = next((j for j in range(n) if tableau[i][j] != 0), None)
            if col is not None:
                _pivot(tableau, basis, i, col)

    # Phase 2 on the original objective, artificial columns frozen.
    obj2 = [Q(e) for e in c] + [Q(0)] * (m + 1)
    for i in range(m):
        j = basis[i]
        if j < n and obj2[j] != 0:
            f = obj2[j]
            obj2 = [x - f * y for x, y in zip(obj2, tableau[i])]
    tableau[m] = obj2
    # Entering columns are restricted to j < n, so artificials never return.
    status = _simplex(tableau, basis, n)
    if status == "unbounded":
        return LPResult("unbounded")
    x = [Q(0)] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = tableau[i][ncols]
    val = sum((ci * xi for ci, xi in zip(c, x)), Q(0))
    return LPResult("optimal", tuple(x), val)


def feasible_standard(a: Sequence[Sequence], b: Sequence) -> Optional[tuple[Q, ...]]:
    """A feasible point of A x = b, x >= 0, or None."""
    n = len(a[0]) if a else 0
    res = solve_standard(a, b, [Q(0)] * n)
    return res.x if res.status == "optimal" else None


@dataclass
class IneqProblem:
    """minimize c.x with rows A_ub x <= b_ub and A_eq x = b_eq, x free.

    Converted to standard form by splitting x into positive and negative
    parts and adding one slack per inequality row.
    """

    n: int
    a_ub: list[list[Q]]
    b_ub: list[Q]
    a_eq: list[list[Q]]
    b_eq: list[Q]
    c: list[Q]

    def __init__(self, n: int):
        self.n = n
        self.a_ub, self.b_ub = [], []
        self.a_eq, self.b_eq = [], []
        self.c = [Q(0)] * n

    def add_ub(self, row: Sequence, rhs) -> None:
        self.a_ub.append([Q(e) for e in row])
        self.b_ub.append(Q(rhs))

    def add_eq(self, row: Sequence, rhs) -> None:
        self.a_eq.append([Q(e) for e in row])
        self.b_eq.append(Q(rhs))

    def set_objective(self, c: Sequence) -> None:
        self.c = [Q(e) for e in c]

    def solve(self) -> LPResult:
        n = self.n
        nslack = len(self.a_ub)
        width = 2 * n + nslack
        rows, rhs = [], []
        for i, row in enumerate(self.a_ub):
            r = [Q(e) for e in row] + [-Q(e) for e in row] + [Q(0)] * nslack
            r[2 * n + i] = Q(1)
            rows.append(r)
            rhs.append(self.b_ub[i])
        for row, b in zip(self.a_eq, self.b_eq):
            rows.append([Q(e) for e in row] + [-Q(e) for e in row] + [Q(0)] * nslack)
            rhs.append(b)
        c = self.c + [-e for e in self.c] + [Q(0)] * nslack
        res = solve_standard(rows, rhs, c)
        if res.status != "optimal":
            return res
        x = tuple(res.x[i] - res.x[n + i] for i in range(n))
        return LPResult("optimal", x, res.objective)
