"""Finite posets, quasi-lattices, and the order-theoretic sets they carry.

A quasi-lattice is a poset in which every two-element subset has an
infimum and every bounded-above two-element subset has a supremum.  All
validation here is exhaustive enumeration over the stored relation table,
which is the point: sizes are capped at 64 elements so cubic checks stay
cheap and every verdict comes with a witness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence


class NotAPoset(ValueError):
    """The relation table violates a poset axiom; carries a witness."""

    def __init__(self, axiom: str, witness: tuple):
        self.axiom = axiom
        self.witness = witness
        super().__init__(f"poset axiom {axiom} fails at {witness}")


class NotAQuasiLattice(ValueError):
    """A pair lacks an infimum, or a bounded pair lacks a supremum."""

    def __init__(self, kind: str, pair: tuple):
        self.kind = kind  # "no_infimum" or "no_supremum"
        self.pair = pair
        super().__init__(f"{kind} for pair {pair}")


class JNotMeetClosed(ValueError):
    def __init__(self, witness: tuple):
        self.witness = witness
        super().__init__(f"set not meet-closed: {witness[0]} ^ {witness[1]} = "
                         f"{witness[2]} is missing")


MAX_ELEMENTS = 64


@dataclass(frozen=True)
class Poset:
    """Finite poset given by an explicit <=-table.

    ``leq[i][j]`` is True iff ``elements[i] <= elements[j]``.
    """

    elements: tuple[str, ...]
    leq: tuple[tuple[bool, ...], ...]

    def __post_init__(self):
        if len(self.elements) > MAX_ELEMENTS:
            raise ValueError(f"poset too large ({len(self.elements)} > {MAX_ELEMENTS})")
        if len(set(self.elements)) != len(self.elements):
            raise ValueError("duplicate element names")

    @classmethod
    def from_relation(cls, elements: Sequence[str],
                      leq: Sequence[Sequence[bool]]) -> "Poset":
        """Build and validate a poset, naming the first failing witness."""
        elements = tuple(str(e) for e in elements)
        n = len(elements)
        table = tuple(tuple(bool(x) for x in row) for row in leq)
        if len(table) != n or any(len(row) != n for row in table):
            raise ValueError("leq table shape does not match element count")
        p = cls(elements, table)
        p.validate()
        return p

    def validate(self) -> None:
        n = len(self.elements)
        t = self.leq
        for i in range(n):
            if not t[i][i]:
                raise NotAPoset("reflexivity", (self.elements[i],))
        for i in range(n):
            for j in range(n):
                if i != j and t[i][j] and t[j][i]:
                    raise NotAPoset("antisymmetry",
                                    (self.elements[i], self.elements[j]))
        for i in range(n):
            for j in range(n):
                if not t[i][j]:
                    continue
                for k in range(n):
                    if t[j][k] and not t[i][k]:
                        raise NotAPoset(
                            "transitivity",
                            (self.elements[i], self.elements[j], self.elements[k]))

    # -- small accessors -------------------------------------------------

    def index(self, name: str) -> int:
        return self.elements.index(name)

    def le(self, a: str, b: str) -> bool:
        return self.leq[self.index(a)][self.index(b)]

    def comparable_pairs(self) -> list[tuple[str, str]]:
        """All ordered pairs (a, b) with a <= b, in element order."""
        out = []
        for i, a in enumerate(self.elements):
            for j, b in enumerate(self.elements):
                if self.leq[i][j]:
                    out.append((a, b))
        return out

    def down_set(self, a: str) -> frozenset:
        i = self.index(a)
        return frozenset(b for j, b in enumerate(self.elements) if self.leq[j][i])

    def down_closure(self, subset: Iterable[str]) -> frozenset:
        out = set()
        for a in subset:
            out |= self.down_set(a)
        return frozenset(out)

    def to_json(self) -> dict:
        return {"elements": list(self.elements),
                "leq": [[bool(x) for x in row] for row in self.leq]}

    @classmethod
    def from_json(cls, data: dict) -> "Poset":
        return cls.from_relation(data["elements"], data["leq"])


@dataclass(frozen=True)
class QuasiLattice:
    """A poset with total meet table and partial join table.

    ``join[i][j]`` is None exactly when the pair has no upper bound.
    """

    poset: Poset
    meet: tuple[tuple[int, ...], ...]
    join: tuple[tuple[Optional[int], ...], ...]

    @property
    def elements(self) -> tuple[str, ...]:
        return self.poset.elements

    def le(self, a: str, b: str) -> bool:
        return self.poset.le(a, b)

    def meet_of(self, a: str, b: str) -> str:
        p = self.poset
        return p.elements[self.meet[p.index(a)][p.index(b)]]

    def join_of(self, a: str, b: str) -> Optional[str]:
        p = self.poset
        j = self.join[p.index(a)][p.index(b)]
        return None if j is None else p.elements[j]

    def bounded_above(self, a: str, b: str) -> bool:
        p = self.poset
        return self.join[p.index(a)][p.index(b)] is not None

    def meet_all(self, subset: Iterable[str]) -> str:
        items = list(subset)
        if not items:
            raise ValueError("meet of empty set is undefined")
        acc = items[0]
        for x in items[1:]:
            acc = self.meet_of(acc, x)
        return acc

    def join_all(self, subset: Iterable[str]) -> Optional[str]:
        items = list(subset)
        if not items:
            raise ValueError("join of empty set is undefined")
        acc = items[0]
        for x in items[1:]:
            acc = self.join_of(acc, x)
            if acc is None:
                return None
        return acc


def validate_quasi_lattice(p: Poset) -> QuasiLattice:
    """Compute meet/join tables or raise NotAQuasiLattice with the first bad pair."""
    n = len(p.elements)
    t = p.leq
    meet: list[list[int]] = [[0] * n for _ in range(n)]
    join: list[list[Optional[int]]] = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            lower = [k for k in range(n) if t[k][i] and t[k][j]]
            glb = [k for k in lower if all(t[m][k] for m in lower)]
            if not glb:
                raise NotAQuasiLattice("no_infimum", (p.elements[i], p.elements[j]))
            meet[i][j] = glb[0]
            upper = [k for k in range(n) if t[i][k] and t[j][k]]
            if upper:
                lub = [k for k in upper if all(t[k][m] for m in upper)]
                if not lub:
                    raise NotAQuasiLattice("no_supremum",
                                           (p.elements[i], p.elements[j]))
                join[i][j] = lub[0]
    return QuasiLattice(p, tuple(tuple(r) for r in meet),
                        tuple(tuple(r) for r in join))


def is_lattice(q: QuasiLattice) -> bool:
    """True iff every pair is bounded above (so every join is defined)."""
    return all(j is not None for row in q.join for j in row)


def is_distributive(q: QuasiLattice) -> tuple[bool, Optional[tuple[str, str, str]]]:
    """Check a ^ (b v c) == (a ^ b) v (a ^ c) over all bounded-above pairs b, c.

    Returns (True, None) or (False, witness_triple).
    """
    els = q.elements
    for a in els:
        for b, c in itertools.product(els, repeat=2):
            bc = q.join_of(b, c)
            if bc is None:
                continue
            lhs = q.meet_of(a, bc)
            # a^b and a^c are bounded above by b v c, so their join exists.
            rhs = q.join_of(q.meet_of(a, b), q.meet_of(a, c))
            if rhs is None or lhs != rhs:
                return False, (a, b, c)
    return True, None


def is_hereditary(p: Poset, subset: Iterable[str]) -> bool:
    """True iff the subset is downward closed."""
    s = set(subset)
    for a in s:
        for b in p.down_set(a):
            if b not in s:
                return False
    return True


def is_meet_closed(q: QuasiLattice, subset: Iterable[str]) -> bool:
    s = set(subset)
    for a in s:
        for b in s:
            if q.meet_of(a, b) not in s:
                return False
    return True


def require_meet_closed(q: QuasiLattice, subset: Iterable[str]) -> None:
    s = set(subset)
    for a in s:
        for b in s:
            m = q.meet_of(a, b)
            if m not in s:
                raise JNotMeetClosed((a, b, m))


def meet_closure(q: QuasiLattice, subset: Iterable[str]) -> frozenset:
    """Smallest meet-closed superset: infima of all nonempty subsets.

    Computed as the fixpoint of pairwise meets, which coincides with the
    set of subset-infima because binary meet is associative, commutative
    and idempotent.
    """
    out = set(subset)
    changed = True
    while changed:
        changed = False
        for a, b in itertools.combinations(sorted(out), 2):
            m = q.meet_of(a, b)
            if m not in out:
                out.add(m)
                changed = True
    return frozenset(out)


@dataclass(frozen=True)
class OrderStatistics:
    """Per-element counts k and the descending chain C_1 >= C_2 >= ...

    k(g) counts the members of J that dominate g; C_n collects the
    members with k >= n.  For a finite meet-closed J the last nonempty
    stage is C_{|J|} = {inf J}.
    """

    k: dict[str, int]
    chain: tuple[frozenset, ...]

    def stage(self, n: int) -> frozenset:
        if n < 1:
            raise ValueError("stages are indexed from 1")
        return self.chain[n - 1] if n <= len(self.chain) else frozenset()


def order_statistics(q: QuasiLattice, j_set: Iterable[str]) -> OrderStatistics:
    members = sorted(set(j_set), key=q.elements.index)
    require_meet_closed(q, members)
    k = {}
    for g in members:
        k[g] = sum(1 for h in members if q.le(g, h))
    size = len(members)
    chain = tuple(frozenset(g for g in members if k[g] >= n)
                  for n in range(1, size + 1))
    if members:
        bottom = q.meet_all(members)
        assert chain[-1] == frozenset({bottom}), "C_{|J|} must be the infimum"
    return OrderStatistics(k, chain)
