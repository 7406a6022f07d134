"""Inductive systems of rational vector spaces over a finite poset.

A system assigns a finite-dimensional rational space to every index and a
linking matrix to every comparable pair; links must compose functorially.
The direct sum over all indices is flattened into a single coordinate
space (blocks in element order), and everything downstream -- member
spaces, relation spaces, colimits, connecting maps, pushforwards -- is
computed there with exact arithmetic.

Colimits are materialized as (ambient block span, relation kernel,
canonical representative) triples: the class of a vector is the residual
left after eliminating the relation subspace's pivots, so class equality
is literal tuple equality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .linalg import (Matrix, Q, Subspace, Vector, matrix_from_json,
                     matrix_to_json, unit_vec, vec, vec_add, vec_is_zero,
                     vec_neg, vec_scale, vec_sub, vector_from_json,
                     vector_to_json, zero_vec)
from .poset import Poset

MAX_FIBER_DIM = 8
MAX_INDEX_SIZE = 16


class NotComparable(ValueError):
    def __init__(self, a: str, b: str):
        super().__init__(f"{a} <= {b} does not hold")
        self.pair = (a, b)


class NotMonotone(ValueError):
    def __init__(self, pair: tuple[str, str]):
        super().__init__(f"map is not monotone at {pair[0]} <= {pair[1]}")
        self.pair = pair


class NotNested(ValueError):
    pass


class InvalidSystem(ValueError):
    pass


class InductiveSystem:
    """Fibers ``dim(g)`` and links ``link(g, g')`` over a poset."""

    def __init__(self, index: Poset, dims: Mapping[str, int],
                 links: Mapping[tuple[str, str], Matrix],
                 check: bool = True):
        self.index = index
        self.dims = {g: int(dims[g]) for g in index.elements}
        self.links = dict(links)
        for g in index.elements:
            key = (g, g)
            if key not in self.links:
                self.links[key] = Matrix.identity(self.dims[g])
        for (a, b) in index.comparable_pairs():
            # Maps into or out of a zero fiber are unique; fill them in.
            if (a, b) not in self.links and 0 in (self.dims[a], self.dims[b]):
                self.links[(a, b)] = Matrix.zeros(self.dims[b], self.dims[a])
        self.offsets: dict[str, int] = {}
        total = 0
        for g in index.elements:
            self.offsets[g] = total
            total += self.dims[g]
        self.total_dim = total
        if check:
            self._validate()

    def _validate(self) -> None:
        if len(self.index.elements) > MAX_INDEX_SIZE:
            raise InvalidSystem(f"index set larger than {MAX_INDEX_SIZE}")
        for g, d in self.dims.items():
            if d < 0 or d > MAX_FIBER_DIM:
                raise InvalidSystem(f"fiber dim {d} at {g} outside [0, {MAX_FIBER_DIM}]")
        for (a, b) in self.index.comparable_pairs():
            m = self.links.get((a, b))
            if m is None:
                raise InvalidSystem(f"missing link for {a} <= {b}")
            if (m.nrows, m.ncols) != (self.dims[b], self.dims[a]):
                raise InvalidSystem(f"link {a}->{b} has shape "
                                    f"{m.nrows}x{m.ncols}, expected "
                                    f"{self.dims[b]}x{self.dims[a]}")
        for g in self.index.elements:
            if not self.links[(g, g)].is_identity():
                raise InvalidSystem(f"link at ({g}, {g}) is not the identity")
        els = self.index.elements
        for a in els:
            for b in els:
                if not self.index.le(a, b):
                    continue
                for c in els:
                    if not self.index.le(b, c):
                        continue
                    lhs = self.links[(b, c)] @ self.links[(a, b)]
                    if lhs != self.links[(a, c)]:
                        raise InvalidSystem(
                            f"links do not compose along {a} <= {b} <= {c}")

    def link(self, a: str, b: str) -> Matrix:
        if not self.index.le(a, b):
            raise NotComparable(a, b)
        return self.links[(a, b)]

    def fiber_basis(self, g: str) -> list[Vector]:
        return [unit_vec(self.dims[g], i) for i in range(self.dims[g])]

    # -- flat coordinates -------------------------------------------------

    def inject_flat(self, g: str, x: Sequence) -> Vector:
        x = vec(x)
        if len(x) != self.dims[g]:
            raise InvalidSystem(f"vector of length {len(x)} into fiber {g} "
                                f"of dim {self.dims[g]}")
        out = [Q(0)] * self.total_dim
        off = self.offsets[g]
        for i, e in enumerate(x):
            out[off + i] = e
        return tuple(out)

    def component(self, flat: Sequence, g: str) -> Vector:
        flat = vec(flat)
        off = self.offsets[g]
        return flat[off:off + self.dims[g]]

    def flat_coords_of(self, subset: Iterable[str]) -> list[int]:
        cols = []
        for g in sorted(set(subset), key=self.index.elements.index):
            off = self.offsets[g]
            cols.extend(range(off, off + self.dims[g]))
        return cols

    def to_json(self) -> dict:
        return {
            "poset": self.index.to_json(),
            "dims": {g: self.dims[g] for g in self.index.elements},
            "links": {f"{a}<={b}": matrix_to_json(self.links[(a, b)])
                      for (a, b) in self.index.comparable_pairs() if a != b},
        }

    @classmethod
    def from_json(cls, data: dict) -> "InductiveSystem":
        index = Poset.from_json(data["poset"])
        links = {}
        for key, m in data.get("links", {}).items():
            a, b = key.split("<=")
            links[(a, b)] = matrix_from_json(m)
        return cls(index, data["dims"], links)


@dataclass(frozen=True)
class SumVector:
    """Element of the direct sum, as a sparse index -> fiber-vector map."""

    parts: tuple[tuple[str, Vector], ...]

    @classmethod
    def make(cls, system: InductiveSystem, parts: Mapping[str, Sequence]) -> "SumVector":
        order = system.index.elements
        items = []
        for g in order:
            if g in parts:
                x = vec(parts[g])
                if len(x) != system.dims[g]:
                    raise InvalidSystem(f"component at {g} has length {len(x)}")
                if not vec_is_zero(x):
                    items.append((g, x))
        return cls(tuple(items))

    @classmethod
    def zero(cls) -> "SumVector":
        return cls(())

    def to_flat(self, system: InductiveSystem) -> Vector:
        out = [Q(0)] * system.total_dim
        for g, x in self.parts:
            off = system.offsets[g]
            for i, e in enumerate(x):
                out[off + i] = e
        return tuple(out)

    @classmethod
    def from_flat(cls, system: InductiveSystem, flat: Sequence) -> "SumVector":
        flat = vec(flat)
        parts = {}
        for g in system.index.elements:
            x = system.component(flat, g)
            if not vec_is_zero(x):
                parts[g] = x
        return cls.make(system, parts)

    def is_zero(self) -> bool:
        return not self.parts

    def support(self) -> tuple[str, ...]:
        return tuple(g for g, _ in self.parts)

    def to_json(self) -> dict:
        return {g: vector_to_json(x) for g, x in self.parts}

    @classmethod
    def from_json(cls, system: InductiveSystem, data: dict) -> "SumVector":
        return cls.make(system, {g: vector_from_json(v) for g, v in data.items()})


def sigma(system: InductiveSystem, x: Sequence, g: str, g2: str) -> SumVector:
    """The relation generator: x at g minus link(g, g2) x at g2."""
    if not system.index.le(g, g2):
        raise NotComparable(g, g2)
    x = vec(x)
    if g == g2:
        return SumVector.zero()
    parts: dict[str, Vector] = {g: x}
    moved = vec_neg(system.link(g, g2).apply(x))
    if g2 in parts:
        parts[g2] = vec_add(parts[g2], moved)
    else:
        parts[g2] = moved
    return SumVector.make(system, parts)


def member_space(system: InductiveSystem, subset: Iterable[str]) -> Subspace:
    """Coordinate subspace supported on the given indices."""
    cols = system.flat_coords_of(subset)
    return Subspace.span(system.total_dim,
                         [unit_vec(system.total_dim, c) for c in cols])


def relation_space(system: InductiveSystem, subset: Iterable[str]) -> Subspace:
    """Span of all sigma(x, g, g') with g <= g' inside the subset."""
    subset = sorted(set(subset), key=system.index.elements.index)
    gens = []
    for a, b in itertools.product(subset, repeat=2):
        if a == b or not system.index.le(a, b):
            continue
        for x in system.fiber_basis(a):
            gens.append(sigma(system, x, a, b).to_flat(system))
    return Subspace.span(system.total_dim, gens)


class ColimitPresentation:
    """Quotient presentation of the colimit of a system restricted to a subset.

    Classes are canonical coset representatives in the flat space; the
    quotient's own coordinates are the flat columns in the subset's
    blocks that survive as non-pivots of the relation subspace.
    """

    def __init__(self, system: InductiveSystem, subset: Iterable[str]):
        self.system = system
        self.members = tuple(sorted(set(subset), key=system.index.elements.index))
        for g in self.members:
            if g not in system.index.elements:
                raise InvalidSystem(f"unknown index {g}")
        self.member = member_space(system, self.members)
        self.kernel = relation_space(system, self.members)
        member_cols = set(system.flat_coords_of(self.members))
        self.free_cols: tuple[int, ...] = tuple(
            c for c in sorted(member_cols) if c not in self.kernel.pivots)
        self.dim = len(self.free_cols)

    def contains_flat(self, flat: Sequence) -> bool:
        return self.member.contains(flat)

    def rep_of_flat(self, flat: Sequence) -> Vector:
        """Canonical representative of the class of a member-space vector."""
        flat = vec(flat)
        if not self.member.contains(flat):
            raise InvalidSystem("vector not supported on the subset")
        return self.kernel.reduce(flat)

    def coords_of_flat(self, flat: Sequence) -> Vector:
        rep = self.rep_of_flat(flat)
        return tuple(rep[c] for c in self.free_cols)

    def flat_of_coords(self, coords: Sequence) -> Vector:
        coords = vec(coords)
        if len(coords) != self.dim:
            raise InvalidSystem(f"expected {self.dim} coordinates")
        out = [Q(0)] * self.system.total_dim
        for c, e in zip(self.free_cols, coords):
            out[c] = e
        return tuple(out)

    def class_of(self, g: str, x: Sequence) -> Vector:
        """Coordinates of the canonical image of x in the colimit."""
        if g not in self.members:
            raise InvalidSystem(f"{g} is not in the restriction subset")
        return self.coords_of_flat(self.system.inject_flat(g, x))


def colimit(system: InductiveSystem, subset: Iterable[str]) -> ColimitPresentation:
    return ColimitPresentation(system, subset)


def connecting_map(system: InductiveSystem,
                   small: ColimitPresentation,
                   large: ColimitPresentation,
                   check: bool = True) -> Matrix:
    """Induced map between colimit presentations for nested subsets."""
    if not set(small.members) <= set(large.members):
        raise NotNested(f"{small.members} is not contained in {large.members}")
    cols = []
    for c in small.free_cols:
        flat = unit_vec(system.total_dim, c)
        cols.append(large.coords_of_flat(flat))
    out = Matrix.from_columns(cols) if cols else Matrix.zeros(large.dim, 0)
    if out.nrows != large.dim:
        out = Matrix.zeros(large.dim, small.dim)
    if check:
        # tau . j_I == j_J on every basis vector of the small member space.
        for g in small.members:
            for x in system.fiber_basis(g):
                flat = system.inject_flat(g, x)
                via_small = out.apply(small.coords_of_flat(flat))
                direct = large.coords_of_flat(flat)
                if via_small != direct:
                    raise InvalidSystem("connecting map fails the j-compatibility")
    return out


class SystemMorphism:
    """Fiberwise linear maps commuting with the links of both systems."""

    def __init__(self, source: InductiveSystem, target: InductiveSystem,
                 maps: Mapping[str, Matrix], check: bool = True):
        if source.index.elements != target.index.elements:
            raise InvalidSystem("morphism requires a shared index set")
        self.source = source
        self.target = target
        self.maps = {g: maps[g] for g in source.index.elements}
        if check:
            self._validate()

    def _validate(self) -> None:
        for g in self.source.index.elements:
            m = self.maps[g]
            if (m.nrows, m.ncols) != (self.target.dims[g], self.source.dims[g]):
                raise InvalidSystem(f"map at {g} has wrong shape")
        for (a, b) in self.source.index.comparable_pairs():
            if a == b:
                continue
            lhs = self.maps[b] @ self.source.link(a, b)
            rhs = self.target.link(a, b) @ self.maps[a]
            if lhs != rhs:
                raise InvalidSystem(f"square at {a} <= {b} does not commute")

    def apply_flat(self, flat: Sequence) -> Vector:
        """The induced map on direct sums, blockwise."""
        flat = vec(flat)
        out = [Q(0)] * self.target.total_dim
        for g in self.source.index.elements:
            x = self.source.component(flat, g)
            if vec_is_zero(x):
                continue
            y = self.maps[g].apply(x)
            off = self.target.offsets[g]
            for i, e in enumerate(y):
                out[off + i] += e
        return tuple(out)

    def apply_sum(self, sv: SumVector) -> SumVector:
        return SumVector.from_flat(self.target,
                                   self.apply_flat(sv.to_flat(self.source)))

    def to_json(self) -> dict:
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "maps": {g: matrix_to_json(self.maps[g])
                     for g in self.source.index.elements},
        }

    @classmethod
    def from_json(cls, data: dict) -> "SystemMorphism":
        src = InductiveSystem.from_json(data["source"])
        tgt = InductiveSystem.from_json(data["target"])
        maps = {g: matrix_from_json(m) for g, m in data["maps"].items()}
        return cls(src, tgt, maps)


def identity_morphism(system: InductiveSystem) -> SystemMorphism:
    return SystemMorphism(system, system,
                          {g: Matrix.identity(system.dims[g])
                           for g in system.index.elements})


def validate_monotone(gamma: Poset, delta: Poset, lam: Mapping[str, str]) -> None:
    for g in gamma.elements:
        if lam[g] not in delta.elements:
            raise NotMonotone((g, g))
    for (a, b) in gamma.comparable_pairs():
        if not delta.le(lam[a], lam[b]):
            raise NotMonotone((a, b))


def fiber_subsets(gamma: Poset, delta: Poset,
                  lam: Mapping[str, str]) -> dict[str, tuple[str, ...]]:
    """Gamma_d = {g : lam(g) <= d} for every d in Delta."""
    out = {}
    for d in delta.elements:
        out[d] = tuple(g for g in gamma.elements if delta.le(lam[g], d))
    return out


@dataclass
class Pushforward:
    """The induced system over Delta, with its fiber presentations."""

    delta: Poset
    fibers: dict[str, ColimitPresentation]
    system: InductiveSystem


def pushforward(system: InductiveSystem, lam: Mapping[str, str],
                delta: Poset) -> Pushforward:
    """Fibers are colimits over the sublevel sets, links the connecting maps."""
    validate_monotone(system.index, delta, lam)
    subsets = fiber_subsets(system.index, delta, lam)
    fibers = {d: ColimitPresentation(system, subsets[d]) for d in delta.elements}
    dims = {d: fibers[d].dim for d in delta.elements}
    links = {}
    for (a, b) in delta.comparable_pairs():
        if a == b:
            continue
        links[(a, b)] = connecting_map(system, fibers[a], fibers[b])
    pushed = InductiveSystem(delta, dims, links)
    return Pushforward(delta, fibers, pushed)


def pushforward_morphism(l: SystemMorphism, lam: Mapping[str, str],
                         delta: Poset,
                         px: Optional[Pushforward] = None,
                         py: Optional[Pushforward] = None,
                         check: bool = True) -> SystemMorphism:
    """The induced morphism between pushforward systems.

    Verifies the defining identity on a basis: applying the induced map to
    the class of x equals the class of Lx, fiber by fiber.
    """
    if px is None:
        px = pushforward(l.source, lam, delta)
    if py is None:
        py = pushforward(l.target, lam, delta)
    maps = {}
    for d in delta.elements:
        fx, fy = px.fibers[d], py.fibers[d]
        cols = []
        for c in fx.free_cols:
            flat = unit_vec(l.source.total_dim, c)
            cols.append(fy.coords_of_flat(l.apply_flat(flat)))
        m = Matrix.from_columns(cols) if cols else Matrix.zeros(fy.dim, 0)
        if m.nrows != fy.dim:
            m = Matrix.zeros(fy.dim, fx.dim)
        maps[d] = m
    induced = SystemMorphism(px.system, py.system, maps, check=check)
    if check:
        for d in delta.elements:
            fx, fy = px.fibers[d], py.fibers[d]
            for g in fx.members:
                for x in l.source.fiber_basis(g):
                    flat = l.source.inject_flat(g, x)
                    lhs = maps[d].apply(fx.coords_of_flat(flat))
                    rhs = fy.coords_of_flat(l.apply_flat(flat))
                    if lhs != rhs:
                        raise InvalidSystem(
                            "induced morphism fails the class identity")
    return induced


def morphism_flat_matrix(l: SystemMorphism) -> Matrix:
    """The block-diagonal matrix of the induced map on direct sums."""
    cols = []
    for c in range(l.source.total_dim):
        cols.append(l.apply_flat(unit_vec(l.source.total_dim, c)))
    if not cols:
        return Matrix.zeros(l.target.total_dim, 0)
    return Matrix.from_columns(cols)
