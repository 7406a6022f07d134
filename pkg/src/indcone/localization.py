"""Prelocalizability and regularity checkers, plus model generators.

The three prelocalizability axioms are decided by exact linear algebra:

* (I)   every link is injective (full column rank);
* (II)  for every bounded-above pair the combined map out of the two
        fibers covers the fiber at the join;
* (III) for every pair with a common upper bound, the equalizer of the
        two links into it equals the image of the diagonal out of the
        meet fiber.

Failures always carry witnesses that falsify the axiom when re-checked
independently.  The module also builds the standard positive models
(free models over meet/bounded-union closed set families, where fibers
are free on the member points and links are coordinate inclusions) and
counterexamples that break exactly one axiom.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .linalg import (Matrix, Q, Subspace, Vector, column_space, nullspace,
                     preimage, unit_vec, vec, vec_is_zero)
from .poset import Poset, QuasiLattice, validate_quasi_lattice
from .systems import InductiveSystem, SystemMorphism


class NotIntersectionClosed(ValueError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"family misses the intersection {witness}")


class NotUnionClosed(ValueError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"family misses the bounded union {witness}")


@dataclass
class AxiomVerdict:
    holds: bool
    witnesses: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"holds": self.holds, "witnesses": self.witnesses}


@dataclass
class PrelocReport:
    """Verdicts for axioms (I)-(III) with witnesses for every failure."""

    injective: AxiomVerdict
    covering: AxiomVerdict
    gluing: AxiomVerdict

    @property
    def prelocalizable(self) -> bool:
        return self.injective.holds and self.covering.holds and self.gluing.holds

    def to_json(self) -> dict:
        return {
            "I": self.injective.to_json(),
            "II": self.covering.to_json(),
            "III": self.gluing.to_json(),
            "prelocalizable": self.prelocalizable,
        }


def check_prelocalizable(system: InductiveSystem,
                         quasi: QuasiLattice) -> PrelocReport:
    if quasi.poset.elements != system.index.elements:
        raise ValueError("quasi-lattice does not index the system")
    injective = _check_injective(system)
    covering = _check_covering(system, quasi)
    gluing = _check_gluing(system, quasi, links_injective=injective.holds)
    return PrelocReport(injective, covering, gluing)


def _check_injective(system: InductiveSystem) -> AxiomVerdict:
    verdict = AxiomVerdict(True)
    for (a, b) in system.index.comparable_pairs():
        if a == b:
            continue
        m = system.link(a, b)
        if m.ncols == 0:
            continue
        ker = nullspace(m)
        if ker.dim > 0:
            verdict.holds = False
            verdict.witnesses.append(
                {"pair": [a, b], "kernel_vector": [str(e) for e in ker.basis[0]]})
    return verdict


def _check_covering(system: InductiveSystem, quasi: QuasiLattice) -> AxiomVerdict:
    verdict = AxiomVerdict(True)
    els = system.index.elements
    for i, a in enumerate(els):
        for b in els[i + 1:]:
            top = quasi.join_of(a, b)
            if top is None:
                continue
            cols = ([system.link(a, top).col(j) for j in range(system.dims[a])]
                    + [system.link(b, top).col(j) for j in range(system.dims[b])])
            image = Subspace.span(system.dims[top], cols)
            if image.dim < system.dims[top]:
                missing = next(
                    x for x in system.fiber_basis(top) if not image.contains(x))
                verdict.holds = False
                verdict.witnesses.append(
                    {"pair": [a, b], "join": top,
                     "uncovered": [str(e) for e in missing]})
    return verdict


def _check_gluing(system: InductiveSystem, quasi: QuasiLattice,
                  links_injective: bool) -> AxiomVerdict:
    """Equalizer-equals-diagonal-image at every common upper bound.

    When every link is injective it suffices to test the join (agreement
    at any upper bound factors through it); otherwise every bound is
    checked.
    """
    verdict = AxiomVerdict(True)
    els = system.index.elements
    for i, a in enumerate(els):
        for b in els[i:]:
            meet = quasi.meet_of(a, b)
            join = quasi.join_of(a, b)
            if join is None:
                continue
            if links_injective:
                bounds = [join]
            else:
                bounds = [g for g in els
                          if system.index.le(a, g) and system.index.le(b, g)]
            for g in bounds:
                da, db = system.dims[a], system.dims[b]
                pair_matrix = system.link(a, g).hstack(system.link(b, g).scale(-1))
                equalizer = nullspace(pair_matrix)
                diag_cols = []
                for x in system.fiber_basis(meet):
                    xa = system.link(meet, a).apply(x)
                    xb = system.link(meet, b).apply(x)
                    diag_cols.append(tuple(xa) + tuple(xb))
                diagonal = Subspace.span(da + db, diag_cols)
                if not diagonal.contains_subspace(equalizer):
                    bad = next(v for v in equalizer.basis
                               if not diagonal.contains(v))
                    verdict.holds = False
                    verdict.witnesses.append(
                        {"pair": [a, b], "bound": g, "meet": meet,
                         "x1": [str(e) for e in bad[:da]],
                         "x2": [str(e) for e in bad[da:]]})
    return verdict


@dataclass
class RegularityReport:
    injective: AxiomVerdict
    lifting: AxiomVerdict

    @property
    def regular(self) -> bool:
        return self.injective.holds and self.lifting.holds

    def to_json(self) -> dict:
        return {"a": self.injective.to_json(), "b": self.lifting.to_json(),
                "regular": self.regular}


def check_regular(l: SystemMorphism) -> RegularityReport:
    """Fiberwise injectivity plus the preimage-lifting property.

    (b) is decided as a subspace inclusion: the preimage under the target
    link of the image of the downstream fiber map must land inside the
    image of the upstream fiber map.
    """
    injective = AxiomVerdict(True)
    for g in l.source.index.elements:
        m = l.maps[g]
        if m.ncols == 0:
            continue
        ker = nullspace(m)
        if ker.dim > 0:
            injective.holds = False
            injective.witnesses.append(
                {"index": g, "kernel_vector": [str(e) for e in ker.basis[0]]})
    lifting = AxiomVerdict(True)
    for (a, b) in l.source.index.comparable_pairs():
        if a == b:
            continue
        image_b = column_space(l.maps[b])
        candidates = preimage(l.target.link(a, b), image_b)
        image_a = column_space(l.maps[a])
        if not image_a.contains_subspace(candidates):
            bad = next(v for v in candidates.basis if not image_a.contains(v))
            lifting.holds = False
            lifting.witnesses.append(
                {"pair": [a, b], "y": [str(e) for e in bad]})
    return RegularityReport(injective, lifting)


# ---------------------------------------------------------------------------
# Set-family models
# ---------------------------------------------------------------------------

SetFamily = frozenset  # of frozensets of hashable point labels


def family_name(s: frozenset) -> str:
    return "{" + ",".join(str(p) for p in sorted(s)) + "}"


def family_poset(family: Iterable[frozenset]) -> Poset:
    """The family ordered by inclusion, elements named canonically."""
    sets = sorted(set(frozenset(s) for s in family),
                  key=lambda s: (len(s), sorted(s)))
    names = [family_name(s) for s in sets]
    leq = [[a <= b for b in sets] for a in sets]
    return Poset.from_relation(names, leq)


def validate_family_closure(family: Iterable[frozenset]) -> None:
    """Require closure under intersections and bounded-above unions.

    Intersections make the family a quasi-lattice with meet = set meet;
    unions of bounded pairs make every defined join the union, which is
    what the free model's covering axiom needs.
    """
    sets = set(frozenset(s) for s in family)
    for a, b in itertools.combinations(sorted(sets, key=sorted), 2):
        if a & b not in sets:
            raise NotIntersectionClosed(sorted(a & b))
        union = a | b
        if union not in sets and any(union <= c for c in sets):
            raise NotUnionClosed(sorted(union))


def generate_free_model(points: Sequence,
                        family: Iterable[frozenset]
                        ) -> tuple[InductiveSystem, QuasiLattice]:
    """Free rational spaces on member points, links = coordinate inclusions."""
    return generate_point_model(points, family, allowed=set(points))


def generate_point_model(points: Sequence, family: Iterable[frozenset],
                         allowed: set) -> tuple[InductiveSystem, QuasiLattice]:
    """Free model whose fibers only see points from ``allowed``.

    With allowed = all points this is the plain free model.  Restricting
    the point set gives the sub-systems whose inclusions are the standard
    regular morphisms.
    """
    sets = sorted(set(frozenset(s) for s in family),
                  key=lambda s: (len(s), sorted(s)))
    validate_family_closure(sets)
    index = family_poset(sets)
    by_name = {family_name(s): s for s in sets}
    dims = {}
    coords = {}
    for name, s in by_name.items():
        pts = [p for p in sorted(s) if p in allowed]
        coords[name] = pts
        dims[name] = len(pts)
    links = {}
    for (na, nb) in index.comparable_pairs():
        if na == nb:
            continue
        small, large = coords[na], coords[nb]
        links[(na, nb)] = Matrix([[1 if large[i] == small[j] else 0
                                   for j in range(len(small))]
                                  for i in range(len(large))])
    system = InductiveSystem(index, dims, links)
    quasi = validate_quasi_lattice(index)
    return system, quasi


def free_model_oracle(family: Iterable[frozenset]) -> dict[str, bool]:
    """Combinatorial predictions for the free model, no linear algebra.

    (I) inclusions are injective; (II) holds iff every defined join is
    the plain union; (III) holds because two point-supported vectors that
    agree at a common bound are supported on the intersection.
    """
    sets = sorted(set(frozenset(s) for s in family), key=lambda s: (len(s), sorted(s)))
    covering = True
    for a, b in itertools.combinations(sets, 2):
        bounds = [c for c in sets if a <= c and b <= c]
        if not bounds:
            continue
        join = min(bounds, key=lambda c: (len(c), sorted(c)))
        if join != a | b:
            covering = False
    return {"I": True, "II": covering, "III": True}


def inclusion_morphism(points: Sequence, family: Iterable[frozenset],
                       small: set, large: set) -> SystemMorphism:
    """The point-set inclusion between two restricted free models."""
    if not small <= large:
        raise ValueError("small point set must be contained in the large one")
    sets = sorted(set(frozenset(s) for s in family), key=lambda s: (len(s), sorted(s)))
    x, _ = generate_point_model(points, sets, allowed=small)
    y, _ = generate_point_model(points, sets, allowed=large)
    maps = {}
    for s in sets:
        name = family_name(s)
        src = [p for p in sorted(s) if p in small]
        tgt = [p for p in sorted(s) if p in large]
        maps[name] = Matrix([[1 if tgt[i] == src[j] else 0
                              for j in range(len(src))]
                             for i in range(len(tgt))])
    return SystemMorphism(x, y, maps)


def generate_counterexample(axiom: str) -> tuple[InductiveSystem, QuasiLattice]:
    """A system on the square lattice 2^{1,2} failing exactly one axiom."""
    family = [frozenset(), frozenset({1}), frozenset({2}), frozenset({1, 2})]
    index = family_poset(family)
    quasi = validate_quasi_lattice(index)
    bot, e1, e2, top = index.elements
    if axiom == "II":
        # Zero fibers below a one-dimensional top: nothing covers it.
        dims = {bot: 0, e1: 0, e2: 0, top: 1}
        links = {}
        system = InductiveSystem(index, dims, links)
        return system, quasi
    if axiom == "III":
        # One-dimensional agreement over a zero-dimensional meet.
        dims = {bot: 0, e1: 1, e2: 1, top: 1}
        links = {(bot, e1): Matrix.zeros(1, 0), (bot, e2): Matrix.zeros(1, 0),
                 (bot, top): Matrix.zeros(1, 0),
                 (e1, top): Matrix.identity(1), (e2, top): Matrix.identity(1)}
        system = InductiveSystem(index, dims, links)
        return system, quasi
    raise ValueError(f"no counterexample generator for axiom {axiom!r}")


# ---------------------------------------------------------------------------
# Exhaustive corpus of set quasi-lattices (points <= 4)
# ---------------------------------------------------------------------------

def enumerate_set_quasilattices(npoints: int,
                                max_family_size: Optional[int] = None
                                ) -> list[frozenset]:
    """All nonempty families over {1..n} closed under meets and bounded joins.

    Families are returned up to point-permutation symmetry, canonically
    sorted.  Enumeration is over bitmasks of the 2^n subsets, so this is
    only meant for n <= 4.
    """
    if npoints < 1 or npoints > 4:
        raise ValueError("corpus enumeration supports 1 <= npoints <= 4")
    import numpy as np

    nsub = 1 << npoints
    masks = np.arange(1, 1 << nsub, dtype=np.uint64)
    ok = np.ones(masks.shape, dtype=bool)
    superset_mask = []
    for v in range(nsub):
        m = 0
        for u in range(nsub):
            if u & v == v:
                m |= 1 << u
        superset_mask.append(m)
    one = np.uint64(1)
    for s in range(nsub):
        has_s = (masks >> np.uint64(s)) & one
        for t in range(s, nsub):
            has_t = (masks >> np.uint64(t)) & one
            both = (has_s & has_t).astype(bool)
            has_meet = ((masks >> np.uint64(s & t)) & one).astype(bool)
            ok &= ~both | has_meet
            u = s | t
            bounded = (masks & np.uint64(superset_mask[u])) != 0
            has_join = ((masks >> np.uint64(u)) & one).astype(bool)
            ok &= ~(both & bounded) | has_join
    survivors = masks[ok]

    perms = list(itertools.permutations(range(npoints)))

    def apply_perm(mask: int, perm) -> int:
        out = 0
        for v in range(nsub):
            if (mask >> v) & 1:
                w = 0
                for bit in range(npoints):
                    if (v >> bit) & 1:
                        w |= 1 << perm[bit]
                out |= 1 << w
        return out

    seen = set()
    canonical = []
    for mask in survivors.tolist():
        if max_family_size is not None and bin(mask).count("1") > max_family_size:
            continue
        canon = min(apply_perm(mask, p) for p in perms)
        if canon in seen:
            continue
        seen.add(canon)
        family = frozenset(
            frozenset(p + 1 for p in range(npoints) if (v >> p) & 1)
            for v in range(nsub) if (canon >> v) & 1)
        canonical.append(family)
    canonical.sort(key=lambda fam: (len(fam),
                                    sorted(sorted(s) for s in fam)))
    return canonical
