"""Constructive membership decomposition and the lifting theorem.

Given prelocalizable systems X, Y over a distributive quasi-lattice, a
regular morphism l, a hereditary set I and a meet-closed set J, every
element of N_J(Y) that also lies in M_I(Y) + L(M(X)) can be rewritten as
an element of N_I(Y) + L(N_J(X)).  The rewriting is done exactly as in
the inductive argument: terms sigma(y, g, g') are processed in increasing
stage order n = k(g); each step either lifts the coefficient through the
morphism directly (no competing terms at g') or splits it through the
join with the supremum of the competing stage indices, glues across the
meet, and redistributes over the meets with the individual competitors,
which strictly raises the stage of every surviving term.

Every run produces a replayable certificate: lists of sigma-term
coefficients on the target side (pairs inside I) and on the source side
(pairs inside J, mapped through the morphism) whose sum reproduces the
input vector exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .linalg import (Matrix, Q, Subspace, Vector, column_space, solve, vec,
                     vec_add, vec_is_zero, vec_neg, vec_sub, vector_from_json,
                     vector_to_json, zero_vec)
from .localization import check_prelocalizable, check_regular
from .poset import (QuasiLattice, is_distributive, is_hereditary,
                    order_statistics, require_meet_closed)
from .systems import (InductiveSystem, SumVector, SystemMorphism,
                      member_space, morphism_flat_matrix, relation_space,
                      sigma)


class PreconditionFailed(ValueError):
    def __init__(self, hypothesis: str, detail=None):
        self.hypothesis = hypothesis
        self.detail = detail
        super().__init__(f"hypothesis failed: {hypothesis}"
                         + (f" ({detail})" if detail else ""))


class NotInLHS(ValueError):
    """The input fails the exact membership test for the left-hand side."""


class EngineError(RuntimeError):
    """An internal solve failed; indicates a bug or unvalidated input."""


@dataclass
class DecompositionCertificate:
    """Replayable witness that y = sum of target terms + L(sum of source terms).

    ``target_terms`` are (g, g', x) with both indices in I; ``source_terms``
    are (g, g', x) with both indices in J, to be pushed through the
    morphism.  ``stages`` records the residual family at the start of each
    stage for inspection; ``order`` is the final stage reached.
    """

    y: SumVector
    target_terms: list[tuple[str, str, Vector]] = field(default_factory=list)
    source_terms: list[tuple[str, str, Vector]] = field(default_factory=list)
    stages: list[dict] = field(default_factory=list)
    order: int = 0

    def evaluate(self, x_sys: InductiveSystem, y_sys: InductiveSystem,
                 l: SystemMorphism) -> SumVector:
        total = zero_vec(y_sys.total_dim)
        for g, g2, coeff in self.target_terms:
            total = vec_add(total, sigma(y_sys, coeff, g, g2).to_flat(y_sys))
        src = zero_vec(x_sys.total_dim)
        for g, g2, coeff in self.source_terms:
            src = vec_add(src, sigma(x_sys, coeff, g, g2).to_flat(x_sys))
        total = vec_add(total, l.apply_flat(src))
        return SumVector.from_flat(y_sys, total)

    def to_json(self) -> dict:
        return {
            "y": self.y.to_json(),
            "target_terms": [[g, g2, vector_to_json(x)]
                             for g, g2, x in self.target_terms],
            "source_terms": [[g, g2, vector_to_json(x)]
                             for g, g2, x in self.source_terms],
            "stages": self.stages,
            "order": self.order,
        }

    @classmethod
    def from_json(cls, y_sys: InductiveSystem, data: dict) -> "DecompositionCertificate":
        return cls(
            y=SumVector.from_json(y_sys, data["y"]),
            target_terms=[(g, g2, vector_from_json(x))
                          for g, g2, x in data["target_terms"]],
            source_terms=[(g, g2, vector_from_json(x))
                          for g, g2, x in data["source_terms"]],
            stages=list(data.get("stages", [])),
            order=int(data.get("order", 0)),
        )


def _validate_inputs(x_sys: InductiveSystem, y_sys: InductiveSystem,
                     l: SystemMorphism, quasi: QuasiLattice,
                     i_set: Sequence[str], j_set: Sequence[str],
                     axioms: str) -> None:
    if axioms not in ("full", "minimal"):
        raise ValueError("axioms must be 'full' or 'minimal'")
    ok, witness = is_distributive(quasi)
    if not ok:
        raise PreconditionFailed("distributive quasi-lattice", witness)
    if not is_hereditary(quasi.poset, i_set):
        raise PreconditionFailed("I hereditary", sorted(i_set))
    require_meet_closed(quasi, j_set)
    rep_x = check_prelocalizable(x_sys, quasi)
    rep_y = check_prelocalizable(y_sys, quasi)
    if axioms == "full":
        if not rep_x.prelocalizable:
            raise PreconditionFailed("X prelocalizable", rep_x.to_json())
        if not rep_y.prelocalizable:
            raise PreconditionFailed("Y prelocalizable", rep_y.to_json())
    else:
        # The argument only uses (II) for X and (II)+(III) for Y.
        if not rep_x.covering.holds:
            raise PreconditionFailed("X satisfies (II)", rep_x.to_json())
        if not (rep_y.covering.holds and rep_y.gluing.holds):
            raise PreconditionFailed("Y satisfies (II) and (III)", rep_y.to_json())
    reg = check_regular(l)
    if not reg.regular:
        raise PreconditionFailed("l regular", reg.to_json())


def lhs_membership_oracle(x_sys: InductiveSystem, y_sys: InductiveSystem,
                          l: SystemMorphism, i_set: Sequence[str],
                          j_set: Sequence[str]) -> tuple[Subspace, Subspace]:
    """Brute-force subspaces: the LHS intersection and the RHS sum.

    This is the independent oracle: plain span arithmetic, sharing nothing
    with the staged rewriting above.
    """
    n_j = relation_space(y_sys, j_set)
    m_i = member_space(y_sys, i_set)
    l_flat = morphism_flat_matrix(l)
    l_image = column_space(l_flat)
    lhs = n_j.intersect(m_i.sum(l_image))
    n_i = relation_space(y_sys, i_set)
    lx_nj = Subspace.span(
        y_sys.total_dim,
        [l.apply_flat(v) for v in relation_space(x_sys, j_set).basis])
    rhs = n_i.sum(lx_nj)
    return lhs, rhs


def lemma31_membership(x_sys: InductiveSystem, y_sys: InductiveSystem,
                       l: SystemMorphism, quasi: QuasiLattice,
                       i_set: Sequence[str], j_set: Sequence[str],
                       y: SumVector, validate: bool = True,
                       axioms: str = "full") -> DecompositionCertificate:
    """Decompose y into N_I(Y) + L(N_J(X)) by the staged rewriting.

    Raises NotInLHS when the exact membership test fails, and
    PreconditionFailed when a validated hypothesis does not hold.
    """
    if validate:
        _validate_inputs(x_sys, y_sys, l, quasi, i_set, j_set, axioms)

    i_set = set(i_set)
    j_list = sorted(set(j_set), key=quasi.elements.index)
    y_flat = y.to_flat(y_sys)

    n_j = relation_space(y_sys, j_list)
    if not n_j.contains(y_flat):
        raise NotInLHS("y is not in the relation space of J")
    m_i = member_space(y_sys, i_set)
    l_image = column_space(morphism_flat_matrix(l))
    if not m_i.sum(l_image).contains(y_flat):
        raise NotInLHS("y is not in M_I + L(M)")

    cert = DecompositionCertificate(y=y)
    if y.is_zero() or not j_list:
        cert.order = len(j_list) + 1
        return cert

    stats = order_statistics(quasi, j_list)
    k = stats.k

    # Stage-1 family: express y as sigma-combinations over pairs in J and
    # sweep every term whose upper index lies in I straight into the
    # target bucket (I hereditary makes both indices lie in I).
    active = _initial_family(y_sys, quasi, j_list, y_flat, i_set, cert)

    order = 1
    size = len(j_list)
    while order <= size:
        cert.stages.append({
            "order": order,
            "terms": {f"{g}|{g2}": vector_to_json(x)
                      for (g, g2), x in sorted(active.items())},
        })
        for key in sorted(active.keys(),
                          key=lambda p: (quasi.elements.index(p[0]),
                                         quasi.elements.index(p[1]))):
            if key not in active:
                continue
            g, g2 = key
            if k[g] != order:
                continue
            coeff = active.pop(key)
            if vec_is_zero(coeff):
                continue
            _process_term(x_sys, y_sys, l, quasi, i_set, k, active, cert,
                          g, g2, coeff, order)
        order += 1

    if any(not vec_is_zero(x) for x in active.values()):
        raise EngineError("active terms survived past the final stage")
    cert.order = order

    replay = cert.evaluate(x_sys, y_sys, l)
    if replay.to_flat(y_sys) != y_flat:
        raise EngineError("certificate does not replay to the input")
    return cert


def _initial_family(y_sys: InductiveSystem, quasi: QuasiLattice,
                    j_list: list[str], y_flat: Vector, i_set: set,
                    cert: DecompositionCertificate) -> dict:
    pairs = []
    columns = []
    for a in j_list:
        for b in j_list:
            if a == b or not quasi.le(a, b):
                continue
            for x in y_sys.fiber_basis(a):
                pairs.append((a, b, x))
                columns.append(sigma(y_sys, x, a, b).to_flat(y_sys))
    if not columns:
        raise EngineError("no relation generators although membership held")
    coeffs = solve(Matrix.from_columns(columns), y_flat)
    if coeffs is None:
        raise EngineError("span solve failed although membership held")
    family: dict[tuple[str, str], Vector] = {}
    for (a, b, x), c in zip(pairs, coeffs):
        if c == 0:
            continue
        key = (a, b)
        add = vec(Q(c) * e for e in x)
        family[key] = vec_add(family[key], add) if key in family else add
    # Terms with both indices in I go straight into the certificate.
    for key in sorted(family.keys()):
        a, b = key
        if b in i_set:
            coeff = family.pop(key)
            if not vec_is_zero(coeff):
                cert.target_terms.append((a, b, coeff))
    return {key: x for key, x in family.items() if not vec_is_zero(x)}


def _add_term(active: dict, key: tuple[str, str], x: Vector) -> None:
    if key in active:
        s = vec_add(active[key], x)
        if vec_is_zero(s):
            del active[key]
        else:
            active[key] = s
    elif not vec_is_zero(x):
        active[key] = x


def _process_term(x_sys: InductiveSystem, y_sys: InductiveSystem,
                  l: SystemMorphism, quasi: QuasiLattice, i_set: set,
                  k: Mapping[str, int], active: dict,
                  cert: DecompositionCertificate, g: str, g2: str,
                  coeff: Vector, order: int) -> None:
    competitors = sorted(
        (b for (b, b2) in active.keys()
         if b2 == g2 and b != g and not vec_is_zero(active[(b, b2)])),
        key=quasi.elements.index)

    if not competitors:
        # Regularity alone: the coefficient is the image of a source vector
        # and sigma(coeff, g, g') = L(sigma(x, g, g')).
        x = solve(l.maps[g], coeff)
        if x is None:
            raise EngineError(f"regular lift failed at {g}")
        cert.source_terms.append((g, g2, x))
        return

    sup = quasi.join_all(competitors)
    if sup is None:
        raise EngineError("competitor supremum undefined despite bound")
    z = zero_vec(y_sys.dims[sup])
    for b in competitors:
        z = vec_add(z, y_sys.link(b, sup).apply(active[(b, g2)]))

    top = quasi.join_of(g, sup)
    if top is None:
        raise EngineError("join of g with the supremum undefined")
    y_star = vec_add(y_sys.link(g, top).apply(coeff),
                     y_sys.link(sup, top).apply(z))

    # Regularity at top <= g2 guarantees a source preimage of y_star.
    x_top = solve(l.maps[top], y_star)
    if x_top is None:
        raise EngineError(f"regular lift failed at {top}")

    # Covering split of x_top across the pair (g, sup).
    dg, ds = x_sys.dims[g], x_sys.dims[sup]
    split = solve(x_sys.link(g, top).hstack(x_sys.link(sup, top)), x_top)
    if split is None:
        raise EngineError("covering split failed on the source side")
    eta, zeta = vec(split[:dg]), vec(split[dg:dg + ds])

    # Gluing across the meet: coeff - l(eta) at g agrees with
    # l(zeta) - z at sup, so both come from the meet fiber.
    meet = quasi.meet_of(g, sup)
    res_g = vec_sub(coeff, l.maps[g].apply(eta))
    res_s = vec_sub(l.maps[sup].apply(zeta), z)
    stacked_rows = [list(r) for r in y_sys.link(meet, g).data]
    stacked_rows += [list(r) for r in y_sys.link(meet, sup).data]
    w = solve(Matrix(stacked_rows), vec(tuple(res_g) + tuple(res_s)))
    if w is None:
        raise EngineError("gluing solve failed on the target side")

    # Distributive redistribution: the meet with the supremum is the
    # supremum of the meets, so w splits across the individual meets.
    meets = [quasi.meet_of(b, g) for b in competitors]
    blocks = [y_sys.link(mb, meet) for mb in meets]
    combined_cols = []
    for blk in blocks:
        combined_cols.extend(blk.columns())
    w_split = solve(Matrix.from_columns(combined_cols)
                    if combined_cols else Matrix.zeros(y_sys.dims[meet], 0), w)
    if w_split is None:
        raise EngineError("redistribution split failed")
    w_parts = []
    pos = 0
    for b, mb in zip(competitors, meets):
        d = y_sys.dims[mb]
        w_parts.append((b, mb, vec(w_split[pos:pos + d])))
        pos += d

    # sigma(coeff, g, g2) == L(sigma(eta, g, g2))
    #   + sum_b [sigma(w_b, meet_b, g2) - sigma(w_b, meet_b, g)].
    cert.source_terms.append((g, g2, eta))
    for b, mb, wb in w_parts:
        _add_term(active, (mb, g2), wb)
        if g in i_set:
            if not vec_is_zero(wb):
                cert.target_terms.append((mb, g, vec_neg(wb)))
        else:
            _add_term(active, (mb, g), vec_neg(wb))


def lemmaa1_check(y_sys: InductiveSystem, quasi: QuasiLattice,
                  i_set: Sequence[str], validate: bool = True) -> dict:
    """Exact equality of N_Gamma ^ M_I with N_I for a hereditary I.

    Both sides are computed independently with plain subspace arithmetic.
    """
    if validate:
        if not is_hereditary(quasi.poset, i_set):
            raise PreconditionFailed("I hereditary", sorted(i_set))
        rep = check_prelocalizable(y_sys, quasi)
        if not rep.prelocalizable:
            raise PreconditionFailed("Y prelocalizable", rep.to_json())
    n_all = relation_space(y_sys, y_sys.index.elements)
    m_i = member_space(y_sys, i_set)
    lhs = n_all.intersect(m_i)
    rhs = relation_space(y_sys, i_set)
    equal = lhs == rhs
    out = {"equal": equal, "lhs_dim": lhs.dim, "rhs_dim": rhs.dim}
    if not equal:
        extra = next((v for v in lhs.basis if not rhs.contains(v)),
                     next(v for v in rhs.basis if not lhs.contains(v)))
        out["witness"] = [str(e) for e in extra]
    return out


# ---------------------------------------------------------------------------
# The lifting theorem
# ---------------------------------------------------------------------------

class RelationNotSatisfied(ValueError):
    """The compatibility equation between the two given classes fails."""


@dataclass
class LiftSetup:
    """Pushforward data shared by the injectivity and lifting checks."""

    x_sys: InductiveSystem
    y_sys: InductiveSystem
    l: SystemMorphism
    quasi: QuasiLattice
    lam: dict
    delta: "Poset"
    px: "Pushforward"
    py: "Pushforward"
    induced: SystemMorphism


def prepare_lift(x_sys: InductiveSystem, y_sys: InductiveSystem,
                 l: SystemMorphism, quasi: QuasiLattice,
                 lam: Mapping[str, str], delta, validate: bool = True,
                 axioms: str = "full") -> LiftSetup:
    from .systems import pushforward, pushforward_morphism
    if validate:
        _validate_inputs(x_sys, y_sys, l, quasi,
                         [], y_sys.index.elements, axioms)
    px = pushforward(x_sys, lam, delta)
    py = pushforward(y_sys, lam, delta)
    induced = pushforward_morphism(l, lam, delta, px, py)
    return LiftSetup(x_sys, y_sys, l, quasi, dict(lam), delta, px, py, induced)


def theorem6_injectivity(setup: LiftSetup) -> dict:
    """Exact kernel test of the induced map at every index of Delta."""
    from .linalg import nullspace
    out = {}
    for d in setup.delta.elements:
        m = setup.induced.maps[d]
        if m.ncols == 0:
            out[d] = {"injective": True, "dim": 0}
            continue
        ker = nullspace(m)
        entry = {"injective": ker.dim == 0, "dim": m.ncols}
        if ker.dim > 0:
            entry["kernel_vector"] = [str(e) for e in ker.basis[0]]
        out[d] = entry
    return out


def theorem6_lift(setup: LiftSetup, d_small: str, d_large: str,
                  eta: Sequence, xi_prime: Sequence,
                  axioms: str = "full") -> Vector:
    """Recover the class xi at the small index from eta and xi'.

    Checks the compatibility equation exactly, runs the membership
    decomposition with I and J the two sublevel sets, and verifies both
    defining equations of the output before returning it.
    """
    if not setup.delta.le(d_small, d_large):
        raise PreconditionFailed("d <= d'", (d_small, d_large))
    fx_small = setup.px.fibers[d_small]
    fx_large = setup.px.fibers[d_large]
    fy_small = setup.py.fibers[d_small]
    fy_large = setup.py.fibers[d_large]
    eta = vec(eta)
    xi_prime = vec(xi_prime)
    if len(eta) != fy_small.dim or len(xi_prime) != fx_large.dim:
        raise PreconditionFailed("class coordinate lengths")

    # Compatibility: the image of eta at the large index equals the image
    # of xi' under the induced map.
    tau_y = setup.py.system.link(d_small, d_large)
    if tau_y.apply(eta) != setup.induced.maps[d_large].apply(xi_prime):
        raise RelationNotSatisfied("linking image of eta != induced image of xi'")

    y_rep = fy_small.flat_of_coords(eta)
    x_rep = fx_large.flat_of_coords(xi_prime)
    defect = vec_sub(setup.l.apply_flat(x_rep), y_rep)
    cert = lemma31_membership(
        setup.x_sys, setup.y_sys, setup.l, setup.quasi,
        fy_small.members, fx_large.members,
        SumVector.from_flat(setup.y_sys, defect),
        validate=False, axioms=axioms)

    x_tilde = zero_vec(setup.x_sys.total_dim)
    for g, g2, coeff in cert.source_terms:
        x_tilde = vec_add(x_tilde,
                          sigma(setup.x_sys, coeff, g, g2).to_flat(setup.x_sys))
    x_flat = vec_sub(x_rep, x_tilde)
    if not fx_small.member.contains(x_flat):
        raise EngineError("corrected representative escapes the small sublevel")
    xi = fx_small.coords_of_flat(x_flat)

    if setup.induced.maps[d_small].apply(xi) != eta:
        raise EngineError("lift fails the image equation")
    if setup.px.system.link(d_small, d_large).apply(xi) != xi_prime:
        raise EngineError("lift fails the restriction equation")
    return xi
