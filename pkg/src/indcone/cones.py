"""Polyhedral cones in R^k under the uniform norm.

A cone is a finite union of finitely generated pieces; the cone is the
union of the nonnegative hulls of the generator lists.  Distances,
membership, properness and separation margins all reduce to small linear
programs.  Two solver paths exist: an exact rational simplex for
certified constants, and scipy's HiGGS solver for bulk sampling loops
where we only need float accuracy (each float answer used in a certified
bound carries an explicit guard).

The uniform norm is fixed throughout: |x| = max_j |x_j|, whose dual is
the 1-norm, so the sup-norm distance from a point to the hyperplane
n.x = 0 is n.x / ||n||_1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .lp import IneqProblem, LPResult, Q, solve_standard

FLOAT_LP_GUARD = 1e-7  # slack added around scipy LP answers used in bounds


class EmptyCone(ValueError):
    """A cone with no pieces at all has no distance function."""


_PIECE_INFO_CACHE: dict = {}


class ConesIntersect(ValueError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"cones share the nonzero direction {witness}")


class GridTooCoarse(ValueError):
    pass


class NotProper(ValueError):
    def __init__(self, certificate):
        self.certificate = certificate
        super().__init__("cone is not proper; a nonnegative circuit exists")


def _as_q_vector(v: Sequence) -> tuple[Q, ...]:
    return tuple(Q(e) if not isinstance(e, float) else Q(e).limit_denominator(10**9)
                 for e in v)


@dataclass(frozen=True)
class Cone:
    """Union of polyhedral pieces; each piece is a tuple of generators."""

    pieces: tuple[tuple[tuple[Q, ...], ...], ...]
    dim: int

    @classmethod
    def from_generators(cls, pieces: Iterable[Iterable[Sequence]], dim: Optional[int] = None) -> "Cone":
        out = []
        d = dim
        for piece in pieces:
            gens = []
            for g in piece:
                g = _as_q_vector(g)
                if d is None:
                    d = len(g)
                if len(g) != d:
                    raise ValueError("generator dimensions disagree")
                if any(e != 0 for e in g):
                    gens.append(g)
            out.append(tuple(gens))
        if d is None:
            raise ValueError("dimension cannot be inferred from empty input")
        return cls(tuple(out), d)

    @classmethod
    def single(cls, generators: Iterable[Sequence], dim: Optional[int] = None) -> "Cone":
        return cls.from_generators([generators], dim=dim)

    @classmethod
    def origin(cls, dim: int) -> "Cone":
        return cls(((),), dim)

    @classmethod
    def full_space(cls, dim: int) -> "Cone":
        gens = []
        for i in range(dim):
            e = [0] * dim
            e[i] = 1
            gens.append(tuple(e))
            e2 = [0] * dim
            e2[i] = -1
            gens.append(tuple(e2))
        return cls.single(gens, dim=dim)

    def all_generators(self) -> list[tuple[Q, ...]]:
        return [g for piece in self.pieces for g in piece]

    def float_pieces(self) -> list[np.ndarray]:
        return [np.array([[float(e) for e in g] for g in piece], dtype=float)
                if piece else np.zeros((0, self.dim))
                for piece in self.pieces]

    # -- membership -------------------------------------------------------

    def contains(self, x: Sequence, exact: bool = True, tol: float = 1e-9) -> bool:
        if not self.pieces:
            raise EmptyCone()
        if exact:
            x = _as_q_vector(x)
            if all(e == 0 for e in x):
                return True
            for piece in self.pieces:
                if not piece:
                    continue
                rows = [[piece[j][i] for j in range(len(piece))]
                        for i in range(self.dim)]
                if _feasible_nonneg(rows, list(x)):
                    return True
            return False
        return self.distance(x, exact=False) <= tol

    # -- distance -----------------------------------------------------------

    def distance(self, x: Sequence, exact: bool = False) -> float:
        """Uniform-norm distance to the union, min over pieces."""
        if not self.pieces:
            raise EmptyCone()
        if exact:
            return float(self.distance_exact(x))
        best = None
        xf = np.asarray([float(e) for e in x], dtype=float)
        for piece in self.float_pieces():
            d = _piece_distance_float(piece, xf)
            best = d if best is None else min(best, d)
        return float(best)

    def distance_exact(self, x: Sequence) -> Q:
        if not self.pieces:
            raise EmptyCone()
        x = _as_q_vector(x)
        best: Optional[Q] = None
        for piece in self.pieces:
            d = _piece_distance_exact(piece, x, self.dim)
            if best is None or d < best:
                best = d
        return best

    def piece_infos(self) -> tuple:
        cached = _PIECE_INFO_CACHE.get(self)
        if cached is None:
            cached = tuple(_classify_piece(p, self.dim) for p in self.pieces)
            _PIECE_INFO_CACHE[self] = cached
        return cached

    def distance_batch(self, xs: np.ndarray) -> np.ndarray:
        """Float distances for a batch of points.

        Origins and rays use closed forms; other pieces fall back to one
        LP per point.
        """
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        best = np.full(len(xs), np.inf)
        for info, fp in zip(self.piece_infos(), self.float_pieces()):
            if info.kind == "origin":
                vals = np.max(np.abs(xs), axis=1)
            elif info.kind == "ray":
                vals = _ray_distance_batch(info.ray, xs)
            else:
                vals = np.array([_piece_distance_float(fp, x) for x in xs])
            best = np.minimum(best, vals)
        return best

    def distance_lower_batch(self, xs: np.ndarray) -> np.ndarray:
        """Certified lower bounds on the distances, fully vectorized.

        A piece with validated facets is contained in each facet
        halfspace, whose sup-norm distance is the positive part of the
        normal form over its 1-norm; rays and origins are exact.
        """
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        best = np.full(len(xs), np.inf)
        for info, fp in zip(self.piece_infos(), self.float_pieces()):
            if info.kind == "origin":
                vals = np.max(np.abs(xs), axis=1)
            elif info.kind == "ray":
                vals = _ray_distance_batch(info.ray, xs)
            elif info.kind == "facets":
                slack = -(xs @ info.normals.T) / info.normals_l1[None, :]
                vals = np.max(np.maximum(slack, 0.0), axis=1)
            else:
                vals = np.array([_piece_distance_float(fp, x) for x in xs])
            best = np.minimum(best, vals)
        return best

    def contains_batch(self, xs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        """Float membership mask; facet pieces are tested by sign checks."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        ok = np.zeros(len(xs), dtype=bool)
        for info, fp in zip(self.piece_infos(), self.float_pieces()):
            if info.kind == "origin":
                vals = np.max(np.abs(xs), axis=1) <= tol
            elif info.kind == "ray":
                vals = _ray_distance_batch(info.ray, xs) <= tol
            elif info.kind == "facets":
                vals = np.all(xs @ info.normals.T >= -tol * info.normals_l1,
                              axis=1)
            else:
                todo = ~ok
                vals = np.zeros(len(xs), dtype=bool)
                idx = np.where(todo)[0]
                vals[idx] = [_piece_distance_float(fp, xs[i]) <= tol
                             for i in idx]
            ok |= vals
            if np.all(ok):
                break
        return ok

    def to_json(self) -> dict:
        return {"dim": self.dim,
                "pieces": [[[str(e) for e in g] for g in piece]
                           for piece in self.pieces]}

    @classmethod
    def from_json(cls, data: dict) -> "Cone":
        return cls.from_generators(
            [[[Fraction(e) for e in g] for g in piece]
             for piece in data["pieces"]], dim=data["dim"])


def _feasible_nonneg(rows: list[list[Q]], rhs: list[Q]) -> bool:
    """Feasibility of  M lam = rhs, lam >= 0  (columns of M given by rows)."""
    if not rows or not rows[0]:
        return all(e == 0 for e in rhs)
    res = solve_standard(rows, rhs, [Q(0)] * len(rows[0]))
    return res.status == "optimal"


# ---------------------------------------------------------------------------
# Fast piece classification: rays get closed forms, full-dimensional
# convex pieces get validated facet normals, everything else keeps the LP.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _PieceInfo:
    kind: str                      # "origin", "ray", "facets", "generic"
    ray: Optional[np.ndarray] = None
    normals: Optional[np.ndarray] = None      # rows n with n.x >= 0 on piece
    normals_l1: Optional[np.ndarray] = None


def _classify_piece(piece: tuple, dim: int) -> _PieceInfo:
    if not piece:
        return _PieceInfo("origin")
    rays = _extreme_directions(piece)
    if len(rays) == 1:
        g = rays[0]
        return _PieceInfo("ray", ray=np.array([float(e) for e in g]))
    normals = _facet_normals(piece, dim)
    if normals is not None:
        arr = np.array([[float(e) for e in n] for n in normals])
        return _PieceInfo("facets", normals=arr,
                          normals_l1=np.sum(np.abs(arr), axis=1))
    return _PieceInfo("generic")


def _extreme_directions(piece: tuple) -> list:
    """Deduplicate generators that are positive multiples of each other."""
    out = []
    for g in piece:
        is_dup = False
        for h in out:
            ratio = None
            ok = True
            for a, b in zip(g, h):
                if (a == 0) != (b == 0):
                    ok = False
                    break
                if b != 0:
                    r = a / b
                    if r <= 0 or (ratio is not None and r != ratio):
                        ok = False
                        break
                    ratio = r
            if ok and ratio is not None:
                is_dup = True
                break
        if not is_dup:
            out.append(g)
    return out


def _facet_normals(piece: tuple, dim: int) -> Optional[list]:
    """Outer facet normals of a convex full-dimensional piece, or None.

    Candidates come from single generators (2d: rotation by 90 degrees)
    or generator pairs (3d: cross products).  The candidate halfspace
    intersection always contains the piece; equality is verified by
    checking that every extreme ray of the intersection lies back in the
    piece (exact feasibility), so a None here is the safe answer.
    """
    if dim not in (2, 3):
        return None
    cands = []
    if dim == 2:
        for g in piece:
            cands.append((-g[1], g[0]))
    else:
        for g, h in itertools.combinations(piece, 2):
            cands.append((g[1] * h[2] - g[2] * h[1],
                          g[2] * h[0] - g[0] * h[2],
                          g[0] * h[1] - g[1] * h[0]))
    facets = []
    for n in cands:
        if all(e == 0 for e in n):
            continue
        for oriented in (n, tuple(-e for e in n)):
            if all(sum(o * ge for o, ge in zip(oriented, g)) >= 0
                   for g in piece):
                if not any(_same_direction(oriented, f) for f in facets):
                    facets.append(oriented)
                break
    if not facets:
        return None
    probes = _intersection_generators(facets, dim)
    if probes is None:
        return None
    cols = [[piece[j][i] for j in range(len(piece))] for i in range(dim)]
    for r in probes:
        if not _feasible_nonneg(cols, list(r)):
            return None
    return facets


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


def _intersection_generators(facets: list, dim: int) -> Optional[list]:
    """Generators of the intersection of the facet halfspaces.

    The facet region always contains the piece; feeding these generators
    back through an exact membership test certifies the reverse inclusion.
    Handles pointed regions, wedges with lineality, and halfspaces.
    """
    from .linalg import Matrix, nullspace
    normal_mat = Matrix([list(n) for n in facets])
    rank = normal_mat.rank()
    satisfies = lambda r: all(
        sum(f[i] * r[i] for i in range(dim)) >= 0 for f in facets)
    probes: list = []
    if rank == 1:
        n = facets[0]
        ker = nullspace(Matrix([list(n)]))
        for v in ker.basis:
            probes.append(tuple(v))
            probes.append(tuple(-e for e in v))
        probes.append(tuple(n))
        return probes
    if dim == 2:
        for n in facets:
            for r in ((n[1], -n[0]), (-n[1], n[0])):
                if satisfies(r):
                    probes.append(r)
        return probes or None
    if rank == 2:
        pair = None
        for n1, n2 in itertools.combinations(facets, 2):
            if any(e != 0 for e in _cross(n1, n2)):
                pair = (n1, n2)
                break
        v = _cross(*pair)
        probes.extend([v, tuple(-e for e in v)])
        for n in facets:
            for r in (_cross(n, v), _cross(v, n)):
                if any(e != 0 for e in r) and satisfies(r):
                    probes.append(r)
        return probes
    for n1, n2 in itertools.combinations(facets, 2):
        c = _cross(n1, n2)
        for r in (c, tuple(-e for e in c)):
            if any(e != 0 for e in r) and satisfies(r):
                probes.append(r)
    return probes or None


def _same_direction(a: tuple, b: tuple) -> bool:
    ratio = None
    for x, y in zip(a, b):
        if (x == 0) != (y == 0):
            return False
        if y != 0:
            r = x / y
            if r <= 0 or (ratio is not None and r != ratio):
                return False
            ratio = r
    return ratio is not None


def _ray_distance_batch(g: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Exact sup-norm distance to the ray {t g : t >= 0}, vectorized.

    The profile t -> max_j |x_j - t g_j| is convex piecewise linear, so
    the minimum sits at t = 0, a kink t = x_j / g_j, or a crossing of two
    absolute-value terms.
    """
    m, k = xs.shape
    cands = [np.zeros(m)]
    for i in range(k):
        if g[i] != 0:
            cands.append(xs[:, i] / g[i])
    for i in range(k):
        for j in range(i + 1, k):
            for s in (1.0, -1.0):
                den = g[i] - s * g[j]
                if den != 0:
                    cands.append((xs[:, i] - s * xs[:, j]) / den)
    best = np.full(m, np.inf)
    for t in cands:
        t = np.maximum(t, 0.0)
        val = np.max(np.abs(xs - t[:, None] * g[None, :]), axis=1)
        best = np.minimum(best, val)
    return best


def _piece_distance_exact(piece: tuple, x: tuple[Q, ...], dim: int) -> Q:
    """min t s.t. |x - sum lam_j g_j| <= t, lam >= 0 (exact simplex)."""
    n = len(piece)
    # variables: lam (n), t, s1 (dim), s2 (dim)
    width = n + 1 + 2 * dim
    rows, rhs = [], []
    for i in range(dim):
        row = [piece[j][i] for j in range(n)] + [Q(1)] + [Q(0)] * (2 * dim)
        row[n + 1 + i] = Q(-1)
        rows.append(row)
        rhs.append(x[i])
        row2 = [-piece[j][i] for j in range(n)] + [Q(1)] + [Q(0)] * (2 * dim)
        row2[n + 1 + dim + i] = Q(-1)
        rows.append(row2)
        rhs.append(-x[i])
    c = [Q(0)] * n + [Q(1)] + [Q(0)] * (2 * dim)
    res = solve_standard(rows, rhs, c)
    if res.status != "optimal":
        raise RuntimeError("distance LP must be feasible and bounded")
    return res.objective


def _piece_distance_float(gens: np.ndarray, x: np.ndarray) -> float:
    from scipy.optimize import linprog
    n, dim = gens.shape
    if n == 0:
        return float(np.max(np.abs(x))) if x.size else 0.0
    # variables: lam (n), t; constraints +-(x - G^T lam) <= t
    a_ub = np.zeros((2 * dim, n + 1))
    a_ub[:dim, :n] = gens.T
    a_ub[:dim, n] = -1.0
    a_ub[dim:, :n] = -gens.T
    a_ub[dim:, n] = -1.0
    b_ub = np.concatenate([x, -x])
    c = np.zeros(n + 1)
    c[n] = 1.0
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=[(0, None)] * (n + 1),
                  method="highs")
    if not res.success:
        raise RuntimeError(f"distance LP failed: {res.message}")
    return float(res.fun)


# ---------------------------------------------------------------------------
# Properness and separating functionals
# ---------------------------------------------------------------------------

def sup_norm_q(v: Sequence[Q]) -> Q:
    return max((abs(Q(e)) for e in v), default=Q(0))


def is_proper(cone: Cone) -> tuple[bool, object]:
    """Strict separator over all generators, or a Gordan-style certificate.

    Returns (True, l) with l.g >= |g| on every generator, or (False, mu)
    where mu is a nonnegative nonzero combination of the generators
    summing to zero, which rules out any strict separator.
    """
    gens = cone.all_generators()
    if not gens:
        return True, tuple(Q(1) if i == 0 else Q(0) for i in range(cone.dim))
    k = cone.dim
    prob = IneqProblem(k)
    for g in gens:
        prob.add_ub([-e for e in g], -sup_norm_q(g))
    res = prob.solve()
    if res.status == "optimal":
        return True, res.x
    # Gordan dual: nonnegative mu, sum mu = 1, sum mu_g g = 0.
    m = len(gens)
    rows = [[gens[j][i] for j in range(m)] for i in range(k)]
    rows.append([Q(1)] * m)
    rhs = [Q(0)] * k + [Q(1)]
    dual = solve_standard(rows, rhs, [Q(0)] * m)
    if dual.status != "optimal":
        raise RuntimeError("neither separator nor circuit found")
    return False, dual.x


def separating_functional_with_margin(v1: Cone, kappa,
                                      containing: Optional[Cone] = None
                                      ) -> tuple[Q, ...]:
    """l with l(x) >= kappa |x| on v1 and l > 0 on a containing cone.

    Per generator g it imposes l.g >= kappa |g|, which by the triangle
    inequality gives l(x) >= kappa |x| on all of the hull.
    """
    kappa = Q(kappa) if not isinstance(kappa, float) else Q(kappa).limit_denominator(10**9)
    gens = v1.all_generators()
    prob = IneqProblem(v1.dim)
    for g in gens:
        prob.add_ub([-e for e in g], -kappa * sup_norm_q(g))
    if containing is not None:
        for g in containing.all_generators():
            prob.add_ub([-e for e in g], -sup_norm_q(g) * Q(1, 1000))
    res = prob.solve()
    if res.status != "optimal":
        raise NotProper(None)
    return res.x


def cones_intersect_trivially(k1: Cone, k2: Cone) -> bool:
    """Exact test that the union pieces only meet at the origin."""
    for p1 in k1.pieces:
        for p2 in k2.pieces:
            if _pieces_share_direction(p1, p2, k1.dim):
                return False
    return True


def _pieces_share_direction(p1: tuple, p2: tuple, dim: int) -> bool:
    n1, n2 = len(p1), len(p2)
    if n1 == 0 or n2 == 0:
        return False
    # Feasible region: G1 lam - G2 mu = 0, sum lam + sum mu <= 1, lam, mu >= 0.
    # The intersection contains a nonzero point iff some coordinate of
    # G1 lam can be made nonzero there.
    for i in range(dim):
        for sign in (1, -1):
            prob = IneqProblem(n1 + n2)
            for d in range(dim):
                row = [p1[j][d] for j in range(n1)] + [-p2[j][d] for j in range(n2)]
                prob.add_eq(row, 0)
            prob.add_ub([Q(1)] * (n1 + n2), 1)
            for j in range(n1 + n2):
                row = [Q(0)] * (n1 + n2)
                row[j] = Q(-1)
                prob.add_ub(row, 0)
            obj = [-sign * p1[j][i] for j in range(n1)] + [Q(0)] * n2
            prob.set_objective(obj)
            res = prob.solve()
            if res.status == "optimal" and res.objective < 0:
                lam = res.x[:n1]
                point = tuple(sum(lam[j] * p1[j][d] for j in range(n1))
                              for d in range(dim))
                if any(e != 0 for e in point):
                    return True
    return False


# ---------------------------------------------------------------------------
# Neighborhoods and separation constants
# ---------------------------------------------------------------------------

def conic_neighborhood(cone: Cone, eps) -> Cone:
    """Polyhedral enlargement containing {x : dist(x, cone) <= r |x|}.

    Each sup-normalized generator is replaced by the 2^k corners of its
    eps-box; positive hulls of boxes absorb every relative perturbation
    up to r = eps / (1 + eps).
    """
    eps = Q(eps) if not isinstance(eps, float) else Q(eps).limit_denominator(10**6)
    if eps <= 0:
        raise ValueError("eps must be positive")
    pieces = []
    for piece in cone.pieces:
        corners = []
        for g in piece:
            norm = sup_norm_q(g)
            unit = tuple(e / norm for e in g)
            for signs in itertools.product((Q(-1), Q(1)), repeat=cone.dim):
                corners.append(tuple(u + eps * s for u, s in zip(unit, signs)))
        pieces.append(corners if corners else [])
    return Cone.from_generators(pieces, dim=cone.dim)


def neighborhood_margin(eps) -> float:
    """The certified relative margin of conic_neighborhood: eps/(1+eps)."""
    e = float(eps)
    return e / (1.0 + e)


def d_neighborhood(cone: Cone, d: float) -> Callable[[Sequence], bool]:
    """Membership predicate of the closed d-neighborhood in the sup norm."""
    if d < 0:
        raise ValueError("d must be nonnegative")

    def member(x: Sequence) -> bool:
        return cone.distance(x, exact=False) <= d + 1e-12

    return member


def theta_lower_bound(k1: Cone, k2: Cone, grid_step: float = 0.02,
                      check_intersection: bool = True) -> float:
    """Certified theta with dist(x, K1) >= theta |x| for all x in K2.

    Scans a grid on the sup-norm unit sphere, keeps points within the
    covering radius of K2, and subtracts the covering radius plus the
    float-LP guard; the 1-Lipschitz property of both distances makes the
    result a true lower bound.
    """
    if check_intersection and not cones_intersect_trivially(k1, k2):
        raise ConesIntersect(None)
    if all(len(p) == 0 for p in k2.pieces):
        return 1.0  # vacuous quantification over {0}
    dim = k1.dim
    pts = _sphere_grid(dim, grid_step)
    cover = grid_step / 2.0
    d2 = k2.distance_lower_batch(pts)
    keep = pts[d2 <= cover + FLOAT_LP_GUARD]
    if len(keep) == 0:
        raise GridTooCoarse("no grid points near K2 on the sphere")
    d1 = k1.distance_lower_batch(keep)
    theta = float(np.min(d1)) - cover - 2 * FLOAT_LP_GUARD
    if theta <= 0:
        raise GridTooCoarse(f"slack swamps the minimum ({theta:.3g})")
    return theta


def _sphere_grid(dim: int, step: float) -> np.ndarray:
    """Grid on the sup-norm unit sphere: the faces x_j = +-1."""
    ticks = np.arange(-1.0, 1.0 + step / 2, step)
    pts = []
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    for j in range(dim):
        for sign in (1.0, -1.0):
            for rest in itertools.product(ticks, repeat=dim - 1):
                p = list(rest[:j]) + [sign] + list(rest[j:])
                pts.append(p)
    return np.array(pts, dtype=float)


# ---------------------------------------------------------------------------
# Exact distances between compact sections (used by the weight builders)
# ---------------------------------------------------------------------------

def section_to_cone_distance(k: Cone, l_vec: Sequence[Q], a, b,
                             other: Cone) -> Q:
    """Exact distance between {x in K : a <= l(x) <= b} and the other cone."""
    a, b = Q(a), Q(b)
    best: Optional[Q] = None
    for piece in k.pieces:
        if not piece:
            continue
        for opiece in other.pieces:
            d = _section_piece_distance(piece, l_vec, a, b, opiece, k.dim)
            if d is not None and (best is None or d < best):
                best = d
    if best is None:
        raise RuntimeError("empty section or cone in distance computation")
    return best


def _section_piece_distance(piece: tuple, l_vec: Sequence[Q], a: Q, b: Q,
                            opiece: tuple, dim: int) -> Optional[Q]:
    n1, n2 = len(piece), len(opiece)
    prob = IneqProblem(n1 + n2 + 1)  # lam, mu, t
    lg = [sum(Q(l_vec[i]) * piece[j][i] for i in range(dim)) for j in range(n1)]
    prob.add_ub([-e for e in lg] + [Q(0)] * (n2 + 1), -a)
    prob.add_ub(list(lg) + [Q(0)] * (n2 + 1), b)
    for j in range(n1 + n2 + 1):
        row = [Q(0)] * (n1 + n2 + 1)
        row[j] = Q(-1)
        prob.add_ub(row, 0)
    for i in range(dim):
        row = [piece[j][i] for j in range(n1)] + \
              [-opiece[j][i] for j in range(n2)] + [Q(-1)]
        prob.add_ub(row, 0)
        row2 = [-piece[j][i] for j in range(n1)] + \
               [opiece[j][i] for j in range(n2)] + [Q(-1)]
        prob.add_ub(row2, 0)
    obj = [Q(0)] * (n1 + n2) + [Q(1)]
    prob.set_objective(obj)
    res = prob.solve()
    if res.status != "optimal":
        return None  # section empty for this piece
    return res.objective


def section_min_norm(k: Cone, l_vec: Sequence[Q], a, b) -> Q:
    """Exact min of |x| over {x in K : a <= l(x) <= b}."""
    return section_to_cone_distance(k, l_vec, a, b, Cone.origin(k.dim))


def min_functional_on_sphere(cone: Cone, l_vec: Sequence[Q]) -> Q:
    """Exact inf of l(x) over the unit sphere of the cone (sup norm).

    Minimizes the linear functional over each sphere face intersected
    with each piece; infeasible faces are skipped.
    """
    dim = cone.dim
    best: Optional[Q] = None
    for piece in cone.pieces:
        if not piece:
            continue
        n = len(piece)
        for j in range(dim):
            for sign in (Q(1), Q(-1)):
                prob = IneqProblem(n)
                # face: (G lam)_j = sign, |(G lam)_i| <= 1
                prob.add_eq([piece[m][j] for m in range(n)], sign)
                for i in range(dim):
                    if i == j:
                        continue
                    prob.add_ub([piece[m][i] for m in range(n)], 1)
                    prob.add_ub([-piece[m][i] for m in range(n)], 1)
                for m in range(n):
                    row = [Q(0)] * n
                    row[m] = Q(-1)
                    prob.add_ub(row, 0)
                prob.set_objective(
                    [sum(Q(l_vec[i]) * piece[m][i] for i in range(dim))
                     for m in range(n)])
                res = prob.solve()
                if res.status == "optimal":
                    if best is None or res.objective < best:
                        best = res.objective
    if best is None:
        raise RuntimeError("cone has empty sphere intersection")
    return best
