"""Subharmonic and plurisubharmonic weight constructions with measured constants.

The building block is Theta(z) = log|sin z / z|, evaluated stably via

    |sin z / z|^2 = (sin^2 x + sinh^2 y) / (x^2 + y^2),

with a power series near the removable singularity at 0 and an
exponential-free form for large |y|.  Theta is -inf exactly at the
nonzero real multiples of pi.

On top of it sit:

* ``build_psi``  -- a one-variable subharmonic bump that dominates the
  ramp x * chi_[a,b](x) from below at a calibrated abscissa x0;
* ``build_phi``  -- a plurisubharmonic cone weight, realized as a finite
  max of scaled sections s * Phi_{xi,tau}(z/s) with proof witnesses
  injected at evaluation points inside the cone (the finite max is a
  true lower surrogate of the full supremum);
* ``build_gs_oracle`` -- a lattice sum of floored Theta terms tracking
  -|x|^(1/alpha) on a calibration box, with a two-sided bound whose
  constants are computed, not assumed;
* ``build_rho`` -- the combined weight Phi + sigma - l(x), with explicit
  constants b and H assembled from the separation margins of the input
  cones.

Every builder returns the constants that make its inequality template
true, and the test suite re-verifies the templates on fresh samples.
All inequality slacks live in DEFAULT_TOLERANCES.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .cones import (Cone, IneqProblem, conic_neighborhood,
                    cones_intersect_trivially, min_functional_on_sphere,
                    neighborhood_margin, section_min_norm,
                    section_to_cone_distance, separating_functional_with_margin,
                    sup_norm_q, theta_lower_bound)
from .linalg import Matrix, nullspace
from .lp import Q

DEFAULT_TOLERANCES = {
    "ineq_slack": 1e-12,        # closed-form inequalities (Lemma 4 suite)
    "builder_slack": 1e-9,      # builder templates on sampled points
    "quadrature": 1e-8,         # sub-mean-value tester
}


class MaximizationFailed(RuntimeError):
    pass


class GsCalibrationError(RuntimeError):
    """The lattice sum does not reach the requested decay on the box."""


# ---------------------------------------------------------------------------
# Theta and mu
# ---------------------------------------------------------------------------

_SINC_COEFFS = [1.0, -1.0 / 6, 1.0 / 120, -1.0 / 5040, 1.0 / 362880,
                -1.0 / 39916800]


def theta(z) -> np.ndarray:
    """log |sin z / z| with Theta(0) = 0; -inf at z = n pi, n != 0 real."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    ay = np.abs(y)
    r2 = x * x + y * y
    out = np.empty(z.shape, dtype=float)
    small = r2 < 0.0625  # |z| < 1/4: series for sin z / z
    if np.any(small):
        zs = z[small]
        w = np.zeros(zs.shape, dtype=complex)
        z2 = zs * zs
        p = np.ones(zs.shape, dtype=complex)
        for ck in _SINC_COEFFS:
            w += ck * p
            p = p * z2
        out[small] = np.log(np.abs(w))
    big = ~small
    if np.any(big):
        xb, ab, r2b = x[big], ay[big], r2[big]
        e = np.exp(-2.0 * ab)
        inner = ((1.0 - e) / 2.0) ** 2 + np.sin(xb) ** 2 * e
        with np.errstate(divide="ignore"):
            vals = ab + 0.5 * np.log(inner) - 0.5 * np.log(r2b)
        # Snap to -inf in a relative guard band around the zeros of sin:
        # the poles are exactly the nonzero real multiples of pi.
        nearest = np.round(xb / math.pi)
        pole = ((nearest != 0)
                & (np.abs(xb - nearest * math.pi) <= 1e-12 * np.maximum(1.0, np.abs(xb)))
                & (ab <= 1e-12))
        vals[pole] = -np.inf
        out[big] = vals
    return out if out.shape else float(out)


def mu(t) -> np.ndarray:
    """The decreasing majorant: Theta on [0, pi/2], -log t beyond."""
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape, dtype=float)
    low = t <= math.pi / 2
    tl = t[low]
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.log(np.sinc(tl / math.pi))
    out[low] = np.where(tl == 0.0, 0.0, val)
    th = t[~low]
    out[~low] = -np.log(th)
    return out if out.shape else float(out)


# ---------------------------------------------------------------------------
# The basic weight of the norm family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightParams:
    alpha: float
    a_scale: float
    b_scale: float
    cone: Cone

    def __post_init__(self):
        if self.alpha < 1:
            raise ValueError("alpha must be >= 1")
        if self.a_scale <= 0 or self.b_scale <= 0:
            raise ValueError("scales must be positive")


def sigma_weight(params: WeightParams, zs) -> np.ndarray:
    """-|x/A|^(1/alpha) + dist(Bx, U) + |By| in the uniform norm.

    The cone distance is positively homogeneous, so dist(Bx, U) is
    evaluated as B * dist(x, U).
    """
    zs = np.asarray(zs, dtype=complex)
    single = zs.ndim == 1
    pts = np.atleast_2d(zs)
    x, y = pts.real, pts.imag
    xn = np.max(np.abs(x), axis=1)
    yn = np.max(np.abs(y), axis=1)
    dist = params.cone.distance_batch(x)
    out = (-((xn / params.a_scale) ** (1.0 / params.alpha))
           + params.b_scale * dist + params.b_scale * yn)
    return out[0] if single else out


@dataclass
class WeightEvaluator:
    """An evaluation rule with the constants its bounds were built from."""

    label: str
    fn: Callable[..., np.ndarray]
    constants: dict = field(default_factory=dict)

    def __call__(self, zs, **kw) -> np.ndarray:
        return self.fn(zs, **kw)

    def meta_json(self) -> dict:
        return {"label": self.label,
                "constants": {k: (float(v) if np.isscalar(v) else v)
                              for k, v in self.constants.items()}}


# ---------------------------------------------------------------------------
# Lemma 4 verification suite
# ---------------------------------------------------------------------------

def verify_lemma4(n_samples: int = 100_000, seed: int = 0,
                  tol: float = DEFAULT_TOLERANCES["ineq_slack"],
                  grid_points: int = 10_000) -> dict:
    """Sampled checks of the growth/monotonicity facts about Theta.

    Checks the vertical-growth lower bound, the |y|-Lipschitz upper bound
    on the central strip, the trigonometric intermediate inequality, and
    strict decrease on [0, pi].  -inf on the right side of a lower bound
    passes vacuously.
    """
    rng = np.random.default_rng(seed)
    report = {"seed": seed, "n_samples": n_samples, "tol": tol}

    x = rng.uniform(-12.0, 12.0, n_samples)
    y = rng.uniform(-12.0, 12.0, n_samples)
    lower = theta(x + 1j * y) - theta(x + 0j)
    viol = np.where(lower < -tol)[0]
    report["growth_lower"] = {
        "violations": int(len(viol)),
        "worst": float(lower.min()) if len(lower) else 0.0,
        "witnesses": [[float(x[i]), float(y[i])] for i in viol[:3]],
    }

    xs = rng.uniform(-3 * math.pi / 4, 3 * math.pi / 4, n_samples)
    ys = rng.uniform(-12.0, 12.0, n_samples)
    upper = theta(xs + 0j) + np.abs(ys) - theta(xs + 1j * ys)
    violu = np.where(upper < -tol)[0]
    report["strip_upper"] = {
        "violations": int(len(violu)),
        "worst": float(upper.min()),
        "witnesses": [[float(xs[i]), float(ys[i])] for i in violu[:3]],
    }

    ay = np.abs(ys)
    lhs = np.cos(2 * xs) * (1 - np.exp(-2 * ay)) / 2 - (1 - np.exp(-4 * ay)) / 4
    rhs = np.sinc(xs / math.pi) ** 2 * ys ** 2
    gap = rhs - lhs
    violi = np.where(gap < -tol)[0]
    report["intermediate"] = {
        "violations": int(len(violi)),
        "worst": float(gap.min()),
        "witnesses": [[float(xs[i]), float(ys[i])] for i in violi[:3]],
    }

    grid = np.linspace(0.0, math.pi, grid_points)
    vals = theta(grid + 0j)
    diffs = vals[:-1] - vals[1:]
    report["strict_decrease"] = {
        "violations": int(np.sum(~(diffs > 0))),
        "min_step": float(np.nanmin(diffs[np.isfinite(diffs)])),
    }

    report["passed"] = all(report[k]["violations"] == 0 for k in
                           ("growth_lower", "strip_upper", "intermediate",
                            "strict_decrease"))
    return report


# ---------------------------------------------------------------------------
# The one-variable bump (Lemma 5 shape)
# ---------------------------------------------------------------------------

@dataclass
class PsiData:
    a: float
    b: float
    kappa: float
    t1: float
    t0: float
    h: float
    mu_h: float
    lam: float
    x0: float
    r_slope: float
    strip_bound: float   # Psi >= strip_bound for |x| <= kappa
    unit_bound: float    # Psi >= unit_bound for |x| <= 1 (needs kappa >= 1)

    def psi(self, zs) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex)
        return (theta(self.t1 * (zs - self.t0)) - self.mu_h) / self.lam


def build_psi(a: float, b: float, kappa: float,
              grid_points: int = 4097) -> tuple[WeightEvaluator, PsiData]:
    """Calibrate the scaled bump and its slope, peak abscissa and floor.

    The profile mu(|t(x)|) - mu(h) is maximized against x over [a, b] by a
    dense scan plus golden-section refinement (abscissa tolerance 1e-10,
    ties resolved toward the smaller abscissa by the scan order).
    """
    if not (0 < a < b) or kappa <= 0:
        raise ValueError("need 0 < a < b and kappa > 0")
    t1 = math.pi / (2 * (b + kappa))
    t0 = (a + b) / 2
    h = t1 * (b - a) / 2
    mu_h = float(mu(h))

    def profile(x):
        return (mu(np.abs(t1 * (np.asarray(x) - t0))) - mu_h) / np.asarray(x)

    grid = np.linspace(a, b, grid_points)
    vals = profile(grid)
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid_points - 1)]
    x0 = _golden_max(profile, lo, hi, 1e-10)
    lam = float(profile(x0))
    if not lam > 0:
        raise MaximizationFailed(f"nonpositive slope lambda = {lam}")

    r_slope = t1 / lam
    strip_bound = (float(mu(min(t1 * (kappa + t0), math.pi / 2))) - mu_h) / lam
    unit_bound = (float(mu(min(t1 * (1 + t0), math.pi / 2))) - mu_h) / lam

    data = PsiData(a, b, kappa, t1, t0, h, mu_h, lam, float(x0), r_slope,
                   strip_bound, unit_bound)
    ev = WeightEvaluator(
        label="psi_bump", fn=data.psi,
        constants={"lambda": lam, "x0": float(x0), "R": r_slope,
                   "strip_bound": strip_bound, "a": a, "b": b, "kappa": kappa})
    return ev, data


def _golden_max(f, lo: float, hi: float, xtol: float) -> float:
    invphi = (math.sqrt(5) - 1) / 2
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = float(f(c)), float(f(d))
    while hi - lo > xtol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = float(f(c))
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = float(f(d))
    return (lo + hi) / 2


# ---------------------------------------------------------------------------
# The cone weight (Lemma 6 shape)
# ---------------------------------------------------------------------------

@dataclass
class PhiData:
    cone: Cone
    l_exact: tuple
    lf: np.ndarray              # the functional as a float row
    ct: np.ndarray              # (k-1, k): kernel coefficient functionals
    xi_cs: np.ndarray           # (nxi, k-1): c-tilde images of the xi samples
    psi: PsiData
    tau: float
    m_ker: float
    m_q: float                  # certified sup of |.|_xi operator norms over Q
    m_sample: float             # min over sampled xi of the per-xi lower norm
    d_sep: float
    lam_k: float
    r: float
    r_prime: float
    h_unit: float
    s_factors: tuple = (0.25, 0.5, 1.0, 2.0, 4.0)

    def evaluate(self, zs, in_cone: Optional[np.ndarray] = None) -> np.ndarray:
        """Finite max of scaled sections, with witness injection.

        ``in_cone`` marks the points whose real part lies in the cone; for
        those, the proof witnesses (the point's own cross-section direction
        and the scale l(x)/x0) join the candidate set, which makes the
        lower bound at cone points hold by construction.
        """
        zs = np.asarray(zs, dtype=complex)
        single = zs.ndim == 1
        pts = np.atleast_2d(zs)
        x, y = pts.real, pts.imag
        m = len(pts)
        lx = x @ self.lf
        ly = y @ self.lf
        cx = x @ self.ct.T
        cy = y @ self.ct.T
        xnorm = np.max(np.abs(x), axis=1)
        best = np.full(m, -np.inf)

        tau = self.tau
        base = np.maximum(xnorm, 1e-9)
        lz = lx + 1j * ly
        for ci in self.xi_cs:
            ux = cx - lx[:, None] * ci[None, :]
            uy = cy - ly[:, None] * ci[None, :]
            xi_norm = np.abs(lx) + np.sum(np.abs(ux), axis=1)
            scales = np.stack([np.maximum(xi_norm, 1e-12)]
                              + [f * base for f in self.s_factors])  # (ns, m)
            vals = scales * self.psi.psi(lz[None, :] / scales)
            for j in range(ux.shape[1]):
                uz = ux[:, j] + 1j * uy[:, j]
                vals = vals + tau * scales * theta(uz[None, :] / scales)
            best = np.maximum(best, vals.max(axis=0))

        mask = self._cone_mask(x, lx) if in_cone is None else \
            np.asarray(in_cone, dtype=bool) & (lx > 0)
        if np.any(mask):
            lxm = lx[mask]
            sx = lxm / self.psi.x0
            # xi_x = x / l(x): its kernel coefficients are cx / lx, and the
            # dual values at x vanish identically, so only the imaginary
            # parts survive in the Theta terms.
            uy = cy[mask] - (ly[mask] / lxm)[:, None] * cx[mask]
            val = sx * self.psi.psi(self.psi.x0 + 1j * ly[mask] / sx)
            for j in range(uy.shape[1]):
                val = val + tau * sx * theta(1j * uy[:, j] / sx)
            best[mask] = np.maximum(best[mask], val)
        return best[0] if single else best

    def _cone_mask(self, x: np.ndarray, lx: np.ndarray) -> np.ndarray:
        return self.cone.contains_batch(x) & (lx > 1e-12)


def build_phi(cone: Cone, outside: Cone, l_vec: Sequence, a: float, b: float,
              tau_request: float = 0.0, n_xi_extra: int = 8,
              seed: int = 0) -> tuple[WeightEvaluator, Optional[PhiData]]:
    """Cone weight with certified constants (r, r', tau, m, M, d).

    ``cone`` is the proper cone K carrying the lower bound; ``outside`` is
    the closed complement of its conic neighborhood (so the neighborhood
    itself never needs to be materialized: the separation constant d is
    the exact LP distance between the slab section of K and outside u {0}).
    In one variable the weight degenerates to max(l(x), 0) exactly.
    """
    k = cone.dim
    lf = np.array([float(e) for e in l_vec])
    if k == 1:
        def fn(zs, in_cone=None):
            zs = np.asarray(zs, dtype=complex)
            single = zs.ndim == 1
            pts = np.atleast_2d(zs)
            out = np.maximum(pts.real @ lf, 0.0)
            return out[0] if single else out
        ev = WeightEvaluator("phi_cone_1d", fn,
                             constants={"r": 0.0, "r_prime": 0.0, "tau": 0.0,
                                        "k": 1})
        return ev, None

    gens = cone.all_generators()
    if not gens:
        raise ValueError("cone weight needs a nonzero cone; use k=1 branch or max(l,0)")
    l_exact = tuple(Q(e) if not isinstance(e, float)
                    else Q(e).limit_denominator(10 ** 9) for e in l_vec)
    for g in gens:
        if sum(le * ge for le, ge in zip(l_exact, g)) <= 0:
            raise ValueError("functional must be positive on the cone generators")

    lam_k = float(min_functional_on_sphere(cone, l_exact))
    if lam_k <= 0:
        raise ValueError("functional is not bounded below on the cone sphere")

    # Kernel coefficient functionals c-tilde: rows 1..k-1 of the inverse of
    # the basis (xi0 | e_1 ... e_{k-1}).
    ker = nullspace(Matrix([list(l_exact)]))
    e_basis = list(ker.basis)
    xi0 = _scaled_generator(gens[0], l_exact)
    cols = [list(xi0)] + [list(v) for v in e_basis]
    basis_mat = Matrix.from_columns([tuple(c) for c in cols])
    inv = _exact_inverse(basis_mat)
    ct_exact = [inv.row(i) for i in range(1, k)]
    ct = np.array([[float(e) for e in row] for row in ct_exact])

    # Sampled cross-section: scaled generators plus seeded rational mixes.
    xi_exact = [_scaled_generator(g, l_exact) for g in gens]
    rng = np.random.default_rng(seed)
    piece_list = [p for p in cone.pieces if p]
    for _ in range(n_xi_extra):
        piece = piece_list[rng.integers(len(piece_list))]
        weights = [Q(int(w), 8) for w in rng.integers(1, 9, size=len(piece))]
        mix = tuple(sum(w * g[i] for w, g in zip(weights, piece))
                    for i in range(k))
        xi_exact.append(_scaled_generator(mix, l_exact))
    xi_cs = np.array([[float(sum(r[i] * xi[i] for i in range(k)))
                       for r in ct_exact] for xi in xi_exact])

    # Certified norm-equivalence constants. M_Q is the exact sup over the
    # whole cross-section Q (the 1-norm of the coefficient image is convex,
    # so vertices = scaled generators suffice); m_ker is the exact min of
    # the coefficient 1-norm over the unit sphere of ker l, which is the
    # only place the lower constant is used.
    corners = list(itertools.product((Q(-1), Q(1)), repeat=k))
    m_q = Q(0)
    vertex_cs = [[sum(r[i] * xi[i] for i in range(k)) for r in ct_exact]
                 for xi in ([_scaled_generator(g, l_exact) for g in gens])]
    for corner in corners:
        lc = sum(l_exact[i] * corner[i] for i in range(k))
        cc = [sum(r[i] * corner[i] for i in range(k)) for r in ct_exact]
        for vc in vertex_cs:
            val = abs(lc) + sum(abs(cc[j] - lc * vc[j]) for j in range(k - 1))
            m_q = max(m_q, val)
    m_ker = _min_ker_coeff_norm(ct_exact, l_exact, k)
    m_sample = min(_per_xi_min_norm(ct_exact, l_exact, vc, k)
                   for vc in ([[
                       sum(r[i] * xi[i] for i in range(k)) for r in ct_exact]
                       for xi in xi_exact]))

    d_sep = min(section_to_cone_distance(cone, l_exact, Q(a), Q(b), outside),
                section_min_norm(cone, l_exact, Q(a), Q(b)))
    if d_sep <= 0:
        raise ValueError("slab section touches the outside cone")

    psi_ev, psi = build_psi(a, b, kappa=1.0)
    mu_arg = float(m_ker) * float(d_sep) / (k - 1)
    mu_val = float(mu(mu_arg))
    if mu_val >= 0:
        raise ValueError("degenerate separation: mu argument not in the "
                         "decay region")
    tau = max(tau_request, -b / mu_val)

    h_unit = -psi.unit_bound  # Psi >= -h_unit on |x| <= 1
    h_tau = h_unit - tau * (k - 1) * float(mu(1.0))
    r = float(m_q) * (psi.r_slope + tau)
    r_prime = float(m_q) * h_tau

    data = PhiData(cone=cone, l_exact=l_exact, lf=lf, ct=ct, xi_cs=xi_cs,
                   psi=psi, tau=tau, m_ker=float(m_ker), m_q=float(m_q),
                   m_sample=float(m_sample), d_sep=float(d_sep), lam_k=lam_k,
                   r=r, r_prime=r_prime, h_unit=h_unit)
    ev = WeightEvaluator(
        "phi_cone", data.evaluate,
        constants={"r": r, "r_prime": r_prime, "tau": tau, "m": float(m_sample),
                   "m_ker": float(m_ker), "M": float(m_q), "d": float(d_sep),
                   "lambda_K": lam_k, "R": psi.r_slope, "x0": psi.x0,
                   "H": h_unit, "k": k})
    return ev, data


def _scaled_generator(g: Sequence[Q], l_exact: Sequence[Q]) -> tuple:
    lv = sum(l_exact[i] * g[i] for i in range(len(g)))
    if lv <= 0:
        raise ValueError("generator not in the positive half-space")
    return tuple(e / lv for e in g)


def _exact_inverse(m: Matrix) -> Matrix:
    n = m.nrows
    cols = []
    from .linalg import solve, unit_vec
    for i in range(n):
        col = solve(m, unit_vec(n, i))
        if col is None:
            raise ValueError("basis matrix is singular")
        cols.append(col)
    return Matrix.from_columns(cols)


def _min_ker_coeff_norm(ct_exact, l_exact, k: int) -> Q:
    """Exact min of the coefficient 1-norm over the ker-l unit sphere."""
    best = None
    for j in range(k):
        for sign in (Q(1), Q(-1)):
            prob = IneqProblem(k + (k - 1))  # x, t
            face = [Q(0)] * (k + k - 1)
            face[j] = Q(1)
            prob.add_eq(face, sign)
            prob.add_eq(list(l_exact) + [Q(0)] * (k - 1), 0)
            for i in range(k):
                if i == j:
                    continue
                row = [Q(0)] * (k + k - 1)
                row[i] = Q(1)
                prob.add_ub(list(row), 1)
                row[i] = Q(-1)
                prob.add_ub(list(row), 1)
            for t in range(k - 1):
                for sgn in (1, -1):
                    row = [sgn * e for e in ct_exact[t]] + [Q(0)] * (k - 1)
                    row[k + t] = Q(-1)
                    prob.add_ub(row, 0)
            obj = [Q(0)] * k + [Q(1)] * (k - 1)
            prob.set_objective(obj)
            res = prob.solve()
            if res.status == "optimal":
                if best is None or res.objective < best:
                    best = res.objective
    if best is None or best <= 0:
        raise ValueError("kernel coefficient norm degenerate")
    return best


def _per_xi_min_norm(ct_exact, l_exact, xi_c, k: int) -> Q:
    """Exact min over the sup sphere of |l(x)| + sum |c(x) - l(x) c(xi)|."""
    best = None
    for j in range(k):
        for sign in (Q(1), Q(-1)):
            prob = IneqProblem(k + k)  # x, t0..t_{k-1}
            face = [Q(0)] * (2 * k)
            face[j] = Q(1)
            prob.add_eq(face, sign)
            for i in range(k):
                if i == j:
                    continue
                row = [Q(0)] * (2 * k)
                row[i] = Q(1)
                prob.add_ub(list(row), 1)
                row[i] = Q(-1)
                prob.add_ub(list(row), 1)
            for sgn in (1, -1):
                row = [sgn * e for e in l_exact] + [Q(0)] * k
                row[k] = Q(-1)
                prob.add_ub(row, 0)
            for t in range(k - 1):
                coeff = [ct_exact[t][i] - xi_c[t] * l_exact[i]
                         for i in range(k)]
                for sgn in (1, -1):
                    row = [sgn * e for e in coeff] + [Q(0)] * k
                    row[k + 1 + t] = Q(-1)
                    prob.add_ub(row, 0)
            prob.set_objective([Q(0)] * k + [Q(1)] * k)
            res = prob.solve()
            if res.status == "optimal":
                if best is None or res.objective < best:
                    best = res.objective
    if best is None:
        raise ValueError("sphere faces all infeasible")
    return best


# ---------------------------------------------------------------------------
# The lattice-sum weight tracking -|x|^(1/alpha)
# ---------------------------------------------------------------------------

@dataclass
class GsData:
    alpha: float
    c: float
    n_terms: int
    t_box: float
    floors: np.ndarray
    scales: np.ndarray          # c / n^alpha
    offset: float               # calibration shift c0
    b_const: float
    h_const: float
    k: int

    def raw(self, zs) -> np.ndarray:
        """The floored lattice sum itself; raw(0) = 0."""
        zs = np.asarray(zs, dtype=complex)
        single = zs.ndim == 1
        pts = np.atleast_2d(zs)
        out = np.zeros(len(pts))
        for j in range(self.k):
            col = pts[:, j]
            vals = theta(col[:, None] * self.scales[None, :])
            out += np.sum(np.maximum(vals, self.floors[None, :]), axis=1)
        return out[0] if single else out

    def calibrated(self, zs) -> np.ndarray:
        return self.raw(zs) - self.offset

    def envelope(self, t) -> np.ndarray:
        """Upper envelope on the real axis (floors are inactive there)."""
        t = np.asarray(t, dtype=float)
        vals = mu(np.abs(t)[..., None] * self.scales)
        return np.sum(np.maximum(vals, self.floors), axis=-1)


def build_gs_oracle(alpha: float, c: float = 8.0, n_terms: Optional[int] = None,
                    t_box: float = 10.0, k: int = 1,
                    grid_points: int = 200_001) -> tuple[WeightEvaluator, GsData]:
    """Plurisubharmonic lattice sum with a certified two-sided bound.

    Each term is a Theta composed with a scaled coordinate, floored at a
    constant one unit below the term's envelope minimum on the box, which
    removes the -inf dips (a max with a constant stays plurisubharmonic)
    without touching the envelope.  The calibration offset c0 is the
    measured worst slack of envelope + t^(1/alpha) on the box, so that

        -|x|^(1/alpha) - H <= sigma(x+iy) <= -|x|^(1/alpha) + B |y|

    holds on the box with computed B and H.
    """
    if alpha <= 1:
        raise ValueError("alpha must be > 1")
    if n_terms is None:
        n_terms = max(8, int(1.5 * (2 * c * t_box / math.pi) ** (1 / alpha)) + 2)
    n = np.arange(1, n_terms + 1, dtype=float)
    scales = c / n ** alpha
    floors = mu(scales * t_box) - 1.0

    data = GsData(alpha, c, n_terms, t_box, floors, scales, 0.0, 0.0, 0.0, k)
    grid = np.linspace(0.0, t_box, grid_points)
    env = data.envelope(grid)
    slack = env + grid ** (1.0 / alpha)
    step = t_box / (grid_points - 1)
    lip = 0.65 * c * float(np.sum(1.0 / n ** alpha))
    guard = step ** (1.0 / alpha) + lip * step
    c0 = max(0.0, float(np.max(slack))) + guard
    if float(np.max(slack)) > 0.25 * t_box ** (1.0 / alpha):
        raise GsCalibrationError(
            f"decay shortfall {float(np.max(slack)):.3g} too large; "
            "increase c or n_terms")
    b_const = c * k * float(np.sum(1.0 / n ** alpha))
    h_const = c0 + k * float(np.sum(1.0 - floors))

    data.offset = c0
    data.b_const = b_const
    data.h_const = h_const
    ev = WeightEvaluator(
        "gs_lattice_sum", data.calibrated,
        constants={"B": b_const, "H": h_const, "offset": c0, "alpha": alpha,
                   "c": c, "n_terms": n_terms, "t_box": t_box, "k": k})
    return ev, data


# ---------------------------------------------------------------------------
# The combined weight (Lemma 7 shape)
# ---------------------------------------------------------------------------

@dataclass
class RhoData:
    phi: PhiData
    gs: GsData
    l_exact: tuple
    lf: np.ndarray
    l_norm: float               # the 1-norm = dual sup norm of l
    b_const: float
    h_const: float
    kappa: float
    d_nbhd: float
    v1: Cone
    v2: Cone
    theta1: float               # dist(x, K1) >= theta1 |x| outside V1
    theta2: float
    theta_u: float

    def evaluate(self, zs, in_v2: Optional[np.ndarray] = None) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex)
        single = zs.ndim == 1
        pts = np.atleast_2d(zs)
        phi_vals = self.phi.evaluate(pts, in_cone=in_v2)
        gs_vals = self.gs.calibrated(pts)
        lx = pts.real @ self.lf
        out = phi_vals + gs_vals - lx
        return out[0] if single else out


def build_rho(alpha: float, u_cone: Cone, k1: Cone, k2: Cone, kappa: float,
              d_nbhd: float, t_box: float = 10.0, a: float = 1.0,
              b: float = 2.0, c_gs: float = 8.0, eps0: float = 0.25,
              seed: int = 0) -> tuple[WeightEvaluator, RhoData]:
    """Assemble the combined cone weight with computed (b, H).

    Follows the construction: disjoint conic neighborhoods of the two
    cones inside an enlarged copy of U, a separating functional with
    margin kappa on the first, the cone weight over the second, and the
    lattice-sum weight; the output constants are assembled from the exact
    separation margins.
    """
    k = u_cone.dim
    if not cones_intersect_trivially(k1, k2):
        raise ValueError("K1 and K2 must meet only at the origin")
    for g in k1.all_generators() + k2.all_generators():
        if not u_cone.contains(g):
            raise ValueError("K1 and K2 must be contained in U")

    u_big = conic_neighborhood(u_cone, Fraction(1, 8))
    eps = Fraction(eps0).limit_denominator(10 ** 6)
    for _ in range(24):
        v1 = conic_neighborhood(k1, eps)
        v2 = conic_neighborhood(k2, eps)
        inside = all(u_big.contains(g) for g in
                     v1.all_generators() + v2.all_generators())
        if inside and cones_intersect_trivially(v1, v2):
            break
        eps = eps / 2
    else:
        raise ValueError("could not separate the cone neighborhoods")

    kappa_eff = max(Q(kappa).limit_denominator(10 ** 9), Q(1, 100))
    l_exact = separating_functional_with_margin(v1, kappa_eff, containing=u_big)
    lf = np.array([float(e) for e in l_exact])
    l_norm = float(sum(abs(e) for e in l_exact))

    phi_ev, phi = build_phi(v2, v1, l_exact, a, b, seed=seed)
    gs_ev, gs = build_gs_oracle(alpha, c=c_gs, t_box=t_box, k=k)

    theta1 = neighborhood_margin(eps)
    theta2 = neighborhood_margin(eps)
    ker = nullspace(Matrix([list(l_exact)]))
    half_gens = ([tuple(v) for v in ker.basis]
                 + [tuple(-e for e in v) for v in ker.basis]
                 + [tuple(-e for e in l_exact)])
    half_cone = Cone.single(half_gens, dim=k)
    theta_u = theta_lower_bound(u_cone, half_cone, grid_step=0.02)

    r, r_prime = phi.r, phi.r_prime
    b_const = r + gs.b_const + max((float(kappa_eff) + l_norm) / theta1,
                                   l_norm / theta_u)
    h_const = gs.h_const + (r_prime + l_norm) * (d_nbhd / theta2 if d_nbhd > 0
                                                 else 0.0)

    data = RhoData(phi=phi, gs=gs, l_exact=tuple(l_exact), lf=lf,
                   l_norm=l_norm, b_const=b_const, h_const=h_const,
                   kappa=float(kappa_eff), d_nbhd=d_nbhd, v1=v1, v2=v2,
                   theta1=theta1, theta2=theta2, theta_u=theta_u)
    ev = WeightEvaluator(
        "rho_combined", data.evaluate,
        constants={"b": b_const, "H": h_const, "r": r, "r_prime": r_prime,
                   "B": gs.b_const, "H_sigma": gs.h_const,
                   "theta1": theta1, "theta_u": theta_u,
                   "l_norm": l_norm, "kappa": float(kappa_eff),
                   "eps": float(eps)})
    return ev, data


# ---------------------------------------------------------------------------
# Plurisubharmonicity tester
# ---------------------------------------------------------------------------

def check_plurisubharmonic(w: Callable, centers, directions, radii,
                           nodes: int = 512,
                           tol: float = DEFAULT_TOLERANCES["quadrature"],
                           ) -> dict:
    """Sub-mean-value test on complex circles.

    For each center z0, complex direction u and radius r the circle
    average of w must dominate w(z0) up to the quadrature tolerance.
    Centers at -inf pass vacuously; circles that sample a -inf node are
    skipped and counted (the true mean is finite but the discrete
    average is not informative there).
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=complex))
    directions = np.atleast_2d(np.asarray(directions, dtype=complex))
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    angles = np.exp(2j * math.pi * np.arange(nodes) / nodes)
    violations = []
    skipped = 0
    tested = 0
    for z0 in centers:
        w0 = float(np.asarray(w(z0[None, :]))[0])
        if w0 == -np.inf:
            continue
        for u in directions:
            for r in radii:
                ring = z0[None, :] + r * angles[:, None] * u[None, :]
                vals = np.asarray(w(ring))
                if np.any(np.isneginf(vals)):
                    skipped += 1
                    continue
                tested += 1
                mean = float(np.mean(vals))
                if mean < w0 - tol:
                    violations.append({
                        "center": [repr(c) for c in z0],
                        "direction": [repr(c) for c in u],
                        "radius": float(r),
                        "deficit": w0 - mean,
                    })
    return {"tested": tested, "skipped": skipped,
            "violations": violations, "passed": not violations,
            "nodes": nodes, "tol": tol}
