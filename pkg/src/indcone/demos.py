"""Desk-scale demonstrations of the weighted-norm machinery.

Everything here is boxed quadrature with explicit truncation accounting:
sup norms and L2 norms of entire samples against the cone weights, the
multiplicative approximating sequence g_n(z) = g(z) f(z/n), the mollifier
splitting of an entire sample across a cone with its d-bar defect, and a
one-variable Cauchy-transform solver for the inhomogeneous Cauchy-Riemann
equation together with a consistency report for the weighted L2 estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .cones import Cone
from .weights import WeightParams, sigma_weight


class BoundaryNotNegligible(ValueError):
    def __init__(self, ratio: float):
        self.ratio = ratio
        super().__init__(f"boundary contribution ratio {ratio:.3g} too large; "
                         "enlarge the grid")


class ResidualTooLarge(ValueError):
    pass


@dataclass
class EntireSample:
    """A closed-form entire function with a stable log-modulus."""

    label: str
    fn: Callable[[np.ndarray], np.ndarray]
    log_abs: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, zs: np.ndarray) -> np.ndarray:
        return self.fn(zs)

    def log_modulus(self, zs: np.ndarray) -> np.ndarray:
        if self.log_abs is not None:
            return self.log_abs(zs)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.fn(zs)))


def exponential_sample(coeffs: Sequence[float]) -> EntireSample:
    """exp(<c, z>), the standard decaying sample on a cone where <c, x> < 0."""
    c = np.asarray(coeffs, dtype=float)

    def fn(zs):
        zs = np.atleast_2d(np.asarray(zs, dtype=complex))
        return np.exp(zs @ c)

    def log_abs(zs):
        zs = np.atleast_2d(np.asarray(zs, dtype=complex))
        return zs.real @ c

    return EntireSample(f"exp(<{list(c)}, z>)", fn, log_abs)


@dataclass
class BoxGrid:
    """Tensor grid over C^k: x and y each range over [-extent, extent]."""

    k: int
    x_extent: float
    y_extent: float
    nx: int
    ny: int

    def points(self) -> np.ndarray:
        xs = [np.linspace(-self.x_extent, self.x_extent, self.nx)] * self.k
        ys = [np.linspace(-self.y_extent, self.y_extent, self.ny)] * self.k
        grids = np.meshgrid(*xs, *ys, indexing="ij")
        x_parts = grids[:self.k]
        y_parts = grids[self.k:]
        pts = np.stack([xp + 1j * yp for xp, yp in zip(x_parts, y_parts)],
                       axis=-1)
        return pts.reshape(-1, self.k)

    def cell_measure(self) -> float:
        dx = 2 * self.x_extent / (self.nx - 1)
        dy = 2 * self.y_extent / (self.ny - 1)
        return (dx * dy) ** self.k

    def boundary_mask(self) -> np.ndarray:
        pts = self.points()
        on_x = np.max(np.abs(pts.real), axis=1) >= self.x_extent - 1e-12
        on_y = np.max(np.abs(pts.imag), axis=1) >= self.y_extent - 1e-12
        return on_x | on_y


def sup_norm_estimate(f: EntireSample, params: WeightParams, grid: BoxGrid,
                      boundary_tol: float = 1e-6,
                      require_decay: bool = True) -> dict:
    """Grid estimate of sup |f| e^(-sigma) with a boundary-decay check."""
    pts = grid.points()
    logvals = f.log_modulus(pts) - sigma_weight(params, pts)
    peak = float(np.max(logvals))
    edge = float(np.max(logvals[grid.boundary_mask()]))
    ratio = math.exp(min(edge - peak, 700.0))
    out = {"log_sup": peak, "sup": float(np.exp(min(peak, 700.0))),
           "boundary_ratio": ratio, "decayed": ratio <= boundary_tol}
    if require_decay and not out["decayed"]:
        raise BoundaryNotNegligible(ratio)
    return out


def l2_norm_estimate(f: EntireSample, params: WeightParams, grid: BoxGrid,
                     boundary_tol: float = 1e-6,
                     require_decay: bool = True) -> dict:
    """Quadrature estimate of the weighted L2 norm with truncation bound."""
    pts = grid.points()
    logint = 2.0 * (f.log_modulus(pts) - sigma_weight(params, pts))
    peak = float(np.max(logint))
    edge = float(np.max(logint[grid.boundary_mask()]))
    ratio = math.exp(min(edge - peak, 700.0))
    vals = np.exp(np.minimum(logint, 700.0))
    norm = math.sqrt(float(np.sum(vals)) * grid.cell_measure())
    out = {"l2": norm, "boundary_ratio": ratio, "decayed": ratio <= boundary_tol}
    if require_decay and not out["decayed"]:
        raise BoundaryNotNegligible(ratio)
    return out


# ---------------------------------------------------------------------------
# The approximating sequence g_n(z) = g(z) f(z/n)
# ---------------------------------------------------------------------------

def lemma2_sequence(g: EntireSample, f: EntireSample, w_cone: Cone,
                    wp_cone: Cone, alpha: float, a_g: float, b_g: float,
                    a_f: float, b_f: float, n_max: int, grid: BoxGrid,
                    slack: float = 1e-9) -> dict:
    """Check the uniform norm bound for the multiplicative sequence.

    For each n, the three norms of g_n (order-1 on W, order-1 on W' with
    the stretched scale n a, order-alpha on W') must not exceed the
    product norm bound; all six norms are grid estimates over the same
    grid, so the comparison carries a common truncation error absorbed by
    the slack.  Also reports the decay rate eta of the tail bounds, which
    must be positive whenever the scale strictly grows.
    """
    b_tilde = b_g + b_f
    p_w1 = WeightParams(1.0, a_g, b_tilde, w_cone)
    p_wp_alpha = WeightParams(alpha, a_g, b_tilde, wp_cone)
    p_f = WeightParams(1.0, a_f, b_f, wp_cone)
    p_g1 = WeightParams(1.0, a_g, b_g, w_cone)
    p_galpha = WeightParams(alpha, a_g, b_g, wp_cone)

    pts = grid.points()
    f_norm = sup_norm_estimate(f, p_f, grid)["log_sup"]
    g1 = sup_norm_estimate(g, p_g1, grid)["log_sup"]
    ga = sup_norm_estimate(g, p_galpha, grid)["log_sup"]
    rhs = math.exp(f_norm) * (math.exp(g1) + math.exp(ga))

    rows = []
    ok = True
    for n in range(1, n_max + 1):
        def gn_log(zs, n=n):
            return g.log_modulus(zs) + f.log_modulus(zs / n)
        gn = EntireSample(f"g_{n}", lambda zs, n=n: g(zs) * f(zs / n), gn_log)
        n1 = sup_norm_estimate(gn, p_w1, grid, require_decay=False)["log_sup"]
        p_scaled = WeightParams(1.0, n * a_f, b_tilde, wp_cone)
        n2 = sup_norm_estimate(gn, p_scaled, grid, require_decay=False)["log_sup"]
        n3 = sup_norm_estimate(gn, p_wp_alpha, grid, require_decay=False)["log_sup"]
        lhs = max(math.exp(n1), math.exp(n2), math.exp(n3))
        rows.append({"n": n, "lhs": lhs, "rhs": rhs})
        ok = ok and lhs <= rhs * (1 + slack)

    def eta(a, a_prime):
        return min(a ** (-1 / alpha) - a_prime ** (-1 / alpha),
                   1 / a - 1 / a_prime)

    return {"rows": rows, "bound": rhs, "passed": ok,
            "eta_example": eta(a_g, 2 * a_g),
            "eta_positive": eta(a_g, 2 * a_g) > 0}


# ---------------------------------------------------------------------------
# Mollifier splitting
# ---------------------------------------------------------------------------

@dataclass
class Mollifier:
    """Product bump of width delta with numerically normalized unit mass."""

    delta: float
    mass_1d: float = field(init=False)

    def __post_init__(self):
        nodes, wts = _simpson(-self.delta, self.delta, 513)
        self.mass_1d = float(np.sum(self.bump_raw(nodes) * wts))

    def bump_raw(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        u = (t / self.delta) ** 2
        out = np.zeros(t.shape)
        inside = u < 1.0
        out[inside] = np.exp(-1.0 / (1.0 - u[inside]))
        return out

    def bump(self, t: np.ndarray) -> np.ndarray:
        return self.bump_raw(t) / self.mass_1d

    def bump_deriv(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        u = (t / self.delta) ** 2
        out = np.zeros(t.shape)
        inside = u < 1.0
        ti = t[inside]
        ui = u[inside]
        out[inside] = (np.exp(-1.0 / (1.0 - ui))
                       * (-2.0 * ti / self.delta ** 2) / (1.0 - ui) ** 2)
        return out / self.mass_1d

    def left_tail(self, t: np.ndarray) -> np.ndarray:
        """G(t) = integral of the bump over (-inf, t], per-point Simpson."""
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        lo = np.clip(flat, -self.delta, self.delta)
        u = np.linspace(0.0, 1.0, 257)
        w = _simpson_weights(257)
        span = lo + self.delta
        nodes = -self.delta + span[:, None] * u[None, :]
        vals = self.bump(nodes)
        out = np.sum(vals * w[None, :], axis=1) * span
        out[flat >= self.delta] = 1.0 * (self.mass_1d / self.mass_1d)
        out[flat <= -self.delta] = 0.0
        return out.reshape(t.shape)

    def right_tail(self, t: np.ndarray) -> np.ndarray:
        """H(t) = integral over [t, inf), quadratured independently."""
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        hi = np.clip(flat, -self.delta, self.delta)
        u = np.linspace(0.0, 1.0, 257)
        w = _simpson_weights(257)
        span = self.delta - hi
        nodes = hi[:, None] + span[:, None] * u[None, :]
        vals = self.bump(nodes)
        out = np.sum(vals * w[None, :], axis=1) * span
        out[flat <= -self.delta] = 1.0
        out[flat >= self.delta] = 0.0
        return out.reshape(t.shape)


def _simpson(lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes = np.linspace(lo, hi, n)
    return nodes, _simpson_weights(n) * (hi - lo)


def _simpson_weights(n: int) -> np.ndarray:
    if n % 2 == 0:
        raise ValueError("Simpson needs an odd node count")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / (3.0 * (n - 1))


@dataclass
class OrthantSplitting:
    """g1, g2 and the d-bar defect for the nonnegative-orthant cone.

    The orthant makes the region integrals products of one-dimensional
    tails, so all values are independent quadratures rather than a single
    1 - g2 shortcut; their sum recovering 1 is itself a check of the
    mollifier normalization.
    """

    moll: Mollifier
    k: int
    f: EntireSample

    def g2(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.prod(self.moll.left_tail(x), axis=1)

    def g1(self, x: np.ndarray) -> np.ndarray:
        """Integral over the complement, decomposed into product slabs."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        left = self.moll.left_tail(x)
        right = self.moll.right_tail(x)
        total = left + right
        out = np.zeros(len(x))
        prefix = np.ones(len(x))
        for j in range(self.k):
            tail = np.prod(total[:, j + 1:], axis=1) if j + 1 < self.k else 1.0
            out += prefix * right[:, j] * tail
            prefix = prefix * left[:, j]
        return out

    def g2_partial(self, x: np.ndarray, j: int) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        parts = self.moll.left_tail(x)
        bump = self.moll.bump(x[:, j])
        others = np.prod(np.delete(parts, j, axis=1), axis=1) if self.k > 1 else 1.0
        return bump * others

    def f1_tilde(self, zs: np.ndarray) -> np.ndarray:
        zs = np.atleast_2d(np.asarray(zs, dtype=complex))
        return self.g1(zs.real) * self.f(zs)

    def f2_tilde(self, zs: np.ndarray) -> np.ndarray:
        zs = np.atleast_2d(np.asarray(zs, dtype=complex))
        return self.g2(zs.real) * self.f(zs)

    def dbar_defect(self, zs: np.ndarray, j: int) -> np.ndarray:
        """The closed form -(1/2) f(z) d g2 / d x_j."""
        zs = np.atleast_2d(np.asarray(zs, dtype=complex))
        return -0.5 * self.f(zs) * self.g2_partial(zs.real, j)


def mollifier_splitting(delta: float, f: EntireSample, k: int = 1
                        ) -> OrthantSplitting:
    return OrthantSplitting(Mollifier(delta), k, f)


def finite_difference_dbar(fn: Callable, zs: np.ndarray, j: int,
                           h: float) -> np.ndarray:
    """Central-difference (d/dx_j + i d/dy_j)/2 of a complex field."""
    zs = np.atleast_2d(np.asarray(zs, dtype=complex))
    ex = np.zeros(zs.shape[1], dtype=complex)
    ex[j] = 1.0
    ddx = (fn(zs + h * ex) - fn(zs - h * ex)) / (2 * h)
    ddy = (fn(zs + 1j * h * ex) - fn(zs - 1j * h * ex)) / (2 * h)
    return 0.5 * (ddx + 1j * ddy)


# ---------------------------------------------------------------------------
# One-variable Cauchy transform
# ---------------------------------------------------------------------------

def mollified_disc(width: float = 0.2) -> Callable[[np.ndarray], np.ndarray]:
    """Smooth radial datum: 1 inside radius 1 - width, 0 outside radius 1."""

    def ramp(u):
        u = np.clip(u, 0.0, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            bu = np.where(u > 0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
            bv = np.where(u < 1, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
        return bu / (bu + bv)

    def eta(zs):
        zs = np.asarray(zs, dtype=complex)
        return ramp((1.0 - np.abs(zs)) / width) + 0j

    return eta


def dbar_solve_1d(eta: Callable, targets: np.ndarray, support_radius: float,
                  n_r: int = 64, n_theta: int = 64,
                  chunk: int = 2048) -> np.ndarray:
    """psi(z) = (1/pi) integral of eta(w)/(z-w), by polar quadrature.

    Recentred at the singularity the integrand is smooth: midpoint in the
    radius (order 2, the rate the refinement study measures) and the
    trapezoid rule in the angle (spectral for periodic integrands).
    """
    targets = np.asarray(targets, dtype=complex).reshape(-1)
    r_max = float(np.max(np.abs(targets))) + support_radius + 0.1
    r_nodes = (np.arange(n_r) + 0.5) * (r_max / n_r)
    dr = r_max / n_r
    th = 2 * math.pi * np.arange(n_theta) / n_theta
    ring = np.exp(1j * th)
    phase = np.exp(-1j * th) * (2 * math.pi / n_theta)
    out = np.empty(targets.shape, dtype=complex)
    for lo in range(0, len(targets), chunk):
        zt = targets[lo:lo + chunk]
        args = zt[:, None, None] - r_nodes[None, :, None] * ring[None, None, :]
        vals = eta(args)
        out[lo:lo + chunk] = (vals @ phase).sum(axis=1) * dr / math.pi
    return out


def dbar_refinement_study(eta: Callable, targets: np.ndarray,
                          exact: np.ndarray, support_radius: float,
                          levels: Sequence[tuple[int, int]] = ((8, 16), (16, 32), (32, 64)),
                          ) -> dict:
    """Max-error decay across quadrature levels and the observed order."""
    errs = []
    for n_r, n_t in levels:
        psi = dbar_solve_1d(eta, targets, support_radius, n_r, n_t)
        errs.append(float(np.max(np.abs(psi - exact))))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    return {"errors": errs, "orders": orders,
            "observed_order": min(orders) if orders else None}


def dbar_residual(eta: Callable, targets: np.ndarray, support_radius: float,
                  h: float = 0.02, n_r: int = 96, n_theta: int = 128) -> float:
    """Sup of |finite-difference dbar psi - eta| over the targets."""
    targets = np.asarray(targets, dtype=complex).reshape(-1)
    stencil = np.concatenate([targets + h, targets - h,
                              targets + 1j * h, targets - 1j * h])
    vals = dbar_solve_1d(eta, stencil, support_radius, n_r, n_theta)
    m = len(targets)
    ddx = (vals[:m] - vals[m:2 * m]) / (2 * h)
    ddy = (vals[2 * m:3 * m] - vals[3 * m:]) / (2 * h)
    dbar = 0.5 * (ddx + 1j * ddy)
    return float(np.max(np.abs(dbar - eta(targets))))


def hormander_check(eta: Callable, rho: Callable, extent: float = 2.5,
                    n: int = 161, support_radius: float = 1.0,
                    n_r: int = 64, n_theta: int = 64) -> dict:
    """Consistency report for the weighted L2 estimate in one variable.

    The Cauchy transform is one particular solution, not necessarily the
    minimal one the estimate guarantees, so a raw failure triggers the
    documented fallback: subtract the weighted least-squares projection
    onto low-degree polynomials (still a solution of the same equation)
    and report both verdicts.  A pass is consistency, not proof.
    """
    xs = np.linspace(-extent, extent, n)
    zz = (xs[:, None] + 1j * xs[None, :]).reshape(-1)
    dA = (xs[1] - xs[0]) ** 2
    psi = dbar_solve_1d(eta, zz, support_radius, n_r, n_theta)
    ev = np.asarray(eta(zz))
    rv = np.asarray(rho(zz[:, None])).reshape(-1) if _wants_matrix(rho) \
        else np.asarray(rho(zz))
    wgt = np.exp(-np.minimum(rv, 700.0))
    kernel = (1.0 + np.abs(zz) ** 2) ** (-2.0)

    def lhs_of(p):
        return 2.0 * float(np.sum(np.abs(p) ** 2 * wgt * kernel)) * dA

    rhs = float(np.sum(np.abs(ev) ** 2 * wgt)) * dA
    raw_lhs = lhs_of(psi)

    basis = np.stack([np.ones_like(zz), zz, zz ** 2, zz ** 3], axis=1)
    wk = wgt * kernel
    gram = (basis.conj().T * wk) @ basis
    rhs_vec = (basis.conj().T * wk) @ psi
    coef = np.linalg.solve(gram, rhs_vec)
    corrected = psi - basis @ coef
    corr_lhs = lhs_of(corrected)

    return {"raw_lhs": raw_lhs, "corrected_lhs": corr_lhs, "rhs": rhs,
            "raw_pass": raw_lhs <= rhs * (1 + 1e-9),
            "corrected_pass": corr_lhs <= rhs * (1 + 1e-9)}


def _wants_matrix(rho: Callable) -> bool:
    try:
        probe = np.zeros((2, 1), dtype=complex)
        out = np.asarray(rho(probe))
        return out.shape == (2,)
    except Exception:
        return False
