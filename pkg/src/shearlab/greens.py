"""Green's functions of ``k^2 - d^2/dy^2`` on [0, 1] with Dirichlet walls.

``greens_closed_form`` and ``fk_kernel`` are the explicit kernels of the
plain Helmholtz operator.  ``modified_greens`` solves numerically for the
Green's function of the operator augmented by the sign-favourable part of
the critical-layer potential; ``verify_envelopes`` measures how far its
samples sit below the decay envelopes the theory predicts.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discretization import BandedOperator, Grid, integrate
from .errors import ResolutionGate, SourceOutOfRange
from .profile import ShearProfile, delta_of_lambda, rho_weight


# --- cutoffs ---------------------------------------------------------------

def _expinv(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def plateau(u, inner: float, outer: float):
    """Smooth even bump: 1 for ``|u| <= inner``, 0 for ``|u| >= outer``."""
    a = np.abs(np.asarray(u, dtype=float))
    if outer <= 0:
        return np.zeros_like(a)
    s = (a - inner) / (outer - inner)
    p, q = _expinv(1.0 - s), _expinv(s)
    with np.errstate(invalid="ignore"):
        mid = p / (p + q)
    return np.where(a <= inner, 1.0, np.where(a >= outer, 0.0, mid))


def phi(s):
    """Standard cutoff: 1 on [-3/2, 3/2], 0 outside (-2, 2)."""
    return plateau(s, 1.5, 2.0)


@dataclass(frozen=True)
class CutoffFamily:
    """All cutoffs tied to one profile's critical point and ``delta0``."""

    profile: ShearProfile

    def phi(self, s):
        return phi(s)

    def Psi(self, y):
        p = self.profile
        return plateau(np.asarray(y) - p.y_star, 2 * p.delta0, 3 * p.delta0)

    def PhiInner(self, y):
        p = self.profile
        return plateau(np.asarray(y) - p.y_star, p.delta0 / 4, p.delta0 / 3)

    def _sigma_edge(self, d):
        p = self.profile
        return max(float(p.b(np.float64(p.y_star - d))), float(p.b(np.float64(p.y_star + d)))) - p.b_star

    def PhiStar(self, lam):
        p = self.profile
        return plateau(np.asarray(lam) - p.b_star, self._sigma_edge(2 * p.delta0 / 3),
                       self._sigma_edge(p.delta0))

    def m_cut(self, lam, max_m: int = 256) -> int:
        """Smallest M >= 2 with ``|b - lam| >= |lam - b*|/2`` on ``|y - y*| < 2 delta/M``.

        ``2 delta/M`` is the support radius of ``phi(M (y - y*)/delta)``, so
        the roots of ``b = lam`` fall where ``phi_delta`` is switched on.
        """
        p = self.profile
        gap = abs(lam - p.b_star)
        if gap == 0:
            return 2
        d = float(delta_of_lambda(p, lam))
        for m in range(2, max_m + 1):
            u = np.linspace(-2 * d / m, 2 * d / m, 801)[1:-1]
            if np.all(np.abs(p.b(p.y_star + u) - lam) >= 0.5 * gap):
                return m
        return max_m

    def phi_delta(self, y, lam):
        p = self.profile
        d = float(delta_of_lambda(p, lam))
        if d == 0:
            return np.zeros_like(np.asarray(y, dtype=float))
        u = np.asarray(y) - p.y_star
        dp = d / self.m_cut(lam)
        return phi(u / d) * (1.0 - phi(u / dp))

    def h_scale(self, lam, eps) -> float:
        return 10.0 * (float(delta_of_lambda(self.profile, lam)) + np.sqrt(abs(eps)))

    def bracket(self, y, lam):
        """``phi((y - y*)/delta0) - phi((y - y*)/delta(lam))``."""
        p = self.profile
        u = np.asarray(y) - p.y_star
        d = float(delta_of_lambda(p, lam))
        inner = phi(u / d) if d > 0 else np.zeros_like(u, dtype=float)
        return phi(u / p.delta0) - inner


# --- closed forms ------------------------------------------------------------

def _sinh_ratio(a, c, s):
    """``sinh(a) sinh(c) / sinh(s)`` for ``0 <= a, c`` and ``a + c <= s``."""
    return (np.exp(a + c - s) * (-np.expm1(-2 * a)) * (-np.expm1(-2 * c))
            / (2.0 * (-np.expm1(-2 * s))))


def _cosh_ratio(a, c, s):
    return np.exp(a + c - s) * (1 + np.exp(-2 * a)) * (1 + np.exp(-2 * c)) / (2.0 * (-np.expm1(-2 * s)))


def greens_closed_form(k, y, z):
    """Dirichlet Green's function of ``k^2 - d^2/dy^2``, overflow-safe in ``k``."""
    if k == 0:
        raise ValueError("k must be nonzero")
    q = abs(float(k))
    y, z = np.broadcast_arrays(np.asarray(y, float), np.asarray(z, float))
    lo, hi = np.minimum(y, z), np.maximum(y, z)
    return _sinh_ratio(q * lo, q * (1.0 - hi), q) / q


def fk_kernel(k, y, z):
    """Smooth part of ``d_y d_z G_k``; the singular part is ``delta(y - z)``."""
    if k == 0:
        raise ValueError("k must be nonzero")
    q = abs(float(k))
    y, z = np.broadcast_arrays(np.asarray(y, float), np.asarray(z, float))
    lo, hi = np.minimum(y, z), np.maximum(y, z)
    return -q * _cosh_ratio(q * lo, q * (1.0 - hi), q)


# --- modified Green's function ----------------------------------------------

def modified_potential(p: ShearProfile, grid: Grid, lam: float, eps: float, mu: float = 1.0):
    y = grid.y
    cut = CutoffFamily(p).bracket(y, lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        V = p.d2b(y) / (p.b(y) - lam + 1j * eps) * cut
    return mu * np.where(cut == 0, 0.0, V)


def modified_operator(p: ShearProfile, k, lam, eps, grid: Grid, mu: float = 1.0,
                      gate: bool = True) -> BandedOperator:
    if eps == 0:
        raise ValueError("eps must be nonzero")
    if gate and abs(eps) < p.eps_floor(grid.h):
        raise ResolutionGate(f"|eps|={abs(eps):.3e} below floor {p.eps_floor(grid.h):.3e} at n={grid.n}")
    return BandedOperator(grid, k, modified_potential(p, grid, lam, eps, mu)[1:-1])


@dataclass
class GreensColumn:
    k: float
    lam: float
    eps: float
    z: float
    z_index: int
    values: np.ndarray
    grid: Grid
    profile: ShearProfile = field(repr=False)
    operator: BandedOperator = field(repr=False)
    h_values: np.ndarray | None = None


def _column(op: BandedOperator, j: int) -> np.ndarray:
    grid = op.grid
    rhs = np.zeros(grid.n, dtype=complex)
    rhs[j - 1] = 1.0 / grid.h
    return op.solve(rhs)


def modified_greens(p: ShearProfile, k, lam, eps, grid: Grid, z: float, mu: float = 1.0,
                    op: BandedOperator | None = None, gate: bool = True) -> GreensColumn:
    """Column ``y -> G(y, z)`` of the modified Green's function.

    The source is the discrete delta ``1/h`` at the interior node nearest to
    ``z``; pass ``op`` to reuse one factorisation across many sources.
    """
    op = op or modified_operator(p, k, lam, eps, grid, mu, gate)
    j = grid.nearest(z)
    if not 1 <= j <= grid.n:
        raise SourceOutOfRange(f"source {z} sits on a wall")
    return GreensColumn(k, lam, eps, float(grid.y[j]), j, _column(op, j), grid, p, op)


def hk_kernel(col: GreensColumn) -> np.ndarray:
    """``[d_z + phi((y - y*)/h) d_y] G(y, z)`` with ``h = 10 (delta + sqrt|eps|)``."""
    p, grid, j = col.profile, col.grid, col.z_index
    d = float(delta_of_lambda(p, col.lam))
    if abs(col.z - p.y_star) > 4 * d:
        raise SourceOutOfRange(f"z={col.z:.6g} outside S_(4 delta), delta={d:.3e}")
    if not 2 <= j <= grid.n - 1:
        raise SourceOutOfRange("neighbouring sources leave the grid")
    dz = (_column(col.operator, j + 1) - _column(col.operator, j - 1)) / (2 * grid.h)
    dy = np.gradient(col.values, grid.h, edge_order=2)
    cut = phi((grid.y - p.y_star) / CutoffFamily(p).h_scale(col.lam, col.eps))
    col.h_values = dz + cut * dy
    return col.h_values


# --- envelope verification ---------------------------------------------------

BOUND_IDS = ("near_diag_value", "near_diag_slope", "exp_decay", "layer_decay",
             "simple_value", "simple_slope", "hk_value", "hk_slope")


@dataclass(frozen=True)
class EnvelopeRow:
    k: float
    lam: float
    eps: float
    z: float
    bound_id: str
    max_ratio: float
    n: int
    refined_ratio: float = float("nan")

    @property
    def drift(self) -> float:
        return abs(self.refined_ratio / self.max_ratio - 1.0)


def _local_mean_sq(grid, g, centre, radius):
    y = grid.y
    mask = np.abs(y - centre) <= radius
    if mask.sum() < 3:
        return float(np.max(np.abs(g[mask])) ** 2) if mask.any() else 0.0
    return float(np.trapezoid(np.abs(g[mask]) ** 2, y[mask]))


def envelope_ratios(p: ShearProfile, k, lam, eps, z, grid: Grid) -> dict[str, float]:
    """Largest ratio of each sampled quantity to its envelope, one column.

    Ratios whose regime condition fails for this column are NaN.
    """
    col = modified_greens(p, k, lam, eps, grid, z)
    y, g = grid.y, col.values
    q = abs(k)
    rz = float(rho_weight(p, col.z, lam, eps))
    ry = rho_weight(p, y, lam, eps)
    dg = np.gradient(g, grid.h, edge_order=2)
    W = np.minimum(np.exp(-q * np.abs(y - col.z)), np.minimum(ry**2 / rz**2, rz / ry))
    near = np.abs(y - col.z) <= min(rz, 1.0 / q)
    out = {b: float("nan") for b in BOUND_IDS}
    out["near_diag_value"] = float(np.max(np.abs(g[near])) / min(rz, 1.0 / q))
    out["near_diag_slope"] = float(np.max(np.abs(dg[near])))
    if rz >= 1.0 / q:
        M1 = np.sqrt(q * _local_mean_sq(grid, g, col.z, 1.0 / q))
        out["exp_decay"] = float(np.max(np.abs(g) * np.exp(q * np.abs(y - col.z))) / M1)
    else:
        M = np.sqrt(_local_mean_sq(grid, g, col.z, rz) / rz)
        env = np.minimum(ry**2 / rz**2, rz / ry)
        out["layer_decay"] = float(np.max(np.abs(g) / env) / M)
    scale = 1.0 / (q + 1.0 / rz)
    out["simple_value"] = float(np.max(np.abs(g) / (scale * W)))
    interior = slice(1, -1)
    out["simple_slope"] = float(np.max((np.abs(dg) / ((q + 1.0 / ry) * scale * W))[interior]))
    d = float(delta_of_lambda(p, lam))
    j = col.z_index
    if abs(col.z - p.y_star) <= 4 * d and 2 <= j <= grid.n - 1:
        H = hk_kernel(col)
        dH = np.gradient(H, grid.h, edge_order=2)
        out["hk_value"] = float(np.max(np.abs(H) / W))
        # the derivative of H keeps the grid-scale kink at y = z
        off = np.abs(y - col.z) > 2 * grid.h
        out["hk_slope"] = float(np.max((np.abs(dH) / ((q + 1.0 / ry) * W))[off]))
    return out


def verify_envelopes(p: ShearProfile, cases, n: int = 1024, refine: bool = True) -> list[EnvelopeRow]:
    """Envelope ratios for each ``(k, lam, eps, z)`` case at ``n`` and ``2n``."""
    rows = []
    g1 = Grid(n)
    g2 = Grid(2 * n + 1) if refine else None
    for k, lam, eps, z in cases:
        r1 = envelope_ratios(p, k, lam, eps, z, g1)
        r2 = envelope_ratios(p, k, lam, eps, z, g2) if refine else {}
        for bid in BOUND_IDS:
            if np.isnan(r1[bid]):
                continue
            rows.append(EnvelopeRow(k, lam, eps, z, bid, r1[bid], n, r2.get(bid, float("nan"))))
    return rows


# --- consistency checks --------------------------------------------------------

def closed_form_error(k, grid: Grid) -> float:
    """Max deviation of the discrete Green's matrix from the closed form on all node pairs."""
    op = BandedOperator(grid, k)
    Gh = op.solve(np.eye(grid.n) / grid.h)[1:-1].real
    y = grid.interior
    return float(np.max(np.abs(Gh - greens_closed_form(k, y[:, None], y[None, :]))))


def kernel_identity_routes(k, f, g, grid: Grid) -> tuple[complex, complex]:
    """Two evaluations of ``<d_y d_z G, f(y) g(z)>``.

    By parts it is ``int int G f' g'``; through the kernel split it is
    ``int int F_k f g + int f g``.  ``f`` and ``g`` are node samples.
    """
    w = grid.trapezoid_weights()
    y = grid.y
    G = greens_closed_form(k, y[:, None], y[None, :])
    F = fk_kernel(k, y[:, None], y[None, :])
    df, dg = np.gradient(f, grid.h, edge_order=2), np.gradient(g, grid.h, edge_order=2)
    by_parts = (w * df) @ G @ (w * dg)
    split = (w * f) @ F @ (w * g) + np.sum(w * f * g)
    return complex(by_parts), complex(split)


def symmetry_defect(p: ShearProfile, k, lam, eps, grid: Grid, ys, zs) -> float:
    """``max |G(y, z) - G(z, y)| / max |G|`` over the sample grid ``ys x zs``."""
    op = modified_operator(p, k, lam, eps, grid, gate=False)
    iy = np.array([grid.nearest(v) for v in ys])
    iz = np.array([grid.nearest(v) for v in zs])
    cols = {j: _column(op, j) for j in set(iy) | set(iz)}
    G_yz = np.array([[cols[j][i] for j in iz] for i in iy])
    G_zy = np.array([[cols[i][j] for j in iz] for i in iy])
    return float(np.max(np.abs(G_yz - G_zy)) / np.max(np.abs(G_yz)))
