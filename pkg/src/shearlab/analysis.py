"""Norms, weighted Gram matrices, decay-rate fits and depletion measurements."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.stats import linregress

from .discretization import Grid, derivative, integrate
from .errors import InconclusiveFit
from .profile import ShearProfile, delta_of_lambda, dk_scale, rho_k

R2_MIN = 0.9


# --- norms -------------------------------------------------------------------

def norm_L2(f, grid: Grid) -> float:
    return float(np.sqrt(np.real(integrate(grid, np.abs(np.asarray(f)) ** 2))))


def norm_Hmk(f, grid: Grid, k, m: int = 1) -> float:
    """``sum_{j<=m} |k|^{-j} ||d^j f||``."""
    total, g = 0.0, np.asarray(f)
    for j in range(m + 1):
        total += abs(k) ** (-j) * norm_L2(g, grid)
        g = derivative(grid, g)
    return total


def norm_H1k(f, grid: Grid, k) -> float:
    return norm_Hmk(f, grid, k, 1)


def reference_scale(omega0, grid: Grid, k) -> float:
    """``M_k = |k|^{5/2} ||omega0||_{H^3_k}``."""
    return abs(k) ** 2.5 * norm_Hmk(omega0, grid, k, 3)


def _layer(p: ShearProfile, grid: Grid, lam, eps):
    w = float(delta_of_lambda(p, lam)) + np.sqrt(abs(eps))
    inside = np.abs(grid.y - p.y_star) <= 3 * w
    return w, inside


def _sup(v, mask) -> float:
    return float(np.max(np.abs(v[mask]))) if mask.any() else 0.0


def _l2_on(grid, v, mask) -> float:
    if mask.sum() < 2:
        return 0.0
    return float(np.sqrt(np.trapezoid(np.abs(v[mask]) ** 2, grid.y[mask])))


def x_norm_blocks(f, p: ShearProfile, grid: Grid, k, lam, eps, flavor: str) -> dict[str, float]:
    """The four blocks of the XN / XL norms; the norm is their sum.

    Inside ``S = {|y - y*| <= 3 (delta + sqrt|eps|)}`` the blocks are weighted
    L2 norms of ``f`` and ``f'``, outside they are weighted grid maxima.
    """
    f = np.asarray(f)
    df = derivative(grid, f)
    w, S = _layer(p, grid, lam, eps)
    dk = float(dk_scale(p, k, lam, eps))
    rk = rho_k(p, grid.y, k, lam, eps)
    if flavor == "XN":
        inner = [w ** -0.5 * dk ** (-1.75 + a) for a in (0, 1)]
        outer = [rk ** (-1.75 + a) for a in (0, 1)]
    elif flavor == "XL":
        inner = [w ** -0.5 * dk ** a for a in (0, 1)]
        outer = [rk ** (a + 1) / dk for a in (0, 1)]
    else:
        raise ValueError(f"unknown flavour {flavor!r}")
    return {
        "inner_value": inner[0] * _l2_on(grid, f, S),
        "inner_slope": inner[1] * _l2_on(grid, df, S),
        "outer_value": _sup(outer[0] * f, ~S),
        "outer_slope": _sup(outer[1] * df, ~S),
    }


def norm_XN(f, p: ShearProfile, grid: Grid, k, lam, eps) -> float:
    """Weighted norm tuned to functions vanishing like ``rho^{7/4}`` at the critical point."""
    return sum(x_norm_blocks(f, p, grid, k, lam, eps, "XN").values())


def norm_XL(f, p: ShearProfile, grid: Grid, k, lam, eps) -> float:
    return sum(x_norm_blocks(f, p, grid, k, lam, eps, "XL").values())


# --- Gram matrices on interior nodes (Dirichlet walls) ------------------------

def _forward_difference(n: int, h: float) -> np.ndarray:
    D = np.zeros((n + 1, n))
    i = np.arange(n)
    D[i, i] = 1.0 / h
    D[i + 1, i] = -1.0 / h
    return D


def _gram(node_w, edge_w, grid: Grid) -> np.ndarray:
    D = _forward_difference(grid.n, grid.h)
    return np.diag(node_w) + D.T @ (edge_w[:, None] * D)


def gram_H1k(grid: Grid, k) -> np.ndarray:
    """Gram matrix of ``||g||^2 + |k|^{-2} ||g'||^2``."""
    return _gram(np.full(grid.n, grid.h), np.full(grid.n + 1, grid.h / k**2), grid)


def _weights(p, grid, k, lam, eps, flavor):
    h = grid.h
    w, _ = _layer(p, grid, lam, eps)
    dk = float(dk_scale(p, k, lam, eps))
    yn = grid.interior
    ye = 0.5 * (grid.y[:-1] + grid.y[1:])
    Sn = np.abs(yn - p.y_star) <= 3 * w
    Se = np.abs(ye - p.y_star) <= 3 * w
    # the sup blocks enter as root-mean-square averages over the outer region
    outer_len = max(1.0 - 6 * w, h)
    rn, re = rho_k(p, yn, k, lam, eps), rho_k(p, ye, k, lam, eps)
    if flavor == "XN":
        in_n, in_e = dk ** -3.5 / w, dk ** -1.5 / w
        out_n, out_e = rn ** -3.5, re ** -1.5
    else:
        in_n, in_e = 1.0 / w, dk**2 / w
        out_n, out_e = rn**2 / dk**2, re**4 / dk**2
    node_w = h * np.where(Sn, in_n, out_n / outer_len)
    edge_w = h * np.where(Se, in_e, out_e / outer_len)
    return node_w, edge_w


def gram_X(p: ShearProfile, grid: Grid, k, lam, eps, flavor: str) -> np.ndarray:
    """Inner-product surrogate of the XN / XL norms on interior nodes.

    The L2 blocks are kept as written; each sup block is replaced by the
    root-mean-square of the same weighted quantity over the outer region,
    which is a lower bound of the sup and keeps the norm Euclidean.
    """
    if flavor not in ("XN", "XL"):
        raise ValueError(f"unknown flavour {flavor!r}")
    return _gram(*_weights(p, grid, k, lam, eps, flavor), grid)


def weighted_singular_values(M: np.ndarray, gram: np.ndarray) -> np.ndarray:
    """Singular values of ``M`` as a map from the ``gram``-normed space to itself."""
    R = cholesky(gram, lower=False)
    # R M R^{-1}; the Gram matrices are real so R^T = R^H
    X = solve_triangular(R, np.asarray(M).T, trans="T", lower=False).T
    return np.linalg.svd(R @ X, compute_uv=False)


# --- decay fits ----------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    quantity: str
    window: tuple[float, float]
    slope: float
    intercept: float
    r2: float
    Mk: float = float("nan")
    samples: int = 0

    @property
    def inconclusive(self) -> bool:
        return not self.r2 >= R2_MIN


def _loglog_fit(t, v, name, window, Mk=float("nan"), strict=False) -> RateFit:
    t, v = np.asarray(t, float), np.asarray(v, float)
    res = linregress(np.log(t), np.log(v))
    r2 = float(res.rvalue ** 2) if np.ptp(np.log(v)) > 0 else 1.0
    fit = RateFit(name, tuple(window), float(res.slope), float(res.intercept), r2, Mk, t.size)
    if strict and fit.inconclusive:
        raise InconclusiveFit(f"{name}: r^2={fit.r2:.3f} on {window}")
    return fit


def quantity_norms(trace, quantity: str) -> np.ndarray:
    data = {"psi": trace.psi, "ux": trace.ux, "uy": trace.uy, "omega": trace.omega}[quantity]
    return np.array([norm_L2(row, trace.grid) for row in data])


def fit_decay_rate(trace, quantity: str, window=(20.0, 200.0), strict: bool = False) -> RateFit:
    """Least-squares slope of ``log ||q(t)||`` against ``log t`` inside ``window``."""
    if quantity not in ("psi", "ux", "uy"):
        raise ValueError(f"unknown quantity {quantity!r}")
    t = np.asarray(trace.times)
    sel = (t >= window[0]) & (t <= window[1])
    if sel.sum() < 10 or np.any(t[sel] < 1):
        raise ValueError("need at least 10 sample times in the window, all >= 1")
    v = quantity_norms(trace, quantity)[sel]
    Mk = reference_scale(trace.omega[0], trace.grid, trace.k)
    return _loglog_fit(t[sel], v, quantity, window, Mk, strict)


@dataclass(frozen=True)
class DepletionReport:
    spatial: RateFit
    temporal: RateFit
    T0: float
    y_window: tuple[float, float]
    envelope_y: np.ndarray = field(repr=False, default=None)
    envelope: np.ndarray = field(repr=False, default=None)

    @property
    def spatial_exponent(self) -> float:
        return self.spatial.slope

    @property
    def temporal_exponent(self) -> float:
        return -self.temporal.slope


def depletion_measure(trace, T0: float = 20.0, y_window=(0.02, 0.2), t_window=None,
                      strict: bool = False, omega=None) -> DepletionReport:
    """Spatial and temporal vanishing rates of the vorticity at the critical point.

    The spatial exponent fits ``sup_{t >= T0} |omega(t, y)|`` against
    ``|y - y*|`` on ``y_window`` (both sides pooled); the temporal exponent
    fits ``sup_{|y - y*| <= t^{-1/2}} |omega(t, y)|`` against ``t``.
    ``omega`` overrides the trace's vorticity snapshots.
    """
    if T0 < 10:
        raise ValueError("T0 must be at least 10")
    grid, ys = trace.grid, trace.y_star
    if y_window[0] < 3 * grid.h:
        raise ValueError("spatial window must exclude |y - y*| < 3h")
    t = np.asarray(trace.times)
    W = np.abs(np.asarray(trace.omega if omega is None else omega))
    late = t >= T0
    if late.sum() < 2:
        raise ValueError("trace does not reach T0")
    env = W[late].max(axis=0)
    dist = np.abs(grid.y - ys)
    sel = (dist >= y_window[0]) & (dist <= y_window[1])
    spatial = _loglog_fit(dist[sel], env[sel], "omega_envelope", y_window, strict=strict)
    tw = t_window or (T0, float(t[-1]))
    tsel = (t >= tw[0]) & (t <= tw[1])
    peaks = np.array([W[i][dist <= t[i] ** -0.5].max() for i in np.flatnonzero(tsel)])
    temporal = _loglog_fit(t[tsel], peaks, "omega_core", tw, strict=strict)
    return DepletionReport(spatial, temporal, T0, tuple(y_window), grid.y[sel], env[sel])
