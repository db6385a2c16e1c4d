"""Uniform grid, tridiagonal Helmholtz operators, and quadrature rules.

Grid functions are plain complex arrays of length ``n + 2`` holding the
samples at every node, walls included.  Dirichlet data means the two end
entries are zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import simpson
from scipy.linalg.lapack import zgttrf, zgttrs

from .errors import SingularSystem, UnresolvedOscillation

PIVOT_TOL = 1e-14


@dataclass(frozen=True)
class Grid:
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("grid needs at least 3 interior points")

    @property
    def h(self) -> float:
        return 1.0 / (self.n + 1)

    @cached_property
    def y(self) -> np.ndarray:
        return np.arange(self.n + 2) * self.h

    @property
    def interior(self) -> np.ndarray:
        return self.y[1:-1]

    def zeros(self) -> np.ndarray:
        return np.zeros(self.n + 2, dtype=complex)

    def embed(self, interior_values) -> np.ndarray:
        """Pad interior samples with zero wall values."""
        u = self.zeros()
        u[1:-1] = interior_values
        return u

    def nearest(self, z: float) -> int:
        return int(np.clip(np.rint(z / self.h), 0, self.n + 1))

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n + 2, self.h)
        w[[0, -1]] = 0.5 * self.h
        return w


class BandedOperator:
    """``u -> k^2 u - D2 u + V u`` on interior nodes, Dirichlet walls eliminated.

    The LU factorisation is computed on first use and reused; after that the
    object is never mutated, so concurrent solves are safe.
    """

    def __init__(self, grid: Grid, k: float, V=None):
        self.grid = grid
        self.k = k
        n, h = grid.n, grid.h
        V = np.zeros(n, dtype=complex) if V is None else np.asarray(V, dtype=complex)
        if V.shape == (n + 2,):
            V = V[1:-1]
        if V.shape != (n,):
            raise ValueError(f"potential has shape {V.shape}, expected ({n},)")
        self.V = V
        self.diag = (k * k + 2.0 / h**2) + V
        self.off = -1.0 / h**2
        self._lu = None

    def apply(self, u) -> np.ndarray:
        """Interior values of the operator applied to a full grid function."""
        u = np.asarray(u)
        h2 = self.grid.h ** 2
        return (self.k**2 + self.V) * u[1:-1] - (u[:-2] - 2.0 * u[1:-1] + u[2:]) / h2

    def matrix(self) -> np.ndarray:
        n = self.grid.n
        A = np.diag(self.diag.astype(complex))
        i = np.arange(n - 1)
        A[i, i + 1] = self.off
        A[i + 1, i] = self.off
        return A

    def _factor(self):
        if self._lu is None:
            n = self.grid.n
            off = np.full(n - 1, self.off, dtype=complex)
            dl, d, du, du2, ipiv, info = zgttrf(off, self.diag.astype(complex), off.copy())
            scale = np.max(np.abs(self.diag)) + 2.0 / self.grid.h**2
            if info != 0 or np.min(np.abs(d)) < PIVOT_TOL * scale:
                raise SingularSystem(f"pivot below {PIVOT_TOL:g} x row scale")
            self._lu = (dl, d, du, du2, ipiv)
        return self._lu

    def _solve_raw(self, r):
        x, info = zgttrs(*self._factor(), r)
        if info != 0:
            raise SingularSystem(f"zgttrs info={info}")
        return x

    def _apply_interior(self, x):
        """Operator on interior samples with zero walls; columns are independent."""
        out = (self.diag if x.ndim == 1 else self.diag[:, None]) * x
        out[1:] += self.off * x[:-1]
        out[:-1] += self.off * x[1:]
        return out

    def solve(self, rhs, return_residual: bool = False):
        """Solve with one step of iterative refinement.

        ``rhs`` holds interior values (length n) or full samples (length n+2,
        walls ignored); extra axes are independent right-hand sides.  The
        result carries zero wall rows.  With ``return_residual`` the relative
        max-norm residual is returned as well.
        """
        r = np.asarray(rhs, dtype=complex)
        if r.shape[0] == self.grid.n + 2:
            r = r[1:-1]
        x = self._solve_raw(r)
        x = x + self._solve_raw(r - self._apply_interior(x))
        pad = [(1, 1)] + [(0, 0)] * (r.ndim - 1)
        u = np.pad(x, pad)
        if return_residual:
            nr = np.max(np.abs(r))
            res = np.max(np.abs(self._apply_interior(x) - r)) / nr if nr > 0 else 0.0
            return u, float(res)
        return u


def build_helmholtz(grid: Grid, k: float, V=None) -> BandedOperator:
    return BandedOperator(grid, k, V)


def solve(op: BandedOperator, rhs) -> np.ndarray:
    return op.solve(rhs)


def integrate(grid: Grid, f):
    """Composite Simpson rule over [0, 1] along the last axis."""
    return simpson(np.asarray(f), x=grid.y, axis=-1)


def derivative(grid: Grid, f) -> np.ndarray:
    """Centred first derivative, second-order one-sided at the walls."""
    return np.gradient(np.asarray(f), grid.h, axis=-1, edge_order=2)


# --- lambda quadrature -----------------------------------------------------

@dataclass(frozen=True)
class LambdaPanels:
    """Composite Gauss-Legendre rule on the panels delimited by ``edges``."""

    edges: np.ndarray
    order: int = 8

    @cached_property
    def _rule(self):
        x, w = np.polynomial.legendre.leggauss(self.order)
        a, c = self.edges[:-1, None], self.edges[1:, None]
        nodes = (0.5 * (a + c) + 0.5 * (c - a) * x).ravel()
        weights = (0.5 * (c - a) * w).ravel()
        return nodes, weights

    @property
    def nodes(self) -> np.ndarray:
        return self._rule[0]

    @property
    def weights(self) -> np.ndarray:
        return self._rule[1]

    @property
    def max_width(self) -> float:
        return float(np.max(np.diff(self.edges)))

    def __len__(self):
        return self.nodes.size


def build_lambda_panels(lo: float, hi: float, kt: float = 0.0, singular=(),
                        min_width: float = 1e-6, grading: float = 0.5,
                        cap: float | None = None, order: int = 8,
                        max_panels: int = 200_000) -> LambdaPanels:
    """Panels on [lo, hi], graded geometrically toward ``singular`` points.

    Every panel is then split until its width is at most ``0.5/|kt|`` (and
    ``cap`` if given).
    """
    if not hi > lo:
        raise ValueError("empty lambda interval")
    pts = {lo, hi}
    span = hi - lo
    for s in singular:
        if not lo <= s <= hi:
            continue
        pts.add(s)
        w = 0.25 * span
        while w > min_width:
            for q in (s - w, s + w):
                if lo < q < hi:
                    pts.add(q)
            w *= grading
    edges = np.array(sorted(pts))
    limit = np.inf if kt == 0 else 0.5 / abs(kt)
    if cap is not None:
        limit = min(limit, cap)
    if np.isfinite(limit):
        widths = np.diff(edges)
        m = np.maximum(1, np.ceil(widths / limit * (1 + 1e-12)).astype(int))
        if m.sum() > max_panels:
            raise UnresolvedOscillation(
                f"{m.sum()} panels needed for kt={kt:g}; raise max_panels or shorten t")
        edges = np.concatenate([np.linspace(a, c, j + 1)[:-1] for a, c, j in zip(edges[:-1], edges[1:], m)]
                               + [edges[-1:]])
    return LambdaPanels(edges, order)


def lambda_quadrature(panels: LambdaPanels, values, kt: float):
    """``sum_j w_j exp(-i kt lambda_j) values_j`` over the panel nodes.

    ``values`` has the nodes on its first axis.
    """
    if panels.max_width * abs(kt) > 0.5 * (1 + 1e-9):
        raise UnresolvedOscillation(
            f"panel width {panels.max_width:.3e} too coarse for kt={kt:g}")
    phase = panels.weights * np.exp(-1j * kt * panels.nodes)
    return np.tensordot(phase, np.asarray(values), axes=(0, 0))
