"""Audit of the spectral hypothesis: discrete and generalized embedded eigenvalues.

The linearised operator on one Fourier mode is ``L g = b g + b'' G_k g``
with ``G_k = (k^2 - d^2)^{-1}`` (Dirichlet).  Its continuous spectrum is the
range of ``b``; the audit looks for eigenvalues off the real axis and for
real values where the principal-value Rayleigh problem has a kernel.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.optimize import brentq

from .discretization import Grid
from .errors import RootFindingFailure
from .profile import ShearProfile
from .rayleigh import green_matrix

log = logging.getLogger(__name__)

IM_THRESHOLD = 1e-3
RESIDUAL_TOL = 1e-6
EMBEDDED_TOL = 1e-6
CONJUGATE_TOL = 1e-8
ROOT_SCAN = 4097
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class DiscreteHit:
    k: float
    lam: complex
    residual: float
    drift: float = float("nan")
    genuine: bool = True


@dataclass(frozen=True)
class EmbeddedHit:
    k: float
    lam: float
    sigma_min: float
    sigma_refined: float = float("nan")


@dataclass
class SpectrumReport:
    k_range: tuple[int, ...]
    discrete_hits: list[DiscreteHit] = field(default_factory=list)
    embedded_hits: list[EmbeddedHit] = field(default_factory=list)
    embedded_samples: list[tuple[float, float, float]] = field(default_factory=list)
    spurious: list[DiscreteHit] = field(default_factory=list)
    conjugate_paired: bool = True

    @property
    def verdict(self) -> str:
        return "fail" if self.discrete_hits or self.embedded_hits else "pass"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


# --- discrete eigenvalues --------------------------------------------------------

def linearized_matrix(p: ShearProfile, k, grid: Grid, disable_curvature: bool = False) -> np.ndarray:
    """Dense ``diag(b) + diag(b'') K`` on interior nodes, ``K`` the Green's quadrature."""
    y = grid.interior
    L = np.diag(p.b(y).astype(float))
    if not disable_curvature:
        L = L + p.d2b(y)[:, None] * green_matrix(float(abs(k)), grid.n)
    return L


def default_box(p: ShearProfile) -> tuple[float, float, float, float]:
    """Semicircle-bounding rectangle ``(re_lo, re_hi, im_lo, im_hi)``; both half planes."""
    lo, hi = p.sigma
    r = 0.5 * (hi - lo)
    return lo - 1e-9, hi + 1e-9, -r - 1e-9, r + 1e-9


def _eig_hits(L, box, threshold):
    c, V = np.linalg.eig(L)
    re_lo, re_hi, im_lo, im_hi = box
    keep = ((c.real >= re_lo) & (c.real <= re_hi) & (c.imag >= im_lo) & (c.imag <= im_hi)
            & (np.abs(c.imag) >= threshold))
    scale = np.linalg.norm(L, 2)
    out = []
    for j in np.flatnonzero(keep):
        v = V[:, j]
        r = np.linalg.norm(L @ v - c[j] * v) / (scale * np.linalg.norm(v))
        out.append((complex(c[j]), float(r)))
    return out


def _check_conjugates(hits) -> bool:
    lams = np.array([h.lam for h in hits])
    for c in lams:
        if np.min(np.abs(lams - np.conj(c))) > CONJUGATE_TOL * max(1.0, abs(c)):
            return False
    return True


def discrete_eigenvalue_scan(p: ShearProfile, k, box=None, grid: Grid | None = None,
                             threshold: float = IM_THRESHOLD, refine: bool = True,
                             disable_curvature: bool = False) -> list[DiscreteHit]:
    """Eigenvalues of the discretised operator inside ``box`` with ``|Im| >= threshold``.

    With ``refine`` each hit is matched against the spectrum on the grid with
    ``2n + 1`` interior nodes; a hit whose nearest refined eigenvalue moves by
    more than ``1e-3 (1 + |c|)`` is marked spurious.
    """
    grid = grid or Grid(256)
    box = box or default_box(p)
    if min(abs(box[2]), abs(box[3])) < threshold and box[2] * box[3] > 0:
        raise ValueError("box must stay at least `threshold` away from the real axis")
    raw = [h for h in _eig_hits(linearized_matrix(p, k, grid, disable_curvature), box, threshold)
           if h[1] <= RESIDUAL_TOL]
    if not raw or not refine:
        return [DiscreteHit(float(k), c, r) for c, r in raw]
    fine = np.linalg.eigvals(linearized_matrix(p, k, Grid(2 * grid.n + 1), disable_curvature))
    hits = []
    for c, r in raw:
        drift = float(np.min(np.abs(fine - c)))
        hits.append(DiscreteHit(float(k), c, r, drift, drift <= 1e-3 * (1 + abs(c))))
    return hits


# --- generalized embedded eigenvalues ------------------------------------------------

def level_roots(p: ShearProfile, lam: float, m: int = ROOT_SCAN) -> np.ndarray:
    """Interior solutions of ``b(z) = lam``, located by a sign scan and ``brentq``."""
    ys = np.linspace(0.0, 1.0, m)
    f = p.b(ys) - lam
    roots = list(ys[1:-1][f[1:-1] == 0])
    for a, c, fa, fc in zip(ys[:-1], ys[1:], f[:-1], f[1:]):
        if fa * fc < 0:
            try:
                roots.append(brentq(lambda y: float(p.b(np.float64(y))) - lam, a, c, xtol=1e-14))
            except (ValueError, RuntimeError) as exc:
                raise RootFindingFailure(f"b = {lam:g} on [{a:g}, {c:g}]: {exc}") from None
    lo, hi = p.sigma
    if lo < lam < hi and not roots:
        raise RootFindingFailure(f"no bracketed root of b = {lam:g} inside the range of b")
    return np.array(sorted(r for r in roots if 0.0 < r < 1.0))


def exclusion_radius(p: ShearProfile, grid: Grid) -> float:
    return (2.0 * grid.h * p.max_abs_db) ** 2


def _hat(grid: Grid, i: int, y: float) -> float:
    """Interior hat function ``i`` (full-grid node ``i + 1``) at ``y``."""
    return max(0.0, 1.0 - abs(y - grid.y[i + 1]) / grid.h)


def _pv_correction(p: ShearProfile, grid: Grid, z: float, yq, wq):
    """Entries ``(I, J, value)`` that turn the element quadrature into a principal value.

    For every hat pair whose product is nonzero at ``z`` the pole
    ``F / (b'(z) (y - z))`` is removed from the Gauss sums over the pair's
    common support and its principal value over that support added back.
    """
    n, h = grid.n, grid.h
    b2z, b1z = float(p.d2b(np.float64(z))), float(p.db(np.float64(z)))
    e = min(int(z // h), n)
    nodes = [i for i in (e - 1, e) if 0 <= i < n and _hat(grid, i, z) > 0]
    out = []
    for a_i, I in enumerate(nodes):
        for J in nodes[a_i:]:
            F = b2z * _hat(grid, I, z) * _hat(grid, J, z)
            if F == 0.0:
                continue
            elems = [I, I + 1] if I == J else [I + 1]
            elems = [m for m in elems if 0 <= m <= n]
            lo, hi = grid.y[elems[0]], grid.y[elems[-1] + 1]
            quad = sum(float(np.sum(wq / (yq[m] - z))) for m in elems)
            pv = np.log(abs((hi - z) / (z - lo)))
            out.append((I, J, F / b1z * (pv - quad)))
    return out


def embedded_operator(p: ShearProfile, k, lam: float, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Galerkin matrices ``(S, M)`` on interior hat functions.

    ``S`` is the ``H^1_k`` stiffness and ``M = S + P + D`` with ``P`` the
    principal-value potential ``b''/(b - lam)`` and ``D`` the point masses
    ``i pi b''(z)/|b'(z)|`` at the roots of ``b = lam``.
    """
    n, h = grid.n, grid.h
    k2 = float(k) ** 2
    S = np.zeros((n, n))
    i = np.arange(n)
    S[i, i] = 2.0 / h + k2 * h * 2.0 / 3.0
    S[i[:-1], i[:-1] + 1] = S[i[:-1] + 1, i[:-1]] = -1.0 / h + k2 * h / 6.0

    a = grid.y[:-1]
    yq = a[:, None] + 0.5 * h * (1.0 + _GL_X)[None, :]
    wq = 0.5 * h * _GL_W
    right = (yq - a[:, None]) / h
    left = 1.0 - right
    pot = p.d2b(yq) / (p.b(yq) - lam)
    # element m carries interior hats m-1 (left) and m (right)
    ll = (left * left * pot) @ wq
    lr = (left * right * pot) @ wq
    rr = (right * right * pot) @ wq
    M = S.astype(complex)
    M[i, i] += ll[1:] + rr[:-1]
    M[i[:-1], i[:-1] + 1] += lr[1:-1]
    M[i[:-1] + 1, i[:-1]] += lr[1:-1]
    for z in level_roots(p, lam):
        for I, J, v in _pv_correction(p, grid, z, yq, wq):
            M[I, J] += v
            if I != J:
                M[J, I] += v
        b2z, b1z = float(p.d2b(np.float64(z))), float(p.db(np.float64(z)))
        hz = np.array([_hat(grid, j, z) for j in range(n)])
        nz = np.flatnonzero(hz)
        M[np.ix_(nz, nz)] += 1j * np.pi * b2z / abs(b1z) * np.outer(hz[nz], hz[nz])
    return S, M


def embedded_sigma_min(p: ShearProfile, k, lam: float, grid: Grid) -> float:
    S, M = embedded_operator(p, k, lam, grid)
    R = cholesky(S, lower=False)
    B = solve_triangular(R, M, trans="T", lower=False)
    B = solve_triangular(R, B.T, trans="T", lower=False).T
    return float(np.linalg.svd(B, compute_uv=False)[-1])


def embedded_eigenvalue_check(p: ShearProfile, k, lam: float, grid: Grid | None = None) -> float:
    """Smallest singular value of the principal-value Rayleigh operator at real ``lam``.

    Measured as a map ``H^1_k -> H^1_k`` (``S^{-1} M`` in the stiffness
    norm), so an empty kernel shows as a value of order one.  Values within
    ``(2 h max|b'|)^2`` of ``b(y*)`` are rejected: the root count changes there.
    """
    grid = grid or Grid(256)
    if abs(lam - p.b_star) < exclusion_radius(p, grid):
        raise ValueError(f"lambda={lam:g} inside the exclusion zone around b(y*)")
    return embedded_sigma_min(p, k, lam, grid)


def embedded_lambda_grid(p: ShearProfile, grid: Grid, count: int = 16) -> np.ndarray:
    """``count`` interior points of the range of ``b`` outside the exclusion zone."""
    lo, hi = p.sigma
    lams = lo + (hi - lo) * np.arange(1, count + 1) / (count + 1)
    return lams[np.abs(lams - p.b_star) >= exclusion_radius(p, grid)]


def _scan_k(p, k, grid, box, n_lambda, disable_curvature):
    discrete = discrete_eigenvalue_scan(p, k, box, grid, disable_curvature=disable_curvature)
    samples, embedded = [], []
    for lam in embedded_lambda_grid(p, grid, n_lambda):
        s = embedded_eigenvalue_check(p, k, float(lam), grid)
        samples.append((float(k), float(lam), s))
        if s < EMBEDDED_TOL:
            s2 = embedded_eigenvalue_check(p, k, float(lam), Grid(2 * grid.n + 1))
            if s2 < EMBEDDED_TOL:
                embedded.append(EmbeddedHit(float(k), float(lam), s, s2))
    return discrete, embedded, samples


def assumption_report(p: ShearProfile, k_max: int, grid: Grid | None = None, box=None,
                      n_lambda: int = 16, disable_curvature: bool = False,
                      jobs: int = 1) -> SpectrumReport:
    """Run both scans for ``1 <= k <= k_max`` and aggregate a verdict.

    Only positive ``k`` is scanned: the data are real, so ``-k`` carries the
    conjugate spectrum.  Discrete hits that drift under refinement are kept
    in ``spurious`` and do not affect the verdict.
    """
    if int(k_max) < 1:
        raise ValueError("k_max must be at least 1 (k = 0 is excluded)")
    grid = grid or Grid(256)
    ks = tuple(range(1, int(k_max) + 1))
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(lambda k: _scan_k(p, k, grid, box, n_lambda, disable_curvature), ks))
    report = SpectrumReport(ks)
    for discrete, embedded, samples in results:
        report.discrete_hits += [h for h in discrete if h.genuine]
        report.spurious += [h for h in discrete if not h.genuine]
        report.embedded_hits += embedded
        report.embedded_samples += samples
    for k in ks:
        same = [h for h in report.discrete_hits if h.k == k]
        if same and not _check_conjugates(same):
            report.conjugate_paired = False
            log.warning("discrete hits at k=%d are not conjugate-paired", k)
    return report
