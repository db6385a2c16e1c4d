"""Rayleigh resolvent problems, their lambda-derivatives, and the LAP probes.

Sign conventions: with ``D = b - lam + i*iota*eps`` the shifted problem is

    (k^2 - d^2) psi + b'' psi / D = omega0 / D,     psi(0) = psi(1) = 0,

so that ``psi^+ (lam, eps)`` is ``-G (z - L)^{-1} omega0`` evaluated at
``z = lam - i eps`` (``G`` the Helmholtz Green's operator, ``L`` the
linearised operator).  The integral operators act as

    T g  = int G(y, z) b'' g / D dz,
    T* g = int Gmod(y, z) [1 - phi((z-y*)/delta0) + phi((z-y*)/delta)] b'' g / D dz.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .analysis import gram_H1k, gram_X, weighted_singular_values
from .discretization import BandedOperator, Grid
from .errors import NonConvergent, PossibleEigenvalue, ResolutionGate, SingularSystem, SpectralHit
from .greens import CutoffFamily, greens_closed_form, modified_operator
from .profile import ShearProfile, delta_of_lambda

log = logging.getLogger(__name__)

DEFAULT_EPS_SCHEDULE = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4)
HIT_THRESHOLD = 1e-10


def clip_schedule(p: ShearProfile, grid: Grid, schedule=DEFAULT_EPS_SCHEDULE) -> tuple[float, ...]:
    """Raise every entry to the grid's resolution floor and drop duplicates."""
    floor = p.eps_floor(grid.h)
    out = sorted({max(float(e), floor) for e in schedule}, reverse=True)
    return tuple(out)


def _denominator(p, grid, lam, eps, iota):
    return p.b(grid.y) - lam + 1j * iota * eps


def rayleigh_operator(p: ShearProfile, grid: Grid, k, z: complex) -> BandedOperator:
    """``k^2 - D2 + b''/(b - z)`` for a spectral parameter ``z`` off the range of ``b``."""
    y = grid.interior
    return BandedOperator(grid, k, p.d2b(y) / (p.b(y) - z))


def solve_resolvent(p: ShearProfile, grid: Grid, k, z: complex, omega0, op=None) -> np.ndarray:
    """``psi`` solving ``(k^2 - d^2) psi + b'' psi/(b - z) = omega0/(b - z)``."""
    op = op or rayleigh_operator(p, grid, k, z)
    return op.solve(np.asarray(omega0)[1:-1] / (p.b(grid.interior) - z))


@dataclass
class ResolventSolution:
    k: float
    lam: float
    eps: float
    iota: int
    psi: np.ndarray
    omega0: np.ndarray = field(repr=False)
    grid: Grid = field(repr=False)
    profile: ShearProfile = field(repr=False)
    operator: BandedOperator = field(repr=False)
    residual: float = 0.0
    dpsi: np.ndarray | None = field(default=None, repr=False)
    d2psi: np.ndarray | None = field(default=None, repr=False)
    phi: np.ndarray | None = field(default=None, repr=False)
    g_src: np.ndarray | None = field(default=None, repr=False)

    @property
    def D(self) -> np.ndarray:
        return _denominator(self.profile, self.grid, self.lam, self.eps, self.iota)


def solve_rayleigh(p: ShearProfile, k, lam, eps, iota, omega0, grid: Grid,
                   gate: bool = True) -> ResolventSolution:
    if k == 0:
        raise ValueError("k must be nonzero")
    if iota not in (1, -1):
        raise ValueError("iota must be +1 or -1")
    if not eps > 0:
        raise ValueError("eps must be positive")
    floor = p.eps_floor(grid.h)
    if gate and eps < floor * (1 - 1e-12):
        raise ResolutionGate(f"eps={eps:.3e} below floor {floor:.3e} at n={grid.n}")
    omega0 = np.asarray(omega0, dtype=complex)
    z = lam - 1j * iota * eps
    op = rayleigh_operator(p, grid, k, z)
    try:
        psi, res = op.solve(omega0[1:-1] / (p.b(grid.interior) - z), return_residual=True)
    except SingularSystem:
        log.warning("singular Rayleigh system at lambda=%r eps=%r", lam, eps)
        raise PossibleEigenvalue(lam, eps) from None
    return ResolventSolution(k, lam, eps, iota, psi, omega0, grid, p, op, res)


def solve_dlambda(sol: ResolventSolution) -> np.ndarray:
    """``d psi / d lam`` from ``(k^2 - d^2 + V) dpsi = omega0/D^2 - b'' psi / D^2``."""
    D = sol.D[1:-1]
    b2 = sol.profile.d2b(sol.grid.interior)
    rhs = (sol.omega0[1:-1] - b2 * sol.psi[1:-1]) / D**2
    sol.dpsi = sol.operator.solve(rhs)
    return sol.dpsi


def solve_d2lambda(sol: ResolventSolution) -> np.ndarray:
    """Second lambda-derivative; the cross term carries the factor -2."""
    if sol.dpsi is None:
        solve_dlambda(sol)
    D = sol.D[1:-1]
    b2 = sol.profile.d2b(sol.grid.interior)
    rhs = (2 * (sol.omega0[1:-1] - b2 * sol.psi[1:-1]) / D**3
           - 2 * b2 * sol.dpsi[1:-1] / D**2)
    sol.d2psi = sol.operator.solve(rhs)
    return sol.d2psi


# --- integral operators ---------------------------------------------------------

@lru_cache(maxsize=8)
def green_matrix(k: float, n: int) -> np.ndarray:
    """Trapezoid quadrature of the closed-form Green's kernel on interior nodes.

    The kernel's kink sits on the diagonal, i.e. on nodes, so the rule stays
    second order.  Cached read-only; callers must not modify it.
    """
    y = Grid(n).interior
    K = greens_closed_form(k, y[:, None], y[None, :]) * Grid(n).h
    K.setflags(write=False)
    return K


def T_matrix(p: ShearProfile, k, lam, eps, grid: Grid) -> np.ndarray:
    y = grid.interior
    return green_matrix(float(abs(k)), grid.n) * (p.d2b(y) / (p.b(y) - lam + 1j * eps))[None, :]


def apply_T(p: ShearProfile, k, lam, eps, g, grid: Grid) -> np.ndarray:
    if eps == 0:
        raise ValueError("eps must be nonzero")
    g = np.asarray(g)
    return grid.embed(T_matrix(p, k, lam, eps, grid) @ g[1:-1])


def Tstar_matrix(p: ShearProfile, k, lam, eps, grid: Grid, reading: str = "z",
                 gate: bool = True) -> np.ndarray:
    """Dense ``T*`` on interior nodes.

    ``reading='z'`` puts the complementary bracket inside the integral (on the
    source variable); ``reading='y'`` multiplies the output by it instead.
    """
    op = modified_operator(p, k, lam, eps, grid, gate=gate)
    y = grid.interior
    cut = 1.0 - CutoffFamily(p).bracket(y, lam)
    f = p.d2b(y) / (p.b(y) - lam + 1j * eps)
    Ginv = op.solve(np.eye(grid.n, dtype=complex))[1:-1]  # discrete Green's matrix times h^{-1} h
    if reading == "z":
        return Ginv * (cut * f)[None, :]
    if reading == "y":
        return cut[:, None] * Ginv * f[None, :]
    raise ValueError(f"unknown reading {reading!r}")


def apply_Tstar(p: ShearProfile, k, lam, eps, g, grid: Grid, reading: str = "z") -> np.ndarray:
    g = np.asarray(g)
    return grid.embed(Tstar_matrix(p, k, lam, eps, grid, reading) @ g[1:-1])


# --- limiting absorption probes -------------------------------------------------

@dataclass(frozen=True)
class LapReport:
    k: float
    lam: float
    eps_schedule: tuple[float, ...]
    sigma_min: tuple[float, ...]
    norm_flavor: str
    reading: str = "z"
    n: int = 0

    @property
    def kappa_hat(self) -> float:
        return min(self.sigma_min)

    @property
    def variation(self) -> float:
        """``(max - min)/max`` of the floors across the schedule."""
        s = np.array(self.sigma_min)
        return float((s.max() - s.min()) / s.max())


class LapSpectralHit(SpectralHit):
    def __init__(self, report: LapReport):
        self.report = report
        super().__init__(f"sigma_min={report.kappa_hat:.3e} at k={report.k}, lambda={report.lam}")


def lap_operator(p, k, lam, eps, grid, flavor, reading="z", gate=True):
    """``(I + T, gram)`` or ``(I + T*, gram)`` for one spectral point."""
    if flavor == "H1k":
        return np.eye(grid.n) + T_matrix(p, k, lam, eps, grid), gram_H1k(grid, k)
    M = np.eye(grid.n) + Tstar_matrix(p, k, lam, eps, grid, reading, gate)
    return M, gram_X(p, grid, k, lam, eps, flavor)


def lap_probe(p: ShearProfile, k, lam, schedule, norm_flavor: str, grid: Grid,
              reading: str = "z", raise_on_hit: bool = True) -> LapReport:
    """Smallest singular value of ``I + T`` (``H1k``) or ``I + T*`` (``XN``/``XL``).

    Each value is taken in the weighted inner product of the chosen norm.
    """
    if norm_flavor not in ("H1k", "XN", "XL"):
        raise ValueError(f"unknown norm flavour {norm_flavor!r}")
    sig = []
    for eps in schedule:
        M, gram = lap_operator(p, k, lam, eps, grid, norm_flavor, reading, gate=False)
        sig.append(float(weighted_singular_values(M, gram).min()))
    rep = LapReport(k, lam, tuple(float(e) for e in schedule), tuple(sig), norm_flavor, reading, grid.n)
    if raise_on_hit and rep.kappa_hat < HIT_THRESHOLD:
        raise LapSpectralHit(rep)
    return rep


# --- degenerate split ------------------------------------------------------------

def degenerate_decompose(p: ShearProfile, k, lam, eps, iota, omega0, grid: Grid,
                         sol: ResolventSolution | None = None):
    """Split ``psi = phi + Psi omega0 / b''`` and return ``(phi, g)``.

    ``g`` is the source of the equation for ``phi``; the second-order part
    uses the same difference stencil as the solver so the split is exact on
    the grid.
    """
    sol = sol or solve_rayleigh(p, k, lam, eps, iota, omega0, grid)
    y = grid.y
    Psi = CutoffFamily(p).Psi(y)
    w = Psi * sol.omega0 / p.d2b(y)
    plain = BandedOperator(grid, k)
    g = grid.embed((1 - Psi[1:-1]) * sol.omega0[1:-1] / sol.D[1:-1] - plain.apply(w))
    sol.phi = sol.psi - w
    sol.g_src = g
    return sol.phi, g


def split_residual(sol: ResolventSolution) -> float:
    r = sol.operator.apply(sol.phi) - sol.g_src[1:-1]
    return float(np.max(np.abs(r)) / np.max(np.abs(sol.g_src)))


# --- jump across the spectrum -----------------------------------------------------

@dataclass(frozen=True)
class JumpResult:
    lam: float
    values: np.ndarray = field(repr=False)
    error: float
    eps: tuple[float, ...]
    raw: tuple[np.ndarray, ...] = field(repr=False, default=())


def psi_jump(p: ShearProfile, k, lam, omega0, grid: Grid, schedule=DEFAULT_EPS_SCHEDULE,
             clip: bool = True, check: bool = True) -> JumpResult:
    """``lim_{eps->0+} (psi^+ - psi^-)`` by two-point Richardson extrapolation in ``eps``.

    The error estimate is the spread of the last two extrapolants, or, when the
    clipped schedule leaves only two points, the distance between the
    extrapolant and the smallest-eps jump.
    """
    if lam == p.b_star:
        raise ValueError("the jump is not defined at the critical value")
    eps_list = clip_schedule(p, grid, schedule) if clip else tuple(sorted(schedule, reverse=True))
    raw = []
    for e in eps_list:
        plus = solve_rayleigh(p, k, lam, e, 1, omega0, grid, gate=False).psi
        minus = solve_rayleigh(p, k, lam, e, -1, omega0, grid, gate=False).psi
        raw.append(plus - minus)
    if len(raw) == 1:
        return JumpResult(lam, raw[0], float("inf"), eps_list, tuple(raw))
    ext = [(a * jb - b * ja) / (a - b) for a, b, ja, jb in zip(eps_list, eps_list[1:], raw, raw[1:])]
    if len(ext) == 1:
        err = float(np.max(np.abs(ext[0] - raw[-1])))
    else:
        diffs = [float(np.max(np.abs(u - v))) for u, v in zip(ext, ext[1:])]
        err = diffs[-1]
        if check and any(d2 > d1 * (1 + 1e-9) and d2 > 1e-12 for d1, d2 in zip(diffs, diffs[1:])):
            raise NonConvergent(f"extrapolant spread grows along the schedule at lambda={lam}: {diffs}")
    return JumpResult(lam, ext[-1], err, eps_list, tuple(raw))


def lambda_singular_parts(p: ShearProfile, k, lam, omega0, grid: Grid, eps: float,
                          jump=None):
    """``(Lambda1, Lambda2)`` on the grid for ``lam`` near the critical value.

    The one-sided limits are kept at the finite ``eps`` supplied, the jump is
    ``psi^+ - psi^-`` at that ``eps`` unless ``jump`` is given.
    """
    if lam == p.b_star:
        raise ValueError("lambda equals the critical value")
    y = grid.y
    cut = CutoffFamily(p)
    pd = cut.phi_delta(y, lam)
    d = float(delta_of_lambda(p, lam))
    minus = solve_rayleigh(p, k, lam, eps, -1, omega0, grid, gate=False)
    phi_minus, _ = degenerate_decompose(p, k, lam, eps, -1, omega0, grid, sol=minus)
    if jump is None:
        plus = solve_rayleigh(p, k, lam, eps, 1, omega0, grid, gate=False)
        jump = plus.psi - minus.psi
    on = pd != 0
    coef = np.zeros_like(y, dtype=float)
    coef[on] = pd[on] * p.d2b(y[on]) / p.db(y[on]) ** 2
    bl = p.b(y) - lam
    L1 = np.zeros_like(y, dtype=complex)
    L1[on] = jump[on] * coef[on] * np.log((bl[on] + 1j * eps) / d**2)
    Dp, Dm = bl + 1j * eps, bl - 1j * eps
    L2 = -jump * coef / Dp - coef * (1 / Dp - 1 / Dm) * phi_minus
    return L1, L2
