"""Time evolution of one Fourier mode, by direct integration and by spectral synthesis.

The mode obeys ``d_t omega + i k b omega - i k b'' psi = 0`` with
``(d^2 - k^2) psi = omega`` and Dirichlet walls.  Writing ``L`` for
``omega -> b omega - b'' psi``, the stream function is

    psi(t) = (1 / 2 pi i) \\oint exp(-i k z t) Psi(z) dz,

with ``Psi(z)`` the Rayleigh resolvent at ``z`` and the contour enclosing the
range of ``b``.  Collapsing the contour onto the real axis gives the jump
``psi^+ - psi^-`` integrated against ``exp(-i k lam t)``.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .discretization import (
    BandedOperator,
    Grid,
    LambdaPanels,
    build_lambda_panels,
    derivative,
    lambda_quadrature,
)
from .errors import SpectralHit, StabilityViolation
from .greens import CutoffFamily
from .profile import ShearProfile
from .rayleigh import DEFAULT_EPS_SCHEDULE, psi_jump, rayleigh_operator

log = logging.getLogger(__name__)


@dataclass
class EvolutionTrace:
    k: float
    times: np.ndarray
    omega: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    method: str
    grid: Grid = field(repr=False)
    profile: ShearProfile = field(repr=False)
    ux: np.ndarray | None = field(default=None, repr=False)
    uy: np.ndarray | None = field(default=None, repr=False)
    meta: dict = field(default_factory=dict)

    @property
    def y_star(self) -> float:
        return self.profile.y_star

    @property
    def invariant_series(self) -> np.ndarray | None:
        """``E_k(t) = int |omega|^2 / b''`` (trapezoid rule); ``None`` unless ``b'' > 0``."""
        b2 = self.profile.d2b(self.grid.y)
        if np.any(b2 <= 0):
            return None
        w = self.grid.trapezoid_weights() / b2
        return np.abs(self.omega) ** 2 @ w

    def __post_init__(self):
        if self.ux is None or self.uy is None:
            self.ux, self.uy = velocities(self)


def velocities(trace) -> tuple[np.ndarray, np.ndarray]:
    """``u^x = -d_y psi`` (centred differences) and ``u^y = i k psi``."""
    psi = np.asarray(trace.psi)
    return -derivative(trace.grid, psi), 1j * trace.k * psi


def initial_data(grid: Grid, spec=None) -> np.ndarray:
    """Vorticity samples on all nodes; ``sin(pi y)`` unless ``spec`` says otherwise.

    ``spec`` may be a callable, an array of length ``n + 2``, or a dict with
    ``kind`` in ``{"sine", "sine_mode", "bump"}``.
    """
    y = grid.y
    if spec is None:
        spec = {"kind": "sine"}
    if callable(spec):
        return np.asarray(spec(y), dtype=complex)
    if not isinstance(spec, dict):
        arr = np.asarray(spec, dtype=complex)
        if arr.shape != y.shape:
            raise ValueError(f"initial data has shape {arr.shape}, expected {y.shape}")
        return arr
    kind = spec.get("kind", "sine")
    amp = spec.get("amplitude", 1.0)
    if kind == "sine":
        return amp * np.sin(np.pi * y) + 0j
    if kind == "sine_mode":
        return amp * np.sin(spec.get("mode", 1) * np.pi * y) + 0j
    if kind == "bump":
        c, w = spec.get("center", 0.3), spec.get("width", 0.05)
        return amp * np.exp(-((y - c) / w) ** 2) * np.sin(np.pi * y) + 0j
    raise ValueError(f"unknown initial data kind {kind!r}")


# --- direct route ------------------------------------------------------------------

def _step_plan(times, dt):
    """Substep sizes landing exactly on every snapshot time."""
    plan = []
    for t0, t1 in zip(times[:-1], times[1:]):
        m = max(1, int(np.ceil(abs(t1 - t0) / dt * (1 - 1e-12))))
        plan.append((m, (t1 - t0) / m))
    return plan


def evolve_direct(p: ShearProfile, k, omega0, grid: Grid, t_end: float, dt: float,
                  times=None, disable_curvature: bool = False) -> EvolutionTrace:
    """Classical RK4 on every node; ``psi`` comes from one cached tridiagonal factorisation.

    ``times`` are the snapshot times (default ``t_end`` split in 100); a
    negative ``t_end`` integrates backwards.  ``disable_curvature`` drops the
    ``b''`` coupling, leaving free transport.
    """
    if k == 0:
        raise ValueError("k must be nonzero")
    bound = 0.5 / (abs(k) * p.max_abs_b) if p.max_abs_b > 0 else np.inf
    if not 0 < dt <= bound * (1 + 1e-12):
        raise StabilityViolation(f"dt={dt:g} outside (0, {bound:g}] for k={k}")
    times = np.linspace(0.0, t_end, 101) if times is None else np.asarray(times, dtype=float)
    if times[0] != 0.0:
        times = np.concatenate([[0.0], times])
    if np.any(np.diff(times) * np.sign(t_end or 1) <= 0):
        raise ValueError("snapshot times must be strictly monotone, starting at 0")
    y = grid.y
    ikb = 1j * k * p.b(y)
    ikb2 = 0.0 if disable_curvature else 1j * k * p.d2b(y)
    op = BandedOperator(grid, k)

    def stream(w):
        return -op.solve(w[1:-1])

    def rhs(w):
        return -ikb * w + ikb2 * stream(w)

    w = np.array(omega0, dtype=complex)
    omegas, psis = [w.copy()], [stream(w)]
    for m, s in _step_plan(times, dt):
        for _ in range(m):
            k1 = rhs(w)
            k2 = rhs(w + 0.5 * s * k1)
            k3 = rhs(w + 0.5 * s * k2)
            k4 = rhs(w + s * k3)
            w = w + (s / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        omegas.append(w.copy())
        psis.append(stream(w))
    return EvolutionTrace(k, times, np.array(omegas), np.array(psis), "direct", grid, p,
                          meta={"dt": dt, "disable_curvature": disable_curvature})


# --- spectral route ------------------------------------------------------------------

def _gl(a, c, width, order=8):
    m = max(1, int(np.ceil((c - a) / width * (1 - 1e-12))))
    x, w = np.polynomial.legendre.leggauss(order)
    e = np.linspace(a, c, m + 1)
    mid, half = 0.5 * (e[1:] + e[:-1]), 0.5 * (e[1:] - e[:-1])
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def contour_nodes(p: ShearProfile, k, t_max: float, margin: float = 0.1):
    """Nodes and weights of the rectangle around the range of ``b``, counter-clockwise.

    The horizontal sides sit at ``Im z = -+eps`` with ``eps = 1/(|k| t_max)``,
    so ``|exp(-i k z t)| <= e`` for ``t <= t_max``.
    """
    lo, hi = p.sigma
    lo, hi = lo - margin, hi + margin
    eps = 1.0 / (abs(k) * t_max) if t_max > 0 else 0.1
    width = min(eps / 2, 0.5 / (abs(k) * t_max)) if t_max > 0 else eps / 2
    X, W = _gl(lo, hi, width)
    S, WS = _gl(-eps, eps, eps / 4)
    nodes = np.concatenate([X - 1j * eps, X + 1j * eps, hi + 1j * S, lo + 1j * S])
    weights = np.concatenate([W, -W, 1j * WS, -1j * WS])
    return nodes, weights, eps


def _audit(p, k, override):
    if override:
        return
    from .spectrum import assumption_report  # spectrum imports rayleigh; keep the cycle lazy

    rep = assumption_report(p, int(abs(k)) or 1)
    bad = [h for h in rep.discrete_hits if h.k == abs(k)] + [h for h in rep.embedded_hits if h.k == abs(k)]
    if bad:
        raise SpectralHit(f"spectral audit failed at k={k}: {bad[:3]}")


def _laplacian_omega(p, grid, k, psi, times, omega0):
    """``(d^2 - k^2) psi`` on the interior; the walls move by free transport."""
    h2 = grid.h ** 2
    om = np.zeros_like(psi)
    om[:, 1:-1] = (psi[:, :-2] - 2 * psi[:, 1:-1] + psi[:, 2:]) / h2 - k * k * psi[:, 1:-1]
    for j in (0, -1):
        om[:, j] = np.exp(-1j * k * p.b(grid.y[j]) * times) * omega0[j]
    return om


def evolve_spectral(p: ShearProfile, k, omega0, times, grid: Grid, method: str = "contour",
                    eps_schedule=DEFAULT_EPS_SCHEDULE, panels: LambdaPanels | None = None,
                    omega_route: str = "laplacian", override: bool = False,
                    jobs: int = 1) -> EvolutionTrace:
    """Stream function (and vorticity) by spectral synthesis.

    ``method="contour"`` integrates the resolvent on a rectangle hugging the
    range of ``b``.  ``method="limit"`` first extrapolates the jump
    ``psi^+ - psi^-`` to ``eps -> 0`` at each lambda node of ``panels``
    (graded toward ``b(y*)``, ``b(0)``, ``b(1)``) and then integrates; the
    shares carried by ``Phi*`` and ``1 - Phi*`` are stored in ``meta``.
    ``omega_route="integrand"`` (contour only) synthesises ``omega`` from
    ``(omega0 - b'' Psi)/(z - b)`` instead of differentiating ``psi``.
    """
    if k == 0:
        raise ValueError("k must be nonzero")
    if method not in ("contour", "limit"):
        raise ValueError(f"unknown method {method!r}")
    if omega_route not in ("laplacian", "integrand"):
        raise ValueError(f"unknown omega route {omega_route!r}")
    if omega_route == "integrand" and method != "contour":
        raise ValueError("the integrand route needs off-axis resolvents (method='contour')")
    times = np.asarray(times, dtype=float)
    omega0 = np.asarray(omega0, dtype=complex)
    _audit(p, k, override)
    n2 = grid.n + 2
    if not np.any(omega0):
        z = np.zeros((times.size, n2), dtype=complex)
        return EvolutionTrace(k, times, z, z.copy(), "spectral", grid, p, meta={"method": method})
    t_max = float(np.max(np.abs(times)))
    pool = ThreadPoolExecutor(max_workers=max(1, jobs))
    if method == "contour":
        nodes, weights, eps = contour_nodes(p, k, t_max)
        y = grid.interior
        b2, by = p.d2b(y), p.b(y)

        def solve(z):
            op = rayleigh_operator(p, grid, k, z)
            return op.solve(omega0[1:-1] / (by - z))

        with pool:
            Psi = np.array(list(pool.map(solve, nodes)))
        phase = weights[None, :] * np.exp(-1j * k * np.outer(times, nodes)) / (2j * np.pi)
        psi = phase @ Psi
        meta = {"method": "contour", "eps_contour": eps, "solves": int(nodes.size)}
        if omega_route == "integrand":
            b2f, bf = p.d2b(grid.y), p.b(grid.y)
            Om = (omega0[None, :] - b2f[None, :] * Psi) / (nodes[:, None] - bf[None, :])
            omega = phase @ Om
        else:
            omega = _laplacian_omega(p, grid, k, psi, times, omega0)
        meta["omega_route"] = omega_route
        return EvolutionTrace(k, times, omega, psi, "spectral", grid, p, meta=meta)

    lo, hi = p.sigma
    if panels is None:
        sing = sorted({p.b_star, float(p.b(np.float64(0.0))), float(p.b(np.float64(1.0)))})
        panels = build_lambda_panels(lo, hi, k * t_max, singular=sing, min_width=1e-6)
    with pool:
        jumps = list(pool.map(lambda lam: psi_jump(p, k, float(lam), omega0, grid, eps_schedule),
                              panels.nodes))
    J = np.array([j.values for j in jumps])
    cut = CutoffFamily(p).PhiStar(panels.nodes)
    parts = {}
    for name, share in (("degenerate", cut), ("nondegenerate", 1.0 - cut)):
        parts[name] = np.array([lambda_quadrature(panels, share[:, None] * J, k * t) for t in times])
    psi = (parts["degenerate"] + parts["nondegenerate"]) / (2j * np.pi)
    omega = _laplacian_omega(p, grid, k, psi, times, omega0)
    meta = {"method": "limit", "lambda_nodes": len(panels), "eps_schedule": list(jumps[0].eps),
            "max_jump_error": float(max(j.error for j in jumps)),
            "share_norms": {k_: float(np.linalg.norm(v) / (2 * np.pi)) for k_, v in parts.items()},
            "omega_route": "laplacian"}
    return EvolutionTrace(k, times, omega, psi, "spectral", grid, p, meta=meta)
