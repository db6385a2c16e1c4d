import numpy as np
import pytest

from shearlab.analysis import norm_L2
from shearlab.discretization import BandedOperator, Grid, derivative
from shearlab.errors import SpectralHit, StabilityViolation
from shearlab.evolution import (contour_nodes, evolve_direct, evolve_spectral, initial_data,
                                velocities)
from shearlab.profile import cosine_well


def _rel(a, b, grid):
    return norm_L2(a - b, grid) / norm_L2(b, grid)


@pytest.fixture(scope="module")
def direct50(canonical, grid1024, sine1024):
    times = np.linspace(0, 50, 11)
    return evolve_direct(canonical, 1, sine1024, grid1024, 50.0, 0.01, times=times)


def test_free_transport_closed_form(canonical, grid1024, sine1024):
    tr = evolve_direct(canonical, 1, sine1024, grid1024, 10.0, 1e-3, times=[0, 5, 10],
                       disable_curvature=True)
    exact = np.exp(-1j * canonical.b(grid1024.y) * 10.0) * sine1024
    assert np.max(np.abs(tr.omega[-1] - exact)) <= 1e-6


def test_weighted_energy_conserved(canonical, grid1024, sine1024):
    tr = evolve_direct(canonical, 1, sine1024, grid1024, 100.0, 0.01, times=np.linspace(0, 100, 21))
    E = tr.invariant_series
    assert E is not None
    assert np.max(np.abs(E - E[0])) / E[0] <= 1e-6


def test_invariant_absent_without_convexity(grid256):
    p = cosine_well()
    tr = evolve_direct(p, 1, initial_data(grid256), grid256, 1.0, 0.01, times=[0, 1])
    assert tr.invariant_series is None


def test_linearity(canonical, grid256):
    f = initial_data(grid256)
    g = initial_data(grid256, {"kind": "bump", "center": 0.3, "width": 0.05})
    a, b = 0.7 - 0.2j, -1.3

    def run(w):
        return evolve_direct(canonical, 2, w, grid256, 5.0, 0.01, times=[0, 2.5, 5]).omega

    combo = run(a * f + b * g)
    assert np.max(np.abs(combo - (a * run(f) + b * run(g)))) <= 1e-12 * np.max(np.abs(combo))


def test_time_reversal(canonical, grid256):
    w0 = initial_data(grid256)
    fwd = evolve_direct(canonical, 1, w0, grid256, 10.0, 0.01, times=[0, 10])
    back = evolve_direct(canonical, 1, fwd.omega[-1], grid256, -10.0, 0.01, times=[0, -10])
    assert np.max(np.abs(back.omega[-1] - w0)) <= 1e-8


def test_stability_bound(canonical, grid256):
    bound = 0.5 / (3 * canonical.max_abs_b)
    with pytest.raises(StabilityViolation):
        evolve_direct(canonical, 3, initial_data(grid256), grid256, 1.0, 1.01 * bound)
    evolve_direct(canonical, 3, initial_data(grid256), grid256, 2 * bound, bound, times=[0, bound])


def test_zero_data(canonical, grid256):
    z = np.zeros(grid256.n + 2, dtype=complex)
    assert not np.any(evolve_direct(canonical, 1, z, grid256, 2.0, 0.1).omega)
    tr = evolve_spectral(canonical, 1, z, [0, 1, 2], grid256)
    assert not np.any(tr.psi) and not np.any(tr.omega)


def test_velocities(direct50, canonical):
    tr, g = direct50, direct50.grid
    ux, uy = velocities(tr)
    inner = slice(1, -1)
    assert np.allclose(uy[:, inner] / tr.psi[:, inner], 1j * tr.k, rtol=0, atol=1e-12)
    assert np.all(uy[:, 0] == 0) and np.all(uy[:, -1] == 0)
    assert np.array_equal(ux, tr.ux) and np.array_equal(uy, tr.uy)


def test_vorticity_from_velocity(canonical):
    # d_y u^x + k^2 psi = -omega up to O(h^2), away from the one-sided wall stencils
    errs = []
    for n in (255, 511):
        g = Grid(n)
        w0 = initial_data(g)
        tr = evolve_direct(canonical, 1, w0, g, 2.0, 0.01, times=[0, 2])
        lhs = derivative(g, tr.ux[-1]) + tr.k**2 * tr.psi[-1]
        sel = slice(3, -3)
        errs.append(np.max(np.abs(lhs[sel] + tr.omega[-1][sel])) / np.max(np.abs(tr.omega[-1])))
    assert errs[1] < errs[0] / 3


def test_psi_solves_helmholtz(direct50):
    g = direct50.grid
    op = BandedOperator(g, direct50.k)
    for w, psi in zip(direct50.omega, direct50.psi):
        assert np.max(np.abs(op.apply(psi) + w[1:-1])) <= 1e-9 * np.max(np.abs(w))


def test_contour_nodes_enclose_range(canonical):
    z, w, eps = contour_nodes(canonical, 1, 50.0)
    lo, hi = canonical.sigma
    assert eps == pytest.approx(1 / 50)
    assert z.real.min() < lo and z.real.max() > hi
    # a closed contour integrates constants to zero and 1/(z - c) to 2 pi i
    assert abs(np.sum(w)) < 1e-12
    assert np.sum(w / (z - 0.1)) == pytest.approx(2j * np.pi, rel=1e-10)


def test_spectral_t0_reconstruction(canonical, grid1024, sine1024):
    tr = evolve_spectral(canonical, 1, sine1024, [0.0, 10.0], grid1024)
    ref = -BandedOperator(grid1024, 1).solve(sine1024[1:-1])
    assert _rel(tr.psi[0], ref, grid1024) <= 1e-2


def test_spectral_matches_direct(canonical, direct50, sine1024):
    tr = evolve_spectral(canonical, 1, sine1024, direct50.times, direct50.grid)
    for t, a, b in zip(direct50.times, tr.psi, direct50.psi):
        assert _rel(a, b, direct50.grid) <= 1e-2, t


def test_spectral_integrand_route(canonical, grid256):
    w0 = initial_data(grid256)
    times = [0.0, 5.0, 10.0]
    a = evolve_spectral(canonical, 1, w0, times, grid256, omega_route="integrand")
    ref = evolve_direct(canonical, 1, w0, grid256, 10.0, 0.01, times=times)
    for x, y in zip(a.omega, ref.omega):
        assert _rel(x, y, grid256) <= 1e-6


def test_spectral_limit_route_improves_with_grid(canonical):
    errs = []
    for n in (256, 1024):
        g = Grid(n)
        w0 = initial_data(g)
        tr = evolve_spectral(canonical, 1, w0, [0.0, 5.0], g, method="limit")
        ref = evolve_direct(canonical, 1, w0, g, 5.0, 0.01, times=[0.0, 5.0])
        errs.append(max(_rel(x, y, g) for x, y in zip(tr.psi, ref.psi)))
        assert set(tr.meta["share_norms"]) == {"degenerate", "nondegenerate"}
    # the clipped eps schedule limits the extrapolation; more nodes allow more eps levels
    assert errs[1] < errs[0] / 4
    assert errs[1] < 0.05


def test_spectral_rejects_bad_input(canonical, grid256):
    w0 = initial_data(grid256)
    with pytest.raises(ValueError):
        evolve_spectral(canonical, 1, w0, [0, 1], grid256, method="limit", omega_route="integrand")
    with pytest.raises(ValueError):
        evolve_spectral(canonical, 0, w0, [0, 1], grid256)


def test_spectral_audit_blocks_unstable_profile(grid256):
    p = cosine_well()
    with pytest.raises(SpectralHit):
        evolve_spectral(p, 1, initial_data(grid256), [0, 1], grid256)
    tr = evolve_spectral(p, 1, initial_data(grid256), [0, 1], grid256, override=True)
    assert tr.psi.shape == (2, grid256.n + 2)


def test_initial_data_forms(grid256):
    y = grid256.y
    assert np.allclose(initial_data(grid256), np.sin(np.pi * y))
    assert np.allclose(initial_data(grid256, lambda s: s * (1 - s)), y * (1 - y))
    assert np.allclose(initial_data(grid256, {"kind": "sine_mode", "mode": 3}), np.sin(3 * np.pi * y))
    with pytest.raises(ValueError):
        initial_data(grid256, np.ones(5))
    with pytest.raises(ValueError):
        initial_data(grid256, {"kind": "noise"})
