import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shearlab.analysis import (depletion_measure, fit_decay_rate, norm_H1k, norm_L2, norm_XL,
                               norm_XN, reference_scale, x_norm_blocks)
from shearlab.discretization import Grid
from shearlab.errors import InconclusiveFit
from shearlab.evolution import EvolutionTrace, evolve_direct, evolve_spectral, initial_data
from shearlab.profile import delta_of_lambda, dk_scale, rho_k
from shearlab.rayleigh import degenerate_decompose

RNG = np.random.default_rng(7)


def _synthetic(canonical, grid, times, amplitude):
    shape = np.sin(np.pi * grid.y)
    psi = np.array([a * shape for a in amplitude], dtype=complex)
    return EvolutionTrace(1, np.asarray(times, float), psi.copy(), psi, "direct", grid, canonical)


# --- norms ------------------------------------------------------------------------

def test_sine_norms(grid1024):
    f = np.sin(np.pi * grid1024.y)
    assert norm_L2(f, grid1024) == pytest.approx(np.sqrt(0.5), abs=1e-6)
    assert norm_H1k(f, grid1024, np.pi) == pytest.approx(2 * np.sqrt(0.5), abs=1e-5)


def test_H1k_tends_to_L2(grid256):
    f = np.exp(grid256.y) * np.sin(np.pi * grid256.y)
    gaps = [norm_H1k(f, grid256, k) - norm_L2(f, grid256) for k in (1, 10, 100, 1e4)]
    assert np.all(np.diff(gaps) < 0) and gaps[-1] < 1e-3


@settings(max_examples=25, deadline=None)
@given(mag=st.floats(1e-6, 1e3), phase=st.floats(0, 2 * np.pi), seed=st.integers(0, 2**16))
def test_norms_homogeneous_and_subadditive(canonical, mag, phase, seed):
    # magnitudes stay clear of squared under/overflow
    c = mag * np.exp(1j * phase)
    g = Grid(128)
    rng = np.random.default_rng(seed)
    f, h = (rng.standard_normal((2, g.n + 2)) + 1j * rng.standard_normal((2, g.n + 2)))
    lam, eps = canonical.b_star + 1e-3, 1e-2
    norms = [lambda u: norm_L2(u, g), lambda u: norm_H1k(u, g, 3),
             lambda u: norm_XN(u, canonical, g, 2, lam, eps),
             lambda u: norm_XL(u, canonical, g, 2, lam, eps)]
    for N in norms:
        assert N(c * f) == pytest.approx(abs(c) * N(f), rel=1e-12)
        assert N(f + h) <= N(f) + N(h) + 1e-12 * (N(f) + N(h))


def test_XN_outer_block_weight_cancels(canonical, grid1024):
    lam, eps, k = canonical.b_star + 1e-5, 1e-4, 2
    blocks = x_norm_blocks(np.zeros(grid1024.n + 2), canonical, grid1024, k, lam, eps, "XN")
    assert all(v == 0 for v in blocks.values())
    w = float(delta_of_lambda(canonical, lam)) + np.sqrt(eps)
    outside = np.abs(grid1024.y - canonical.y_star) > 3 * w
    assert outside.any() and not outside.all()
    f = np.where(outside, rho_k(canonical, grid1024.y, k, lam, eps) ** 1.75, 0.0)
    blocks = x_norm_blocks(f, canonical, grid1024, k, lam, eps, "XN")
    assert blocks["outer_value"] == pytest.approx(1.0, rel=1e-12)
    assert blocks["inner_value"] == 0


def test_dk_nondecreasing_in_eps(canonical):
    lam = canonical.b_star + 1e-3
    d = [float(dk_scale(canonical, 3, lam, e)) for e in (1e-5, 1e-4, 1e-3, 1e-2)]
    assert np.all(np.diff(d) >= 0)
    assert np.all(np.diff([x ** -1.75 for x in d]) <= 0)


def test_XN_of_degenerate_part_tracks_reference_scale(canonical):
    g = Grid(2047)
    w0 = np.sin(np.pi * g.y) + 0j
    eps = canonical.eps_floor(g.h)
    table = np.empty((4, 3))
    for i, k in enumerate((1, 2, 4, 8)):
        for j, gap in enumerate((5e-4, 1e-3, 2e-3)):
            lam = canonical.b_star + gap
            phi, _ = degenerate_decompose(canonical, k, lam, eps, 1, w0, g)
            table[i, j] = norm_XN(phi, canonical, g, k, lam, eps) / reference_scale(w0, g, k)
    assert np.all(np.isfinite(table))
    assert table.max() < 10
    assert np.all(np.diff(table, axis=0) < 0)


def test_unknown_flavor(canonical, grid256):
    with pytest.raises(ValueError):
        x_norm_blocks(np.zeros(grid256.n + 2), canonical, grid256, 1, 0.01, 0.01, "XQ")


# --- rate fits ----------------------------------------------------------------------

def test_exact_power_law(canonical, grid256):
    t = np.linspace(20, 200, 30)
    fit = fit_decay_rate(_synthetic(canonical, grid256, t, t ** -2.0), "psi")
    assert fit.slope == pytest.approx(-2.0, abs=1e-6)
    assert fit.r2 == pytest.approx(1.0) and not fit.inconclusive
    assert fit.samples == 30 and fit.window == (20.0, 200.0)


def test_constant_series(canonical, grid256):
    t = np.linspace(20, 200, 30)
    fit = fit_decay_rate(_synthetic(canonical, grid256, t, np.ones_like(t)), "uy")
    assert fit.slope == pytest.approx(0.0, abs=1e-12)


def test_fit_scale_invariance(canonical, grid256):
    t = np.linspace(20, 200, 30)
    amp = t ** -1.3 * (1 + 0.1 * np.sin(t))
    a = fit_decay_rate(_synthetic(canonical, grid256, t, amp), "ux")
    b = fit_decay_rate(_synthetic(canonical, grid256, t, 7.5 * amp), "ux")
    assert b.slope == a.slope
    assert b.intercept == pytest.approx(a.intercept + np.log(7.5), abs=1e-12)


def test_fit_flags_noise(canonical, grid256):
    t = np.linspace(20, 200, 30)
    amp = np.exp(RNG.standard_normal(t.size))
    tr = _synthetic(canonical, grid256, t, amp)
    assert fit_decay_rate(tr, "psi").inconclusive
    with pytest.raises(InconclusiveFit):
        fit_decay_rate(tr, "psi", strict=True)


def test_fit_window_checks(canonical, grid256):
    t = np.linspace(0.5, 200, 30)
    tr = _synthetic(canonical, grid256, t, t ** -2.0)
    with pytest.raises(ValueError):
        fit_decay_rate(tr, "psi", window=(0.5, 200))
    with pytest.raises(ValueError):
        fit_decay_rate(tr, "psi", window=(150, 160))
    with pytest.raises(ValueError):
        fit_decay_rate(tr, "omega")


def test_reference_scale(grid1024):
    f = np.sin(np.pi * grid1024.y)
    expected = 2.0 ** 2.5 * np.sqrt(0.5) * sum((np.pi / 2) ** j for j in range(4))
    # repeated one-sided wall differences cost accuracy in the third derivative
    assert reference_scale(f, grid1024, 2) == pytest.approx(expected, rel=5e-3)


# --- depletion -------------------------------------------------------------------------

def test_free_transport_has_no_depletion(canonical, grid1024, sine1024):
    times = np.linspace(0, 200, 41)
    tr = evolve_direct(canonical, 1, sine1024, grid1024, 200.0, 0.05, times=times,
                       disable_curvature=True)
    rep = depletion_measure(tr, 20.0)
    assert abs(rep.spatial_exponent) <= 0.1
    assert np.allclose(np.abs(tr.omega), np.abs(sine1024), atol=1e-6)


def test_depletion_routes_agree(canonical, grid1024, sine1024):
    times = np.concatenate([[0.0], np.linspace(20, 200, 37)])
    out = {}
    for route in ("laplacian", "integrand"):
        tr = evolve_spectral(canonical, 4, sine1024, times, grid1024, omega_route=route)
        out[route] = depletion_measure(tr, 20.0, y_window=(0.02, 0.1))
    assert abs(out["laplacian"].spatial_exponent - out["integrand"].spatial_exponent) <= 0.1
    assert out["integrand"].temporal.r2 > 0.9


def test_depletion_input_checks(canonical, grid256):
    tr = evolve_direct(canonical, 1, initial_data(grid256), grid256, 30.0, 0.05,
                       times=np.linspace(0, 30, 31))
    with pytest.raises(ValueError):
        depletion_measure(tr, 5.0)
    with pytest.raises(ValueError):
        depletion_measure(tr, 20.0, y_window=(grid256.h, 0.2))
    with pytest.raises(ValueError):
        depletion_measure(tr, 40.0)
    rep = depletion_measure(tr, 20.0)
    assert rep.y_window == (0.02, 0.2) and rep.envelope.shape == rep.envelope_y.shape
