import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shearlab.errors import (ConfigError, DegenerateCritical, MultipleCriticalPoints,
                             NoAdmissibleDelta0, NoCriticalPoint)
from shearlab.profile import (ShearProfile, compute_delta0, cosine_well, delta_of_lambda, dk_scale,
                              find_critical_point, make_profile, polynomial_profile, quadratic_well,
                              quartic_well, rho_weight)


def test_quadratic_critical_point(canonical):
    assert canonical.y_star == pytest.approx(0.5, abs=1e-12)
    assert canonical.b2_star == pytest.approx(2.0, abs=1e-12)


def test_monotone_profile_has_no_critical_point():
    with pytest.raises(NoCriticalPoint):
        find_critical_point(lambda y: np.ones_like(y), lambda y: np.zeros_like(y))


def test_cubic_perturbation_keeps_symmetric_point():
    p = polynomial_profile([0.0, 0.0, 1.0, 0.1])
    # b' = 2u + 0.3u^2 vanishes at u = 0 inside the channel and at u = -20/3 outside
    assert p.y_star == pytest.approx(0.5, abs=1e-12)
    assert p.b2_star == pytest.approx(2.0, abs=1e-10)


def test_two_critical_points_rejected():
    with pytest.raises(MultipleCriticalPoints):
        find_critical_point(lambda y: np.sin(4 * np.pi * y), lambda y: 4 * np.pi * np.cos(4 * np.pi * y))


def test_degenerate_critical_point_rejected():
    with pytest.raises(DegenerateCritical):
        polynomial_profile([0.0, 0.0, 0.0, 0.0, 1.0])


def test_delta0_quadratic():
    # b''' = 0, so only min(y*, 1-y*)/10 and 1/8 bind
    assert quadratic_well().delta0 == pytest.approx(0.9 * 0.05, rel=1e-12)


def _oracle_delta0(d3b, y_star, b2):
    """Largest admissible d on a fine grid, brute force."""
    ds = np.linspace(1e-6, 0.125, 200_001)
    ok = []
    for d in ds[::50]:
        ys = np.linspace(y_star - 4 * d, y_star + 4 * d, 513)
        ok.append(min(y_star, 1 - y_star) > 10 * d and d * np.max(np.abs(d3b(ys))) < b2 / 10)
    ok = np.array(ok)
    return ds[::50][np.flatnonzero(ok)[-1]]


def test_delta0_third_derivative_binds():
    # b''' = 7.2; the other zero of b' sits at u = -0.56, outside the channel
    p = polynomial_profile([0.0, 0.0, 1.0, 1.2])
    expected = 0.9 * 2.0 / (10 * 7.2)
    assert p.delta0 == pytest.approx(expected, rel=1e-6)
    assert p.delta0 == pytest.approx(0.9 * _oracle_delta0(p.d3b, p.y_star, p.b2_star), rel=1e-3)


def test_delta0_near_wall_flags():
    with pytest.raises(NoAdmissibleDelta0):
        quadratic_well(center=0.005)
    assert quadratic_well(center=0.05).delta0 == pytest.approx(0.9 * 0.005)


def test_delta0_conditions_hold_with_margin():
    for p in (quadratic_well(), quartic_well(), polynomial_profile([0, 0, 1, 0.2, 0.5])):
        d = p.delta0
        ys = np.linspace(p.y_star - 4 * d, p.y_star + 4 * d, 2001)
        assert min(p.y_star, 1 - p.y_star) > 10 * d
        assert d * np.max(np.abs(p.d3b(ys))) < p.b2_star / 10


def test_scale_examples(canonical):
    b = canonical.b_star
    assert delta_of_lambda(canonical, b) == 0
    assert delta_of_lambda(canonical, b + 0.0008) == pytest.approx(0.16)
    assert delta_of_lambda(canonical, b + 0.02) == pytest.approx(0.8)
    assert rho_weight(canonical, canonical.y_star, b, 0.0) == 0
    assert rho_weight(canonical, canonical.y_star, b + 0.01, 0.01) == pytest.approx(0.2)
    assert dk_scale(canonical, 100, b + 0.04, 0.0) == pytest.approx(0.01)


@settings(max_examples=50, deadline=None)
@given(lam=st.floats(-0.1, 0.4), eps=st.floats(1e-6, 0.1),
       y1=st.floats(0, 1), y2=st.floats(0, 1), k=st.integers(1, 50))
def test_scale_invariants(lam, eps, y1, y2, k):
    p = quadratic_well()
    r1, r2 = rho_weight(p, y1, lam, eps), rho_weight(p, y2, lam, eps)
    assert abs(r1 - r2) <= abs(y1 - y2) + 1e-12
    assert rho_weight(p, p.y_star, lam, eps) <= min(r1, r2) + 1e-15
    assert r1 >= dk_scale(p, k, lam, eps) > 0


def test_delta_monotone(canonical):
    gaps = np.linspace(0, 0.3, 101)
    d = delta_of_lambda(canonical, canonical.b_star + gaps)
    assert np.all(np.diff(d) > 0)
    assert np.allclose(delta_of_lambda(canonical, canonical.b_star - gaps), d)


def test_cosine_control_is_admissible():
    p = cosine_well()
    assert p.y_star == pytest.approx(0.5)
    assert p.b2_star == pytest.approx(4 * np.pi**2)


def test_make_profile_errors():
    assert make_profile({"kind": "quadratic_well"}).name == "quadratic_well"
    with pytest.raises(ConfigError):
        make_profile({"kind": "nope"})
    with pytest.raises(ConfigError):
        make_profile({"kind": "quadratic_well", "bogus": 1})
    with pytest.raises(ConfigError):
        make_profile({"kind": "custom"})


def test_eps_floor(canonical):
    h = 1 / 1025
    assert canonical.eps_floor(h) == pytest.approx(max(4 * h * 1.0, 2 * (4 * h) ** 2 / 2))


def test_profile_is_frozen(canonical):
    assert isinstance(canonical, ShearProfile)
    with pytest.raises(AttributeError):
        canonical.y_star = 0.3
