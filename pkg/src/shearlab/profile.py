"""Shear profiles b(y) on the channel [0, 1] and the scales derived from them.

A profile carries closed-form evaluators for b and its first three
derivatives, the unique interior critical point ``y_star`` and the
localisation scale ``delta0`` around it.  :class:`SpectralGeometry` bundles
the lambda-dependent scales (delta, rho, d_k, rho_k) used by the Green's
function bounds, the weighted norms and the limiting absorption probes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import bisect

from .errors import (
    ConfigError,
    DegenerateCritical,
    MultipleCriticalPoints,
    NoAdmissibleDelta0,
    NoCriticalPoint,
    ProfileError,
)

Evaluator = Callable[[np.ndarray], np.ndarray]

SCAN_POINTS = 10_000
DELTA0_SAFETY = 0.9
DELTA0_CAP = 0.125
# below this a cutoff of width delta0 cannot be represented on any desk grid
MIN_DELTA0 = 1e-3


def find_critical_point(db: Evaluator, d2b: Evaluator, tol: float = 1e-8) -> tuple[float, float]:
    """Locate the unique interior zero of ``db`` and return ``(y_star, b''(y_star))``.

    A sign scan on 10^4 interior points counts the zeros, then bisection
    polishes the single bracket to 1e-12.
    """
    ys = np.linspace(0.0, 1.0, SCAN_POINTS + 2)[1:-1]
    s = np.asarray(db(ys), dtype=float)
    sgn = np.sign(s)
    roots: list[tuple[float, float]] = []
    for i in np.flatnonzero(sgn == 0):
        roots.append((ys[i], ys[i]))
    nz = np.flatnonzero(sgn != 0)
    for a, c in zip(nz[:-1], nz[1:]):
        if sgn[a] != sgn[c]:
            if c - a > 1:
                continue  # exact zero between them, already recorded
            roots.append((ys[a], ys[c]))
    if not roots:
        raise NoCriticalPoint("b' has no interior zero on (0, 1)")
    if len(roots) > 1:
        where = ", ".join(f"{0.5 * (lo + hi):.6g}" for lo, hi in roots)
        raise MultipleCriticalPoints(f"b' changes sign {len(roots)} times (near {where})")
    lo, hi = roots[0]
    y_star = lo if lo == hi else bisect(lambda y: float(db(np.float64(y))), lo, hi, xtol=1e-12)
    b2 = float(d2b(np.float64(y_star)))
    if abs(b2) < tol:
        raise DegenerateCritical(f"|b''(y*)| = {abs(b2):.3e} below tol {tol:.1e}")
    if b2 < 0:
        raise ProfileError("b''(y*) < 0 is not supported; flip the sign of b")
    return float(y_star), b2


def _sup_abs(f: Evaluator, lo: float, hi: float, m: int = 513) -> float:
    ys = np.linspace(max(lo, 0.0), min(hi, 1.0), m)
    return float(np.max(np.abs(f(ys))))


def compute_delta0(d3b: Evaluator, y_star: float, b2_star: float,
                   min_delta0: float = MIN_DELTA0) -> float:
    """Largest admissible localisation scale, times the 0.9 safety factor.

    Admissible means ``min(y*, 1-y*) > 10 d``, ``d < 1/8`` and
    ``d * sup_{|y-y*|<4d} |b'''| < b''(y*)/10``.  The last condition is
    monotone in ``d`` so its boundary is found by bisection.
    """
    upper = min(DELTA0_CAP, min(y_star, 1.0 - y_star) / 10.0)

    def ok(d: float) -> bool:
        return d * _sup_abs(d3b, y_star - 4 * d, y_star + 4 * d) < b2_star / 10.0

    if ok(upper):
        d_max = upper
    else:
        lo, hi = 0.0, upper
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if ok(mid) else (lo, mid)
        d_max = lo
    delta0 = DELTA0_SAFETY * d_max
    if not delta0 > min_delta0:
        raise NoAdmissibleDelta0(
            f"admissible delta0 <= {d_max:.3e} (critical point at {y_star:.4g}); "
            f"need more than {min_delta0:.1e}")
    return delta0


@dataclass(frozen=True)
class ShearProfile:
    b: Evaluator
    db: Evaluator
    d2b: Evaluator
    d3b: Evaluator
    y_star: float
    b2_star: float
    delta0: float
    name: str = "custom"
    spec: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_evaluators(cls, b, db, d2b, d3b, name="custom", spec=None, tol=1e-8,
                        min_delta0=MIN_DELTA0) -> "ShearProfile":
        y_star, b2 = find_critical_point(db, d2b, tol)
        delta0 = compute_delta0(d3b, y_star, b2, min_delta0)
        return cls(b, db, d2b, d3b, y_star, b2, delta0, name, dict(spec or {}))

    @property
    def b_star(self) -> float:
        return float(self.b(np.float64(self.y_star)))

    def _fine(self) -> np.ndarray:
        return np.unique(np.concatenate([np.linspace(0.0, 1.0, 4097), [self.y_star]]))

    @property
    def sigma(self) -> tuple[float, float]:
        v = self.b(self._fine())
        return float(np.min(v)), float(np.max(v))

    @property
    def max_abs_db(self) -> float:
        return float(np.max(np.abs(self.db(self._fine()))))

    @property
    def max_abs_b(self) -> float:
        return float(np.max(np.abs(self.b(self._fine()))))

    def eps_floor(self, h: float) -> float:
        """Smallest epsilon whose critical layer the grid spacing ``h`` resolves."""
        return max(4.0 * h * self.max_abs_db, self.b2_star * (4.0 * h) ** 2 / 2.0)

    def geometry(self) -> "SpectralGeometry":
        return SpectralGeometry(self)


def delta_of_lambda(p: ShearProfile, lam):
    return 8.0 * np.sqrt(np.abs(np.asarray(lam) - p.b_star) / p.b2_star)


def rho_weight(p: ShearProfile, y, lam, eps):
    return (np.sqrt(np.abs(lam - p.b_star)) + np.sqrt(np.abs(eps))
            + np.abs(np.asarray(y) - p.y_star))


def dk_scale(p: ShearProfile, k, lam, eps):
    return np.minimum(np.sqrt(np.abs(lam - p.b_star)) + np.sqrt(np.abs(eps)), 1.0 / abs(k))


def rho_k(p: ShearProfile, y, k, lam, eps):
    return np.minimum(rho_weight(p, y, lam, eps), 1.0 / abs(k))


@dataclass(frozen=True)
class SpectralGeometry:
    """Lambda-dependent scales attached to one profile."""

    profile: ShearProfile

    @property
    def sigma(self) -> tuple[float, float]:
        return self.profile.sigma

    def s_d(self, d: float) -> tuple[float, float]:
        ys = self.profile.y_star
        return ys - d, ys + d

    def sigma_d(self, d: float) -> tuple[float, float]:
        lo, hi = self.s_d(d)
        ys = np.linspace(max(lo, 0.0), min(hi, 1.0), 1025)
        v = self.profile.b(ys)
        return float(np.min(v)), float(np.max(v))

    def delta(self, lam):
        return delta_of_lambda(self.profile, lam)

    def rho(self, y, lam, eps):
        return rho_weight(self.profile, y, lam, eps)

    def dk(self, k, lam, eps):
        return dk_scale(self.profile, k, lam, eps)

    def rho_k(self, y, k, lam, eps):
        return rho_k(self.profile, y, k, lam, eps)


# --- built-in profiles -----------------------------------------------------

def _polynomial_profile(coeffs, center, name, spec, **kw) -> ShearProfile:
    P = Polynomial(coeffs)
    derivs = [P, P.deriv(1), P.deriv(2), P.deriv(3)]

    def shifted(q):
        return lambda y: q(np.asarray(y, dtype=float) - center)

    return ShearProfile.from_evaluators(*(shifted(q) for q in derivs), name=name, spec=spec, **kw)


def quadratic_well(center: float = 0.5, curvature: float = 2.0, offset: float = 0.0) -> ShearProfile:
    """``b = offset + curvature/2 * (y - center)^2``; the canonical case is the default."""
    spec = {"kind": "quadratic_well", "center": center, "curvature": curvature, "offset": offset}
    return _polynomial_profile([offset, 0.0, curvature / 2.0], center, "quadratic_well", spec)


def quartic_well(center: float = 0.5, quartic: float = 1.0, cubic: float = 0.0) -> ShearProfile:
    spec = {"kind": "quartic_well", "center": center, "quartic": quartic, "cubic": cubic}
    return _polynomial_profile([0.0, 0.0, 1.0, cubic, quartic], center, "quartic_well", spec)


def polynomial_profile(coefficients, center: float = 0.5) -> ShearProfile:
    """Custom profile ``sum_j c_j (y - center)^j`` with exact derivatives."""
    spec = {"kind": "custom", "center": center, "coefficients": list(map(float, coefficients))}
    return _polynomial_profile(list(coefficients), center, "custom", spec)


def cosine_well(center: float = 0.5, amplitude: float = 1.0) -> ShearProfile:
    """``b = amplitude * cos(2 pi (y - center + 1/2))``, i.e. ``cos(2 pi y)`` by default.

    Both inflection points sit inside the channel, and for small |k| the
    operator has unstable discrete eigenvalues, so this is the negative control.
    """
    w = 2.0 * math.pi
    s = center - 0.5
    A = amplitude
    spec = {"kind": "cosine_well", "center": center, "amplitude": amplitude}
    return ShearProfile.from_evaluators(
        lambda y: A * np.cos(w * (np.asarray(y) - s)),
        lambda y: -A * w * np.sin(w * (np.asarray(y) - s)),
        lambda y: -A * w**2 * np.cos(w * (np.asarray(y) - s)),
        lambda y: A * w**3 * np.sin(w * (np.asarray(y) - s)),
        name="cosine_well", spec=spec)


BUILTINS = {
    "quadratic_well": quadratic_well,
    "quartic_well": quartic_well,
    "cosine_well": cosine_well,
}


def make_profile(spec: dict) -> ShearProfile:
    """Build a profile from its run-config dictionary."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "custom":
        if "coefficients" not in spec:
            raise ConfigError("custom profile needs 'coefficients'")
        return polynomial_profile(spec["coefficients"], spec.get("center", 0.5))
    if kind not in BUILTINS:
        raise ConfigError(f"unknown profile kind {kind!r}; expected one of "
                          f"{sorted(BUILTINS) + ['custom']}")
    try:
        return BUILTINS[kind](**spec)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for profile {kind!r}: {exc}") from None
