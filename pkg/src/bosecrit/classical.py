"""Mean-field phase space of the three-mode model at K = 0.

Coordinates: ``z`` is the relative occupation of the k = 0 mode and ``phi``
the conjugate angle.  Most routines work with ``u = 1 - z`` internally since
the energy is a quadratic polynomial in ``u``:

    omega = u * (1 - alpha * c) + alpha * u**2 * (c - 1/8),   c = cos(phi)**2

The dynamics is pi-periodic in ``phi``; angles are reduced modulo pi.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams

__all__ = [
    "ClassicalPoint",
    "FixedPointSet",
    "OrbitClass",
    "omega",
    "omega_min",
    "omega_max",
    "energy_per_particle",
    "energy_from_omega",
    "omega_from_energy",
    "fixed_points",
    "separatrix_energy",
    "z_branches",
    "classify_orbit",
    "phase_portrait_grid",
    "orbit_polyline",
    "critical_angle",
    "stability_exponent",
]


@dataclass(frozen=True)
class ClassicalPoint:
    z: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "phi", float(np.mod(self.phi, np.pi)))


@dataclass(frozen=True)
class FixedPointSet:
    """``minimum`` is None for alpha <= 1, where the minimum is the whole z = 1 edge."""

    minimum: tuple[ClassicalPoint, float] | None
    hyperbolic: list[tuple[ClassicalPoint, float]] = field(default_factory=list)


class OrbitClass(enum.Enum):
    ROTATION = "rotation"
    VIBRATION = "vibration"
    SEPARATRIX = "separatrix"


def omega(z, phi, alpha):
    z = np.asarray(z, dtype=float)
    c = np.cos(phi) ** 2
    res = (1.0 - z) * (1.0 - alpha * ((1.0 - z) / 8.0 + z * c))
    return res if res.ndim else float(res)


def omega_min(alpha: float) -> float:
    """Lowest omega on the physical domain; the minimum sits on phi = 0."""
    if alpha <= 1.0:
        return 0.0
    return -2.0 * (alpha - 1.0) ** 2 / (7.0 * alpha)


def omega_max(alpha: float) -> float:
    # for fixed u, omega decreases with cos(phi)**2, so the maximum lies on phi = pi/2
    if alpha <= 4.0:
        return 1.0 - alpha / 8.0
    return 2.0 / alpha


def _constant(params: ModelParams) -> float:
    nt = params.n_tilde
    return params.alpha * (-0.25 + 1.5 / nt - 9.0 / (8.0 * nt * nt)) - 1.0 / nt


def energy_per_particle(omega_value, params: ModelParams):
    """E / n_tilde for a phase-space energy ``omega`` (symmetric-ordering constants included)."""
    return omega_value + _constant(params)


def energy_from_omega(omega_value, params: ModelParams):
    return params.n_tilde * (omega_value + _constant(params))


def omega_from_energy(energy, params: ModelParams):
    return energy / params.n_tilde - _constant(params)


def critical_angle(alpha: float) -> float:
    """Angle of the hyperbolic point in [0, pi/2]: cos(phi_c)**2 = 1/alpha."""
    if alpha <= 1.0:
        raise ValueError("hyperbolic points exist only for alpha > 1")
    return math.acos(math.sqrt(1.0 / alpha))


def stability_exponent(alpha: float) -> float:
    return 2.0 * math.sqrt(alpha - 1.0) if alpha > 1.0 else 0.0


def fixed_points(alpha: float) -> FixedPointSet:
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if alpha <= 1.0:
        return FixedPointSet(None, [])
    u_star = 4.0 * (alpha - 1.0) / (7.0 * alpha)
    minimum = (ClassicalPoint(1.0 - u_star, 0.0), omega_min(alpha))
    phi_c = critical_angle(alpha)
    lam = stability_exponent(alpha)
    hyper = [(ClassicalPoint(1.0, phi_c), lam), (ClassicalPoint(1.0, np.pi - phi_c), lam)]
    return FixedPointSet(minimum, hyper)


def separatrix_energy(params: ModelParams) -> tuple[float, float]:
    """(omega_sep, E_sep) with omega_sep = 0; raises for alpha <= 1."""
    if params.alpha <= 1.0:
        raise ValueError(f"no separatrix for alpha = {params.alpha} <= 1")
    return 0.0, float(energy_from_omega(0.0, params))


def _u_roots(w: float, c: float, alpha: float) -> list[float]:
    a = alpha * (c - 0.125)
    b = 1.0 - alpha * c
    if a == 0.0:
        return [] if b == 0.0 else [w / b]
    disc = b * b + 4.0 * a * w
    if disc < 0.0:
        return []
    s = math.sqrt(disc)
    # cancellation-free pair
    q = -0.5 * (b + math.copysign(s, b)) if b != 0.0 else -0.5 * s
    if q == 0.0:
        return [0.0, 0.0]
    return sorted({q / a, -w / q} if w != 0.0 else {0.0, q / a})


def z_branches(omega_value: float, phi: float, alpha: float) -> list[float]:
    """All real z solving omega(z, phi) = omega_value, sorted; unphysical z are kept."""
    c = math.cos(phi) ** 2
    return sorted(1.0 - u for u in _u_roots(float(omega_value), c, float(alpha)))


def separatrix_tolerance(alpha: float) -> float:
    return 1e-12 * max(1.0, alpha)


def classify_orbit(omega_value: float, alpha: float) -> OrbitClass:
    lo, hi = omega_min(alpha), omega_max(alpha)
    tol = separatrix_tolerance(alpha)
    if omega_value < lo - tol or omega_value > hi + tol:
        raise ValueError(f"omega={omega_value} outside physical range [{lo}, {hi}] for alpha={alpha}")
    if alpha > 1.0:
        if abs(omega_value) < tol:
            return OrbitClass.SEPARATRIX
        if omega_value < 0.0:
            return OrbitClass.VIBRATION
    return OrbitClass.ROTATION


def phase_portrait_grid(alpha: float, n_z: int, n_phi: int):
    """omega on a uniform grid over z in [0, 1] and phi in [0, pi).

    Returns ``(z, phi, values)`` with ``values[i, j] = omega(z[i], phi[j])``.
    """
    if n_z < 2 or n_phi < 2:
        raise ValueError("grid sizes must be >= 2")
    z = np.linspace(0.0, 1.0, n_z)
    phi = np.linspace(0.0, np.pi, n_phi, endpoint=False)
    return z, phi, omega(z[:, None], phi[None, :], alpha)


def _vibration_turning_cos2(w: float, alpha: float) -> float:
    s = math.sqrt(max(w * (4.0 * w - 4.0 + alpha / 2.0), 0.0))
    return min((1.0 - 2.0 * w + s) / alpha, 1.0)


def orbit_polyline(omega_value: float, alpha: float, n_phi: int = 200):
    """Points (phi, z) along the constant-omega orbit.

    Rotations are returned over one phi period [0, pi].  Vibrations are
    returned as a closed loop around phi = 0 (phi in (-phi_t, phi_t)).
    """
    kind = classify_orbit(omega_value, alpha)
    if kind is OrbitClass.VIBRATION:
        c_t = _vibration_turning_cos2(omega_value, alpha)
        phi_t = math.acos(math.sqrt(c_t))
        s = np.linspace(-1.0, 1.0, n_phi)
        phis = phi_t * np.sin(0.5 * np.pi * s)
        lower, upper = [], []
        for p in phis:
            zs = [z for z in z_branches(omega_value, p, alpha) if -1e-12 <= z <= 1 + 1e-12]
            if not zs:
                zs = [1.0 - _vibration_center_u(omega_value, p, alpha)]
            lower.append(min(zs))
            upper.append(max(zs))
        phi_loop = np.concatenate([phis, phis[::-1]])
        z_loop = np.concatenate([np.array(upper), np.array(lower)[::-1]])
        return phi_loop, z_loop
    phis = np.linspace(0.0, np.pi, n_phi)
    zs = []
    for p in phis:
        roots = [z for z in z_branches(omega_value, p, alpha) if -1e-12 <= z <= 1 + 1e-12]
        # the rotation branch is the one with the smallest z (largest u)
        zs.append(min(roots) if roots else 1.0)
    return phis, np.array(zs)


def _vibration_center_u(w, phi, alpha):
    c = math.cos(phi) ** 2
    return -(1.0 - alpha * c) / (2.0 * alpha * (c - 0.125))
