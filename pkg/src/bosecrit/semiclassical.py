"""Torus quantization of the three-mode mean-field dynamics and separatrix analysis.

Quantization rule: the action ``(1/2pi) * loop integral of (1 - z) dphi``
over one period of the orbit equals ``(m + 1/2) / n_tilde``.  Rotations have
phi-period pi (the pi-periodicity of the dynamics), so at alpha = 0 the action
is omega/2 and the rule reproduces the exact free spectrum E_m = 2m.

Near the separatrix (omega = 0 for alpha > 1) the action has a logarithmic
derivative singularity; its derivative is the density of states per unit
energy, ``rho(E) = dA/domega``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .classical import (
    OrbitClass,
    classify_orbit,
    critical_angle,
    energy_from_omega,
    omega_max,
    omega_min,
    separatrix_energy,
)
from .model import ModelParams
from .quadrature import integrate

__all__ = [
    "ActionResult",
    "SemiclassicalSpectrum",
    "SeparatrixLadder",
    "GapScaling",
    "DosFit",
    "RootBracketError",
    "action_integral",
    "separatrix_action",
    "ebk_levels",
    "ebk_spectrum",
    "dos_asymptotic",
    "integrated_dos_asymptotic",
    "log_time",
    "separatrix_ladder",
    "central_spacings",
    "fit_tau_offset",
    "minimal_gap",
    "gap_scaling_fit",
    "inverse_gap_regression",
]

ALPHA_MAX = 4.0  # above this an extra elliptic point appears at phi = pi/2


class RootBracketError(RuntimeError):
    pass


@dataclass(frozen=True)
class ActionResult:
    omega_value: float
    action: float
    orbit_class: OrbitClass
    turning_points: tuple[float, float] | None = None
    error: float = 0.0


def _check_alpha(alpha):
    if not 0.0 <= alpha <= ALPHA_MAX:
        raise ValueError(f"action integral implemented for 0 <= alpha <= {ALPHA_MAX}, got {alpha}")


def _rotation_u(w, alpha):
    """Physical root u(phi) of the rotation branch, vectorised over phi."""

    def f(phi):
        c = np.cos(phi) ** 2
        a = alpha * (c - 0.125)
        b = 1.0 - alpha * c
        # b^2 + 4aw expanded in c: avoids the cancellation near c = 0 at the top edge
        disc = alpha * alpha * c * c + 2.0 * alpha * c * (2.0 * w - 1.0) + (1.0 - 0.5 * alpha * w)
        s = np.sqrt(np.maximum(disc, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            # b <= 0 implies a > 0 for alpha < 8
            return np.where(b > 0.0, 2.0 * w / (b + s), (s - b) / (2.0 * a))

    return f


def _vibration_width(w, alpha, phi_t, c_gap):
    """Integrand in s, with phi = phi_t - s**2, of the branch difference u+ - u-."""

    def f(s):
        s2 = s * s
        phi = phi_t - s2
        c = np.cos(phi) ** 2
        gap_t = np.sin(s2) * np.sin(2.0 * phi_t - s2)  # c - c_t, cancellation free
        prod = np.maximum(gap_t * (gap_t + c_gap), 0.0)
        return 2.0 * s * np.sqrt(prod) / (c - 0.125)

    return f


def _turning_cos2(w, alpha):
    root = math.sqrt(max(w * (4.0 * w - 4.0 + alpha / 2.0), 0.0))
    c_t = (1.0 - 2.0 * w + root) / alpha
    # c_t and the distance to the other root
    return min(c_t, 1.0), 2.0 * root / alpha


def action_integral(omega_value: float, alpha: float, *, order: int = 20,
                    tol: float = 1e-14) -> ActionResult:
    """Action of the constant-omega orbit, normalised so it lies in [0, 1/2]."""
    _check_alpha(alpha)
    w = float(omega_value)
    kind = classify_orbit(w, alpha)
    lo = omega_min(alpha)
    if kind is OrbitClass.VIBRATION:
        if w <= lo:
            return ActionResult(w, 0.0, kind, (0.0, 0.0))
        c_t, c_gap = _turning_cos2(w, alpha)
        phi_t = math.acos(math.sqrt(c_t))
        val, err = integrate(_vibration_width(w, alpha, phi_t, c_gap), 0.0, math.sqrt(phi_t),
                             tol=tol, order=order)
        return ActionResult(w, val / math.pi, kind, (-phi_t, phi_t), err / math.pi)
    if kind is OrbitClass.SEPARATRIX:
        w = 0.0
    if w <= 0.0 and alpha <= 1.0:
        return ActionResult(w, 0.0, kind)
    w = min(w, omega_max(alpha))
    brk = (critical_angle(alpha),) if alpha > 1.0 else ()
    val, err = integrate(_rotation_u(w, alpha), 0.0, 0.5 * math.pi, tol=tol, order=order,
                         breakpoints=brk)
    return ActionResult(w, val / math.pi, kind, None, err / math.pi)


def separatrix_action(alpha: float, order: int = 20) -> float:
    """Action enclosed by the separatrix (alpha > 1)."""
    if alpha <= 1.0:
        raise ValueError("no separatrix for alpha <= 1")
    return action_integral(0.0, alpha, order=order).action


@dataclass(frozen=True)
class SemiclassicalSpectrum:
    params: ModelParams
    m: np.ndarray
    omega: np.ndarray
    energies: np.ndarray
    orbit_class: list = field(repr=False)

    @property
    def excitation(self) -> np.ndarray:
        return self.energies - self.energies[0]


def ebk_levels(params: ModelParams, ms, *, order: int = 20, tol: float = 1e-14) -> np.ndarray:
    """omega_m for the requested quantum numbers (ascending in m)."""
    if params.mode_cutoff != 1:
        raise ValueError("torus quantization is implemented for the three-mode model only")
    alpha = params.alpha
    _check_alpha(alpha)
    ms = np.asarray(ms, dtype=int)
    order_idx = np.argsort(ms)
    lo_all, hi_all = omega_min(alpha), omega_max(alpha)
    out = np.empty(ms.size)
    lo = lo_all
    for j in order_idx:
        m = int(ms[j])
        if m < 0 or m > params.n_particles // 2:
            raise ValueError(f"quantum number m={m} outside 0..{params.n_particles // 2}")
        target = (m + 0.5) / params.n_tilde

        def g(w):
            return action_integral(w, alpha, order=order, tol=tol).action - target

        g_lo, g_hi = g(lo), g(hi_all)
        if g_lo > 0:
            lo, g_lo = lo_all, g(lo_all)
        if not (g_lo <= 0.0 <= g_hi):
            raise RootBracketError(f"cannot bracket the quantized orbit for m={m} "
                                   f"(residuals {g_lo:.3g}, {g_hi:.3g})")
        if g_lo == 0.0:
            root = lo
        else:
            root = optimize.brentq(g, lo, hi_all, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                                   maxiter=200)
        out[j] = root
        lo = root
    return out


def ebk_spectrum(params: ModelParams, *, order: int = 20, tol: float = 1e-14) -> SemiclassicalSpectrum:
    ms = np.arange(params.n_particles // 2 + 1)
    w = ebk_levels(params, ms, order=order, tol=tol)
    kinds = [classify_orbit(x, params.alpha) for x in w]
    e = energy_from_omega(w, params)
    srt = np.argsort(e, kind="stable")
    return SemiclassicalSpectrum(params, ms[srt], w[srt], e[srt], [kinds[i] for i in srt])


def _lambda(params: ModelParams) -> float:
    if params.alpha <= 1.0:
        raise ValueError("separatrix quantities need alpha > 1")
    return math.sqrt(params.alpha - 1.0)


def dos_asymptotic(energy, params: ModelParams, offset: float = 0.0):
    """Average density of states near the separatrix; +inf at E = E_sep."""
    lam = _lambda(params)
    _, e_sep = separatrix_energy(params)
    x = np.abs(np.asarray(energy, dtype=float) - e_sep)
    with np.errstate(divide="ignore"):
        rho = -(np.log(x) - math.log(params.n_tilde)) / (2.0 * math.pi * lam) + offset
    rho = np.where(x == 0.0, np.inf, rho)
    return rho if rho.ndim else float(rho)


def integrated_dos_asymptotic(x, n_tilde: float, lam: float, offset: float = 0.0):
    """Level count between E_sep and E_sep + x (signed, odd in x)."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = ax * (math.log(n_tilde) - np.log(ax) + 1.0) / (2.0 * math.pi * lam) + offset * ax
    val = np.where(ax == 0.0, 0.0, val)
    res = np.sign(x) * val
    return res if res.ndim else float(res)


def log_time(params: ModelParams, offset: float = 0.0) -> tuple[float, float]:
    """(tau, delta_E) with tau = log(n_tilde)/lambda + offset and delta_E = 2pi/tau."""
    lam = _lambda(params)
    tau = math.log(params.n_tilde) / lam + offset
    return tau, 2.0 * math.pi / tau


@dataclass(frozen=True)
class SeparatrixLadder:
    alpha: float
    n_tilde: float
    lam: float
    k: np.ndarray
    energies: np.ndarray  # E_[k] - E_sep
    delta_e_limit: float
    method: str

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.energies)

    @property
    def tau(self) -> float:
        return 2.0 * math.pi / self.delta_e_limit


def _ladder_asymptotic(n_tilde, lam, window, dos_offset, phase):
    def count(x):
        return integrated_dos_asymptotic(x, n_tilde, lam, dos_offset)

    xs = []
    for k in range(-window, window + 1):
        target = k + phase
        if target == 0.0:
            xs.append(0.0)
            continue
        sgn = 1.0 if target > 0 else -1.0
        hi = 1.0
        while abs(count(sgn * hi)) < abs(target):
            hi *= 2.0
            if hi > 1e6:
                raise RootBracketError(f"integrated DOS never reaches {target}")
        root = optimize.brentq(lambda y: abs(count(sgn * y)) - abs(target), 0.0, hi,
                               xtol=1e-15, rtol=4 * np.finfo(float).eps)
        xs.append(sgn * root)
    return np.arange(-window, window + 1), np.array(xs)


def _ladder_quadrature(params, window, order):
    nt = params.n_tilde
    a_sep = separatrix_action(params.alpha, order=order)
    m_mid = int(round(nt * a_sep - 0.5))
    lo_m = m_mid - window - 1
    hi_m = m_mid + window + 1
    if lo_m < 0 or hi_m > params.n_particles // 2:
        raise ValueError("ladder window exceeds the available levels")
    ms = np.arange(lo_m, hi_m + 1)
    x = nt * ebk_levels(params, ms, order=order)  # E - E_sep = n_tilde * omega
    centre = int(np.argmin(np.abs(x)))
    sel = slice(centre - window, centre + window + 1)
    if centre - window < 0 or centre + window + 1 > len(x):
        raise ValueError("ladder window exceeds the available levels")
    return np.arange(-window, window + 1), x[sel]


def separatrix_ladder(params: ModelParams, window: int, *, method: str = "auto",
                      dos_offset: float = 0.0, phase: float = 0.0, tau_offset: float = 0.0,
                      order: int = 20) -> SeparatrixLadder:
    """The 2*window + 1 levels nearest the separatrix.

    ``method="quadrature"`` solves the full quantization rule; ``"asymptotic"``
    inverts the integrated asymptotic density of states, with ``dos_offset``
    its O(1) constant and ``phase`` the fractional position of E_sep between
    levels (0 puts a level on the separatrix, giving a k -> -k symmetric ladder).
    ``"auto"`` uses quadrature while the level spacing in omega stays above 1e-8.
    """
    lam = _lambda(params)
    tau, delta_e = log_time(params, tau_offset)
    if window < 1:
        raise ValueError("window must be >= 1")
    if method == "auto":
        method = "quadrature" if delta_e / params.n_tilde > 1e-8 else "asymptotic"
    if method == "quadrature":
        k, x = _ladder_quadrature(params, window, order)
    elif method == "asymptotic":
        k, x = _ladder_asymptotic(params.n_tilde, lam, window, dos_offset, phase)
    else:
        raise ValueError(f"unknown ladder method {method!r}")
    return SeparatrixLadder(params.alpha, params.n_tilde, lam, k, x, delta_e, method)


def central_spacings(ladder: SeparatrixLadder, n: int = 7) -> np.ndarray:
    """The n spacings whose midpoints lie closest to E_sep, in energy order."""
    s = ladder.spacings
    if n > s.size:
        raise ValueError(f"ladder has only {s.size} spacings")
    mid = 0.5 * (ladder.energies[1:] + ladder.energies[:-1])
    pick = np.sort(np.argsort(np.abs(mid), kind="stable")[:n])
    return s[pick]


def fit_tau_offset(ladders, n: int = 7) -> float:
    """Least-squares O(1) offset of tau shared by all ladders (tau measured as 2pi/spacing)."""
    resid = []
    for lad in ladders:
        s = central_spacings(lad, n)
        resid.append(2.0 * math.pi / s - math.log(lad.n_tilde) / lad.lam)
    return float(np.mean(np.concatenate(resid)))


@dataclass(frozen=True)
class DosFit:
    slope: float
    intercept: float
    r_squared: float
    offset: float  # O(1) constant with the slope fixed at 1/(2 pi lambda)
    n_points: int


def inverse_gap_regression(levels, params: ModelParams) -> DosFit:
    """Regress inverse level gaps on -log|E - E_sep| (gaps placed at pair midpoints)."""
    lv = np.sort(np.asarray(levels, dtype=float))
    _, e_sep = separatrix_energy(params)
    mid = 0.5 * (lv[1:] + lv[:-1])
    inv = 1.0 / np.diff(lv)
    keep = mid != e_sep
    x = -np.log(np.abs(mid[keep] - e_sep))
    y = inv[keep]
    fit = stats.linregress(x, y)
    model = dos_asymptotic(mid[keep], params)
    return DosFit(float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2),
                  float(np.mean(y - model)), int(keep.sum()))


def _ebk_gap(params, m):
    w = ebk_levels(params, [m, m + 1])
    return params.n_tilde * (w[1] - w[0])


def minimal_gap(n_particles: int, alpha_grid, *, m: int = 0, gap_fn=None) -> tuple[float, float]:
    """(alpha at the minimum of E_{m+1} - E_m, minimal gap) for fixed N.

    The grid locates the minimum, which is then refined by bounded Brent search.
    ``gap_fn(params, m)`` defaults to the semiclassical levels.
    """
    gap_fn = gap_fn or _ebk_gap
    grid = np.asarray(alpha_grid, dtype=float)

    def gap(a):
        return gap_fn(ModelParams.from_alpha(n_particles, a), m)

    vals = np.array([gap(a) for a in grid])
    i = int(np.argmin(vals))
    if i == 0 or i == grid.size - 1:
        raise ValueError(f"gap minimum for N={n_particles} sits on the edge of the alpha grid")
    res = optimize.minimize_scalar(gap, bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                                   options={"xatol": 1e-10})
    return float(res.x), float(res.fun)


@dataclass(frozen=True)
class GapScaling:
    n: np.ndarray
    alpha_min: np.ndarray
    e_gap: np.ndarray
    exponent_alpha: float
    exponent_e: float
    stderr_alpha: float
    stderr_e: float
    r_squared_alpha: float
    r_squared_e: float

    def confidence_interval(self, which: str = "alpha", level: float = 0.95) -> tuple[float, float]:
        dof = self.n.size - 2
        if dof < 1:
            return (float("nan"), float("nan"))
        t = stats.t.ppf(0.5 + level / 2.0, dof)
        est, se = ((self.exponent_alpha, self.stderr_alpha) if which == "alpha"
                   else (self.exponent_e, self.stderr_e))
        return est - t * se, est + t * se


def gap_scaling_fit(alpha_grid, n_grid, *, gap_fn=None) -> GapScaling:
    """Log-log slopes of (alpha_min - 1) and E_gap against N."""
    n = np.asarray(n_grid, dtype=float)
    if n.size < 2 or n.max() / n.min() < 100.0:
        raise ValueError("the N grid must span at least two decades")
    rows = [minimal_gap(int(nn), alpha_grid, gap_fn=gap_fn) for nn in n]
    a_min = np.array([r[0] for r in rows])
    e_gap = np.array([r[1] for r in rows])
    if np.any(a_min <= 1.0):
        raise ValueError("gap minimum not above alpha = 1; cannot fit a power law")
    fa = stats.linregress(np.log(n), np.log(a_min - 1.0))
    fe = stats.linregress(np.log(n), np.log(e_gap))
    return GapScaling(n, a_min, e_gap, float(fa.slope), float(fe.slope), float(fa.stderr),
                      float(fe.stderr), float(fa.rvalue ** 2), float(fe.rvalue ** 2))
