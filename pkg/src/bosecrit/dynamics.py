"""Quench dynamics, the commutator-norm OTOC and its fits.

The correlator of the zero-mode occupation is evaluated as

    C(t) = || [n0, n0(t)] psi ||**2 / N**4,   n0(t) = U(t)^+ n0 U(t),

which equals -<[n0, n0(t)]**2> / N**4 because the commutator of two
Hermitian operators is anti-Hermitian.  ``[n0, n0(t)] psi`` is formed as
``n0 U^+ n0 U psi - U^+ n0 U n0 psi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal, stats

from . import linalg as la
from .classical import separatrix_energy, stability_exponent
from .model import FockBasis, ModelParams
from .quantum import (DENSE_LIMIT, EigenDecomposition, SparseHamiltonian, SpectralRequest,
                      diagonalize)

__all__ = [
    "QuenchState",
    "OtocSeries",
    "GrowthFit",
    "RevivalFit",
    "LeakageError",
    "quench_state",
    "evolve",
    "spectral_decomposition",
    "otoc_series",
    "one_body_entropy",
    "one_body_density_matrix",
    "fit_growth_rate",
    "fit_revival_period",
    "level_spacing_near",
    "separatrix_spacing",
    "ehrenfest_time",
]

# complex entries held per time chunk of the spectral path
_CHUNK_ELEMENTS = 8_000_000


class LeakageError(RuntimeError):
    """A windowed decomposition misses too much of the initial state."""


@dataclass(frozen=True, eq=False)
class QuenchState:
    basis: FockBasis
    amplitudes: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        nrm = np.linalg.norm(self.amplitudes)
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"state norm {nrm} != 1")


def quench_state(basis: FockBasis) -> QuenchState:
    """All particles in the k = 0 mode."""
    if basis.total_momentum != 0:
        raise ValueError("the condensate lives in the K = 0 sector")
    occ = np.zeros(2 * basis.mode_cutoff + 1, dtype=np.int64)
    occ[basis.mode_cutoff] = basis.n_particles
    amp = np.zeros(basis.dimension)
    amp[basis.index_of(occ)] = 1.0
    return QuenchState(basis, amp, f"condensate N={basis.n_particles}")


def ehrenfest_time(params: ModelParams) -> float:
    """log(n_tilde) / lambda_s."""
    lam_s = stability_exponent(params.alpha)
    if lam_s == 0.0:
        raise ValueError("no instability for alpha <= 1")
    return math.log(params.n_tilde) / lam_s


def _covers(dec: EigenDecomposition, psi, leak_tol):
    c = dec.eigenvectors.T @ psi
    leak = max(1.0 - float(np.vdot(c, c).real), 0.0)
    if leak > leak_tol:
        raise LeakageError(f"decomposition misses weight {leak:.3g} of the state")
    return c, leak


def evolve(state: QuenchState, target, t: float, *, tol: float = 1e-12, leak_tol: float = 1e-10):
    """exp(-i H t) psi.

    ``target`` is either an EigenDecomposition with vectors (spectral
    synthesis) or a SparseHamiltonian (Krylov stepping).
    """
    psi = state.amplitudes
    if isinstance(target, EigenDecomposition):
        if target.eigenvectors is None:
            raise ValueError("spectral propagation needs eigenvectors")
        c, _ = _covers(target, psi, leak_tol)
        return target.eigenvectors @ (np.exp(-1j * target.eigenvalues * t) * c)
    return la.krylov_expm(target.matvec_operator(), psi, t, norm_estimate=target.norm_bound(), tol=tol)


def spectral_decomposition(h: SparseHamiltonian, psi, *, leak_tol: float = 1e-12,
                           half_width: float | None = None) -> tuple[EigenDecomposition, float]:
    """Eigenpairs carrying all of ``psi`` up to ``leak_tol``.

    Small sectors are solved completely.  Large tridiagonal sectors use a
    Sturm window centred on <psi|H|psi>, doubled until the missing weight
    drops below ``leak_tol``.  Returns the decomposition and the leakage.
    """
    n = h.dimension
    if n <= (4000 if h.is_tridiagonal else DENSE_LIMIT):
        dec = diagonalize(h, SpectralRequest("all", vectors=True))
        c = dec.eigenvectors.T @ psi
        return dec, max(1.0 - float(c @ c), 0.0)
    if not h.is_tridiagonal:
        raise ValueError(f"sector dimension {n} too large for the spectral path; use krylov")
    e_mean = float(psi @ h.matvec(psi))
    spread = math.sqrt(max(float(np.linalg.norm(h.matvec(psi)) ** 2) - e_mean**2, 0.0))
    w = half_width or max(30.0, 20.0 * spread)
    lo_b, hi_b = h.gershgorin()
    while True:
        dec = diagonalize(h, SpectralRequest("window", vectors=True, window=(e_mean - w, e_mean + w)))
        c = dec.eigenvectors.T @ psi
        leak = max(1.0 - float(c @ c), 0.0)
        if leak <= leak_tol or (e_mean - w <= lo_b and e_mean + w >= hi_b):
            return dec, leak
        w *= 2.0


@dataclass(frozen=True, eq=False)
class OtocSeries:
    times: np.ndarray
    c_values: np.ndarray
    params: ModelParams
    entropy_values: np.ndarray | None = None
    method: str = "spectral"
    leakage: float = 0.0

    @property
    def ehrenfest_time(self) -> float:
        return ehrenfest_time(self.params)


def _spectral_otoc(dec, basis, psi, times, entropy):
    V = dec.eigenvectors
    E = dec.eigenvalues
    n0 = basis.number_operator(0)
    N = basis.n_particles
    M = V.T @ (n0[:, None] * V)
    c1 = V.T @ psi
    c2 = V.T @ (n0 * psi)
    occ = basis.occupations.astype(float)
    out = np.empty(times.size)
    ent = np.empty(times.size) if entropy else None
    per = max(1, _CHUNK_ELEMENTS // max(V.shape[0], 1))
    for s in range(0, times.size, per):
        ts = times[s:s + per]
        ph = np.exp(-1j * np.outer(E, ts))
        # n0(t) applied to psi and to n0 psi, back in the Fock basis
        y1 = V @ (np.conj(ph) * (M @ (c1[:, None] * ph)))
        y2 = V @ (np.conj(ph) * (M @ (c2[:, None] * ph)))
        comm = n0[:, None] * y1 - y2
        out[s:s + per] = np.sum(np.abs(comm) ** 2, axis=0) / float(N) ** 4
        if entropy:
            amp = V @ (c1[:, None] * ph)
            probs = np.abs(amp) ** 2
            ent[s:s + per] = [_entropy_from_occupations(probs[:, j] @ occ, N) for j in range(ts.size)]
    return out, ent


def _krylov_otoc(h, basis, psi, times, entropy, tol):
    """Sequential forward stepping; each time point needs two backward propagations."""
    op = h.matvec_operator()
    nb = h.norm_bound()
    n0 = basis.number_operator(0)
    N = basis.n_particles
    occ = basis.occupations.astype(float)
    w1 = psi.astype(complex)
    w2 = (n0 * psi).astype(complex)
    out = np.empty(times.size)
    ent = np.empty(times.size) if entropy else None
    t_prev = 0.0
    for j, t in enumerate(times):
        w1 = la.krylov_expm(op, w1, t - t_prev, norm_estimate=nb, tol=tol)
        w2 = la.krylov_expm(op, w2, t - t_prev, norm_estimate=nb, tol=tol)
        t_prev = t
        y1 = la.krylov_expm(op, n0 * w1, -t, norm_estimate=nb, tol=tol)
        y2 = la.krylov_expm(op, n0 * w2, -t, norm_estimate=nb, tol=tol)
        out[j] = np.sum(np.abs(n0 * y1 - y2) ** 2) / float(N) ** 4
        if entropy:
            ent[j] = _entropy_from_occupations(np.abs(w1) ** 2 @ occ, N)
    return out, ent


def otoc_series(params: ModelParams, basis: FockBasis, h: SparseHamiltonian, times, *,
                method: str = "auto", decomposition: EigenDecomposition | None = None,
                entropy: bool = False, leak_tol: float = 1e-10, tol: float = 1e-12) -> OtocSeries:
    """C(t) after the condensate quench on a uniform (or any ascending) time grid.

    ``method`` is "spectral", "krylov" or "auto" (spectral when a
    decomposition is given or can be afforded).
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("times must be a non-empty ascending grid starting at t >= 0")
    psi = quench_state(basis).amplitudes
    if method == "auto":
        affordable = h.is_tridiagonal or h.dimension <= DENSE_LIMIT
        method = "spectral" if decomposition is not None or affordable else "krylov"
    leak = 0.0
    if method == "spectral":
        if decomposition is None:
            decomposition, leak = spectral_decomposition(h, psi, leak_tol=leak_tol)
        else:
            _, leak = _covers(decomposition, psi, leak_tol)
        if leak > leak_tol:
            raise LeakageError(f"spectral window misses weight {leak:.3g}")
        c, s = _spectral_otoc(decomposition, basis, psi, times, entropy)
    elif method == "krylov":
        c, s = _krylov_otoc(h, basis, psi, times, entropy, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    c = np.maximum(c, 0.0)
    if times[0] == 0.0:
        c[0] = 0.0
    return OtocSeries(times, c, params, s, method, leak)


def _entropy_from_occupations(mean_occ, n_particles):
    p = np.asarray(mean_occ, dtype=float) / n_particles
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def one_body_density_matrix(amplitudes, basis: FockBasis) -> np.ndarray:
    """rho_jk = <a+_j a_k> / N over the modes.

    A state inside one (N, K) sector has vanishing coherences between
    different modes, since a+_j a_k shifts K by j - k.  The matrix is
    therefore diagonal with the mean occupations.
    """
    probs = np.abs(np.asarray(amplitudes)) ** 2
    return np.diag(probs @ basis.occupations.astype(float)) / basis.n_particles


def one_body_entropy(amplitudes, basis: FockBasis) -> float:
    """von Neumann entropy of the one-body density matrix."""
    lam = np.linalg.eigvalsh(one_body_density_matrix(amplitudes, basis))
    lam = lam[lam > 1e-300]
    return float(max(-np.sum(lam * np.log(lam)), 0.0))


@dataclass(frozen=True)
class GrowthFit:
    rate: float
    r_squared: float
    window: tuple[float, float]


def fit_growth_rate(series: OtocSeries, window: tuple[float, float] | None = None) -> GrowthFit:
    """Least-squares slope of log C over ``window`` (default 0.3 to 0.7 Ehrenfest times)."""
    if window is None:
        te = series.ehrenfest_time
        window = (0.3 * te, 0.7 * te)
    t0, t1 = window
    sel = (series.times >= t0) & (series.times <= t1)
    if np.count_nonzero(sel) < 3:
        raise ValueError("fewer than three samples in the fit window")
    c = series.c_values[sel]
    if np.any(c <= 0):
        raise ValueError("non-positive C(t) inside the fit window")
    res = stats.linregress(series.times[sel], np.log(c))
    return GrowthFit(float(res.slope), float(res.rvalue**2), (float(t0), float(t1)))


@dataclass(frozen=True)
class RevivalFit:
    period: float
    peak_times: np.ndarray
    fft_period: float
    start: float


def fit_revival_period(series: OtocSeries, *, smoothing: int = 3, threshold: float = 0.05,
                       start: float | None = None) -> RevivalFit:
    """Revival period from peak spacing after ``start`` (default: one Ehrenfest time).

    C(t) is smoothed by a centred moving average over ``smoothing`` samples;
    peaks are local maxima above ``threshold`` times the series maximum.
    ``fft_period`` is the dominant period of the Hann-windowed, linearly
    detrended series after ``start``.
    """
    if smoothing < 1 or not 0 <= threshold < 1:
        raise ValueError("smoothing must be >= 1 and threshold in [0, 1)")
    t, c = series.times, series.c_values
    if start is None:
        try:
            start = series.ehrenfest_time
        except ValueError:
            start = 0.0
    sm = np.convolve(c, np.ones(smoothing) / smoothing, mode="same") if smoothing > 1 else c
    peaks, _ = signal.find_peaks(sm, height=threshold * float(np.max(c)))
    peaks = peaks[t[peaks] > start]
    if peaks.size < 2:
        raise ValueError(f"only {peaks.size} peaks after t = {start:.3g}")
    pt = t[peaks]
    period = float(np.mean(np.diff(pt)))
    tail = c[t > start]
    dt = float(np.mean(np.diff(t)))
    x = signal.detrend(tail) * np.hanning(tail.size)
    power = np.abs(np.fft.rfft(x)) ** 2
    freq = np.fft.rfftfreq(tail.size, dt)
    k = int(np.argmax(power[1:])) + 1
    return RevivalFit(period, pt, float(1.0 / freq[k]), float(start))


def level_spacing_near(eigenvalues, energy: float, n_levels: int) -> float:
    """Mean spacing of the ``n_levels`` eigenvalues closest to ``energy``."""
    ev = np.sort(np.asarray(eigenvalues, dtype=float))
    if n_levels < 2 or ev.size < n_levels:
        raise ValueError("need at least two levels")
    near = np.sort(ev[np.argsort(np.abs(ev - energy), kind="stable")[:n_levels]])
    return float((near[-1] - near[0]) / (n_levels - 1))


def separatrix_spacing(h: SparseHamiltonian, n_levels: int | None = None) -> float:
    """Mean exact spacing of the ~log(n_tilde) levels nearest E_sep (tridiagonal sectors)."""
    p = h.params
    e_sep = separatrix_energy(p)[1]
    n_levels = n_levels or max(2, round(math.log(p.n_tilde)))
    dec = diagonalize(h, SpectralRequest("nearest", target=e_sep, k=n_levels))
    return level_spacing_near(dec.eigenvalues, e_sep, n_levels)
