"""Structured eigensolvers and Krylov propagation.

Tridiagonal matrices are given as ``(d, e)``: diagonal and first
off-diagonal.  Sturm counts are vectorised over many shifts at once, so a
bisection sweep refines every requested eigenvalue in a single pass over
the matrix.
"""
from __future__ import annotations

import numpy as np
from scipy import linalg as sla

__all__ = [
    "ConvergenceError",
    "PropagationError",
    "sturm_count",
    "gershgorin_bounds",
    "bisect_eigenvalues",
    "window_eigenvalues",
    "inverse_iteration",
    "tridiagonal_matvec",
    "lanczos_eigsh",
    "krylov_expm",
]


class ConvergenceError(RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class PropagationError(RuntimeError):
    def __init__(self, message, error_estimate=float("nan")):
        super().__init__(f"{message} (error estimate {error_estimate:.3g})")
        self.error_estimate = error_estimate


def gershgorin_bounds(d, e) -> tuple[float, float]:
    d = np.asarray(d, dtype=float)
    r = np.zeros_like(d)
    ae = np.abs(np.asarray(e, dtype=float))
    r[:-1] += ae
    r[1:] += ae
    return float(np.min(d - r)), float(np.max(d + r))


def sturm_count(d, e, shifts):
    """Number of eigenvalues strictly below each shift.

    Uses the LDL^T pivot recurrence.  Tiny pivots are replaced by +pivmin,
    which amounts to evaluating at shift - 0: an eigenvalue equal to the
    shift is not counted, and there is no division by zero.
    """
    d = np.asarray(d, dtype=float)
    e2 = np.asarray(e, dtype=float) ** 2
    x = np.atleast_1d(np.asarray(shifts, dtype=float))
    scale = max(float(np.max(np.abs(d), initial=0.0)), float(np.max(e2, initial=0.0)) ** 0.5, 1.0)
    pivmin = np.finfo(float).tiny * max(1.0, float(np.max(e2, initial=0.0)))
    pivmin = max(pivmin, np.finfo(float).tiny * scale)
    q = d[0] - x
    q = np.where(np.abs(q) < pivmin, pivmin, q)
    count = (q < 0).astype(np.int64)
    for i in range(1, d.size):
        q = (d[i] - x) - e2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, pivmin, q)
        count += q < 0
    return count if np.ndim(shifts) else int(count[0])


def bisect_eigenvalues(d, e, indices, *, bounds=None, tol: float | None = None,
                       max_sweeps: int = 200):
    """Eigenvalues with the given ascending indices (0-based) by multisection bisection.

    ``bounds`` may supply an interval known to contain all requested
    eigenvalues, which saves the sweeps needed to shrink the Gershgorin interval.
    """
    idx = np.asarray(indices, dtype=np.int64)
    g_lo, g_hi = gershgorin_bounds(d, e)
    span = max(g_hi - g_lo, 1.0)
    if tol is None:
        tol = 4.0 * np.finfo(float).eps * max(abs(g_lo), abs(g_hi), 1.0)
    lo_b, hi_b = (g_lo - 1e-12 * span, g_hi + 1e-12 * span) if bounds is None else bounds
    lo = np.full(idx.size, lo_b)
    hi = np.full(idx.size, hi_b)
    for _ in range(max_sweeps):
        active = (hi - lo) > tol
        if not np.any(active):
            break
        mid = 0.5 * (lo + hi)
        cnt = sturm_count(d, e, mid[active])
        # eigenvalue number idx lies below mid iff more than idx eigenvalues are below mid
        below = cnt > idx[active]
        a_idx = np.flatnonzero(active)
        hi[a_idx[below]] = mid[active][below]
        lo[a_idx[~below]] = mid[active][~below]
    else:
        raise ConvergenceError("bisection did not converge")
    return 0.5 * (lo + hi)


def window_eigenvalues(d, e, lo: float, hi: float, **kw) -> np.ndarray:
    """All eigenvalues in the half-open window [lo, hi)."""
    n_lo, n_hi = sturm_count(d, e, [lo, hi])
    if n_hi <= n_lo:
        return np.zeros(0)
    return bisect_eigenvalues(d, e, np.arange(n_lo, n_hi), **kw)


def tridiagonal_matvec(d, e, v):
    v = np.asarray(v)
    out = d * v if v.ndim == 1 else d[:, None] * v
    if v.ndim == 1:
        out[:-1] += e * v[1:]
        out[1:] += e * v[:-1]
    else:
        out[:-1] += e[:, None] * v[1:]
        out[1:] += e[:, None] * v[:-1]
    return out


def inverse_iteration(d, e, eigenvalues, *, iterations: int = 3, seed: int = 0):
    """Eigenvectors for known eigenvalues of a symmetric tridiagonal matrix.

    Vectors belonging to eigenvalues closer than 1e-3 * ||T|| are
    re-orthogonalised against each other.
    """
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    n = d.size
    lam = np.asarray(eigenvalues, dtype=float)
    lo_b, hi_b = gershgorin_bounds(d, e)
    norm = max(abs(lo_b), abs(hi_b), 1.0)
    eps = np.finfo(float).eps
    rng = np.random.default_rng(seed)
    ab = np.zeros((3, n))
    ab[0, 1:] = e
    ab[2, :-1] = e
    vecs = np.empty((n, lam.size))
    cluster_start = 0
    for j, lj in enumerate(lam):
        if j > 0 and lj - lam[j - 1] > 1e-3 * norm:
            cluster_start = j
        shift = lj + 10.0 * eps * norm
        ab[1] = d - shift
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        for _ in range(iterations):
            x = sla.solve_banded((1, 1), ab, x, check_finite=False)
            if j > cluster_start:
                prev = vecs[:, cluster_start:j]
                x -= prev @ (prev.T @ x)
            x /= np.linalg.norm(x)
        # fix the sign convention: largest component positive
        k = int(np.argmax(np.abs(x)))
        vecs[:, j] = x if x[k] >= 0 else -x
    return vecs


def lanczos_eigsh(matvec, n: int, k: int, *, which: str = "smallest", v0=None,
                  basis_size: int | None = None, tol: float = 1e-10, max_restarts: int = 200,
                  seed: int = 0):
    """Lanczos with full reorthogonalisation, restarts and locking.

    ``which`` is "smallest", "largest" or "magnitude" (largest |theta|; use with
    a shift-invert operator).  Returns ``(theta, vectors, residual_estimates)``.
    Converged Ritz pairs are locked and later Krylov vectors are kept
    orthogonal to them.
    """
    if k > n:
        raise ValueError("k exceeds the dimension")
    m = basis_size or min(n, max(2 * k + 20, 40))
    rng = np.random.default_rng(seed)
    locked_vecs = np.zeros((n, 0))
    locked_vals = []
    locked_res = []
    start = np.asarray(v0, dtype=float) if v0 is not None else rng.standard_normal(n)

    def order(theta):
        if which == "smallest":
            return np.argsort(theta)
        if which == "largest":
            return np.argsort(-theta)
        if which == "magnitude":
            return np.argsort(-np.abs(theta))
        raise ValueError(f"unknown selection {which!r}")

    for _ in range(max_restarts):
        need = k - len(locked_vals)
        if need <= 0:
            break
        m_eff = min(m, n - locked_vecs.shape[1])
        V = np.zeros((n, m_eff + 1))
        alpha = np.zeros(m_eff)
        beta = np.zeros(m_eff)
        v = start - locked_vecs @ (locked_vecs.T @ start)
        nv = np.linalg.norm(v)
        if nv < 1e-12:
            v = rng.standard_normal(n)
            v -= locked_vecs @ (locked_vecs.T @ v)
            nv = np.linalg.norm(v)
        V[:, 0] = v / nv
        steps = m_eff
        for j in range(m_eff):
            w = matvec(V[:, j])
            alpha[j] = V[:, j] @ w
            # two passes of classical Gram-Schmidt against basis and locked vectors
            for _pass in range(2):
                w -= V[:, : j + 1] @ (V[:, : j + 1].T @ w)
                if locked_vecs.shape[1]:
                    w -= locked_vecs @ (locked_vecs.T @ w)
            beta[j] = np.linalg.norm(w)
            if beta[j] < 1e-13 * max(1.0, abs(alpha[j])):
                steps = j + 1
                break
            V[:, j + 1] = w / beta[j]
        T_d, T_e = alpha[:steps], beta[: steps - 1]
        theta, S = sla.eigh_tridiagonal(T_d, T_e)
        res = np.abs(beta[steps - 1] * S[-1, :])
        if steps < m_eff:  # invariant subspace
            res[:] = 0.0
        ordr = order(theta)
        wanted = ordr[:need]
        scale = max(1.0, float(np.max(np.abs(theta))))
        if which == "magnitude":
            # shift-invert: each pair needs relative accuracy in its own theta
            conv = [i for i in wanted if res[i] <= tol * abs(theta[i])]
        else:
            conv = [i for i in wanted if res[i] <= tol * scale]
        # lock a prefix of the wanted list so that ordering stays valid
        prefix = []
        for i in wanted:
            if i in conv:
                prefix.append(i)
            else:
                break
        if prefix:
            X = V[:, :steps] @ S[:, prefix]
            X -= locked_vecs @ (locked_vecs.T @ X)
            X, _ = np.linalg.qr(X)
            locked_vecs = np.hstack([locked_vecs, X])
            locked_vals.extend(theta[prefix].tolist())
            locked_res.extend(res[prefix].tolist())
        rest = [i for i in wanted if i not in prefix]
        if rest:
            start = V[:, :steps] @ S[:, rest].sum(axis=1)
        else:
            start = rng.standard_normal(n)
    else:
        raise ConvergenceError(f"Lanczos locked {len(locked_vals)} of {k} pairs",
                               residuals=np.array(locked_res))
    vals = np.array(locked_vals[:k])
    vecs = locked_vecs[:, :k]
    srt = order(vals)
    return vals[srt], vecs[:, srt], np.array(locked_res[:k])[srt]


def krylov_expm(matvec, v, t: float, *, norm_estimate: float, krylov_dim: int = 30,
                tol: float = 1e-12, min_step: float | None = None):
    """exp(-i H t) v for real-symmetric H given through ``matvec``.

    The interval is covered by Lanczos steps; each step is accepted when
    beta_m * |last entry of exp(-i T dt) e_1| is below ``tol * dt / t``.
    """
    w = np.asarray(v, dtype=complex).copy()
    if t == 0.0:
        return w
    total = abs(t)
    sgn = 1.0 if t > 0 else -1.0
    nrm_v = np.linalg.norm(w)
    if nrm_v == 0.0:
        return w
    dt = min(total, 10.0 / max(norm_estimate, 1e-300))
    min_step = min_step or total * 1e-9
    done = 0.0
    n = w.size
    m_max = min(krylov_dim, n)
    while done < total:
        dt = min(dt, total - done)
        beta0 = np.linalg.norm(w)
        V = np.zeros((n, m_max + 1), dtype=complex)
        a = np.zeros(m_max)
        b = np.zeros(m_max)
        V[:, 0] = w / beta0
        m = m_max
        happy = False
        for j in range(m_max):
            x = matvec(V[:, j])
            a[j] = np.real(np.vdot(V[:, j], x))
            x -= V[:, : j + 1] @ (V[:, : j + 1].conj().T @ x)
            x -= V[:, : j + 1] @ (V[:, : j + 1].conj().T @ x)
            b[j] = np.linalg.norm(x)
            if b[j] < 1e-14 * max(1.0, abs(a[j])):
                m = j + 1
                happy = True
                break
            V[:, j + 1] = x / b[j]
        theta, S = sla.eigh_tridiagonal(a[:m], b[: m - 1])
        while True:
            coeff = S @ (np.exp(-1j * sgn * theta * dt) * S[0, :])
            err = 0.0 if happy else b[m - 1] * abs(coeff[-1]) * beta0 / nrm_v
            if err <= tol * dt / total:
                break
            dt *= 0.5
            if dt < min_step:
                raise PropagationError("Krylov step size underflow", err)
        w = beta0 * (V[:, :m] @ coeff)
        done += dt
        if err < 0.1 * tol * dt / total:
            dt *= 1.5
    return w
