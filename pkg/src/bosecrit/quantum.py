"""Second-quantized Hamiltonian in a conserved (N, K) sector and its spectrum.

Inserting the truncated field psi(theta) = sum_k a_k exp(i k theta) / sqrt(2 pi)
into the contact interaction -(pi alpha~ / 2) int dtheta psi^+ psi^+ psi psi
turns the angular integral into 2 pi delta(k1 + k2 - k3 - k4) / (2 pi)**2, so

    H = sum_k k**2 n_k - (alpha~ / 4) sum_{k1 + k2 = k3 + k4} a+_k1 a+_k2 a_k3 a_k4

with the sum over all ordered momentum-conserving quartets inside the cutoff.
The operator is kept normal ordered; no symmetric-ordering constants appear
here.

Storage is the lower triangle (row >= col).  Tridiagonal sectors (three
modes) keep only the diagonal and first off-diagonal.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg as sla
from scipy import sparse
from scipy.sparse import linalg as spla

from . import linalg as la
from .model import FockBasis, ModelParams

__all__ = [
    "Structure",
    "SparseHamiltonian",
    "SpectralRequest",
    "EigenDecomposition",
    "momentum_quartets",
    "build_hamiltonian",
    "diagonalize",
    "sturm_count",
    "parity_permutation",
    "write_matrix",
    "DENSE_LIMIT",
]

# general-sparse sectors up to this dimension are diagonalized densely when all pairs are requested
DENSE_LIMIT = 6000


class Structure(enum.Enum):
    TRIDIAGONAL = "tridiagonal"
    GENERAL_SPARSE = "general_sparse"


@dataclass(frozen=True, eq=False)
class SparseHamiltonian:
    """Real-symmetric sector Hamiltonian.

    For ``Structure.TRIDIAGONAL`` only ``diagonal`` and ``off_diagonal`` are
    stored; otherwise ``rows``, ``cols``, ``values`` hold the lower triangle
    (including the diagonal) in canonical sorted COO order.
    """

    basis: FockBasis
    params: ModelParams
    structure: Structure
    diagonal: np.ndarray = field(repr=False)
    off_diagonal: np.ndarray | None = field(default=None, repr=False)
    rows: np.ndarray | None = field(default=None, repr=False)
    cols: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.diagonal.size

    @property
    def is_tridiagonal(self) -> bool:
        return self.structure is Structure.TRIDIAGONAL

    def lower_triangle(self):
        """(rows, cols, values) of the stored lower triangle, diagonal included."""
        if self.is_tridiagonal:
            n = self.dimension
            i = np.arange(n)
            rows = np.concatenate([i, i[1:]])
            cols = np.concatenate([i, i[:-1]])
            vals = np.concatenate([self.diagonal, self.off_diagonal])
            keep = (vals != 0.0) | (rows == cols)
            return rows[keep], cols[keep], vals[keep]
        return self.rows, self.cols, self.values

    def to_scipy(self) -> sparse.csr_matrix:
        r, c, v = self.lower_triangle()
        off = r != c
        n = self.dimension
        full = sparse.coo_matrix(
            (np.concatenate([v, v[off]]), (np.concatenate([r, c[off]]), np.concatenate([c, r[off]]))),
            shape=(n, n),
        )
        return full.tocsr()

    def to_dense(self) -> np.ndarray:
        if self.is_tridiagonal:
            n = self.dimension
            h = np.diag(self.diagonal)
            if n > 1:
                h[np.arange(1, n), np.arange(n - 1)] = self.off_diagonal
                h[np.arange(n - 1), np.arange(1, n)] = self.off_diagonal
            return h
        return self.to_scipy().toarray()

    def matvec_operator(self):
        """Callable v -> H v (vectors or column blocks, real or complex)."""
        if self.is_tridiagonal:
            d, e = self.diagonal, self.off_diagonal
            return lambda v: la.tridiagonal_matvec(d, e, v)
        m = self.to_scipy()
        return lambda v: m @ v

    def matvec(self, v):
        return self.matvec_operator()(v)

    def norm_bound(self) -> float:
        """Gershgorin bound on the spectral radius."""
        if self.is_tridiagonal:
            lo, hi = la.gershgorin_bounds(self.diagonal, self.off_diagonal)
        else:
            m = self.to_scipy()
            radius = np.asarray(abs(m).sum(axis=1)).ravel() - np.abs(self.diagonal)
            lo, hi = float(np.min(self.diagonal - radius)), float(np.max(self.diagonal + radius))
        return max(abs(lo), abs(hi))

    def gershgorin(self) -> tuple[float, float]:
        if self.is_tridiagonal:
            return la.gershgorin_bounds(self.diagonal, self.off_diagonal)
        m = self.to_scipy()
        radius = np.asarray(abs(m).sum(axis=1)).ravel() - np.abs(self.diagonal)
        return float(np.min(self.diagonal - radius)), float(np.max(self.diagonal + radius))


def momentum_quartets(mode_cutoff: int) -> list[tuple[int, int, int, int]]:
    """All ordered (k1, k2, k3, k4) inside the cutoff with k1 + k2 = k3 + k4."""
    ks = range(-mode_cutoff, mode_cutoff + 1)
    return [q for q in itertools.product(ks, repeat=4) if q[0] + q[1] == q[2] + q[3]]


def _interaction_entries(basis: FockBasis, coupling: float):
    """Every nonzero (row, col, value) of the interaction, both triangles, unsummed."""
    occ0 = basis.occupations.astype(np.int64)
    kmax = basis.mode_cutoff
    src = np.arange(basis.dimension)
    rows, cols, vals = [], [], []
    for k1, k2, k3, k4 in momentum_quartets(kmax):
        j1, j2, j3, j4 = k1 + kmax, k2 + kmax, k3 + kmax, k4 + kmax
        occ = occ0.copy()
        amp = np.sqrt(occ[:, j4].astype(float))
        occ[:, j4] -= 1
        amp *= np.sqrt(np.maximum(occ[:, j3], 0).astype(float))
        occ[:, j3] -= 1
        alive = amp > 0.0
        if not np.any(alive):
            continue
        occ, amp, s = occ[alive], amp[alive], src[alive]
        occ[:, j2] += 1
        amp *= np.sqrt(occ[:, j2].astype(float))
        occ[:, j1] += 1
        amp *= np.sqrt(occ[:, j1].astype(float))
        tgt = basis.indices_of(occ)
        if np.any(tgt < 0):
            bad = occ[np.flatnonzero(tgt < 0)[0]]
            raise AssertionError(f"quartet {(k1, k2, k3, k4)} left the sector: {tuple(bad)}")
        rows.append(tgt)
        cols.append(s)
        vals.append(-0.25 * coupling * amp)
    if not rows:
        z = np.zeros(0, dtype=np.int64)
        return z, z, np.zeros(0)
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def build_hamiltonian(basis: FockBasis, params: ModelParams) -> SparseHamiltonian:
    if (basis.n_particles, basis.mode_cutoff) != (params.n_particles, params.mode_cutoff):
        raise ValueError("basis does not belong to these parameters")
    n = basis.dimension
    kinetic = basis.occupations.astype(float) @ (basis.momenta.astype(float) ** 2)
    r, c, v = _interaction_entries(basis, params.coupling_bare)
    low = r >= c
    r, c, v = r[low], c[low], v[low]
    r = np.concatenate([np.arange(n), r])
    c = np.concatenate([np.arange(n), c])
    v = np.concatenate([kinetic, v])
    m = sparse.coo_matrix((v, (r, c)), shape=(n, n)).tocsr()
    m.sum_duplicates()
    m.sort_indices()
    coo = m.tocoo()
    rows, cols, vals = coo.row.astype(np.int64), coo.col.astype(np.int64), coo.data
    diag = np.asarray(m.diagonal(), dtype=float)
    off = rows != cols
    tri = n == 1 or (np.all(rows[off] - cols[off] == 1) if np.any(off) else True)
    if tri:
        e = np.zeros(max(n - 1, 0))
        e[cols[off]] = vals[off]
        return SparseHamiltonian(basis, params, Structure.TRIDIAGONAL, diag, e)
    return SparseHamiltonian(basis, params, Structure.GENERAL_SPARSE, diag, None, rows, cols, vals)


def parity_permutation(basis: FockBasis) -> np.ndarray:
    """Index map of the reflection k -> -k; requires K = 0."""
    if basis.total_momentum != 0:
        raise ValueError("the reflection maps K to -K; use the K = 0 sector")
    idx = basis.indices_of(basis.occupations[:, ::-1])
    assert np.all(idx >= 0)
    return idx


def sturm_count(h: SparseHamiltonian, energy) -> int | np.ndarray:
    """Number of eigenvalues strictly below ``energy`` (scalar or array)."""
    if not h.is_tridiagonal:
        raise ValueError("Sturm counts need a tridiagonal Hamiltonian")
    return la.sturm_count(h.diagonal, h.off_diagonal, energy)


@dataclass(frozen=True)
class SpectralRequest:
    """What to compute.

    kind: "all", "window" (eigenvalues in [window[0], window[1])),
    "lowest" (``k`` smallest) or "nearest" (``k`` closest to ``target``).
    """

    kind: str = "all"
    vectors: bool = False
    window: tuple[float, float] | None = None
    k: int = 6
    target: float | None = None
    tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("all", "window", "lowest", "nearest"):
            raise ValueError(f"unknown request kind {self.kind!r}")
        if self.kind == "window" and (self.window is None or self.window[0] >= self.window[1]):
            raise ValueError("window requests need lo < hi")
        if self.kind == "nearest" and self.target is None:
            raise ValueError("nearest requests need a target")
        if self.kind in ("lowest", "nearest") and self.k < 1:
            raise ValueError("k must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues, optional eigenvector columns and their residual norms.

    ``residual_norms`` is None when no vectors were computed.  ``first_index``
    is the ascending position of ``eigenvalues[0]`` in the whole spectrum
    when known (Sturm paths), otherwise -1.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    residual_norms: np.ndarray | None = None
    first_index: int = -1

    def __len__(self):
        return self.eigenvalues.size

    @property
    def excitation(self) -> np.ndarray:
        return self.eigenvalues - self.eigenvalues[0]


def _residuals(h: SparseHamiltonian, vals, vecs) -> np.ndarray:
    hv = h.matvec(vecs)
    return np.linalg.norm(hv - vecs * vals[None, :], axis=0)


def _finish(h, vals, vecs, request, first_index=-1):
    order = np.argsort(vals, kind="stable")
    vals = np.asarray(vals)[order]
    if vecs is None:
        return EigenDecomposition(vals, None, None, first_index)
    vecs = vecs[:, order]
    res = _residuals(h, vals, vecs)
    limit = max(request.tol, 1e-8) * max(h.norm_bound(), 1.0)
    if np.any(res > limit):
        raise la.ConvergenceError(
            f"{int(np.sum(res > limit))} eigenpairs above residual limit {limit:.3g}", residuals=res)
    return EigenDecomposition(vals, vecs, res, first_index)


def _tridiagonal(h: SparseHamiltonian, req: SpectralRequest) -> EigenDecomposition:
    d, e = h.diagonal, h.off_diagonal
    n = h.dimension
    if req.kind == "all":
        if req.vectors:
            vals, vecs = sla.eigh_tridiagonal(d, e)
            return _finish(h, vals, vecs, req, 0)
        return EigenDecomposition(sla.eigvalsh_tridiagonal(d, e), None, None, 0)
    if req.kind == "window":
        lo, hi = req.window
        n_lo, n_hi = la.sturm_count(d, e, [lo, hi])
        idx = np.arange(n_lo, n_hi)
        bounds = (lo, hi)
    elif req.kind == "lowest":
        idx = np.arange(min(req.k, n))
        bounds = None
    else:
        c = la.sturm_count(d, e, req.target)
        idx = np.arange(max(c - req.k, 0), min(c + req.k, n))
        bounds = None
    if idx.size == 0:
        empty = np.zeros((n, 0)) if req.vectors else None
        return EigenDecomposition(np.zeros(0), empty, np.zeros(0) if req.vectors else None, -1)
    decoupled = not np.any(e)
    if decoupled:
        # free spectrum: eigenpairs are the sorted diagonal and unit vectors, exactly
        order = np.argsort(d, kind="stable")
        vals = d[order][idx]
    else:
        vals = la.bisect_eigenvalues(d, e, idx, bounds=bounds)
    if req.kind == "nearest":
        keep = np.sort(np.argsort(np.abs(vals - req.target), kind="stable")[: req.k])
        vals, idx = vals[keep], idx[keep]
    if not req.vectors:
        vecs = None
    elif decoupled:
        vecs = np.eye(n)[:, order[idx]]
    else:
        vecs = la.inverse_iteration(d, e, vals, seed=req.seed)
    return _finish(h, vals, vecs, req, int(idx[0]))


def _shift_invert(h: SparseHamiltonian, sigma: float, k: int, req: SpectralRequest):
    m = h.to_scipy().tocsc()
    eye = sparse.identity(h.dimension, format="csc")
    step = 1e-6 * max(h.norm_bound(), 1.0)
    shift = sigma
    # move the shift off (near-)eigenvalues, where the factorization is useless
    for _ in range(8):
        try:
            lu = spla.splu((m - shift * eye).tocsc())
        except RuntimeError:
            lu = None
        if lu is not None:
            u = np.abs(lu.U.diagonal())
            if u.min() > 1e-10 * u.max():
                break
        shift += step
        step *= 3.0
    else:
        raise la.ConvergenceError("shift-invert factorization failed")
    _, vecs, _ = la.lanczos_eigsh(lu.solve, h.dimension, k, which="magnitude", tol=req.tol,
                                  seed=req.seed)
    # Rayleigh-Ritz in H itself on the converged subspace
    small = vecs.T @ (m @ vecs)
    vals, rot = np.linalg.eigh(0.5 * (small + small.T))
    return vals, vecs @ rot


def _general(h: SparseHamiltonian, req: SpectralRequest) -> EigenDecomposition:
    n = h.dimension
    if req.kind == "all":
        if n > DENSE_LIMIT:
            raise ValueError(f"dimension {n} too large for a full dense solve; request a window")
        if req.vectors:
            vals, vecs = np.linalg.eigh(h.to_dense())
            return _finish(h, vals, vecs, req, 0)
        return EigenDecomposition(np.linalg.eigvalsh(h.to_dense()), None, None, 0)
    if n <= 64:
        # tiny sectors: Krylov machinery gains nothing
        vals, vecs = np.linalg.eigh(h.to_dense())
        if req.kind == "window":
            sel = (vals >= req.window[0]) & (vals < req.window[1])
        elif req.kind == "lowest":
            sel = np.arange(n) < req.k
        else:
            sel = np.zeros(n, dtype=bool)
            sel[np.argsort(np.abs(vals - req.target), kind="stable")[: req.k]] = True
        first = int(np.flatnonzero(sel)[0]) if np.any(sel) else -1
        return _finish(h, vals[sel], vecs[:, sel] if req.vectors else None, req, first)
    if req.kind == "lowest":
        k = min(req.k, n)
        op = h.matvec_operator()
        vals, vecs, _ = la.lanczos_eigsh(op, n, k, which="smallest", tol=req.tol, seed=req.seed)
    elif req.kind == "nearest":
        vals, vecs = _shift_invert(h, req.target, min(req.k, n), req)
    else:
        lo, hi = req.window
        centre, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        k = min(16, n)
        while True:
            vals, vecs = _shift_invert(h, centre, k, req)
            if np.max(np.abs(vals - centre)) > half or k == n:
                break
            k = min(2 * k, n)
        sel = (vals >= lo) & (vals < hi)
        vals, vecs = vals[sel], vecs[:, sel]
    return _finish(h, vals, vecs if req.vectors else None, req)


def diagonalize(h: SparseHamiltonian, request: SpectralRequest | None = None) -> EigenDecomposition:
    request = request or SpectralRequest()
    if h.is_tridiagonal:
        return _tridiagonal(h, request)
    return _general(h, request)


def write_matrix(h: SparseHamiltonian, path) -> Path:
    """Coordinate dump of the lower triangle: one ``row col value`` line per entry."""
    path = Path(path)
    r, c, v = h.lower_triangle()
    with path.open("w") as fh:
        fh.write(f"# dimension {h.dimension} structure {h.structure.value}\n")
        for i, j, x in zip(r.tolist(), c.tolist(), v.tolist()):
            fh.write(f"{i} {j} {x!r}\n")
    return path
