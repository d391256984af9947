"""Independent reference implementations used only by the tests.

The ladder oracle never touches the package's basis or quartet code: it
builds a_k on the full product space (cutoff N per mode) with Kronecker
products, writes the Hamiltonian literally as a sum of operator products and
projects onto a sector afterwards.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy import sparse
from scipy.linalg import expm


def ladder_operators(n_modes: int, cutoff: int):
    a1 = sparse.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1, format="csr")
    eye = sparse.identity(cutoff + 1, format="csr")
    ops = []
    for j in range(n_modes):
        op = sparse.identity(1, format="csr")
        for i in range(n_modes):
            op = sparse.kron(op, a1 if i == j else eye, format="csr")
        ops.append(op)
    return ops


def full_space_hamiltonian(mode_cutoff: int, n_particles: int, coupling: float):
    ks = list(range(-mode_cutoff, mode_cutoff + 1))
    a = ladder_operators(len(ks), n_particles)
    ad = [x.T.tocsr() for x in a]
    h = sum(k * k * (ad[i] @ a[i]) for i, k in enumerate(ks))
    for i1, i2, i3, i4 in itertools.product(range(len(ks)), repeat=4):
        if ks[i1] + ks[i2] == ks[i3] + ks[i4]:
            h = h - 0.25 * coupling * (ad[i1] @ ad[i2] @ a[i3] @ a[i4])
    return h.tocsr()


def sector_states(mode_cutoff: int, n_particles: int, total_momentum: int):
    ks = np.arange(-mode_cutoff, mode_cutoff + 1)
    states = [occ for occ in itertools.product(range(n_particles + 1), repeat=len(ks))
              if sum(occ) == n_particles and int(np.dot(occ, ks)) == total_momentum]
    return sorted(states)


def projected_hamiltonian(full, mode_cutoff, n_particles, states):
    dims = (n_particles + 1,) * (2 * mode_cutoff + 1)
    idx = [np.ravel_multi_index(s, dims) for s in states]
    return full[idx][:, idx].toarray()


def brute_force_otoc(h_dense, n0_diag, psi, times, n_particles):
    """-<[n0, n0(t)]^2>/N^4 from full matrices n0(t) = e^{iHt} n0 e^{-iHt}."""
    n0 = np.diag(n0_diag)
    out = []
    for t in times:
        u = expm(-1j * h_dense * t)
        n0t = u.conj().T @ n0 @ u
        comm = n0 @ n0t - n0t @ n0
        out.append(-(psi.conj() @ comm @ comm @ psi).real / n_particles**4)
    return np.array(out)


def three_mode_tridiagonal(n_particles: int, coupling: float):
    """Closed-form K = 0 matrix elements for state m = (m, N - 2m, m)."""
    m = np.arange(n_particles // 2 + 1, dtype=float)
    n0 = n_particles - 2 * m
    d = 2 * m - 0.25 * coupling * (n0 * (n0 - 1) + 2 * m * (m - 1) + 4 * (2 * n0 * m + m * m))
    mm = m[:-1]
    e = -0.5 * coupling * (mm + 1) * np.sqrt((n_particles - 2 * mm) * (n_particles - 2 * mm - 1))
    return d, e
