"""Model parameters and Fock-basis machinery for the truncated attractive Bose gas on a ring.

Units: hbar = 1 and the kinetic energy of a particle in momentum mode k is k**2.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "ModelParams",
    "FockBasis",
    "EmptySectorError",
    "build_basis",
    "scaled_coupling",
    "write_basis_csv",
]

THREE_MODE_SHIFT = 1.5


class EmptySectorError(ValueError):
    """No occupation vector satisfies the requested (N, K) constraints."""


@dataclass(frozen=True)
class ModelParams:
    """Particle number, bare coupling and momentum cutoff.

    ``n_tilde`` is the effective particle number entering the semiclassical
    quantization and the scaled coupling ``alpha = coupling_bare * n_tilde``.
    Only the bare coupling is stored, so ``alpha`` cannot drift.

    For the three-mode model (``mode_cutoff=1``) the shift is fixed at 3/2.
    For five modes it is a convention; it defaults to 3/2 as well so that
    ``alpha`` stays comparable between truncations.
    """

    n_particles: int
    coupling_bare: float
    mode_cutoff: int = 1
    n_tilde_shift: float = THREE_MODE_SHIFT

    def __post_init__(self):
        if int(self.n_particles) != self.n_particles or self.n_particles < 0:
            raise ValueError(f"n_particles must be a non-negative integer, got {self.n_particles!r}")
        object.__setattr__(self, "n_particles", int(self.n_particles))
        if self.coupling_bare < 0:
            raise ValueError("coupling_bare must be >= 0 (attractive interaction)")
        if self.mode_cutoff not in (1, 2):
            raise ValueError(f"mode_cutoff must be 1 or 2, got {self.mode_cutoff!r}")
        if self.mode_cutoff == 1 and self.n_tilde_shift != THREE_MODE_SHIFT:
            raise ValueError("the three-mode model requires n_tilde = N + 3/2")

    @classmethod
    def from_alpha(cls, n_particles: int, alpha: float, mode_cutoff: int = 1,
                   n_tilde_shift: float = THREE_MODE_SHIFT) -> "ModelParams":
        n_tilde = float(n_particles) + n_tilde_shift
        return cls(n_particles, alpha / n_tilde, mode_cutoff, n_tilde_shift)

    @property
    def n_tilde(self) -> float:
        return float(self.n_particles) + self.n_tilde_shift

    @property
    def alpha(self) -> float:
        return self.coupling_bare * self.n_tilde

    @property
    def n_modes(self) -> int:
        return 2 * self.mode_cutoff + 1

    @property
    def momenta(self) -> np.ndarray:
        return np.arange(-self.mode_cutoff, self.mode_cutoff + 1)

    def with_alpha(self, alpha: float) -> "ModelParams":
        return ModelParams.from_alpha(self.n_particles, alpha, self.mode_cutoff, self.n_tilde_shift)


def scaled_coupling(params: ModelParams) -> float:
    """alpha = coupling_bare * n_tilde."""
    return params.alpha


@dataclass(frozen=True)
class FockBasis:
    """Occupation-number states of one (N, K) sector.

    States are ordered lexicographically in the occupation vector read from
    k = -k_max upward.  For the three-mode K = 0 sector state ``i`` is
    ``(i, N - 2i, i)``, i.e. the index equals the pair number.

    ``occupations`` is a read-only ``(dim, 2*k_max + 1)`` int64 array.
    Reverse lookup goes through a mixed-radix integer key (radix N + 1),
    which is strictly increasing along the basis order.
    """

    n_particles: int
    total_momentum: int
    mode_cutoff: int
    occupations: np.ndarray = field(repr=False)
    keys: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.occupations.shape[0]

    def __len__(self) -> int:
        return self.dimension

    @property
    def momenta(self) -> np.ndarray:
        return np.arange(-self.mode_cutoff, self.mode_cutoff + 1)

    @property
    def sector(self) -> tuple[int, int]:
        return (self.n_particles, self.total_momentum)

    def state(self, i: int) -> tuple[int, ...]:
        return tuple(int(n) for n in self.occupations[i])

    @property
    def states(self) -> list[tuple[int, ...]]:
        return [tuple(row) for row in self.occupations.tolist()]

    def encode(self, occupations) -> np.ndarray:
        occ = np.asarray(occupations, dtype=np.int64)
        radix = self.n_particles + 1
        key = np.zeros(occ.shape[:-1], dtype=np.int64)
        for j in range(occ.shape[-1]):
            key = key * radix + occ[..., j]
        return key

    def indices_of(self, occupations) -> np.ndarray:
        """Vectorised reverse lookup; entries not in the basis map to -1."""
        occ = np.asarray(occupations, dtype=np.int64)
        if occ.ndim == 1:
            occ = occ[None, :]
        inside = np.all((occ >= 0) & (occ <= self.n_particles), axis=-1)
        inside &= occ.sum(axis=-1) == self.n_particles
        inside &= occ @ self.momenta == self.total_momentum
        keys = self.encode(np.where(inside[:, None], occ, 0))
        pos = np.searchsorted(self.keys, keys)
        pos = np.minimum(pos, self.dimension - 1)
        found = inside & (self.keys[pos] == keys)
        return np.where(found, pos, -1)

    def index_of(self, occupation) -> int:
        idx = int(self.indices_of(occupation)[0])
        if idx < 0:
            raise KeyError(f"{tuple(occupation)} is not in sector N={self.n_particles}, K={self.total_momentum}")
        return idx

    def number_operator(self, k: int) -> np.ndarray:
        """Diagonal of n_k in this basis."""
        return self.occupations[:, k + self.mode_cutoff].astype(float)


def _enumerate(n: int, kmom: int, kmax: int) -> np.ndarray:
    if kmax == 1:
        # n_1 - n_{-1} = K
        lo = max(0, -kmom)
        i = np.arange(lo, n + 1, dtype=np.int64)
        n1 = i + kmom
        n0 = n - i - n1
        ok = (n0 >= 0) & (n1 >= 0)
        return np.stack([i[ok], n0[ok], n1[ok]], axis=1)

    blocks = []
    for a in range(n + 1):  # n_{-2}
        b = np.arange(n - a + 1, dtype=np.int64)[:, None]  # n_{-1}
        c = np.arange(n - a + 1, dtype=np.int64)[None, :]  # n_0
        rest = n - a - b - c  # n_1 + n_2
        mom = kmom + 2 * a + b  # n_1 + 2 n_2
        n2 = mom - rest
        n1 = rest - n2
        ok = (rest >= 0) & (n1 >= 0) & (n2 >= 0)
        bb, cc = np.nonzero(ok)
        if bb.size == 0:
            continue
        blocks.append(np.stack([np.full(bb.size, a, dtype=np.int64), bb, cc, n1[ok], n2[ok]], axis=1))
    if not blocks:
        return np.zeros((0, 5), dtype=np.int64)
    return np.concatenate(blocks)


def build_basis(params: ModelParams, total_momentum: int = 0) -> FockBasis:
    n, kmax = params.n_particles, params.mode_cutoff
    if abs(total_momentum) > kmax * n:
        raise EmptySectorError(f"|K|={abs(total_momentum)} exceeds k_max*N={kmax * n}")
    if (n + 1) ** params.n_modes >= 2**62:
        raise OverflowError("sector keys would overflow 64-bit integers")
    occ = _enumerate(n, int(total_momentum), kmax)
    if occ.shape[0] == 0:
        raise EmptySectorError(f"no states with N={n}, K={total_momentum}, k_max={kmax}")
    radix = n + 1
    keys = np.zeros(occ.shape[0], dtype=np.int64)
    for j in range(occ.shape[1]):
        keys = keys * radix + occ[:, j]
    order = np.argsort(keys, kind="stable")
    occ, keys = occ[order], keys[order]
    occ.setflags(write=False)
    keys.setflags(write=False)
    return FockBasis(n, int(total_momentum), kmax, occ, keys)


def write_basis_csv(basis: FockBasis, path) -> Path:
    path = Path(path)
    header = ["index"] + [f"n_{k}" for k in basis.momenta]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, row in enumerate(basis.occupations.tolist()):
            w.writerow([i, *row])
    return path
