from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bosecrit.model import EmptySectorError, ModelParams, build_basis, write_basis_csv


def test_alpha_is_derived_from_bare_coupling():
    p = ModelParams.from_alpha(300, 2.0)
    assert p.n_tilde == 301.5
    assert p.alpha == pytest.approx(2.0, rel=1e-15)
    assert p.coupling_bare == pytest.approx(2.0 / 301.5)
    assert p.with_alpha(1.0).alpha == pytest.approx(1.0)


@pytest.mark.parametrize("kwargs", [
    dict(n_particles=-1, coupling_bare=0.1),
    dict(n_particles=2.5, coupling_bare=0.1),
    dict(n_particles=10, coupling_bare=-0.1),
    dict(n_particles=10, coupling_bare=0.1, mode_cutoff=3),
    dict(n_particles=10, coupling_bare=0.1, mode_cutoff=1, n_tilde_shift=2.0),
])
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        ModelParams(**kwargs)


def test_five_mode_shift_is_free():
    p = ModelParams.from_alpha(20, 1.05, mode_cutoff=2, n_tilde_shift=2.5)
    assert p.n_tilde == 22.5 and p.n_modes == 5
    assert list(p.momenta) == [-2, -1, 0, 1, 2]


def test_three_mode_k0_order():
    b = build_basis(ModelParams(10, 0.1))
    assert b.dimension == 6
    for i in range(b.dimension):
        assert b.state(i) == (i, 10 - 2 * i, i)


def test_index_lookup_and_misses():
    b = build_basis(ModelParams(6, 0.1, mode_cutoff=2))
    for i in range(0, b.dimension, 7):
        assert b.index_of(b.state(i)) == i
    assert b.indices_of([[0, 0, 5, 0, 0], [1, 0, 4, 0, 1], [0, 0, 6, 1, 0]]).tolist()[::2] == [-1, -1]
    with pytest.raises(KeyError):
        b.index_of((0, 1, 5, 0, 0))


def test_empty_sector():
    with pytest.raises(EmptySectorError):
        build_basis(ModelParams(3, 0.1), total_momentum=4)


def test_occupations_read_only():
    b = build_basis(ModelParams(4, 0.1))
    with pytest.raises(ValueError):
        b.occupations[0, 0] = 3


@given(n=st.integers(0, 12), kmax=st.sampled_from([1, 2]), data=st.data())
def test_basis_constraints(n, kmax, data):
    k = data.draw(st.integers(-kmax * n, kmax * n))
    b = build_basis(ModelParams(n, 0.1, kmax), k)
    occ = b.occupations
    assert np.all(occ.sum(axis=1) == n)
    assert np.all(occ @ b.momenta == k)
    assert np.all(np.diff(b.keys) > 0)
    assert len(set(b.states)) == b.dimension


@given(n=st.integers(0, 10))
def test_sector_dimensions_add_up(n):
    # summing over K recovers the unconstrained count C(N + M - 1, M - 1)
    for kmax in (1, 2):
        p = ModelParams(n, 0.0, kmax)
        total = sum(build_basis(p, k).dimension for k in range(-kmax * n, kmax * n + 1))
        m = 2 * kmax + 1
        assert total == comb(n + m - 1, m - 1)


def test_basis_csv(tmp_path):
    b = build_basis(ModelParams(4, 0.1))
    path = write_basis_csv(b, tmp_path / "basis.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "index,n_-1,n_0,n_1"
    assert lines[1:] == ["0,0,4,0", "1,1,2,1", "2,2,0,2"]
