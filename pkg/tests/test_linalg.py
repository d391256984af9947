import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from bosecrit import linalg as la


def random_tridiagonal(n, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(n) * 3, rng.standard_normal(n - 1)


def dense(d, e):
    return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)


@given(n=st.integers(2, 40), seed=st.integers(0, 10**6), shift=st.floats(-12, 12))
def test_sturm_count_matches_dense(n, seed, shift):
    d, e = random_tridiagonal(n, seed)
    ev = np.linalg.eigvalsh(dense(d, e))
    if np.min(np.abs(ev - shift)) < 1e-9:
        return
    assert la.sturm_count(d, e, shift) == int(np.sum(ev < shift))


def test_sturm_extremes_and_zero_offdiagonal():
    d, e = np.array([1.0, 2.0, 3.0]), np.array([0.0, 0.0])
    lo, hi = la.gershgorin_bounds(d, e)
    assert la.sturm_count(d, e, lo - 1) == 0
    assert la.sturm_count(d, e, hi + 1) == 3
    # exact hits on diagonal entries must not divide by zero
    assert list(la.sturm_count(d, e, [1.0, 2.0, 3.0])) == [0, 1, 2]


def test_sturm_survives_huge_entries():
    d = np.array([1e150, -1e150, 0.0])
    e = np.array([1e149, 1e-200])
    assert la.sturm_count(d, e, 0.5) == 2


@given(n=st.integers(1, 30), seed=st.integers(0, 10**6))
def test_bisection_and_inverse_iteration(n, seed):
    d, e = random_tridiagonal(n + 1, seed)
    ev, vecs = np.linalg.eigh(dense(d, e))
    got = la.bisect_eigenvalues(d, e, np.arange(n + 1))
    assert np.allclose(got, ev, atol=1e-10)
    v = la.inverse_iteration(d, e, got)
    assert np.allclose(v.T @ v, np.eye(n + 1), atol=1e-8)
    res = np.linalg.norm(dense(d, e) @ v - v * got, axis=0)
    assert res.max() < 1e-9


def test_window_is_half_open():
    d, e = np.array([0.0, 1.0, 2.0]), np.zeros(2)
    assert list(la.window_eigenvalues(d, e, 1.0, 2.0)) == pytest.approx([1.0])
    assert la.window_eigenvalues(d, e, 5.0, 6.0).size == 0


def test_lanczos_smallest_and_shift_invert():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.standard_normal((120, 120)))
    lam = np.concatenate([[-5.0, -5.0 + 1e-6], np.linspace(-4, 4, 118)])
    a = (q * lam) @ q.T
    vals, vecs, _ = la.lanczos_eigsh(lambda v: a @ v, 120, 4, which="smallest", tol=1e-12)
    assert np.allclose(vals, np.sort(lam)[:4], atol=1e-9)
    assert np.allclose(vecs.T @ vecs, np.eye(4), atol=1e-10)
    inv = np.linalg.inv(a - 0.01 * np.eye(120))
    theta, _, _ = la.lanczos_eigsh(lambda v: inv @ v, 120, 3, which="magnitude", tol=1e-12)
    near = np.sort(0.01 + 1.0 / theta)
    assert np.allclose(near, np.sort(lam[np.argsort(np.abs(lam - 0.01))[:3]]), atol=1e-9)


def test_krylov_expm_against_dense():
    from scipy.linalg import expm

    d, e = random_tridiagonal(60, 1)
    h = dense(d, e)
    v = np.random.default_rng(2).standard_normal(60)
    v /= np.linalg.norm(v)
    for t in (0.0, 0.3, 7.0, -2.0):
        ref = expm(-1j * h * t) @ v
        got = la.krylov_expm(lambda x: h @ x, v, t, norm_estimate=np.abs(h).sum(1).max())
        assert np.linalg.norm(got - ref) < 1e-10


def test_krylov_step_failure_is_reported():
    h = np.diag(np.linspace(0, 1e6, 50))
    v = np.ones(50) / np.sqrt(50)
    with pytest.raises(la.PropagationError) as info:
        la.krylov_expm(lambda x: h @ x, v, 10.0, norm_estimate=1e6, krylov_dim=2, min_step=1e-3)
    assert info.value.error_estimate > 0


@given(arrays(float, st.integers(2, 20), elements=st.floats(-5, 5)))
def test_tridiagonal_matvec(d):
    e = d[:-1] * 0.5
    v = np.arange(d.size, dtype=float)
    assert np.allclose(la.tridiagonal_matvec(d, e, v), dense(d, e) @ v)
