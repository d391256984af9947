import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bosecrit import classical as cl
from bosecrit.model import ModelParams

alphas = st.floats(0.0, 4.0)


def test_free_energy_surface_is_phase_independent():
    z, phi, w = cl.phase_portrait_grid(0.0, 11, 16)
    assert np.allclose(w, (1.0 - z)[:, None] * np.ones_like(phi)[None, :], atol=0, rtol=0)


def test_fixed_points_at_alpha_two():
    fp = cl.fixed_points(2.0)
    (pt, wmin) = fp.minimum
    assert pt.phi == 0.0
    assert pt.z == pytest.approx(1.0 - 4.0 / 14.0)
    assert wmin == pytest.approx(-1.0 / 7.0)
    assert cl.omega(pt.z, pt.phi, 2.0) == pytest.approx(wmin, abs=1e-15)
    phis = sorted(p.phi for p, _ in fp.hyperbolic)
    assert phis == pytest.approx([math.pi / 4, 3 * math.pi / 4])
    assert all(lam == 2.0 for _, lam in fp.hyperbolic)


def test_no_island_below_one():
    assert cl.fixed_points(0.8).minimum is None
    assert cl.fixed_points(0.8).hyperbolic == []
    with pytest.raises(ValueError):
        cl.separatrix_energy(ModelParams.from_alpha(20, 1.0))


@given(a=st.floats(1.01, 4.0))
def test_minimum_beats_the_grid(a):
    _, _, w = cl.phase_portrait_grid(a, 201, 64)
    assert cl.omega_min(a) <= w.min() + 1e-12
    assert cl.omega_max(a) >= w.max() - 1e-12


@given(a=st.floats(1.01, 4.0))
def test_saddle_is_stationary(a):
    # numerical gradient of omega vanishes at the hyperbolic point approached from inside
    pc = cl.critical_angle(a)
    h = 1e-6
    dphi = (cl.omega(1.0, pc + h, a) - cl.omega(1.0, pc - h, a)) / (2 * h)
    dz = (cl.omega(1.0, pc, a) - cl.omega(1.0 - h, pc, a)) / h
    assert abs(dphi) < 1e-8 and abs(dz) < 1e-5 * max(1.0, a)


@given(a=alphas, z=st.floats(0.0, 1.0), phi=st.floats(0.0, math.pi))
def test_z_branches_round_trip(a, z, phi):
    w = cl.omega(z, phi, a)
    zs = cl.z_branches(w, phi, a)
    assert any(abs(x - z) < 1e-7 for x in zs)


@given(a=alphas, w=st.floats(-1.0, 1.0))
def test_classification_is_total_on_range(a, w):
    lo, hi = cl.omega_min(a), cl.omega_max(a)
    if lo <= w <= hi:
        kind = cl.classify_orbit(w, a)
        if a > 1 and w < -cl.separatrix_tolerance(a):
            assert kind is cl.OrbitClass.VIBRATION
    elif w < lo - cl.separatrix_tolerance(a) or w > hi + cl.separatrix_tolerance(a):
        with pytest.raises(ValueError):
            cl.classify_orbit(w, a)


def test_energy_omega_round_trip():
    p = ModelParams.from_alpha(300, 1.5)
    w = np.linspace(-0.05, 0.8, 7)
    assert np.allclose(cl.omega_from_energy(cl.energy_from_omega(w, p), p), w, rtol=0, atol=1e-14)
    assert cl.energy_per_particle(0.0, p) * p.n_tilde == pytest.approx(cl.separatrix_energy(p)[1])


def test_orbit_polylines_stay_on_their_energy():
    a = 2.0
    for w in (-0.1, 0.05, 0.5):
        phi, z = cl.orbit_polyline(w, a, 60)
        assert np.allclose(cl.omega(z, phi, a), w, atol=1e-9)
        assert np.all((z >= -1e-12) & (z <= 1 + 1e-12))


def test_stability_exponent():
    assert cl.stability_exponent(2.0) == 2.0
    assert cl.stability_exponent(0.5) == 0.0
    with pytest.raises(ValueError):
        cl.critical_angle(1.0)


def test_angles_are_reduced():
    assert cl.ClassicalPoint(0.5, 4.0).phi == pytest.approx(4.0 - math.pi)
