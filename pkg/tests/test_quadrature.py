import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bosecrit.quadrature import QuadratureError, gauss_legendre, integrate


def test_rule_is_exact_for_polynomials():
    x, w = gauss_legendre(10)
    for deg in range(20):
        exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
        assert np.dot(w, x**deg) == pytest.approx(exact, abs=1e-14)


def test_sqrt_endpoint_singularity():
    val, err = integrate(np.sqrt, 0.0, 1.0, tol=1e-13)
    assert val == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert err < 1e-12


def test_kink_with_breakpoint():
    val, _ = integrate(lambda x: np.abs(x - 0.3), 0.0, 1.0, breakpoints=[0.3])
    assert val == pytest.approx(0.5 * (0.09 + 0.49), abs=1e-15)


def test_reversed_and_empty_interval():
    assert integrate(np.cos, 1.0, 0.0)[0] == pytest.approx(-math.sin(1.0), abs=1e-15)
    assert integrate(np.cos, 2.0, 2.0) == (0.0, 0.0)


def test_nonconvergence_reports_estimate():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.sin(1.0 / x), 1e-9, 1.0, max_panels=50)
    assert math.isfinite(info.value.estimate)


@given(a=st.floats(-3, 3), b=st.floats(-3, 3), k=st.floats(0.1, 5.0))
def test_exponential(a, b, k):
    val, _ = integrate(lambda x: np.exp(k * x), a, b, tol=1e-12)
    assert val == pytest.approx((math.exp(k * b) - math.exp(k * a)) / k, rel=1e-11, abs=1e-11)
