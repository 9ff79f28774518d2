import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from backscatter_ee.exceptions import DomainError
from backscatter_ee.special import db_to_linear, gaussian_pdf, q_function, q_inverse

Q10 = 1.2815515655446004


def mp_q(x):
    with mpmath.workdps(40):
        return float(mpmath.erfc(mpmath.mpf(x) / mpmath.sqrt(2)) / 2)


class TestQFunction:
    def test_zero(self):
        assert q_function(0.0) == 0.5

    def test_known_quantile(self):
        assert abs(q_function(Q10) - 0.1) <= 1e-12

    @pytest.mark.parametrize("x", [-8.0, -3.3, -1.0, 0.25, 1.7, 4.0, 9.5, 20.0])
    def test_against_high_precision(self, x):
        assert q_function(x) == pytest.approx(mp_q(x), rel=1e-13, abs=1e-300)

    def test_vectorized(self):
        x = np.linspace(-5, 5, 11)
        np.testing.assert_allclose(q_function(x) + q_function(-x), 1.0, atol=1e-15)

    def test_strictly_decreasing(self):
        v = q_function(np.linspace(-6, 6, 500))
        assert np.all(np.diff(v) < 0)

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(DomainError):
            q_function(bad)

    def test_pdf_at_zero(self):
        assert gaussian_pdf(0.0) == pytest.approx(1.0 / math.sqrt(2 * math.pi), rel=1e-15)


class TestQInverse:
    def test_half(self):
        assert q_inverse(0.5) == 0.0

    def test_quantiles(self):
        assert abs(q_inverse(0.9) + Q10) <= 1e-9
        assert abs(q_inverse(0.1) - Q10) <= 1e-9

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, math.nan])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            q_inverse(p)

    @given(st.floats(min_value=-4.5, max_value=6.0))
    def test_roundtrip_x(self, x):
        assert abs(q_inverse(q_function(x)) - x) <= 1e-10

    @given(st.floats(min_value=-6.0, max_value=-4.5))
    def test_roundtrip_x_left_tail_is_conditioning_limited(self, x):
        # Q(x) is within 1e-5 of 1 here, so one ulp of p moves x by ulp/pdf
        bound = 4.0 * np.spacing(1.0) / gaussian_pdf(x)
        assert abs(q_inverse(q_function(x)) - x) <= max(1e-10, bound)

    @given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
    def test_roundtrip_p(self, p):
        assert abs(q_function(q_inverse(p)) - p) <= 1e-10


def test_db_conversion():
    assert db_to_linear(-10.0) == pytest.approx(0.1, rel=1e-15)
    assert db_to_linear(0.0) == 1.0
