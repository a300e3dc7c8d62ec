import math

import numpy as np
import pytest

from cornerflow.errors import DomainError
from cornerflow.legendre import (
    find_theta_star,
    legendre_ode_residual,
    legendre_P,
    legendre_P_prime,
    legendre_Q1,
    legendre_Q1_prime,
    legendre_Q1_second,
)


def test_degree_one_is_identity():
    s = np.linspace(-0.95, 0.95, 41)
    assert np.max(np.abs(legendre_P(1.0, s) - s)) < 1e-14


def test_normalization_at_one():
    assert float(legendre_P(1.5, 1.0)) == 1.0
    assert float(legendre_P_prime(1.5, 1.0)) == pytest.approx(1.875, abs=1e-15)


def test_half_integer_values_vs_high_precision_oracle():
    # frozen mpmath (40-digit) values
    assert float(legendre_P(1.5, 0.5)) == pytest.approx(0.1724386030742277798, abs=1e-12)
    assert float(legendre_P_prime(1.5, 0.5)) == pytest.approx(1.4180592132978199347, abs=1e-12)
    assert float(legendre_P(0.5, 0.3)) == pytest.approx(0.70093853096965508, abs=1e-12)


def test_ode_residual():
    s = np.linspace(-0.9, 0.95, 50)
    for nu in (0.5, 1.5, 2.5):
        assert np.max(np.abs(legendre_ode_residual(nu, s))) < 1e-9


def test_domain_errors():
    with pytest.raises(DomainError):
        legendre_P(1.5, -1.0)
    with pytest.raises(DomainError):
        legendre_P(1.5, 1.5)
    with pytest.raises(DomainError):
        legendre_Q1(1.0)
    with pytest.raises(DomainError):
        legendre_Q1(-1.0)


class TestQ1:
    def test_center(self):
        assert float(legendre_Q1(0.0)) == -1.0

    def test_near_edge(self):
        assert float(legendre_Q1(0.9)) == pytest.approx(0.45 * math.log(19.0) - 1.0, rel=1e-14)

    def test_odd_symmetry_structure(self):
        s = np.linspace(0.05, 0.9, 20)
        # Q1(-s) = -s/2 log((1-s)/(1+s)) - 1 = s/2 log((1+s)/(1-s)) - 1... check parity of Q1 + 1
        assert np.max(np.abs((legendre_Q1(-s) + 1.0) - (legendre_Q1(s) + 1.0))) < 1e-14

    def test_ode_residual(self):
        s = np.linspace(-0.85, 0.85, 50)
        res = (
            (1 - s * s) * legendre_Q1_second(s)
            - 2 * s * legendre_Q1_prime(s)
            + 2 * legendre_Q1(s)
        )
        assert np.max(np.abs(res)) < 1e-10
        # cross-check the closed-form second derivative against differences
        h = 1e-5
        fd = (legendre_Q1_prime(s + h) - legendre_Q1_prime(s - h)) / (2 * h)
        assert np.max(np.abs(fd - legendre_Q1_second(s))) < 1e-5


class TestThetaStar:
    def test_root_property(self):
        c = find_theta_star()
        assert abs(float(legendre_P_prime(1.5, c.s_star))) < 1e-12

    def test_angle(self):
        c = find_theta_star()
        assert 90.0 < c.theta_star_deg < 180.0
        assert c.theta_star_deg == pytest.approx(114.799, abs=0.01)
        assert c.s_star == pytest.approx(math.cos(math.radians(114.799)), abs=2e-4)

    def test_m0_closed_form_vs_polar_quadrature(self):
        c = find_theta_star()
        # oracle: 2-D polar quadrature of x1*x2+ over the bubble cone
        th_lo = math.pi - c.theta_star_rad
        x, w = np.polynomial.legendre.leggauss(80)
        th = 0.5 * (math.pi / 2 - th_lo) * x + 0.5 * (math.pi / 2 + th_lo)
        ang = 0.5 * (math.pi / 2 - th_lo) * np.dot(w, np.sin(th) * np.cos(th))
        oracle = ang / 4.0
        assert c.m0 == pytest.approx(oracle, abs=1e-8)
        assert c.m0 == pytest.approx(c.s_star**2 / 8.0, abs=1e-15)

    def test_beta(self):
        c = find_theta_star()
        assert c.beta**2 == pytest.approx(7.5, rel=1e-14)
