import math

import numpy as np
import pytest
from scipy.integrate import quad

from cornerflow import _kernels_py
from cornerflow._dispatch import kernels
from cornerflow.eos import (
    EosModel,
    F_many,
    F_of,
    critical_density,
    enthalpy,
    invert_density,
    invert_many,
    lambda_alt,
    lambda_of,
    lambda_prime,
    pressure,
    pressure_derivative,
)
from cornerflow.errors import DomainError, StateError, SubsonicityError


class TestPressure:
    def test_zero_density(self, model_g2):
        assert pressure(model_g2, 0.0) == 0.0

    def test_power_law(self, model_g2):
        assert pressure(model_g2, 3.0) == 9.0
        assert pressure_derivative(model_g2, 3.0) == 6.0

    def test_fractional_exponent(self, model_g14):
        # oracle: log/exp evaluation of 2 * 1.5^1.4
        expected = 2.0 * math.exp(1.4 * math.log(1.5))
        assert pressure(model_g14, 1.5) == pytest.approx(expected, rel=1e-15)
        assert pressure(model_g14, 1.5) == pytest.approx(3.5282370675740207, rel=1e-14)

    def test_negative_density_rejected(self, model_g2):
        with pytest.raises(DomainError):
            pressure(model_g2, -1.0)
        with pytest.raises(DomainError):
            pressure_derivative(model_g2, -0.5)


class TestEnthalpy:
    def test_surface_value(self, model_g2):
        assert enthalpy(model_g2, 1.0) == 0.0

    def test_closed_form_vs_quadrature(self, model_g2):
        # oracle: adaptive quadrature of p'(w)/w
        oracle, _ = quad(lambda w: pressure_derivative(model_g2, w) / w, 1.0, 2.0)
        assert enthalpy(model_g2, 2.0) == pytest.approx(2.0, abs=1e-13)
        assert enthalpy(model_g2, 2.0) == pytest.approx(oracle, abs=1e-12)

    def test_rarefied_vs_quadrature(self):
        model = EosModel(gamma=1.4, A=1.0, rho_bar0=1.0, g=1.0)
        oracle, _ = quad(lambda w: pressure_derivative(model, w) / w, 1.0, 0.5)
        val = enthalpy(model, 0.5)
        assert val < 0
        assert val == pytest.approx(oracle, abs=1e-12)
        assert val == pytest.approx(-0.84749600860680336, abs=1e-12)

    def test_nonpositive_density_rejected(self, model_g2):
        with pytest.raises(DomainError):
            enthalpy(model_g2, 0.0)


class TestCriticalDensity:
    def test_surface(self, model_g2):
        assert critical_density(model_g2, 0.0) == model_g2.rho_bar0

    def test_strictly_decreasing(self, model_g2):
        xs = np.linspace(0.0, model_g2.x2_st, 9)
        vals = [critical_density(model_g2, float(x)) for x in xs]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_residual_and_bisection_oracle(self, model_g2):
        x2 = 0.5 * model_g2.x2_st
        rho = critical_density(model_g2, x2)
        # defining scalar equation residual
        res = (
            0.5 * pressure_derivative(model_g2, rho)
            + enthalpy(model_g2, rho)
            + model_g2.g * x2
            - 0.5 * pressure_derivative(model_g2, model_g2.rho_bar0)
        )
        assert abs(res) < 1e-12
        # bisection oracle
        lo, hi = 1e-6, model_g2.rho_bar0
        f = lambda r: 0.5 * pressure_derivative(model_g2, r) + enthalpy(model_g2, r) + x2 - 0.5 * pressure_derivative(model_g2, 1.0)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if f(mid) > 0:
                hi = mid
            else:
                lo = mid
        assert rho == pytest.approx(0.5 * (lo + hi), abs=1e-12)
        # closed form for gamma = 2: rho_cr = 1 - x2/3
        assert rho == pytest.approx(1.0 - x2 / 3.0, abs=1e-12)

    def test_domain(self, model_g2):
        with pytest.raises(DomainError):
            critical_density(model_g2, -0.1)
        with pytest.raises(DomainError):
            critical_density(model_g2, model_g2.x2_st * 1.5)


class TestInversion:
    def test_rest_state(self, model_g2):
        assert invert_density(model_g2, 0.0, 0.0).rho == pytest.approx(1.0, abs=1e-14)

    def test_surface_identity(self, model_g2):
        # H(t; t) equals the surface density along the diagonal
        for t in np.linspace(0.0, 0.9 * model_g2.x2_st, 100):
            st = invert_density(model_g2, float(t), float(t))
            assert abs(st.rho - 1.0) < 1e-10

    def test_example_state(self, model_g2):
        st = invert_density(model_g2, 0.01, 0.05)
        res = model_g2.g * st.rho**-2 * 0.01 + enthalpy(model_g2, st.rho) - model_g2.g * 0.05
        assert abs(res) < 1e-12
        assert st.d1H < 0
        assert st.d2H > 0  # rescaled-height derivative
        assert st.d_rho_d_height < 0  # physical-frame monotonicity

    @pytest.mark.parametrize("t,s", [(0.01, 0.05), (0.2, 0.4), (0.0, 0.3), (0.05, 0.6)])
    def test_derivatives_match_finite_differences(self, model_g2, t, s):
        st = invert_density(model_g2, t, s)
        eps = 1e-6
        d1_fd = (
            invert_density(model_g2, t + eps, s).rho
            - invert_density(model_g2, max(t - eps, 0.0), s).rho
        ) / (eps + min(t, eps))
        d2_fd = (
            invert_density(model_g2, t, s + eps).rho - invert_density(model_g2, t, s - eps).rho
        ) / (2 * eps)
        assert st.d1H == pytest.approx(d1_fd, rel=1e-6)
        assert st.d2H == pytest.approx(d2_fd, rel=1e-6)
        # physical-frame check through the chain rule in the height
        phys_fd = (
            invert_density(model_g2, t, s - eps).rho - invert_density(model_g2, t, s + eps).rho
        ) / (2 * eps)
        assert st.d_rho_d_height == pytest.approx(phys_fd, rel=1e-6)

    def test_monotone_in_height_at_rest(self, model_g2):
        vals = [invert_density(model_g2, 0.0, float(s)).rho for s in np.linspace(0.0, 0.8, 9)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_supersonic_data_rejected(self, model_g2):
        with pytest.raises(StateError):
            invert_density(model_g2, 5.0, 0.01)

    def test_margin_violation(self):
        model = EosModel(gamma=2.0, A=1.0, rho_bar0=1.0, g=1.0, eps0=0.5)
        with pytest.raises(SubsonicityError):
            invert_density(model, 0.0, 0.01)

    def test_domain(self, model_g2):
        with pytest.raises(DomainError):
            invert_density(model_g2, -0.1, 0.1)

    def test_pure_backend_selectable(self):
        import subprocess
        import sys

        code = (
            "import cornerflow, cornerflow.eos as e;"
            "print(cornerflow.KERNEL_BACKEND);"
            "m = e.EosModel(gamma=2.0);"
            "print(e.invert_density(m, 0.01, 0.05).rho)"
        )
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True, text=True, env={"CORNERFLOW_PURE": "1", "PATH": "/usr/bin:/bin"},
        )
        assert out.returncode == 0, out.stderr
        backend, rho = out.stdout.split()
        assert backend == "python"
        assert float(rho) == pytest.approx(1.0201960025372609, rel=1e-12)

    def test_kernel_twins_agree(self, model_g2):
        t = np.linspace(0.0, 0.4, 23)
        s = np.linspace(0.0, 0.6, 23)[:, None] + 0.0 * t
        tt = np.broadcast_to(t, s.shape)
        a = kernels.invert_bernoulli(tt, s, 2.0, 1.0, 1.0, 1.0)
        b = _kernels_py.invert_bernoulli(tt, s, 2.0, 1.0, 1.0, 1.0)
        for x, y in zip(a, b):
            assert np.allclose(x, y, rtol=1e-12, atol=1e-13, equal_nan=True)

    def test_incompressible_stiffening(self):
        # as A grows, the density pins to the surface value monotonically
        t = np.linspace(0.0, 0.05, 11)
        s = np.linspace(0.0, 0.2, 11)
        sups = []
        for A in (1.0, 10.0, 100.0, 1000.0):
            model = EosModel(gamma=2.0, A=A, rho_bar0=1.0, g=1.0)
            rho, _, _, flag = invert_many(model, t[None, :], s[:, None])
            assert not np.any(flag)
            sups.append(float(np.max(np.abs(rho - 1.0))))
        assert all(b < a for a, b in zip(sups, sups[1:]))


class TestF:
    def test_empty_integral(self, model_g2):
        F, dF1, dF2 = F_of(model_g2, 0.0, 0.3)
        assert F == 0.0 and dF2 == 0.0
        assert dF1 == pytest.approx(1.0 / invert_density(model_g2, 0.0, 0.3).rho, rel=1e-13)

    def test_incompressible_limit(self):
        model = EosModel(gamma=2.0, A=1e8, rho_bar0=1.0, g=1.0)
        F, _, _ = F_of(model, 0.04, 0.05)
        assert abs(F - 0.04) < 1e-6

    def test_against_dense_midpoint_oracle(self, model_g2):
        t, s = 0.04, 0.05
        n = 10**6
        tau = (np.arange(n) + 0.5) * (t / n)
        rho, _, _, flag = invert_many(model_g2, tau, s)
        assert not np.any(flag)
        oracle = float(np.sum(1.0 / rho)) * (t / n)
        F, _, _ = F_of(model_g2, t, s)
        assert F == pytest.approx(oracle, abs=1e-9)
        # frozen high-precision value for the same state
        assert F == pytest.approx(0.039401036047264968, abs=1e-12)

    def test_vectorized_matches_scalar(self, model_g2):
        t = np.array([0.01, 0.04, 0.1])
        s = np.array([0.05, 0.05, 0.3])
        Fv, dF2v = F_many(model_g2, t, s)
        for i in range(3):
            F, _, dF2 = F_of(model_g2, float(t[i]), float(s[i]))
            assert Fv[i] == pytest.approx(F, abs=1e-11)
            assert dF2v[i] == pytest.approx(dF2, abs=1e-11)


class TestLambda:
    def test_zero(self, model_g2):
        assert lambda_of(model_g2, 0.0) == 0.0

    def test_incompressible_limit(self):
        model = EosModel(gamma=2.0, A=1e8, rho_bar0=1.0, g=1.0)
        assert abs(lambda_of(model, 0.3) - 0.3) < 1e-6

    def test_two_expressions_agree(self, model_g2):
        for x2 in np.linspace(0.0, 0.9 * model_g2.x2_st, 100):
            a = lambda_of(model_g2, float(x2))
            b = lambda_alt(model_g2, float(x2))
            assert abs(a - b) < 1e-9

    def test_prime_vs_finite_difference(self, model_g2):
        eps = 1e-5
        for x2 in (0.1, 0.3, 0.6):
            fd = (lambda_of(model_g2, x2 + eps) - lambda_of(model_g2, x2 - eps)) / (2 * eps)
            assert lambda_prime(model_g2, x2) == pytest.approx(fd, rel=1e-6)

    def test_prime_at_least_inverse_density(self, model_g2):
        # lambda' >= 1/rho_bar0 because the height derivative of 1/H is <= 0
        for x2 in (0.05, 0.2, 0.5):
            assert lambda_prime(model_g2, x2) >= 1.0 / model_g2.rho_bar0 - 1e-12


class TestModel:
    def test_x2_st(self, model_g2):
        assert model_g2.x2_st == pytest.approx(1.0, abs=1e-15)
        m = EosModel(gamma=1.4, A=2.0, rho_bar0=1.5, g=2.0)
        assert m.x2_st == pytest.approx(2.0 * 1.4 * 1.5**0.4 / 4.0, rel=1e-14)

    def test_text_round_trip(self, model_g14):
        m2 = EosModel.from_text(model_g14.to_text())
        assert m2 == model_g14

    def test_validation(self):
        with pytest.raises(DomainError):
            EosModel(gamma=1.0)
        with pytest.raises(DomainError):
            EosModel(gamma=2.0, A=-1.0)
        with pytest.raises(DomainError):
            EosModel(gamma=2.0, eps0=0.0)
