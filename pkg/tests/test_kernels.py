import math

import mpmath as mp
import numpy as np
import pytest

from nlsx import kernels as K

mp.mp.dps = 50


# 50-digit oracles.  Inputs are converted exactly (mp.mpf of a float is the
# exact binary value); going through repr strings would perturb the argument
# by ~1e-16, which the exp blows up to ~1e-14 at large rho.

def oracle_multiplier(rho, mu):
    s = 4 * mp.pi * mp.mpf(rho)
    return mp.expm1(s) - mu * s


def oracle_big_F(rho, mu):
    s = 4 * mp.pi * mp.mpf(rho)
    return (mp.expm1(s) - s - mu * s**2 / 2) / (8 * mp.pi)


def oracle_h(s, mu):
    s = mp.mpf(s)
    return s * mp.e**s - mp.e**s + 1 - mu * s**2 / 2


def oracle_g(s):
    s = mp.mpf(s)
    return s * (mp.e**s - 1) - 2 * (mp.e**s - 1 - s)


def oracle_k1(s):
    s = mp.mpf(s)
    return (s**2 * mp.e**s / 2 - s * mp.e**s + mp.e**s - 1) / (4 * mp.pi)


def rel_err(value, oracle):
    if oracle == 0:
        return abs(value)
    return float(abs((mp.mpf(value) - oracle) / oracle))


class TestSpecExamples:
    def test_multiplier_zero(self):
        assert K.multiplier(0.0, 0) == 0.0
        assert K.multiplier(0.0, 1) == 0.0

    def test_multiplier_quarter(self):
        # e^pi - 1 - pi
        assert rel_err(K.multiplier(0.25, 1), oracle_multiplier(0.25, 1)) < 1e-14

    def test_multiplier_tenth(self):
        # e^{0.4 pi} - 1
        assert rel_err(K.multiplier(0.1, 0), oracle_multiplier(0.1, 0)) < 1e-14

    def test_big_F_zero(self):
        assert K.big_F(0.0, 0) == 0.0
        assert K.big_F(0.0, 1) == 0.0

    def test_big_F_oracle(self):
        assert rel_err(K.big_F(0.05, 1), oracle_big_F(0.05, 1)) < 1e-14

    def test_big_F_mu_gap_is_pi_rho_sq(self):
        # the two flavors differ exactly by pi*rho^2
        rho = 0.05
        gap = K.big_F(rho, 0) - K.big_F(rho, 1)
        assert abs(gap - math.pi * rho**2) < 1e-16 * math.pi * rho**2 * 10

    def test_h_examples(self):
        assert K.h_kernel(0.0, 0) == 0.0
        assert K.h_kernel(0.0, 1) == 0.0
        assert K.h_kernel(1.0, 0) == pytest.approx(1.0, rel=1e-15, abs=0.0)
        assert rel_err(K.h_kernel(2.0, 1), mp.e**2 - 1) < 1e-14

    def test_g_examples(self):
        assert K.g_kernel(0.0, 0) == 0.0
        assert rel_err(K.g_kernel(1.0, 1), 3 - mp.e) < 1e-14
        assert rel_err(K.g_kernel(3.0, 0), mp.e**3 + 5) < 1e-14

    def test_k1_examples(self):
        assert K.k1_kernel(0.0) == 0.0
        assert rel_err(K.k1_kernel(1.0), (mp.e / 2 - 1) / (4 * mp.pi)) < 1e-14
        assert rel_err(K.k1_kernel(2.0), (mp.e**2 - 1) / (4 * mp.pi)) < 1e-14

    def test_m_examples(self):
        assert K.m_kernel(0.0) == 0.0
        assert rel_err(K.m_kernel(1.0), 1 - mp.e / 2) < 1e-14
        assert rel_err(K.m_kernel(2.0), 1 - mp.e**2) < 1e-14


class TestOracleSweep:
    def test_hundred_random_points(self):
        rng = np.random.default_rng(2024)
        rhos = np.exp(rng.uniform(np.log(1e-8), np.log(20.0), 100))
        svals = np.exp(rng.uniform(np.log(1e-8), np.log(100.0), 100))
        for rho in rhos:
            rho = float(rho)
            for mu in (0, 1):
                assert rel_err(K.multiplier(rho, mu), oracle_multiplier(rho, mu)) < 1e-14
                assert rel_err(K.big_F(rho, mu), oracle_big_F(rho, mu)) < 1e-14
        for s in svals:
            s = float(s)
            for mu in (0, 1):
                assert rel_err(K.h_kernel(s, mu), oracle_h(s, mu)) < 1e-14
            assert rel_err(K.g_kernel(s, 0), oracle_g(s)) < 1e-14
            assert rel_err(K.k1_kernel(s), oracle_k1(s)) < 1e-14
            assert rel_err(K.m_kernel(s), -4 * mp.pi * oracle_k1(s)) < 1e-14


class TestSignSweeps:
    rho_sweep = np.exp(np.linspace(np.log(1e-12), np.log(50.0), 10_000))
    s_sweep = np.exp(np.linspace(np.log(1e-12), np.log(100.0), 10_000))

    @pytest.mark.parametrize("mu", [0, 1])
    def test_multiplier_nonneg_monotone(self, mu):
        vals = K.multiplier(self.rho_sweep, mu)
        assert np.all(vals >= 0.0)
        assert np.all(np.diff(vals) >= 0.0)

    @pytest.mark.parametrize("mu", [0, 1])
    def test_big_F_nonneg_monotone(self, mu):
        vals = K.big_F(self.rho_sweep, mu)
        assert np.all(vals >= 0.0)
        assert np.all(np.diff(vals) >= 0.0)

    @pytest.mark.parametrize("mu", [0, 1])
    def test_h_nonneg(self, mu):
        vals = K.h_kernel(self.s_sweep, mu)
        assert np.all(vals >= -1e-13 * (1.0 + np.abs(vals)))

    def test_g_nonneg(self):
        vals = K.g_kernel(self.s_sweep, 1)
        assert np.all(vals >= -1e-13 * (1.0 + np.abs(vals)))

    def test_m_nonpos(self):
        vals = K.m_kernel(self.s_sweep)
        assert np.all(vals <= 1e-13 * (1.0 + np.abs(vals)))

    def test_k1_cubic_lower_bound(self):
        s = self.s_sweep
        vals = K.k1_kernel(s)
        assert np.all(vals - s**3 / (24 * math.pi) >= -1e-13 * (1.0 + s**3))


class TestBranchAgreement:
    @pytest.mark.parametrize(
        "coeffs,direct",
        [
            (K._C_EXPM1, np.expm1),
            (K._C_EXPM1_M1, K._mult1_direct),
            (K._C_EXPM1_M2, K._f1_direct),
            (K._C_H_CORE, K._h_core_direct),
            (K._C_H1, K._h1_direct),
            (K._C_G, K._g_direct),
            (K._C_K1_CORE, K._k1_core_direct),
        ],
    )
    def test_series_meets_direct_at_cutoff(self, coeffs, direct):
        s = np.array([K.SERIES_CUTOFF])
        series_val = float(np.polyval(coeffs, s[0]))
        direct_val = float(direct(s)[0])
        assert abs(series_val - direct_val) <= 1e-13 * abs(direct_val)


class TestIdentity:
    @pytest.mark.parametrize("mu", [0, 1])
    def test_rho_multiplier_minus_2F_is_h(self, mu):
        # conj(u) f(u) - 2 F(u) = h(4 pi |u|^2) / (4 pi), pointwise
        rho = np.exp(np.linspace(np.log(1e-8), np.log(50.0), 2000))
        lhs = rho * K.multiplier(rho, mu) - 2.0 * K.big_F(rho, mu)
        rhs = K.h_kernel(K.FOUR_PI * rho, mu) / K.FOUR_PI
        assert np.all(np.abs(lhs - rhs) <= 1e-13 * np.maximum(np.abs(rhs), 1e-300))


class TestGuardsAndValidation:
    def test_overflow_guard_multiplier(self):
        with pytest.raises(K.KernelOverflowError):
            K.multiplier(60.0, 0)  # 4*pi*60 > 700

    def test_overflow_guard_s_kernels(self):
        for fn in (lambda s: K.h_kernel(s, 0), lambda s: K.g_kernel(s, 1),
                   K.k1_kernel, K.m_kernel):
            with pytest.raises(K.KernelOverflowError):
                fn(700.5)
            assert np.isfinite(fn(690.0))

    def test_overflow_guard_reports_argument(self):
        try:
            K.multiplier(np.array([1.0, 60.0]), 1)
        except K.KernelOverflowError as exc:
            assert exc.arg > 700.0
        else:
            pytest.fail("guard did not trip")

    def test_negative_input_rejected(self):
        with pytest.raises(ValueError):
            K.multiplier(-1e-9, 0)
        with pytest.raises(ValueError):
            K.h_kernel(-0.5, 1)

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            K.big_F(float("nan"), 0)

    def test_bad_mu_rejected(self):
        with pytest.raises(ValueError):
            K.multiplier(1.0, 2)

    def test_array_shape_preserved(self):
        rho = np.linspace(0.0, 2.0, 12).reshape(3, 4)
        out = K.multiplier(rho, 1)
        assert out.shape == (3, 4)
        assert isinstance(K.multiplier(0.3, 1), float)
