import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from bgtkit.errors import DomainError
from bgtkit.mathcore import (LOG2, TailSide, binary_entropy, binom_cdf_exact,
                             binom_tail_bounds, binom_tail_exact,
                             entropy_inv_left, h_c, kl_div, log_binom,
                             log_binom_real, natural_entropy)


class TestBinaryEntropy:
    def test_maximum(self):
        assert binary_entropy(0.5) == 1.0

    def test_boundaries(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0

    def test_quarter(self):
        # -0.25 log2 0.25 - 0.75 log2 0.75, evaluated directly
        assert binary_entropy(0.25) == pytest.approx(0.8112781244591328,
                                                     abs=1e-15)

    def test_natural_variant(self):
        assert natural_entropy(0.3) == pytest.approx(LOG2 * binary_entropy(0.3))

    def test_domain(self):
        with pytest.raises(DomainError):
            binary_entropy(-0.1)
        with pytest.raises(DomainError):
            binary_entropy(1.1)


class TestEntropyInvLeft:
    def test_endpoints(self):
        assert entropy_inv_left(1.0) == 0.5
        assert entropy_inv_left(0.0) == 0.0

    def test_against_brentq_oracle(self):
        for v in (0.644, 0.1, 0.33, 0.9, 0.99):
            ref = brentq(lambda x: binary_entropy(x) - v, 1e-15, 0.5,
                         xtol=1e-14)
            assert entropy_inv_left(v) == pytest.approx(ref, abs=1e-11)

    def test_frozen_value(self):
        assert entropy_inv_left(0.644) == pytest.approx(0.16408788770208443,
                                                        abs=1e-11)

    def test_round_trip_dense(self):
        vs = np.linspace(0.0, 1.0, 10_001)
        for v in vs:
            assert abs(binary_entropy(entropy_inv_left(float(v))) - v) < 1e-9

    def test_monotone(self):
        vs = np.linspace(0.0, 1.0, 2001)
        xs = [entropy_inv_left(float(v)) for v in vs]
        assert all(b >= a for a, b in zip(xs, xs[1:]))

    def test_domain(self):
        with pytest.raises(DomainError):
            entropy_inv_left(1.5)


class TestKLDiv:
    def test_identity(self):
        assert kl_div(0.3, 0.3) == 0.0

    def test_zero_first_arg(self):
        assert kl_div(0.0, 0.5) == pytest.approx(math.log(2.0), abs=1e-15)

    def test_frozen(self):
        assert kl_div(0.25, 0.5) == pytest.approx(0.13081203594113697,
                                                  abs=1e-15)

    def test_infinite_cases(self):
        assert kl_div(0.5, 0.0) == math.inf
        assert kl_div(0.5, 1.0) == math.inf
        assert kl_div(0.0, 0.0) == 0.0
        assert kl_div(1.0, 1.0) == 0.0

    @given(st.floats(0.0, 1.0), st.floats(0.001, 0.999))
    @settings(max_examples=300, deadline=None)
    def test_nonnegative(self, a, b):
        assert kl_div(a, b) >= 0.0

    def test_equality_iff_equal(self):
        grid = np.linspace(0.01, 0.99, 50)
        for a in grid:
            for b in grid:
                d = kl_div(float(a), float(b))
                if abs(a - b) < 1e-12:
                    assert d < 1e-12
                else:
                    assert d > 0.0

    def test_convex_in_first_arg(self):
        b = 0.37
        grid = np.linspace(0.02, 0.98, 49)
        for a in grid:
            h = 0.01
            mid = kl_div(float(a), b)
            assert kl_div(float(a - h), b) + kl_div(float(a + h), b) \
                >= 2.0 * mid - 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            kl_div(-0.1, 0.5)


class TestHC:
    def test_at_two(self):
        assert abs(h_c(2.0) - 0.5) < 1e-12

    def test_near_one(self):
        assert h_c(1.0 + 1e-9) < 1e-4

    def test_frozen(self):
        assert h_c(1.47491) == pytest.approx(0.1640815259229312, abs=1e-9)

    def test_strictly_increasing(self):
        cs = np.linspace(1.001, 2.0, 400)
        vals = [h_c(float(c)) for c in cs]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_domain(self):
        with pytest.raises(DomainError):
            h_c(1.0)
        with pytest.raises(DomainError):
            h_c(2.5)


class TestBinomTails:
    def test_at_mean_upper_is_one(self):
        lo, up = binom_tail_bounds(10, 0.5, 5, TailSide.LowerTail)
        assert up == 1.0
        assert lo == pytest.approx(1.0 / (3.0 * math.sqrt(10)))

    def test_exact_cdf_frozen(self):
        # sum_{i<=4} C(20,i) / 2^20 by integer arithmetic
        assert binom_cdf_exact(20, 0.5, 4) == pytest.approx(
            0.005908966064453125, abs=1e-15)

    def test_sandwich_contains_exact(self):
        lo, up = binom_tail_bounds(20, 0.5, 4, TailSide.LowerTail)
        exact = binom_cdf_exact(20, 0.5, 4)
        assert lo <= exact <= up

    def test_symmetry_of_fair_binomial(self):
        lo1, up1 = binom_tail_bounds(20, 0.5, 4, TailSide.LowerTail)
        lo2, up2 = binom_tail_bounds(20, 0.5, 16, TailSide.UpperTail)
        assert lo1 == pytest.approx(lo2, rel=1e-14)
        assert up1 == pytest.approx(up2, rel=1e-14)
        assert binom_tail_exact(20, 0.5, 16, TailSide.UpperTail) == \
            pytest.approx(binom_cdf_exact(20, 0.5, 4), rel=1e-12)

    def test_sandwich_scan_small(self):
        for n in (5, 17, 40):
            for pr in (0.2, 0.5, 0.7):
                mean = n * pr
                for k in range(n + 1):
                    if k <= mean:
                        side = TailSide.LowerTail
                    elif k >= mean:
                        side = TailSide.UpperTail
                    lo, up = binom_tail_bounds(n, pr, k, side)
                    exact = binom_tail_exact(n, pr, k, side)
                    assert lo - 1e-15 <= exact <= up + 1e-15

    def test_domain(self):
        with pytest.raises(DomainError):
            binom_tail_bounds(10, 0.5, 11, TailSide.LowerTail)
        with pytest.raises(DomainError):
            binom_tail_bounds(10, 1.0, 5, TailSide.LowerTail)
        with pytest.raises(DomainError):
            binom_tail_bounds(10, 0.5, 5, "lower")


class TestLogBinom:
    def test_k_zero(self):
        assert log_binom(123, 0) == 0.0
        assert log_binom(0, 0) == 0.0

    def test_frozen_small(self):
        assert log_binom(100, 2) == pytest.approx(math.log(4950), abs=1e-12)
        assert log_binom(52, 5) == pytest.approx(math.log(2598960), abs=1e-12)

    def test_symmetry(self):
        for n, k in ((10, 3), (200, 77), (5000, 1234)):
            assert log_binom(n, k) == log_binom(n, n - k)

    def test_against_exact_comb(self):
        for n in (70, 200, 1500):
            for k in range(0, n + 1, max(1, n // 17)):
                ref = math.log(math.comb(n, k)) if k > 0 else 0.0
                assert log_binom(n, k) == pytest.approx(ref, abs=1e-9)

    def test_huge_n_against_mpmath(self):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 40
        for n, k in ((10**12, 500), (10**12, 10**5), (10**9, 12345)):
            ref = float(mpmath.log(mpmath.binomial(n, k)))
            assert abs(log_binom(n, k) - ref) <= 1e-9

    def test_domain(self):
        with pytest.raises(DomainError):
            log_binom(5, 6)

    def test_real_variant_matches_integer(self):
        for n, k in ((40, 7), (300, 150), (2**20, 999)):
            assert log_binom_real(float(n), float(k)) == pytest.approx(
                log_binom(n, k), rel=1e-12, abs=1e-9)
