import math

import numpy as np
import pytest
from scipy.optimize import brentq

from bgtkit import model
from bgtkit.errors import DomainError, UndefinedEnergyError
from bgtkit.model import (GTInstance, KSubset, assignment_prob, comp_prune,
                          deterministic_scales, hamiltonian, num_tests,
                          overlap, sample_instance, sample_instance_k)

from util import naive_hamiltonian


class TestAssignmentProb:
    def test_k1(self):
        assert assignment_prob(1) == 0.5

    def test_root_oracle(self):
        for k in (2, 10, 37):
            ref = brentq(lambda q: (1 - q) ** k - 0.5, 0.0, 1.0, xtol=1e-15)
            assert assignment_prob(k) == pytest.approx(ref, abs=1e-12)

    def test_frozen(self):
        assert assignment_prob(2) == pytest.approx(0.2928932188134524,
                                                   abs=1e-15)
        assert assignment_prob(10) == pytest.approx(0.06696700846319259,
                                                    abs=1e-15)

    def test_defining_equation(self):
        for k in range(1, 50):
            assert abs((1 - assignment_prob(k)) ** k - 0.5) < 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            assignment_prob(0)


class TestNumTests:
    def test_small_exact(self):
        # floor(1.5 * log2 C(100,2)) with the exact integer binomial
        assert num_tests(100, 2, 1.5) == 18

    def test_minimal(self):
        assert num_tests(2, 1, 1.0 + 1e-9) == 1

    def test_against_comb_oracle(self):
        for n, k, C in ((1000, 10, 1.2), (500, 5, 1.9), (64, 32, 1.3)):
            ref = math.floor(C * math.log2(math.comb(n, k)))
            assert num_tests(n, k, C) == ref

    def test_domain(self):
        with pytest.raises(DomainError):
            num_tests(10, 0, 1.5)
        with pytest.raises(DomainError):
            num_tests(10, 2, 0.9)


class TestSampling:
    def test_outcome_consistency(self):
        inst = sample_instance_k(60, 3, 1.5, seed=5)
        star = set(inst.sigma_star.tolist())
        assert len(star) == 3
        assert all(0 <= i < 60 for i in star)
        for t, pos in zip(inst.tests, inst.outcomes):
            assert bool(star & set(t.tolist())) == bool(pos)
        assert inst.N == num_tests(60, 3, 1.5)

    def test_alpha_form(self):
        inst = sample_instance(100, 0.3, 1.5, seed=1)
        assert inst.k == math.floor(100 ** 0.3)

    def test_determinism(self):
        a = sample_instance_k(50, 2, 1.4, seed=99)
        b = sample_instance_k(50, 2, 1.4, seed=99)
        assert a.to_json() == b.to_json()
        assert a.to_binary() == b.to_binary()

    def test_seed_changes_instance(self):
        a = sample_instance_k(50, 2, 1.4, seed=1)
        b = sample_instance_k(50, 2, 1.4, seed=2)
        assert a.to_json() != b.to_json()

    def test_positive_fraction_near_half(self):
        # each test is positive w.p. 1 - (1-q)^k = 1/2
        tot = pos = 0
        for seed in range(300):
            inst = sample_instance_k(200, 4, 1.5, seed)
            tot += inst.N
            pos += inst.positive_count()
        assert abs(pos / tot - 0.5) < 0.02

    def test_rejects_large_C(self):
        with pytest.raises(DomainError):
            sample_instance_k(100, 2, 2.0, seed=0)

    def test_rejects_bad_alpha(self):
        with pytest.raises(DomainError):
            sample_instance(10, 0.0, 1.5, seed=0)
        with pytest.raises(DomainError):
            sample_instance(10, 1.0, 1.5, seed=0)


class TestCompPrune:
    def test_negative_participants_dropped(self):
        inst = sample_instance_k(40, 2, 1.5, seed=3)
        pr = comp_prune(inst)
        dropped = set(range(40)) - set(pr.candidates.tolist())
        negatives = set()
        for t, pos in zip(inst.tests, inst.outcomes):
            if not pos:
                negatives |= set(t.tolist())
        assert dropped == negatives

    def test_planted_survive_and_cover(self):
        for seed in range(10):
            inst = sample_instance_k(80, 3, 1.6, seed)
            pr = comp_prune(inst)
            assert len(pr.sigma_star_local) == 3
            assert pr.p >= 3
            assert pr.M <= inst.N
            assert hamiltonian(pr, KSubset(tuple(pr.sigma_star_local))) == 0.0

    def test_p_concentration_window(self):
        # Monte Carlo check of the candidate-count window at eta = 0.2
        n, k, C, eta = 1000, 10, 1.5, 0.2
        lo = (1 - k ** -eta) * n * (k / n) ** ((C / 2) * (1 + k ** -eta))
        hi = (1 + k ** -eta) * n * (k / n) ** ((C / 2) * (1 - k ** -eta))
        viol = 0
        for seed in range(50):
            pr = comp_prune(sample_instance_k(n, k, C, seed))
            viol += not lo <= pr.p <= hi
        assert viol <= 2


class TestHamiltonian:
    def test_planted_zero(self):
        inst = sample_instance_k(50, 2, 1.5, seed=8)
        pr = comp_prune(inst)
        assert hamiltonian(pr, KSubset(tuple(pr.sigma_star_local))) == 0.0

    def test_empty_coverage_gives_one(self):
        inst = sample_instance_k(50, 2, 1.5, seed=8)
        pr = comp_prune(inst)
        cov_counts = np.bitwise_count(pr.coverage).sum(axis=1)
        empties = np.flatnonzero(cov_counts == 0)
        if len(empties) >= 2:
            assert hamiltonian(pr, KSubset(tuple(empties[:2]))) == 1.0

    def test_matches_naive_loop(self):
        gen = np.random.default_rng(0)
        for seed in range(8):
            inst = sample_instance_k(30, 2, 1.5, seed)
            pr = comp_prune(inst)
            for _ in range(5):
                members = gen.choice(pr.p, size=2, replace=False)
                ref = naive_hamiltonian(inst, pr.candidates[members])
                assert hamiltonian(pr, tuple(members)) == pytest.approx(
                    ref, abs=1e-12)

    def test_monotone_under_extension(self):
        gen = np.random.default_rng(1)
        inst = sample_instance_k(40, 3, 1.5, seed=2)
        pr = comp_prune(inst)
        for _ in range(20):
            base = gen.choice(pr.p, size=3, replace=False)
            extra = gen.choice(np.setdiff1d(np.arange(pr.p), base))
            h1 = hamiltonian(pr, tuple(base))
            h2 = hamiltonian(pr, tuple(base) + (int(extra),))
            assert h2 <= h1 + 1e-15

    def test_undefined_when_no_positive_tests(self):
        inst = sample_instance_k(40, 3, 1.5, seed=2)
        pr = comp_prune(inst)
        empty = model.PrunedInstance(
            M=0, p=pr.p, candidates=pr.candidates,
            coverage=np.zeros((pr.p, 1), dtype=np.uint64),
            sigma_star_local=pr.sigma_star_local)
        with pytest.raises(UndefinedEnergyError):
            hamiltonian(empty, KSubset(tuple(pr.sigma_star_local)))


class TestOverlap:
    def test_extremes(self):
        inst = sample_instance_k(60, 3, 1.5, seed=4)
        pr = comp_prune(inst)
        star = KSubset(tuple(pr.sigma_star_local))
        assert overlap(star, pr) == 3
        others = np.setdiff1d(np.arange(pr.p), pr.sigma_star_local)
        if len(others) >= 3:
            assert overlap(KSubset(tuple(others[:3])), pr) == 0

    def test_matches_set_oracle(self):
        gen = np.random.default_rng(3)
        inst = sample_instance_k(60, 3, 1.5, seed=4)
        pr = comp_prune(inst)
        star = set(pr.sigma_star_local.tolist())
        for _ in range(25):
            s = tuple(gen.choice(pr.p, size=3, replace=False).tolist())
            assert overlap(KSubset(s), pr) == len(star & set(s))


class TestScalesAndSerialization:
    def test_deterministic_scales(self):
        m_det, p_det = deterministic_scales(100, 2, 1.5)
        assert m_det == 9.0
        assert p_det == pytest.approx(100 * 0.02 ** 0.75 + 2)

    def test_p_det_exceeds_k(self):
        _, p_det = deterministic_scales(10 ** 6, 2, 1.2)
        assert p_det > 2

    def test_json_round_trip(self):
        inst = sample_instance_k(40, 2, 1.5, seed=11)
        back = GTInstance.from_json(inst.to_json())
        assert back.to_json() == inst.to_json()

    def test_binary_round_trip(self):
        inst = sample_instance_k(40, 2, 1.5, seed=11)
        back = GTInstance.from_binary(inst.to_binary())
        assert np.array_equal(back.sigma_star, inst.sigma_star)
        assert np.array_equal(back.outcomes, inst.outcomes)
        assert all(np.array_equal(a, b)
                   for a, b in zip(back.tests, inst.tests))
        assert back.to_binary() == inst.to_binary()

    def test_binary_header(self):
        inst = sample_instance_k(40, 2, 1.5, seed=11)
        blob = inst.to_binary()
        assert blob[:4] == b"BGT1"
        assert len(blob) == 36 + inst.N * ((inst.n + 7) // 8)


class TestKSubset:
    def test_sorted_dedup(self):
        s = KSubset((3, 1, 2))
        assert s.members == (1, 2, 3)
        with pytest.raises(DomainError):
            KSubset((1, 1, 2))
