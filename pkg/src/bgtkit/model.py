"""Bernoulli group testing instances: sampling, COMP pruning, energies.

An instance draws a planted k-subset of [n] and N tests in which every
individual participates independently with probability q solving
(1-q)^k = 1/2; a test is positive iff it touches the planted set.  COMP
pruning discards every individual seen in a negative test, leaving p
candidates and M positive tests; the chain/landscape machinery works on
that pruned view through per-candidate coverage bitsets.
"""

import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import CAPS, DomainError, UndefinedEnergyError
from .mathcore import LOG2, log_binom

_BIN_MAGIC = b"BGT1"


def assignment_prob(k):
    """q with (1-q)^k = 1/2, i.e. q = 1 - 2^(-1/k)."""
    if k < 1:
        raise DomainError(f"assignment_prob: k={k} must be >= 1")
    return 1.0 - 2.0 ** (-1.0 / k)


def num_tests(n, k, C):
    """Test budget N = floor(C * log2 C(n,k))."""
    if not 1 <= k <= n:
        raise DomainError(f"num_tests: need 1 <= k <= n, got n={n}, k={k}")
    if C <= 1.0:
        raise DomainError(f"num_tests: C={C} must exceed 1")
    return int(math.floor(C * log_binom(n, k) / LOG2))


def deterministic_scales(n, k, C):
    """Asymptotic surrogates (M_det, p_det) = (N/2, n (k/n)^(C/2) + k)."""
    n_tests = num_tests(n, k, C)
    return n_tests / 2.0, n * (k / n) ** (C / 2.0) + k


@dataclass(frozen=True)
class GTInstance:
    n: int
    k: int
    alpha: float
    C: float
    q: float
    N: int
    sigma_star: np.ndarray          # sorted int64[k]
    tests: list                     # N sorted int64 index arrays
    outcomes: np.ndarray            # bool[N]
    seed: int

    def positive_count(self):
        return int(self.outcomes.sum())

    def to_json(self):
        return json.dumps({
            "n": self.n, "k": self.k, "alpha": self.alpha, "C": self.C,
            "q": self.q, "N": self.N,
            "sigma_star": self.sigma_star.tolist(),
            "tests": [t.tolist() for t in self.tests],
            "outcomes": self.outcomes.astype(int).tolist(),
            "seed": self.seed,
        })

    @staticmethod
    def from_json(text):
        d = json.loads(text)
        tests = [np.array(t, dtype=np.int64) for t in d["tests"]]
        return GTInstance(
            n=d["n"], k=d["k"], alpha=d["alpha"], C=d["C"], q=d["q"],
            N=d["N"], sigma_star=np.array(d["sigma_star"], dtype=np.int64),
            tests=tests, outcomes=np.array(d["outcomes"], dtype=bool),
            seed=d["seed"])

    def to_binary(self):
        """Compact format: magic "BGT1", LE u64 header (n,k,N,seed), then
        bit-packed membership rows (LSB-first within each byte).

        The planted set is not stored: it is re-derived from the seed via
        the documented SIGMA stream, and outcomes follow from the rows.
        """
        head = _BIN_MAGIC + struct.pack("<4Q", self.n, self.k, self.N,
                                        self.seed & 0xFFFFFFFFFFFFFFFF)
        rows = np.zeros((self.N, self.n), dtype=np.uint8)
        for j, t in enumerate(self.tests):
            rows[j, t] = 1
        return head + np.packbits(rows, axis=1, bitorder="little").tobytes()

    @staticmethod
    def from_binary(blob):
        if blob[:4] != _BIN_MAGIC:
            raise DomainError("from_binary: bad magic")
        n, k, N, seed = struct.unpack_from("<4Q", blob, 4)
        nbytes = (n + 7) // 8
        body = np.frombuffer(blob, dtype=np.uint8, offset=36)
        if body.size != N * nbytes:
            raise DomainError("from_binary: truncated membership block")
        bits = np.unpackbits(body.reshape(N, nbytes), axis=1,
                             bitorder="little")[:, :n].astype(bool)
        sigma = _draw_sigma_star(n, k, seed)
        tests = [np.flatnonzero(bits[j]).astype(np.int64) for j in range(N)]
        outcomes = bits[:, sigma].any(axis=1)
        alpha = math.log(k) / math.log(n) if n > 1 else 0.0
        C = N / (log_binom(n, k) / LOG2)
        return GTInstance(n=int(n), k=int(k), alpha=alpha, C=C,
                          q=assignment_prob(int(k)), N=int(N),
                          sigma_star=sigma, tests=tests, outcomes=outcomes,
                          seed=int(seed))


@dataclass(frozen=True)
class PrunedInstance:
    M: int
    p: int
    candidates: np.ndarray          # original ids, ascending
    coverage: np.ndarray            # uint64[p, W] bitsets over positive tests
    sigma_star_local: np.ndarray    # candidate-local indices of the planted set
    _adj: tuple = field(default=None, compare=False, repr=False)

    @property
    def words(self):
        return self.coverage.shape[1]

    def adjacency(self):
        """CSR (indptr, indices) per-candidate positive-test lists."""
        adj = object.__getattribute__(self, "_adj")
        if adj is None:
            lists = [np.flatnonzero(_word_bits(self.coverage[c], self.M))
                     for c in range(self.p)]
            indptr = np.zeros(self.p + 1, dtype=np.int64)
            indptr[1:] = np.cumsum([len(x) for x in lists])
            indices = (np.concatenate(lists).astype(np.int32)
                       if self.p else np.zeros(0, dtype=np.int32))
            adj = (indptr, indices)
            object.__setattr__(self, "_adj", adj)
        return adj

    def planted_flags(self):
        flags = np.zeros(self.p, dtype=np.uint8)
        flags[self.sigma_star_local] = 1
        return flags


def _word_bits(row, m):
    bits = np.unpackbits(row.view(np.uint8), bitorder="little")
    return bits[:m].astype(bool)


@dataclass(frozen=True)
class KSubset:
    members: tuple

    def __post_init__(self):
        mem = tuple(sorted(int(m) for m in self.members))
        if len(set(mem)) != len(mem):
            raise DomainError("KSubset: duplicate members")
        object.__setattr__(self, "members", mem)

    def __len__(self):
        return len(self.members)


def _draw_sigma_star(n, k, seed):
    gen = rng.stream(seed, rng.SIGMA)
    return np.sort(gen.choice(n, size=k, replace=False)).astype(np.int64)


def sample_instance(n, alpha, C, seed):
    """Sample an (alpha, C) instance: k = floor(n^alpha) planted infected."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"sample_instance: alpha={alpha} outside (0,1)")
    k = int(math.floor(n ** alpha))
    if k < 1:
        raise DomainError(f"sample_instance: floor(n^alpha)={k} < 1")
    return sample_instance_k(n, k, C, seed)


def sample_instance_k(n, k, C, seed):
    """Sample with an explicit k; alpha is recorded as log k / log n."""
    if not 1 <= k < n:
        raise DomainError(f"sample_instance_k: need 1 <= k < n, got k={k}")
    if not 1.0 < C < 2.0:
        raise DomainError(
            f"sample_instance_k: C={C} outside (1,2); for C >= 2 COMP alone "
            "identifies the infected set and the landscape is trivial")
    N = num_tests(n, k, C)
    need = N * n
    if need > CAPS["memory_bytes"]:
        raise DomainError(
            f"sample_instance_k: membership draw needs {need} bytes, "
            f"budget is {CAPS['memory_bytes']}")
    q = assignment_prob(k)
    sigma = _draw_sigma_star(n, k, seed)
    gen = rng.stream(seed, rng.TESTS)
    rows = gen.random((N, n)) < q
    tests = [np.flatnonzero(rows[j]).astype(np.int64) for j in range(N)]
    outcomes = rows[:, sigma].any(axis=1)
    alpha = math.log(k) / math.log(n) if n > 1 else 0.0
    return GTInstance(n=n, k=k, alpha=alpha, C=C, q=q, N=N,
                      sigma_star=sigma, tests=tests, outcomes=outcomes,
                      seed=int(seed))


def comp_prune(inst):
    """COMP: drop every individual that appears in at least one negative test.

    Survivors keep their relative order; coverage rows are bitsets over the
    positive tests.  Candidates participating in no positive test are kept
    (legal subset members with empty coverage).
    """
    in_negative = np.zeros(inst.n, dtype=bool)
    pos_tests = []
    for t, positive in zip(inst.tests, inst.outcomes):
        if positive:
            pos_tests.append(t)
        else:
            in_negative[t] = True
    candidates = np.flatnonzero(~in_negative).astype(np.int64)
    p = len(candidates)
    M = len(pos_tests)
    W = max(1, (M + 63) // 64)
    local = np.full(inst.n, -1, dtype=np.int64)
    local[candidates] = np.arange(p)
    bits = np.zeros((p, W * 64), dtype=np.uint8)
    for j, t in enumerate(pos_tests):
        rows = local[t]
        bits[rows[rows >= 0], j] = 1
    coverage = np.packbits(bits, axis=1, bitorder="little").view(np.uint64)
    coverage = np.ascontiguousarray(coverage.reshape(p, W))
    sigma_local = np.sort(local[inst.sigma_star])
    if (sigma_local < 0).any():
        raise AssertionError("COMP removed an infected individual")
    return PrunedInstance(M=M, p=p, candidates=candidates, coverage=coverage,
                          sigma_star_local=sigma_local.astype(np.int64))


def coverage_union(pr, members):
    rows = pr.coverage[np.asarray(members, dtype=np.int64)]
    return np.bitwise_or.reduce(rows, axis=0) if len(rows) else \
        np.zeros(pr.words, dtype=np.uint64)


def hamiltonian(pr, sigma):
    """Fraction of positive tests left uncovered by the k-subset sigma."""
    if pr.M == 0:
        raise UndefinedEnergyError("hamiltonian: no positive tests (M=0)")
    members = sigma.members if isinstance(sigma, KSubset) else sigma
    covered = int(np.bitwise_count(coverage_union(pr, members)).sum())
    return (pr.M - covered) / pr.M


def overlap(sigma, pr):
    """|sigma intersect planted| in candidate-local indices."""
    members = sigma.members if isinstance(sigma, KSubset) else sigma
    return int(np.isin(np.asarray(members), pr.sigma_star_local).sum())
