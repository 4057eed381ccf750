"""Random MAX k-set cover: sampling, exact/greedy optima, flatness.

M target sets over a universe of P elements, each element joining each set
independently with the probability q solving (1-q)^k = 1/2, so a uniform
k-subset covers each set with probability exactly 1/2.  Phi_k is the best
covered fraction over all k-subsets; its large-instance limit is
1 - h2^{-1}(2 - 2/C).  The flatness layer measures how sharply sub-subset
uncovered counts concentrate around their conditional means.
"""

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import kernels, rng
from .errors import CAPS, DomainError, check_cap
from .mathcore import h_c
from .model import KSubset, assignment_prob, deterministic_scales


@dataclass(frozen=True)
class CoverInstance:
    universe_size: int               # P
    num_sets: int                    # M
    k: int
    q: float
    sets: np.ndarray                 # uint64[M, ceil(P/64)] rows over universe
    seed: int
    _elem: np.ndarray = field(default=None, compare=False, repr=False)

    @property
    def P(self):
        return self.universe_size

    @property
    def M(self):
        return self.num_sets

    def sets_dense(self):
        bits = np.unpackbits(self.sets.view(np.uint8), axis=1,
                             bitorder="little")
        return bits[:, :self.P].astype(bool)

    def element_masks(self):
        """uint64[P, ceil(M/64)]: per-element bitset of the sets it is in."""
        elem = object.__getattribute__(self, "_elem")
        if elem is None:
            dense = self.sets_dense().T  # (P, M)
            wm = max(1, (self.M + 63) // 64)
            padded = np.zeros((self.P, wm * 64), dtype=np.uint8)
            padded[:, :self.M] = dense
            elem = np.ascontiguousarray(
                np.packbits(padded, axis=1, bitorder="little").view(np.uint64))
            object.__setattr__(self, "_elem", elem)
        return elem

    def element_ints(self):
        masks = self.element_masks()
        out = []
        for r in range(self.P):
            v = 0
            for w in range(masks.shape[1]):
                v |= int(masks[r, w]) << (64 * w)
            out.append(v)
        return out


def sample_cover(P, M, k, seed):
    """i.i.d. Bernoulli(q) membership with q = 1 - 2^(-1/k)."""
    if P < 1 or M < 1 or k < 1:
        raise DomainError("sample_cover: P, M, k must all be >= 1")
    q = assignment_prob(k)
    gen = rng.stream(seed, rng.COVER)
    dense = gen.random((M, P)) < q
    wp = max(1, (P + 63) // 64)
    padded = np.zeros((M, wp * 64), dtype=np.uint8)
    padded[:, :P] = dense
    rows = np.ascontiguousarray(
        np.packbits(padded, axis=1, bitorder="little").view(np.uint64))
    return CoverInstance(universe_size=P, num_sets=M, k=k, q=q, sets=rows,
                         seed=int(seed))


def cover_scales_from_model(n, alpha, C):
    """(P, M, k) derived from group-testing scale surrogates: the universe
    plays the non-infected candidate pool, so P = round(p_det) - k."""
    k = int(math.floor(n ** alpha))
    if k < 1:
        raise DomainError("cover_scales_from_model: floor(n^alpha) < 1")
    m_det, p_det = deterministic_scales(n, k, C)
    return int(round(p_det)) - k, int(round(m_det)), k


def covered_count(inst, members):
    masks = inst.element_masks()
    rows = masks[np.asarray(members, dtype=np.int64)]
    if len(rows) == 0:
        return 0
    return int(np.bitwise_count(np.bitwise_or.reduce(rows, axis=0)).sum())


def phi_k_exact(inst):
    """Exact max covered fraction and one argmax witness (cap-checked)."""
    check_cap(math.comb(inst.P, inst.k), "subsets", "k-subsets")
    best, wit = kernels.max_coverage(inst.element_masks(), inst.k, inst.M)
    return best / inst.M, KSubset(tuple(int(c) for c in wit))


def phi_k_greedy(inst):
    """Greedy max-coverage lower bound on Phi_k."""
    masks = inst.element_ints()
    chosen = []
    acc = 0
    for _ in range(min(inst.k, inst.P)):
        gain, pick = -1, None
        for e in range(inst.P):
            if e in chosen:
                continue
            g = (acc | masks[e]).bit_count()
            if g > gain:
                gain, pick = g, e
        chosen.append(pick)
        acc |= masks[pick]
    return acc.bit_count() / inst.M, KSubset(tuple(chosen))


def random_guess_mean(inst, trials, seed=0):
    """Empirical mean covered fraction of uniform k-subsets (the 1/2 line)."""
    gen = rng.stream(seed, rng.COVER ^ 0xFF)
    vals = np.empty(trials)
    for t in range(trials):
        members = gen.choice(inst.P, size=inst.k, replace=False)
        vals[t] = covered_count(inst, members) / inst.M
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(trials))


def phi_k_limit(C):
    """Limiting covered fraction 1 - h2^{-1}(2 - 2/C)."""
    if not 1.0 < C <= 2.0:
        raise DomainError(f"phi_k_limit: C={C} outside (1,2]")
    return 1.0 - h_c(C)


# ---------------------------------------------------------------------------
# Flatness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlatnessParams:
    y: float
    c_dl: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.y < 0.5:
            raise DomainError(f"FlatnessParams: y={self.y} outside (0,1/2)")
        if self.c_dl < 0.0:
            raise DomainError("FlatnessParams: c_dl must be >= 0")


def subset_props(k, l, y):
    """(p_l, y_(l)) = (2^{1-l/k} - 1, y + (2^{1-l/k} - 1)(1-y)).

    p_l is the chance a size-l sub-subset misses a set its parent covers;
    y_(l) the conditional mean uncovered fraction of the sub-subset.
    """
    if not 0 <= l <= k:
        raise DomainError(f"subset_props: l={l} outside [0,{k}]")
    if not 0.0 < y < 0.5:
        raise DomainError(f"subset_props: y={y} outside (0,1/2)")
    p_l = 2.0 ** (1.0 - l / k) - 1.0
    return p_l, y + p_l * (1.0 - y)


def flat_radius(k, l, y, M, c_dl):
    """D_l = sqrt(6 p_l (1-p_l) (1-y) M [log C(k,l) + (1+c) log k])."""
    p_l, _ = subset_props(k, l, y)
    bracket = math.log(math.comb(k, l)) + (1.0 + c_dl) * math.log(k)
    return math.sqrt(6.0 * p_l * (1.0 - p_l) * (1.0 - y) * M * bracket)


def _subset_uncovered(inst, members):
    """Uncovered counts for all 2^len(members) sub-subsets, by subset DP."""
    masks = inst.element_ints()
    mem = list(members)
    nsub = 1 << len(mem)
    check_cap(nsub, "flat", "sub-subsets")
    ors = [0] * nsub
    for s in range(1, nsub):
        low = s & (-s)
        ors[s] = ors[s ^ low] | masks[mem[low.bit_length() - 1]]
    return ors


def is_flat(inst, sigma, y, c_dl):
    """True when every sub-subset's uncovered count sits within D_l of its
    conditional mean M*y_(l) (intersected with [0, M])."""
    members = sigma.members if isinstance(sigma, KSubset) else tuple(sigma)
    k = len(members)
    radii = [flat_radius(k, l, y, inst.M, c_dl) for l in range(k + 1)]
    means = [inst.M * subset_props(k, l, y)[1] for l in range(k + 1)]
    for s, o in enumerate(_subset_uncovered(inst, members)):
        l = s.bit_count()
        unc = inst.M - o.bit_count()
        lo = max(0.0, means[l] - radii[l])
        hi = min(float(inst.M), means[l] + radii[l])
        if not lo <= unc <= hi:
            return False
    return True


@dataclass(frozen=True)
class FlatCounts:
    target: int        # the conditioned uncovered count round(y M)
    flat: int          # flat subsets leaving exactly `target` uncovered
    exact: int         # all subsets leaving exactly `target` uncovered
    at_most: int       # all subsets leaving at most `target` uncovered


def count_flat(inst, k, y, c_dl):
    """Count flat k-subsets with exactly round(yM) sets uncovered, plus the
    plain exact and at-most counts for the Y <= Z comparison."""
    check_cap(math.comb(inst.P, k), "subsets", "k-subsets")
    target = int(round(y * inst.M))
    masks = inst.element_ints()
    flat = exact = at_most = 0
    for S in combinations(range(inst.P), k):
        o = 0
        for c in S:
            o |= masks[c]
        unc = inst.M - o.bit_count()
        if unc <= target:
            at_most += 1
        if unc == target:
            exact += 1
            if is_flat(inst, S, y, c_dl):
                flat += 1
    return FlatCounts(target=target, flat=flat, exact=exact, at_most=at_most)
