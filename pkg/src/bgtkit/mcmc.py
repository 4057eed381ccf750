"""Local Markov chains on k-subsets of the pruned candidate pool.

The neighborhood graph is the Johnson graph (single-element swaps); the
target measure is pi_beta(sigma) proportional to exp(-beta * H(sigma)) with
H the uncovered-fraction energy.  Glauber (heat-bath) acceptance is
e^{-beta H'} / (e^{-beta H'} + e^{-beta H}); the Metropolis variant accepts
with min(1, e^{-beta dH}).  Exact small-scale analysis (full kernel,
stationary vectors, bottleneck ratios) lives here too.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from . import kernels, rng
from .errors import (CAPS, DomainError, FrozenChainError, NumericalError,
                     check_cap)
from .model import KSubset, hamiltonian

_BATCH = 1 << 16

UNIFORM = "uniform"
DISJOINT = "disjoint"


@dataclass(frozen=True)
class ChainConfig:
    beta: float
    max_steps: int
    init: object = UNIFORM          # UNIFORM | DISJOINT | KSubset
    stop_overlap: int = None
    record_every: int = 1
    seed: int = 0
    kernel: str = "glauber"         # or "metropolis"
    stop_at_zero: bool = False

    def __post_init__(self):
        if self.beta < 0:
            raise DomainError(f"ChainConfig: beta={self.beta} < 0")
        if self.max_steps < 1:
            raise DomainError(f"ChainConfig: max_steps={self.max_steps} < 1")
        if self.record_every < 1:
            raise DomainError("ChainConfig: record_every must be >= 1")
        if self.kernel not in ("glauber", "metropolis"):
            raise DomainError(f"ChainConfig: unknown kernel {self.kernel!r}")


@dataclass(frozen=True)
class MCMCTrace:
    steps: np.ndarray
    energies: np.ndarray
    overlaps: np.ndarray
    accepted_cum: np.ndarray
    hit_step: int                  # None when stop_overlap never reached
    final_state: KSubset
    accepted_moves: int

    def to_csv(self):
        lines = ["step,energy,overlap,accepted_cum"]
        for s, e, o, a in zip(self.steps, self.energies, self.overlaps,
                              self.accepted_cum):
            lines.append(f"{s},{e:.12g},{o},{a}")
        return "\n".join(lines) + "\n"


def beta_scaled(pr, c):
    """The threshold parameterization beta = c * k * log(p/k)."""
    k = len(pr.sigma_star_local)
    return c * k * math.log(pr.p / k)


def _init_members(pr, cfg, gen):
    k = len(pr.sigma_star_local)
    if isinstance(cfg.init, KSubset):
        members = np.array(cfg.init.members, dtype=np.int32)
        if len(members) != k or (members < 0).any() or (members >= pr.p).any():
            raise DomainError("explicit init is not a k-subset of candidates")
        return members
    if cfg.init == UNIFORM:
        return np.sort(gen.choice(pr.p, size=k, replace=False)).astype(np.int32)
    if cfg.init == DISJOINT:
        others = np.setdiff1d(np.arange(pr.p), pr.sigma_star_local)
        if len(others) < k:
            raise DomainError("DisjointFromPlanted init needs p - k >= k")
        return np.sort(gen.choice(others, size=k, replace=False)).astype(np.int32)
    raise DomainError(f"unknown init {cfg.init!r}")


class _ChainState:
    """Mutable arrays shared with the stepping kernel."""

    def __init__(self, pr, members):
        if pr.p == len(pr.sigma_star_local):
            raise FrozenChainError("p == k: the swap chain has no moves")
        self.pr = pr
        k = len(members)
        indptr, indices = pr.adjacency()
        self.indptr, self.indices = indptr, indices
        self.members = np.array(members, dtype=np.int32)
        mask = np.zeros(pr.p, dtype=bool)
        mask[self.members] = True
        self.nonmembers = np.flatnonzero(~mask).astype(np.int32)
        self.pos = np.zeros(pr.p, dtype=np.int32)
        self.pos[self.members] = np.arange(k)
        self.pos[self.nonmembers] = np.arange(pr.p - k)
        self.is_member = mask.astype(np.uint8)
        self.planted = pr.planted_flags()
        self.cover = np.zeros(pr.M, dtype=np.int32)
        for c in self.members:
            self.cover[indices[indptr[c]:indptr[c + 1]]] += 1
        self.uncovered = int((self.cover == 0).sum())
        self.overlap = int(self.planted[self.members].sum())


def run_chain(pr, cfg):
    """Run the configured chain; deterministic given (instance, cfg)."""
    gen = rng.stream(cfg.seed, rng.CHAIN)
    members = _init_members(pr, cfg, gen)
    st = _ChainState(pr, members)
    if pr.M == 0:
        raise NumericalError("run_chain: M=0 leaves the energy undefined")

    nrec = cfg.max_steps // cfg.record_every + 3
    rec_step = np.zeros(nrec, dtype=np.int64)
    rec_unc = np.zeros(nrec, dtype=np.int32)
    rec_ov = np.zeros(nrec, dtype=np.int32)
    rec_acc = np.zeros(nrec, dtype=np.int64)
    scal = np.zeros(7, dtype=np.int64)
    scal[1] = st.uncovered
    scal[2] = st.overlap
    scal[4] = -1

    stop_ov = -1 if cfg.stop_overlap is None else int(cfg.stop_overlap)
    if stop_ov >= 0 and not 0 <= stop_ov <= len(pr.sigma_star_local):
        raise DomainError("stop_overlap outside [0, k]")
    steps0 = [0]
    unc0 = [st.uncovered]
    ov0 = [st.overlap]
    if stop_ov >= 0 and st.overlap >= stop_ov:
        scal[4] = 0
        scal[5] = 1
    if cfg.stop_at_zero and st.uncovered == 0:
        scal[5] = 1

    metro = 1 if cfg.kernel == "metropolis" else 0
    while not scal[5] and scal[0] < cfg.max_steps:
        remaining = int(cfg.max_steps - scal[0])
        u64 = gen.integers(0, 2 ** 64, size=2 * min(_BATCH, remaining),
                           dtype=np.uint64)
        kernels.chain_batch(st.indptr, st.indices, st.members, st.nonmembers,
                            st.pos, st.is_member, st.planted, st.cover, scal,
                            u64, float(cfg.beta), metro,
                            int(cfg.record_every), stop_ov,
                            1 if cfg.stop_at_zero else 0, int(cfg.max_steps),
                            rec_step, rec_unc, rec_ov, rec_acc, pr.M)

    n = int(scal[6])
    steps = np.concatenate([steps0, rec_step[:n]])
    energies = np.concatenate([unc0, rec_unc[:n]]).astype(float) / pr.M
    overlaps = np.concatenate([ov0, rec_ov[:n]])
    accepted = np.concatenate([[0], rec_acc[:n]])
    hit = int(scal[4]) if scal[4] >= 0 else None
    trace = MCMCTrace(steps=steps, energies=energies, overlaps=overlaps,
                      accepted_cum=accepted, hit_step=hit,
                      final_state=KSubset(tuple(int(m) for m in st.members)),
                      accepted_moves=int(scal[3]))
    return trace


def glauber_step(state, pr, beta, gen):
    """One heat-bath step from ``state``; returns the (possibly new) KSubset."""
    k = len(state)
    if pr.p <= k:
        raise FrozenChainError("p == k: the swap chain has no moves")
    members = list(state.members)
    inside = set(members)
    outside = [c for c in range(pr.p) if c not in inside]
    u = gen.integers(0, 2 ** 64, size=2, dtype=np.uint64)
    pair = int(u[0]) % (k * (pr.p - k))
    i = members[pair // (pr.p - k)]
    j = outside[pair % (pr.p - k)]
    proposal = KSubset(tuple(m for m in members if m != i) + (j,))
    h_old = hamiltonian(pr, state)
    h_new = hamiltonian(pr, proposal)
    pacc = math.exp(-beta * h_new) / (math.exp(-beta * h_new)
                                      + math.exp(-beta * h_old))
    uf = (int(u[1]) >> 11) * (1.0 / 9007199254740992.0)
    return proposal if uf < pacc else state


def run_ensemble(pr, cfg, n_chains, threads=1):
    """Independent chains with seeds cfg.seed + i, merged in seed order."""
    cfgs = [ChainConfig(beta=cfg.beta, max_steps=cfg.max_steps, init=cfg.init,
                        stop_overlap=cfg.stop_overlap,
                        record_every=cfg.record_every, seed=cfg.seed + i,
                        kernel=cfg.kernel, stop_at_zero=cfg.stop_at_zero)
            for i in range(n_chains)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(lambda c: run_chain(pr, c), cfgs))
    return [run_chain(pr, c) for c in cfgs]


# ---------------------------------------------------------------------------
# Exact small-scale analysis
# ---------------------------------------------------------------------------

def _masks(pr):
    out = []
    for r in range(pr.p):
        v = 0
        for w in range(pr.words):
            v |= int(pr.coverage[r, w]) << (64 * w)
        out.append(v)
    return out


def enumerate_states(pr, k):
    """All k-subsets with their uncovered counts (cap-checked)."""
    total = math.comb(pr.p, k)
    check_cap(total, "stationary", "k-subsets")
    masks = _masks(pr)
    states, unc = [], []
    for S in combinations(range(pr.p), k):
        o = 0
        for c in S:
            o |= masks[c]
        states.append(S)
        unc.append(pr.M - o.bit_count())
    return states, np.array(unc, dtype=np.int64)


def transition_matrix(pr, beta, kind="glauber"):
    """Exact swap-chain kernel as a sparse CSR matrix plus the state list."""
    k = len(pr.sigma_star_local)
    states, unc = enumerate_states(pr, k)
    S = len(states)
    check_cap(S * (k * (pr.p - k) + 1), "kernel_entries", "kernel entries")
    index = {s: i for i, s in enumerate(states)}
    H = unc / pr.M
    base = 1.0 / (k * (pr.p - k))
    rows, cols, vals = [], [], []
    for i, s in enumerate(states):
        inside = set(s)
        hold = 1.0
        for a in s:
            for b in range(pr.p):
                if b in inside:
                    continue
                t = tuple(sorted([x for x in s if x != a] + [b]))
                j = index[t]
                if kind == "glauber":
                    w = base * math.exp(-beta * H[j]) / (
                        math.exp(-beta * H[j]) + math.exp(-beta * H[i]))
                else:
                    w = base * min(1.0, math.exp(-beta * (H[j] - H[i])))
                rows.append(i)
                cols.append(j)
                vals.append(w)
                hold -= w
        rows.append(i)
        cols.append(i)
        vals.append(hold)
    P = sp.coo_matrix((vals, (rows, cols)), shape=(S, S)).tocsr()
    return P, states, unc


@dataclass(frozen=True)
class StationaryResult:
    states: list
    gibbs: np.ndarray
    fixed_point: np.ndarray
    max_abs_diff: float


def stationary_exact(pr, beta, tol=1e-12, max_iter=500_000):
    """Gibbs vector and the power-iteration fixed point of the exact kernel."""
    P, states, unc = transition_matrix(pr, beta, kind="glauber")
    w = np.exp(-beta * (unc - unc.min()) / pr.M)
    gibbs = w / w.sum()
    v = np.full(len(states), 1.0 / len(states))
    for _ in range(max_iter):
        nxt = v @ P
        if np.abs(nxt - v).sum() <= tol:
            v = nxt
            break
        v = nxt
    else:
        raise NumericalError("stationary_exact: power iteration did not "
                             f"converge to {tol} in {max_iter} iterations")
    v = np.asarray(v).ravel()
    v /= v.sum()
    return StationaryResult(states=states, gibbs=gibbs, fixed_point=v,
                            max_abs_diff=float(np.abs(v - gibbs).max()))


def bottleneck_ratio(pr, beta, eps1):
    """pi_beta(boundary of B)/pi_beta(B) for B = {overlap <= floor(eps1 k)}.

    The boundary stratum is exactly overlap == floor(eps1 k): any such
    subset has a one-swap move raising its overlap.  Computed by exact
    stratum enumeration grouped by overlap.
    """
    if not 0.0 < eps1 < 1.0:
        raise DomainError(f"bottleneck_ratio: eps1={eps1} outside (0,1)")
    k = len(pr.sigma_star_local)
    l0 = int(math.floor(eps1 * k))
    planted = pr.sigma_star_local.astype(np.int32)
    others = np.setdiff1d(np.arange(pr.p), planted).astype(np.int32)
    total = 0.0
    boundary = 0.0
    nonempty = False
    for l in range(l0 + 1):
        if k - l > len(others):
            continue
        check_cap(math.comb(k, l) * math.comb(len(others), k - l),
                  "stratum", "stratum subsets")
        hist, _, _ = kernels.stratum_hist(pr.coverage, planted, others,
                                          l, k - l, pr.M)
        if hist.sum() == 0:
            continue
        nonempty = True
        weights = float(np.sum(hist * np.exp(-beta * np.arange(pr.M + 1)
                                             / pr.M)))
        total += weights
        if l == l0:
            boundary = weights
    if not nonempty or total == 0.0:
        raise NumericalError("bottleneck_ratio: B is empty")
    return boundary / total
