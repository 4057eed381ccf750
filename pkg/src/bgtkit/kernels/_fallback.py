"""Pure-Python kernels: swap-chain stepping and exact subset enumeration.

Drop-in replacements for the compiled versions in ``_speedups``; selected at
import time by ``bgtkit.kernels`` when the extension is unavailable.  Both
backends consume identical random-number batches and perform arithmetic in
the same order, so chain traces and counts agree bit-for-bit.
"""

import math
from itertools import combinations

import numpy as np

_INV53 = 1.0 / 9007199254740992.0  # 2**-53

# scal layout shared with the compiled kernel
S_STEP, S_UNC, S_OV, S_ACC, S_HIT, S_STOP, S_RECN = range(7)


def chain_batch(indptr, indices, members, nonmembers, pos, is_member, planted,
                cover, scal, u64, beta, metropolis, record_every,
                stop_overlap, stop_at_zero, max_steps,
                rec_step, rec_unc, rec_ov, rec_acc, M):
    """Advance the swap chain by at most len(u64)//2 steps; returns steps done.

    One step: pick an ordered (member, non-member) pair uniformly among
    k*(p-k), form the swapped subset, accept with the heat-bath probability
    1/(1+exp(beta*dH)) (or min(1, exp(-beta*dH)) when ``metropolis``), where
    dH is the energy delta maintained incrementally through per-test cover
    counts.
    """
    ip = indptr.tolist()
    ix = indices.tolist()
    mem = members.tolist()
    non = nonmembers.tolist()
    po = pos.tolist()
    ism = is_member.tolist()
    pl = planted.tolist()
    cov = cover.tolist()
    us = u64.tolist()

    k = len(mem)
    pk = len(non)
    npairs = k * pk
    step = int(scal[S_STEP])
    unc = int(scal[S_UNC])
    ov = int(scal[S_OV])
    acc = int(scal[S_ACC])
    hit = int(scal[S_HIT])
    stopped = int(scal[S_STOP])
    recn = int(scal[S_RECN])
    reclim = len(rec_step)
    nsteps = len(us) // 2
    done = 0
    minv = 1.0 / M

    for t in range(nsteps):
        if stopped or step >= max_steps:
            break
        pair = us[2 * t] % npairs
        ii = pair // pk
        jj = pair - ii * pk
        i = mem[ii]
        j = non[jj]

        new_unc = unc
        for a in range(ip[i], ip[i + 1]):
            c = cov[ix[a]] - 1
            cov[ix[a]] = c
            if c == 0:
                new_unc += 1
        for a in range(ip[j], ip[j + 1]):
            c = cov[ix[a]] + 1
            cov[ix[a]] = c
            if c == 1:
                new_unc -= 1

        dh = (new_unc - unc) * minv
        if metropolis:
            pacc = 1.0 if dh <= 0.0 else math.exp(-beta * dh)
        else:
            pacc = 1.0 / (1.0 + math.exp(beta * dh))
        uf = (us[2 * t + 1] >> 11) * _INV53

        if uf < pacc:
            mem[ii] = j
            non[jj] = i
            po[i], po[j] = jj, ii
            ism[i], ism[j] = 0, 1
            unc = new_unc
            ov += pl[j] - pl[i]
            acc += 1
        else:
            for a in range(ip[j], ip[j + 1]):
                cov[ix[a]] -= 1
            for a in range(ip[i], ip[i + 1]):
                cov[ix[a]] += 1

        step += 1
        done += 1
        if stop_overlap >= 0 and ov >= stop_overlap and hit < 0:
            hit = step
            stopped = 1
        if stop_at_zero and unc == 0:
            stopped = 1
        if (step % record_every == 0 or stopped or step == max_steps) \
                and recn < reclim:
            rec_step[recn] = step
            rec_unc[recn] = unc
            rec_ov[recn] = ov
            rec_acc[recn] = acc
            recn += 1

    members[:] = mem
    nonmembers[:] = non
    pos[:] = po
    is_member[:] = ism
    cover[:] = cov
    scal[S_STEP] = step
    scal[S_UNC] = unc
    scal[S_OV] = ov
    scal[S_ACC] = acc
    scal[S_HIT] = hit
    scal[S_STOP] = stopped
    scal[S_RECN] = recn
    return done


def _to_ints(words):
    """Bit-packed uint64 rows -> arbitrary-precision Python int masks."""
    nrow, nw = words.shape
    out = []
    for r in range(nrow):
        v = 0
        for w in range(nw):
            v |= int(words[r, w]) << (64 * w)
        out.append(v)
    return out


def stratum_hist(words, group_a, group_b, la, lb, M, track_witness=False):
    """Histogram of uncovered-test counts over one overlap stratum.

    Enumerates every subset made of ``la`` ids from ``group_a`` plus ``lb``
    from ``group_b``; returns (hist, min_uncovered, witness) where
    hist[u] counts subsets leaving exactly u of the M tests uncovered.
    """
    masks = _to_ints(words)
    hist = np.zeros(M + 1, dtype=np.int64)
    best = M + 1
    witness = None
    ga = [int(c) for c in group_a]
    gb = [int(c) for c in group_b]
    for A in combinations(ga, la):
        acc_a = 0
        for c in A:
            acc_a |= masks[c]
        for B in combinations(gb, lb):
            o = acc_a
            for c in B:
                o |= masks[c]
            u = M - o.bit_count()
            hist[u] += 1
            if u < best:
                best = u
                if track_witness:
                    witness = A + B
    if witness is not None:
        witness = np.array(sorted(witness), dtype=np.int32)
    return hist, (best if best <= M else -1), witness


def max_coverage(words, k, M):
    """Exact maximum number of the M tests coverable by any k-subset.

    Returns (best_count, witness array of row ids).
    """
    masks = _to_ints(words)
    n = len(masks)
    best = -1
    witness = None
    for S in combinations(range(n), k):
        o = 0
        for c in S:
            o |= masks[c]
        cvd = o.bit_count()
        if cvd > best:
            best = cvd
            witness = S
    return best, np.array(witness, dtype=np.int32)
