# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: swap-chain stepping and exact subset enumeration.

Semantics mirror ``_fallback`` exactly (same RNG consumption, same
arithmetic order), so both backends produce identical traces and counts.
"""

import numpy as np

from libc.math cimport exp

cimport numpy as cnp

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

cdef double _INV53 = 1.0 / 9007199254740992.0

S_STEP, S_UNC, S_OV, S_ACC, S_HIT, S_STOP, S_RECN = range(7)


def chain_batch(cnp.int64_t[::1] indptr, cnp.int32_t[::1] indices,
                cnp.int32_t[::1] members, cnp.int32_t[::1] nonmembers,
                cnp.int32_t[::1] pos, cnp.uint8_t[::1] is_member,
                cnp.uint8_t[::1] planted, cnp.int32_t[::1] cover,
                cnp.int64_t[::1] scal, cnp.uint64_t[::1] u64,
                double beta, int metropolis, long long record_every,
                long long stop_overlap, int stop_at_zero, long long max_steps,
                cnp.int64_t[::1] rec_step, cnp.int32_t[::1] rec_unc,
                cnp.int32_t[::1] rec_ov, cnp.int64_t[::1] rec_acc,
                long long M):
    cdef long long k = members.shape[0]
    cdef long long pk = nonmembers.shape[0]
    cdef long long npairs = k * pk
    cdef long long step = scal[0]
    cdef long long unc = scal[1]
    cdef long long ov = scal[2]
    cdef long long acc = scal[3]
    cdef long long hit = scal[4]
    cdef long long stopped = scal[5]
    cdef long long recn = scal[6]
    cdef long long reclim = rec_step.shape[0]
    cdef long long nsteps = u64.shape[0] // 2
    cdef long long done = 0
    cdef double minv = 1.0 / M
    cdef long long t, pair, ii, jj, new_unc, a
    cdef int i, j, c
    cdef double dh, pacc, uf

    with nogil:
        for t in range(nsteps):
            if stopped or step >= max_steps:
                break
            pair = <long long>(u64[2 * t] % <unsigned long long>npairs)
            ii = pair // pk
            jj = pair - ii * pk
            i = members[ii]
            j = nonmembers[jj]

            new_unc = unc
            for a in range(indptr[i], indptr[i + 1]):
                c = cover[indices[a]] - 1
                cover[indices[a]] = c
                if c == 0:
                    new_unc += 1
            for a in range(indptr[j], indptr[j + 1]):
                c = cover[indices[a]] + 1
                cover[indices[a]] = c
                if c == 1:
                    new_unc -= 1

            dh = (new_unc - unc) * minv
            if metropolis:
                pacc = 1.0 if dh <= 0.0 else exp(-beta * dh)
            else:
                pacc = 1.0 / (1.0 + exp(beta * dh))
            uf = (u64[2 * t + 1] >> 11) * _INV53

            if uf < pacc:
                members[ii] = j
                nonmembers[jj] = i
                pos[i] = <int>jj
                pos[j] = <int>ii
                is_member[i] = 0
                is_member[j] = 1
                unc = new_unc
                ov += planted[j] - planted[i]
                acc += 1
            else:
                for a in range(indptr[j], indptr[j + 1]):
                    cover[indices[a]] -= 1
                for a in range(indptr[i], indptr[i + 1]):
                    cover[indices[a]] += 1

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
                rec_unc[recn] = <int>unc
                rec_ov[recn] = <int>ov
                rec_acc[recn] = acc
                recn += 1

    scal[0] = step
    scal[1] = unc
    scal[2] = ov
    scal[3] = acc
    scal[4] = hit
    scal[5] = stopped
    scal[6] = recn
    return done


cdef inline long long _popcount_row(cnp.uint64_t[::1] buf, Py_ssize_t off,
                                    Py_ssize_t W) nogil:
    cdef Py_ssize_t w
    cdef long long s = 0
    for w in range(W):
        s += __builtin_popcountll(buf[off + w])
    return s


def stratum_hist(cnp.uint64_t[:, ::1] words, cnp.int32_t[::1] group_a,
                 cnp.int32_t[::1] group_b, int la, int lb, long long M,
                 track_witness=False):
    cdef Py_ssize_t W = words.shape[1]
    cdef int Ka = <int>group_a.shape[0]
    cdef int Kb = <int>group_b.shape[0]
    cdef cnp.int64_t[::1] hist = np.zeros(M + 1, dtype=np.int64)
    cdef int track = 1 if track_witness else 0

    # selection odometers and prefix-OR stacks for the two segments
    cdef cnp.int32_t[::1] ca = np.zeros(max(la, 1), dtype=np.int32)
    cdef cnp.int32_t[::1] cb = np.zeros(max(lb, 1), dtype=np.int32)
    cdef cnp.uint64_t[::1] ora = np.zeros((la + 1) * W, dtype=np.uint64)
    cdef cnp.uint64_t[::1] orb = np.zeros((lb + 1) * W, dtype=np.uint64)
    cdef cnp.int32_t[::1] wit = np.zeros(max(la + lb, 1), dtype=np.int32)

    cdef long long best = M + 1
    cdef long long u
    cdef int ia, ib, row, d
    cdef Py_ssize_t w
    cdef bint more_a, more_b

    if la > Ka or lb > Kb:
        return np.asarray(hist), -1, None

    with nogil:
        for d in range(la):
            ca[d] = d
        more_a = True
        while more_a:
            # rebuild A prefix ORs (outer loop is cold)
            for d in range(la):
                row = group_a[ca[d]]
                for w in range(W):
                    ora[(d + 1) * W + w] = ora[d * W + w] | words[row, w]

            for d in range(lb):
                cb[d] = d
            more_b = True
            while more_b:
                for d in range(lb):
                    row = group_b[cb[d]]
                    for w in range(W):
                        orb[(d + 1) * W + w] = orb[d * W + w] | words[row, w]
                # leaf: OR of both segments
                u = 0
                for w in range(W):
                    u += __builtin_popcountll(ora[la * W + w] | orb[lb * W + w])
                u = M - u
                hist[u] += 1
                if u < best:
                    best = u
                    if track:
                        for d in range(la):
                            wit[d] = group_a[ca[d]]
                        for d in range(lb):
                            wit[la + d] = group_b[cb[d]]

                # advance B selection
                ib = lb - 1
                while ib >= 0 and cb[ib] == Kb - lb + ib:
                    ib -= 1
                if ib < 0:
                    more_b = False
                else:
                    cb[ib] += 1
                    for d in range(ib + 1, lb):
                        cb[d] = cb[d - 1] + 1

            # advance A selection
            ia = la - 1
            while ia >= 0 and ca[ia] == Ka - la + ia:
                ia -= 1
            if ia < 0:
                more_a = False
            else:
                ca[ia] += 1
                for d in range(ia + 1, la):
                    ca[d] = ca[d - 1] + 1

    if best > M:
        return np.asarray(hist), -1, None
    witness = None
    if track:
        witness = np.sort(np.asarray(wit[:la + lb]).copy())
    return np.asarray(hist), best, witness


def max_coverage(cnp.uint64_t[:, ::1] words, int k, long long M):
    cdef Py_ssize_t W = words.shape[1]
    cdef int n = <int>words.shape[0]
    cdef cnp.int32_t[::1] sel = np.zeros(max(k, 1), dtype=np.int32)
    cdef cnp.uint64_t[::1] ors = np.zeros((k + 1) * W, dtype=np.uint64)
    cdef cnp.int32_t[::1] wit = np.zeros(max(k, 1), dtype=np.int32)
    cdef long long best = -1
    cdef long long cvd
    cdef int d, i, lo
    cdef Py_ssize_t w
    cdef bint more = True

    with nogil:
        for d in range(k):
            sel[d] = d
        lo = 0  # lowest stack level whose OR needs a rebuild
        while more:
            for d in range(lo, k):
                i = sel[d]
                for w in range(W):
                    ors[(d + 1) * W + w] = ors[d * W + w] | words[i, w]
            cvd = _popcount_row(ors, k * W, W)
            if cvd > best:
                best = cvd
                for d in range(k):
                    wit[d] = sel[d]

            d = k - 1
            while d >= 0 and sel[d] == n - k + d:
                d -= 1
            if d < 0:
                more = False
            else:
                sel[d] += 1
                for i in range(d + 1, k):
                    sel[i] = sel[i - 1] + 1
                lo = d

    return best, np.asarray(wit[:k]).copy()
