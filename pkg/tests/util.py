"""Shared test helpers: independent brute-force oracles and instance search.

Everything here is deliberately written from the definitions (set
intersections, itertools enumeration, naive loops) rather than through the
package's optimized paths, so tests cross-check two independent routes.
"""

import math
from itertools import combinations

import numpy as np

from bgtkit import model


def int_masks(pr):
    """Per-candidate positive-test masks as Python ints."""
    out = []
    for r in range(pr.p):
        v = 0
        for w in range(pr.words):
            v |= int(pr.coverage[r, w]) << (64 * w)
        out.append(v)
    return out


def naive_hamiltonian(inst, members_global):
    """Energy from the raw instance by per-test set intersection."""
    chosen = set(int(m) for m in members_global)
    uncovered = 0
    m_total = 0
    for t, positive in zip(inst.tests, inst.outcomes):
        if not positive:
            continue
        m_total += 1
        if not chosen & set(t.tolist()):
            uncovered += 1
    return uncovered / m_total


def brute_energies(pr, k):
    """{subset: uncovered count} over all k-subsets, via itertools."""
    masks = int_masks(pr)
    out = {}
    for S in combinations(range(pr.p), k):
        o = 0
        for c in S:
            o |= masks[c]
        out[S] = pr.M - bin(o).count("1")
    return out


def find_tiny_instances(count, n=20, k=2, C=1.5, p_max=10, seed0=1,
                        seed_limit=5000, p_min=None):
    """First `count` seeds whose pruned instance is desk-enumerable."""
    found = []
    p_min = p_min if p_min is not None else k + 1
    for seed in range(seed0, seed0 + seed_limit):
        inst = model.sample_instance_k(n, k, C, seed)
        pr = model.comp_prune(inst)
        if p_min <= pr.p <= p_max and pr.M >= 1:
            found.append((inst, pr))
            if len(found) == count:
                return found
    raise AssertionError(f"only {len(found)} tiny instances in seed sweep")


def uniform_random_subset(gen, p, k):
    return tuple(sorted(gen.choice(p, size=k, replace=False).tolist()))
