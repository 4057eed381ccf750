"""Counter-based random streams with explicit splitting.

Every random draw in the toolkit comes from a Philox(4x64) generator keyed
by ``(seed, stream_tag)``.  Distinct tags give statistically independent
streams, so instance sampling, cover sampling, and each Markov chain never
share randomness, and any one of them can be re-derived from the seed alone.

Stream tags:
    SIGMA  - planted-set draw inside ``sample_instance``
    TESTS  - test-membership coin flips inside ``sample_instance``
    COVER  - set-membership coin flips inside ``sample_cover``
    CHAIN  - per-chain proposal/acceptance stream (one tag per chain seed)
"""

import numpy as np

SIGMA = 0x5349474D
TESTS = 0x54455354
COVER = 0x434F5645
CHAIN = 0x4348414E


def stream(seed, tag):
    """Generator for the (seed, tag) stream; 64-bit seed, 64-bit tag."""
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(tag)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
