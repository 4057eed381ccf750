"""Scalar information-theoretic primitives.

Everything downstream (instance scales, first-moment equations, region
checks, tail bounds) reduces to binary entropy, its left-branch inverse,
two-point KL divergence, and log-binomials.  All internal logarithms are
natural; bits appear only through ``binary_entropy`` / ``entropy_inv_left``.
"""

import enum
import math

from .errors import DomainError

LOG2 = math.log(2.0)

_INV_TOL = 1e-12
_INV_MAX_ITER = 200


class TailSide(enum.Enum):
    LowerTail = "lower"
    UpperTail = "upper"


def binary_entropy(x):
    """h2(x) = -x log2 x - (1-x) log2(1-x), with 0 log 0 = 0. In bits."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"binary_entropy: x={x} outside [0,1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def natural_entropy(x):
    """h(x) = log(2) * h2(x), the natural-log entropy."""
    return LOG2 * binary_entropy(x)


def entropy_inv_left(v):
    """Unique x in [0, 1/2] with h2(x) = v, by bisection to 1e-12.

    h2 is strictly increasing on [0, 1/2], so plain bisection is exact-safe.
    """
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"entropy_inv_left: v={v} outside [0,1]")
    if v == 0.0:
        return 0.0
    if v == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    for _ in range(_INV_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < v:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _INV_TOL:
            break
    return 0.5 * (lo + hi)


def kl_div(q1, q2):
    """Two-point KL divergence D(q1 || q2) in nats.

    Conventions: 0 log(0/x) = 0; the divergence is +inf when q2 puts zero
    mass where q1 does not (q2 in {0,1} with q1 on the open side).
    """
    if not (0.0 <= q1 <= 1.0 and 0.0 <= q2 <= 1.0):
        raise DomainError(f"kl_div: ({q1}, {q2}) outside [0,1]^2")
    total = 0.0
    if q1 > 0.0:
        if q2 == 0.0:
            return math.inf
        total += q1 * math.log(q1 / q2)
    if q1 < 1.0:
        if q2 == 1.0:
            return math.inf
        total += (1.0 - q1) * math.log((1.0 - q1) / (1.0 - q2))
    return total


def h_c(C):
    """h2^{-1}(2 - 2/C) on the left branch, for C in (1, 2]."""
    if not 1.0 < C <= 2.0:
        raise DomainError(f"h_c: C={C} outside (1,2]")
    return entropy_inv_left(2.0 - 2.0 / C)


# ---------------------------------------------------------------------------
# Log-binomials
# ---------------------------------------------------------------------------

# Stirling correction J(z) = lgamma(z+1) - [(z+1/2) log z - z + log(2 pi)/2];
# the truncated Bernoulli series below is accurate to <1e-18 for z >= 64.
_STIRLING = (
    (1.0 / 12.0, 1),
    (-1.0 / 360.0, 3),
    (1.0 / 1260.0, 5),
    (-1.0 / 1680.0, 7),
    (1.0 / 1188.0, 9),
)


def _stirling_j(z):
    inv = 1.0 / z
    return sum(c * inv**p for c, p in _STIRLING)


def _log_binom_stirling(n, k):
    """log C(n,k) = k log(n/k) - (n-k+1/2) log1p(-k/n) - log(2 pi k)/2 + dJ.

    Rearranged so no intermediate exceeds the result scale, avoiding the
    cancellation that ruins a naive lgamma difference for large n.
    Requires min(k, n-k) >= 64 so the Bernoulli tail is negligible.
    """
    m = n - k
    return (k * math.log(n / k)
            - (m + 0.5) * math.log1p(-k / n)
            - 0.5 * math.log(2.0 * math.pi * k)
            + _stirling_j(n) - _stirling_j(k) - _stirling_j(m))


def log_binom(n, k):
    """log C(n, k) in nats for integers 0 <= k <= n.

    Exact big-integer arithmetic for small k, Stirling otherwise.
    Absolute error <= 1e-9 through n = 10**12 wherever the result is
    representable to that precision (one float64 ulp beyond).
    """
    n = int(n)
    k = int(k)
    if k < 0 or n < 0 or k > n:
        raise DomainError(f"log_binom: need 0 <= k <= n, got n={n}, k={k}")
    k = min(k, n - k)
    if k == 0:
        return 0.0
    if k <= 64:
        return math.log(math.comb(n, k))
    return _log_binom_stirling(float(n), float(k))


def log_binom_real(n, m):
    """Generalized log C(n, m) via log-gamma for real 0 <= m <= n.

    Supports the continuous profile evaluations where n and m are
    real-valued scale surrogates rather than counts.  For large n the
    lgamma difference is rearranged so no intermediate exceeds the result
    scale (a naive difference loses all precision once lgamma(n) outgrows
    the 52-bit mantissa).
    """
    if m < 0 or m > n:
        raise DomainError(f"log_binom_real: need 0 <= m <= n, got n={n}, m={m}")
    m = min(m, n - m)
    if m == 0:
        return 0.0
    if n <= 1e6:
        return (math.lgamma(n + 1.0) - math.lgamma(m + 1.0)
                - math.lgamma(n - m + 1.0))
    if m >= 64.0:
        return _log_binom_stirling(n, m)
    # small m, huge n: lgamma(n+1) - lgamma(n-m+1) done cancellation-free
    head = (-(n - m + 0.5) * math.log1p(-m / n) + m * math.log(n) - m
            + _stirling_j(n) - _stirling_j(n - m))
    return head - math.lgamma(m + 1.0)


# ---------------------------------------------------------------------------
# Binomial tails
# ---------------------------------------------------------------------------

def binom_tail_bounds(n, pr, k, side):
    """Chernoff-KL sandwich for a Binomial(n, pr) tail at k.

    Returns ``(lower, upper)`` with
        lower = e^{-n D(k/n || pr)} / (3 sqrt(n)),  upper = e^{-n D(k/n || pr)}.
    The sandwich brackets P(X <= k) for k <= n*pr (LowerTail) and
    P(X >= k) for k >= n*pr (UpperTail); on the opposite side of the mean
    the exact tail is near 1 and only the trivial bound applies.
    """
    n = int(n)
    k = int(k)
    if n < 1:
        raise DomainError(f"binom_tail_bounds: n={n} must be positive")
    if not 0.0 < pr < 1.0:
        raise DomainError(f"binom_tail_bounds: pr={pr} outside (0,1)")
    if not 0 <= k <= n:
        raise DomainError(f"binom_tail_bounds: k={k} outside [0,{n}]")
    if not isinstance(side, TailSide):
        raise DomainError(f"binom_tail_bounds: side={side!r} is not a TailSide")
    upper = math.exp(-n * kl_div(k / n, pr))
    return upper / (3.0 * math.sqrt(n)), upper


_EXACT_CDF_MAX_N = 10_000


def binom_cdf_exact(n, pr, k):
    """Exact P(Binomial(n, pr) <= k) by direct log-space summation, n <= 1e4.

    Independent of the bound formulas above; serves as their test oracle.
    """
    n = int(n)
    k = int(k)
    if not 1 <= n <= _EXACT_CDF_MAX_N:
        raise DomainError(f"binom_cdf_exact: n={n} outside [1, {_EXACT_CDF_MAX_N}]")
    if not 0.0 < pr < 1.0:
        raise DomainError(f"binom_cdf_exact: pr={pr} outside (0,1)")
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    lp, lq = math.log(pr), math.log1p(-pr)
    logs = [log_binom(n, i) + i * lp + (n - i) * lq for i in range(k + 1)]
    peak = max(logs)
    return math.exp(peak) * math.fsum(math.exp(v - peak) for v in logs)


def binom_tail_exact(n, pr, k, side):
    """Exact tail matching the orientation of ``binom_tail_bounds``."""
    if side is TailSide.LowerTail:
        return binom_cdf_exact(n, pr, k)
    if side is TailSide.UpperTail:
        return 1.0 - binom_cdf_exact(n, pr, k - 1)
    raise DomainError(f"binom_tail_exact: side={side!r} is not a TailSide")
