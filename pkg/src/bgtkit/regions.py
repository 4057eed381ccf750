"""Admissible (alpha, C) regions for the barrier machinery.

Three parameter checks gate the landscape results: curve existence
(a feasibility KL inequality), a positive discrete derivative at zero
overlap, and a pair of second-moment conditions.  The derivative check is
the binding one as alpha -> 0; its boundary in C is the critical constant
near 1.4749.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .mathcore import LOG2, binary_entropy, h_c, kl_div

_BISECT_ITERS = 200


def a_inf(alpha, C):
    """Infimum of the admissible degree-constant set:
    root of log2 * C * (a log a - a + 1) = alpha/(1-alpha) on a > 1.

    The map is 0 at a = 1 and strictly increasing for a > 1, so bisection
    applies; tolerance 1e-12.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"a_inf: alpha={alpha} outside (0,1)")
    if C <= 1.0:
        raise DomainError(f"a_inf: C={C} must exceed 1")
    target = alpha / (1.0 - alpha)

    def f(a):
        return LOG2 * C * (a * math.log(a) - a + 1.0) - target

    lo, hi = 1.0, 2.0
    while f(hi) < 0.0:
        hi *= 2.0
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12:
            break
    return 0.5 * (lo + hi)


def check_fmf_exists(alpha, C, a, c_r=0.0, c_i=0.0):
    """Curve-existence check:
    D(1 - a/(2(1-c_r)) || 1/2) <= (1-c_i) (2-C)/C log 2  and  a/(2(1-c_r)) < 1.
    """
    z = a / (2.0 * (1.0 - c_r))
    if z >= 1.0:
        return False
    return kl_div(1.0 - z, 0.5) <= (1.0 - c_i) * (2.0 - C) / C * LOG2


def _der0_denominator(C, a):
    hc = h_c(C)
    return a * (1.0 - math.log(a / (2.0 * (1.0 - hc)))) + hc - 1.0


def check_der0(alpha, C, a):
    """Positive-derivative-at-zero check:
    C < (1 - alpha/(1-alpha)) / (a (1 - log(a / (2(1-H_C)))) + H_C - 1).
    False when the denominator is not positive.
    """
    d = _der0_denominator(C, a)
    if d <= 0.0:
        return False
    return C < (1.0 - alpha / (1.0 - alpha)) / d


def check_alphaC(alpha, C):
    """Second-moment admissibility: alpha < 0.028, C < 2(1-2a)/(1-a), and
    the two H_C inequalities with the sqrt(alpha/(1-alpha)) slack terms."""
    if not alpha < 28.0 / 1000.0:
        return False
    if not C < 2.0 * (1.0 - 2.0 * alpha) / (1.0 - alpha):
        return False
    hc = h_c(C)
    rat = alpha / (1.0 - alpha)
    rt = math.sqrt(rat)
    cond1 = C * ((1.0 - hc) * (1.0 - math.log(2.0 * (1.0 - hc)))
                 - binary_entropy(hc) / 2.0
                 - 7.0 * rt * (0.5 * math.log(2.0 * (1.0 - hc)))) > 4.0 * rat
    cond2 = C * (binary_entropy(hc) / 2.0
                 + 0.5 * math.log((1.0 - hc) / hc) * (1.0 - hc - 5.0 * rt)
                 + hc - 1.0) > 3.0 * rat
    return cond1 and cond2


def critical_c(alpha, tol=1e-8):
    """The C where the derivative-at-zero check flips, near 1.4749.

    Solves C * (a (1 - log(a / (2(1-H_C)))) + H_C - 1) = 1 - alpha/(1-alpha)
    on C in (1, 2), with a re-evaluated at the admissible-set infimum for
    each trial C.  (A rendering of this boundary elsewhere drops the
    "+ H_C" term; only the form above reproduces the published constant, so
    that is what we solve.)
    """
    if not 0.0 <= alpha < 28.0 / 1000.0:
        raise DomainError(f"critical_c: alpha={alpha} outside [0, 0.028)")

    def g(C):
        a = a_inf(alpha, C) if alpha > 0.0 else 1.0
        return C * _der0_denominator(C, a) - (1.0 - alpha / (1.0 - alpha))

    lo, hi = 1.0 + 1e-9, 2.0 - 1e-9
    glo, ghi = g(lo), g(hi)
    if glo * ghi > 0.0:
        raise NumericalError("critical_c: no sign change on (1,2)")
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if g(mid) * glo > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    root = 0.5 * (lo + hi)
    return root, g(root)


@dataclass(frozen=True)
class RegionReport:
    grid: list            # rows: (alpha, C, a, fmf_exists, der0, alphaC, all)

    def to_csv(self):
        lines = ["alpha,C,a,fmf_exists,der0,alphaC,all_ok"]
        for alpha, C, a, e, d, ac, al in self.grid:
            lines.append(f"{alpha:.12g},{C:.12g},{a:.12g},"
                         f"{int(e)},{int(d)},{int(ac)},{int(al)}")
        return "\n".join(lines) + "\n"


def region_scan(alpha_range, c_range, resolution):
    """Evaluate the three checks on a grid; a = a_inf + 1e-9 per point."""
    a0, a1 = alpha_range
    c0, c1 = c_range
    if not (0.0 < a0 <= a1 < 1.0 and 1.0 < c0 <= c1 < 2.0):
        raise DomainError("region_scan: ranges must sit in (0,1) x (1,2)")
    alphas = np.linspace(a0, a1, resolution)
    cs = np.linspace(c0, c1, resolution)
    rows = []
    for alpha in alphas:
        for C in cs:
            a = a_inf(float(alpha), float(C)) + 1e-9
            e = check_fmf_exists(float(alpha), float(C), a)
            d = check_der0(float(alpha), float(C), a)
            ac = check_alphaC(float(alpha), float(C))
            rows.append((float(alpha), float(C), a, e, d, ac, e and d and ac))
    return RegionReport(grid=rows)
