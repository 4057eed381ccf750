"""Second-moment analytic functions and their numerical certification.

G(y, y', x) controls the pair-overlap terms of the second-moment ratio;
its restriction to the conditional-mean center y' = y_(x) (written
g_breve) must vanish at the x-endpoints, be strictly concave, and stay
positive inside (0,1) for the method to close.  This module evaluates the
closed forms and certifies those properties on dense grids.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .mathcore import LOG2, binary_entropy, h_c, kl_div


def _check_xy(y, x):
    if not 0.0 < y < 0.5:
        raise DomainError(f"y={y} outside (0,1/2)")
    if not 0.0 < x < 1.0:
        raise DomainError(f"x={x} outside (0,1)")


def center_y(y, x):
    """y_(x) = y + (1-y)(2^{1-x} - 1), the conditional-mean uncovered
    fraction of an x-fraction sub-subset."""
    return y + (1.0 - y) * math.expm1((1.0 - x) * LOG2)


def g_fn(y, yp, x):
    """G(y, y', x) = (x/2) D(y||1/2) + y' D(y/y' || 2^{-(1-x)})
    - D(y||1/2) + (1/2) D(y' || 2^{-x})."""
    _check_xy(y, x)
    if not y <= yp <= 1.0:
        raise DomainError(f"g_fn: yp={yp} outside [y,1]")
    a = kl_div(y, 0.5)
    mid = yp * kl_div(y / yp, 2.0 ** (-(1.0 - x)))
    return (x / 2.0) * a + mid - a + 0.5 * kl_div(yp, 2.0 ** (-x))


def g_tilde(C, y, yp, x):
    """G with the leading slope taken at H_C instead of y."""
    _check_xy(y, x)
    return g_fn(y, yp, x) + (x / 2.0) * (kl_div(h_c(C), 0.5)
                                         - kl_div(y, 0.5))


def g_breve(y, x):
    """G evaluated at the interval center y' = y_(x)."""
    return g_fn(y, center_y(y, x), x)


def g_breve_dx_limits(y):
    """Closed-form limits of d g_breve/dx at x -> 0 and x -> 1:
    log2 ((1-y)(1 - log(2-2y)) - h2(y)/2) and
    log2 ((1-y)(1 + log(y/(1-y))/2) - h2(y)/2)."""
    if not 0.0 < y < 0.5:
        raise DomainError(f"g_breve_dx_limits: y={y} outside (0,1/2)")
    h2y = binary_entropy(y)
    d0 = LOG2 * ((1.0 - y) * (1.0 - math.log(2.0 - 2.0 * y)) - h2y / 2.0)
    d1 = LOG2 * ((1.0 - y) * (1.0 + 0.5 * math.log(y / (1.0 - y)))
                 - h2y / 2.0)
    return d0, d1


def g_dyp_at_center(y, x):
    """dG/dy' at y' = y_(x):
    log((1 - y/y_(x)) / (1 - 2^{-(1-x)}))
      + (1/2) log(y_(x)/(1-y_(x)) * (1-2^{-x})/2^{-x})."""
    _check_xy(y, x)
    yx = center_y(y, x)
    t = 2.0 ** (-x)
    return math.log((1.0 - y / yx) / -math.expm1(-(1.0 - x) * LOG2)) \
        + 0.5 * math.log(yx / (1.0 - yx) * (1.0 - t) / t)


def dyp_bounds(y, x=None):
    """DerPrime bounds on |dG/dy'| at the center: the global sandwich
    [log(2(1-y))/2, log((1-y)/y)/2], and for fixed x the tighter ceiling
    log(2(1-y))/2 + x log4 / (2^{2-x} - 2)."""
    lo = 0.5 * math.log(2.0 * (1.0 - y))
    hi = 0.5 * math.log((1.0 - y) / y)
    if x is None:
        return lo, hi
    return lo, min(hi, lo + x * math.log(4.0) / (2.0 ** (2.0 - x) - 2.0))


@dataclass(frozen=True)
class GReport:
    y: float
    grid: np.ndarray
    breve_values: np.ndarray
    second_differences: np.ndarray
    min_interior_value: float
    d0_limit: float
    d1_limit: float
    deriv_bound_sup: float
    deriv_bound_inf: float
    passed: bool
    failures: list

    def to_csv(self):
        lines = ["x,g_breve,second_diff"]
        sd = np.concatenate([[math.nan], self.second_differences, [math.nan]])
        for x, v, s in zip(self.grid, self.breve_values, sd):
            stxt = "nan" if math.isnan(s) else f"{s:.6g}"
            lines.append(f"{x:.12g},{v:.12g},{stxt}")
        return "\n".join(lines) + "\n"

    def summary_json(self):
        return json.dumps({
            "y": self.y, "passed": self.passed, "failures": self.failures,
            "min_interior_value": self.min_interior_value,
            "d0_limit": self.d0_limit, "d1_limit": self.d1_limit,
            "deriv_bound_inf": self.deriv_bound_inf,
            "deriv_bound_sup": self.deriv_bound_sup,
        })


def verify_g_properties(y, grid_resolution=1e-3,
                        concavity_slack=1e-12, endpoint_tol=1e-6,
                        deriv_tol=1e-4):
    """Certify concavity, interior positivity, vanishing endpoint limits,
    derivative-limit agreement, and the DerPrime sandwich on a grid."""
    if not 0.0 < y < 0.5:
        raise DomainError(f"verify_g_properties: y={y} outside (0,1/2)")
    xs = np.arange(1e-3, 1.0 - 1e-3 + grid_resolution / 2.0, grid_resolution)
    vals = np.array([g_breve(y, float(x)) for x in xs])
    sd = vals[:-2] + vals[2:] - 2.0 * vals[1:-1]
    failures = []
    if not (sd <= concavity_slack).all():
        failures.append(("concavity", float(xs[1 + int(sd.argmax())])))
    if not (vals > 0.0).all():
        failures.append(("positivity", float(xs[int(vals.argmin())])))
    e0 = g_breve(y, 1e-8)
    e1 = g_breve(y, 1.0 - 1e-8)
    if abs(e0) >= endpoint_tol:
        failures.append(("endpoint_zero_at_0", 0.0))
    if abs(e1) >= endpoint_tol:
        failures.append(("endpoint_zero_at_1", 1.0))
    d0, d1 = g_breve_dx_limits(y)
    h = 1e-7
    fd0 = (g_breve(y, 1e-6 + h) - g_breve(y, 1e-6 - h)) / (2.0 * h)
    fd1 = (g_breve(y, 1.0 - 1e-6 + h) - g_breve(y, 1.0 - 1e-6 - h)) / (2.0 * h)
    if abs(fd0 - d0) >= deriv_tol:
        failures.append(("deriv_limit_at_0", 0.0))
    if abs(fd1 - d1) >= deriv_tol:
        failures.append(("deriv_limit_at_1", 1.0))
    lo, hi = dyp_bounds(y)
    for x in xs:
        v = abs(g_dyp_at_center(y, float(x)))
        _, cap = dyp_bounds(y, float(x))
        if not (lo - 1e-12 <= v <= hi + 1e-12 and v <= cap + 1e-12):
            failures.append(("derprime_sandwich", float(x)))
            break
    return GReport(y=y, grid=xs, breve_values=vals, second_differences=sd,
                   min_interior_value=float(vals.min()),
                   d0_limit=d0, d1_limit=d1,
                   deriv_bound_sup=hi, deriv_bound_inf=lo,
                   passed=not failures, failures=failures)
