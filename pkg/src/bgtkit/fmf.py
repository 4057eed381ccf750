"""First-moment curve machinery for the restricted-overlap landscape.

For overlap fraction x, y(x) solves

    (1/M) [log C(k, xk) + log C(p-k, (1-x)k)]
        = (1-y) D(2a log2 x / (1-y) || r(x)) + D(y || s(x)),

with profile functions r(x) = 4 2^{-x}(1 - 2^{-x}) and s(x) = 1 - 2^{x-1},
subject to four feasibility constraints; the extra KL term on the right is
what conditioning on bounded planted degrees (deg <= d = 2 a q M) adds over
the plain variant, which drops that term and solves
(1/M) log-binomials = D(y || s(x)).

The right-hand side is strictly decreasing in y on the feasible bracket, so
each point is solved by bisection.  Scales (k, M, p) are real-valued: exact
instances supply integers and surrogate runs supply the asymptotic formulas
directly (k = n^alpha unfloored; with alpha small, flooring would collapse
k to 1 and the whole x-grid with it).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError
from .mathcore import LOG2, entropy_inv_left, h_c, kl_div, log_binom_real
from .model import assignment_prob
from .regions import a_inf

_BISECT_ITERS = 200
_Y_TOL = 1e-15


def profile_fns(x):
    """(r(x), s(x)) = (4 2^{-x}(1-2^{-x}), 1 - 2^{x-1})."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"profile_fns: x={x} outside [0,1]")
    t = 2.0 ** (-x)
    return 4.0 * t * (1.0 - t), 1.0 - 2.0 ** (x - 1.0)


def _ratio_to_r(a, x):
    """2 a log2 x / r(x), continuously extended to a/2 at x = 0."""
    if x == 0.0:
        return a / 2.0
    r, _ = profile_fns(x)
    return 2.0 * a * LOG2 * x / r


@dataclass(frozen=True)
class FMFParams:
    alpha: float
    C: float
    a: float
    k: float
    M: float
    p: float
    c_r: float = 0.0
    c_s: float = 0.0
    c_i: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"FMFParams: alpha={self.alpha} outside (0,1)")
        if not 1.0 < self.C < 2.0:
            raise DomainError(f"FMFParams: C={self.C} outside (1,2)")
        for name in ("c_r", "c_s", "c_i"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise DomainError(f"FMFParams: {name}={v} outside [0,1)")
        if self.M <= 0 or self.p <= self.k or self.k < 1:
            raise DomainError("FMFParams: need M > 0 and p > k >= 1")
        gap = LOG2 * self.C * (self.a * math.log(self.a) - self.a + 1.0) \
            - self.alpha / (1.0 - self.alpha)
        if self.a <= 1.0 or gap <= 0.0:
            raise DomainError(
                f"FMFParams: a={self.a} not in the admissible degree set "
                f"for (alpha={self.alpha}, C={self.C}); need a > "
                f"{a_inf(self.alpha, self.C):.9f}")


def surrogate_params(n, alpha, C, a=None, c_r=0.0, c_s=0.0, c_i=0.0):
    """FMFParams from asymptotic scale surrogates at population size n.

    k = n^alpha (real), M = C log2 C(n,k) / 2, p = n (k/n)^{C/2} + k.
    ``a`` defaults to just above the admissible-set infimum.
    """
    k = float(n) ** alpha
    if a is None:
        a = a_inf(alpha, C) + 1e-9
    M = C * log_binom_real(n, k) / LOG2 / 2.0
    p = n * (k / n) ** (C / 2.0) + k
    return FMFParams(alpha=alpha, C=C, a=a, k=k, M=M, p=p,
                     c_r=c_r, c_s=c_s, c_i=c_i)


def params_from_instance(pr, alpha, C, a=None, **slacks):
    """FMFParams using empirical (k, M, p) from a pruned instance."""
    k = len(pr.sigma_star_local)
    if a is None:
        a = a_inf(alpha, C) + 1e-9
    return FMFParams(alpha=alpha, C=C, a=a, k=float(k), M=float(pr.M),
                     p=float(pr.p), **slacks)


def lhs_entropy(params, x):
    """(1/M) [log C(k, xk) + log C(p-k, (1-x)k)]."""
    k, p = params.k, params.p
    return (log_binom_real(k, x * k)
            + log_binom_real(p - k, (1.0 - x) * k)) / params.M


def fmf_residual(params, x, y):
    """LHS - RHS of the conditional first-moment equation at (x, y)."""
    if not 0.0 <= y < 1.0:
        raise DomainError(f"fmf_residual: y={y} outside [0,1)")
    r, s = profile_fns(x)
    q1 = 2.0 * params.a * LOG2 * x / (1.0 - y) if x > 0 else 0.0
    if q1 > 1.0:
        raise NumericalError(
            f"fmf_residual: KL argument {q1:.6g} > 1 at (x={x}, y={y})")
    rhs = (1.0 - y) * kl_div(q1, r) + kl_div(y, s) if x > 0 else \
        kl_div(y, s)
    return lhs_entropy(params, x) - rhs


def check_constraints(params, x, y):
    """The four feasibility flags at (x, y).

    (a) 2a log2 x/(1-y) <= (1-c_r) r(x)
    (b) y <= (1-c_s) s(x)
    (c) 2a log2 x <= (1-c_r) r(x)
    (d) D(1 - z || s(x)) + z D((1-c_r) r(x) || r(x))
          <= (1-c_i)(1-x)(2-C) log2 / C,  z = 2a log2 x / ((1-c_r) r(x))
    """
    r, s = profile_fns(x)
    a, cr, cs, ci, C = params.a, params.c_r, params.c_s, params.c_i, params.C
    ratio = _ratio_to_r(a, x)
    ok_r = (ratio / (1.0 - y) if y < 1 else math.inf) <= (1.0 - cr)
    ok_s = y <= (1.0 - cs) * s
    ok_exist = ratio <= (1.0 - cr)
    z = ratio / (1.0 - cr)
    if z > 1.0:
        ok_uni = False
    else:
        lhs_d = kl_div(1.0 - z, s) + z * kl_div((1.0 - cr) * r, r)
        ok_uni = lhs_d <= (1.0 - ci) * (1.0 - x) * (2.0 - C) * LOG2 / C
    return ok_r, ok_s, ok_exist, ok_uni


def solve_fmf(params, x):
    """y(x) with all four constraints, or None when infeasible/no bracket.

    Bisection over [0, min(1 - z, (1-c_s) s(x))] with z the constraint-(a)
    ceiling ratio, exploiting strict monotonicity of the residual in y.
    """
    _, _, ok_exist, ok_uni = check_constraints(params, x, 0.0)
    if not (ok_exist and ok_uni):
        return None
    _, s = profile_fns(x)
    y1 = 1.0 - _ratio_to_r(params.a, x) / (1.0 - params.c_r)
    hi = min(y1, (1.0 - params.c_s) * s)
    if hi < 0.0:
        return None
    flo = fmf_residual(params, x, 0.0)
    fhi = fmf_residual(params, x, hi)
    if flo > 0.0 or fhi < 0.0:
        return None
    lo = 0.0
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if fmf_residual(params, x, mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _Y_TOL:
            break
    return 0.5 * (lo + hi)


def solve_fmf_unconditional(params, x):
    """The plain variant: solve (1/M) log-binomials = D(y || s(x))."""
    _, s = profile_fns(x)
    L = lhs_entropy(params, x)
    if L > kl_div(0.0, s):
        return None
    hi = (1.0 - params.c_s) * s
    if L - kl_div(hi, s) < 0.0:
        return None
    lo = 0.0
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if L - kl_div(mid, s) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _Y_TOL:
            break
    return 0.5 * (lo + hi)


def y_zero(params):
    """Closed form at x = 0: h^{-1}(log 2 - (1/M) log C(p-k, k)), left branch."""
    L0 = log_binom_real(params.p - params.k, params.k) / params.M
    if not 0.0 <= LOG2 - L0 <= LOG2:
        raise DomainError(
            f"y_zero: log C(p-k,k)/M = {L0:.6g} outside [0, log 2]")
    return entropy_inv_left((LOG2 - L0) / LOG2)


def y_zero_limit(params):
    """The asymptotic value of y(0): H_C."""
    return h_c(params.C)


def conditioning_degree_bound(params, q=None):
    """d = 2 a q M, the planted-degree ceiling of the conditioning event."""
    if q is None:
        q = assignment_prob(int(round(params.k)))
    return 2.0 * params.a * q * params.M


@dataclass(frozen=True)
class FMFCurve:
    x_grid: np.ndarray
    y: np.ndarray                   # NaN where absent
    feasible: np.ndarray            # bool[n, 4] flags (a)-(d)
    residuals: np.ndarray           # NaN where absent
    y_unconditional: np.ndarray = None
    params: FMFParams = field(default=None, compare=False)

    def to_csv(self):
        cols = "x,y,feasible_r,feasible_s,feasible_exist,feasible_uni,residual"
        with_u = self.y_unconditional is not None
        if with_u:
            cols += ",y_unconditional"
        lines = [cols]
        for i, x in enumerate(self.x_grid):
            row = [f"{x:.12g}",
                   "nan" if math.isnan(self.y[i]) else f"{self.y[i]:.12g}"]
            row += [str(int(b)) for b in self.feasible[i]]
            row.append("nan" if math.isnan(self.residuals[i])
                       else f"{self.residuals[i]:.6g}")
            if with_u:
                yu = self.y_unconditional[i]
                row.append("nan" if math.isnan(yu) else f"{yu:.12g}")
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def solve_curve(params, x_grid=None, with_unconditional=False):
    """Solve pointwise over the grid (default {0, 1/k, ..., 1})."""
    if x_grid is None:
        k = int(round(params.k))
        x_grid = np.arange(k + 1) / k
    x_grid = np.asarray(x_grid, dtype=float)
    n = len(x_grid)
    y = np.full(n, math.nan)
    res = np.full(n, math.nan)
    feas = np.zeros((n, 4), dtype=bool)
    yu = np.full(n, math.nan) if with_unconditional else None
    for i, x in enumerate(x_grid):
        sol = solve_fmf(params, float(x))
        if sol is not None:
            y[i] = sol
            res[i] = fmf_residual(params, float(x), sol)
            feas[i] = check_constraints(params, float(x), sol)
        if with_unconditional:
            u = solve_fmf_unconditional(params, float(x))
            if u is not None:
                yu[i] = u
    return FMFCurve(x_grid=x_grid, y=y, feasible=feas, residuals=res,
                    y_unconditional=yu, params=params)


def nonmonotonicity(curve, min_slope=1e-6):
    """Largest eps1 and best delta1 with y(x) - y(0) >= delta1 * x on the
    initial grid segment; None when the curve does not rise at 0."""
    xs, ys = curve.x_grid, curve.y
    if len(xs) == 0 or xs[0] != 0.0 or math.isnan(ys[0]):
        raise DomainError("nonmonotonicity: curve must be solved at x=0")
    y0 = ys[0]
    eps1 = None
    delta1 = math.inf
    for x, y in zip(xs[1:], ys[1:]):
        if math.isnan(y):
            break
        slope = (y - y0) / x
        if min(delta1, slope) < min_slope:
            break
        delta1 = min(delta1, slope)
        eps1 = x
    if eps1 is None:
        return None
    return float(eps1), float(delta1)
