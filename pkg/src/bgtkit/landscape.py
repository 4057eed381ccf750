"""Exact desk-scale landscape objects: stratum counts, phi curves, barriers.

phi(l) is the minimum uncovered-fraction energy among k-subsets whose
overlap with the planted set is exactly l; Z_{t,l} counts the overlap-l
subsets leaving at most t positive tests uncovered.  A bottleneck overlap
gap holds when low-energy subsets exist at small and at large overlap while
every strictly-intermediate overlap has energy at least r + delta.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, NumericalError, check_cap
from .model import KSubset


@dataclass(frozen=True)
class PhiCurve:
    l_values: np.ndarray
    phi: np.ndarray                  # NaN where the stratum is empty
    M: int
    argmin_witness: list = None      # optional KSubset per l

    @property
    def k(self):
        return int(self.l_values[-1])

    def to_csv(self):
        k = self.k
        lines = ["l,x,phi,phiM_int"]
        for l, v in zip(self.l_values, self.phi):
            if math.isnan(v):
                lines.append(f"{l},{l / k:.12g},nan,-1")
            else:
                lines.append(f"{l},{l / k:.12g},{v:.12g},{round(v * self.M)}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class BOGPReport:
    holds: bool
    zeta1: float
    zeta2: float
    r: float
    delta: float
    witnesses: tuple = None          # (sigma1, sigma2) overlaps' witnesses

    def to_json(self):
        wit = None
        if self.witnesses is not None:
            wit = [list(w.members) if isinstance(w, KSubset) else list(w)
                   for w in self.witnesses]
        return json.dumps({
            "holds": self.holds, "zeta1": self.zeta1, "zeta2": self.zeta2,
            "r": self.r, "delta": self.delta, "witnesses": wit,
        })


def _stratum_groups(pr):
    planted = pr.sigma_star_local.astype(np.int32)
    others = np.setdiff1d(np.arange(pr.p), planted).astype(np.int32)
    return planted, others


def _stratum_size(pr, l):
    k = len(pr.sigma_star_local)
    return math.comb(k, l) * math.comb(pr.p - k, k - l)


def stratum_histogram(pr, l, track_witness=False):
    """Uncovered-count histogram over the overlap-l stratum (cap-checked)."""
    k = len(pr.sigma_star_local)
    if not 0 <= l <= k:
        raise DomainError(f"stratum_histogram: l={l} outside [0,{k}]")
    check_cap(_stratum_size(pr, l), "stratum", "stratum subsets")
    planted, others = _stratum_groups(pr)
    return kernels.stratum_hist(pr.coverage, planted, others, l, k - l,
                                pr.M, track_witness=track_witness)


def count_z(pr, t, l):
    """# of overlap-l k-subsets leaving at most t positive tests uncovered."""
    if not 0 <= t <= pr.M:
        raise DomainError(f"count_z: t={t} outside [0,{pr.M}]")
    hist, _, _ = stratum_histogram(pr, l)
    return int(hist[:t + 1].sum())


def phi(pr, l, want_witness=False):
    """min H over the overlap-l stratum; NaN if the stratum is empty."""
    hist, best, wit = stratum_histogram(pr, l, track_witness=want_witness)
    if best < 0:
        return (math.nan, None) if want_witness else math.nan
    value = best / pr.M
    if want_witness:
        return value, KSubset(tuple(int(c) for c in wit))
    return value


def phi_curve(pr, want_witness=False):
    k = len(pr.sigma_star_local)
    ls = np.arange(k + 1)
    vals = np.empty(k + 1)
    wits = [] if want_witness else None
    for l in ls:
        if want_witness:
            vals[l], w = phi(pr, int(l), want_witness=True)
            wits.append(w)
        else:
            vals[l] = phi(pr, int(l))
    return PhiCurve(l_values=ls, phi=vals, M=pr.M, argmin_witness=wits)


def _region_mins(curve, zeta1, zeta2):
    """(low, window, high) minima of phi with the window strictly between
    the closed witness regions l <= zeta1*k and l >= zeta2*k."""
    k = curve.k
    tol = 1e-12
    low = [v for l, v in zip(curve.l_values, curve.phi)
           if l <= zeta1 * k + tol and not math.isnan(v)]
    high = [v for l, v in zip(curve.l_values, curve.phi)
            if l >= zeta2 * k - tol and not math.isnan(v)]
    win = [v for l, v in zip(curve.l_values, curve.phi)
           if zeta1 * k + tol < l < zeta2 * k - tol and not math.isnan(v)]
    return low, win, high


def detect_bogp(curve, zeta1, zeta2, r, delta):
    """Check the barrier conditions at the given parameters.

    Requires a low-overlap witness (l/k <= zeta1) and a high-overlap witness
    (l/k >= zeta2) with energy < r, while every stratum strictly inside the
    window has energy >= r + delta.
    """
    if not zeta1 < zeta2:
        raise DomainError(f"detect_bogp: need zeta1 < zeta2, got "
                          f"({zeta1}, {zeta2})")
    low, win, high = _region_mins(curve, zeta1, zeta2)
    ok_low = bool(low) and min(low) < r
    ok_high = bool(high) and min(high) < r
    ok_win = all(v >= r + delta for v in win)
    return BOGPReport(holds=ok_low and ok_high and ok_win,
                      zeta1=zeta1, zeta2=zeta2, r=r, delta=delta)


def search_bogp(curve):
    """Scan integer window endpoints for the deepest achievable barrier.

    Returns (zeta1, zeta2, r, delta) maximizing the gap between the window
    minimum and the outside minima, or None when no window has a positive
    gap (e.g. monotone decreasing curves).
    """
    k = curve.k
    vals = curve.phi
    finite = [(l, v) for l, v in zip(curve.l_values, vals)
              if not math.isnan(v)]
    if len(finite) < 3:
        return None
    best = None
    for l1 in range(0, k - 1):
        for l2 in range(l1 + 2, k + 1):
            low = [v for l, v in finite if l <= l1]
            high = [v for l, v in finite if l >= l2]
            win = [v for l, v in finite if l1 < l < l2]
            if not low or not high or not win:
                continue
            gap = min(win) - max(min(low), min(high))
            if gap > 1e-12 and (best is None or gap > best[0]):
                best = (gap, l1, l2, max(min(low), min(high)))
    if best is None:
        return None
    gap, l1, l2, outside = best
    delta = gap / 2.0
    r = outside + delta / 2.0
    return (l1 / k, l2 / k, r, delta)


def count_z_table(pr):
    """count_z for every (t, l) as an (M+1) x (k+1) array."""
    k = len(pr.sigma_star_local)
    out = np.zeros((pr.M + 1, k + 1), dtype=np.int64)
    for l in range(k + 1):
        hist, _, _ = stratum_histogram(pr, l)
        out[:, l] = np.cumsum(hist)
    return out


def phi_from_count_z(pr, l):
    """phi(l) recomputed by bisecting t on count_z (dual route)."""
    lo, hi = 0, pr.M
    if count_z(pr, hi, l) == 0:
        return math.nan
    while lo < hi:
        mid = (lo + hi) // 2
        if count_z(pr, mid, l) >= 1:
            hi = mid
        else:
            lo = mid + 1
    return lo / pr.M
