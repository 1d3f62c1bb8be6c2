"""Closed-form feasibility checks and boundary constants for the restart tests.

Everything here is deterministic arithmetic: the minimal thresholds the two
restart tests can reach on a horizon, the delta below which Test 1 could
fire at all, the horizon where that delta first becomes a probability, the
distribution-free regret envelope B_D, and the horizon where that envelope
stops saying anything (B_D crosses below T). Root finding is plain
bracketed bisection on smooth scalar functions, followed by an integer
scan around the continuous root; large values are handled in log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

from .master import RhoConfig, rho


@dataclass
class FeasibilityReport:
    T: int
    delta: float
    rho_form: str
    test1_min_threshold: float
    test2_min_threshold: float
    test1_feasible: bool
    test2_feasible: bool

    def to_dict(self) -> dict:
        return asdict(self)


def min_test_thresholds(T: int, delta: float, rho_form: str = "inv_sqrt",
                        n_arms: int = 1) -> FeasibilityReport:
    """Smallest right-hand side each restart test can attain on horizon T.

    Both thresholds scale with rho of the interval length and rho is
    non-increasing, so the minimum sits at length T. Test statistics are
    bounded by 1, hence a test is feasible iff its minimum threshold <= 1.
    """
    if T < 2:
        raise ValueError("T must be >= 2")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    cfg = RhoConfig(rho_form, n_arms, T, delta)
    rho_T = rho(T, cfg)
    n_hat = math.log2(T) + 1.0
    lt = math.log(T / delta)
    t1 = 54.0 * n_hat * lt * rho_T
    t2 = 18.0 * n_hat * lt * rho_T
    return FeasibilityReport(
        T=T, delta=delta, rho_form=rho_form,
        test1_min_threshold=t1, test2_min_threshold=t2,
        test1_feasible=t1 <= 1.0, test2_feasible=t2 <= 1.0)


def delta_lower_bound(T: int) -> float:
    """Smallest delta at which Test 1 remains untriggerable on horizon T.

    Returns T*exp(-sqrt(T)/(54*(log2 T + 1))), evaluated in log space so
    large horizons neither overflow nor underflow. Values >= 1 mean no
    valid confidence parameter exists for this horizon.
    """
    if T < 2:
        raise ValueError("T must be >= 2")
    log_bound = math.log(T) - math.sqrt(T) / (54.0 * (math.log2(T) + 1.0))
    return math.exp(log_bound)


def _feasibility_margin(T: float) -> float:
    # sign of this function decides whether exp(sqrt(T)/(54(log2 T+1))) > T
    return math.sqrt(T) / (54.0 * (math.log2(T) + 1.0)) - math.log(T)


def min_feasible_horizon(tolerance: float = 1e-9) -> int:
    """Horizon at which a valid confidence parameter first becomes possible.

    Bisects the continuous margin sqrt(T)/(54(log2 T+1)) - ln T on the
    bracket [1e8, 1e10] down to the given width, then scans the integers
    within +-2 of the root and returns the one the boundary crosses: the
    largest integer T whose successor already satisfies the strict
    inequality. The margin slope near the root is about 7e-9 per integer
    against float noise around 1e-13, so the answer is stable.
    """
    if tolerance <= 0.0:
        raise ValueError("tolerance must be > 0")
    lo, hi = 1e8, 1e10
    if not (_feasibility_margin(lo) < 0.0 < _feasibility_margin(hi)):
        raise RuntimeError("bisection bracket invalid")
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # float64 resolution reached
            break
        if _feasibility_margin(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    anchor = int(math.floor(0.5 * (lo + hi)))
    for cand in range(anchor - 2, anchor + 3):
        if _feasibility_margin(float(cand + 1)) > 0.0:
            return cand
    raise RuntimeError("no integer crossing near continuous root")


def bd_bound(T: int | float) -> float:
    """Distribution-free dynamic-regret envelope 24(log2 T+1)·lnT·√T·(1+15lnT)."""
    if T < 2:
        raise ValueError("T must be >= 2")
    lt = math.log(T)
    return 24.0 * (math.log2(T) + 1.0) * lt * math.sqrt(T) * (1.0 + 15.0 * lt)


def _bd_log_margin(T: float) -> float:
    # ln(B_D(T)) - ln(T); positive while the envelope still exceeds T
    lt = math.log(T)
    return (math.log(24.0) + math.log(math.log2(T) + 1.0) + math.log(lt)
            + 0.5 * lt + math.log1p(15.0 * lt) - lt)


def bd_crossover(tolerance: float = 10.0) -> int:
    """Smallest integer horizon where the B_D envelope drops to T or below.

    Log-space bisection of ln B_D - ln T on [1e13, 1e16] down to a
    one-integer interval, then a short downward/upward integer scan for the
    first non-positive margin. Float64 rounding blurs the margin by roughly
    one integer at this magnitude, comfortably inside the tolerance.
    """
    if tolerance <= 0.0:
        raise ValueError("tolerance must be > 0")
    lo, hi = 1e13, 1e16
    if not (_bd_log_margin(lo) > 0.0 > _bd_log_margin(hi)):
        raise RuntimeError("bisection bracket invalid")
    while hi - lo > 1.0:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # float64 resolution reached
            break
        if _bd_log_margin(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    cand = int(hi)
    scan = max(2, int(math.ceil(tolerance)))
    while cand > 2 and _bd_log_margin(float(cand - 1)) <= 0.0:
        cand -= 1
    for _ in range(2 * scan):
        if _bd_log_margin(float(cand)) <= 0.0:
            return cand
        cand += 1
    raise RuntimeError("no crossover found near bisection point")


def theory_summary(T: int, delta: float, rho_form: str = "inv_sqrt",
                   n_arms: int = 1) -> dict:
    """One JSON-friendly dict with every quantity this module computes."""
    rep = min_test_thresholds(T, delta, rho_form, n_arms)
    out = rep.to_dict()
    out["delta_lower_bound"] = delta_lower_bound(T)
    out["min_feasible_horizon"] = min_feasible_horizon()
    out["bd_bound"] = bd_bound(T)
    out["bd_crossover"] = bd_crossover()
    return out
