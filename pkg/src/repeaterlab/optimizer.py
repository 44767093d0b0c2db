"""Constrained parameter search over the protocol rate models.

For each protocol and distance the nesting level is searched over the
link cap, the emission probability is pushed to its fidelity cap (every
total time is monotone decreasing in p, so the cap is the optimum), and
the free beam-splitter weight of the single-photon-source and local-pair
protocols is scanned on a grid and locally refined.  Crossovers against
direct transmission are located by bisection on the log-time difference.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, Optional, Sequence, Tuple

from . import rates
from .rates import (
    InfeasibleError,
    ProtocolParams,
    RateBreakdown,
    direct_transmission_time,
)

#: nesting levels searched, 2^4 = 16 links at most
N_MAX_DEFAULT = 4
#: grid step for the free beam-splitter weight
ALPHA2_STEP = 0.005
#: emission probabilities are searched up to this value
P_CEILING = 0.2

PROTOCOL_NAMES = (
    "dlcz",
    "jiang",
    "chen",
    "simon",
    "sps",
    "pair_source",
    "zhao",
)


@dataclass(frozen=True)
class OptimizationResult:
    protocol: str
    L_km: float
    feasible: bool
    n: Optional[int] = None
    p: Optional[float] = None
    alpha2: Optional[float] = None
    T_tot: float = math.inf
    constraint_active: bool = False
    breakdown: Optional[RateBreakdown] = None
    grid: Dict[str, float] = field(default_factory=dict)

    @property
    def links(self) -> Optional[int]:
        return None if self.n is None else 2**self.n

    @property
    def beta2(self) -> Optional[float]:
        return None if self.alpha2 is None else 1.0 - self.alpha2


def _default_template(L_km: float) -> ProtocolParams:
    return ProtocolParams(L_km=L_km)


def _emission_cap(protocol: str, n: int, params: ProtocolParams) -> float:
    """Fidelity-constrained emission probability for the fixed-p models."""
    eta = params.eta
    if protocol in ("dlcz", "simon"):
        return rates.max_p_for_fidelity_quadratic(n, eta, params.F_target)
    if protocol == "jiang":
        return rates.jiang_max_p(n, eta, params.F_target)
    if protocol in ("pair_source", "zhao"):
        return rates.pair_source_max_p(n, params.F_target)
    raise ValueError(f"protocol {protocol!r} has no emission cap")


def _evaluate(protocol: str, params: ProtocolParams) -> RateBreakdown:
    return rates.PROTOCOLS[protocol](params)


def optimize(
    protocol: str,
    L_km: float,
    template: Optional[ProtocolParams] = None,
    *,
    n_max: int = N_MAX_DEFAULT,
    alpha2_step: float = ALPHA2_STEP,
) -> OptimizationResult:
    """Minimize the distribution time at one distance.

    Ties are broken toward smaller nesting level, then smaller emission
    probability.  Returns an infeasible result (T_tot = inf) when no
    parameter set satisfies the constraints.
    """
    if protocol not in PROTOCOL_NAMES:
        raise ValueError(f"unknown protocol {protocol!r}")
    template = template if template is not None else _default_template(L_km)
    best: Optional[OptimizationResult] = None
    n_lo = 1 if protocol == "jiang" else 0
    with warnings.catch_warnings():
        # candidate evaluations may pass through regimes that warn;
        # only the chosen optimum should speak up
        warnings.simplefilter("ignore")
        for n in range(n_lo, n_max + 1):
            try:
                cand = _optimize_at_level(
                    protocol, L_km, n, template, alpha2_step
                )
            except (InfeasibleError, ValueError):
                continue
            if cand is None:
                continue
            if best is None or cand.T_tot < best.T_tot * (1.0 - 1e-12):
                best = cand
    if best is None:
        return OptimizationResult(
            protocol=protocol, L_km=L_km, feasible=False
        )
    if protocol == "simon" and best.breakdown.P0 > 0.1:
        warnings.warn(
            f"N_m * P0 = {best.breakdown.P0:.3g} leaves the linear "
            "multiplexing regime",
            stacklevel=2,
        )
    return best


def _optimize_at_level(
    protocol: str,
    L_km: float,
    n: int,
    template: ProtocolParams,
    alpha2_step: float,
) -> Optional[OptimizationResult]:
    base = replace(template, L_km=L_km, n=n)
    grid_meta = {"n_max": float(N_MAX_DEFAULT)}

    if protocol in ("dlcz", "simon", "jiang"):
        cap = _emission_cap(protocol, n, base)
        p = min(cap, P_CEILING)
        if p <= 0.0 or not math.isfinite(p):
            p = P_CEILING if not math.isfinite(p) else p
        if p <= 0.0:
            return None
        bd = _evaluate(protocol, replace(base, p=p))
        return OptimizationResult(
            protocol=protocol,
            L_km=L_km,
            feasible=True,
            n=n,
            p=p,
            T_tot=bd.T_tot,
            constraint_active=p < P_CEILING,
            breakdown=bd,
            grid=grid_meta,
        )

    if protocol == "chen":
        bd = _evaluate(protocol, base)
        return OptimizationResult(
            protocol=protocol,
            L_km=L_km,
            feasible=True,
            n=n,
            T_tot=bd.T_tot,
            breakdown=bd,
            grid=grid_meta,
        )

    if protocol == "sps":
        def eval_sps(alpha2: float) -> float:
            return rates.sps_T_tot(replace(base, alpha2=alpha2)).T_tot

        alpha2, T = _scan_unit_interval(eval_sps, alpha2_step)
        bd = rates.sps_T_tot(replace(base, alpha2=alpha2))
        grid_meta["alpha2_step"] = alpha2_step
        return OptimizationResult(
            protocol=protocol,
            L_km=L_km,
            feasible=True,
            n=n,
            alpha2=alpha2,
            T_tot=T,
            breakdown=bd,
            grid=grid_meta,
        )

    if protocol in ("pair_source", "zhao"):
        p = template.p if template.p is not None else min(
            _emission_cap(protocol, n, base), P_CEILING
        )
        fn = rates.pair_source_T_tot if protocol == "pair_source" else rates.zhao_T_tot

        def eval_pair(alpha2: float) -> float:
            return fn(replace(base, p=p, alpha2=alpha2)).T_tot

        alpha2, T = _scan_unit_interval(eval_pair, alpha2_step)
        bd = fn(replace(base, p=p, alpha2=alpha2))
        grid_meta["alpha2_step"] = alpha2_step
        return OptimizationResult(
            protocol=protocol,
            L_km=L_km,
            feasible=True,
            n=n,
            p=p,
            alpha2=alpha2,
            T_tot=T,
            constraint_active=template.p is None,
            breakdown=bd,
            grid=grid_meta,
        )

    raise ValueError(f"unknown protocol {protocol!r}")


def _scan_unit_interval(fn, step: float) -> Tuple[float, float]:
    """Grid-scan (0,1) then refine around the best point.

    Two refinement rounds shrink the step a hundredfold, which is far
    below the 2% grid-stability requirement of the optimization results.
    """
    best_x, best_T = None, math.inf
    x = step
    while x < 1.0:
        try:
            T = fn(x)
        except (InfeasibleError, ValueError, ZeroDivisionError):
            T = math.inf
        if T < best_T:
            best_x, best_T = x, T
        x += step
    if best_x is None:
        raise InfeasibleError("no feasible point on the grid")
    for _ in range(2):
        step /= 10.0
        lo = max(step, best_x - 9.0 * step)
        hi = min(1.0 - step, best_x + 9.0 * step)
        x = lo
        while x <= hi:
            try:
                T = fn(x)
            except (InfeasibleError, ValueError, ZeroDivisionError):
                T = math.inf
            if T < best_T:
                best_x, best_T = x, T
            x += step
    return best_x, best_T


@dataclass(frozen=True)
class CurvePoint:
    L_km: float
    times: Dict[str, float]
    direct_s: float


def curve(
    protocols: Sequence[str],
    L_grid: Iterable[float],
    template: Optional[ProtocolParams] = None,
    *,
    source_rate: float = 1.0e10,
) -> Tuple[CurvePoint, ...]:
    """Optimized distribution time per protocol over a distance grid."""
    L_grid = list(L_grid)
    if L_grid and not (100.0 <= min(L_grid) and max(L_grid) <= 2500.0):
        raise ValueError("distance grid must stay within 100..2500 km")
    pts = []
    for L in sorted(L_grid):
        times = {
            proto: optimize(proto, L, template).T_tot for proto in protocols
        }
        pts.append(
            CurvePoint(
                L_km=L,
                times=times,
                direct_s=direct_transmission_time(L, source_rate),
            )
        )
    return tuple(pts)


def crossover(
    protocol: str,
    template: Optional[ProtocolParams] = None,
    *,
    source_rate: float = 1.0e10,
    bracket: Tuple[float, float] = (100.0, 2000.0),
    resolution_km: float = 1.0,
) -> Optional[float]:
    """Distance where the protocol starts to beat direct transmission.

    Bisection on log10(T_protocol) - log10(T_direct); returns None when
    the difference does not change sign over the bracket.
    """

    def gap(L: float) -> float:
        T = optimize(protocol, L, template).T_tot
        return math.log10(T) - math.log10(
            direct_transmission_time(L, source_rate)
        )

    lo, hi = bracket
    glo, ghi = gap(lo), gap(hi)
    if glo <= 0.0:  # already winning at the near end
        return lo
    if ghi > 0.0:
        return None
    while hi - lo > resolution_km:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sensitivity(
    protocol: str,
    parameter: str,
    grid: Iterable[float],
    L_km: float = 600.0,
    template: Optional[ProtocolParams] = None,
) -> Tuple[Tuple[float, float], ...]:
    """Optimized time at fixed distance versus one efficiency.

    ``parameter`` is "eta_m" or "eta_d"; the other efficiency keeps its
    template value.  For the single-photon-source protocol the source
    success probability follows the memory efficiency, because the
    ensemble-implemented source emits through the same memory readout.
    """
    if parameter not in ("eta_m", "eta_d"):
        raise ValueError("parameter must be eta_m or eta_d")
    template = template if template is not None else _default_template(L_km)
    out = []
    for value in grid:
        t = replace(template, **{parameter: value})
        if protocol == "sps" and parameter == "eta_m":
            t = replace(t, p1=value)
        out.append((value, optimize(protocol, L_km, t).T_tot))
    return tuple(out)
