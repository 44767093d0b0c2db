"""Closed-form entanglement-distribution times for the compared protocols.

Each protocol function takes a `ProtocolParams` record and returns a
`RateBreakdown` with the elementary success probability, the swap
probabilities per nesting level, the final post-selection probability,
and the total time.  Every total time follows the generic waiting-time
structure

    T_tot = (base period) * (product of f factors) / (product of success
            probabilities),

with f = 3/2 per doubling step in the small-probability limit; the
closed forms below are the algebraically reduced versions of that
product.  Distances are kilometers, times seconds, rates hertz.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

#: multiphoton error coefficients of the single-click-swap chain,
#: verified against the brute-force density-matrix pipeline
A_TABLE = (8.0, 18.0, 56.0, 204.0, 788.0)
B_TABLE = (37.0, 250.0, 2966.0, 43206.0, 669702.0)

#: waiting-time prefactor for one doubling step at small probability
F_STEP = 1.5
#: waiting-time prefactor for four parallel heralds (harmonic number H_4)
F_FOUR = 25.0 / 12.0



class InfeasibleError(ValueError):
    """No parameter setting satisfies the constraints."""


@dataclass(frozen=True)
class ProtocolParams:
    """Physical parameter record shared by all protocol rate models."""

    L_km: float
    n: int = 0
    L_att_km: float = 22.0
    c_fiber: float = 2.0e8
    eta_m: float = 0.9
    eta_d: float = 0.9
    p: Optional[float] = None
    p1: float = 0.9
    alpha2: Optional[float] = None
    N_m: int = 1
    rep_rate: float = 1.0e7
    F_target: float = 0.9

    def __post_init__(self):
        if self.L_km <= 0:
            raise ValueError("total distance must be positive")
        if self.n < 0:
            raise ValueError("nesting level must be nonnegative")
        if self.L_att_km <= 0 or self.c_fiber <= 0 or self.rep_rate <= 0:
            raise ValueError("attenuation length, light speed, and "
                             "repetition rate must be positive")
        for name in ("eta_m", "eta_d", "p1", "F_target"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.p is not None and not 0.0 < self.p <= 1.0:
            raise ValueError("p must lie in (0, 1]")
        if self.alpha2 is not None and not 0.0 <= self.alpha2 <= 1.0:
            raise ValueError("alpha2 must lie in [0, 1]")
        if self.N_m < 1:
            raise ValueError("mode count must be at least 1")

    @property
    def links(self) -> int:
        return 2**self.n

    @property
    def L0_km(self) -> float:
        return self.L_km / self.links

    @property
    def comm_time(self) -> float:
        """Base period L0/c in seconds."""
        return self.L0_km * 1000.0 / self.c_fiber

    @property
    def eta(self) -> float:
        return self.eta_m * self.eta_d

    @property
    def eta_t(self) -> float:
        return transmission(self.L0_km, self.L_att_km)

    @property
    def beta2(self) -> float:
        if self.alpha2 is None:
            raise ValueError("alpha2 is not set")
        return 1.0 - self.alpha2


@dataclass(frozen=True)
class LinkWeights:
    """Entangled / single-excitation / vacuum weights of a link state.

    Normalized as c2 + 4*c1 + c0 = 1 over the one entangled, four
    single-excitation, and one vacuum sectors.
    """

    c2: float
    c1: float
    c0: float

    def normalization_defect(self) -> float:
        return abs(self.c2 + 4.0 * self.c1 + self.c0 - 1.0)

    def stationarity_defect(self) -> float:
        """c0*c2 - 4*c1^2; zero for swap-stationary weights."""
        return self.c0 * self.c2 - 4.0 * self.c1**2

    def swap_update(self, eta: float) -> Tuple["LinkWeights", float]:
        """One two-photon-detection swap of two identical links.

        The entangled mass comes from both inputs entangled (detector
        weight eta^2/2), the single-excitation mass from entangled paired
        with an inner single, the vacuum mass from two inner singles.
        Returns the renormalized output weights and the swap success
        probability 2 eta^2 (c2/2 + c1)^2.
        """
        if not 0.0 < eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")
        m2 = 0.5 * eta**2 * self.c2**2
        m1 = 0.5 * eta**2 * self.c2 * self.c1
        m0 = 2.0 * eta**2 * self.c1**2
        prob = m2 + 4.0 * m1 + m0
        return LinkWeights(m2 / prob, m1 / prob, m0 / prob), prob


@dataclass(frozen=True)
class RateBreakdown:
    """Per-protocol result with the provenance of every factor."""

    protocol: str
    params: ProtocolParams
    T_tot: float
    P0: float
    swap_probs: Tuple[float, ...]
    P_ps: float
    f_product: float
    base_period: float
    T_prep: Optional[float] = None
    T_s: Optional[float] = None
    weights: Optional[LinkWeights] = None
    notes: Tuple[str, ...] = ()
    extras: Dict[str, float] = field(default_factory=dict)

    def product_form(self) -> float:
        """base * f_product / (P0 * prod(P_i) * P_ps), for cross-checks."""
        denom = self.P0 * math.prod(self.swap_probs) * self.P_ps
        return self.base_period * self.f_product / denom


# ---------------------------------------------------------------------------
# elementary ingredients


def transmission(L0_km: float, L_att_km: float = 22.0) -> float:
    """Fiber transmission for photons traveling half a link, exp(-L0/(2 L_att))."""
    if L0_km < 0:
        raise ValueError("distance must be nonnegative")
    return math.exp(-L0_km / (2.0 * L_att_km))


def direct_transmission_time(
    L_km: float,
    source_rate: float = 1.0e10,
    atten_db_per_km: float = 0.2,
) -> float:
    """Seconds per transmitted photon for a source fired through fiber."""
    if L_km < 0:
        raise ValueError("distance must be nonnegative")
    return (1.0 / source_rate) * 10.0 ** (atten_db_per_km * L_km / 10.0)


def dlcz_alpha(i: int, eta: float) -> float:
    """Entangled weight after i single-click swap levels, 1/(2^i-(2^i-1)eta)."""
    return 1.0 / (2.0**i - (2.0**i - 1.0) * eta)


def max_p_for_fidelity(n: int, eta: float, F_target: float = 0.9) -> float:
    """Largest p with F >= F_target under the linear loss model A_n p (1-eta).

    Returns infinity when eta = 1 (multiphoton errors vanish and p is
    unconstrained).
    """
    if not 0 <= n < len(A_TABLE):
        raise ValueError("no tabulated coefficient for this nesting level")
    if eta >= 1.0:
        return math.inf
    return (1.0 - F_target) / (A_TABLE[n] * (1.0 - eta))


def max_p_for_fidelity_quadratic(
    n: int, eta: float, F_target: float = 0.9
) -> float:
    """Largest p with F >= F_target keeping the quadratic term B_n.

    Solves A_n x - B_n x^2 = 1 - F_target for x = p (1-eta) and returns
    the first crossing; if the loss never reaches 1 - F_target the model
    validity edge x = A_n / (2 B_n) is returned.  Infinite when eta = 1.
    """
    if not 0 <= n < len(A_TABLE):
        raise ValueError("no tabulated coefficient for this nesting level")
    if eta >= 1.0:
        return math.inf
    a, b = A_TABLE[n], B_TABLE[n]
    loss = 1.0 - F_target
    disc = a * a - 4.0 * b * loss
    x = a / (2.0 * b) if disc < 0 else (a - math.sqrt(disc)) / (2.0 * b)
    return x / (1.0 - eta)


def jiang_max_p(n: int, eta: float, F_target: float = 0.9) -> float:
    """Emission-probability cap for the two-photon-swap protocol.

    Anchored to the published operating value p = 0.037 for 4 links at
    eta = 0.81 and F = 0.9, scaled with the linear-in-links error growth
    of that protocol and the universal p (1-eta) multiphoton structure.
    """
    if eta >= 1.0:
        return math.inf
    anchor = 0.037 * 4.0 * 0.19 * 10.0  # p * N * (1-eta) / (1-F) at anchor
    return anchor * (1.0 - F_target) / (2.0**n * (1.0 - eta))


def pair_source_max_p(n: int, F_target: float = 0.9) -> float:
    """Emission-probability cap for the local-pair protocol.

    Anchored to the published operating value p = 0.013 for 8 links at
    F = 0.9, scaled with the linear-in-links error growth common to the
    two-photon-swapping schemes.
    """
    return 0.013 * 8.0 * 10.0 * (1.0 - F_target) / 2.0**n


def sps_two_photon_amplitude(p: float, eta_d: float, eta_m: float) -> float:
    """Residual two-photon amplitude of an ensemble single-photon source."""
    return 2.0 * p * (1.0 - eta_d) * eta_m

def sps_p_for_two_photon(p2: float, eta_d: float, eta_m: float) -> float:
    """Emission probability that realizes a target two-photon amplitude."""
    if eta_d >= 1.0:
        return math.inf
    return p2 / (2.0 * (1.0 - eta_d) * eta_m)


# ---------------------------------------------------------------------------
# stationary link weights


def jiang_weights(eta: float) -> LinkWeights:
    d = (2.0 - eta) ** 2
    return LinkWeights(
        c2=1.0 / d,
        c1=(1.0 - eta) / (2.0 * d),
        c0=(1.0 - eta) ** 2 / d,
    )


def chen_weights(eta: float, eta_t: float) -> LinkWeights:
    ee = eta * eta_t
    d = (2.0 - ee) ** 2
    return LinkWeights(
        c2=1.0 / d,
        c1=(1.0 - ee) / (2.0 * d),
        c0=(1.0 - ee) ** 2 / d,
    )


def pair_source_weights(alpha2: float, eta: float) -> LinkWeights:
    beta2 = 1.0 - alpha2
    d = (1.0 - alpha2 * eta) ** 2
    return LinkWeights(
        c2=beta2**2 / d,
        c1=alpha2 * beta2 * (1.0 - eta) / (2.0 * d),
        c0=alpha2**2 * (1.0 - eta) ** 2 / d,
    )


# ---------------------------------------------------------------------------
# protocol rate models


def dlcz_T_tot(params: ProtocolParams) -> RateBreakdown:
    """Single-click generation and single-click swapping.

    T_tot = 3^(n+1) (L0/c) prod_k (2^k - (2^k-1) eta)
            / (eta_d eta_t p eta^(n+2)).
    """
    if params.p is None or params.p <= 0:
        raise ValueError("emission probability p must be set and positive")
    eta, eta_t, n = params.eta, params.eta_t, params.n
    if eta == 0 or eta_t == 0:
        raise ValueError("vanishing efficiency never distributes a pair")
    prod = math.prod(
        2.0**k - (2.0**k - 1.0) * eta for k in range(1, n + 1)
    )
    T = (
        3.0 ** (n + 1)
        * params.comm_time
        * prod
        / (params.eta_d * eta_t * params.p * eta ** (n + 2))
    )
    P0 = params.p * params.eta_d * eta_t
    swaps = tuple(
        dlcz_alpha(i - 1, eta) * eta * (1.0 - dlcz_alpha(i - 1, eta) * eta / 2.0)
        for i in range(1, n + 1)
    )
    P_ps = dlcz_alpha(n, eta) ** 2 * eta**2 / 2.0
    return RateBreakdown(
        protocol="dlcz",
        params=params,
        T_tot=T,
        P0=P0,
        swap_probs=swaps,
        P_ps=P_ps,
        f_product=F_STEP ** (n + 1),
        base_period=params.comm_time,
    )


def simon_multimode_T_tot(params: ProtocolParams) -> RateBreakdown:
    """Temporal multimode variant: N_m generation attempts per period.

    Valid while N_m * P0 stays small; warns above 0.1.
    """
    base = dlcz_T_tot(params)
    boosted = base.P0 * params.N_m
    if boosted > 0.1:
        warnings.warn(
            f"N_m * P0 = {boosted:.3g} leaves the linear multiplexing "
            "regime",
            stacklevel=2,
        )
    return replace(
        base,
        protocol="simon",
        T_tot=base.T_tot / params.N_m,
        P0=boosted,
        extras={"N_m": float(params.N_m)},
    )


def jiang_T_tot(params: ProtocolParams) -> RateBreakdown:
    """Single-click generation with two-photon-detection swapping.

    T_tot = (50/3) 3^(n-1) (L0/c) (2-eta)^(2(n-1))
            / (p eta_t eta_d eta^(2n+2)).
    """
    if params.n < 1:
        raise ValueError("the polarization swap needs at least one level")
    if params.p is None or params.p <= 0:
        raise ValueError("emission probability p must be set and positive")
    eta, eta_t, n = params.eta, params.eta_t, params.n
    T = (
        (50.0 / 3.0)
        * 3.0 ** (n - 1)
        * params.comm_time
        * (2.0 - eta) ** (2 * (n - 1))
        / (params.p * eta_t * params.eta_d * eta ** (2 * n + 2))
    )
    P0 = params.p * params.eta_d * eta_t
    P1 = eta**2 * (2.0 - eta) ** 2 / 8.0
    Pi = eta**2 / (2.0 * (2.0 - eta) ** 2)
    P_ps = eta**2 / (2.0 - eta) ** 2
    w = jiang_weights(eta)
    T0 = F_FOUR * params.comm_time / P0
    return RateBreakdown(
        protocol="jiang",
        params=params,
        T_tot=T,
        P0=P0,
        swap_probs=(P1,) + (Pi,) * (n - 1),
        P_ps=P_ps,
        f_product=F_FOUR * F_STEP ** (n - 1),
        base_period=params.comm_time,
        weights=w,
        extras={"T_0": T0},
    )


def chen_T_tot(
    params: ProtocolParams, include_prep: bool = False
) -> RateBreakdown:
    """Two-photon generation and swapping from locally prepared links.

    T_tot = 8 * 3^n * (L0/c) (2 - eta eta_t)^(2n) / (eta_t^2 eta^(2n+4)),
    a lower bound that ignores the local preparation time unless
    ``include_prep`` is set (then the base period acquires
    T_prep = 25/(12 r p eta_d), which needs p).
    """
    eta, eta_t, n = params.eta, params.eta_t, params.n
    T_prep = None
    base = params.comm_time
    notes = ("lower-bound",)
    if include_prep:
        if params.p is None or params.p <= 0:
            raise ValueError("preparation time needs the emission "
                             "probability p")
        T_prep = F_FOUR / (params.rep_rate * params.p * params.eta_d)
        base = params.comm_time + T_prep
        notes = ()
    T = (
        8.0
        * 3.0**n
        * base
        * (2.0 - eta * eta_t) ** (2 * n)
        / (eta_t**2 * eta ** (2 * n + 4))
    )
    P0 = eta**2 * eta_t**2 * (2.0 - eta * eta_t) ** 2 / 8.0
    Pi = eta**2 / (2.0 * (2.0 - eta * eta_t) ** 2)
    P_ps = eta**2 / (2.0 - eta * eta_t) ** 2
    return RateBreakdown(
        protocol="chen",
        params=params,
        T_tot=T,
        P0=P0,
        swap_probs=(Pi,) * n,
        P_ps=P_ps,
        f_product=F_STEP**n,
        base_period=base,
        T_prep=T_prep,
        weights=chen_weights(eta, eta_t),
        notes=notes,
    )


def sps_T_tot(params: ProtocolParams) -> RateBreakdown:
    """Single-photon-source generation with single-click swapping.

    T_tot = (3^(n+1)/2) (L0/c)
            prod_k (2^k - (2^k-1) p1 alpha^2 eta)
            / (eta_d eta_t p1^(n+3) beta^2 alpha^(2n+4) eta^(n+2)).
    """
    if params.alpha2 is None:
        raise ValueError("the local beam-splitter reflectivity alpha2 "
                         "must be set")
    beta2 = params.beta2
    if beta2 <= 0.0:
        raise ValueError("beta2 = 0 sends no photons to the station")
    eta, eta_t, n = params.eta, params.eta_t, params.n
    u = params.p1 * params.alpha2 * eta
    if u <= 0.0:
        raise ValueError("p1 * alpha2 * eta must be positive")
    prod = math.prod(2.0**k - (2.0**k - 1.0) * u for k in range(1, n + 1))
    T = (
        3.0 ** (n + 1)
        / 2.0
        * params.comm_time
        * prod
        / (
            params.eta_d
            * eta_t
            * params.p1 ** (n + 3)
            * beta2
            * params.alpha2 ** (n + 2)
            * eta ** (n + 2)
        )
    )
    P0 = 2.0 * params.p1 * beta2 * eta_t * params.eta_d

    def h(i: int) -> float:
        return 2.0**i - (2.0**i - 1.0) * u

    swaps = tuple(
        0.5 * params.p1 * params.alpha2 * eta * h(i) / h(i - 1) ** 2
        for i in range(1, n + 1)
    )
    P_ps = (
        0.5
        * eta**2
        * (params.p1 * params.alpha2) ** 2
        / h(n) ** 2
    )
    return RateBreakdown(
        protocol="sps",
        params=params,
        T_tot=T,
        P0=P0,
        swap_probs=swaps,
        P_ps=P_ps,
        f_product=F_STEP ** (n + 1),
        base_period=params.comm_time,
    )


#: preparation-time composition: "mean-cycles" charges one mean
#: charge-and-project cycle per realized pair, T^eta / P_s^eta;
#: "displayed" adds the two-ends max factor 3/2 on top
PAIR_SOURCE_TS_CONVENTION = "mean-cycles"


def pair_source_T_s(params: ProtocolParams) -> float:
    """Mean preparation time of one heralded local pair at a link end.

    One cycle charges all four ensembles, T^eta = 25/(12 r p eta_d), and
    attempts the projective pair preparation, which succeeds with
    P_s^eta = 2 eta^2 alpha^4 (1 - alpha^2 eta)^2; the mean time per
    prepared pair is the cycle time over the success probability.
    """
    if params.p is None or params.p <= 0:
        raise ValueError("source preparation needs the emission "
                         "probability p")
    if params.alpha2 is None:
        raise ValueError("the partial-readout amplitude alpha2 must be set")
    T_eta = F_FOUR / (params.rep_rate * params.p * params.eta_d)
    ps = (
        2.0
        * params.eta**2
        * params.alpha2**2
        * (1.0 - params.alpha2 * params.eta) ** 2
    )
    if ps <= 0.0:
        raise InfeasibleError("the local pair preparation never succeeds")
    T_s = T_eta / ps
    if PAIR_SOURCE_TS_CONVENTION == "displayed":
        T_s *= F_STEP
    return T_s


def pair_source_T_tot(params: ProtocolParams) -> RateBreakdown:
    """Locally prepared entangled pairs with two-photon operations.

    T_tot = 2 * 3^n * (T_s + L0/c) (1 - alpha^2 eta)^(2(n+2))
            / (eta_t^2 eta^(2(n+2)) beta^(4(n+2))).
    """
    if params.alpha2 is None:
        raise ValueError("the partial-readout amplitude alpha2 must be set")
    beta2 = params.beta2
    if beta2 <= 0.0:
        raise InfeasibleError("beta2 = 0 never emits toward the station")
    eta, eta_t, n = params.eta, params.eta_t, params.n
    T_s = pair_source_T_s(params)
    base = T_s + params.comm_time
    m = n + 2
    T = (
        2.0
        * 3.0**n
        * base
        * (1.0 - params.alpha2 * eta) ** (2 * m)
        / (eta_t**2 * eta ** (2 * m) * beta2 ** (2 * m))
    )
    d = (1.0 - params.alpha2 * eta) ** 2
    P0 = eta**2 * eta_t**2 * beta2**2 / (2.0 * d)
    Pi = eta**2 * beta2**2 / (2.0 * d)
    P_ps = eta**2 * beta2**2 / d
    return RateBreakdown(
        protocol="pair_source",
        params=params,
        T_tot=T,
        P0=P0,
        swap_probs=(Pi,) * n,
        P_ps=P_ps,
        f_product=F_STEP**n,
        base_period=base,
        T_s=T_s,
        weights=pair_source_weights(params.alpha2, eta),
    )


def zhao_T_tot(params: ProtocolParams) -> RateBreakdown:
    """Direct two-photon generation over the fiber.

    Order-of-magnitude model only: a factor 1/p^2 slower than the
    locally-prepared-pair protocol, as stated where the protocol is
    dismissed.
    """
    if params.p is None or params.p <= 0:
        raise ValueError("emission probability p must be set and positive")
    base = pair_source_T_tot(params)
    return replace(
        base,
        protocol="zhao",
        T_tot=base.T_tot / params.p**2,
        notes=base.notes + ("order-of-magnitude",),
    )


PROTOCOLS = {
    "dlcz": dlcz_T_tot,
    "jiang": jiang_T_tot,
    "chen": chen_T_tot,
    "simon": simon_multimode_T_tot,
    "sps": sps_T_tot,
    "pair_source": pair_source_T_tot,
    "zhao": zhao_T_tot,
}
