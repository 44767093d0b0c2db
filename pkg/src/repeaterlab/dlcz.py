"""Brute-force repeater chain in the reduced two-memory representation.

An elementary link is built by an explicit circuit (two pair sources, a
balanced beam splitter, single-click heralding), then rescaled by its
leading click-probability monomial so that the entangled component sits
at order p^0.  Chains are grown by the reduced entanglement-swapping map
over the two memory modes, post-selected into the one-excitation-per-side
sector, and the fidelity is read off as a series in the emission
probability p.  The error coefficients multiplying p(1-eta) and
p^2(1-eta)^2 come out as integers; the full-circuit swap is kept as an
independent oracle for the reduced map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple, Union

from .fock import DetectorModel, FockDensity, pair_source_state
from .series import PSeries, value_is_zero

Value = Union[complex, PSeries]

#: extracted error coefficients must sit this close to an integer
INTEGER_TOL = 1e-6

#: modes of a link state: memory at the left node, memory at the right node
LINK_MODES = ("sA", "sB")


@dataclass(frozen=True)
class TwoModeLink:
    """Heralded link (or chain) state over two memory modes.

    ``rho`` has its heralding prefactor peeled off, so its trace starts
    at order p^0.  ``success_prob`` is the raw conditioning probability
    of the elementary link (for a chain, of the last operation).  ``eta``
    is the combined memory-times-detector efficiency to be used when this
    state enters an entanglement swap; it may be overridden per swap.
    """

    rho: FockDensity
    success_prob: Value
    eta: float | None = None

    def trace(self) -> Value:
        return self.rho.trace()


@dataclass(frozen=True)
class ErrorCoefficients:
    """Multiphoton fidelity-loss coefficients at nesting level n."""

    n: int
    A_n: float
    B_n: float
    eta_checked: Tuple[float, ...]


def _lead(x: Value) -> complex:
    if isinstance(x, PSeries):
        return x.u_coeffs[0]
    return complex(x)


def _inverse_value(x: Value) -> Value:
    if isinstance(x, PSeries):
        return x.inverse()
    return 1.0 / complex(x)


def elementary_link(
    p: Union[PSeries, float, None] = None,
    eta_det_t: float | None = None,
    *,
    approx: bool = True,
    cutoff: int = 4,
    source_order: int = 3,
    eta_swap: float | None = None,
) -> TwoModeLink:
    """Conditional two-memory state of one heralded link.

    Circuit: a pair source at each node, photonic modes combined on a
    balanced beam splitter, one click in the first output and none in the
    second, both click branches merged with the corrective pi phase.

    With ``approx=True`` the heralding detector is taken in the
    vanishing-efficiency limit appropriate for strong fiber loss (the
    n-photon click weight is proportional to n), which removes the
    generation efficiency from the normalized state.  With
    ``approx=False`` the exact click statistics at combined efficiency
    ``eta_det_t`` (detector times transmission) are used; then
    ``success_prob`` carries the physical click probability, whose
    leading term is p * eta_det_t.

    ``source_order`` is the number of pair emissions retained per source;
    the default 3 keeps the rescaled state exact through order p^2.  The
    circuit runs at an internal cutoff large enough for the interfering
    photons, and the returned two-memory state is expressed at ``cutoff``.
    """
    if p is None:
        p = PSeries.variable()
    if not approx:
        if eta_det_t is None or not 0.0 < eta_det_t <= 1.0:
            raise ValueError("exact conditioning needs eta_det_t in (0, 1]")
    if cutoff < source_order:
        raise ValueError("cutoff cannot hold the retained pair number")
    circuit_cutoff = max(cutoff, 2 * source_order)
    src_a = pair_source_state(p, source_order, ("sA", "a"), circuit_cutoff)
    src_b = pair_source_state(p, source_order, ("sB", "b"), circuit_cutoff)
    joint = src_a.tensor(src_b)
    s = 1.0 / math.sqrt(2.0)
    mixed = joint.apply_beam_splitter("a", "b", s, s)  # a -> d, b -> dtilde

    if approx:
        clicked = mixed.detect_one_limit("a")
        cond = clicked.partial_trace(LINK_MODES)
    else:
        det = DetectorModel(eta_det_t)
        clicked, _ = mixed.detect_one("a", det)
        cond, _ = clicked.detect_none("b", det)
        cond = cond.partial_trace(LINK_MODES)
    cond = FockDensity(LINK_MODES, cutoff, cond.entries)

    # the dtilde branch equals this one after the corrective pi phase,
    # so merging the two heralding patterns doubles the weight
    cond = cond.scale(2.0)
    prob = cond.trace()

    symbolic = isinstance(prob, PSeries)
    if symbolic:
        lead = prob.u_coeffs[2]
        if abs(lead) <= 1e-30:
            raise ValueError("heralding never succeeds at leading order")
        rho = cond.map_entries(lambda v: (v * (1.0 / lead)).shift_down(1))
    else:
        # numeric mode: peel the same leading monomial as the series
        # pipeline, p in the vanishing-efficiency limit and p*eta_det_t
        # with exact click statistics
        lead = float(p) * (1.0 if approx else eta_det_t)
        if abs(lead) <= 1e-300:
            raise ValueError("heralding never succeeds at leading order")
        rho = cond.scale(1.0 / lead)
    return TwoModeLink(rho=rho, success_prob=prob, eta=eta_swap)


@lru_cache(maxsize=None)
def _f_comb(l: int, m: int, r: int) -> float:
    """Beam-splitter combinatorial factor with annihilating factorials."""
    total = 0.0
    for q in range(l + 1):
        a, b, c = l - q, q + m - r, r - q
        if a < 0 or b < 0 or c < 0:
            continue
        term = 1.0 / (
            math.factorial(q)
            * math.factorial(a)
            * math.factorial(b)
            * math.factorial(c)
        )
        total += -term if q % 2 else term
    return total


@lru_cache(maxsize=None)
def _swap_weight(l: int, m: int, lp: int, mp: int, eta: float) -> float:
    """Detection weight of the reduced swap map for one index combination."""
    tot = l + m
    if tot == 0 or tot != lp + mp:
        return 0.0
    rsum = 0.0
    for r in range(1, tot + 1):
        rsum += (
            r
            * math.factorial(r)
            * math.factorial(tot - r)
            * _f_comb(l, m, r)
            * _f_comb(lp, mp, r)
        )
    if rsum == 0.0:
        return 0.0
    comb = math.sqrt(
        math.factorial(l)
        * math.factorial(m)
        * math.factorial(lp)
        * math.factorial(mp)
    )
    return eta * (1.0 - eta) ** (tot - 1) * 2.0 ** (-tot) * comb * rsum


def swap(
    left: TwoModeLink, right: TwoModeLink, eta: float | None = None
) -> TwoModeLink:
    """Entanglement swap of two links via a single heralding click.

    Implements the reduced map over the outer memory modes: the inner
    memories are read out, interfered, and exactly one click is required,
    with photons lost to readout and detection at combined efficiency
    ``eta``.  Both click branches are merged with the corrective pi phase
    applied to the right output memory.  The output is unnormalized
    except for a division by the input traces, so its trace is the swap
    success-probability series conditioned on both input chains.
    """
    if eta is None:
        eta = left.eta if left.eta is not None else right.eta
    if eta is None or not 0.0 < eta <= 1.0:
        raise ValueError("swap needs a combined efficiency eta in (0, 1]")
    lrho, rrho = left.rho, right.rho
    out = FockDensity(LINK_MODES, max(lrho.cutoff, rrho.cutoff))
    for ((k, l), (kp, lp)), v1 in lrho.entries.items():
        for ((m, n), (mp, np_)), v2 in rrho.entries.items():
            w = _swap_weight(l, m, lp, mp, eta)
            if w == 0.0:
                continue
            # merged heralding branches (factor 2) and pi correction on
            # the right memory, (-1)^(n + n')
            w *= 2.0
            if (n + np_) % 2:
                w = -w
            key = ((k, n), (kp, np_))
            add = v1 * v2 * w
            acc = out.entries.get(key)
            nv = add if acc is None else acc + add
            if value_is_zero(nv, 1e-30):
                out.entries.pop(key, None)
            else:
                out.entries[key] = nv
    out = out.scale(_inverse_value(left.trace() * right.trace()))
    return TwoModeLink(rho=out, success_prob=out.trace(), eta=eta)


def swap_circuit(
    left: TwoModeLink,
    right: TwoModeLink,
    eta_m: float,
    eta_d: float,
) -> TwoModeLink:
    """Full-circuit oracle for `swap`: readout loss, beam splitter,
    single click on one output with no click on the other, both branches
    merged with the corrective pi phase on the right memory.
    """

    def max_occ(state: FockDensity) -> int:
        return max(
            (max(max(k), max(b)) for k, b in state.entries),
            default=0,
        )

    # the interfering readout modes can hold the sum of both occupancies
    cutoff = max(
        left.rho.cutoff,
        right.rho.cutoff,
        max_occ(left.rho) + max_occ(right.rho),
    )
    lrho = FockDensity(left.rho.modes, cutoff, left.rho.entries)
    rrho = FockDensity(("sC", "sD"), cutoff, right.rho.entries)
    joint = (
        lrho.tensor(rrho)
        .apply_loss("sB", eta_m)
        .apply_loss("sC", eta_m)
    )
    s = 1.0 / math.sqrt(2.0)
    mixed = joint.apply_beam_splitter("sB", "sC", s, s)
    det = DetectorModel(eta_d)
    b1, _ = mixed.detect_one("sB", det)
    b1, _ = b1.detect_none("sC", det)
    b2, _ = mixed.detect_none("sB", det)
    b2, _ = b2.detect_one("sC", det)
    merged = b1.add(b2.phase_flip("sD"))
    merged = _relabel(merged, LINK_MODES)
    merged = merged.scale(_inverse_value(left.trace() * right.trace()))
    return TwoModeLink(
        rho=merged, success_prob=merged.trace(), eta=eta_m * eta_d
    )


def _relabel(state: FockDensity, modes: Tuple[str, ...]) -> FockDensity:
    out = FockDensity(modes, state.cutoff)
    out.entries = dict(state.entries)
    return out


def post_select(
    pair1: TwoModeLink, pair2: TwoModeLink, eta: float
) -> Tuple[FockDensity, Value]:
    """Project two distributed chains onto one excitation per side.

    All four memories are read out and counted; conditioning on a single
    click per side applies the measurement update sqrt(E) rho sqrt(E)
    with E built from the single-click probabilities p_j = j eta
    (1-eta)^(j-1), so an entry is weighted by the geometric mean of the
    ket-side and bra-side click probabilities.  (Weighting ket and bra
    factors independently would square the detector factors on diagonal
    elements, which is inconsistent with both the stated fidelity form
    and the closed-form post-selection probability alpha_n^2 eta^2 / 2.)
    Returns the four-mode state (modes a1, a2, z1, z2) and the
    post-selection probability given both chains, i.e. trace(sigma)
    normalized by the chain traces.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("post-selection needs eta in (0, 1]")

    def p_click(j: int) -> float:
        return j * eta * (1.0 - eta) ** (j - 1) if j > 0 else 0.0

    r1, r2 = pair1.rho, pair2.rho
    cutoff = max(r1.cutoff, r2.cutoff)
    sigma = FockDensity(("a1", "a2", "z1", "z2"), cutoff)
    for ((k, m), (kp, mp)), v1 in r1.entries.items():
        for ((l, n), (lp, np_)), v2 in r2.entries.items():
            w = math.sqrt(
                p_click(k + l)
                * p_click(m + n)
                * p_click(kp + lp)
                * p_click(mp + np_)
            )
            if w == 0.0:
                continue
            key = ((k, l, m, n), (kp, lp, mp, np_))
            add = v1 * v2 * w
            acc = sigma.entries.get(key)
            nv = add if acc is None else acc + add
            if value_is_zero(nv, 1e-30):
                sigma.entries.pop(key, None)
            else:
                sigma.entries[key] = nv
    denom = r1.trace() * r2.trace()
    tr = sigma.trace()
    if isinstance(tr, PSeries) or isinstance(denom, PSeries):
        tr = tr if isinstance(tr, PSeries) else PSeries([tr])
        denom = denom if isinstance(denom, PSeries) else PSeries([denom])
        p_ps = tr / denom
    else:
        p_ps = tr / denom
    return sigma, p_ps


#: ideal post-selected target, (|1001> + |0110>)/sqrt(2) on (a1,a2,z1,z2)
_TARGET = {
    (1, 0, 0, 1): 2.0 ** -0.5,
    (0, 1, 1, 0): 2.0 ** -0.5,
}


def final_fidelity(sigma: FockDensity) -> Value:
    """Overlap of the normalized post-selected state with the ideal one."""
    return sigma.fidelity(_TARGET)


def build_chain(
    n: int,
    eta: float,
    p: Union[PSeries, float, None] = None,
    *,
    approx: bool = True,
    eta_det_t: float | None = None,
    cutoff: int = 4,
) -> TwoModeLink:
    """Chain spanning 2^n elementary links after n swap levels."""
    if n < 0:
        raise ValueError("nesting level must be nonnegative")
    link = elementary_link(
        p, eta_det_t, approx=approx, cutoff=cutoff, eta_swap=eta
    )
    chain = link
    for _ in range(n):
        chain = swap(chain, chain, eta)
    return chain


def extract_coefficients(
    n: int,
    eta: float,
    *,
    cutoff: int = 4,
    eta_checked: Tuple[float, ...] = (),
) -> ErrorCoefficients:
    """Exact multiphoton error coefficients at nesting level n.

    Builds the 2 * 2^n-link repeater symbolically, post-selects, and
    identifies F(n) = 1 - A_n p (1-eta) + B_n p^2 (1-eta)^2.  The
    extracted A_n and B_n must be integers to within ``INTEGER_TOL``;
    anything else signals an implementation bug and raises.
    """
    if not 0 <= n <= 4:
        raise ValueError("coefficients are tabulated for n in 0..4")
    if not 0.0 < eta < 1.0:
        raise ValueError("extraction needs 0 < eta < 1")
    chain = build_chain(n, eta, cutoff=cutoff)
    sigma, _ = post_select(chain, chain, eta)
    fid = final_fidelity(sigma)
    c0, c1, c2 = fid.coeffs
    if abs(c0 - 1.0) > 1e-9:
        raise ArithmeticError(f"fidelity does not start at 1: {c0!r}")
    if abs(c1.imag) > 1e-9 or abs(c2.imag) > 1e-9:
        raise ArithmeticError("fidelity coefficients are not real")
    a_n = -c1.real / (1.0 - eta)
    b_n = c2.real / (1.0 - eta) ** 2
    if abs(a_n - round(a_n)) > INTEGER_TOL or abs(b_n - round(b_n)) > INTEGER_TOL:
        raise ArithmeticError(
            f"non-integer error coefficients A={a_n!r}, B={b_n!r}"
        )
    return ErrorCoefficients(
        n=n, A_n=a_n, B_n=b_n, eta_checked=eta_checked or (eta,)
    )


def verified_coefficients(
    n: int, etas: Tuple[float, ...] = (0.5, 0.81, 0.9)
) -> ErrorCoefficients:
    """Extract A_n, B_n and verify they are identical across ``etas``.

    Agreement across efficiencies confirms that the fidelity loss factors
    into powers of (1 - eta) exactly.
    """
    results = [extract_coefficients(n, eta) for eta in etas]
    first = results[0]
    for c in results[1:]:
        if abs(c.A_n - first.A_n) > INTEGER_TOL or abs(
            c.B_n - first.B_n
        ) > INTEGER_TOL:
            raise ArithmeticError(
                f"coefficients vary with eta at level {n}: {results!r}"
            )
    return ErrorCoefficients(
        n=n, A_n=first.A_n, B_n=first.B_n, eta_checked=tuple(etas)
    )


def dlcz_mixture_weights(n: int, eta: float) -> Tuple[float, float]:
    """Entangled and vacuum weights (alpha_n, beta_n) of the chain state.

    alpha_0 = 1, beta_0 = 0 and alpha_i = alpha_{i-1} / (2 - alpha_{i-1}
    eta); the vacuum-to-entangled ratio obeys beta_n / alpha_n =
    (1 - eta) (2^n - 1).
    """
    if n < 0:
        raise ValueError("nesting level must be nonnegative")
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    alpha = 1.0
    for _ in range(n):
        alpha = alpha / (2.0 - alpha * eta)
    return alpha, 1.0 - alpha


def swap_success_p0(
    left: TwoModeLink, right: TwoModeLink, eta: float
) -> float:
    """Order-p^0 success probability of one swap of the given chains."""
    return _lead(swap(left, right, eta).trace()).real


def chain_vacuum_ratio(chain: TwoModeLink) -> float:
    """beta/alpha of the order-p^0 chain state (vacuum over entangled)."""

    def lead(v: Value) -> float:
        if isinstance(v, PSeries):
            return v.coeffs[0].real
        return v.real

    vac = lead(chain.rho.entries.get(((0, 0), (0, 0)), 0j))
    psi = 0.0
    for key in (((0, 1), (0, 1)), ((1, 0), (1, 0))):
        psi += lead(chain.rho.entries.get(key, 0j))
    if psi == 0.0:
        raise ArithmeticError("chain has no entangled component")
    return vac / psi
