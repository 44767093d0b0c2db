"""Truncated multimode Fock-space density operators and linear optics.

States are sparse maps from (ket occupation tuple, bra occupation tuple)
to an entry value.  Entries are either `PSeries` scalars (symbolic in the
emission probability p) or plain complex numbers (numeric mode); every
operation below is agnostic to the choice.  All operations are pure and
return new states.

The three channels provided are the ones a heralded-link circuit needs:
a two-mode beam splitter acting on creation operators, a photon-loss
channel, and number-resolving detection with finite efficiency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Tuple, Union

from .series import PSeries, conj_value, value_is_zero

Occ = Tuple[int, ...]
Entry = Tuple[Occ, Occ]
Value = Union[complex, PSeries]

#: tolerance for structural checks (hermiticity, unitarity of couplings)
STRUCT_TOL = 1e-12
#: tolerance for channel identities (trace preservation, numeric mode)
CHANNEL_TOL = 1e-10
#: tolerance for series-vs-numeric cross checks
CROSS_TOL = 1e-9

_PRUNE_TOL = 1e-30


class CutoffOverflowError(ValueError):
    """A channel tried to populate an occupation above the cutoff."""


@dataclass(frozen=True)
class DetectorModel:
    """Photon-number-resolving detector with efficiency ``eta``.

    Given n photons in a mode, the probability of registering exactly k
    clicks is binomial: C(n, k) eta^k (1-eta)^(n-k).
    """

    eta: float
    number_resolving: bool = True

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("detector efficiency must lie in [0, 1]")

    def click_weight(self, n_photons: int, clicks: int) -> float:
        if clicks > n_photons:
            return 0.0
        return (
            math.comb(n_photons, clicks)
            * self.eta**clicks
            * (1.0 - self.eta) ** (n_photons - clicks)
        )


class FockDensity:
    """Sparse density operator over named bosonic modes with a cutoff."""

    __slots__ = ("modes", "cutoff", "entries")

    def __init__(
        self,
        modes: Iterable[str],
        cutoff: int,
        entries: Mapping[Entry, Value] | None = None,
    ):
        self.modes = tuple(modes)
        if len(set(self.modes)) != len(self.modes):
            raise ValueError("mode labels must be unique")
        if cutoff < 0:
            raise ValueError("cutoff must be a nonnegative integer")
        self.cutoff = int(cutoff)
        self.entries: Dict[Entry, Value] = {}
        if entries:
            for (ket, bra), v in entries.items():
                self._check_occ(ket)
                self._check_occ(bra)
                if not value_is_zero(v, _PRUNE_TOL):
                    self.entries[(tuple(ket), tuple(bra))] = v

    def _check_occ(self, occ: Occ) -> None:
        if len(occ) != len(self.modes):
            raise ValueError("occupation tuple length mismatch")
        if any(o < 0 or o > self.cutoff for o in occ):
            raise CutoffOverflowError(
                f"occupation {occ} violates cutoff {self.cutoff}"
            )

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_ket(
        cls, modes: Iterable[str], cutoff: int, amplitudes: Mapping[Occ, Value]
    ) -> "FockDensity":
        """Density operator |psi><psi| of a (possibly unnormalized) ket."""
        ent: Dict[Entry, Value] = {}
        amps = {tuple(k): v for k, v in amplitudes.items()}
        for k1, a1 in amps.items():
            for k2, a2 in amps.items():
                ent[(k1, k2)] = a1 * conj_value(a2)
        return cls(modes, cutoff, ent)

    def mode_index(self, m: str) -> int:
        try:
            return self.modes.index(m)
        except ValueError:
            raise KeyError(f"unknown mode {m!r}") from None

    # -- linear structure -------------------------------------------------

    def _zero_like(self) -> "FockDensity":
        return FockDensity(self.modes, self.cutoff)

    def map_entries(self, fn) -> "FockDensity":
        out = self._zero_like()
        for key, v in self.entries.items():
            nv = fn(v)
            if not value_is_zero(nv, _PRUNE_TOL):
                out.entries[key] = nv
        return out

    def scale(self, s) -> "FockDensity":
        return self.map_entries(lambda v: v * s)

    def add(self, other: "FockDensity") -> "FockDensity":
        if other.modes != self.modes or other.cutoff != self.cutoff:
            raise ValueError("incompatible states")
        out = self._zero_like()
        out.entries = dict(self.entries)
        for key, v in other.entries.items():
            acc = out.entries.get(key)
            nv = v if acc is None else acc + v
            if value_is_zero(nv, _PRUNE_TOL):
                out.entries.pop(key, None)
            else:
                out.entries[key] = nv
        return out

    def tensor(self, other: "FockDensity") -> "FockDensity":
        if set(self.modes) & set(other.modes):
            raise ValueError("tensor factors share mode labels")
        if other.cutoff != self.cutoff:
            raise ValueError("tensor factors must share a cutoff")
        out = FockDensity(self.modes + other.modes, self.cutoff)
        for (k1, b1), v1 in self.entries.items():
            for (k2, b2), v2 in other.entries.items():
                out.entries[(k1 + k2, b1 + b2)] = v1 * v2
        return out

    # -- scalar functionals -----------------------------------------------

    def trace(self) -> Value:
        tot: Value = 0j
        for (ket, bra), v in self.entries.items():
            if ket == bra:
                tot = tot + v
        return tot

    def expectation(self, amplitudes: Mapping[Occ, Value]) -> Value:
        """<psi| rho |psi> for the ket described by ``amplitudes``."""
        amps = {tuple(k): v for k, v in amplitudes.items()}
        tot: Value = 0j
        for (ket, bra), v in self.entries.items():
            ak = amps.get(ket)
            ab = amps.get(bra)
            if ak is not None and ab is not None:
                tot = tot + conj_value(ak) * v * ab
        return tot

    def hermiticity_defect(self) -> float:
        worst = 0.0
        for (ket, bra), v in self.entries.items():
            w = self.entries.get((bra, ket), 0j)
            d = v - conj_value(w)
            if isinstance(d, PSeries):
                worst = max(worst, max(abs(c) for c in d.u_coeffs))
            else:
                worst = max(worst, abs(d))
        return worst

    # -- channels ----------------------------------------------------------

    def apply_beam_splitter(
        self, m1: str, m2: str, t: float, r: float
    ) -> "FockDensity":
        """Mix two modes: a+ -> t a+ + r b+ and b+ -> r a+ - t b+.

        Raises `CutoffOverflowError` if the mixing would populate an
        occupation above the cutoff (never truncates silently).
        """
        if abs(t * t + r * r - 1.0) > STRUCT_TOL:
            raise ValueError("beam splitter requires t^2 + r^2 = 1")
        i1, i2 = self.mode_index(m1), self.mode_index(m2)
        table: Dict[Tuple[int, int], Dict[Tuple[int, int], float]] = {}

        def expansion(l: int, m: int) -> Dict[Tuple[int, int], float]:
            key = (l, m)
            got = table.get(key)
            if got is not None:
                return got
            coeffs: Dict[Tuple[int, int], float] = {}
            norm_in = math.sqrt(math.factorial(l) * math.factorial(m))
            for i in range(l + 1):
                for j in range(m + 1):
                    lp = i + j
                    mp = l + m - lp
                    c = (
                        math.comb(l, i)
                        * math.comb(m, j)
                        * t**i
                        * r ** (l - i)
                        * r**j
                        * (-t) ** (m - j)
                    )
                    if c == 0.0:
                        continue
                    w = (
                        math.sqrt(math.factorial(lp) * math.factorial(mp))
                        / norm_in
                        * c
                    )
                    coeffs[(lp, mp)] = coeffs.get((lp, mp), 0.0) + w
            table[key] = coeffs
            return coeffs

        out = self._zero_like()
        for (ket, bra), v in self.entries.items():
            ket_exp = expansion(ket[i1], ket[i2])
            bra_exp = expansion(bra[i1], bra[i2])
            for (kl, km), ck in ket_exp.items():
                if kl > self.cutoff or km > self.cutoff:
                    raise CutoffOverflowError(
                        f"beam splitter output ({kl},{km}) exceeds cutoff "
                        f"{self.cutoff}"
                    )
                nk = list(ket)
                nk[i1], nk[i2] = kl, km
                for (bl, bm), cb in bra_exp.items():
                    if bl > self.cutoff or bm > self.cutoff:
                        raise CutoffOverflowError(
                            f"beam splitter output ({bl},{bm}) exceeds "
                            f"cutoff {self.cutoff}"
                        )
                    nb = list(bra)
                    nb[i1], nb[i2] = bl, bm
                    key = (tuple(nk), tuple(nb))
                    add = v * (ck * cb)
                    acc = out.entries.get(key)
                    nv = add if acc is None else acc + add
                    if value_is_zero(nv, _PRUNE_TOL):
                        out.entries.pop(key, None)
                    else:
                        out.entries[key] = nv
        return out

    def apply_loss(self, m: str, eta: float) -> "FockDensity":
        """Bosonic loss channel: each photon survives with probability eta."""
        if not 0.0 <= eta <= 1.0:
            raise ValueError("survival probability must lie in [0, 1]")
        idx = self.mode_index(m)
        out = self._zero_like()
        for (ket, bra), v in self.entries.items():
            nk, nb = ket[idx], bra[idx]
            for j in range(min(nk, nb) + 1):
                amp = math.sqrt(math.comb(nk, j) * math.comb(nb, j))
                amp *= eta ** ((nk + nb - 2 * j) / 2.0) * (1.0 - eta) ** j
                if amp == 0.0:
                    continue
                kk = list(ket)
                bb = list(bra)
                kk[idx] = nk - j
                bb[idx] = nb - j
                key = (tuple(kk), tuple(bb))
                add = v * amp
                acc = out.entries.get(key)
                nv = add if acc is None else acc + add
                if value_is_zero(nv, _PRUNE_TOL):
                    out.entries.pop(key, None)
                else:
                    out.entries[key] = nv
        return out

    def _detect_weighted(self, m: str, weight_fn) -> "FockDensity":
        idx = self.mode_index(m)
        rest = tuple(lbl for lbl in self.modes if lbl != m)
        out = FockDensity(rest, self.cutoff)
        for (ket, bra), v in self.entries.items():
            if ket[idx] != bra[idx]:
                continue
            w = weight_fn(ket[idx])
            if w == 0.0:
                continue
            nk = ket[:idx] + ket[idx + 1 :]
            nb = bra[:idx] + bra[idx + 1 :]
            key = (nk, nb)
            add = v * w
            acc = out.entries.get(key)
            nv = add if acc is None else acc + add
            if value_is_zero(nv, _PRUNE_TOL):
                out.entries.pop(key, None)
            else:
                out.entries[key] = nv
        return out

    def detect(
        self, m: str, det: DetectorModel, clicks: int
    ) -> Tuple["FockDensity", Value]:
        """Condition on exactly ``clicks`` clicks in mode m, removing it.

        Returns the unnormalized conditioned state and its trace, which is
        the probability of the outcome.
        """
        out = self._detect_weighted(m, lambda n: det.click_weight(n, clicks))
        return out, out.trace()

    def detect_one(self, m: str, det: DetectorModel):
        """Single-click conditioning, weight n eta (1-eta)^(n-1)."""
        return self.detect(m, det, 1)

    def detect_none(self, m: str, det: DetectorModel):
        """No-click conditioning, weight (1-eta)^n."""
        return self.detect(m, det, 0)

    def detect_one_limit(self, m: str) -> "FockDensity":
        """Single-click conditioning in the vanishing-efficiency limit.

        The n-photon sector is weighted by n; the overall efficiency
        prefactor is dropped (it cancels once the state is rescaled by
        its leading click-probability monomial).  The matching no-click
        conditioning in this limit is `partial_trace`.
        """
        return self._detect_weighted(m, float)

    def partial_trace(self, keep: Iterable[str]) -> "FockDensity":
        """Trace out every mode not listed in ``keep``."""
        keep = tuple(keep)
        keep_idx = [self.mode_index(m) for m in keep]
        drop_idx = [i for i in range(len(self.modes)) if i not in keep_idx]
        out = FockDensity(keep, self.cutoff)
        for (ket, bra), v in self.entries.items():
            if any(ket[i] != bra[i] for i in drop_idx):
                continue
            nk = tuple(ket[i] for i in keep_idx)
            nb = tuple(bra[i] for i in keep_idx)
            key = (nk, nb)
            acc = out.entries.get(key)
            nv = v if acc is None else acc + v
            if value_is_zero(nv, _PRUNE_TOL):
                out.entries.pop(key, None)
            else:
                out.entries[key] = nv
        return out

    def phase_flip(self, m: str) -> "FockDensity":
        """Apply a pi phase to mode m: entries pick up (-1)^(n_ket + n_bra)."""
        idx = self.mode_index(m)
        out = self._zero_like()
        for (ket, bra), v in self.entries.items():
            sign = -1.0 if (ket[idx] + bra[idx]) % 2 else 1.0
            out.entries[(ket, bra)] = v * sign
        return out

    def normalize(self) -> "FockDensity":
        """Divide by the trace (series division needs a constant term)."""
        tr = self.trace()
        if isinstance(tr, PSeries):
            inv = tr.inverse()
            return self.map_entries(lambda v: v * inv)
        if abs(tr) <= _PRUNE_TOL:
            raise ZeroDivisionError("cannot normalize a traceless state")
        return self.scale(1.0 / tr)

    def fidelity(self, amplitudes: Mapping[Occ, Value]) -> Value:
        """<psi| rho_normalized |psi> against a pure target ket."""
        num = self.expectation(amplitudes)
        tr = self.trace()
        if isinstance(tr, PSeries) or isinstance(num, PSeries):
            num = num if isinstance(num, PSeries) else PSeries([num])
            tr = tr if isinstance(tr, PSeries) else PSeries([tr])
            return num / tr
        return num / tr

    def __repr__(self):
        return (
            f"FockDensity(modes={self.modes}, cutoff={self.cutoff}, "
            f"nnz={len(self.entries)})"
        )


def pair_source_state(
    p: Union[PSeries, float],
    order: int,
    modes: Tuple[str, str] = ("s", "a"),
    cutoff: int = 4,
) -> FockDensity:
    """Two-mode squeezed emission of one source, expanded in p.

    The stored (s) and photonic (a) modes are populated pairwise with
    amplitudes (p/2)^(m/2) on |mm>, the operator-form expansion in which
    the global normalization is left off because it cancels in every
    conditioned quantity.  ``order`` is the number of emitted pairs kept;
    probabilities of the retained sectors are exact through p^order after
    normalization.  Orders 1 and 2 are the contracted surface; order 3 is
    needed internally so that heralded states rescaled by their leading
    click monomial stay exact through p^2.
    """
    if order not in (1, 2, 3):
        raise ValueError("series arithmetic supports orders 1..3 only")
    if cutoff < order:
        raise ValueError("cutoff must be at least the retained pair number")
    symbolic = isinstance(p, PSeries)
    if not symbolic:
        if p < 0 or p > 1:
            raise ValueError("numeric p must lie in [0, 1]")
    one: Value = PSeries.one() if symbolic else 1.0 + 0j
    amp1: Value = (
        PSeries.sqrt_half_p()
        if symbolic
        else complex(math.sqrt(p / 2.0))
    )
    amps: Dict[Occ, Value] = {(0, 0): one, (1, 1): amp1}
    if order >= 2:
        amps[(2, 2)] = (p * 0.5) if symbolic else complex(p / 2.0)
    if order >= 3:
        amps[(3, 3)] = (
            amp1 * amp1 * amp1 if symbolic else complex((p / 2.0) ** 1.5)
        )
    return FockDensity.from_ket(modes, cutoff, amps)
