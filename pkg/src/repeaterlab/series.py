"""Truncated power series in the pair-emission probability p.

The quantities extracted from the density-matrix pipeline are polynomials
in p of degree at most 2, but the intermediate pure-state amplitudes carry
half-integer powers (a single emitted pair has amplitude proportional to
sqrt(p/2)).  A series is therefore stored internally on the grid of powers
of u = sqrt(p), truncated at u^8 = p^4, which leaves ample headroom for the
p^3 terms that appear before a heralded state is rescaled by its leading
click-probability monomial.  The public view (`coeffs`) exposes only the
integer powers p^0, p^1, p^2; requesting it on a series with surviving
half-integer content is an error, because such a series is not a physical
post-conditioning result.
"""

from __future__ import annotations

from typing import Iterable, Sequence, Union

#: number of stored u = sqrt(p) coefficients (powers u^0 .. u^UDEG)
UDEG = 8

#: residual below which a coefficient is treated as exactly zero
_ZERO_TOL = 1e-12

Scalar = Union[int, float, complex]


class PSeries:
    """A scalar c0 + c1*p + c2*p**2, truncated, with exact arithmetic.

    Construct from the three integer-power coefficients, or via the
    factory helpers for the special values that seed the physics
    (`variable`, `sqrt_half_p`).
    """

    __slots__ = ("_u",)

    def __init__(self, coeffs: Iterable[Scalar] = (0.0,)):
        cs = [complex(c) for c in coeffs]
        if len(cs) > 3:
            raise ValueError("PSeries is truncated at degree 2 in p")
        u = [0j] * (UDEG + 1)
        for k, c in enumerate(cs):
            u[2 * k] = c
        self._u = tuple(u)

    # -- constructors -------------------------------------------------

    @classmethod
    def _from_u(cls, u: Sequence[complex]) -> "PSeries":
        obj = cls.__new__(cls)
        us = list(u[: UDEG + 1])
        us += [0j] * (UDEG + 1 - len(us))
        obj._u = tuple(us)
        return obj

    @classmethod
    def variable(cls) -> "PSeries":
        """The series p itself."""
        u = [0j] * (UDEG + 1)
        u[2] = 1.0 + 0j
        return cls._from_u(u)

    @classmethod
    def sqrt_half_p(cls) -> "PSeries":
        """sqrt(p/2), the one-pair emission amplitude of a source."""
        u = [0j] * (UDEG + 1)
        u[1] = 2.0 ** -0.5
        return cls._from_u(u)

    @classmethod
    def one(cls) -> "PSeries":
        return cls([1.0])

    @classmethod
    def zero(cls) -> "PSeries":
        return cls([0.0])

    # -- views ---------------------------------------------------------

    @property
    def coeffs(self) -> tuple[complex, complex, complex]:
        """(c0, c1, c2) in powers of p; fails if sqrt(p) terms survive."""
        odd = max(abs(self._u[k]) for k in (1, 3, 5, 7))
        if odd > 1e-9:
            raise ValueError(
                "series has surviving half-integer powers of p; "
                "it is not a post-conditioning scalar"
            )
        return (self._u[0], self._u[2], self._u[4])

    @property
    def u_coeffs(self) -> tuple[complex, ...]:
        return self._u

    def at(self, p: float) -> complex:
        """Evaluate at a numeric p >= 0 (all stored powers included)."""
        if p < 0:
            raise ValueError("p must be nonnegative")
        u = p ** 0.5
        acc = 0j
        for c in reversed(self._u):
            acc = acc * u + c
        return acc

    # -- ring operations ------------------------------------------------

    def __add__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return PSeries._from_u([a + b for a, b in zip(self._u, o._u)])

    __radd__ = __add__

    def __neg__(self):
        return PSeries._from_u([-a for a in self._u])

    def __sub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return PSeries._from_u([a - b for a, b in zip(self._u, o._u)])

    def __rsub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return PSeries._from_u([a * other for a in self._u])
        if not isinstance(other, PSeries):
            return NotImplemented
        a, b = self._u, other._u
        out = [0j] * (UDEG + 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j in range(UDEG + 1 - i):
                bj = b[j]
                if bj != 0:
                    out[i + j] += ai * bj
        return PSeries._from_u(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * (1.0 / other)
        if not isinstance(other, PSeries):
            return NotImplemented
        return self * other.inverse()

    def inverse(self) -> "PSeries":
        """Multiplicative inverse; requires a nonzero constant term."""
        b = self._u
        scale = max(abs(c) for c in b)
        if scale == 0.0 or abs(b[0]) <= _ZERO_TOL * scale:
            raise ZeroDivisionError(
                "series inversion requires a nonzero constant term"
            )
        inv = [0j] * (UDEG + 1)
        inv[0] = 1.0 / b[0]
        for k in range(1, UDEG + 1):
            s = 0j
            for j in range(1, k + 1):
                s += b[j] * inv[k - j]
            inv[k] = -s / b[0]
        return PSeries._from_u(inv)

    def shift_down(self, p_order: int = 1) -> "PSeries":
        """Divide by the monomial p**p_order (used to peel a heralding
        prefactor off an unnormalized conditioned state).

        Errors out if any coefficient below the monomial survives.
        """
        m = 2 * p_order
        if any(abs(c) > 1e-10 for c in self._u[:m]):
            raise ValueError("series is not divisible by p**%d" % p_order)
        return PSeries._from_u(list(self._u[m:]) + [0j] * m)

    def conjugate(self) -> "PSeries":
        return PSeries._from_u([c.conjugate() for c in self._u])

    # -- predicates -----------------------------------------------------

    def is_zero(self, tol: float = _ZERO_TOL) -> bool:
        return all(abs(c) <= tol for c in self._u)

    def leading_p_order(self) -> int | None:
        """Lowest p-power with a nonzero coefficient, None if zero."""
        for k, c in enumerate(self._u):
            if abs(c) > _ZERO_TOL:
                if k % 2:
                    raise ValueError("leading power is half-integer")
                return k // 2
        return None

    def __eq__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return all(abs(a - b) <= _ZERO_TOL for a, b in zip(self._u, o._u))

    def __hash__(self):
        return hash(self._u)

    def __repr__(self):
        terms = []
        for k, c in enumerate(self._u):
            if abs(c) <= _ZERO_TOL:
                continue
            cs = f"{c.real:g}" if abs(c.imag) <= _ZERO_TOL else f"({c:g})"
            if k == 0:
                terms.append(cs)
            elif k % 2 == 0:
                terms.append(f"{cs}*p^{k // 2}" if k > 2 else f"{cs}*p")
            else:
                terms.append(f"{cs}*p^{k}/2")
        return "PSeries(%s)" % (" + ".join(terms) or "0")


def _coerce(x) -> PSeries | None:
    if isinstance(x, PSeries):
        return x
    if isinstance(x, (int, float, complex)):
        return PSeries([x])
    return None


def conj_value(v):
    """Conjugate for a density-matrix entry (PSeries or plain complex)."""
    if isinstance(v, PSeries):
        return v.conjugate()
    return complex(v).conjugate()


def value_is_zero(v, tol: float = _ZERO_TOL) -> bool:
    if isinstance(v, PSeries):
        return v.is_zero(tol)
    return abs(v) <= tol
