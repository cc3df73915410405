"""Fixed-point decimals with directed rounding, a guaranteed-accuracy log
kernel, and the quadrature/root-finding oracles used to check closed forms.

``Dec`` stores an integer count of 1e-18 units. Addition and subtraction are
exact; multiplication, division and logarithms take an explicit
:class:`RoundDir`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Union

from .errors import DecOverflow, DomainError, NoBracket, ToleranceNotMet

DIGITS = 18
ONE_RAW = 10**DIGITS
# int256 range; comfortably above the required +-1e27.
MAX_RAW = 2**255 - 1

# Extra decimal digits carried by the log kernel before the final rounding.
_GUARD_DIGITS = 8
_MAX_GUARD_DIGITS = 128


class RoundDir(Enum):
    DOWN = "down"
    UP = "up"
    NEAREST = "nearest"


DOWN = RoundDir.DOWN
UP = RoundDir.UP
NEAREST = RoundDir.NEAREST


def div_round(num: int, den: int, direction: RoundDir) -> int:
    """Integer quotient ``num/den`` rounded in ``direction`` (nearest ties to even)."""
    if den == 0:
        raise ZeroDivisionError("division by zero")
    if den < 0:
        num, den = -num, -den
    q, r = divmod(num, den)
    if r == 0 or direction is DOWN:
        return q
    if direction is UP:
        return q + 1
    twice = 2 * r
    if twice > den or (twice == den and q % 2):
        return q + 1
    return q


Number = Union["Dec", int, str, Decimal, Fraction, float]


@dataclass(frozen=True, order=True)
class Dec:
    """Signed fixed-point value with 18 fractional decimal digits."""

    raw: int

    def __post_init__(self) -> None:
        if not isinstance(self.raw, int) or isinstance(self.raw, bool):
            raise TypeError(f"Dec raw value must be int, got {type(self.raw).__name__}")
        if abs(self.raw) > MAX_RAW:
            raise DecOverflow(f"value exceeds fixed-point range: raw={self.raw}")

    # construction -----------------------------------------------------

    @classmethod
    def from_raw(cls, raw: int) -> Dec:
        return cls(raw)

    @classmethod
    def from_fraction(cls, value: Fraction, direction: RoundDir = NEAREST) -> Dec:
        return cls(div_round(value.numerator * ONE_RAW, value.denominator, direction))

    @classmethod
    def parse(cls, text: str, *, strict: bool = False) -> Dec:
        """Parse a decimal string.

        With ``strict`` the string must be exactly representable (at most 18
        fractional digits); otherwise it is rounded to nearest.
        """
        try:
            d = Decimal(text.strip())
        except (InvalidOperation, AttributeError) as exc:
            raise DomainError(f"not a decimal number: {text!r}") from exc
        if not d.is_finite():
            raise DomainError(f"not a finite decimal: {text!r}")
        fr = Fraction(d)
        scaled = fr * ONE_RAW
        if strict and scaled.denominator != 1:
            raise DomainError(f"more than {DIGITS} fractional digits: {text!r}")
        return cls.from_fraction(fr, NEAREST)

    @classmethod
    def of(cls, value: Number, direction: RoundDir = NEAREST) -> Dec:
        """Coerce ``value``; ints are whole units (``Dec.of(2)`` is 2.0)."""
        if isinstance(value, Dec):
            return value
        if isinstance(value, bool):
            raise TypeError("bool is not a number here")
        if isinstance(value, int):
            return cls(value * ONE_RAW)
        if isinstance(value, str):
            return cls.parse(value)
        if isinstance(value, float):
            if not math.isfinite(value):
                raise DomainError(f"not finite: {value}")
            return cls.from_fraction(Fraction(repr(value)), direction)
        if isinstance(value, Decimal):
            if not value.is_finite():
                raise DomainError(f"not finite: {value}")
            return cls.from_fraction(Fraction(value), direction)
        if isinstance(value, Fraction):
            return cls.from_fraction(value, direction)
        raise TypeError(f"cannot convert {type(value).__name__} to Dec")

    # conversion -------------------------------------------------------

    def to_fraction(self) -> Fraction:
        return Fraction(self.raw, ONE_RAW)

    def __float__(self) -> float:
        return self.raw / ONE_RAW

    def __str__(self) -> str:
        sign = "-" if self.raw < 0 else ""
        whole, frac = divmod(abs(self.raw), ONE_RAW)
        return f"{sign}{whole}.{frac:0{DIGITS}d}"

    def compact(self) -> str:
        """Like ``str`` but without trailing fractional zeros (``2.5``, ``1.0``)."""
        text = str(self).rstrip("0")
        return text + "0" if text.endswith(".") else text

    def __repr__(self) -> str:
        return f"Dec('{self}')"

    def __bool__(self) -> bool:
        return self.raw != 0

    # exact arithmetic ---------------------------------------------------

    def __add__(self, other: Dec) -> Dec:
        if not isinstance(other, Dec):
            return NotImplemented
        return Dec(self.raw + other.raw)

    def __sub__(self, other: Dec) -> Dec:
        if not isinstance(other, Dec):
            return NotImplemented
        return Dec(self.raw - other.raw)

    def __neg__(self) -> Dec:
        return Dec(-self.raw)

    def __abs__(self) -> Dec:
        return Dec(abs(self.raw))

    def sign(self) -> int:
        return (self.raw > 0) - (self.raw < 0)

    # rounded arithmetic -------------------------------------------------

    def mul(self, other: Dec, direction: RoundDir) -> Dec:
        return Dec(div_round(self.raw * other.raw, ONE_RAW, direction))

    def div(self, other: Dec, direction: RoundDir) -> Dec:
        if other.raw == 0:
            raise DomainError("division by zero")
        return Dec(div_round(self.raw * ONE_RAW, other.raw, direction))

    def mul_int(self, n: int) -> Dec:
        return Dec(self.raw * n)


ZERO = Dec(0)
ONE = Dec(ONE_RAW)
ULP = Dec(1)


def dmin(a: Dec, b: Dec) -> Dec:
    return a if a <= b else b


def dmax(a: Dec, b: Dec) -> Dec:
    return a if a >= b else b


# ---------------------------------------------------------------------------
# logarithm kernel


def _atanh_fixed(p: int, q: int, scale: int) -> tuple[int, int]:
    """``atanh(p/q) * scale`` truncated toward zero, and its error bound.

    Every step floors a nonnegative quantity, so the returned magnitude never
    exceeds the true one and falls short of it by at most the error bound.
    Requires ``|p/q| <= 0.2``.
    """
    neg = (p < 0) != (q < 0)
    p, q = abs(p), abs(q)
    if p == 0:
        return 0, 0
    power = p * scale // q
    p2, q2 = p * p, q * q
    total = power
    n = 1
    terms = 1
    while power:
        power = power * p2 // q2
        n += 2
        total += power // n
        terms += 1
    err = 2 * terms + 2
    return (-total if neg else total), err


@lru_cache(maxsize=64)
def _ln2_fixed(scale: int) -> tuple[int, int]:
    v, err = _atanh_fixed(1, 3, scale)
    return 2 * v, 2 * err


def ln_fixed(num: int, den: int, digits: int) -> tuple[int, int]:
    """Approximate ``ln(num/den) * 10**digits``.

    Returns ``(value, err)`` with ``|true - value| <= err`` in units of
    ``10**-digits``. Argument reduction by powers of two brings the ratio
    into [0.7, 1.4]; the remainder goes through the atanh series.
    """
    if num <= 0 or den <= 0:
        raise DomainError("logarithm of a nonpositive number")
    scale = 10**digits
    e = num.bit_length() - den.bit_length()
    zn, zd = (num, den << e) if e >= 0 else (num << -e, den)
    while 10 * zn > 14 * zd:
        zd <<= 1
        e += 1
    while 10 * zn < 7 * zd:
        zn <<= 1
        e -= 1
    a, a_err = _atanh_fixed(zn - zd, zn + zd, scale)
    value = 2 * a
    err = 2 * a_err
    if e:
        l2, l2_err = _ln2_fixed(scale)
        value += e * l2
        err += abs(e) * l2_err
    return value, err


def ln_enclosure(num: int, den: int, digits: int) -> tuple[int, int]:
    """Integers ``lo <= ln(num/den) * 10**digits <= hi``."""
    if num == den:
        return 0, 0
    value, err = ln_fixed(num, den, digits)
    return value - err, value + err


def ln1p(x: Dec, direction: RoundDir = NEAREST) -> Dec:
    """``ln(1 + x)`` rounded in ``direction``.

    The guard digits double until both ends of the enclosure round to the
    same result, so DOWN and UP are the true floor and ceiling.
    """
    if x.raw <= -ONE_RAW:
        raise DomainError(f"ln1p undefined for x <= -1 (x={x})")
    if x.raw == 0:
        return ZERO
    guard = _GUARD_DIGITS
    while True:
        shift = 10**guard
        value, err = ln_fixed(ONE_RAW + x.raw, ONE_RAW, DIGITS + guard)
        lo = div_round(value - err, shift, direction)
        hi = div_round(value + err, shift, direction)
        if lo == hi:
            return Dec(lo)
        if guard >= _MAX_GUARD_DIGITS:
            if direction is DOWN:
                return Dec(lo)
            if direction is UP:
                return Dec(hi)
            return Dec(div_round(value, shift, NEAREST))
        guard *= 2


# ---------------------------------------------------------------------------
# oracles


def _as_float(v: Number) -> float:
    if isinstance(v, Dec):
        return float(v)
    if isinstance(v, str):
        return float(Decimal(v))
    return float(v)


def adaptive_simpson(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    max_depth: int = 50,
) -> float:
    """Adaptive Simpson quadrature with Richardson correction on each leaf."""
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    if lo == hi:
        return 0.0
    if lo > hi:
        raise DomainError("integrate requires lo <= hi")
    fa, fb = f(lo), f(hi)
    mid = 0.5 * (lo + hi)
    fm = f(mid)
    whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(lo, hi, fa, fm, fb, whole, tol, 0)]
    leaves: list[float] = []
    while stack:
        a, b, fa, fm, fb, whole, eps, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if abs(delta) <= 15.0 * eps:
            leaves.append(left + right + delta / 15.0)
        elif depth >= max_depth or not (a < lm < m < rm < b):
            raise ToleranceNotMet(
                f"subdivision limit reached on [{a!r}, {b!r}] (tol {tol!r})"
            )
        else:
            stack.append((a, m, fa, flm, fm, left, 0.5 * eps, depth + 1))
            stack.append((m, b, fm, frm, fb, right, 0.5 * eps, depth + 1))
    return math.fsum(leaves)


def integrate(
    f: Callable[[float], float], lo: Number, hi: Number, tol: Number
) -> Dec:
    """Test oracle: integral of ``f`` over ``[lo, hi]`` within ``tol``.

    Never used on a quoting path.
    """
    return Dec.of(adaptive_simpson(f, _as_float(lo), _as_float(hi), _as_float(tol)))


def _sign(v: object) -> int:
    if isinstance(v, Dec):
        return v.sign()
    return (v > 0) - (v < 0)  # type: ignore[operator]


def bracket(
    g: Callable[[Dec], object], lo: Dec, hi: Dec, tol: Dec, max_iter: int = 1000
) -> tuple[Dec, Dec]:
    """Bisect a sign change of ``g`` down to width ``tol``.

    Returns ``(left, right)`` keeping the orientation of the inputs, so
    ``g(left)`` has the sign ``g(lo)`` had. A root hit exactly collapses the
    bracket to one point.
    """
    if tol.raw <= 0:
        raise DomainError("tolerance must be positive")
    if lo > hi:
        raise DomainError("bracket requires lo <= hi")
    s_lo = _sign(g(lo))
    if s_lo == 0:
        return lo, lo
    s_hi = _sign(g(hi))
    if s_hi == 0:
        return hi, hi
    if s_lo == s_hi:
        raise NoBracket(f"g has the same sign at {lo} and {hi}")
    a, b = lo.raw, hi.raw
    for _ in range(max_iter):
        if b - a <= tol.raw:
            return Dec(a), Dec(b)
        mid = (a + b) // 2
        s_mid = _sign(g(Dec(mid)))
        if s_mid == 0:
            return Dec(mid), Dec(mid)
        if s_mid == s_lo:
            a = mid
        else:
            b = mid
    raise ToleranceNotMet(f"bracket wider than {tol} after {max_iter} bisections")


def bracket_solve(g: Callable[[Dec], object], lo: Dec, hi: Dec, tol: Dec) -> Dec:
    """Root of a monotone ``g`` on ``[lo, hi]`` by bisection."""
    a, b = bracket(g, lo, hi, tol)
    return Dec((a.raw + b.raw) // 2)
