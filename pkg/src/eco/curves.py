"""Bonding curves, allocative (tax-damped) curves, efficiency predicates and
the tax-rate thresholds that guarantee each kind of efficiency.

The allocative curve for a bonding curve ``p`` is::

    q(s) = (1 - tau + tau*a) * p(s) / (1 + tau * p(s))

It starts at 0, increases strictly, stays below ``a + (1 - tau)/tau`` and
tends to ``p`` as ``tau -> 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import InvalidParams, NegativeSupply
from .numeric import NEAREST, ONE, ONE_RAW, UP, Dec, RoundDir, div_round

PriceFn = Callable[[Dec], Dec]


@dataclass(frozen=True)
class LinearBondingCurve:
    """``p(s) = k * s``."""

    k: Dec
    monotone = True

    def __post_init__(self) -> None:
        if self.k.raw <= 0:
            raise InvalidParams(f"k must be positive, got {self.k}")

    def __call__(self, s: Dec) -> Dec:
        return price_bonding(self, s)


@dataclass(frozen=True)
class AllocativeParams:
    """Per-token assessment ``a`` and tax rate ``tau``."""

    a: Dec
    tau: Dec

    def __post_init__(self) -> None:
        if not (0 < self.tau.raw < ONE_RAW):
            raise InvalidParams(f"tau must lie strictly inside (0, 1), got {self.tau}")
        if self.a.raw < 0:
            raise InvalidParams(f"assessment must be nonnegative, got {self.a}")


@dataclass(frozen=True)
class AllocativeCurve:
    """``q(.; a, tau, p)`` for a linear ``p``, usable as a price function."""

    curve: LinearBondingCurve
    params: AllocativeParams
    monotone = True

    def __call__(self, s: Dec) -> Dec:
        return price_allocative(self.curve, self.params, s)

    def as_float(self) -> Callable[[float], float]:
        k, tau, a = float(self.curve.k), float(self.params.tau), float(self.params.a)
        weight = 1.0 - tau + tau * a

        def q(s: float) -> float:
            p = k * s
            return weight * p / (1.0 + tau * p)

        return q


def price_bonding(curve: LinearBondingCurve, s: Dec) -> Dec:
    if s.raw < 0:
        raise NegativeSupply(f"supply must be nonnegative, got {s}")
    return curve.k.mul(s, NEAREST)


def allocative_price_raw(k: int, tau: int, a: int, s: int, direction: RoundDir) -> int:
    """Raw ``q`` from raw inputs, one rounding at the end.

    With U = 1e18 and everything in raw units,
    q_raw = (U^2 - tau*U + tau*a) * k*s / (U^3 + tau*k*s).
    """
    u = ONE_RAW
    ks = k * s
    return div_round((u * u - tau * u + tau * a) * ks, u**3 + tau * ks, direction)


def price_allocative(
    curve: LinearBondingCurve,
    params: AllocativeParams,
    s: Dec,
    direction: RoundDir = NEAREST,
) -> Dec:
    if s.raw < 0:
        raise NegativeSupply(f"supply must be nonnegative, got {s}")
    return Dec(allocative_price_raw(curve.k.raw, params.tau.raw, params.a.raw, s.raw, direction))


def allocative_sup(params: AllocativeParams) -> Dec:
    """Least upper bound ``a + (1 - tau)/tau``, rounded up."""
    return params.a + (ONE - params.tau).div(params.tau, UP)


def _grid(S: Dec, grid: int) -> list[Dec]:
    if grid < 2:
        raise InvalidParams("grid must have at least 2 points")
    if S.raw <= 0:
        raise InvalidParams("supply horizon S must be positive")
    n = grid - 1
    return [Dec(div_round(S.raw * i, n, NEAREST)) for i in range(grid)]


def is_allocatively_efficient(
    curve: PriceFn, a: Dec, epsilon: Dec, S: Dec, grid: int = 1001
) -> bool:
    """``curve(s) <= a + epsilon`` on a grid over ``[0, S]``.

    Curves exposing ``monotone = True`` are only evaluated at ``S``.
    """
    if epsilon.raw <= 0:
        raise InvalidParams("epsilon must be positive")
    limit = a + epsilon
    if getattr(curve, "monotone", False):
        _grid(S, grid)
        return curve(S) <= limit
    return all(curve(s) <= limit for s in _grid(S, grid))


def is_investment_efficient(curve: PriceFn, e: PriceFn, S: Dec, grid: int = 1001) -> bool:
    """``e(s) <= curve(s)`` on a grid over ``[0, S]``."""
    return all(e(s) <= curve(s) for s in _grid(S, grid))


def max_abs_gap(f: PriceFn, g: PriceFn, S: Dec, grid: int) -> Dec:
    """Largest ``|f(s) - g(s)|`` over the grid."""
    return max(abs(f(s) - g(s)) for s in _grid(S, grid))


def _clamp_open_unit(raw: int) -> Dec:
    return Dec(min(max(raw, 1), ONE_RAW - 1))


def tau_plus(epsilon: Dec) -> Dec:
    """Smallest tax rate from which ``q <= a + epsilon`` for every supply.

    Rounded up, so any representable ``tau >= tau_plus`` keeps the guarantee.
    """
    if epsilon.raw <= 0:
        raise InvalidParams("epsilon must be positive")
    return _clamp_open_unit(div_round(ONE_RAW * ONE_RAW, ONE_RAW + epsilon.raw, UP))


def tau_minus(delta: Dec, a: Dec, p_at_S: Dec) -> Dec:
    """Tax rate below which ``|q - p| <= delta`` on ``[0, S]``.

    Uses ``p - q = tau*(p + 1 - a)*p / (1 + tau*p) <= tau*(|1 - a| + P)*P``
    with ``P = p(S)``, so the threshold is
    ``delta / max(1, (|1 - a| + P) * P)``, rounded down and kept inside
    (0, 1). When the exact threshold is below one ulp the clamp to one ulp
    no longer guarantees the bound; see :func:`tau_minus_exact`.
    """
    exact = tau_minus_exact(delta, a, p_at_S)
    return _clamp_open_unit(exact.numerator * ONE_RAW // exact.denominator)


def tau_minus_exact(delta: Dec, a: Dec, p_at_S: Dec) -> Fraction:
    if delta.raw <= 0:
        raise InvalidParams("delta must be positive")
    if p_at_S.raw <= 0:
        raise InvalidParams("p(S) must be positive")
    P = p_at_S.to_fraction()
    spread = (abs(1 - a.to_fraction()) + P) * P
    return delta.to_fraction() / max(Fraction(1), spread)

