"""Mint/burn quoting for allocative curves over a linear bonding curve.

The money ``m`` exchanged for ``x`` tokens at supply ``s`` is the area under
``q`` from ``s`` to ``s + x``. For ``p(s) = k*s`` it has the closed form::

    m = theta/(tau*k) * [x - ln(1 + tau*k*x/(1 + tau*k*s)) / (tau*k)]
    theta = (1 - tau + tau*a) * k

Rounding policy, fixed for every quote: payments round up, rewards round
down, minted tokens round down. A mint followed by a burn of the same tokens
can therefore never return more money than it took in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable

from .curves import AllocativeCurve, AllocativeParams, LinearBondingCurve, allocative_price_raw
from .errors import BurnExceedsSupply, DomainError, NegativeSupply, ZeroPayment
from .numeric import (
    DOWN,
    NEAREST,
    ONE_RAW,
    ULP,
    UP,
    ZERO,
    Dec,
    bracket,
    div_round,
    integrate,
    ln_enclosure,
)

_U = ONE_RAW
_U3 = _U**3


class Exactness(Enum):
    EXACT = "exact"
    GUARANTEED_LOWER_BOUND = "guaranteed_lower_bound"


@dataclass(frozen=True)
class Quote:
    """Tokens ``x`` (negative when burning) against money ``m`` (negative reward).

    ``remainder`` is the part of a mint payment not needed for ``x`` tokens;
    a dust payment quotes ``x = m = 0`` with the whole payment as remainder.
    """

    x: Dec
    m: Dec
    exactness: Exactness = Exactness.EXACT
    remainder: Dec = ZERO


def theta_eff(k: Dec, params: AllocativeParams) -> Fraction:
    """Effective slope ``(1 - tau + tau*a) * k`` as an exact rational."""
    tau = params.tau.to_fraction()
    return (1 - tau + tau * params.a.to_fraction()) * k.to_fraction()


def _check_supply(s: Dec) -> None:
    if s.raw < 0:
        raise NegativeSupply(f"supply must be nonnegative, got {s}")


def area_bounds_raw(k: int, tau: int, a: int, s: int, x: int) -> tuple[int, int, int]:
    """Enclosure of the signed area (in raw money units) as ``(lo, hi, den)``.

    The true area times 1e18 lies in ``[lo/den, hi/den]``. Only the log is
    approximated; its working precision grows with ``theta/(tau*k)^2`` so the
    enclosure stays far below one raw unit wide.
    """
    if x == 0:
        return 0, 0, 1
    g = _U * _U - tau * _U + tau * a  # (1 - tau + tau*a) * U^2
    tk = tau * k
    n0 = _U3 + tk * s
    n1 = n0 + tk * x
    if n1 <= 0:
        raise BurnExceedsSupply("burn drives the curve argument out of range")
    digits = max(30, len(str(g * _U * _U * 10**10 // (tau * tk) + 1)))
    scale = 10**digits
    l_lo, l_hi = ln_enclosure(n1, n0, digits)
    den = _U * tau * tk * scale
    base = x * tk * scale
    hi = g * (base - _U3 * l_lo)
    lo = g * (base - _U3 * l_hi)
    return lo, hi, den


def _area_up_raw(k: int, tau: int, a: int, s: int, x: int) -> int:
    _, hi, den = area_bounds_raw(k, tau, a, s, x)
    return div_round(hi, den, UP)


def mint_cost_exact(k: Dec, params: AllocativeParams, s: Dec, x: Dec) -> Dec:
    """Payment for minting ``x > 0`` tokens at supply ``s``, rounded up."""
    _check_supply(s)
    if x.raw < 0:
        raise DomainError(f"mint size must be positive, got {x}")
    return Dec(_area_up_raw(k.raw, params.tau.raw, params.a.raw, s.raw, x.raw))


def burn_reward_exact(k: Dec, params: AllocativeParams, s: Dec, x: Dec) -> Dec:
    """Signed money for burning ``x < 0`` tokens; ``|m|`` is rounded down."""
    _check_supply(s)
    if x.raw > 0:
        raise DomainError(f"burn size must be negative, got {x}")
    if x.raw < -s.raw:
        raise BurnExceedsSupply(f"cannot burn {-x} tokens from supply {s}")
    return Dec(_area_up_raw(k.raw, params.tau.raw, params.a.raw, s.raw, x.raw))


def burn_reward_lower(k: Dec, params: AllocativeParams, s: Dec, x: Dec) -> Dec:
    """Cheap guaranteed lower bound on the burn reward ``|m|``.

    With ``c = tau*k``, ``D = 1 + c*s`` and ``y = |x|``::

        theta/D * max(0, s*y - y^2/max(2, D))

    The ``y^2/2`` form holds for every burn because ``q(z) >= theta*z/D``
    below ``s``. The ``y^2/D`` form is only valid while ``c*y/D <= 1/2``;
    past that point it is frozen at ``y = D/(2c)`` and the larger of the two
    sound bounds is returned. Both pieces are nondecreasing in ``y``.
    """
    _check_supply(s)
    if x.raw > 0:
        raise DomainError(f"burn size must be negative, got {x}")
    if x.raw < -s.raw:
        raise BurnExceedsSupply(f"cannot burn {-x} tokens from supply {s}")
    if x.raw == 0:
        return ZERO
    theta = theta_eff(k, params)
    c = params.tau.to_fraction() * k.to_fraction()
    sf = s.to_fraction()
    y = -x.to_fraction()
    d = 1 + c * sf
    bound = theta / d * (sf * y - y * y / 2)
    if d > 2:
        y_m = min(y, d / (2 * c))
        bound = max(bound, theta / d * (sf * y_m - y_m * y_m / d))
    return Dec.from_fraction(max(bound, Fraction(0)), DOWN)


def mint_tokens_lower(k: Dec, params: AllocativeParams, s: Dec, m: Dec) -> Dec:
    """Cheap guaranteed lower bound on tokens minted for payment ``m``::

        (1 + tau*k*s)/2 * [sqrt(s^2 + 4m/theta) - s]

    evaluated as ``(1 + tau*k*s)/2 * (4m/theta) / (sqrt(...) + s)`` with the
    root rounded up, so no cancellation and every rounding is downward.
    """
    _check_supply(s)
    if m.raw < 0:
        raise DomainError(f"payment must be nonnegative, got {m}")
    if m.raw == 0:
        return ZERO
    theta = theta_eff(k, params)
    sf = s.to_fraction()
    v = sf * sf + 4 * m.to_fraction() / theta
    scaled = v * _U * _U
    root = math.isqrt(scaled.numerator // scaled.denominator)
    if root * root * scaled.denominator < scaled.numerator:
        root += 1
    root_up = Fraction(root, _U)
    d = 1 + params.tau.to_fraction() * k.to_fraction() * sf
    return Dec.from_fraction(d / 2 * (4 * m.to_fraction() / theta) / (root_up + sf), DOWN)


def mint_tokens_exact(
    k: Dec, params: AllocativeParams, s: Dec, m: Dec, tol: Dec = ULP
) -> Dec:
    """Tokens minted for payment ``m``: the largest ``x`` (within ``tol``)
    whose rounded-up cost does not exceed ``m``. Returns 0 for dust."""
    _check_supply(s)
    if m.raw <= 0:
        raise ZeroPayment(f"payment must be positive, got {m}")
    if tol.raw <= 0:
        raise DomainError("tolerance must be positive")
    K, T, A, S, M = k.raw, params.tau.raw, params.a.raw, s.raw, m.raw

    def cost(x: int) -> int:
        return _area_up_raw(K, T, A, S, x)

    if cost(1) > M:
        return ZERO

    # Newton on the convex cost using exact residuals; lands within a few ulps.
    x = max(mint_tokens_lower(k, params, s, m).raw, 1)
    for _ in range(100):
        resid = cost(x) - M
        price = allocative_price_raw(K, T, A, S + x, NEAREST)
        if price <= 0:
            break
        step = resid / price * _U
        if abs(step) < 2:
            break
        x = max(1, x - int(step))

    # Gallop to a bracket around the crossing, then bisect.
    if cost(x) <= M:
        lo, d = x, 1
        while cost(x + d) <= M:
            lo = x + d
            d *= 2
        hi = x + d
    else:
        hi, d = x, 1
        while x - d >= 1 and cost(x - d) > M:
            hi = x - d
            d *= 2
        lo = max(x - d, 0)
    # Two-valued predicate: an exact hit must not stop the search, because
    # the cost can stay flat over several token ulps.
    left, _ = bracket(lambda xd: 1 if cost(xd.raw) > M else -1, Dec(lo), Dec(hi), tol)
    return left


def quote_mint(k: Dec, params: AllocativeParams, s: Dec, m: Dec, tol: Dec = ULP) -> Quote:
    x = mint_tokens_exact(k, params, s, m, tol)
    if x.raw == 0:
        return Quote(ZERO, ZERO, Exactness.EXACT, remainder=m)
    return Quote(x, m, Exactness.EXACT, remainder=m - mint_cost_exact(k, params, s, x))


def quote_mint_lower(k: Dec, params: AllocativeParams, s: Dec, m: Dec) -> Quote:
    return Quote(mint_tokens_lower(k, params, s, m), m, Exactness.GUARANTEED_LOWER_BOUND)


def quote_burn(k: Dec, params: AllocativeParams, s: Dec, x: Dec) -> Quote:
    return Quote(x, burn_reward_exact(k, params, s, x), Exactness.EXACT)


def quote_burn_lower(k: Dec, params: AllocativeParams, s: Dec, x: Dec) -> Quote:
    return Quote(x, -burn_reward_lower(k, params, s, x), Exactness.GUARANTEED_LOWER_BOUND)


def quote_by_quadrature(
    curve: Callable, s: Dec, x: Dec, tol: float | Dec = 1e-12
) -> Dec:
    """Signed area under ``curve`` from ``s`` to ``s + x`` by adaptive Simpson.

    Test oracle only. ``curve`` may be a float function or a Dec price
    function; allocative curves integrate through their float form.
    """
    if x.raw == 0:
        return ZERO
    if hasattr(curve, "as_float"):
        f = curve.as_float()
    elif isinstance(curve, LinearBondingCurve):
        kf = float(curve.k)
        f = lambda z: kf * z  # noqa: E731
    else:
        f = curve
    lo, hi = (s, s + x) if x.raw > 0 else (s + x, s)
    area = integrate(f, lo, hi, tol)
    return area if x.raw > 0 else -area


def allocative_curve(k: Dec, params: AllocativeParams) -> AllocativeCurve:
    return AllocativeCurve(LinearBondingCurve(k), params)
