"""The organization state machine: mint with an assessment vote, burn, and
reserve/solvency accounting.

``mint`` and ``burn`` are pure: they take an :class:`EcoState` and return a
receipt plus the next state. :class:`Organization` wraps a state with a lock
and an optional journal so mutations are serialized.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, Union

from .curves import AllocativeParams, LinearBondingCurve, price_allocative
from .errors import (
    BurnExceedsSupply,
    DomainError,
    DustPayment,
    InsolvencyBreach,
    InvalidParams,
    ZeroPayment,
)
from .exchange import area_bounds_raw, burn_reward_exact, mint_tokens_exact
from .numeric import DOWN, ONE, ONE_RAW, UP, ZERO, Dec, div_round

if TYPE_CHECKING:
    from .journal import JournalWriter


class Weighting(Enum):
    EQUAL_PER_TRANSACTION = "equal"
    VOLUME_PROPORTIONAL = "volume"


@dataclass(frozen=True)
class VotingConfig:
    """Averaging weight ``theta_avg``, relative clamp ``c`` and vote weighting.

    ``enabled=False`` freezes the aggregate assessment (votes are ignored).
    """

    theta_avg: Dec
    c: Dec
    weighting: Weighting = Weighting.EQUAL_PER_TRANSACTION
    enabled: bool = True

    def __post_init__(self) -> None:
        for name in ("theta_avg", "c"):
            v = getattr(self, name)
            if not (0 < v.raw < ONE_RAW):
                raise InvalidParams(f"{name} must lie strictly inside (0, 1), got {v}")


@dataclass(frozen=True)
class EcoState:
    s: Dec
    r: Dec
    a_bar: Dec
    k: Dec
    tau: Dec
    voting: VotingConfig
    seq: int = 0
    solvency_guard: bool = False

    @property
    def curve(self) -> LinearBondingCurve:
        return LinearBondingCurve(self.k)

    @property
    def params(self) -> AllocativeParams:
        return AllocativeParams(self.a_bar, self.tau)


@dataclass(frozen=True)
class MintReceipt:
    seq: int
    m: Dec
    x: Dec
    a: Dec
    a_bar_before: Dec
    a_bar_after: Dec
    spot_before: Dec
    spot_after: Dec
    s_after: Dec
    r_after: Dec
    kind: str = "mint"


@dataclass(frozen=True)
class BurnReceipt:
    """``m`` is the reward paid out (nonnegative); ``x`` is negative.

    ``insolvent`` marks a burn whose curve reward was capped at the
    holder's pro-rata share of the reserve (solvency-guard mode only).
    """

    seq: int
    m: Dec
    x: Dec
    a_bar_before: Dec
    a_bar_after: Dec
    spot_before: Dec
    spot_after: Dec
    s_after: Dec
    r_after: Dec
    insolvent: bool = False
    kind: str = "burn"


Receipt = Union[MintReceipt, BurnReceipt]


def genesis(
    k: Dec,
    tau: Dec,
    voting: VotingConfig,
    a_bar0: Dec,
    *,
    solvency_guard: bool = False,
) -> EcoState:
    if a_bar0.raw <= 0:
        raise InvalidParams(f"initial aggregate assessment must be positive, got {a_bar0}")
    LinearBondingCurve(k)
    AllocativeParams(a_bar0, tau)
    return EcoState(
        s=ZERO, r=ZERO, a_bar=a_bar0, k=k, tau=tau, voting=voting, solvency_guard=solvency_guard
    )


def spot_price(state: EcoState) -> Dec:
    return price_allocative(state.curve, state.params, state.s)


def vote_weight(state: EcoState, m: Dec) -> Dec:
    """Weight of a new assessment in the running average."""
    if state.voting.weighting is Weighting.EQUAL_PER_TRANSACTION:
        return state.voting.theta_avg
    x_est = mint_tokens_exact(state.k, state.params, state.s, m)
    if x_est.raw == 0:
        return ZERO
    return x_est.div(state.s + x_est, DOWN)


def updated_assessment(state: EcoState, a: Dec, weight: Dec) -> tuple[Dec, Dec]:
    """Average toward ``a`` then clamp to ``[(1-c)a_bar, (1+c)a_bar]``.

    Returns ``(alpha, a_bar_new)``. The average is rounded toward the current
    aggregate and the clamp bounds inward, so both containments hold exactly.
    """
    a_bar = state.a_bar
    diff = a - a_bar
    alpha = a_bar + weight.mul(diff, DOWN if diff.raw >= 0 else UP)
    c = state.voting.c
    ceiling = (ONE + c).mul(a_bar, DOWN)
    floor = (ONE - c).mul(a_bar, UP)
    return alpha, max(min(alpha, ceiling), floor)


def mint(state: EcoState, m: Dec, a: Dec) -> tuple[MintReceipt, EcoState]:
    """Vote, then price at the updated curve, then mint."""
    if m.raw <= 0:
        raise ZeroPayment(f"payment must be positive, got {m}")
    if a.raw < 0:
        raise DomainError(f"assessment must be nonnegative, got {a}")
    spot_before = spot_price(state)
    if state.voting.enabled:
        _, a_bar_new = updated_assessment(state, a, vote_weight(state, m))
    else:
        a_bar_new = state.a_bar
    x = mint_tokens_exact(state.k, AllocativeParams(a_bar_new, state.tau), state.s, m)
    if x.raw == 0:
        raise DustPayment(f"payment {m} is below the cost of one base unit")
    seq = state.seq + 1
    new = replace(state, s=state.s + x, r=state.r + m, a_bar=a_bar_new, seq=seq)
    receipt = MintReceipt(
        seq=seq,
        m=m,
        x=x,
        a=a,
        a_bar_before=state.a_bar,
        a_bar_after=a_bar_new,
        spot_before=spot_before,
        spot_after=spot_price(new),
        s_after=new.s,
        r_after=new.r,
    )
    return receipt, new


def burn(state: EcoState, x: Dec) -> tuple[BurnReceipt, EcoState]:
    """Sell ``-x`` tokens at the current curve; the assessment is unchanged."""
    if x.raw >= 0:
        raise DomainError(f"burn size must be negative, got {x}")
    if x.raw < -state.s.raw:
        raise BurnExceedsSupply(f"cannot burn {-x} tokens from supply {state.s}")
    reward = -burn_reward_exact(state.k, state.params, state.s, x)
    insolvent = False
    if state.solvency_guard:
        share = Dec(div_round(state.r.raw * -x.raw, state.s.raw, DOWN))
        if reward > share:
            reward, insolvent = share, True
    elif reward > state.r:
        raise InsolvencyBreach(f"reward {reward} exceeds reserve {state.r}")
    seq = state.seq + 1
    new = replace(state, s=state.s + x, r=state.r - reward, seq=seq)
    receipt = BurnReceipt(
        seq=seq,
        m=reward,
        x=x,
        a_bar_before=state.a_bar,
        a_bar_after=state.a_bar,
        spot_before=spot_price(state),
        spot_after=spot_price(new),
        s_after=new.s,
        r_after=new.r,
        insolvent=insolvent,
    )
    return receipt, new


def outstanding_obligation(state: EcoState) -> Fraction:
    """Exact (to well under one ulp) cost of buying back the whole supply."""
    if state.s.raw == 0:
        return Fraction(0)
    lo, hi, den = area_bounds_raw(
        state.k.raw, state.tau.raw, state.a_bar.raw, state.s.raw, -state.s.raw
    )
    return -Fraction(lo + hi, 2 * den) / ONE_RAW


def solvency_ratio(state: EcoState) -> Dec:
    """Reserve over the buy-back cost of the entire supply (1 when s = 0)."""
    owed = outstanding_obligation(state)
    if owed == 0:
        return ONE
    return Dec.from_fraction(state.r.to_fraction() / owed, DOWN)


def friction_bound(n_tx: int, max_price: Dec) -> Dec:
    """Cap on reserve surplus over the curve area after ``n_tx`` trades with
    a static assessment: four ulp-equivalents each, where one ulp-equivalent
    is the money value of one token ulp at ``max_price`` (at least one
    money ulp)."""
    per_ulp = max(1, div_round(max_price.raw, ONE_RAW, UP))
    return Dec(4 * n_tx * per_ulp)


class Organization:
    """Single-writer wrapper: serializes mutations and appends receipts to
    an optional journal. Reads return immutable snapshots."""

    def __init__(self, state: EcoState, journal: JournalWriter | None = None):
        self._state = state
        self._journal = journal
        self._lock = threading.Lock()
        if journal is not None:
            journal.write_genesis(state)

    @property
    def state(self) -> EcoState:
        return self._state

    def mint(self, m: Dec, a: Dec) -> MintReceipt:
        with self._lock:
            receipt, self._state = mint(self._state, m, a)
            if self._journal is not None:
                self._journal.append(receipt)
            return receipt

    def burn(self, x: Dec) -> BurnReceipt:
        with self._lock:
            receipt, self._state = burn(self._state, x)
            if self._journal is not None:
                self._journal.append(receipt)
            return receipt

    def spot_price(self) -> Dec:
        return spot_price(self._state)

    def solvency_ratio(self) -> Dec:
        return solvency_ratio(self._state)

