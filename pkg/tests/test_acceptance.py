"""Acceptance criteria, one check per criterion.

Each check prints a single ``[PASS]``/``[FAIL]`` line with the measured
numbers. Run under pytest, or directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import io
import random
import sys
import time
from fractions import Fraction

import mpmath
import pytest

from eco.agents import exit_value, load_packaged, packaged_scenarios, run
from eco.analytics import (
    Label,
    fixture_paths,
    label_accounts,
    load_csv,
    load_labels_csv,
    load_orgs_csv,
    summarize,
)
from eco.curves import AllocativeParams, LinearBondingCurve, price_allocative, tau_minus, tau_plus
from eco.exchange import (
    allocative_curve,
    burn_reward_exact,
    burn_reward_lower,
    mint_cost_exact,
    mint_tokens_exact,
    mint_tokens_lower,
)
from eco.journal import JournalWriter, replay
from eco.numeric import DOWN, ONE, UP, Dec, adaptive_simpson
from eco.organization import (
    VotingConfig,
    burn,
    friction_bound,
    genesis,
    mint,
    outstanding_obligation,
    solvency_ratio,
)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

SEED = 20240601


def report(n: int, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def _dec(x: float) -> Dec:
    return Dec.of(float(f"{x:.12g}"))


def draw(rng: random.Random, s_max: float = 1000.0):
    k = _dec(10 ** rng.uniform(-1, 1))
    tau = _dec(rng.uniform(0.01, 0.99))
    a = _dec(rng.uniform(0, 10))
    s = _dec(rng.uniform(0, s_max))
    return k, AllocativeParams(a, tau), s


# -- 1 ----------------------------------------------------------------------


def criterion_1() -> bool:
    rng = random.Random(SEED + 1)
    worst, failures = 0.0, 0
    start = time.perf_counter()
    for _ in range(1000):
        k, params, s = draw(rng)
        x = _dec(10 ** rng.uniform(-3, 2))
        exact = float(mint_cost_exact(k, params, s, x))
        q = allocative_curve(k, params).as_float()
        scale = q(float(s + x)) * float(x)
        oracle = adaptive_simpson(q, float(s), float(s + x), 1e-13 * scale)
        rel = abs(exact - oracle) / oracle
        worst = max(worst, rel)
        failures += rel > 1e-9
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 10
    return report(1, ok, f"closed form vs adaptive Simpson, 1000 draws: {failures} over 1e-9, "
                         f"max rel err {worst:.2e}, {elapsed:.2f} s (limit 10 s)")


# -- 2 ----------------------------------------------------------------------


def criterion_2() -> bool:
    rng = random.Random(SEED + 2)
    burn_bad = mint_bad = 0
    for _ in range(10_000):
        k, params, s = draw(rng)
        s = s + Dec.parse("0.001")
        x = -Dec(int(s.raw * rng.uniform(0.0005, 1.0)))
        if burn_reward_lower(k, params, s, x) > -burn_reward_exact(k, params, s, x):
            burn_bad += 1
        m = _dec(10 ** rng.uniform(-3, 3))
        if mint_tokens_lower(k, params, s, m) > mint_tokens_exact(k, params, s, m):
            mint_bad += 1
    mpmath.mp.dps = 40
    exact_ref = 3 - 6 * mpmath.log(mpmath.mpf(3) / 2)
    params = AllocativeParams(Dec.of(2), Dec.parse("0.5"))
    bound = burn_reward_lower(ONE, params, ONE, -ONE)
    exact = -burn_reward_exact(ONE, params, ONE, -ONE)
    anchor_ok = (abs(float(bound) - 0.5) <= 1e-12
                 and abs(mpmath.mpf(str(exact)) - exact_ref) <= 1e-12 and bound <= exact)
    ok = burn_bad == 0 and mint_bad == 0 and anchor_ok
    return report(2, ok, f"bound violations burn={burn_bad} mint={mint_bad} on 10000 draws each; "
                         f"anchor bound {bound.compact()} vs exact {exact} "
                         f"({'ok' if anchor_ok else 'off'} at 1e-12)")


# -- 3 ----------------------------------------------------------------------


def criterion_3() -> bool:
    rng = random.Random(SEED + 3)
    violations = 0
    wide = 0
    for i in range(100):
        k, params, s = draw(rng, s_max=1000.0 if i % 2 else 1.0)
        s = s + Dec.parse("0.01")
        wide += 1 + params.tau.to_fraction() * k.to_fraction() * s.to_fraction() > 2
        prev = Dec(0)
        for j in range(1, 1001):
            x = -Dec(s.raw * j // 1000)
            b = burn_reward_lower(k, params, s, x)
            violations += b < prev
            prev = b
    return report(3, violations == 0, f"burn bound monotone along 1000-point grids, 100 sets "
                                      f"({wide} with 1+tau*k*s > 2): {violations} violations")


# -- 4 ----------------------------------------------------------------------

C4_ASSESSMENTS = ("0.5", "2", "10")


def criterion_4() -> bool:
    k = Dec.of(1)
    curve = LinearBondingCurve(k)
    n = 10_000
    plus_bad, minus_bad = [], []
    for eps_text in ("0.01", "0.1", "1"):
        eps = Dec.parse(eps_text)
        for S_int in (1, 10**3, 10**9):
            S = Dec.of(S_int)
            grid = [Dec(S.raw * i // (n - 1)) for i in range(n)]
            for a_text in C4_ASSESSMENTS:
                a = Dec.parse(a_text)
                params = AllocativeParams(a, tau_plus(eps))
                q_max = max(price_allocative(curve, params, s, UP) for s in grid)
                if q_max > a + eps:
                    plus_bad.append((eps_text, S_int, a_text))
                params = AllocativeParams(a, tau_minus(eps, a, curve(S)))
                gap = max(
                    max(abs(curve(s) - price_allocative(curve, params, s, DOWN)),
                        abs(curve(s) - price_allocative(curve, params, s, UP)))
                    for s in grid
                )
                if gap > eps:
                    minus_bad.append((eps_text, S_int, a_text, gap))
    cases = 3 * 3 * len(C4_ASSESSMENTS)
    detail = (f"tau_plus {cases - len(plus_bad)}/{cases} ok, "
              f"tau_minus {cases - len(minus_bad)}/{cases} ok (k=1, a in {{{', '.join(C4_ASSESSMENTS)}}})")
    if minus_bad:
        worst = sorted({(e, S) for e, S, _, _ in minus_bad})
        detail += "; failing (eps, S): " + ", ".join(f"({e}, {S:g})" for e, S in worst)
        detail += "; needed tau is below the 1e-18 resolution there"
    return report(4, not plus_bad and not minus_bad, detail)


# -- 5 ----------------------------------------------------------------------


def criterion_5() -> bool:
    rng = random.Random(SEED + 5)
    profits = 0
    for _ in range(10_000):
        k, params, s = draw(rng)
        m = _dec(10 ** rng.uniform(-4, 3))
        x = mint_tokens_exact(k, params, s, m)
        if x.raw == 0:
            continue
        if -burn_reward_exact(k, params, s + x, -x) > m:
            profits += 1

    voting = VotingConfig(Dec.parse("0.5"), Dec.parse("0.4"), enabled=False)
    state = genesis(Dec.of(1), Dec.parse("0.3"), voting, Dec.of(4))
    max_price = Dec(0)
    over_bound = under_one = 0
    worst = Fraction(0)
    for n_tx in range(1, 1001):
        if state.s.raw == 0 or rng.random() < 0.6:
            receipt, state = mint(state, _dec(10 ** rng.uniform(-3, 1)), Dec.of(4))
        else:
            receipt, state = burn(state, -Dec(int(state.s.raw * rng.uniform(0.001, 0.5)) or 1))
        max_price = max(max_price, receipt.spot_before, receipt.spot_after)
        surplus = state.r.to_fraction() - outstanding_obligation(state)
        worst = max(worst, surplus)
        over_bound += surplus > friction_bound(n_tx, max_price).to_fraction()
        under_one += solvency_ratio(state) < ONE
    bound = friction_bound(1000, max_price)
    ok = profits == 0 and over_bound == 0 and under_one == 0
    return report(5, ok, f"{profits} profitable round trips of 10000; 1000-tx history: "
                         f"max friction {float(worst):.3g} vs bound {bound}, "
                         f"{over_bound} bound breaches, {under_one} steps with solvency < 1")


# -- 6 ----------------------------------------------------------------------


def criterion_6() -> bool:
    sc = load_packaged("fig4_sandwich")
    eco = sc.eco
    params_ok = (eco.tau, eco.theta_avg, eco.c) == (Dec.parse("0.7"), Dec.parse("0.5"), Dec.parse("0.4"))
    trace = run(sc)
    victim = trace.first("victim", "mint").receipt
    third_ok = abs(victim.a.to_fraction() - victim.a_bar_before.to_fraction() / 3) <= Fraction(1, 10**18)
    bot = trace.pnl["bot"].realized
    plain = run(load_packaged("fig4_sandwich_plain")).pnl["bot"].realized
    ok = params_ok and third_ok and victim.spot_after < victim.spot_before and bot.raw < 0 < plain.raw
    return report(6, ok, f"victim mint spot {victim.spot_before} -> {victim.spot_after}, "
                         f"sandwicher PnL {bot} with voting, {plain} on the plain curve")


# -- 7 ----------------------------------------------------------------------


def criterion_7() -> bool:
    trace = run(load_packaged("fig5_scalper"))
    last = trace.entries[-1]
    assert last.agent == "scalper" and last.action == "scalp_exit"
    scalper = trace.pnl["scalper"].realized
    inv = trace.pnl["investor"]
    mtm = inv.cash + exit_value(trace.final_state, inv.holdings)
    return report(7, scalper.raw > 0 > mtm.raw, f"scalper realized PnL {scalper}, investor mark-to-market "
                                        f"{mtm} right after the scalper exit")


# -- 8 ----------------------------------------------------------------------


def criterion_8() -> bool:
    names = packaged_scenarios()
    mismatched = []
    for name in names:
        sink = io.StringIO()
        final = run(load_packaged(name), JournalWriter(sink)).final_state
        state, _ = replay(sink.getvalue().splitlines())
        if (state.s.raw, state.r.raw, state.a_bar.raw) != (final.s.raw, final.r.raw, final.a_bar.raw):
            mismatched.append(name)
    return report(8, not mismatched and bool(names),
                  f"sim -> journal -> replay bit-exact on {len(names) - len(mismatched)}/{len(names)} "
                  f"packaged scenarios ({', '.join(names)})")


# -- 9 ----------------------------------------------------------------------


def criterion_9() -> bool:
    tx, orgs, labels = fixture_paths("table1")
    records, rejects = load_csv(tx)
    metas, org_rejects = load_orgs_csv(orgs)
    planted = load_labels_csv(labels)
    got = label_accounts(records, metas)
    errors = sum(got.get(key) is not label for key, label in planted.items()) + len(set(got) - set(planted))
    summary = summarize(records, metas)
    D = Dec.parse
    want = ((D("10.7"), D("4.2")), (D("6.0"), D("4.8")))
    have = ((summary.payments[Label.INVESTOR], summary.payments[Label.SPECULATOR]),
            (summary.rewards[Label.INVESTOR], summary.rewards[Label.SPECULATOR]))
    layout = [line.split()[0] for line in summary.render().splitlines()]
    ok = errors == 0 and not rejects and not org_rejects and have == want and layout[1:3] == ["Payments", "Rewards"]
    return report(9, ok, f"{errors} label errors on {len(planted)} planted accounts; payments "
                         f"{have[0][0].compact()}/{have[0][1].compact()}, rewards "
                         f"{have[1][0].compact()}/{have[1][1].compact()} (investor/speculator)")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 10)])
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    results = [check() for check in CRITERIA]
    sys.exit(0 if all(results) else 1)
