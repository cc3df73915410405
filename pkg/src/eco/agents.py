"""Deterministic agent-based scenarios: investors, profit scalpers and
sandwich attackers trading against one organization.

Actions run in strict step order (one block per step, no mempool). Around
each scheduled action the engine inserts the reactive trades:

* a scalper enters at its ``entry_step`` and exits right after the next
  mint by anyone else;
* a sandwicher mints ``front_amount`` just before the action at
  ``victim_step`` and burns everything just after it.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import IO, Any, Mapping

import yaml

from .errors import EcoError, ScenarioError
from .exchange import burn_reward_exact
from .journal import JournalWriter
from .numeric import NEAREST, ZERO, Dec
from .organization import (
    BurnReceipt,
    EcoState,
    MintReceipt,
    Organization,
    Receipt,
    VotingConfig,
    Weighting,
    genesis,
)

PLAIN_TAU = Dec.parse("0.000000001")


class AgentKind(Enum):
    INVESTOR = "investor"
    SCALPER = "scalper"
    SANDWICHER = "sandwicher"


@dataclass(frozen=True)
class AgentSpec:
    id: str
    kind: AgentKind
    budget: Dec
    valuation: Dec | None = None
    assessment: str = "abar"
    entry_step: int | None = None
    entry_amount: Dec | None = None
    exit_trigger: str = "after_next_mint"
    victim_step: int | None = None
    front_amount: Dec | None = None

    def __post_init__(self) -> None:
        if self.budget.raw < 0:
            raise ScenarioError(f"agent {self.id}: budget must be nonnegative")
        if self.kind is AgentKind.INVESTOR and self.valuation is not None and self.valuation.raw <= 0:
            raise ScenarioError(f"agent {self.id}: valuation must be positive")
        if self.kind is AgentKind.SCALPER and self.entry_step is None:
            raise ScenarioError(f"agent {self.id}: scalper needs entry_step")
        if self.kind is AgentKind.SANDWICHER and (self.victim_step is None or self.front_amount is None):
            raise ScenarioError(f"agent {self.id}: sandwicher needs victim_step and front_amount")
        if self.exit_trigger != "after_next_mint":
            raise ScenarioError(f"agent {self.id}: unsupported exit trigger {self.exit_trigger!r}")


@dataclass(frozen=True)
class Action:
    """A scheduled trade. ``amount`` is money for a mint and tokens for a
    burn; ``None`` on a burn means the agent's whole holding."""

    step: int
    agent: str
    kind: str
    amount: Dec | None = None
    assessment: str | None = None


@dataclass(frozen=True)
class EcoConfig:
    k: Dec
    tau: Dec
    a_bar0: Dec
    theta_avg: Dec
    c: Dec
    weighting: Weighting = Weighting.EQUAL_PER_TRANSACTION
    voting: bool = True
    solvency_guard: bool = False

    def genesis(self) -> EcoState:
        voting = VotingConfig(self.theta_avg, self.c, self.weighting, self.voting)
        return genesis(self.k, self.tau, voting, self.a_bar0, solvency_guard=self.solvency_guard)

    def plain(self) -> EcoConfig:
        """Same organization with voting off and a vanishing tax (q ~ p)."""
        return replace(self, tau=PLAIN_TAU, voting=False)


@dataclass(frozen=True)
class Scenario:
    name: str
    eco: EcoConfig
    agents: tuple[AgentSpec, ...]
    schedule: tuple[Action, ...] = ()
    rng_seed: int = 0

    def __post_init__(self) -> None:
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ScenarioError("agent ids must be unique")
        steps = [a.step for a in self.schedule]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ScenarioError("schedule must be strictly ordered by step")
        for act in self.schedule:
            if act.agent not in ids:
                raise ScenarioError(f"schedule references unknown agent {act.agent!r}")
            if act.kind not in ("mint", "burn"):
                raise ScenarioError(f"unknown action {act.kind!r}")
            if act.kind == "mint" and act.amount is None:
                raise ScenarioError(f"mint at step {act.step} needs an amount")

    def agent(self, agent_id: str) -> AgentSpec:
        for a in self.agents:
            if a.id == agent_id:
                return a
        raise KeyError(agent_id)


@dataclass
class Book:
    holdings: Dec = ZERO
    cash: Dec = ZERO
    paid: Dec = ZERO
    cost_basis: Dec = ZERO
    realized: Dec = ZERO


@dataclass(frozen=True)
class TraceEntry:
    step: int
    agent: str
    action: str
    receipt: Receipt | None
    holdings: Dec
    cash: Dec
    realized_pnl: Dec
    mtm_pnl: Dec
    note: str = ""


@dataclass(frozen=True)
class AgentPnL:
    holdings: Dec
    cash: Dec
    paid: Dec
    realized: Dec
    exit_value: Dec
    mark_to_market: Dec


TRACE_COLUMNS = (
    "step", "agent", "action", "seq", "kind", "m", "x", "a", "a_bar_before",
    "a_bar_after", "s_after", "r_after", "holdings", "cash", "realized_pnl", "mtm_pnl", "note",
)


@dataclass
class TraceLog:
    scenario: str
    entries: list[TraceEntry] = field(default_factory=list)
    pnl: dict[str, AgentPnL] = field(default_factory=dict)
    final_state: EcoState | None = None

    def receipts(self) -> list[Receipt]:
        return [e.receipt for e in self.entries if e.receipt is not None]

    def first(self, agent: str, action: str) -> TraceEntry:
        for e in self.entries:
            if e.agent == agent and e.action == action and e.receipt is not None:
                return e
        raise KeyError((agent, action))

    def write_csv(self, sink: IO[str]) -> None:
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for e in self.entries:
            r = e.receipt
            writer.writerow([
                e.step, e.agent, e.action,
                r.seq if r else "", r.kind if r else "",
                str(r.m) if r else "", str(r.x) if r else "",
                str(r.a) if isinstance(r, MintReceipt) else "",
                str(r.a_bar_before) if r else "", str(r.a_bar_after) if r else "",
                str(r.s_after) if r else "", str(r.r_after) if r else "",
                str(e.holdings), str(e.cash), str(e.realized_pnl), str(e.mtm_pnl), e.note,
            ])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def write_tx_csv(self, sink: IO[str], org_id: str = "eco", publication_time: int = 0,
                     seconds_per_step: int = 60) -> None:
        """Export executed trades in the analytics transaction-log schema."""
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(["timestamp", "org_id", "account", "kind", "money", "tokens"])
        for e in self.entries:
            r = e.receipt
            if r is None:
                continue
            kind = "Mint" if isinstance(r, MintReceipt) else "Burn"
            writer.writerow([
                publication_time + e.step * seconds_per_step, org_id, e.agent, kind,
                str(r.m), str(abs(r.x)),
            ])

    def pnl_table(self) -> str:
        rows = [("agent", "holdings", "cash", "realized_pnl", "mtm_pnl")]
        for agent, p in self.pnl.items():
            rows.append((agent, str(p.holdings), str(p.cash), str(p.realized), str(p.mark_to_market)))
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
        return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in rows)


def investor_utility(v: Dec, tokens: Dec, paid: Dec) -> Dec:
    """Valuation of the tokens held minus what was paid for them."""
    if tokens.raw < 0:
        raise ScenarioError("tokens must be nonnegative")
    return v.mul(tokens, NEAREST) - paid


def exit_value(state: EcoState, tokens: Dec) -> Dec:
    """Reward from burning ``tokens`` right now (0 for an empty position)."""
    if tokens.raw == 0:
        return ZERO
    reward = -burn_reward_exact(state.k, state.params, state.s, -tokens)
    if state.solvency_guard:
        reward = min(reward, Dec(state.r.raw * tokens.raw // state.s.raw))
    return reward


def resolve_assessment(policy: str, state: EcoState, spec: AgentSpec, rng: random.Random) -> Dec:
    """Turn an assessment policy into a number.

    ``abar`` (current aggregate), ``valuation``, ``zero``, ``ratio:R``
    (the vote that moves the aggregate to ``R`` times itself under equal
    weighting), ``uniform:LO:HI`` (uniform multiple of the aggregate), or a
    literal decimal.
    """
    policy = policy.strip()
    if policy == "abar":
        return state.a_bar
    if policy == "zero":
        return ZERO
    if policy == "valuation":
        if spec.valuation is None:
            raise ScenarioError(f"agent {spec.id} has no valuation")
        return spec.valuation
    if policy.startswith("ratio:"):
        ratio = Fraction(policy[len("ratio:"):])
        theta = state.voting.theta_avg.to_fraction()
        target = state.a_bar.to_fraction() * (ratio - (1 - theta)) / theta
        return Dec.from_fraction(max(target, Fraction(0)))
    if policy.startswith("uniform:"):
        lo, hi = (float(v) for v in policy[len("uniform:"):].split(":"))
        return state.a_bar.mul(Dec.of(rng.uniform(lo, hi)), NEAREST)
    try:
        return Dec.parse(policy)
    except EcoError:
        raise ScenarioError(f"unknown assessment policy {policy!r}") from None


class _Runner:
    def __init__(self, scenario: Scenario, journal: JournalWriter | None):
        self.scenario = scenario
        self.org = Organization(scenario.eco.genesis(), journal)
        self.rng = random.Random(scenario.rng_seed)
        self.books = {a.id: Book() for a in scenario.agents}
        self.trace = TraceLog(scenario.name)
        self.scalpers_waiting: list[str] = []

    def mtm(self, agent: str) -> Dec:
        book = self.books[agent]
        return book.cash + exit_value(self.org.state, book.holdings)

    def record(self, step: int, agent: str, action: str, receipt: Receipt | None, note: str = "") -> None:
        book = self.books[agent]
        self.trace.entries.append(TraceEntry(
            step, agent, action, receipt, book.holdings, book.cash, book.realized, self.mtm(agent), note,
        ))

    def do_mint(self, step: int, agent: str, amount: Dec, policy: str, action: str) -> MintReceipt | None:
        spec = self.scenario.agent(agent)
        book = self.books[agent]
        if book.paid + amount > spec.budget:
            self.record(step, agent, action, None, "skipped: budget exceeded")
            return None
        a = resolve_assessment(policy, self.org.state, spec, self.rng)
        try:
            receipt = self.org.mint(amount, a)
        except EcoError as exc:
            self.record(step, agent, action, None, f"skipped: {exc}")
            return None
        book.holdings += receipt.x
        book.cash -= receipt.m
        book.paid += receipt.m
        book.cost_basis += receipt.m
        self.record(step, agent, action, receipt)
        return receipt

    def do_burn(self, step: int, agent: str, tokens: Dec | None, action: str) -> BurnReceipt | None:
        book = self.books[agent]
        tokens = book.holdings if tokens is None else tokens
        if tokens.raw <= 0 or tokens > book.holdings:
            self.record(step, agent, action, None, "skipped: insufficient holdings")
            return None
        try:
            receipt = self.org.burn(-tokens)
        except EcoError as exc:
            self.record(step, agent, action, None, f"skipped: {exc}")
            return None
        basis_out = Dec.from_fraction(book.cost_basis.to_fraction() * tokens.to_fraction()
                                      / book.holdings.to_fraction())
        book.realized += receipt.m - basis_out
        book.cost_basis -= basis_out
        book.holdings -= tokens
        book.cash += receipt.m
        self.record(step, agent, action, receipt)
        return receipt

    def after_mint(self, step: int, minter: str) -> None:
        for scalper in list(self.scalpers_waiting):
            if scalper != minter:
                self.scalpers_waiting.remove(scalper)
                self.do_burn(step, scalper, None, "scalp_exit")

    def run(self) -> TraceLog:
        sc = self.scenario
        steps = sorted({a.step for a in sc.schedule}
                       | {a.entry_step for a in sc.agents if a.kind is AgentKind.SCALPER}
                       | {a.victim_step for a in sc.agents if a.kind is AgentKind.SANDWICHER})
        by_step = {a.step: a for a in sc.schedule}
        for step in steps:
            for spec in sc.agents:
                if spec.kind is AgentKind.SCALPER and spec.entry_step == step:
                    amount = spec.entry_amount if spec.entry_amount is not None else spec.budget
                    if self.do_mint(step, spec.id, amount, spec.assessment, "scalp_entry"):
                        self.scalpers_waiting.append(spec.id)
                        self.after_mint(step, spec.id)
            sandwichers = [s for s in sc.agents
                           if s.kind is AgentKind.SANDWICHER and s.victim_step == step]
            for spec in sandwichers:
                if self.do_mint(step, spec.id, spec.front_amount, spec.assessment, "front_run"):
                    self.after_mint(step, spec.id)
            act = by_step.get(step)
            if act is not None:
                if act.kind == "mint":
                    spec = sc.agent(act.agent)
                    policy = act.assessment or spec.assessment
                    if self.do_mint(step, act.agent, act.amount, policy, "mint"):
                        self.after_mint(step, act.agent)
                else:
                    self.do_burn(step, act.agent, act.amount, "burn")
            for spec in sandwichers:
                if self.books[spec.id].holdings.raw > 0:
                    self.do_burn(step, spec.id, None, "back_run")
        state = self.org.state
        self.trace.final_state = state
        for agent, book in self.books.items():
            ev = exit_value(state, book.holdings)
            self.trace.pnl[agent] = AgentPnL(
                book.holdings, book.cash, book.paid, book.realized, ev, book.cash + ev,
            )
        return self.trace


def run(scenario: Scenario, journal: JournalWriter | None = None) -> TraceLog:
    """Execute a scenario; identical scenarios produce identical traces."""
    return _Runner(scenario, journal).run()


# ---------------------------------------------------------------------------
# packaged scenarios

FIG4_ECO = EcoConfig(
    k=Dec.of(1), tau=Dec.parse("0.7"), a_bar0=Dec.parse("2.5"),
    theta_avg=Dec.parse("0.5"), c=Dec.parse("0.4"),
)


def scenario_sandwich(eco: EcoConfig = FIG4_ECO, victim_assessment_ratio: str | Fraction = "2/3",
                      name: str = "fig4_sandwich") -> Scenario:
    """An early investor builds supply; a victim then mints with a vote that
    moves the aggregate to ``ratio`` times itself, and a bot sandwiches it."""
    ratio = Fraction(victim_assessment_ratio)
    agents = (
        AgentSpec("early", AgentKind.INVESTOR, budget=Dec.of(6), valuation=Dec.of(3)),
        AgentSpec("victim", AgentKind.INVESTOR, budget=Dec.of(3), valuation=Dec.of(3)),
        AgentSpec("bot", AgentKind.SANDWICHER, budget=Dec.of(1), victim_step=2, front_amount=Dec.of(1)),
    )
    schedule = (
        Action(1, "early", "mint", Dec.of(6), "abar"),
        Action(2, "victim", "mint", Dec.of(3), f"ratio:{ratio.numerator}/{ratio.denominator}"),
    )
    return Scenario(name, eco, agents, schedule)


def scenario_scalper_plain_curve(with_investor: bool = True, investor_first: bool = False,
                                 name: str = "fig5_scalper") -> Scenario:
    """A bot enters an empty plain curve with 1, an investor follows with 10,
    and the bot exits right after the investor's mint."""
    eco = EcoConfig(
        k=Dec.of(1), tau=PLAIN_TAU, a_bar0=Dec.of(1),
        theta_avg=Dec.parse("0.5"), c=Dec.parse("0.4"), voting=False,
    )
    scalper_step, investor_step = (2, 1) if investor_first else (0, 1)
    agents = [AgentSpec("scalper", AgentKind.SCALPER, budget=Dec.of(1), entry_step=scalper_step)]
    schedule: tuple[Action, ...] = ()
    if with_investor:
        agents.append(AgentSpec("investor", AgentKind.INVESTOR, budget=Dec.of(10), valuation=Dec.of(2)))
        schedule = (Action(investor_step, "investor", "mint", Dec.of(10), "abar"),)
    return Scenario(name, eco, tuple(agents), schedule)


# ---------------------------------------------------------------------------
# scenario files


def _dec_field(data: Mapping[str, Any], key: str, default: Any = None) -> Dec | None:
    if key not in data or data[key] is None:
        return default
    value = data[key]
    if isinstance(value, bool):
        raise ScenarioError(f"{key} must be a number")
    return Dec.parse(str(value))


def scenario_from_dict(data: Mapping[str, Any]) -> Scenario:
    try:
        eco_d = data["eco"]
        eco = EcoConfig(
            k=_dec_field(eco_d, "k"),
            tau=_dec_field(eco_d, "tau"),
            a_bar0=_dec_field(eco_d, "a_bar0"),
            theta_avg=_dec_field(eco_d, "theta_avg"),
            c=_dec_field(eco_d, "c"),
            weighting=Weighting(eco_d.get("weighting", "equal")),
            voting=bool(eco_d.get("voting", True)),
            solvency_guard=bool(eco_d.get("solvency_guard", False)),
        )
        agents = tuple(
            AgentSpec(
                id=str(a["id"]),
                kind=AgentKind(a["kind"]),
                budget=_dec_field(a, "budget"),
                valuation=_dec_field(a, "valuation"),
                assessment=str(a.get("assessment", "abar")),
                entry_step=a.get("entry_step"),
                entry_amount=_dec_field(a, "entry_amount"),
                exit_trigger=a.get("exit_trigger", "after_next_mint"),
                victim_step=a.get("victim_step"),
                front_amount=_dec_field(a, "front_amount"),
            )
            for a in data.get("agents", [])
        )
        schedule = tuple(
            Action(
                step=int(s["step"]),
                agent=str(s["agent"]),
                kind=str(s["action"]),
                amount=_dec_field(s, "amount"),
                assessment=None if s.get("assessment") is None else str(s["assessment"]),
            )
            for s in data.get("schedule", []) or []
        )
        return Scenario(str(data.get("name", "scenario")), eco, agents, schedule,
                        int(data.get("seed", 0)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"malformed scenario: {exc!r}") from None


def load_scenario(path: str | Path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: scenario file must be a mapping")
    return scenario_from_dict(data)


PACKAGED_DIR = Path(__file__).parent / "scenarios"


def packaged_scenarios() -> list[str]:
    return sorted(p.stem for p in PACKAGED_DIR.glob("*.yaml"))


def load_packaged(name: str) -> Scenario:
    path = PACKAGED_DIR / f"{name}.yaml"
    if not path.exists():
        raise ScenarioError(f"no packaged scenario named {name!r}")
    return load_scenario(path)


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    eco = scenario.eco
    agents = []
    for a in scenario.agents:
        entry: dict[str, Any] = {"id": a.id, "kind": a.kind.value, "budget": a.budget.compact()}
        if a.valuation is not None:
            entry["valuation"] = a.valuation.compact()
        if a.assessment != "abar":
            entry["assessment"] = a.assessment
        if a.kind is AgentKind.SCALPER:
            entry["entry_step"] = a.entry_step
            if a.entry_amount is not None:
                entry["entry_amount"] = a.entry_amount.compact()
            entry["exit_trigger"] = a.exit_trigger
        if a.kind is AgentKind.SANDWICHER:
            entry["victim_step"] = a.victim_step
            entry["front_amount"] = a.front_amount.compact()
        agents.append(entry)
    schedule = []
    for act in scenario.schedule:
        item: dict[str, Any] = {"step": act.step, "agent": act.agent, "action": act.kind}
        if act.amount is not None:
            item["amount"] = act.amount.compact()
        if act.assessment is not None:
            item["assessment"] = act.assessment
        schedule.append(item)
    return {
        "name": scenario.name,
        "seed": scenario.rng_seed,
        "eco": {
            "k": eco.k.compact(), "tau": eco.tau.compact(), "a_bar0": eco.a_bar0.compact(),
            "theta_avg": eco.theta_avg.compact(), "c": eco.c.compact(),
            "weighting": eco.weighting.value, "voting": eco.voting,
            "solvency_guard": eco.solvency_guard,
        },
        "agents": agents,
        "schedule": schedule,
    }


def dump_scenario(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(scenario), sort_keys=False)
