"""``eco`` command line: quote, plot, sim, replay, analyze.

Exit codes: 0 success, 1 domain or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import analytics, plot
from .agents import load_packaged, load_scenario, packaged_scenarios, run
from .curves import AllocativeParams
from .errors import EcoError, JournalError
from .exchange import (
    burn_reward_exact,
    burn_reward_lower,
    mint_cost_exact,
    mint_tokens_lower,
    quote_mint,
)
from .journal import JournalWriter, replay
from .numeric import ULP, Dec
from .organization import EcoState, solvency_ratio, spot_price


def _dec(text: str) -> Dec:
    try:
        return Dec.parse(text, strict=True)
    except EcoError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _out(text: str = "") -> None:
    sys.stdout.write(text + "\n")


def _state_lines(state: EcoState) -> list[str]:
    return [
        f"seq       {state.seq}",
        f"s         {state.s}",
        f"r         {state.r}",
        f"a_bar     {state.a_bar}",
        f"spot      {spot_price(state)}",
        f"solvency  {solvency_ratio(state)}",
    ]


def cmd_quote(args: argparse.Namespace) -> int:
    params = AllocativeParams(args.a, args.tau)
    if args.side == "mint":
        q = quote_mint(args.k, params, args.s, args.m, args.tol)
        _out(f"tokens        {q.x}")
        _out(f"tokens_lower  {mint_tokens_lower(args.k, params, args.s, args.m)}")
        _out(f"cost          {mint_cost_exact(args.k, params, args.s, q.x)}")
        _out(f"remainder     {q.remainder}")
    else:
        reward = -burn_reward_exact(args.k, params, args.s, args.x)
        _out(f"reward        {reward}")
        _out(f"reward_lower  {burn_reward_lower(args.k, params, args.s, args.x)}")
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    spec = plot.PlotSpec(args.k, args.S, args.samples, args.a, tuple(args.tau or ()))
    samples = plot.sample(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_path, svg_path = out.with_suffix(".csv"), out.with_suffix(".svg")
    csv_path.write_text(plot.to_csv(samples), encoding="utf-8")
    svg_path.write_text(plot.to_svg(samples, args.title or ""), encoding="utf-8")
    _out(f"wrote {csv_path}")
    _out(f"wrote {svg_path}")
    for tau, values in samples.q.items():
        _out(f"tau={tau}  max_q={max(values)}  sup={samples.sup[tau]}")
    return 0


def cmd_sim(args: argparse.Namespace) -> int:
    if args.list:
        for name in packaged_scenarios():
            _out(name)
        return 0
    if args.scenario is None:
        raise _Usage("sim needs a scenario path or packaged name (or --list)")
    path = Path(args.scenario)
    if path.exists():
        scenario = load_scenario(path)
    elif args.scenario in packaged_scenarios():
        scenario = load_packaged(args.scenario)
    else:
        raise EcoError(f"scenario not found: {args.scenario}")
    journal = JournalWriter.open(args.journal) if args.journal else None
    try:
        trace = run(scenario, journal)
    finally:
        if journal is not None:
            journal.close()
    if args.trace:
        with open(args.trace, "w", newline="", encoding="utf-8") as fh:
            trace.write_csv(fh)
    if args.tx_csv:
        with open(args.tx_csv, "w", newline="", encoding="utf-8") as fh:
            trace.write_tx_csv(fh, org_id=scenario.name)
    _out(f"scenario  {scenario.name}")
    for e in trace.entries:
        if e.receipt is None:
            _out(f"step {e.step}  {e.agent}  {e.action}  {e.note}")
    _out(trace.pnl_table())
    _out()
    for line in _state_lines(trace.final_state):
        _out(line)
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    with open(args.journal, encoding="utf-8") as fh:
        state, receipts = replay(fh)
    _out(f"receipts  {len(receipts)}")
    for line in _state_lines(state):
        _out(line)
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    if args.fixture:
        tx_path, org_path, _ = analytics.fixture_paths(args.fixture)
    elif args.tx_csv and args.org_csv:
        tx_path, org_path = args.tx_csv, args.org_csv
    else:
        raise _Usage("analyze needs TX_CSV ORG_CSV or --fixture NAME")
    if args.window < 0:
        raise _Usage("--window must be nonnegative")
    records, rejects = analytics.load_csv(tx_path)
    metas, org_rejects = analytics.load_orgs_csv(org_path)
    summary = analytics.summarize(records, metas, args.window, rejects + org_rejects)
    _out(summary.render())
    for reject in summary.rejects:
        _out(f"rejected line {reject.line}: {reject.reason}")
    for warning in summary.warnings:
        _out(f"warning: {warning}")
    return 0


class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eco", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("quote", help="quote a mint or burn on an allocative curve")
    q.add_argument("side", choices=("mint", "burn"))
    for flag in ("--k", "--tau", "--a", "--s"):
        q.add_argument(flag, type=_dec, required=True)
    q.add_argument("--m", type=_dec, help="payment (mint)")
    q.add_argument("--x", type=_dec, help="negative token amount (burn)")
    q.add_argument("--tol", type=_dec, default=ULP)
    q.set_defaults(func=cmd_quote)

    p = sub.add_parser("plot", help="sample p and allocative curves to CSV and SVG")
    p.add_argument("--k", type=_dec, default=Dec.of(1))
    p.add_argument("--a", type=_dec)
    p.add_argument("--tau", type=_dec, action="append", help="repeat for several curves")
    p.add_argument("--S", type=_dec, required=True, help="supply range end")
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--title")
    p.add_argument("--out", required=True, help="output path; .csv and .svg are written")
    p.set_defaults(func=cmd_plot)

    s = sub.add_parser("sim", help="run a scenario file or packaged scenario")
    s.add_argument("scenario", nargs="?")
    s.add_argument("--list", action="store_true", help="list packaged scenarios")
    s.add_argument("--journal", help="write the receipt journal here")
    s.add_argument("--trace", help="write the trace CSV here")
    s.add_argument("--tx-csv", help="write executed trades in the analytics CSV schema")
    s.set_defaults(func=cmd_sim)

    r = sub.add_parser("replay", help="replay and verify a receipt journal")
    r.add_argument("journal")
    r.set_defaults(func=cmd_replay)

    a = sub.add_parser("analyze", help="investor/speculator flow table from a transaction log")
    a.add_argument("tx_csv", nargs="?")
    a.add_argument("org_csv", nargs="?")
    a.add_argument("--fixture", choices=sorted(analytics.FIXTURES))
    a.add_argument("--window", type=int, default=analytics.DEFAULT_WINDOW, help="seconds (default 120)")
    a.set_defaults(func=cmd_analyze)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "quote":
        needed = "--m" if args.side == "mint" else "--x"
        if getattr(args, needed[2:]) is None:
            parser.error(f"quote {args.side} requires {needed}")
    try:
        return args.func(args)
    except _Usage as exc:
        parser.error(str(exc))
    except JournalError as exc:
        sys.stderr.write(f"eco: journal error: {exc}\n")
    except (EcoError, OSError) as exc:
        sys.stderr.write(f"eco: {exc}\n")
    return 1


if __name__ == "__main__":
    sys.exit(main())
