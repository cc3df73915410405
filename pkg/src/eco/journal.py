"""Append-only receipt journal (newline-delimited JSON) and bit-exact replay.

The first line is a genesis record carrying the configuration; each later
line is one receipt. Every decimal is a string with exactly 18 fractional
digits. Replay re-executes each operation from genesis and checks that the
recomputed receipt matches the recorded one field by field.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import EcoError, JournalError
from .numeric import Dec
from .organization import (
    BurnReceipt,
    EcoState,
    MintReceipt,
    Receipt,
    VotingConfig,
    Weighting,
    burn,
    genesis,
    mint,
)

JOURNAL_FIELDS = ("seq", "kind", "m", "x", "a", "a_bar_before", "a_bar_after", "s_after", "r_after")


def genesis_record(state: EcoState) -> dict:
    return {
        "seq": state.seq,
        "kind": "genesis",
        "k": str(state.k),
        "tau": str(state.tau),
        "a_bar": str(state.a_bar),
        "theta_avg": str(state.voting.theta_avg),
        "c": str(state.voting.c),
        "weighting": state.voting.weighting.value,
        "voting_enabled": state.voting.enabled,
        "solvency_guard": state.solvency_guard,
    }


def receipt_record(receipt: Receipt) -> dict:
    record = {
        "seq": receipt.seq,
        "kind": receipt.kind,
        "m": str(receipt.m),
        "x": str(receipt.x),
        "a": str(receipt.a) if isinstance(receipt, MintReceipt) else None,
        "a_bar_before": str(receipt.a_bar_before),
        "a_bar_after": str(receipt.a_bar_after),
        "s_after": str(receipt.s_after),
        "r_after": str(receipt.r_after),
    }
    if isinstance(receipt, BurnReceipt) and receipt.insolvent:
        record["insolvent"] = True
    return record


def dumps(record: dict) -> str:
    return json.dumps(record, separators=(",", ":"))


class JournalWriter:
    """Writes one JSON object per line and flushes after each append."""

    def __init__(self, sink: IO[str]):
        self._sink = sink

    @classmethod
    def open(cls, path: str | Path) -> JournalWriter:
        return cls(open(path, "w", encoding="utf-8"))

    def write_genesis(self, state: EcoState) -> None:
        self._write(genesis_record(state))

    def append(self, receipt: Receipt) -> None:
        self._write(receipt_record(receipt))

    def _write(self, record: dict) -> None:
        self._sink.write(dumps(record) + "\n")
        self._sink.flush()

    def close(self) -> None:
        self._sink.close()


def _dec(record: dict, key: str, line: int) -> Dec:
    try:
        value = record[key]
    except KeyError:
        raise JournalError(f"missing field {key!r}", line) from None
    if not isinstance(value, str):
        raise JournalError(f"field {key!r} must be a decimal string", line)
    try:
        return Dec.parse(value, strict=True)
    except EcoError as exc:
        raise JournalError(f"bad decimal in {key!r}: {exc}", line) from None


def _state_from_genesis(record: dict, line: int) -> EcoState:
    try:
        voting = VotingConfig(
            theta_avg=_dec(record, "theta_avg", line),
            c=_dec(record, "c", line),
            weighting=Weighting(record.get("weighting", "equal")),
            enabled=bool(record.get("voting_enabled", True)),
        )
        return genesis(
            _dec(record, "k", line),
            _dec(record, "tau", line),
            voting,
            _dec(record, "a_bar", line),
            solvency_guard=bool(record.get("solvency_guard", False)),
        )
    except JournalError:
        raise
    except (EcoError, ValueError) as exc:
        raise JournalError(f"invalid genesis record: {exc}", line) from None


def _parse_lines(lines: Iterable[str]) -> Iterator[tuple[int, dict]]:
    for lineno, text in enumerate(lines, start=1):
        if not text.strip():
            continue
        try:
            record = json.loads(text)
        except json.JSONDecodeError as exc:
            raise JournalError(f"not valid JSON ({exc.msg})", lineno) from None
        if not isinstance(record, dict):
            raise JournalError("record is not an object", lineno)
        yield lineno, record


def replay(lines: Iterable[str]) -> tuple[EcoState, list[Receipt]]:
    """Rebuild the state from a journal, verifying every recorded receipt."""
    state: EcoState | None = None
    receipts: list[Receipt] = []
    for lineno, record in _parse_lines(lines):
        kind = record.get("kind")
        if state is None:
            if kind != "genesis":
                raise JournalError("journal must start with a genesis record", lineno)
            state = _state_from_genesis(record, lineno)
            continue
        if record.get("seq") != state.seq + 1:
            raise JournalError(f"expected seq {state.seq + 1}, got {record.get('seq')!r}", lineno)
        try:
            if kind == "mint":
                receipt, state = mint(state, _dec(record, "m", lineno), _dec(record, "a", lineno))
            elif kind == "burn":
                receipt, state = burn(state, _dec(record, "x", lineno))
            else:
                raise JournalError(f"unknown record kind {kind!r}", lineno)
        except JournalError:
            raise
        except EcoError as exc:
            raise JournalError(f"operation failed on replay: {exc}", lineno) from None
        recomputed = receipt_record(receipt)
        for key in JOURNAL_FIELDS:
            if record.get(key) != recomputed[key]:
                raise JournalError(
                    f"field {key!r} recorded {record.get(key)!r}, replay gives {recomputed[key]!r}",
                    lineno,
                )
        receipts.append(receipt)
    if state is None:
        raise JournalError("journal is empty (no genesis record)")
    return state, receipts


def replay_file(path: str | Path) -> tuple[EcoState, list[Receipt]]:
    with open(path, encoding="utf-8") as fh:
        return replay(fh)
