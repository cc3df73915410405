"""Transaction-log analytics: label accounts as speculators or investors by
how soon after publication they first minted, then total payments and
rewards per class (the layout of the investor/speculator flow table).

CSV schemas (exact headers)::

    timestamp,org_id,account,kind,money,tokens
    org_id,publication_time
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .errors import CsvFormatError, EcoError, UnknownOrg
from .numeric import ZERO, Dec

TX_HEADER = ("timestamp", "org_id", "account", "kind", "money", "tokens")
ORG_HEADER = ("org_id", "publication_time")
DEFAULT_WINDOW = 120


class TxKind(Enum):
    MINT = "Mint"
    BURN = "Burn"


class Label(Enum):
    INVESTOR = "Investor"
    SPECULATOR = "Speculator"


@dataclass(frozen=True)
class TxRecord:
    timestamp: int
    org_id: str
    account: str
    kind: TxKind
    money: Dec
    tokens: Dec

    def __post_init__(self) -> None:
        if self.timestamp < 0:
            raise ValueError("timestamp must be nonnegative")
        if self.money.raw < 0:
            raise ValueError("money must be nonnegative")
        if self.tokens.raw <= 0:
            raise ValueError("tokens must be positive")


@dataclass(frozen=True)
class OrgMeta:
    org_id: str
    publication_time: int


@dataclass(frozen=True)
class Reject:
    line: int
    reason: str


@dataclass
class FlowSummary:
    payments: dict[Label, Dec] = field(default_factory=lambda: {lb: ZERO for lb in Label})
    rewards: dict[Label, Dec] = field(default_factory=lambda: {lb: ZERO for lb in Label})
    accounts: dict[Label, int] = field(default_factory=lambda: {lb: 0 for lb in Label})
    rejects: list[Reject] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def total_payments(self) -> Dec:
        return sum(self.payments.values(), ZERO)

    @property
    def total_rewards(self) -> Dec:
        return sum(self.rewards.values(), ZERO)

    def render(self) -> str:
        rows = [
            ("", Label.INVESTOR.value, Label.SPECULATOR.value, "Total"),
            ("Payments", str(self.payments[Label.INVESTOR]), str(self.payments[Label.SPECULATOR]),
             str(self.total_payments)),
            ("Rewards", str(self.rewards[Label.INVESTOR]), str(self.rewards[Label.SPECULATOR]),
             str(self.total_rewards)),
            ("Accounts", str(self.accounts[Label.INVESTOR]), str(self.accounts[Label.SPECULATOR]),
             str(sum(self.accounts.values()))),
        ]
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = [rows[0][0].ljust(widths[0]) + "  "
                 + "  ".join(c.rjust(w) for c, w in zip(rows[0][1:], widths[1:]))]
        for row in rows[1:]:
            lines.append(row[0].ljust(widths[0]) + "  "
                         + "  ".join(c.rjust(w) for c, w in zip(row[1:], widths[1:])))
        return "\n".join(lines)


def first_mints(records: Iterable[TxRecord]) -> dict[tuple[str, str], int]:
    """Earliest mint timestamp per (org_id, account)."""
    first: dict[tuple[str, str], int] = {}
    for tx in records:
        if tx.kind is TxKind.MINT:
            key = (tx.org_id, tx.account)
            if key not in first or tx.timestamp < first[key]:
                first[key] = tx.timestamp
    return first


def _label(first_mint: int | None, meta: OrgMeta, window_seconds: int) -> Label:
    if first_mint is None:
        return Label.INVESTOR
    return Label.SPECULATOR if first_mint - meta.publication_time <= window_seconds else Label.INVESTOR


def classify(tx: TxRecord, meta: OrgMeta, window_seconds: int = DEFAULT_WINDOW,
             history: Iterable[TxRecord] = ()) -> Label:
    """Speculator iff the account's first mint in the org came at most
    ``window_seconds`` after publication (inclusive). ``history`` supplies the
    account's other transactions; an account that never minted is an investor.
    """
    if tx.org_id != meta.org_id:
        raise UnknownOrg(f"transaction org {tx.org_id!r} does not match {meta.org_id!r}")
    first = first_mints([tx, *history]).get((tx.org_id, tx.account))
    return _label(first, meta, window_seconds)


def label_accounts(records: Iterable[TxRecord], metas: Mapping[str, OrgMeta],
                   window_seconds: int = DEFAULT_WINDOW) -> dict[tuple[str, str], Label]:
    records = list(records)
    first = first_mints(records)
    labels = {}
    for tx in records:
        key = (tx.org_id, tx.account)
        if key in labels:
            continue
        meta = metas.get(tx.org_id)
        if meta is None:
            raise UnknownOrg(f"no publication time for org {tx.org_id!r}")
        labels[key] = _label(first.get(key), meta, window_seconds)
    return labels


def summarize(records: Iterable[TxRecord], metas: Mapping[str, OrgMeta],
              window_seconds: int = DEFAULT_WINDOW, rejects: Iterable[Reject] = ()) -> FlowSummary:
    """Sum mint money into payments and burn money into rewards per class.

    Records of unknown orgs are moved to the reject report; transactions
    before their org's publication time are kept but flagged.
    """
    summary = FlowSummary(rejects=list(rejects))
    known = []
    for i, tx in enumerate(records):
        if tx.org_id not in metas:
            summary.rejects.append(Reject(0, f"record {i}: unknown org {tx.org_id!r}"))
            continue
        if tx.timestamp < metas[tx.org_id].publication_time:
            summary.warnings.append(
                f"{tx.org_id}/{tx.account}: transaction at {tx.timestamp} precedes publication"
            )
        known.append(tx)
    labels = label_accounts(known, metas, window_seconds)
    for label in labels.values():
        summary.accounts[label] += 1
    for tx in known:
        label = labels[(tx.org_id, tx.account)]
        if tx.kind is TxKind.MINT:
            summary.payments[label] += tx.money
        else:
            summary.rewards[label] += tx.money
    return summary


def _check_header(header: list[str] | None, expected: tuple[str, ...], path: str | Path) -> None:
    """A zero-byte file reads as empty; any other header must match exactly."""
    if header is None:
        return
    if tuple(h.strip() for h in header) != expected:
        raise CsvFormatError(f"{path}: header must be {','.join(expected)}, got {','.join(header)}")


def _parse_tx(row: list[str]) -> TxRecord:
    if len(row) != len(TX_HEADER):
        raise ValueError(f"expected {len(TX_HEADER)} fields, got {len(row)}")
    ts, org, account, kind, money, tokens = (c.strip() for c in row)
    try:
        tx_kind = TxKind(kind)
    except ValueError:
        raise ValueError(f"kind must be Mint or Burn, got {kind!r}") from None
    return TxRecord(int(ts), org, account, tx_kind, Dec.parse(money, strict=True),
                    Dec.parse(tokens, strict=True))


def load_csv(path: str | Path) -> tuple[list[TxRecord], list[Reject]]:
    """Parse a transaction log; bad rows become rejects with the line number."""
    records, rejects = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), TX_HEADER, path)
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            try:
                records.append(_parse_tx(row))
            except (ValueError, EcoError) as exc:
                rejects.append(Reject(reader.line_num, str(exc)))
    return records, rejects


def load_orgs_csv(path: str | Path) -> tuple[dict[str, OrgMeta], list[Reject]]:
    metas: dict[str, OrgMeta] = {}
    rejects = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), ORG_HEADER, path)
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            try:
                if len(row) != 2:
                    raise ValueError(f"expected 2 fields, got {len(row)}")
                org, published = row[0].strip(), int(row[1])
                if published < 0:
                    raise ValueError("publication_time must be nonnegative")
                if org in metas:
                    raise ValueError(f"duplicate org {org!r}")
                metas[org] = OrgMeta(org, published)
            except ValueError as exc:
                rejects.append(Reject(reader.line_num, str(exc)))
    return metas, rejects


DATA_DIR = Path(__file__).parent / "data"
FIXTURES = {
    "table1": ("table1_tx.csv", "table1_orgs.csv", "table1_labels.csv"),
}


def fixture_paths(name: str) -> tuple[Path, Path, Path]:
    try:
        return tuple(DATA_DIR / f for f in FIXTURES[name])  # type: ignore[return-value]
    except KeyError:
        raise EcoError(f"no packaged fixture named {name!r}") from None


def load_labels_csv(path: str | Path) -> dict[tuple[str, str], Label]:
    """Planted labels for a fixture: ``org_id,account,label``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), ("org_id", "account", "label"), path)
        return {(org, account): Label(label) for org, account, label in reader if org}
