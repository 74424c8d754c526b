"""Problem-file parsing and emission, display rounding, and the Nile data.

Documents carry numbers as decimal strings ("16.8") or fraction strings
("84/5"); both are read into exact rationals.  Display rounding is half-up
and only ever applied to text output: JSON documents always carry the exact
values, so rounding can never leak back into computation.

Problem CSV grammar: header ``id,name,successor,inflow[,withdrawal]``, one
row per agent, ``successor`` blank for the sink.  Problem JSON grammar: an
object with an ``agents`` array of ``{id, name, successor|null, inflow[,
withdrawal]}`` plus an optional ``provenance`` object (CSV cannot carry
provenance notes).  All documents are UTF-8 with LF line endings.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .core import (
    Allocation,
    MixedNetworks,
    ParseError,
    Problem,
    QuantityLike,
    RiverNetwork,
    TooFewAgents,
    quantity,
    validate_network,
)

# ---------------------------------------------------------------------------
# Display rounding
# ---------------------------------------------------------------------------

def round_half_up(value: Fraction, decimals: int = 2) -> Fraction:
    """Round a nonnegative rational half-up at ``decimals`` places, exactly."""
    if decimals < 0:
        raise ParseError(f"negative decimals: {decimals}")
    scale = 10**decimals
    shifted = value * scale
    whole = (2 * shifted.numerator + shifted.denominator) // (
        2 * shifted.denominator
    )
    return Fraction(whole, scale)


def truncate_decimals(value: Fraction, decimals: int = 2) -> Fraction:
    """Drop digits beyond ``decimals`` places (toward zero, value >= 0)."""
    if decimals < 0:
        raise ParseError(f"negative decimals: {decimals}")
    scale = 10**decimals
    shifted = value * scale
    return Fraction(shifted.numerator // shifted.denominator, scale)


def format_decimal(value: Fraction, decimals: int = 2) -> str:
    """Fixed-point decimal text of the half-up rounding of ``value``."""
    rounded = round_half_up(value, decimals)
    scaled = rounded.numerator * (10**decimals) // rounded.denominator
    text = str(scaled).rjust(decimals + 1, "0")
    if decimals == 0:
        return text
    return f"{text[:-decimals]}.{text[-decimals:]}"


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BasinDataset:
    """A river network with inflows and, optionally, observed withdrawals."""

    network: RiverNetwork
    inflows: tuple[Fraction, ...]
    raw_withdrawals: Optional[tuple[Fraction, ...]] = None
    provenance: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        validate_network(self.network)
        if self.network.labels is None:
            # Documents always carry names, so normalize unlabeled networks
            # to index names; emit/parse is then an identity on datasets.
            object.__setattr__(
                self,
                "network",
                RiverNetwork(
                    self.network.successors,
                    tuple(str(i) for i in self.network.agents),
                ),
            )
        inflows = tuple(quantity(v) for v in self.inflows)
        if len(inflows) != self.network.size:
            raise ParseError(
                f"{len(inflows)} inflows for {self.network.size} agents"
            )
        object.__setattr__(self, "inflows", inflows)
        if self.raw_withdrawals is not None:
            withdrawals = tuple(quantity(v) for v in self.raw_withdrawals)
            if len(withdrawals) != self.network.size:
                raise ParseError(
                    f"{len(withdrawals)} withdrawals for "
                    f"{self.network.size} agents"
                )
            object.__setattr__(self, "raw_withdrawals", withdrawals)
        object.__setattr__(self, "provenance", dict(self.provenance))

    def problem(self) -> Problem:
        return Problem(self.network, self.inflows)


NILE_COUNTRIES = ("Tanzania", "Uganda", "South Sudan", "Ethiopia", "Sudan", "Egypt")


def nile_dataset() -> BasinDataset:
    """The embedded Nile basin dataset (km3/year, AQUASTAT-derived).

    Tanzania feeds Uganda, then South Sudan, then Sudan; Ethiopia joins at
    Sudan; Sudan feeds Egypt, the sink.  Inflows are stored at the published
    two-figure precision; the provenance notes record how each was built.
    """
    network = RiverNetwork.from_successor_map(
        6,
        {1: 2, 2: 3, 3: 5, 4: 5, 5: 6},
        labels=NILE_COUNTRIES,
    )
    inflows = tuple(quantity(v) for v in ("16.8", "16.2", "17.6", "52.6", "0.7", "0"))
    withdrawals = tuple(
        quantity(v) for v in ("5.18", "0.64", "0.66", "10.55", "26.93", "77.7")
    )
    provenance = {
        "Tanzania": "51% of Lake Victoria's 33 km3/year contribution "
        "(16.83, stored at the published precision 16.8)",
        "Uganda": "43% of Lake Victoria's contribution plus 2 km3/year "
        "from Lake Albert (16.19, stored at the published precision 16.2)",
        "South Sudan": "Bahr al Ghazal 1.5 plus Sobat tributaries "
        "(Pibor 3.1, Baro 13)",
        "Ethiopia": "Blue Nile outflow from Lake Tana",
        "Sudan": "Atbara River",
        "Egypt": "no own contribution; relies entirely on upstream inflows",
        "withdrawals": "AQUASTAT total freshwater withdrawal per country",
    }
    return BasinDataset(network, inflows, withdrawals, provenance)


# ---------------------------------------------------------------------------
# Problem documents
# ---------------------------------------------------------------------------

_CSV_HEADER = ["id", "name", "successor", "inflow"]


def _number(text: object, where: str) -> Fraction:
    if isinstance(text, bool) or isinstance(text, float):
        raise ParseError(
            f"{where}: write numbers as strings ('16.8' or '84/5') so they "
            f"stay exact, got {text!r}"
        )
    if isinstance(text, int):
        return quantity(text)
    if not isinstance(text, str):
        raise ParseError(f"{where}: not a number: {text!r}")
    try:
        return quantity(text)
    except ParseError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def _assemble(
    rows: list[dict],
    provenance: Mapping[str, str],
    where: str,
) -> BasinDataset:
    if not rows:
        raise TooFewAgents(f"{where}: no agents")
    n = len(rows)
    seen = set()
    succ: dict[int, int] = {}
    names: list[Optional[str]] = [None] * n
    inflows: list[Optional[Fraction]] = [None] * n
    withdrawals: list[Optional[Fraction]] = [None] * n
    any_withdrawal = any(r.get("withdrawal") is not None for r in rows)
    for r in rows:
        ident = r["id"]
        if not isinstance(ident, int) or isinstance(ident, bool):
            raise ParseError(f"{where}: agent id must be an integer, got {ident!r}")
        if not 1 <= ident <= n:
            raise ParseError(f"{where}: agent id {ident} outside 1..{n}")
        if ident in seen:
            raise ParseError(f"{where}: duplicate agent id {ident}")
        seen.add(ident)
        names[ident - 1] = str(r.get("name") or ident)
        inflows[ident - 1] = r["inflow"]
        successor = r.get("successor")
        if successor is not None:
            if not isinstance(successor, int) or isinstance(successor, bool):
                raise ParseError(
                    f"{where}: successor of agent {ident} must be an integer "
                    f"or empty, got {successor!r}"
                )
            succ[ident] = successor
        if any_withdrawal:
            w = r.get("withdrawal")
            if w is None:
                raise ParseError(
                    f"{where}: agent {ident} lacks a withdrawal but other "
                    "rows carry one"
                )
            withdrawals[ident - 1] = w
    network = RiverNetwork.from_successor_map(n, succ, labels=names)  # type: ignore[arg-type]
    return BasinDataset(
        network,
        tuple(inflows),  # type: ignore[arg-type]
        tuple(withdrawals) if any_withdrawal else None,  # type: ignore[arg-type]
        provenance,
    )


def _parse_csv(text: str) -> BasinDataset:
    reader = csv.reader(io.StringIO(text))
    table = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not table:
        raise ParseError("csv: empty document")
    header = [cell.strip().lower() for cell in table[0]]
    if header[: len(_CSV_HEADER)] != _CSV_HEADER or len(header) > len(_CSV_HEADER) + 1:
        raise ParseError(
            f"csv line 1: expected header id,name,successor,inflow"
            f"[,withdrawal], got {','.join(header)}"
        )
    has_withdrawal = len(header) == len(_CSV_HEADER) + 1
    if has_withdrawal and header[-1] != "withdrawal":
        raise ParseError("csv line 1: fifth column must be withdrawal")
    rows = []
    for lineno, row in enumerate(table[1:], start=2):
        where = f"csv line {lineno}"
        if len(row) != len(header):
            raise ParseError(f"{where}: expected {len(header)} fields, got {len(row)}")
        try:
            ident = int(row[0].strip())
        except ValueError as exc:
            raise ParseError(f"{where}: bad agent id {row[0]!r}") from exc
        successor_text = row[2].strip()
        successor: Optional[int]
        if successor_text == "":
            successor = None
        else:
            try:
                successor = int(successor_text)
            except ValueError as exc:
                raise ParseError(f"{where}: bad successor {row[2]!r}") from exc
        entry: dict = {
            "id": ident,
            "name": row[1].strip(),
            "successor": successor,
            "inflow": _number(row[3].strip(), where),
        }
        if has_withdrawal:
            entry["withdrawal"] = _number(row[4].strip(), where)
        rows.append(entry)
    return _assemble(rows, {}, "csv")


def _parse_json(text: str) -> BasinDataset:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"json: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("agents"), list):
        raise ParseError("json: expected an object with an 'agents' array")
    rows = []
    for idx, item in enumerate(doc["agents"]):
        where = f"json agents[{idx}]"
        if not isinstance(item, dict):
            raise ParseError(f"{where}: expected an object")
        entry = {
            "id": item.get("id"),
            "name": item.get("name"),
            "successor": item.get("successor"),
            "inflow": _number(item.get("inflow"), where),
        }
        if "withdrawal" in item and item["withdrawal"] is not None:
            entry["withdrawal"] = _number(item["withdrawal"], where)
        rows.append(entry)
    provenance = doc.get("provenance", {})
    if not isinstance(provenance, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in provenance.items()
    ):
        raise ParseError("json: provenance must map strings to strings")
    return _assemble(rows, provenance, "json")


def parse_problem(text: str, fmt: str) -> BasinDataset:
    """Parse a problem document.  ``fmt`` is ``"csv"`` or ``"json"``."""
    if fmt == "csv":
        return _parse_csv(text)
    if fmt == "json":
        return _parse_json(text)
    raise ParseError(f"unknown problem format {fmt!r}")


def emit_problem(dataset: BasinDataset, fmt: str) -> str:
    """Serialize a dataset so that :func:`parse_problem` reads it back
    exactly (CSV drops provenance notes; JSON keeps them)."""
    net = dataset.network
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        header = list(_CSV_HEADER)
        if dataset.raw_withdrawals is not None:
            header.append("withdrawal")
        writer.writerow(header)
        for i in net.agents:
            succ = net.successors[i - 1]
            row = [
                str(i),
                net.label_of(i),
                "" if succ is None else str(succ),
                str(dataset.inflows[i - 1]),
            ]
            if dataset.raw_withdrawals is not None:
                row.append(str(dataset.raw_withdrawals[i - 1]))
            writer.writerow(row)
        return out.getvalue()
    if fmt == "json":
        agents = []
        for i in net.agents:
            item: dict = {
                "id": i,
                "name": net.label_of(i),
                "successor": net.successors[i - 1],
                "inflow": str(dataset.inflows[i - 1]),
            }
            if dataset.raw_withdrawals is not None:
                item["withdrawal"] = str(dataset.raw_withdrawals[i - 1])
            agents.append(item)
        doc: dict = {"agents": agents}
        if dataset.provenance:
            doc["provenance"] = dict(dataset.provenance)
        return json.dumps(doc, indent=2) + "\n"
    raise ParseError(f"unknown problem format {fmt!r}")


# ---------------------------------------------------------------------------
# Comparison tables
# ---------------------------------------------------------------------------

TableRow = tuple[str, Union[Allocation, Sequence[QuantityLike]]]


def _row_values(row: TableRow, size: int) -> tuple[Fraction, ...]:
    name, payload = row
    values = payload.amounts if isinstance(payload, Allocation) else tuple(
        quantity(v) for v in payload
    )
    if len(values) != size:
        raise MixedNetworks(
            f"column {name!r} has {len(values)} entries for {size} agents"
        )
    return values


def emit_table(
    network: RiverNetwork,
    rows: Sequence[TableRow],
    fmt: str = "text",
    decimals: int = 2,
) -> str:
    """Render named per-agent vectors as a table (agents down, names across).

    Column order follows ``rows``.  Text and CSV render half-up roundings at
    ``decimals`` places plus a totals line; JSON carries both the exact
    values (as fraction strings) and the rounded renderings.
    """
    columns = [(name, _row_values((name, payload), network.size)) for name, payload in rows]
    labels = [network.label_of(i) for i in network.agents]
    if fmt == "json":
        doc = {
            "agents": labels,
            "decimals": decimals,
            "columns": [
                {
                    "name": name,
                    "exact": [str(v) for v in values],
                    "rounded": [format_decimal(v, decimals) for v in values],
                    "total": str(sum(values, Fraction(0))),
                }
                for name, values in columns
            ],
        }
        return json.dumps(doc, indent=2) + "\n"
    header = ["agent"] + [name for name, _ in columns]
    body = []
    for idx, label in enumerate(labels):
        body.append(
            [label] + [format_decimal(values[idx], decimals) for _, values in columns]
        )
    body.append(
        ["total"]
        + [
            format_decimal(sum(values, Fraction(0)), decimals)
            for _, values in columns
        ]
    )
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return out.getvalue()
    if fmt == "text":
        widths = [
            max(len(str(cell)) for cell in col)
            for col in zip(header, *body)
        ]
        lines = []
        for row in [header] + body:
            cells = [
                str(cell).ljust(w) if j == 0 else str(cell).rjust(w)
                for j, (cell, w) in enumerate(zip(row, widths))
            ]
            lines.append("  ".join(cells).rstrip())
        return "\n".join(lines) + "\n"
    raise ParseError(f"unknown table format {fmt!r}")
