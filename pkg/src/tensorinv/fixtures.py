"""Reference tables shipped as data, and their recomputation.

Every expected value carries a ``source`` label naming the table cell it was
read from.  Cells whose computation needs partitions larger than the budget
are reported as "not reproduced" rather than checked.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .errors import DomainError, Inconclusive
from .kronecker import DEFAULT_MAX_PARTITION_SIZE, CoefficientCache, delta_degree, g_rect

NOT_REPRODUCED = "not reproduced"


@dataclass(frozen=True)
class FixtureCell:
    args: dict
    expected: int
    source: str


@dataclass(frozen=True)
class FixtureTable:
    name: str
    title: str
    quantity: str
    cells: tuple[FixtureCell, ...]

    def __post_init__(self) -> None:
        for c in self.cells:
            if not c.source:
                raise DomainError(f"fixture {self.name}: a cell has no source label")


def _load() -> dict[str, FixtureTable]:
    raw = json.loads(resources.files("tensorinv").joinpath("data/fixtures.json").read_text())
    out = {}
    for f in raw["fixtures"]:
        cells = tuple(FixtureCell(dict(c["args"]), int(c["expected"]), c["source"]) for c in f["cells"])
        out[f["name"]] = FixtureTable(f["name"], f["title"], f["quantity"], cells)
    return out


_TABLES: dict[str, FixtureTable] | None = None


def fixtures() -> dict[str, FixtureTable]:
    global _TABLES
    if _TABLES is None:
        _TABLES = _load()
    return _TABLES


def get_fixture(name: str) -> FixtureTable:
    try:
        return fixtures()[name]
    except KeyError:
        raise DomainError(f"unknown fixture '{name}'; available: {', '.join(sorted(fixtures()))}") from None


def _needed_size(table: FixtureTable, cell: FixtureCell) -> int:
    a = cell.args
    if table.quantity == "delta_over_n":
        return a["n"] * cell.expected
    return a["n"] * a["k"]


def _compute(table: FixtureTable, cell: FixtureCell, max_size: int, cache: CoefficientCache | None) -> int:
    a = cell.args
    if table.quantity == "delta_over_n":
        return delta_degree(a["d"], a["n"], max_size=max_size, cache=cache) // a["n"]
    if table.quantity == "g_rect":
        return g_rect(a["d"], a["n"], a["k"], max_size=max_size, cache=cache)
    raise DomainError(f"fixture {table.name}: unknown quantity '{table.quantity}'")


def reproduce_fixture(name: str, *, max_size: int = DEFAULT_MAX_PARTITION_SIZE,
                      cache: CoefficientCache | None = None) -> list[dict]:
    """Recompute every in-budget cell of a fixture; one report row per cell."""
    table = get_fixture(name)
    report = []
    for cell in table.cells:
        row = {"args": cell.args, "expected": cell.expected, "source": cell.source}
        if _needed_size(table, cell) > max_size:
            row.update(actual=None, status=NOT_REPRODUCED)
        else:
            try:
                actual = _compute(table, cell, max_size, cache)
            except Inconclusive:
                row.update(actual=None, status=NOT_REPRODUCED)
            else:
                row.update(actual=actual, status="pass" if actual == cell.expected else "fail")
        report.append(row)
    return report
