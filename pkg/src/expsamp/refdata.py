"""Bundled reference error tables for the golden-file verification flow.

The CSV files under ``data/`` hold the published absolute-error tables for
the two shipped kernel pairs, both operators and both test signals, on the
grid n in {17, 26, 35, 53} and w in {0.8, 1.5, 2.0, 2.5}.  They ship with
the package so ``expsamp verify`` works offline.

Three reference cells are themselves non-monotone in n (the max-min h2
column at w = 1.5 for the bspline:2/jackson pair, and both operators at
w = 2.5 for the bspline:3/fejer pair); those positions are flag-only in
every comparison.
"""

from __future__ import annotations

from importlib import resources

from .harness import TableRow, read_table_csv

__all__ = ["TABLE_IDS", "TABLE_INFO", "reference_path", "load_reference"]

TABLE_IDS = ("table2", "table3", "table4", "table5")

TABLE_INFO = {
    "table2": {"function": "h1", "phi": "bspline:2", "psi": "jackson:1.05:1"},
    "table3": {"function": "h2", "phi": "bspline:2", "psi": "jackson:1.05:1"},
    "table4": {"function": "h1", "phi": "bspline:3", "psi": "fejer:pi:0"},
    "table5": {"function": "h2", "phi": "bspline:3", "psi": "fejer:pi:0"},
}

REFERENCE_N_VALUES = (17, 26, 35, 53)
REFERENCE_POINTS = (0.8, 1.5, 2.0, 2.5)


def reference_path(table_id: str, operator: str):
    """Filesystem path of a bundled reference table."""
    if table_id not in TABLE_IDS:
        raise KeyError(f"unknown table id {table_id!r}; expected one of {TABLE_IDS}")
    if operator not in ("max_product", "max_min"):
        raise KeyError(f"unknown operator {operator!r}")
    res = resources.files("expsamp").joinpath("data", f"{table_id}_{operator}.csv")
    return res


def load_reference(table_id: str, operator: str) -> list[TableRow]:
    with resources.as_file(reference_path(table_id, operator)) as path:
        return read_table_csv(path)
