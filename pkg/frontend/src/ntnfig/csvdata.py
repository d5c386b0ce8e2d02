"""Reader for the annotated CSV dialect the simulator writes.

Files start with ``# key = value`` metadata lines, then a header row, then
comma-separated data.  Cells stay strings here; ``numbers`` converts on
demand so a column of labels never trips a float parse.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class MissingColumnError(KeyError):
    """A referenced column is not in the file header."""

    def __str__(self) -> str:  # KeyError quotes its args otherwise
        return self.args[0]


class EmptyDataError(ValueError):
    """The file holds no data rows."""


@dataclass(frozen=True)
class DataTable:
    source: Path
    metadata: dict[str, str]
    columns: tuple[str, ...]
    cells: tuple[tuple[str, ...], ...]

    def __len__(self) -> int:
        return len(self.cells)

    def _index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise MissingColumnError(
                f"column '{name}' not in {self.source.name} "
                f"(columns: {', '.join(self.columns)})"
            ) from None

    def column(self, name: str) -> list[str]:
        i = self._index(name)
        return [row[i] for row in self.cells]

    def numbers(self, name: str) -> np.ndarray:
        i = self._index(name)
        try:
            return np.array([float(row[i]) for row in self.cells])
        except ValueError as exc:
            raise ValueError(f"column '{name}' in {self.source.name} is not numeric: {exc}") from None

    def groups(self, names: tuple[str, ...]) -> dict[tuple[str, ...], "DataTable"]:
        """Split rows by the value tuple of the named columns, insertion order."""
        idx = [self._index(n) for n in names]
        out: dict[tuple[str, ...], list[tuple[str, ...]]] = {}
        for row in self.cells:
            out.setdefault(tuple(row[i] for i in idx), []).append(row)
        return {
            key: DataTable(self.source, self.metadata, self.columns, tuple(rows))
            for key, rows in out.items()
        }


def read_table(path: str | Path) -> DataTable:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from None

    metadata: dict[str, str] = {}
    body: list[str] = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep:
                metadata[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)

    if not body:
        raise EmptyDataError(f"{path.name} has no header row")
    rows = list(csv.reader(body))
    columns = tuple(c.strip() for c in rows[0])
    cells = tuple(tuple(r) for r in rows[1:])
    if not cells:
        raise EmptyDataError(f"{path.name} has no data rows")
    for r in cells:
        if len(r) != len(columns):
            raise ValueError(f"{path.name}: row width {len(r)} != header width {len(columns)}")
    return DataTable(path, metadata, columns, cells)
