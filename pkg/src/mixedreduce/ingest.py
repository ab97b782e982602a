"""CSV ingestion for mixed tables, plus seeded MCAR amputation.

The on-disk format is RFC-4180 style CSV.  Cells matching one of the
configured NA tokens are read as missing.  A schema sidecar file
(`name,kind[,level1,...]` per line, kind in {quant, cat}) can pin column
types; otherwise a column is quantitative iff every non-NA cell parses
as a finite number.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .table import ColumnKind, ColumnSpec, MixedTable

__all__ = [
    "CsvOptions",
    "AmputationConfig",
    "infer_schema",
    "read_csv",
    "write_csv",
    "read_schema",
    "write_schema",
    "ampute_mcar",
]


@dataclass(frozen=True)
class CsvOptions:
    delimiter: str = ","
    na_tokens: tuple[str, ...] = ("NA", "")
    has_header: bool = True

    def __post_init__(self) -> None:
        if not self.na_tokens:
            raise DataError("na_tokens must not be empty")
        if len(self.delimiter) != 1 or self.delimiter == '"':
            raise DataError("delimiter must be a single non-quote character")


@dataclass(frozen=True)
class AmputationConfig:
    rate: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.rate < 1.0:
            raise DataError(f"amputation rate must be in [0, 1), got {self.rate}")


def _parse_number(text: str) -> float | None:
    """Parse a finite decimal number, or None if the text is not one."""
    stripped = text.strip()
    if not stripped or "_" in stripped:
        return None
    try:
        value = float(stripped)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def infer_schema(
    raw_rows: list[list[str]],
    options: CsvOptions = CsvOptions(),
    names: list[str] | None = None,
) -> list[ColumnSpec]:
    """Infer per-column specs from parsed text cells.

    A column is quantitative iff every non-NA cell parses as a finite
    number; otherwise it is categorical with levels in first-appearance
    order.  A column with no observed cells is unusable.
    """
    if not raw_rows:
        return []
    p = len(raw_rows[0])
    for lineno, row in enumerate(raw_rows):
        if len(row) != p:
            raise DataError(f"ragged row: line {lineno + 1} has {len(row)} cells, expected {p}")
    if names is None:
        names = [f"c{j}" for j in range(p)]
    na = set(options.na_tokens)

    specs: list[ColumnSpec] = []
    for j in range(p):
        cells = [row[j] for row in raw_rows if row[j] not in na]
        if not cells:
            raise DataError(f"column {names[j]!r} has no observed values")
        if all(_parse_number(c) is not None for c in cells):
            specs.append(ColumnSpec(names[j], ColumnKind.QUANTITATIVE))
        else:
            levels: list[str] = []
            seen = set()
            for c in cells:
                if c not in seen:
                    seen.add(c)
                    levels.append(c)
            specs.append(ColumnSpec(names[j], ColumnKind.CATEGORICAL, tuple(levels)))
    return specs


def read_csv(
    path,
    options: CsvOptions = CsvOptions(),
    schema: list[ColumnSpec] | None = None,
) -> MixedTable:
    """Read a CSV file into a :class:`MixedTable`.

    An explicit schema overrides inference; values outside a categorical
    schema's levels and non-finite numeric literals are errors.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=options.delimiter)
        rows = list(reader)

    names: list[str] | None = None
    if options.has_header:
        if not rows:
            raise DataError(f"{path}: empty file, expected a header row")
        names = rows[0]
        rows = rows[1:]

    if rows:
        p = len(rows[0])
        for lineno, row in enumerate(rows):
            if len(row) != p:
                offset = 2 if options.has_header else 1
                raise DataError(
                    f"{path}: ragged row at line {lineno + offset} "
                    f"({len(row)} cells, expected {p})"
                )
    elif schema is not None:
        p = len(schema)
    elif names is not None:
        p = len(names)
    else:
        p = 0

    if names is not None and len(names) != p:
        raise DataError(f"{path}: header has {len(names)} names for {p} columns")

    if schema is None:
        specs = infer_schema(rows, options, names)
    else:
        specs = list(schema)
        if len(specs) != p:
            raise DataError(f"{path}: schema has {len(specs)} columns, file has {p}")

    na = set(options.na_tokens)
    n = len(rows)
    mask = np.zeros((n, p), dtype=bool)
    columns: list[np.ndarray] = []
    for j, spec in enumerate(specs):
        if spec.is_quantitative:
            col = np.zeros(n, dtype=np.float64)
            for i, row in enumerate(rows):
                cell = row[j]
                if cell in na:
                    mask[i, j] = True
                    continue
                value = _parse_number(cell)
                if value is None:
                    raise DataError(
                        f"{path}: column {spec.name!r} row {i}: "
                        f"{cell!r} is not a finite number"
                    )
                col[i] = value
        else:
            index = {label: k for k, label in enumerate(spec.levels)}
            col = np.zeros(n, dtype=np.int64)
            for i, row in enumerate(rows):
                cell = row[j]
                if cell in na:
                    mask[i, j] = True
                    continue
                try:
                    col[i] = index[cell]
                except KeyError:
                    raise DataError(
                        f"{path}: column {spec.name!r} row {i}: "
                        f"{cell!r} is not one of the declared levels"
                    ) from None
        if n and mask[:, j].all():
            raise DataError(f"{path}: column {spec.name!r} is entirely missing")
        columns.append(col)

    return MixedTable(specs, columns, mask)


def write_csv(table: MixedTable, path, options: CsvOptions = CsvOptions()) -> None:
    """Write a table as CSV; masked cells become the first NA token.

    Quantitative cells use the shortest round-trip decimal rendering, so
    reading the file back with the same schema reproduces the table
    exactly.  A non-missing cell that would collide with an NA token is
    rejected, as it could not round-trip.
    """
    na0 = options.na_tokens[0]
    na = set(options.na_tokens)
    mask = table.mask
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=options.delimiter)
        if options.has_header:
            writer.writerow([s.name for s in table.specs])
        for i in range(table.n_rows):
            out: list[str] = []
            for j, spec in enumerate(table.specs):
                if mask[i, j]:
                    out.append(na0)
                    continue
                if spec.is_quantitative:
                    text = repr(float(table.column_data(j)[i]))
                else:
                    text = spec.levels[int(table.column_data(j)[i])]
                if text in na:
                    raise DataError(
                        f"column {spec.name!r} row {i}: value {text!r} "
                        f"collides with an NA token and cannot round-trip"
                    )
                out.append(text)
            writer.writerow(out)


_KIND_TAGS = {ColumnKind.QUANTITATIVE: "quant", ColumnKind.CATEGORICAL: "cat"}
_TAG_KINDS = {v: k for k, v in _KIND_TAGS.items()}


def write_schema(specs: list[ColumnSpec] | tuple[ColumnSpec, ...], path) -> None:
    """Write a schema sidecar: one `name,kind[,levels...]` line per column."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for spec in specs:
            writer.writerow([spec.name, _KIND_TAGS[spec.kind], *spec.levels])


def read_schema(path) -> list[ColumnSpec]:
    """Read a schema sidecar written by :func:`write_schema`."""
    specs: list[ColumnSpec] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            if len(row) < 2 or row[1] not in _TAG_KINDS:
                raise DataError(f"{path}: line {lineno + 1}: expected `name,kind[,levels...]`")
            kind = _TAG_KINDS[row[1]]
            specs.append(ColumnSpec(row[0], kind, tuple(row[2:])))
    return specs


def ampute_mcar(
    table: MixedTable, config: AmputationConfig
) -> tuple[MixedTable, np.ndarray]:
    """Mask round(rate * n * p) observed cells completely at random.

    Cells are drawn uniformly without replacement by a seeded PRNG
    (numpy PCG64); a draw that would leave a column with no observed
    cell is rejected and redrawn.  Returns the amputed table and the
    mask of newly introduced holes.
    """
    n, p = table.n_rows, table.n_cols
    introduced = np.zeros((n, p), dtype=bool)
    target = int(math.floor(config.rate * n * p + 0.5))
    if target == 0:
        return table, introduced

    rng = np.random.default_rng(config.seed)
    observed_flat = np.flatnonzero(~table.mask.reshape(-1))
    if target > observed_flat.size:
        raise DataError(
            f"cannot introduce {target} holes: only {observed_flat.size} observed cells"
        )
    order = rng.permutation(observed_flat)

    remaining = (~table.mask).sum(axis=0).astype(np.int64)
    chosen = order[:target]
    counts = np.bincount(chosen % p, minlength=p)
    if np.all(remaining - counts >= 1):
        # Fast path: the first `target` draws leave every column observable,
        # identical to the sequential accept/reject scan below.
        introduced.reshape(-1)[chosen] = True
    else:
        accepted = 0
        flat = introduced.reshape(-1)
        for pos in order:
            col = int(pos) % p
            if remaining[col] < 2:
                continue
            flat[pos] = True
            remaining[col] -= 1
            accepted += 1
            if accepted == target:
                break
        if accepted < target:
            raise DataError(
                f"amputation rate {config.rate} would leave a column fully missing"
            )

    amputed = MixedTable(
        table.specs,
        [table.column_data(j) for j in range(p)],
        table.mask | introduced,
    )
    return amputed, introduced
