"""Mixed-typed table with an explicit missingness mask.

A :class:`MixedTable` holds quantitative columns as float64 arrays and
categorical columns as integer level indices, together with an n x p
boolean mask marking missing cells.  Tables are immutable after
construction; every transformation builds a new table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DataError, MissingValueError

__all__ = [
    "ColumnKind",
    "ColumnSpec",
    "MixedTable",
    "split_by_kind",
    "missing_counts",
    "column_order_by_missingness",
]


class ColumnKind(Enum):
    QUANTITATIVE = "quantitative"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class ColumnSpec:
    """Name, kind and (for categorical columns) the ordered level labels.

    Level order is first-appearance order at ingestion time and is part
    of the column identity: categorical cells are stored as indices into
    ``levels``.
    """

    name: str
    kind: ColumnKind
    levels: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.kind is ColumnKind.QUANTITATIVE:
            if self.levels:
                raise DataError(f"quantitative column {self.name!r} must not declare levels")
        else:
            if not self.levels:
                raise DataError(f"categorical column {self.name!r} needs at least one level")
            if len(set(self.levels)) != len(self.levels):
                raise DataError(f"categorical column {self.name!r} has duplicate levels")

    @property
    def is_quantitative(self) -> bool:
        return self.kind is ColumnKind.QUANTITATIVE


class MixedTable:
    """Immutable n x p table of typed columns plus a missingness mask.

    Quantitative columns are float64, categorical columns are int64
    indices into their spec's levels.  Cells flagged missing hold a
    canonical placeholder (0.0 / index 0) in storage and are rejected by
    :meth:`cell`; use :attr:`mask` to test for missingness.
    """

    def __init__(
        self,
        specs: Sequence[ColumnSpec],
        columns: Sequence[np.ndarray | Sequence],
        mask: np.ndarray | None = None,
    ) -> None:
        self._specs = tuple(specs)
        p = len(self._specs)
        if len(columns) != p:
            raise DataError(f"expected {p} columns, got {len(columns)}")

        converted: list[np.ndarray] = []
        n_rows = None
        for spec, col in zip(self._specs, columns):
            dtype = np.float64 if spec.is_quantitative else np.int64
            arr = np.array(col, dtype=dtype, copy=True)
            if arr.ndim != 1:
                raise DataError(f"column {spec.name!r} is not 1-dimensional")
            if n_rows is None:
                n_rows = arr.shape[0]
            elif arr.shape[0] != n_rows:
                raise DataError(
                    f"column {spec.name!r} has {arr.shape[0]} rows, expected {n_rows}"
                )
            converted.append(arr)
        if n_rows is None:
            # Zero-column table: take the row count from the mask, if any.
            n_rows = mask.shape[0] if isinstance(mask, np.ndarray) and mask.ndim == 2 else 0
        self._n_rows = int(n_rows)

        if mask is None:
            mask = np.zeros((self._n_rows, p), dtype=bool)
        else:
            mask = np.array(mask, dtype=bool, copy=True)
            if mask.shape != (self._n_rows, p):
                raise DataError(
                    f"mask shape {mask.shape} does not match table shape {(self._n_rows, p)}"
                )

        for j, (spec, arr) in enumerate(zip(self._specs, converted)):
            observed = ~mask[:, j]
            if spec.is_quantitative:
                if not np.all(np.isfinite(arr[observed])):
                    raise DataError(f"column {spec.name!r} holds non-finite values")
                arr[~observed] = 0.0
            else:
                vals = arr[observed]
                if vals.size and (vals.min() < 0 or vals.max() >= len(spec.levels)):
                    raise DataError(f"column {spec.name!r} holds out-of-range level indices")
                arr[~observed] = 0
            arr.flags.writeable = False

        mask.flags.writeable = False
        self._columns = converted
        self._mask = mask

    @property
    def n_rows(self) -> int:
        return self._n_rows

    @property
    def n_cols(self) -> int:
        return len(self._specs)

    @property
    def specs(self) -> tuple[ColumnSpec, ...]:
        return self._specs

    @property
    def mask(self) -> np.ndarray:
        """Read-only n x p boolean missingness indicator."""
        return self._mask

    def column_data(self, j: int) -> np.ndarray:
        """Raw storage of column ``j`` (read-only).

        Masked positions hold a placeholder, not a value; consult
        :attr:`mask` before trusting an entry.
        """
        return self._columns[j]

    def is_missing(self, i: int, j: int) -> bool:
        return bool(self._mask[i, j])

    def cell(self, i: int, j: int) -> float | str:
        """Value at (i, j): a float, or the level label for categorical columns.

        Raises :class:`MissingValueError` for masked cells.
        """
        if self._mask[i, j]:
            raise MissingValueError(f"cell ({i}, {j}) is missing")
        spec = self._specs[j]
        if spec.is_quantitative:
            return float(self._columns[j][i])
        return spec.levels[int(self._columns[j][i])]

    def has_missing(self) -> bool:
        return bool(self._mask.any())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MixedTable):
            return NotImplemented
        return (
            self._specs == other._specs
            and np.array_equal(self._mask, other._mask)
            and all(np.array_equal(a, b) for a, b in zip(self._columns, other._columns))
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"MixedTable({self._n_rows}x{self.n_cols}, missing={int(self._mask.sum())})"


def split_by_kind(
    table: MixedTable,
) -> tuple[MixedTable, MixedTable, list[int], list[int]]:
    """Partition into (quantitative, categorical) sub-tables.

    The returned index lists map each sub-table column back to its
    position in the original table; masks are carried over.
    """
    quant_idx = [j for j, s in enumerate(table.specs) if s.is_quantitative]
    qual_idx = [j for j, s in enumerate(table.specs) if not s.is_quantitative]
    quant = MixedTable(
        [table.specs[j] for j in quant_idx],
        [table.column_data(j) for j in quant_idx],
        table.mask[:, quant_idx] if quant_idx else np.zeros((table.n_rows, 0), dtype=bool),
    )
    qual = MixedTable(
        [table.specs[j] for j in qual_idx],
        [table.column_data(j) for j in qual_idx],
        table.mask[:, qual_idx] if qual_idx else np.zeros((table.n_rows, 0), dtype=bool),
    )
    return quant, qual, quant_idx, qual_idx


def missing_counts(table: MixedTable) -> np.ndarray:
    """Number of masked cells per column."""
    return table.mask.sum(axis=0).astype(np.int64)


def column_order_by_missingness(table: MixedTable) -> list[int]:
    """Column indices sorted by increasing missing count, ties by index."""
    counts = missing_counts(table)
    return [int(j) for j in np.argsort(counts, kind="stable")]
