"""Numeric encoding of a mixed table ahead of PCA.

Quantitative columns are z-scored; categorical columns expand to a
complete disjunctive (one indicator column per level) block whose
columns can be scaled by the inverse square root of the level frequency
so both variable kinds contribute comparably to the decomposition.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DataError
from .table import MixedTable

__all__ = [
    "WeightingScheme",
    "ColumnProvenance",
    "EncodedMatrix",
    "standardize",
    "disjunctive",
    "weight_indicators",
    "combine_columns",
    "round3",
]


class WeightingScheme(Enum):
    FAMD = "famd"
    NONE = "none"


@dataclass(frozen=True)
class ColumnProvenance:
    """Where an encoded column came from.

    ``category`` is None for standardized quantitative columns;
    ``frequency`` is the level's share of rows for indicator columns.
    """

    source: str
    category: str | None = None
    weight: float = 1.0
    frequency: float | None = None


@dataclass
class EncodedMatrix:
    """Dense numeric matrix with per-column provenance.

    ``center`` and ``scale`` record the means/standard deviations used
    for the quantitative block (empty when there is none).
    """

    values: np.ndarray
    provenance: list[ColumnProvenance]
    center: np.ndarray
    scale: np.ndarray

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise ValueError("values must be 2-D")
        if self.values.shape[1] != len(self.provenance):
            raise ValueError(
                f"{len(self.provenance)} provenance entries for "
                f"{self.values.shape[1]} columns"
            )

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]


def standardize(
    quant: np.ndarray, names: Sequence[str] | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Z-score each column: subtract the mean, divide by the sample
    standard deviation (n-1 denominator).  Constant columns are errors."""
    quant = np.asarray(quant, dtype=np.float64)
    if quant.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    n = quant.shape[0]
    if n < 2:
        raise DataError("standardization needs at least 2 rows")
    center = quant.mean(axis=0)
    scale = quant.std(axis=0, ddof=1)
    flat = np.flatnonzero(scale == 0.0)
    if flat.size:
        j = int(flat[0])
        name = names[j] if names is not None else f"column {j}"
        raise DataError(f"{name} is constant; cannot standardize")
    return (quant - center) / scale, center, scale


def disjunctive(qual: MixedTable) -> tuple[np.ndarray, list[ColumnProvenance]]:
    """Complete disjunctive coding: one 0/1 column per level, exactly one
    1 per row per source variable."""
    if qual.has_missing():
        raise DataError("disjunctive coding requires a table without missing cells")
    n = qual.n_rows
    blocks: list[np.ndarray] = []
    provenance: list[ColumnProvenance] = []
    for j, spec in enumerate(qual.specs):
        if spec.is_quantitative:
            raise DataError(f"column {spec.name!r} is quantitative")
        k = len(spec.levels)
        block = np.zeros((n, k), dtype=np.float64)
        codes = qual.column_data(j)
        block[np.arange(n), codes] = 1.0
        blocks.append(block)
        counts = np.bincount(codes, minlength=k)
        for lvl, label in enumerate(spec.levels):
            provenance.append(
                ColumnProvenance(spec.name, label, 1.0, counts[lvl] / n if n else 0.0)
            )
    if not blocks:
        return np.zeros((n, 0), dtype=np.float64), []
    return np.concatenate(blocks, axis=1), provenance


def weight_indicators(
    indicators: np.ndarray,
    provenance: list[ColumnProvenance],
    scheme: WeightingScheme = WeightingScheme.FAMD,
) -> tuple[np.ndarray, list[ColumnProvenance]]:
    """Scale indicator columns by 1/sqrt(level frequency).

    Columns for levels never observed (frequency 0) are dropped with a
    warning.  ``WeightingScheme.NONE`` returns the input unchanged.
    """
    indicators = np.asarray(indicators, dtype=np.float64)
    if indicators.shape[1] != len(provenance):
        raise ValueError("provenance does not match the indicator matrix")
    if scheme is WeightingScheme.NONE:
        return indicators.copy(), list(provenance)

    n = indicators.shape[0]
    keep: list[int] = []
    weighted_cols: list[np.ndarray] = []
    out_prov: list[ColumnProvenance] = []
    for j, prov in enumerate(provenance):
        count = int(round(indicators[:, j].sum()))
        if count == 0:
            warnings.warn(
                f"dropping indicator {prov.source!r}={prov.category!r}: level never observed"
            )
            continue
        # sqrt(n/count) == 1/sqrt(frequency), in the rounding-friendly order
        weight = float(np.sqrt(n / count))
        keep.append(j)
        weighted_cols.append(indicators[:, j] * weight)
        out_prov.append(
            ColumnProvenance(prov.source, prov.category, weight, count / n)
        )
    if not keep:
        return np.zeros((n, 0), dtype=np.float64), []
    return np.column_stack(weighted_cols), out_prov


def combine_columns(a: EncodedMatrix, b: EncodedMatrix) -> EncodedMatrix:
    """Concatenate two encoded blocks column-wise, A first."""
    if a.n_rows != b.n_rows:
        raise DataError(f"row-count mismatch: {a.n_rows} vs {b.n_rows}")
    values = np.concatenate([a.values, b.values], axis=1)
    return EncodedMatrix(
        values,
        list(a.provenance) + list(b.provenance),
        np.concatenate([a.center, b.center]),
        np.concatenate([a.scale, b.scale]),
    )


def round3(matrix: np.ndarray) -> np.ndarray:
    """Round every entry to 3 decimal places, halves away from zero."""
    matrix = np.asarray(matrix, dtype=np.float64)
    return np.copysign(np.floor(np.abs(matrix) * 1000.0 + 0.5), matrix) / 1000.0
