"""Principal component analysis and the end-to-end reduction pipeline.

Components come from the singular value decomposition of the
mean-centered matrix (no rescaling here; scaling happens during
encoding).  ``reduce`` chains imputation, encoding, PCA and
minimal-component selection at a cumulative-variance threshold.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .encode import (
    ColumnProvenance,
    EncodedMatrix,
    WeightingScheme,
    combine_columns,
    disjunctive,
    round3,
    standardize,
    weight_indicators,
)
from .errors import DataError
from .impute import ImputationResult, ImputeParams, missforest_impute
from .table import MixedTable, split_by_kind

__all__ = [
    "PcaModel",
    "ReductionReport",
    "fit_pca",
    "proportion_variance",
    "select_components",
    "transform",
    "reduce",
]

# Components with singular values this far below the leading one are
# exact linear dependencies (disjunctive blocks sum to a constant).
_RELATIVE_RANK_TOL = 1e-12


@dataclass
class PcaModel:
    """Loadings, component standard deviations and variance shares.

    ``rotation`` columns are orthonormal loadings (sign fixed so each
    column's largest-magnitude entry is positive); ``sdev`` is
    non-increasing; proportions sum to 1 over the kept components.
    """

    rotation: np.ndarray
    sdev: np.ndarray
    center: np.ndarray
    proportion: np.ndarray
    cumulative: np.ndarray

    @property
    def n_components(self) -> int:
        return self.sdev.shape[0]


@dataclass
class ReductionReport:
    selected_components: int
    threshold: float
    cumulative_at_selected: float
    elapsed_seconds: float
    input_shape: tuple[int, int, int]  # (rows, original columns, encoded columns)
    imputation_summary: dict | None = None


def fit_pca(matrix: np.ndarray) -> PcaModel:
    """PCA of a numeric matrix via SVD of the centered data.

    Keeps at most min(n-1, q) components and truncates those whose
    standard deviation is negligible relative to the first.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    n, q = matrix.shape
    if n < 2 or q < 1:
        raise DataError(f"PCA needs at least 2 rows and 1 column, got {n}x{q}")
    if not np.all(np.isfinite(matrix)):
        raise DataError("PCA input must be finite")

    center = matrix.mean(axis=0)
    _, singular, vt = np.linalg.svd(matrix - center, full_matrices=False)

    r = min(n - 1, q, singular.shape[0])
    singular = singular[:r]
    rotation = vt[:r].T
    if singular.size == 0 or singular[0] == 0.0:
        raise DataError("matrix has no variance; nothing to decompose")
    kept = singular > _RELATIVE_RANK_TOL * singular[0]
    singular = singular[kept]
    rotation = rotation[:, kept]

    # Deterministic sign: largest-magnitude loading of each component positive.
    flip = rotation[np.argmax(np.abs(rotation), axis=0), np.arange(rotation.shape[1])] < 0
    rotation[:, flip] *= -1.0

    sdev = singular / np.sqrt(n - 1)
    model = PcaModel(rotation, sdev, center, np.empty(0), np.empty(0))
    model.proportion, model.cumulative = proportion_variance(model)
    return model


def proportion_variance(model: PcaModel) -> tuple[np.ndarray, np.ndarray]:
    """Variance share of each component and the running cumulative sum."""
    var = model.sdev**2
    proportion = var / var.sum()
    return proportion, np.cumsum(proportion)


def select_components(model: PcaModel, threshold: float = 0.90) -> int:
    """Smallest k whose cumulative variance share reaches the threshold."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    idx = int(np.searchsorted(model.cumulative, threshold, side="left"))
    return min(idx, model.n_components - 1) + 1


def transform(model: PcaModel, matrix: np.ndarray, k: int) -> np.ndarray:
    """Project rows onto the first k components."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if not 1 <= k <= model.n_components:
        raise ValueError(f"k must be in [1, {model.n_components}], got {k}")
    if matrix.ndim != 2 or matrix.shape[1] != model.center.shape[0]:
        raise ValueError(f"matrix must have {model.center.shape[0]} columns")
    return (matrix - model.center) @ model.rotation[:, :k]


def encode_table(
    table: MixedTable, scheme: WeightingScheme = WeightingScheme.FAMD
) -> EncodedMatrix:
    """Encode a fully observed mixed table: z-scores for quantitative
    columns combined with (optionally weighted) disjunctive indicators.

    Constant indicator columns are dropped before PCA with a warning;
    centering would zero them anyway.
    """
    if table.has_missing():
        raise DataError("encoding requires a table without missing cells")
    quant, qual, quant_idx, _ = split_by_kind(table)

    n = table.n_rows
    if quant.n_cols:
        values = np.column_stack([quant.column_data(j) for j in range(quant.n_cols)])
        names = [s.name for s in quant.specs]
        z, center, scale = standardize(values, names)
        prov = [ColumnProvenance(name) for name in names]
        a = EncodedMatrix(z, prov, center, scale)
    else:
        empty = np.zeros(0, dtype=np.float64)
        a = EncodedMatrix(np.zeros((n, 0)), [], empty, empty)

    if qual.n_cols:
        indicators, ind_prov = disjunctive(qual)
        weighted, w_prov = weight_indicators(indicators, ind_prov, scheme)
        keep = []
        for j, p in enumerate(w_prov):
            if 0.0 < p.frequency < 1.0:
                keep.append(j)
            else:
                warnings.warn(
                    f"dropping constant indicator {p.source!r}={p.category!r} before PCA"
                )
        weighted = weighted[:, keep]
        w_prov = [w_prov[j] for j in keep]
        empty = np.zeros(0, dtype=np.float64)
        b = EncodedMatrix(weighted, w_prov, empty, empty)
    else:
        empty = np.zeros(0, dtype=np.float64)
        b = EncodedMatrix(np.zeros((n, 0)), [], empty, empty)

    return combine_columns(a, b)


def reduce(
    table: MixedTable,
    impute_params: ImputeParams | None = None,
    scheme: WeightingScheme = WeightingScheme.FAMD,
    threshold: float = 0.90,
    round_enabled: bool = True,
    threads: int = 1,
) -> tuple[np.ndarray, PcaModel, ReductionReport, ImputationResult]:
    """Full pipeline: impute, encode, decompose, select, project.

    Returns the n x k score matrix, the fitted PCA model, a run report,
    and the imputation result (whose table is the cleaned data).
    """
    started = time.perf_counter()
    if impute_params is None:
        impute_params = ImputeParams()

    imputation = missforest_impute(table, impute_params, threads=threads)
    encoded = encode_table(imputation.imputed, scheme)
    values = round3(encoded.values) if round_enabled else encoded.values

    model = fit_pca(values)
    k = select_components(model, threshold)
    scores = transform(model, values, k)

    report = ReductionReport(
        selected_components=k,
        threshold=threshold,
        cumulative_at_selected=float(model.cumulative[k - 1]),
        elapsed_seconds=time.perf_counter() - started,
        input_shape=(table.n_rows, table.n_cols, encoded.n_cols),
        imputation_summary=imputation.digest(),
    )
    return scores, model, report, imputation
