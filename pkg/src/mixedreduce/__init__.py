"""Dimensionality reduction for mixed tables with forest-based imputation.

The pipeline: impute missing cells with iterative random forests,
z-score the quantitative columns, expand categorical columns to weighted
indicators, run PCA, and keep the smallest set of components reaching a
cumulative-variance threshold.
"""

__version__ = "0.1.0"

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
from .errors import DataError, MissingValueError, MixedReduceError
from .forest import ForestModel, ForestParams, fit_forest, oob_error, predict
from .impute import (
    DeltaPair,
    ImputationResult,
    ImputeParams,
    StoppedBy,
    delta_categorical,
    delta_continuous,
    initial_guess,
    missforest_impute,
    nrmse,
    pfc,
)
from .ingest import (
    AmputationConfig,
    CsvOptions,
    ampute_mcar,
    infer_schema,
    read_csv,
    read_schema,
    write_csv,
    write_schema,
)
from .pca import (
    PcaModel,
    ReductionReport,
    encode_table,
    fit_pca,
    proportion_variance,
    reduce,
    select_components,
    transform,
)
from .plots import DensityCurve, kde, render_density, render_stripplot
from .table import (
    ColumnKind,
    ColumnSpec,
    MixedTable,
    column_order_by_missingness,
    missing_counts,
    split_by_kind,
)

__all__ = [
    "__version__",
    "AmputationConfig",
    "ColumnKind",
    "ColumnProvenance",
    "ColumnSpec",
    "CsvOptions",
    "DataError",
    "DeltaPair",
    "DensityCurve",
    "EncodedMatrix",
    "ForestModel",
    "ForestParams",
    "ImputationResult",
    "ImputeParams",
    "MissingValueError",
    "MixedReduceError",
    "MixedTable",
    "PcaModel",
    "ReductionReport",
    "StoppedBy",
    "WeightingScheme",
    "ampute_mcar",
    "column_order_by_missingness",
    "combine_columns",
    "delta_categorical",
    "delta_continuous",
    "disjunctive",
    "encode_table",
    "fit_forest",
    "fit_pca",
    "infer_schema",
    "initial_guess",
    "kde",
    "missforest_impute",
    "missing_counts",
    "nrmse",
    "oob_error",
    "pfc",
    "predict",
    "proportion_variance",
    "read_csv",
    "read_schema",
    "reduce",
    "render_density",
    "render_stripplot",
    "round3",
    "select_components",
    "split_by_kind",
    "standardize",
    "transform",
    "weight_indicators",
    "write_csv",
    "write_schema",
]
