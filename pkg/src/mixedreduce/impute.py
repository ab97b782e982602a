"""Iterative random-forest imputation for mixed tables.

Starting from a mean/mode guess, columns are revisited in order of
increasing missingness; each column with holes gets a forest fitted on
the rows where it is observed (all other columns as predictors,
categorical ones one-hot encoded) and its holes replaced by the forest's
predictions.  Sweeps repeat until the inter-iteration differences
(squared-change ratio for quantitative cells, disagreement fraction for
categorical cells) increase for the first time, at which point the
previous iterate is returned.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DataError
from .forest import ForestParams, fit_forest, predict
from .table import ColumnSpec, MixedTable, column_order_by_missingness

__all__ = [
    "ImputeParams",
    "StoppedBy",
    "DeltaPair",
    "ImputationResult",
    "initial_guess",
    "delta_continuous",
    "delta_categorical",
    "missforest_impute",
    "nrmse",
    "pfc",
]


@dataclass(frozen=True)
class ImputeParams:
    forest: ForestParams = field(default_factory=ForestParams)
    max_iterations: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


class StoppedBy(Enum):
    DELTA_INCREASE = "delta_increase"
    ITERATION_CAP = "iteration_cap"
    NO_MISSING = "no_missing"


@dataclass(frozen=True)
class DeltaPair:
    """Per-sweep differences; None marks a type with no holes to track."""

    quantitative: float | None
    categorical: float | None


@dataclass
class ImputationResult:
    imputed: MixedTable
    iterations: int
    delta_history: list[DeltaPair]
    stopped_by: StoppedBy

    def digest(self) -> dict:
        return {
            "iterations": self.iterations,
            "stopped_by": self.stopped_by.value,
            "delta_history": [
                {"quantitative": d.quantitative, "categorical": d.categorical}
                for d in self.delta_history
            ],
        }


def initial_guess(table: MixedTable) -> MixedTable:
    """Fill holes with the column mean (quantitative) or mode (categorical,
    ties to the earliest level)."""
    columns = []
    for j, spec in enumerate(table.specs):
        col = table.column_data(j).copy()
        holes = table.mask[:, j]
        observed = ~holes
        if not observed.any():
            raise DataError(f"column {spec.name!r} has no observed values")
        if holes.any():
            if spec.is_quantitative:
                col[holes] = col[observed].mean()
            else:
                counts = np.bincount(col[observed], minlength=len(spec.levels))
                col[holes] = int(np.argmax(counts))
        columns.append(col)
    return MixedTable(table.specs, columns)


def delta_continuous(new: np.ndarray, old: np.ndarray) -> float:
    """Squared-change ratio sum((new - old)^2) / sum(new^2) over all
    quantitative cells."""
    new = np.asarray(new, dtype=np.float64)
    old = np.asarray(old, dtype=np.float64)
    if new.shape != old.shape:
        raise ValueError(f"shape mismatch: {new.shape} vs {old.shape}")
    denom = float(np.sum(new**2))
    if denom == 0.0:
        raise DataError("squared-change ratio undefined: new matrix is all zeros")
    return float(np.sum((new - old) ** 2)) / denom


def delta_categorical(new: np.ndarray, old: np.ndarray, na_count: int) -> float | None:
    """Disagreement count over all categorical cells divided by the
    number of originally missing categorical cells; None when there were
    none."""
    new = np.asarray(new)
    old = np.asarray(old)
    if new.shape != old.shape:
        raise ValueError(f"shape mismatch: {new.shape} vs {old.shape}")
    if na_count == 0:
        return None
    return float(np.sum(new != old)) / na_count


def _fit_seed(base: int, sweep: int, col: int) -> int:
    ss = np.random.SeedSequence([base, sweep, col])
    return int(ss.generate_state(1, np.uint64)[0])


def _encode_predictors(
    work: list[np.ndarray], specs: tuple[ColumnSpec, ...], exclude: int
) -> np.ndarray:
    """One matrix of all columns but `exclude`, categorical ones one-hot."""
    n = work[0].shape[0] if work else 0
    blocks: list[np.ndarray] = []
    for j, spec in enumerate(specs):
        if j == exclude:
            continue
        if spec.is_quantitative:
            blocks.append(work[j].reshape(n, 1))
        else:
            onehot = np.zeros((n, len(spec.levels)), dtype=np.float64)
            onehot[np.arange(n), work[j]] = 1.0
            blocks.append(onehot)
    return np.concatenate(blocks, axis=1)


def missforest_impute(
    table: MixedTable, params: ImputeParams = ImputeParams(), threads: int = 1
) -> ImputationResult:
    """Run the iterative forest-imputation loop on a mixed table.

    Observed cells are never rewritten.  Sweeps stop when every tracked
    difference has increased relative to the previous sweep (returning
    the pre-increase iterate) or at the iteration cap (returning the
    latest iterate).
    """
    if not table.has_missing():
        return ImputationResult(table, 0, [], StoppedBy.NO_MISSING)
    if table.n_cols < 2:
        raise DataError("cannot impute: a column with holes needs at least one other column")

    specs = table.specs
    mask = table.mask
    quant_idx = [j for j, s in enumerate(specs) if s.is_quantitative]
    qual_idx = [j for j, s in enumerate(specs) if not s.is_quantitative]
    track_quant = bool(mask[:, quant_idx].any()) if quant_idx else False
    track_cat = bool(mask[:, qual_idx].any()) if qual_idx else False
    cat_na_count = int(mask[:, qual_idx].sum()) if qual_idx else 0

    guess = initial_guess(table)
    work = [guess.column_data(j).copy() for j in range(table.n_cols)]
    visit = [j for j in column_order_by_missingness(table) if mask[:, j].any()]

    def quant_matrix(cols: list[np.ndarray]) -> np.ndarray:
        return np.column_stack([cols[j] for j in quant_idx])

    def cat_matrix(cols: list[np.ndarray]) -> np.ndarray:
        return np.column_stack([cols[j] for j in qual_idx])

    history: list[DeltaPair] = []
    previous = [c.copy() for c in work]
    for sweep in range(1, params.max_iterations + 1):
        for s in visit:
            holes = mask[:, s]
            obs = ~holes
            predictors = _encode_predictors(work, specs, s)
            forest_params = dataclasses.replace(
                params.forest, seed=_fit_seed(params.seed, sweep, s)
            )
            model = fit_forest(predictors[obs], work[s][obs], forest_params, threads=threads)
            work[s][holes] = predict(model, predictors[holes])

        delta_q = (
            delta_continuous(quant_matrix(work), quant_matrix(previous))
            if track_quant
            else None
        )
        delta_c = (
            delta_categorical(cat_matrix(work), cat_matrix(previous), cat_na_count)
            if track_cat
            else None
        )
        history.append(DeltaPair(delta_q, delta_c))

        if len(history) >= 2:
            cur, prev = history[-1], history[-2]
            increased = True
            if track_quant and not (cur.quantitative > prev.quantitative):
                increased = False
            if track_cat and not (cur.categorical > prev.categorical):
                increased = False
            if increased:
                imputed = MixedTable(specs, previous)
                return ImputationResult(imputed, sweep, history, StoppedBy.DELTA_INCREASE)

        previous = [c.copy() for c in work]

    imputed = MixedTable(specs, work)
    return ImputationResult(imputed, params.max_iterations, history, StoppedBy.ITERATION_CAP)


def _check_aligned(truth: MixedTable, imputed: MixedTable, holes: np.ndarray) -> np.ndarray:
    if truth.n_rows != imputed.n_rows or truth.n_cols != imputed.n_cols:
        raise DataError("truth and imputed tables have different shapes")
    for a, b in zip(truth.specs, imputed.specs):
        if a.kind is not b.kind:
            raise DataError(f"column {a.name!r}: kind differs between truth and imputed")
    holes = np.asarray(holes, dtype=bool)
    if holes.shape != (truth.n_rows, truth.n_cols):
        raise DataError(f"holes mask shape {holes.shape} does not match the tables")
    return holes


def nrmse(truth: MixedTable, imputed: MixedTable, holes: np.ndarray) -> float:
    """Normalized RMSE of imputed quantitative cells at hole positions:
    sqrt(mean squared error / population variance of the true values)."""
    holes = _check_aligned(truth, imputed, holes)
    t_parts, v_parts = [], []
    for j, spec in enumerate(truth.specs):
        if not spec.is_quantitative:
            continue
        rows = holes[:, j]
        if rows.any():
            t_parts.append(truth.column_data(j)[rows])
            v_parts.append(imputed.column_data(j)[rows])
    if not t_parts:
        raise DataError("no quantitative holes to evaluate")
    t = np.concatenate(t_parts)
    v = np.concatenate(v_parts)
    if t.size < 2:
        raise DataError("need at least 2 evaluated quantitative cells")
    variance = float(np.var(t))
    if variance == 0.0:
        raise DataError("true values at the holes have zero variance")
    return float(np.sqrt(np.mean((t - v) ** 2) / variance))


def pfc(truth: MixedTable, imputed: MixedTable, holes: np.ndarray) -> float | None:
    """Fraction of categorical holes imputed with the wrong level;
    None when there are no categorical holes."""
    holes = _check_aligned(truth, imputed, holes)
    wrong = 0
    total = 0
    for j, spec in enumerate(truth.specs):
        if spec.is_quantitative:
            continue
        rows = np.flatnonzero(holes[:, j])
        total += rows.size
        t_levels = spec.levels
        v_levels = imputed.specs[j].levels
        for i in rows:
            t_label = t_levels[int(truth.column_data(j)[i])]
            v_label = v_levels[int(imputed.column_data(j)[i])]
            if t_label != v_label:
                wrong += 1
    if total == 0:
        return None
    return wrong / total
