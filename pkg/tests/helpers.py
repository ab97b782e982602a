"""Shared test fixtures: table builders, independent oracles, and the
synthetic mixed benchmark."""

from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np

from mixedreduce import ColumnKind, ColumnSpec, MixedTable

SVG_NS = "{http://www.w3.org/2000/svg}"


def quant_spec(name: str) -> ColumnSpec:
    return ColumnSpec(name, ColumnKind.QUANTITATIVE)


def cat_spec(name: str, levels: tuple[str, ...]) -> ColumnSpec:
    return ColumnSpec(name, ColumnKind.CATEGORICAL, levels)


def make_table(specs, columns, mask=None) -> MixedTable:
    return MixedTable(specs, columns, mask)


# ---------------------------------------------------------------------------
# Independent PCA oracle: sample covariance + cyclic Jacobi eigensolver.
# Deliberately avoids numpy.linalg so the SVD path is checked against
# something that cannot share its implementation.

def sample_covariance(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    centered = matrix - matrix.mean(axis=0)
    return (centered.T @ centered) / (matrix.shape[0] - 1)


def jacobi_eigenvalues(symmetric: np.ndarray, max_sweeps: int = 200) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
    sorted descending."""
    a = np.array(symmetric, dtype=np.float64, copy=True)
    n = a.shape[0]
    if n == 1:
        return a[0].copy()
    scale = max(1.0, float(np.abs(np.diag(a)).max()))
    for _ in range(max_sweeps):
        off = np.abs(a - np.diag(np.diag(a))).max()
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * scale:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                if tau == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))[::-1]


# ---------------------------------------------------------------------------
# Synthetic mixed benchmark: four correlated quantitative columns and two
# categorical columns carved from them with 10% label noise.

def linear_mixed_benchmark(seed: int, n: int = 200) -> MixedTable:
    rng = np.random.default_rng(seed)
    latent = rng.normal(size=n)
    quants = [latent + 0.5 * rng.normal(size=n) for _ in range(4)]

    sign_levels = ("neg", "pos")
    c1 = (quants[0] > 0).astype(np.int64)
    flip = rng.random(n) < 0.1
    c1[flip] = 1 - c1[flip]

    terciles = np.quantile(quants[1], [1 / 3, 2 / 3])
    c2 = np.digitize(quants[1], terciles).astype(np.int64)
    flip = rng.random(n) < 0.1
    shift = rng.integers(1, 3, size=n)
    c2[flip] = (c2[flip] + shift[flip]) % 3

    specs = [
        quant_spec("q1"),
        quant_spec("q2"),
        quant_spec("q3"),
        quant_spec("q4"),
        cat_spec("sign", sign_levels),
        cat_spec("band", ("low", "mid", "high")),
    ]
    return MixedTable(specs, [*quants, c1, c2])


# ---------------------------------------------------------------------------
# Tables whose categorical level counts make the weighted sum-of-squares
# identity exact in float64: every count c satisfies n = c * d^2 for an
# integer d, so each indicator weight sqrt(n/c) = d is exact.

SQUARE_FRIENDLY_N = (16, 36, 64, 100, 144)


def square_ratio_counts(rng: np.random.Generator, n: int) -> list[int]:
    # n is a perfect square, so a count of 1 (d = sqrt(n)) is always
    # available and the partition below terminates.
    parts = sorted({n // (d * d) for d in range(1, int(np.sqrt(n)) + 1) if n % (d * d) == 0})
    counts: list[int] = []
    remaining = n
    while remaining > 0:
        options = [p for p in parts if p <= remaining]
        pick = int(options[rng.integers(0, len(options))])
        counts.append(pick)
        remaining -= pick
    return counts


def random_mixed_table(rng: np.random.Generator) -> MixedTable:
    n = int(SQUARE_FRIENDLY_N[rng.integers(0, len(SQUARE_FRIENDLY_N))])
    specs = []
    columns = []
    for j in range(int(rng.integers(1, 4))):
        specs.append(quant_spec(f"q{j}"))
        columns.append(rng.normal(loc=rng.uniform(-5, 5), scale=rng.uniform(0.5, 3), size=n))
    for j in range(int(rng.integers(1, 4))):
        counts = square_ratio_counts(rng, n)
        codes = np.repeat(np.arange(len(counts)), counts)
        rng.shuffle(codes)
        specs.append(cat_spec(f"c{j}", tuple(f"l{k}" for k in range(len(counts)))))
        columns.append(codes.astype(np.int64))
    return MixedTable(specs, columns)


# ---------------------------------------------------------------------------
# SVG inspection helpers.

def count_glyphs(svg_path, gid: str) -> int:
    root = ET.parse(svg_path).getroot()
    for g in root.iter(f"{SVG_NS}g"):
        if g.get("id") == gid:
            return len(g.findall(f".//{SVG_NS}use"))
    raise AssertionError(f"group {gid!r} not found in {svg_path}")


def svg_group_ids(svg_path) -> set[str]:
    root = ET.parse(svg_path).getroot()
    return {g.get("id") for g in root.iter(f"{SVG_NS}g") if g.get("id")}
