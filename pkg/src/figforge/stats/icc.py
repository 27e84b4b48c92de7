"""Intraclass correlation from two-way ANOVA mean squares."""
from __future__ import annotations

import logging

import numpy as np

from ..errors import DegenerateMatrix

logger = logging.getLogger(__name__)


def compute_icc(matrix) -> float:
    """ICC(2,1): two-way random effects, absolute agreement, single measure.

    ``matrix`` is n subjects x k raters with no missing cells. An all-equal
    matrix has no variance to apportion and returns 1.0 by convention (logged
    as degenerate).
    """
    data = np.asarray(matrix, dtype=np.float64)
    if data.ndim != 2:
        raise DegenerateMatrix("ICC needs a 2-D subjects x raters matrix")
    n, k = data.shape
    if n < 2 or k < 2:
        raise DegenerateMatrix(f"ICC needs >=2 subjects and >=2 raters, got {n}x{k}")

    grand = data.mean()
    row_means = data.mean(axis=1)
    col_means = data.mean(axis=0)

    ms_rows = k * np.sum((row_means - grand) ** 2) / (n - 1)
    ms_cols = n * np.sum((col_means - grand) ** 2) / (k - 1)
    residual = data - row_means[:, None] - col_means[None, :] + grand
    ms_error = np.sum(residual ** 2) / ((n - 1) * (k - 1))

    denominator = ms_rows + (k - 1) * ms_error + (k / n) * (ms_cols - ms_error)
    if denominator == 0.0:
        logger.warning("ICC over a zero-variance matrix; returning 1.0 by convention")
        return 1.0
    return float((ms_rows - ms_error) / denominator)
