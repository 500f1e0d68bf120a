"""Attention index construction from per-topic search-volume series.

The conflict and general indices are built the same way: prune topics that
are negatively correlated with the rest, average the survivors per day and
apply a log transform.  The abnormal-search transform is kept as an
optional alternative but is not used by the main pipeline.
"""

from __future__ import annotations

import logging

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DataError, InsufficientDataError

logger = logging.getLogger(__name__)

DEFAULT_ZERO_OFFSET = 1.0
DEFAULT_ASVI_WINDOW_DAYS = 60


def prune_topics(panel: pd.DataFrame) -> tuple[pd.DataFrame, list[str]]:
    """Iteratively drop topics negatively correlated with the rest.

    At each step the correlation of every topic with the equal-weight mean
    of the *other* topics is computed; the most negative one is removed
    (ties broken by lowest topic id) until none is negative or a single
    topic remains.  Zero-variance topics are removed first since their
    correlation is undefined.

    Returns the surviving panel and the removal log in removal order.
    """
    if panel.shape[1] == 1:
        return panel.copy(), []
    if len(panel) < 3:
        raise InsufficientDataError("pruning needs at least 3 observations")

    removed: list[str] = []
    keep = panel.copy()
    flat = [t for t in keep.columns if keep[t].std() == 0]
    for topic in sorted(flat):
        if keep.shape[1] == 1:
            break
        logger.warning("pruning zero-variance topic %r", topic)
        keep = keep.drop(columns=topic)
        removed.append(topic)

    while keep.shape[1] > 1:
        corrs = {}
        for topic in keep.columns:
            rest = keep.drop(columns=topic).mean(axis=1)
            if rest.std() == 0:
                corrs[topic] = 0.0
            else:
                corrs[topic] = keep[topic].corr(rest)
        worst = min(corrs.values())
        if worst >= 0:
            break
        victim = min(t for t, c in corrs.items() if c == worst)
        keep = keep.drop(columns=victim)
        removed.append(victim)
    if removed:
        logger.info("pruned topics: %s", ", ".join(removed))
    return keep, removed


def build_index(panel: pd.DataFrame, zero_offset: float = DEFAULT_ZERO_OFFSET) -> pd.Series:
    """Average topics per day and log-transform: ln(offset + mean SVI)."""
    if zero_offset < 0:
        raise ValueError("zero_offset must be nonnegative")
    mean = panel.mean(axis=1)
    arg = zero_offset + mean
    if (arg <= 0).any():
        day = arg.index[arg <= 0][0]
        raise DataError(f"log argument nonpositive on {day.date()}; raise zero_offset")
    return pd.Series(np.log(arg.to_numpy()), index=panel.index)


def asvi(
    svi: pd.Series,
    window_days: int = DEFAULT_ASVI_WINDOW_DAYS,
    zero_offset: float = DEFAULT_ZERO_OFFSET,
) -> pd.Series:
    """Abnormal search volume: log deviation from the trailing median.

    value_t = ln(offset + SVI_t) - ln(offset + median of the preceding
    window_days values).  The first window_days points have no complete
    baseline and are dropped.
    """
    if window_days < 1:
        raise ValueError("window_days must be >= 1")
    if len(svi) <= window_days:
        logger.warning("series shorter than ASVI window; returning empty series")
        return svi.iloc[:0].copy()
    baseline = svi.shift(1).rolling(window_days).median()
    out = np.log(zero_offset + svi) - np.log(zero_offset + baseline)
    return out.iloc[window_days:]


class AttentionIndexBuilder(BaseEstimator, TransformerMixin):
    """Estimator wrapper: learn the pruned topic set, then build the index.

    fit() runs topic pruning on a date x topic SVI frame; transform()
    averages the surviving topics and applies the log transform.  Useful
    when the pruning decision from one sample must be replayed on another
    (e.g. locally scoped attention data).
    """

    def __init__(self, zero_offset: float = DEFAULT_ZERO_OFFSET, prune: bool = True):
        self.zero_offset = zero_offset
        self.prune = prune

    def fit(self, X: pd.DataFrame, y=None):
        if self.prune:
            kept, removed = prune_topics(X)
            self.topics_ = list(kept.columns)
            self.removed_topics_ = removed
        else:
            self.topics_ = list(X.columns)
            self.removed_topics_ = []
        return self

    def transform(self, X: pd.DataFrame) -> pd.Series:
        missing = [t for t in self.topics_ if t not in X.columns]
        if missing:
            raise DataError(f"missing topics in transform input: {missing}")
        return build_index(X[self.topics_], zero_offset=self.zero_offset)
