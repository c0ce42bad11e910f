"""Exact scalar Lipschitz machinery: constants over finite sets and the
min/max extension formulas.

The extension of an L-Lipschitz scalar function q on the anchors T to a
query point x is  Q(x) = min_t q(t) + L d(x,t);  the companion max form
Qmax(x) = max_t q(t) - L d(x,t) brackets every valid extension from below.
Both agree with q on the anchors whenever L dominates the true Lipschitz
constant of q.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, DomainError, NonFiniteError, NonFiniteDistanceError
from .metric import FiniteMetric, QuerySet, anchor_distance_matrix


@dataclass(frozen=True)
class ScalarExtension:
    """Anchor values, a dominating Lipschitz constant, and the anchor metric."""

    values: np.ndarray
    lip: float
    metric: FiniteMetric


def lip_const(values, metric: FiniteMetric) -> float:
    """Exact Lipschitz constant of scalar anchor values over the metric.

    Maximum of |values[i] - values[j]| / dist[i][j] over all pairs; 0 for a
    single point.  Computed over every pair, never sampled: downstream
    certificates rely on this being a true bound.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != metric.n:
        raise DimensionMismatchError(
            f"values must be a vector of length {metric.n}, got shape {v.shape}"
        )
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("anchor values must be finite")
    if metric.n < 2:
        return 0.0
    i, j = np.triu_indices(metric.n, k=1)
    return float(np.max(np.abs(v[i] - v[j]) / metric.dist[i, j]))


def make_extension(values, metric: FiniteMetric, lip: float | None = None) -> ScalarExtension:
    """Build a ScalarExtension; ``lip`` defaults to the exact constant.

    A supplied ``lip`` below the true constant is rejected: the extension
    formulas only reproduce the anchor values when L dominates it.
    """
    v = np.asarray(values, dtype=np.float64)
    base = lip_const(v, metric)
    if lip is None:
        lip = base
    else:
        lip = float(lip)
        if not np.isfinite(lip):
            raise NonFiniteError(f"lip = {lip} must be finite")
        if lip < base:
            raise DomainError(
                f"lip = {lip:g} is below the true Lipschitz constant {base:g}"
            )
    v = np.ascontiguousarray(v)
    v.flags.writeable = False
    return ScalarExtension(values=v, lip=lip, metric=metric)


def _checked_dists(ext: ScalarExtension, query_dists) -> np.ndarray:
    d = np.asarray(query_dists, dtype=np.float64)
    if d.shape != (ext.values.shape[0],):
        raise DimensionMismatchError(
            f"need {ext.values.shape[0]} anchor distances, got shape {d.shape}"
        )
    if not np.all(np.isfinite(d)):
        raise NonFiniteDistanceError("query-anchor distances must be finite")
    return d


def mcshane_min(ext: ScalarExtension, query_dists) -> float:
    """min over anchors t of  q(t) + L d(x,t)  for one query.

    ``query_dists`` holds the distances from the query to every anchor.  A
    query at distance exactly 0 from some anchor returns that anchor's value
    directly: that is the exact-arithmetic minimum, and short-circuiting
    keeps the extension property exact in floating point.
    """
    d = _checked_dists(ext, query_dists)
    at_anchor = d == 0.0
    if at_anchor.any():
        return float(np.min(ext.values[at_anchor]))
    return float(np.min(ext.values + ext.lip * d))


def mcshane_max(ext: ScalarExtension, query_dists) -> float:
    """max over anchors t of  q(t) - L d(x,t); the dual companion form."""
    d = _checked_dists(ext, query_dists)
    at_anchor = d == 0.0
    if at_anchor.any():
        return float(np.max(ext.values[at_anchor]))
    return float(np.max(ext.values - ext.lip * d))


def batch_min(values: np.ndarray, lip: float, dmat: np.ndarray) -> np.ndarray:
    """min-formula extension for every row of a query-anchor distance matrix.

    Rows that touch an anchor go through the same zero-distance short
    circuit as the scalar path, so the two agree bit for bit.
    """
    if dmat.shape[0] == 0:
        return np.empty(0, dtype=np.float64)
    if not np.all(np.isfinite(dmat)):
        raise NonFiniteDistanceError("query-anchor distances must be finite")
    out = np.min(values[None, :] + lip * dmat, axis=1)
    hits = dmat == 0.0
    for r in np.nonzero(hits.any(axis=1))[0]:
        out[r] = np.min(values[hits[r]])
    return out


def extend_batch(ext: ScalarExtension, qs: QuerySet) -> np.ndarray:
    """Vectorized mcshane_min over a whole QuerySet.

    Elementwise identical to looping mcshane_min over the rows of the
    query-anchor distance matrix.
    """
    dmat = anchor_distance_matrix(qs, ext.metric)
    return batch_min(ext.values, ext.lip, dmat)
