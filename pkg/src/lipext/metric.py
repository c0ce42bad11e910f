"""Finite metric spaces, query sets, and the distance oracles over them.

The anchor set lives in a validated ``FiniteMetric``; query points of the
surrounding space arrive either as Euclidean coordinates or as explicit
distance tables (``QuerySet``).  Explicit query distances are only checked
for nonnegativity/symmetry of the provided blocks: verifying that they are
realizable by some superspace metric is the caller's responsibility (an
optional strict check against the anchor metric is available via
``check_query_consistency``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AsymmetryError,
    DimensionMismatchError,
    DuplicatePointsError,
    MissingCoordinatesError,
    NegativeDistanceError,
    NonFiniteDistanceError,
    NonzeroDiagonalError,
    TriangleViolationError,
)

# Triangle checking is O(n^3); above this size it is skipped unless forced.
TRIANGLE_CHECK_MAX_N = 512
# Default triangle tolerance is this factor times the largest distance.
TRIANGLE_TOL_FACTOR = 1e-9


@dataclass(frozen=True)
class FiniteMetric:
    """A validated n-point metric space given by its distance matrix.

    ``coords`` is set when the space was built from Euclidean points; it is
    what allows euclidean-mode queries to measure distances to the anchors.
    Instances are immutable (arrays are marked read-only) and safe to share
    across threads.
    """

    dist: np.ndarray
    coords: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.dist.shape[0]


@dataclass(frozen=True)
class QuerySet:
    """Query points, either as coordinates or explicit distance tables.

    mode "euclidean": ``coords`` is a q x d matrix; anchor distances are
    computed against anchor coordinates.  mode "explicit": ``anchor_dists``
    is a q x n matrix of distances to the anchors, and ``pair_dists`` (q x q,
    optional) carries query-query distances for Lipschitz estimation.
    """

    mode: str
    coords: np.ndarray | None = None
    anchor_dists: np.ndarray | None = None
    pair_dists: np.ndarray | None = None

    @property
    def q(self) -> int:
        if self.mode == "euclidean":
            return self.coords.shape[0]
        return self.anchor_dists.shape[0]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


def _as_matrix(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatchError(f"{name} must be a 2-D array, got ndim={a.ndim}")
    return a


def euclidean_distance_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise Euclidean distances between rows of ``a`` and rows of ``b``.

    All distance computations in the package route through this single
    formula so that euclidean-mode oracles agree bit for bit with explicit
    tables generated from the same coordinates.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError(
            f"ambient dimensions differ: {a.shape[1]} vs {b.shape[1]}"
        )
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _first_triangle_violation(d: np.ndarray, tol: float):
    # Scan intermediate points in index order so the reported triple is the
    # first violation in (j, i, k) lexicographic order.
    n = d.shape[0]
    for j in range(n):
        rhs = d[:, j][:, None] + d[j, :][None, :]
        bad = d > rhs + tol
        if bad.any():
            i, k = np.unravel_index(int(np.argmax(bad)), bad.shape)
            return int(i), j, int(k), float(d[i, k] - rhs[i, k])
    return None


def validate_metric(dist, check_triangle: bool | None = None,
                    tol: float | None = None,
                    coords: np.ndarray | None = None) -> FiniteMetric:
    """Validate a distance matrix and wrap it as a FiniteMetric.

    Raises the error for the first violated axiom: shape, finiteness,
    nonnegativity, zero diagonal, exact symmetry, distinctness (no zero
    off-diagonal entries), and optionally the triangle inequality.

    check_triangle=None enables the O(n^3) triangle scan for n <= 512 and
    skips it above; pass True/False to force.  tol=None uses
    1e-9 * max(dist), absorbing rounding in coordinate-derived distances.
    """
    d = _as_matrix(dist, "dist")
    n, m = d.shape
    if n != m:
        raise DimensionMismatchError(f"dist must be square, got {n}x{m}")
    if n == 0:
        raise DimensionMismatchError("dist must have at least one point")

    bad = ~np.isfinite(d)
    if bad.any():
        i, j = np.unravel_index(int(np.argmax(bad)), d.shape)
        raise NonFiniteDistanceError(f"dist[{i}][{j}] = {d[i, j]} is not finite")
    neg = d < 0
    if neg.any():
        i, j = np.unravel_index(int(np.argmax(neg)), d.shape)
        raise NegativeDistanceError(f"dist[{i}][{j}] = {d[i, j]} is negative")
    diag = np.diagonal(d)
    if np.any(diag != 0.0):
        i = int(np.argmax(diag != 0.0))
        raise NonzeroDiagonalError(f"dist[{i}][{i}] = {diag[i]} != 0")
    asym = d != d.T
    if asym.any():
        i, j = np.unravel_index(int(np.argmax(asym)), d.shape)
        raise AsymmetryError(f"dist[{i}][{j}] = {d[i, j]} != dist[{j}][{i}] = {d[j, i]}")
    off_zero = (d == 0.0) & ~np.eye(n, dtype=bool)
    if off_zero.any():
        i, j = np.unravel_index(int(np.argmax(off_zero)), d.shape)
        raise DuplicatePointsError(f"points {i} and {j} are at distance 0")

    if check_triangle is None:
        check_triangle = n <= TRIANGLE_CHECK_MAX_N
    if check_triangle and n >= 3:
        if tol is None:
            tol = TRIANGLE_TOL_FACTOR * float(d.max())
        hit = _first_triangle_violation(d, tol)
        if hit is not None:
            i, j, k, excess = hit
            raise TriangleViolationError(i, j, k, excess)

    if coords is not None:
        coords = _freeze(_as_matrix(coords, "coords"))
        if coords.shape[0] != n:
            raise DimensionMismatchError(
                f"coords has {coords.shape[0]} rows, dist has {n}"
            )
    return FiniteMetric(dist=_freeze(d), coords=coords)


def euclidean_metric(coords) -> FiniteMetric:
    """Metric space of the rows of ``coords`` under the Euclidean distance.

    The coordinates are kept on the result so euclidean-mode queries can
    measure distances to the anchors.
    """
    c = _as_matrix(coords, "coords")
    if c.shape[0] < 1:
        raise DimensionMismatchError("need at least one point")
    if not np.all(np.isfinite(c)):
        raise NonFiniteDistanceError("coordinates must be finite")
    d = euclidean_distance_matrix(c, c)
    # Distances from coordinates are symmetric with zero diagonal by
    # construction; only distinctness can fail.
    off_zero = (d == 0.0) & ~np.eye(c.shape[0], dtype=bool)
    if off_zero.any():
        i, j = np.unravel_index(int(np.argmax(off_zero)), d.shape)
        raise DuplicatePointsError(f"rows {i} and {j} coincide")
    return FiniteMetric(dist=_freeze(d), coords=_freeze(c))


def euclidean_queries(coords) -> QuerySet:
    c = _as_matrix(coords, "coords")
    if not np.all(np.isfinite(c)):
        raise NonFiniteDistanceError("query coordinates must be finite")
    return QuerySet(mode="euclidean", coords=_freeze(c))


def explicit_queries(anchor_dists, pair_dists=None) -> QuerySet:
    ad = _as_matrix(anchor_dists, "anchor_dists")
    if not np.all(np.isfinite(ad)):
        raise NonFiniteDistanceError("anchor_dists entries must be finite")
    if np.any(ad < 0):
        i, j = np.unravel_index(int(np.argmax(ad < 0)), ad.shape)
        raise NegativeDistanceError(f"anchor_dists[{i}][{j}] = {ad[i, j]} is negative")
    pd = None
    if pair_dists is not None:
        pd = _as_matrix(pair_dists, "pair_dists")
        if pd.shape[0] != pd.shape[1] or pd.shape[0] != ad.shape[0]:
            raise DimensionMismatchError(
                f"pair_dists must be {ad.shape[0]}x{ad.shape[0]}, got {pd.shape}"
            )
        if not np.all(np.isfinite(pd)):
            raise NonFiniteDistanceError("pair_dists entries must be finite")
        if np.any(pd < 0):
            raise NegativeDistanceError("pair_dists entries must be nonnegative")
        if np.any(np.diagonal(pd) != 0.0):
            raise NonzeroDiagonalError("pair_dists diagonal must be zero")
        if np.any(pd != pd.T):
            i, j = np.unravel_index(int(np.argmax(pd != pd.T)), pd.shape)
            raise AsymmetryError(
                f"pair_dists[{i}][{j}] = {pd[i, j]} != pair_dists[{j}][{i}]"
            )
        pd = _freeze(pd)
    return QuerySet(mode="explicit", anchor_dists=_freeze(ad), pair_dists=pd)


def anchor_distance_matrix(qs: QuerySet, anchors: FiniteMetric) -> np.ndarray:
    """q x n matrix of query-to-anchor distances, whatever the query mode."""
    if qs.mode == "explicit":
        if qs.anchor_dists.shape[1] != anchors.n:
            raise DimensionMismatchError(
                f"anchor_dists has {qs.anchor_dists.shape[1]} columns, "
                f"metric has {anchors.n} points"
            )
        return qs.anchor_dists
    if anchors.coords is None:
        raise MissingCoordinatesError(
            "euclidean-mode queries need anchor coordinates"
        )
    return euclidean_distance_matrix(qs.coords, anchors.coords)


def query_anchor_distance(qs: QuerySet, anchors: FiniteMetric,
                          query_index: int, anchor_index: int) -> float:
    """Distance from one query point to one anchor."""
    if not 0 <= query_index < qs.q:
        raise IndexError(f"query_index {query_index} out of range [0, {qs.q})")
    if not 0 <= anchor_index < anchors.n:
        raise IndexError(f"anchor_index {anchor_index} out of range [0, {anchors.n})")
    if qs.mode == "explicit":
        return float(qs.anchor_dists[query_index, anchor_index])
    if anchors.coords is None:
        raise MissingCoordinatesError(
            "euclidean-mode queries need anchor coordinates"
        )
    row = euclidean_distance_matrix(
        qs.coords[query_index : query_index + 1],
        anchors.coords[anchor_index : anchor_index + 1],
    )
    return float(row[0, 0])


def query_pair_distances(qs: QuerySet) -> np.ndarray | None:
    """q x q query-to-query distances, or None when the mode cannot supply them."""
    if qs.mode == "euclidean":
        return euclidean_distance_matrix(qs.coords, qs.coords)
    return qs.pair_dists


def check_query_consistency(qs: QuerySet, anchors: FiniteMetric,
                            tol: float | None = None) -> None:
    """Optional strict check of explicit query distances against the anchors.

    Verifies the triangle inequalities linking each query x to every anchor
    pair (s, t):  d(s,t) <= d(x,s) + d(x,t)  and  |d(x,s) - d(x,t)| <= d(s,t).
    Off by default because realizability of explicit tables is not required
    of callers.  No-op for euclidean queries.
    """
    if qs.mode != "explicit":
        return
    ad = qs.anchor_dists
    if ad.shape[1] != anchors.n:
        raise DimensionMismatchError(
            f"anchor_dists has {ad.shape[1]} columns, metric has {anchors.n} points"
        )
    if tol is None:
        hi = max(float(anchors.dist.max()), float(ad.max()) if ad.size else 0.0)
        tol = TRIANGLE_TOL_FACTOR * hi
    d = anchors.dist
    for x in range(ad.shape[0]):
        row = ad[x]
        spread = np.abs(row[:, None] - row[None, :])
        if np.any(spread > d + tol):
            s, t = np.unravel_index(int(np.argmax(spread - d)), d.shape)
            raise TriangleViolationError(s, x, t, float(spread[s, t] - d[s, t]))
        total = row[:, None] + row[None, :]
        if np.any(d > total + tol):
            s, t = np.unravel_index(int(np.argmax(d - total)), d.shape)
            raise TriangleViolationError(s, x, t, float(d[s, t] - total[s, t]))
