"""Empirical Lipschitz estimation, the growth-with-n experiment, and the
coordinatewise extension baseline.

The growth experiment builds operators on synthetic instances whose anchor
map is rescaled to Lipschitz constant 1, so the certificate's dependence on
the anchor count is visible directly: the reference level grows like
sqrt(log n) and the certified bound should track it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, DomainError, ZeroDistanceDistinctValuesError
from .gauss import _mix64_int
from .jl_ext import AnchorSet, build, certificate, evaluate, make_anchor_set
from .metric import (
    QuerySet,
    anchor_distance_matrix,
    euclidean_metric,
    euclidean_queries,
)
from .scalar_ext import batch_min, make_extension

# All pairs are used up to this many evaluated points; beyond it a seeded
# sample of pairs is taken (the empirical value is a lower bound on the true
# constant either way).
EXACT_PAIR_LIMIT = 2048
SAMPLED_PAIRS = 2_000_000

# Synthetic instances: anchors live in a unit cube of this dimension, with
# values from a random linear map plus noise of this relative size.
_AMBIENT_DIM = 4
_NOISE_SCALE = 0.25


@dataclass(frozen=True)
class GrowthRow:
    n: int
    p: int
    m: int
    seed: int
    rms_sample_lip: float
    s_min: float
    bound: float
    theory_reference: float
    empirical_lip: float
    bound_over_sqrt_log_n: float
    runtime_s: float


@dataclass(frozen=True)
class GrowthReport:
    rows: tuple[GrowthRow, ...]


def empirical_lip(f_values, pair_dists=None, coords=None, seed: int = 0) -> float:
    """Largest observed ratio ||F(x) - F(y)|| / d(x, y) over point pairs.

    Distances come from ``pair_dists`` (a q x q matrix) or from ``coords``
    (rows are Euclidean points).  Pairs at distance zero with equal values
    are skipped; distance zero with distinct values is an error.  Above
    EXACT_PAIR_LIMIT points, a seeded sample of pairs is used.
    """
    f = np.asarray(f_values, dtype=np.float64)
    if f.ndim != 2:
        raise DimensionMismatchError(f"f_values must be 2-D, got shape {f.shape}")
    q = f.shape[0]
    if q < 2:
        return 0.0
    if pair_dists is None and coords is None:
        raise DomainError("need pair_dists or coords to measure distances")
    if pair_dists is not None:
        pair_dists = np.asarray(pair_dists, dtype=np.float64)
        if pair_dists.shape != (q, q):
            raise DimensionMismatchError(
                f"pair_dists must be {q}x{q}, got {pair_dists.shape}"
            )
    else:
        coords = np.asarray(coords, dtype=np.float64)
        if coords.shape[0] != q:
            raise DimensionMismatchError(
                f"coords has {coords.shape[0]} rows, f_values has {q}"
            )

    if q <= EXACT_PAIR_LIMIT:
        i, j = np.triu_indices(q, k=1)
    else:
        rng = np.random.default_rng(_mix64_int(seed ^ 0x70AB5D))
        i = rng.integers(0, q, size=SAMPLED_PAIRS)
        j = rng.integers(0, q, size=SAMPLED_PAIRS)
        keep = i != j
        i, j = i[keep], j[keep]

    if pair_dists is not None:
        d = pair_dists[i, j]
    else:
        d = np.linalg.norm(coords[i] - coords[j], axis=1)
    num = np.linalg.norm(f[i] - f[j], axis=1)
    zero = d == 0.0
    if zero.any():
        if np.any(num[zero] > 0.0):
            k = int(np.argmax(num[zero] > 0.0))
            bad = np.nonzero(zero)[0][k]
            raise ZeroDistanceDistinctValuesError(
                f"points {i[bad]} and {j[bad]} are at distance 0 "
                f"but their values differ"
            )
        keep = ~zero
        if not keep.any():
            return 0.0
        num, d = num[keep], d[keep]
    return float(np.max(num / d))


def coordwise_baseline(anchors: AnchorSet, qs: QuerySet):
    """Coordinatewise scalar extension with its own certified bound.

    Each value coordinate is extended independently with its exact scalar
    Lipschitz constant L_i; the map as a whole is then Lipschitz with
    constant at most sqrt(sum L_i^2), which is returned as the bound.
    """
    values = anchors.values
    n, p = values.shape
    dmat = anchor_distance_matrix(qs, anchors.metric)
    out = np.empty((dmat.shape[0], p), dtype=np.float64)
    lips = np.empty(p, dtype=np.float64)
    for c in range(p):
        ext = make_extension(values[:, c], anchors.metric)
        lips[c] = ext.lip
        out[:, c] = batch_min(ext.values, ext.lip, dmat)
    return out, float(np.sqrt(np.sum(lips * lips)))


def _resolve_rule(rule, n: int) -> int:
    """Rules are ints, callables of n, or strings like "8" / "64n"."""
    if callable(rule):
        return int(rule(n))
    if isinstance(rule, (int, np.integer)):
        return int(rule)
    s = str(rule).strip().lower().replace(" ", "").replace("*", "")
    try:
        if s.endswith("n"):
            coeff = s[:-1]
            return (int(coeff) if coeff else 1) * n
        return int(s)
    except ValueError:
        raise DomainError(f"cannot parse rule {rule!r}") from None


def _instance_seed(seed: int, n: int) -> int:
    return _mix64_int(_mix64_int(seed) ^ n)


def make_growth_instance(seed: int, n: int, p: int) -> AnchorSet:
    """Synthetic anchor set with Lipschitz constant rescaled to exactly 1.

    Anchors are uniform in the unit cube; values come from a random linear
    map plus Gaussian noise, then get divided by their own Lipschitz
    constant.
    """
    if n < 2:
        raise DomainError(f"growth instances need n >= 2, got {n}")
    rng = np.random.default_rng(_instance_seed(seed, n))
    coords = rng.uniform(size=(n, _AMBIENT_DIM))
    lin = rng.standard_normal((_AMBIENT_DIM, p))
    values = coords @ lin + _NOISE_SCALE * rng.standard_normal((n, p))
    metric = euclidean_metric(coords)
    lip = make_anchor_set(metric, values).lip_f
    if lip == 0.0:
        raise DomainError("degenerate instance: constant values")
    return make_anchor_set(metric, values / lip)


def _growth_queries(anchors: AnchorSet, seed: int, n: int, query_count: int) -> QuerySet:
    # Anchors are included among the queries, so the empirical constant is
    # bounded below by the constant of the anchor map itself.
    rng = np.random.default_rng(_mix64_int(_instance_seed(seed, n) ^ 0x51))
    extra = rng.uniform(size=(query_count, _AMBIENT_DIM))
    return euclidean_queries(np.vstack([anchors.metric.coords, extra]))


def growth_experiment(n_list, p_rule=8, m_rule="64n", seeds=(42,),
                      query_count: int = 64) -> GrowthReport:
    """Build, certify, and empirically probe operators across anchor counts.

    One row per (n, seed): the certificate fields, the empirical Lipschitz
    constant over the evaluated queries (anchors plus ``query_count`` random
    cube points), bound / sqrt(ln n) for reading off the growth constant,
    and the wall-clock build+evaluate time.
    """
    rows = []
    for n in n_list:
        p = _resolve_rule(p_rule, n)
        m = _resolve_rule(m_rule, n)
        for seed in seeds:
            t0 = time.perf_counter()
            anchors = make_growth_instance(seed, n, p)
            op = build(anchors, seed=seed, m=m)
            cert = certificate(op)
            qs = _growth_queries(anchors, seed, n, query_count)
            f_out = evaluate(op, anchors, qs)
            emp = empirical_lip(f_out, coords=qs.coords,
                                seed=_instance_seed(seed, n))
            elapsed = time.perf_counter() - t0
            rows.append(GrowthRow(
                n=n, p=p, m=m, seed=seed,
                rms_sample_lip=cert.rms_sample_lip,
                s_min=cert.s_min,
                bound=cert.bound,
                theory_reference=cert.theory_reference,
                empirical_lip=emp,
                bound_over_sqrt_log_n=cert.bound / math.sqrt(math.log(n)),
                runtime_s=elapsed,
            ))
    return GrowthReport(rows=tuple(rows))
