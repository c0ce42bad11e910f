"""Seeded Gaussian sampling, the random embedding matrix, and the
max-of-squared-Gaussians experiments.

Sampling is counter based: every matrix entry is derived from
(seed, stream, row, column-pair) through a SplitMix64 chain feeding the
Box-Muller transform.  Any entry, row, or block can therefore be
regenerated independently of evaluation order, which is what makes the
blocked kernels and threaded experiments bitwise reproducible.

Convention used throughout the package: the embedding matrix G holds raw
standard normals, and the sample-space inner product carries the 1/m
weight,  <a, b>_H = (1/m) sum_j a_j b_j,  so that ||G x||_H ~ ||x||_2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, DomainError

_M64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_ROW_SALT = np.uint64(0xD1342543DE82EF95)
_PAIR_SALT = np.uint64(0x9E3779B97F4A7C15)
_LANE_SALT = np.uint64(0xA0761D6478BD642F)
_INV_2_53 = 2.0 ** -53
_TWO_PI = 2.0 * math.pi

# Streams separate the embedding entries from the experiment draws.
STREAM_EMBED = 0
_STREAM_MC_INDEP = 1
_STREAM_MC_DEP = 2
_STREAM_MC_POINTS = 3
_STREAM_MC_TAIL = 4

# Row-block size (in matrix entries) for the generator's scratch buffers.
_BLOCK_ELEMS = 1 << 18


def _mix64_int(z: int) -> int:
    """SplitMix64 finalizer on plain Python ints (used for scalar keys)."""
    z = (z + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def _mix64_inplace(z: np.ndarray, tmp: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer applied in place to a uint64 array.

    uint64 arithmetic wraps modulo 2^64 by design; numpy array ops do this
    silently (no scratch allocation, no overflow warnings).
    """
    np.add(z, _GOLDEN, out=z)
    np.right_shift(z, 30, out=tmp)
    np.bitwise_xor(z, tmp, out=z)
    np.multiply(z, _MIX1, out=z)
    np.right_shift(z, 27, out=tmp)
    np.bitwise_xor(z, tmp, out=z)
    np.multiply(z, _MIX2, out=z)
    np.right_shift(z, 31, out=tmp)
    np.bitwise_xor(z, tmp, out=z)
    return z


def normal_matrix(seed: int, rows: int, cols: int, stream: int = STREAM_EMBED,
                  row_offset: int = 0) -> np.ndarray:
    """Deterministic rows x cols matrix of i.i.d. standard normals.

    Entry (r, c) is a pure function of (seed, stream, row_offset + r, c // 2):
    column pair 2k, 2k+1 holds the cosine/sine branches of one Box-Muller
    draw.  Blocks generated with a row_offset match the corresponding rows
    of a single large call bit for bit.
    """
    if rows < 0 or cols < 1:
        raise DomainError(f"need rows >= 0 and cols >= 1, got {rows}x{cols}")
    key = _mix64_int(_mix64_int(seed & _M64) ^ (stream & _M64))
    pairs = (cols + 1) // 2
    out = np.empty((rows, cols), dtype=np.float64)
    if rows == 0:
        return out

    pair_salted = np.arange(pairs, dtype=np.uint64)
    np.multiply(pair_salted, _PAIR_SALT, out=pair_salted)

    block = max(1, _BLOCK_ELEMS // pairs)
    state = np.empty((min(block, rows), pairs), dtype=np.uint64)
    tmp = np.empty_like(state)
    fa = np.empty(state.shape, dtype=np.float64)
    fb = np.empty(state.shape, dtype=np.float64)

    n_even = pairs
    n_odd = cols // 2
    for r0 in range(0, rows, block):
        r1 = min(r0 + block, rows)
        k = r1 - r0
        row_key = np.arange(r0 + row_offset, r1 + row_offset, dtype=np.uint64)
        np.multiply(row_key, _ROW_SALT, out=row_key)
        np.bitwise_xor(row_key, np.uint64(key), out=row_key)
        _mix64_inplace(row_key, np.empty_like(row_key))

        st, tm = state[:k], tmp[:k]
        u1, u2 = fa[:k], fb[:k]
        np.bitwise_xor(row_key[:, None], pair_salted[None, :], out=st)
        _mix64_inplace(st, tm)
        # u1 in (0, 1] so the log is finite; u2 in [0, 1).
        np.right_shift(st, 11, out=tm)
        np.add(tm, np.uint64(1), out=tm)
        np.multiply(tm, _INV_2_53, out=u1)
        np.bitwise_xor(st, _LANE_SALT, out=st)
        _mix64_inplace(st, tm)
        np.right_shift(st, 11, out=tm)
        np.multiply(tm, _INV_2_53, out=u2)

        np.log(u1, out=u1)
        np.multiply(u1, -2.0, out=u1)
        np.sqrt(u1, out=u1)            # radius
        np.multiply(u2, _TWO_PI, out=u2)  # angle
        out[r0:r1, 0::2] = u1[:, :n_even] * np.cos(u2[:, :n_even])
        if n_odd:
            out[r0:r1, 1::2] = u1[:, :n_odd] * np.sin(u2[:, :n_odd])
    return out


@dataclass(frozen=True)
class GaussianEmbedding:
    """An m x p matrix of seeded standard normals; row j discretizes one
    sample point of the underlying probability space."""

    seed: int
    m: int
    p: int
    matrix: np.ndarray


def default_sample_count(p: int) -> int:
    """Default number of sample rows for target dimension p."""
    return max(64 * p, 1024)


def sample_embedding(seed: int, m: int, p: int) -> GaussianEmbedding:
    """Draw the m x p embedding matrix for (seed, m, p).

    Rows depend only on (seed, row index), so the first rows of a larger
    draw coincide with a smaller one.
    """
    if m < 1 or p < 1:
        raise DomainError(f"need m >= 1 and p >= 1, got m={m}, p={p}")
    g = normal_matrix(seed, m, p, stream=STREAM_EMBED)
    g.flags.writeable = False
    return GaussianEmbedding(seed=seed, m=m, p=p, matrix=g)


def embed(emb: GaussianEmbedding, x) -> np.ndarray:
    """Apply the embedding to a vector: returns G x (an m-vector)."""
    v = np.asarray(x, dtype=np.float64)
    if v.shape != (emb.p,):
        raise DimensionMismatchError(
            f"expected a vector of length {emb.p}, got shape {v.shape}"
        )
    return emb.matrix @ v


def h_inner(a, b) -> float:
    """Sample-space inner product with the 1/m weight."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatchError(f"shapes {a.shape} and {b.shape} differ")
    return float(a @ b) / a.shape[0]


def h_norm(a) -> float:
    return math.sqrt(h_inner(a, a))


def max_square_bound(m_gaussians: int) -> float:
    """Closed-form bound on E[max of m squared standard Gaussians].

    Valid for any dependence structure; requires m >= 2.
    """
    if m_gaussians < 2:
        raise DomainError(f"bound needs m >= 2, got {m_gaussians}")
    return 2.0 * math.log(m_gaussians) + 4.0


@dataclass(frozen=True)
class MaxSquareReport:
    """Monte Carlo estimate of E[max of m squared Gaussians] vs. the bound."""

    m_gaussians: int
    trials: int
    dependence: str
    estimate: float
    std_error: float
    paper_bound: float


def _difference_directions(seed: int, m_gaussians: int, points) -> np.ndarray:
    """Unit difference vectors of a point set; first m pairs in lex order."""
    if points is None:
        # Smallest point count whose pair count covers m, mirroring the
        # worst-case family of pairwise differences of n points in R^n.
        n_pts = 2
        while n_pts * (n_pts - 1) // 2 < m_gaussians:
            n_pts += 1
        points = normal_matrix(seed, n_pts, n_pts, stream=_STREAM_MC_POINTS)
    else:
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2:
            raise DimensionMismatchError("points must be a 2-D array")
        n_pts = points.shape[0]
        if n_pts * (n_pts - 1) // 2 < m_gaussians:
            raise DomainError(
                f"{n_pts} points give {n_pts * (n_pts - 1) // 2} pairs, "
                f"need {m_gaussians}"
            )
    i, j = np.triu_indices(n_pts, k=1)
    z = points[i[:m_gaussians]] - points[j[:m_gaussians]]
    norms = np.linalg.norm(z, axis=1)
    if np.any(norms == 0.0):
        raise DomainError("point set contains coincident points")
    return z / norms[:, None]


def max_square_mc(seed: int, m_gaussians: int, trials: int,
                  dependence: str = "independent",
                  points=None) -> MaxSquareReport:
    """Monte Carlo estimate of E[max(G_1^2, ..., G_m^2)].

    dependence "independent" draws fresh i.i.d. Gaussians per trial;
    "pair_differences" draws one Gaussian vector g per trial and evaluates
    <z, g> over unit difference vectors z of a point set (generated from the
    seed, or supplied via ``points``), giving standard but stochastically
    dependent Gaussians.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if m_gaussians < 1:
        raise DomainError(f"m_gaussians must be >= 1, got {m_gaussians}")
    if dependence not in ("independent", "pair_differences"):
        raise DomainError(f"unknown dependence mode {dependence!r}")

    maxima = np.empty(trials, dtype=np.float64)
    if dependence == "independent":
        chunk = max(1, (4 << 20) // m_gaussians)
        for t0 in range(0, trials, chunk):
            t1 = min(t0 + chunk, trials)
            z = normal_matrix(seed, t1 - t0, m_gaussians,
                              stream=_STREAM_MC_INDEP, row_offset=t0)
            np.abs(z, out=z)
            peak = z.max(axis=1)
            maxima[t0:t1] = peak * peak
    else:
        dirs = _difference_directions(seed, m_gaussians, points)
        dim = dirs.shape[1]
        chunk = max(1, (4 << 20) // max(m_gaussians, dim))
        dirs_t = np.ascontiguousarray(dirs.T)
        for t0 in range(0, trials, chunk):
            t1 = min(t0 + chunk, trials)
            g = normal_matrix(seed, t1 - t0, dim,
                              stream=_STREAM_MC_DEP, row_offset=t0)
            s = g @ dirs_t
            np.abs(s, out=s)
            peak = s.max(axis=1)
            maxima[t0:t1] = peak * peak

    estimate = float(maxima.mean())
    std_error = float(maxima.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return MaxSquareReport(
        m_gaussians=m_gaussians,
        trials=trials,
        dependence=dependence,
        estimate=estimate,
        std_error=std_error,
        paper_bound=2.0 * math.log(m_gaussians) + 4.0,
    )


@dataclass(frozen=True)
class TailPoint:
    """Empirical upper-tail frequency of a standard Gaussian at threshold t."""

    t: float
    empirical: float
    std_error: float
    bound: float


def tail_prob_check(seed: int, t_grid, trials: int) -> tuple[TailPoint, ...]:
    """Empirical Pr[G >= t] with binomial standard errors vs. exp(-t^2/2)."""
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    grid = np.atleast_1d(np.asarray(t_grid, dtype=np.float64))
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("t_grid must be a nonempty 1-D array")
    if np.any(~np.isfinite(grid)) or np.any(grid < 0):
        raise DomainError("t_grid entries must be finite and nonnegative")

    counts = np.zeros(grid.size, dtype=np.int64)
    chunk = 4 << 20
    for t0 in range(0, trials, chunk):
        t1 = min(t0 + chunk, trials)
        z = normal_matrix(seed, t1 - t0, 1,
                          stream=_STREAM_MC_TAIL, row_offset=t0).ravel()
        for idx, t in enumerate(grid):
            counts[idx] += int(np.count_nonzero(z >= t))

    points = []
    for idx, t in enumerate(grid):
        phat = counts[idx] / trials
        se = math.sqrt(phat * (1.0 - phat) / trials)
        points.append(TailPoint(
            t=float(t), empirical=float(phat), std_error=se,
            bound=math.exp(-0.5 * t * t),
        ))
    return tuple(points)
