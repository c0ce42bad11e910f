"""The randomized Lipschitz extension operator.

Construction: embed the anchor values through a seeded Gaussian matrix G
(m x p), giving per-sample scalar functions on the anchors; each sample row
is extended to queries by the scalar min-formula with its own exact
Lipschitz constant; the extended sample vector is then projected back to
R^p by least squares against G.

The certificate  bound = B / s_min  (B the RMS of the per-sample Lipschitz
constants, s_min the smallest singular value of G / sqrt(m)) is a true
Lipschitz bound for the discretized operator: the scalar extensions move at
most lambda_omega * d per sample, the RMS of those rates is B in the
weighted sample norm, and the least-squares map back to R^p expands that
norm by at most 1 / s_min.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, solve_triangular

from ._util import map_blocks
from .errors import (
    DimensionMismatchError,
    DomainError,
    NonFiniteDistanceError,
    NonFiniteError,
    ParseError,
    RankDeficientError,
    SchemaError,
    SolverFailureError,
)
from .gauss import GaussianEmbedding, default_sample_count, sample_embedding
from .metric import FiniteMetric, QuerySet, anchor_distance_matrix, explicit_queries

# Numerical rank cutoff, relative to the largest singular value of G.
RANK_TOL = 1e-10
# Default block sizes for the pair kernel (rows) and its sample axis
# (columns); peak scratch is pair_block x sample_block floats per worker.
DEFAULT_PAIR_BLOCK = 4096
DEFAULT_SAMPLE_BLOCK = 4096
# Queries per least-squares batch.  Fixed so results cannot depend on the
# worker count.
_QUERY_CHUNK = 64

_MAGIC = b"LIPEXTOP"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class AnchorSet:
    """The anchors: a validated metric, the map values (row t = f(t)), and
    the exact vector Lipschitz constant of the map."""

    metric: FiniteMetric
    values: np.ndarray
    lip_f: float


@dataclass(frozen=True)
class JLOperator:
    """Prebuilt extension state.

    anchor_images[w, t] is the w-th sample's scalar value at anchor t;
    sample_lips[w] is that sample's exact Lipschitz constant over the
    anchors; q_factor/r_factor hold the thin QR of the embedding matrix for
    stable least-squares solves; s_min is the smallest singular value of
    G / sqrt(m).
    """

    emb: GaussianEmbedding
    values: np.ndarray
    anchor_images: np.ndarray
    sample_lips: np.ndarray
    s_min: float
    q_factor: np.ndarray
    r_factor: np.ndarray
    pair_block: int
    sample_block: int

    @property
    def n(self) -> int:
        return self.anchor_images.shape[1]


@dataclass(frozen=True)
class LipCertificate:
    """Certified Lipschitz bound for the discretized operator.

    bound = rms_sample_lip / s_min.  theory_reference is the closed-form
    value sqrt(2 ln(n(n-1)) + 4) that bounds the expectation of
    rms_sample_lip when the anchor map is 1-Lipschitz; it is a reference
    level, not a certificate.
    """

    rms_sample_lip: float
    s_min: float
    bound: float
    theory_reference: float


def vector_lip(values, metric: FiniteMetric) -> float:
    """Exact Lipschitz constant of a vector-valued map on the anchors."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] != metric.n:
        raise DimensionMismatchError(
            f"values must be {metric.n} x p, got shape {v.shape}"
        )
    if metric.n < 2:
        return 0.0
    i, j = np.triu_indices(metric.n, k=1)
    diff = v[i] - v[j]
    return float(np.max(np.linalg.norm(diff, axis=1) / metric.dist[i, j]))


def make_anchor_set(metric: FiniteMetric, values) -> AnchorSet:
    v = np.ascontiguousarray(values, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] != metric.n or v.shape[1] < 1:
        raise DimensionMismatchError(
            f"values must be {metric.n} x p with p >= 1, got shape {v.shape}"
        )
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("anchor values must be finite")
    lip_f = vector_lip(v, metric)
    v.flags.writeable = False
    return AnchorSet(metric=metric, values=v, lip_f=lip_f)


def _sample_lips(g: np.ndarray, values: np.ndarray, dist: np.ndarray,
                 pair_block: int, sample_block: int) -> np.ndarray:
    """Exact per-sample Lipschitz constants over all anchor pairs.

    Evaluates |(f(s) - f(t)) . g_w| / d(s, t) as a blocked
    (pairs x p) @ (p x m) product with a running maximum over pair blocks.
    Sample blocks are independent, so threading over them cannot change the
    result; the pair-block maximum is exact and order independent.
    """
    m = g.shape[0]
    n = values.shape[0]
    if n < 2:
        return np.zeros(m, dtype=np.float64)
    i, j = np.triu_indices(n, k=1)
    diffs = (values[i] - values[j]) / dist[i, j][:, None]
    npairs = diffs.shape[0]

    def lips_for(cols: slice) -> np.ndarray:
        gt = np.ascontiguousarray(g[cols].T)
        mb = gt.shape[1]
        buf = np.empty((min(pair_block, npairs), mb), dtype=np.float64)
        best = np.zeros(mb, dtype=np.float64)
        for p0 in range(0, npairs, pair_block):
            p1 = min(p0 + pair_block, npairs)
            blk = buf[: p1 - p0]
            np.dot(diffs[p0:p1], gt, out=blk)
            np.abs(blk, out=blk)
            np.maximum(best, blk.max(axis=0), out=best)
        return best

    ranges = [slice(s, min(s + sample_block, m))
              for s in range(0, m, sample_block)]
    return np.concatenate(map_blocks(lips_for, ranges))


def build(anchors: AnchorSet, seed: int, m: int | None = None,
          pair_block: int = DEFAULT_PAIR_BLOCK,
          sample_block: int = DEFAULT_SAMPLE_BLOCK) -> JLOperator:
    """Build the extension operator for an anchor set.

    m defaults to max(64 p, 1024).  Raises RankDeficientError when m < p or
    when the sampled matrix is numerically rank deficient (smallest singular
    value below 1e-10 times the largest).
    """
    values = anchors.values
    n, p = values.shape
    if m is None:
        m = default_sample_count(p)
    if m < p:
        raise RankDeficientError(
            f"m = {m} samples cannot give a full-rank {m} x {p} embedding; "
            f"need m >= p"
        )
    if pair_block < 1 or sample_block < 1:
        raise DomainError("block sizes must be positive")

    emb = sample_embedding(seed, m, p)
    g = emb.matrix
    anchor_images = g @ values.T
    sample_lips = _sample_lips(g, values, anchors.metric.dist,
                               pair_block, sample_block)

    sv = np.linalg.svd(g, compute_uv=False)
    if sv[-1] < RANK_TOL * sv[0]:
        raise RankDeficientError(
            f"embedding matrix is numerically rank deficient "
            f"(s_min/s_max = {sv[-1] / sv[0]:.3e})"
        )
    q_factor, r_factor = np.linalg.qr(g)

    for arr in (anchor_images, sample_lips, q_factor, r_factor):
        arr.flags.writeable = False
    return JLOperator(
        emb=emb,
        values=values,
        anchor_images=anchor_images,
        sample_lips=sample_lips,
        s_min=float(sv[-1] / math.sqrt(m)),
        q_factor=q_factor,
        r_factor=r_factor,
        pair_block=pair_block,
        sample_block=sample_block,
    )


def _check_same_anchors(op: JLOperator, anchors: AnchorSet) -> None:
    if op.values.shape != anchors.values.shape or not np.array_equal(
            op.values, anchors.values):
        raise DomainError("operator was not built from these anchors")


def evaluate(op: JLOperator, anchors: AnchorSet, qs: QuerySet) -> np.ndarray:
    """Evaluate the extension at every query point; returns a q x p matrix.

    Per query x: each sample row w is extended by
    min_t anchor_images[w, t] + sample_lips[w] d(x, t), and the resulting
    sample vector is mapped back to R^p by the stored least-squares
    factorization.  Queries are processed in fixed-size batches, so the
    output does not depend on the worker count.
    """
    _check_same_anchors(op, anchors)
    dmat = anchor_distance_matrix(qs, anchors.metric)
    if dmat.shape[1] != op.n:
        raise DimensionMismatchError(
            f"query distances cover {dmat.shape[1]} anchors, operator has {op.n}"
        )
    if not np.all(np.isfinite(dmat)):
        raise NonFiniteDistanceError("query-anchor distances must be finite")

    nq = dmat.shape[0]
    m, p = op.emb.m, op.emb.p
    out = np.empty((nq, p), dtype=np.float64)
    if nq == 0:
        return out
    v_img = op.anchor_images
    lips = op.sample_lips

    def solve_chunk(rows: slice) -> np.ndarray:
        k = rows.stop - rows.start
        u = np.empty((m, k), dtype=np.float64)
        cand = np.empty((m, op.n), dtype=np.float64)
        for idx in range(k):
            dx = dmat[rows.start + idx]
            np.multiply(lips[:, None], dx[None, :], out=cand)
            cand += v_img
            u[:, idx] = cand.min(axis=1)
        try:
            sol = solve_triangular(op.r_factor, op.q_factor.T @ u)
        except LinAlgError as exc:  # pragma: no cover - rank was checked at build
            raise SolverFailureError(str(exc)) from exc
        return sol.T

    chunks = [slice(s, min(s + _QUERY_CHUNK, nq))
              for s in range(0, nq, _QUERY_CHUNK)]
    for rows, sol in zip(chunks, map_blocks(solve_chunk, chunks)):
        out[rows] = sol
    if not np.all(np.isfinite(out)):
        raise SolverFailureError("least-squares solve produced non-finite values")
    return out


def certificate(op: JLOperator) -> LipCertificate:
    """Certified Lipschitz bound of the built operator."""
    b = float(math.sqrt(np.mean(op.sample_lips * op.sample_lips)))
    n = op.n
    # The reference formula counts ordered anchor pairs and needs at least
    # two of them; with a single anchor the operator is constant.
    theory = math.sqrt(2.0 * math.log(n * (n - 1)) + 4.0) if n >= 2 else 0.0
    return LipCertificate(
        rms_sample_lip=b,
        s_min=op.s_min,
        bound=b / op.s_min,
        theory_reference=theory,
    )


def exactness_check(op: JLOperator, anchors: AnchorSet) -> float:
    """Max relative residual of the operator on its own anchors.

    Evaluates at every anchor (whose distances to the anchors are exactly
    the metric rows) and returns max_t ||F(t) - f(t)|| / (1 + ||f(t)||).
    """
    qs = explicit_queries(anchors.metric.dist)
    f_at_anchors = evaluate(op, anchors, qs)
    err = np.linalg.norm(f_at_anchors - anchors.values, axis=1)
    ref = 1.0 + np.linalg.norm(anchors.values, axis=1)
    return float(np.max(err / ref))


def save_operator(op: JLOperator, path) -> None:
    """Persist an operator: JSON header plus raw float64 payload.

    The embedding matrix is never stored; it is regenerated from the seed on
    load, so reload reproduces evaluate bit for bit given the same block
    sizes (which the header records).
    """
    header = {
        "format_version": _FORMAT_VERSION,
        "seed": op.emb.seed,
        "m": op.emb.m,
        "p": op.emb.p,
        "n": op.n,
        "pair_block": op.pair_block,
        "sample_block": op.sample_block,
        "s_min": op.s_min,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(op.values, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(op.sample_lips, dtype="<f8").tobytes())


def load_operator(path) -> JLOperator:
    """Reload a persisted operator, regenerating the embedding from its seed."""
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ParseError(f"{path}: not a lipext operator file")
        raw_len = fh.read(4)
        if len(raw_len) != 4:
            raise ParseError(f"{path}: truncated header")
        (hdr_len,) = struct.unpack("<I", raw_len)
        try:
            header = json.loads(fh.read(hdr_len).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ParseError(f"{path}: bad header: {exc}") from exc
        try:
            version = header["format_version"]
            seed, m, p, n = (int(header[k]) for k in ("seed", "m", "p", "n"))
            pair_block = int(header["pair_block"])
            sample_block = int(header["sample_block"])
            s_min = float(header["s_min"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: header missing or malformed field: {exc}") from exc
        if version != _FORMAT_VERSION:
            raise SchemaError(
                f"{path}: format_version {version} not supported "
                f"(expected {_FORMAT_VERSION})"
            )
        payload = fh.read()
    want = (n * p + m) * 8
    if len(payload) != want:
        raise ParseError(
            f"{path}: payload has {len(payload)} bytes, expected {want}"
        )
    values = np.frombuffer(payload, dtype="<f8", count=n * p).reshape(n, p)
    sample_lips = np.frombuffer(payload, dtype="<f8", offset=n * p * 8, count=m)
    values = np.ascontiguousarray(values)
    sample_lips = np.ascontiguousarray(sample_lips)

    emb = sample_embedding(seed, m, p)
    anchor_images = emb.matrix @ values.T
    q_factor, r_factor = np.linalg.qr(emb.matrix)
    for arr in (values, sample_lips, anchor_images, q_factor, r_factor):
        arr.flags.writeable = False
    return JLOperator(
        emb=emb,
        values=values,
        anchor_images=anchor_images,
        sample_lips=sample_lips,
        s_min=s_min,
        q_factor=q_factor,
        r_factor=r_factor,
        pair_block=pair_block,
        sample_block=sample_block,
    )
