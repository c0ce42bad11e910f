"""Instance, result, and report file formats.

Instances and results are JSON (human writable, schema checked with
path-labelled errors); tabular experiment reports are CSV plus a JSON
twin.  Numbers serialize as shortest round-trip decimals, and every writer
is deterministic: identical inputs produce byte-identical files.

Instance layout (see README for the full schema):

    {
      "format_version": 1,
      "mode": "euclidean" | "explicit",
      "anchors": {"coords": [[...]]} or {"dist": [[...]]},
      "values": [[...]],                       # n x p
      "queries": {"coords": [[...]]} or
                 {"anchor_dists": [[...]], "pair_dists": [[...]]?},
      "seed": int?, "samples": int?
    }
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from ._version import __version__
from .analysis import GrowthReport
from .errors import ParseError, SchemaError
from .gauss import MaxSquareReport, TailPoint
from .jl_ext import AnchorSet, LipCertificate, make_anchor_set
from .metric import QuerySet, euclidean_metric, euclidean_queries, explicit_queries, validate_metric

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Instance:
    """A parsed and fully validated extension problem."""

    anchors: AnchorSet
    queries: QuerySet
    seed: int | None
    samples: int | None


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise SchemaError(f"{path}: missing required key {key!r}")
    return obj[key]


def _as_dict(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"{path}: expected an object, got {type(value).__name__}")
    return value


def _as_int(value, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise SchemaError(f"{path}: expected an integer, got {value!r}")
    return value


def _as_matrix(value, path: str, rows: int | None = None,
               cols: int | None = None) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise SchemaError(f"{path}: expected a nonempty list of rows")
    width = None
    for r, row in enumerate(value):
        if not isinstance(row, list) or not row:
            raise SchemaError(f"{path}[{r}]: expected a nonempty list of numbers")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise SchemaError(
                f"{path}[{r}]: row has {len(row)} entries, expected {width}"
            )
        for c, x in enumerate(row):
            if not isinstance(x, (int, float)) or isinstance(x, bool):
                raise SchemaError(f"{path}[{r}][{c}]: expected a number, got {x!r}")
    if rows is not None and len(value) != rows:
        raise SchemaError(f"{path}: expected {rows} rows, got {len(value)}")
    if cols is not None and width != cols:
        raise SchemaError(f"{path}: expected {cols} columns, got {width}")
    return np.asarray(value, dtype=np.float64)


def parse_instance_dict(obj) -> Instance:
    """Validate an already-decoded instance object."""
    top = _as_dict(obj, "$")
    version = _as_int(_require(top, "format_version", "$"), "$.format_version")
    if version != FORMAT_VERSION:
        raise SchemaError(
            f"$.format_version: {version} not supported (expected {FORMAT_VERSION})"
        )
    mode = _require(top, "mode", "$")
    if mode not in ("euclidean", "explicit"):
        raise SchemaError(f"$.mode: expected 'euclidean' or 'explicit', got {mode!r}")

    anchors_obj = _as_dict(_require(top, "anchors", "$"), "$.anchors")
    if mode == "euclidean":
        coords = _as_matrix(_require(anchors_obj, "coords", "$.anchors"),
                            "$.anchors.coords")
        metric = euclidean_metric(coords)
    else:
        dist = _as_matrix(_require(anchors_obj, "dist", "$.anchors"),
                          "$.anchors.dist")
        metric = validate_metric(dist)
    n = metric.n

    values = _as_matrix(_require(top, "values", "$"), "$.values", rows=n)
    anchors = make_anchor_set(metric, values)

    queries_obj = _as_dict(_require(top, "queries", "$"), "$.queries")
    if mode == "euclidean":
        qcoords = _as_matrix(_require(queries_obj, "coords", "$.queries"),
                             "$.queries.coords", cols=metric.coords.shape[1])
        queries = euclidean_queries(qcoords)
    else:
        anchor_dists = _as_matrix(
            _require(queries_obj, "anchor_dists", "$.queries"),
            "$.queries.anchor_dists", cols=n)
        pair_dists = None
        if "pair_dists" in queries_obj:
            pair_dists = _as_matrix(queries_obj["pair_dists"],
                                    "$.queries.pair_dists",
                                    rows=anchor_dists.shape[0],
                                    cols=anchor_dists.shape[0])
        queries = explicit_queries(anchor_dists, pair_dists)

    seed = samples = None
    if "seed" in top:
        seed = _as_int(top["seed"], "$.seed")
    if "samples" in top:
        samples = _as_int(top["samples"], "$.samples")
        if samples < 1:
            raise SchemaError(f"$.samples: must be >= 1, got {samples}")
    return Instance(anchors=anchors, queries=queries, seed=seed, samples=samples)


def parse_instance(source) -> Instance:
    """Parse an instance from a path or a readable stream."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return parse_instance_dict(obj)


def emit_instance(instance: Instance) -> dict:
    """Serialize an Instance back to its JSON object form."""
    qs = instance.queries
    if qs.mode == "euclidean":
        anchors_obj = {"coords": instance.anchors.metric.coords.tolist()}
        queries_obj = {"coords": qs.coords.tolist()}
    else:
        anchors_obj = {"dist": instance.anchors.metric.dist.tolist()}
        queries_obj = {"anchor_dists": qs.anchor_dists.tolist()}
        if qs.pair_dists is not None:
            queries_obj["pair_dists"] = qs.pair_dists.tolist()
    obj = {
        "format_version": FORMAT_VERSION,
        "mode": qs.mode,
        "anchors": anchors_obj,
        "values": instance.anchors.values.tolist(),
        "queries": queries_obj,
    }
    if instance.seed is not None:
        obj["seed"] = instance.seed
    if instance.samples is not None:
        obj["samples"] = instance.samples
    return obj


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def result_payload(extended_values: np.ndarray, cert: LipCertificate,
                   exactness_residual: float, seed: int, samples: int,
                   baseline=None) -> dict:
    payload = {
        "format_version": FORMAT_VERSION,
        "extended_values": np.asarray(extended_values).tolist(),
        "certificate": {
            "rms_sample_lip": cert.rms_sample_lip,
            "s_min": cert.s_min,
            "bound": cert.bound,
            "theory_reference": cert.theory_reference,
        },
        "exactness_residual": exactness_residual,
        "provenance": {
            "seed": seed,
            "samples": samples,
            "tool_version": __version__,
        },
    }
    if baseline is not None:
        baseline_values, baseline_bound = baseline
        payload["baseline"] = {
            "extended_values": np.asarray(baseline_values).tolist(),
            "bound": baseline_bound,
        }
    return payload


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


_MAXSQ_FIELDS = ("m_gaussians", "trials", "dependence", "estimate",
                 "std_error", "paper_bound")
_TAIL_FIELDS = ("t", "empirical", "std_error", "bound")
# runtime_s stays out of the files so reruns are byte identical.
_GROWTH_FIELDS = ("n", "p", "m", "seed", "rms_sample_lip", "s_min", "bound",
                  "theory_reference", "empirical_lip", "bound_over_sqrt_log_n")


def write_max_square_report(reports: list[MaxSquareReport], csv_path, json_path) -> None:
    rows = [[getattr(r, f) for f in _MAXSQ_FIELDS] for r in reports]
    _write_csv(csv_path, _MAXSQ_FIELDS, rows)
    write_json(json_path, {
        "format_version": FORMAT_VERSION,
        "rows": [dict(zip(_MAXSQ_FIELDS, row)) for row in rows],
    })


def write_tail_report(points: tuple[TailPoint, ...], csv_path, json_path) -> None:
    rows = [[getattr(pt, f) for f in _TAIL_FIELDS] for pt in points]
    _write_csv(csv_path, _TAIL_FIELDS, rows)
    write_json(json_path, {
        "format_version": FORMAT_VERSION,
        "rows": [dict(zip(_TAIL_FIELDS, row)) for row in rows],
    })


def write_growth_report(report: GrowthReport, csv_path, json_path) -> None:
    rows = [[getattr(r, f) for f in _GROWTH_FIELDS] for r in report.rows]
    _write_csv(csv_path, _GROWTH_FIELDS, rows)
    write_json(json_path, {
        "format_version": FORMAT_VERSION,
        "rows": [dict(zip(_GROWTH_FIELDS, row)) for row in rows],
    })
