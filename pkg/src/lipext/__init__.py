"""Lipschitz extension of maps from finite metric spaces into Euclidean
space, via seeded Gaussian embeddings, per-sample scalar extensions, and a
least-squares projection back — with a certified Lipschitz bound.
"""

from ._version import __version__
from .analysis import (
    GrowthReport,
    GrowthRow,
    coordwise_baseline,
    empirical_lip,
    growth_experiment,
    make_growth_instance,
)
from .errors import (
    AsymmetryError,
    DimensionMismatchError,
    DomainError,
    DuplicatePointsError,
    LipextError,
    MetricError,
    MissingCoordinatesError,
    NegativeDistanceError,
    NonFiniteDistanceError,
    NonFiniteError,
    NonzeroDiagonalError,
    ParseError,
    RankDeficientError,
    SchemaError,
    SolverFailureError,
    TriangleViolationError,
    ZeroDistanceDistinctValuesError,
)
from .fileio import (
    Instance,
    emit_instance,
    parse_instance,
    parse_instance_dict,
    result_payload,
    write_growth_report,
    write_json,
    write_max_square_report,
    write_tail_report,
)
from .gauss import (
    GaussianEmbedding,
    MaxSquareReport,
    TailPoint,
    default_sample_count,
    embed,
    h_inner,
    h_norm,
    max_square_bound,
    max_square_mc,
    normal_matrix,
    sample_embedding,
    tail_prob_check,
)
from .jl_ext import (
    AnchorSet,
    JLOperator,
    LipCertificate,
    build,
    certificate,
    evaluate,
    exactness_check,
    load_operator,
    make_anchor_set,
    save_operator,
    vector_lip,
)
from .metric import (
    FiniteMetric,
    QuerySet,
    anchor_distance_matrix,
    check_query_consistency,
    euclidean_distance_matrix,
    euclidean_metric,
    euclidean_queries,
    explicit_queries,
    query_anchor_distance,
    query_pair_distances,
    validate_metric,
)
from .scalar_ext import (
    ScalarExtension,
    extend_batch,
    lip_const,
    make_extension,
    mcshane_max,
    mcshane_min,
)

__all__ = [name for name in dir() if not name.startswith("_")]
