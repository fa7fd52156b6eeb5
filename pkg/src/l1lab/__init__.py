"""Finite metric spaces, their embeddings into l_p, and distortion certificates."""

from .errors import *  # noqa: F401,F403
from .metric import (
    DistortionReport,
    FiniteMetricSpace,
    PointSet,
    distortion_report,
    doubling_constant,
    metric_from_points,
    snowflake,
    validate_metric,
)
from .graphs import (
    WeightedGraph,
    diamond,
    hypercube_metric,
    laakso,
    random_pointset,
    shortest_path_metric,
    walsh_matrix,
    walsh_pointset,
)
from .realize import l1_realize
from .stable import StableOperator, apply, calibrate_C, embed_theorem1, sample_operator, sample_ratios
from .decomp import SnowflakeParams, padded_partition, snowflake_embed
from .lower_bounds import (
    certify_laakso_embedding,
    heuristic_best_linear,
    hypercube_concentration_check,
    short_diagonal_check,
    walsh_bound,
)
from .experiments import ExperimentConfig, run_experiment

__version__ = "0.1.0"
