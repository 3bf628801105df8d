"""Distance learning from triplet comparisons."""

import json

from ._tripletq import (
    CountingOracle,
    Domain,
    GroundTruth,
    HybridDistance,
    InvalidInput,
    Label,
    MahaModel,
    NNDistance,
    ParameterError,
    RankTable,
    ResourceError,
    SmoothnessParams,
    fixture_params,
    learn_additive,
    learn_finite_distance,
    learn_local_hessian,
    learn_mahalanobis,
    learn_multiplicative,
)
from ._tripletq import run_experiment_json as _run_experiment_json


def run_experiment(config, jobs=1):
    """Runs a sweep config (dict or JSON string); returns (csv_text, sidecar dict)."""
    text = config if isinstance(config, str) else json.dumps(config)
    csv, sidecar = _run_experiment_json(text, jobs)
    return csv, json.loads(sidecar)


__all__ = [name for name in dir() if not name.startswith("_")]
