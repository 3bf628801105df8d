import json
import math

import numpy as np
import pytest

import tripletq as tq


def test_label_and_ledger():
    oracle = tq.CountingOracle(tq.GroundTruth.sqrt_mahalanobis(np.eye(1)))
    assert oracle.label([0.0], [1.0], [2.0]) == tq.Label.LESS
    assert oracle.label([0.0], [2.0], [1.0]) == tq.Label.GREATER
    assert oracle.label([0.3], [0.7], [0.7]) == tq.Label.EQUAL
    assert oracle.query_count == 3


def test_finite_table_ties():
    oracle = tq.CountingOracle(tq.GroundTruth.sqrt_mahalanobis(np.eye(1)))
    pts = [[0.0], [-1.0], [1.0], [3.0]]
    table = tq.learn_finite_distance(pts, oracle)
    doc = json.loads(table.to_json())
    assert set(doc) >= {"points", "ranks", "tie_groups"}
    assert doc["tie_groups"][0][0] == [1, 2]
    assert table.label(0, 1, 2) == tq.Label.EQUAL


def test_mahalanobis_recovery():
    m = np.array([[1.0, 0.3], [0.3, 0.5]])
    oracle = tq.CountingOracle(tq.GroundTruth.sqrt_mahalanobis(m))
    model = tq.learn_mahalanobis(oracle, 2, 1e-3)
    assert np.linalg.norm(model.matrix - m) <= 1e-3
    assert model.query_count == oracle.query_count
    doc = json.loads(model.to_json())
    assert doc["p"] == 2 and len(doc["coefficients"]) == 3


def test_multiplicative_agreement():
    m = np.array([[1.0, 0.2], [0.2, 0.6]])
    truth = tq.GroundTruth.squared_mahalanobis(m)
    box = tq.Domain.unit_box(2)
    oracle = tq.CountingOracle(truth)
    hybrid = tq.learn_multiplicative(box, oracle, 1.0, tq.fixture_params(truth, box),
                                     max_centers=100)
    assert hybrid.cover_size <= 100
    assert hybrid.eval([0.5, 0.5], [0.5, 0.5]) == 0.0
    doc = json.loads(hybrid.to_json())
    assert set(doc["computed_thresholds"]) >= {"beta_hat", "eps", "xi"}


def test_bad_input_raises():
    with pytest.raises(ValueError):
        tq.GroundTruth.squared_mahalanobis(np.array([[1.0, 0.0], [0.0, -1.0]]))
    with pytest.raises(ValueError):
        tq.run_experiment({"learner": "finite", "grid": {}})


def test_sweep_is_deterministic():
    cfg = {"learner": "hessian", "seed": 5, "fixture": {"kind": "varying-hessian"},
           "grid": {"p": [2], "eps": [0.01, 0.003]}}
    csv_a, side_a = tq.run_experiment(cfg, jobs=1)
    _, side_b = tq.run_experiment(json.dumps(cfg), jobs=2)
    assert side_a["determinism_hash"] == side_b["determinism_hash"]
    assert side_a["all_pass"]
    assert len(csv_a.strip().splitlines()) == 3
    assert all(not math.isnan(r["error"]) for r in side_a["rows"])
