import itertools
import json
import math

import numpy as np
import pytest

import wcrc

FOUR = [
    ([0, 2], [1, 3], 0.3),
    ([1, 3], [0, 2], 0.3),
    ([2, 3], [0, 1], 0.3),
    ([0, 2, 3], [1], 0.05),
    ([1, 2, 3], [0], 0.05),
]


def brute_max(M):
    n = M.shape[0]
    return max(
        float(np.array(x) @ M @ np.array(x)) for x in itertools.product([-1.0, 1.0], repeat=n)
    )


def quadratic_form(weights, scenarios, n):
    M = np.zeros((n, n))
    for a, (_, target, p) in zip(weights, scenarios):
        b = np.zeros(n)
        b[target] = 1.0 / len(target)
        M += p * np.outer(a - b, a - b)
    return M


@pytest.fixture
def four():
    return wcrc.Distribution(4, FOUR)


def test_distribution_round_trip(four, tmp_path):
    assert len(four) == 5 and four.n == 4
    back = wcrc.Distribution.from_json(four.to_json())
    assert back.scenarios() == four.scenarios()
    four.save(tmp_path / "d.json")
    assert wcrc.Distribution.load(tmp_path / "d.json").scenarios() == four.scenarios()


def test_invalid_distribution_raises():
    with pytest.raises(wcrc.Error):
        wcrc.Distribution(3, [([0], [], 1.0)])
    with pytest.raises(wcrc.Error):
        wcrc.Distribution(3, [([0], [1], 0.4)])


def test_quadratic_form_matches_numpy(four):
    rng = np.random.default_rng(1)
    W = np.zeros((5, 4))
    for i, (sample, _, _) in enumerate(FOUR):
        W[i, sample] = rng.uniform(-1, 1, len(sample))
    est = wcrc.Estimator(W)
    M = wcrc.build_M(est, four)
    np.testing.assert_allclose(M, quadratic_form(W, FOUR, 4), atol=1e-12)
    x = rng.uniform(-1, 1, 4)
    assert est.mse(four, x) == pytest.approx(float(x @ M @ x), abs=1e-12)

    value, witness = wcrc.exact_worst_case(M)
    assert value == pytest.approx(brute_max(M), abs=1e-12)
    assert float(witness @ M @ witness) == pytest.approx(value, abs=1e-12)

    V, objective, residual = wcrc.sdp_upper_bound(M)
    assert value <= objective + residual + 1e-12
    assert objective <= math.pi / 2 * value + 1e-6
    r = wcrc.round_certificate(V, M, seed=3, rounds=2000)
    assert r["closed_form"] >= 2 / math.pi * objective - 1e-6


def test_designed_estimator(four):
    est, bound, residual = wcrc.solve_full(four)
    M = wcrc.build_M(est, four)
    exact = brute_max(M)
    assert 0.6622 <= exact <= 0.6700
    assert exact <= bound + residual + 1e-5
    report = wcrc.audit(est, four)
    assert report["exact_value"] == pytest.approx(exact, abs=1e-10)

    V = est.certificate
    obj, terms, grad = wcrc.schur_objective(four, V)
    assert obj == pytest.approx(bound, abs=1e-6)
    assert all(0.0 <= t <= 1.0 for t in terms)
    np.testing.assert_allclose(grad, grad.T, atol=1e-12)
    w = wcrc.weights_from_certificate(V, [0, 2], [1, 3])
    np.testing.assert_allclose(w, est.weights[0], atol=1e-12)


def test_estimate_sampled_full_observation(four):
    x = {0: 0.5, 1: -0.25, 2: 1.0, 3: -1.0}
    assert wcrc.estimate_sampled(four, [0, 1, 2, 3], [1, 2], x, eps=1e-3) == pytest.approx(0.375)
    with pytest.raises(wcrc.Error):
        wcrc.estimate_sampled(four, [0, 1], [2], {0: 0.5}, eps=1e-3)


def test_baselines():
    d = wcrc.gen_importance(np.full(6, 0.5), num_scenarios=50, seed=2)
    ht = wcrc.baseline("horvitz_thompson", d, probs=np.full(6, 0.5))
    for (sample, _, _), row in zip(d.scenarios(), ht.weights):
        expect = np.zeros(6)
        expect[sample] = 1 / (6 * 0.5)
        np.testing.assert_allclose(row, expect)
    with pytest.raises(wcrc.Error):
        wcrc.baseline("horvitz_thompson", d)


def test_regression_perfect_coverage():
    d = wcrc.Distribution.uniform(6, [([0, 1, 2, 3, 4, 5], [1, 2, 3, 4])])
    rng = np.random.default_rng(5)
    X = rng.uniform(-1, 1, (6, 2))
    y = np.clip(X @ np.array([0.3, -0.2]) + 0.05 * rng.uniform(-1, 1, 6), -1, 1)
    r = wcrc.fit_regression(d, [0, 1, 2, 3, 4, 5], [1, 2, 3, 4], X, y)
    beta = np.linalg.lstsq(X[1:5], y[1:5], rcond=None)[0]
    np.testing.assert_allclose(r["beta_hat"], beta, atol=1e-8)
    assert r["bound_holds"]


def test_selective_experiment():
    rows = wcrc.run_experiment({"experiment": "selective", "sweep": [2, 4]})
    by = {(r["estimator"], r["sweep"]): r["metric"] for r in rows if r["values"] == "worst-case"}
    assert by[("RecentWindow", 2)] == pytest.approx(4.0, rel=1e-6)
    assert by[("SDP Alg", 2)] == pytest.approx(1.0, rel=1e-6)
    json.dumps(rows)
