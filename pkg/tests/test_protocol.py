import json

import numpy as np
import pytest

from matchbench.dense import BackendError, lambdas_exact
from matchbench.noise import (GateDependent, GaussianB, amplitude_damping_all,
                              depolarizing, random_contraction)
from matchbench.protocol import (Aggregator, RoundPlan, ShotBatch, SpamNoise, aggregate, compose,
                                 derive_seed, factor_seeds, factors_from_seeds, iter_protocol,
                                 resolve_backend, run_protocol, simplex_design)


def small_plan(**kw):
    base = dict(n=2, k_list=(0, 1, 2, 3, 4), m_list=(1, 3), K=3, L=50, seed=9)
    base.update(kw)
    return RoundPlan(**base)


def test_batches_carry_consistent_data():
    plan = small_plan()
    batches = run_protocol(plan, depolarizing(2, 0.05))
    assert len(batches) == 5 * 2 * 3
    for b in batches:
        assert sum(b.counts.values()) == plan.L
        assert b.spam_basis == ("Z" if b.k % 2 == 0 else "X")
        assert b.factor_seeds == factor_seeds(plan.seed, b.k, b.m, b.i)
        assert compose(factors_from_seeds(plan.n, b.factor_seeds)).allclose(b.q, 1e-12)
        assert len(b.factor_seeds) == b.m


def test_batch_json_round_trip():
    b = run_protocol(small_plan(K=1, m_list=(2,), k_list=(1,)))[0]
    back = ShotBatch.from_json(json.loads(json.dumps(b.to_json())))
    assert back.counts == b.counts
    assert back.q.allclose(b.q, 0)
    assert back.factor_seeds == b.factor_seeds


def test_parallel_run_is_identical():
    plan = small_plan(K=4)
    noise = depolarizing(2, 0.05)
    a = [json.dumps(b.to_json()) for b in iter_protocol(plan, noise, workers=1)]
    b = [json.dumps(b.to_json()) for b in iter_protocol(plan, noise, workers=2, chunk=5)]
    assert a == b


def test_sequences_independent_of_plan_shape():
    full = run_protocol(small_plan())
    sub = run_protocol(small_plan(k_list=(3,), m_list=(3,)))
    pick = [b for b in full if b.k == 3 and b.m == 3]
    assert [b.counts for b in pick] == [b.counts for b in sub]


def test_derive_seed_distinct_keys():
    seeds = {derive_seed(1, k, m) for k in range(5) for m in range(5)}
    assert len(seeds) == 25
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)


def test_aggregate_is_mean_of_signals():
    batches = run_protocol(small_plan())
    agg = Aggregator()
    signals = [agg.add(b) for b in batches if b.k == 2 and b.m == 3]
    assert aggregate(batches, 2, 3) == pytest.approx(np.mean(signals))
    with pytest.raises(KeyError):
        agg.mean(0, 7)


def test_signal_is_linear_in_frequencies():
    plan = small_plan(L=None, K=1, k_list=(2,), m_list=(2,))
    b = run_protocol(plan)[0]
    agg = Aggregator()
    half = {x: 0.5 * p for x, p in b.probabilities.items()}
    hb = ShotBatch(b.k, b.m, b.i, b.q, b.spam_basis, None, probabilities=half)
    assert agg.signal(hb) == pytest.approx(0.5 * agg.signal(b))


def test_total_shots():
    plan = RoundPlan(2, (0, 1, 2, 3, 4), tuple(range(2, 25, 2)), 64, 400, 0)
    assert plan.total_shots == 1_536_000
    assert small_plan(L=None).total_shots is None


@pytest.mark.parametrize("kw", [
    dict(k_list=(5,)), dict(k_list=(1, 1)), dict(m_list=(3, 2)), dict(m_list=(0,)),
    dict(K=0), dict(L=0), dict(ensemble="clifford"), dict(ensemble="design"),
])
def test_plan_validation(kw):
    with pytest.raises(ValueError):
        small_plan(**kw)


def test_backend_selection():
    plan = small_plan(k_list=(0, 2))
    assert resolve_backend(plan, None, "auto", None) == "dense"
    assert resolve_backend(plan, GaussianB(np.eye(4) * 0.9), "covariance", None) == "covariance"
    with pytest.raises(BackendError):
        resolve_backend(small_plan(), None, "covariance", None)
    with pytest.raises(BackendError):
        resolve_backend(plan, depolarizing(2, 0.1), "covariance", None)
    with pytest.raises(ValueError):
        resolve_backend(plan, None, "gpu", None)


def test_backends_give_same_signal():
    rng = np.random.default_rng(3)
    noise = GaussianB(random_contraction(2, rng, 0.9, 0.99))
    plan = small_plan(k_list=(0, 2, 4), L=None)
    d = Aggregator().extend(iter_protocol(plan, noise, "dense")).table()
    c = Aggregator().extend(iter_protocol(plan, noise, "covariance")).table()
    assert np.allclose([r[2] for r in d], [r[2] for r in c], atol=1e-10)


def test_simplex_design_sizes():
    assert len(simplex_design(1)) == 6
    assert len(simplex_design(2)) == 120
    with pytest.raises(ValueError):
        simplex_design(4)


def test_design_second_moment_matches_haar():
    # for a twirl-invariant ensemble sum_g (g (x) g) projects onto invariants of O(2n)
    n = 2
    g = np.array([q.matrix for q in simplex_design(n)])
    avg = np.einsum("gij,gkl->ikjl", g, g).reshape(16, 16) / len(g)
    vec_i = np.eye(4).reshape(16)
    assert np.allclose(avg, np.outer(vec_i, vec_i) / 4, atol=1e-12)


def design_plan(n=2, ms=(1, 2, 3, 5)):
    return RoundPlan(n, tuple(range(2 * n + 1)), ms, 1, None, 0, ensemble="design")


def test_design_noise_free_is_one():
    table = Aggregator().extend(iter_protocol(design_plan())).table()
    assert all(abs(f - 1) < 1e-10 for _, _, f, _, _ in table)


def test_design_exact_decay_amplitude_damping():
    noise = amplitude_damping_all(2, 0.08)
    lam = lambdas_exact(noise, 2)
    rows = Aggregator().extend(iter_protocol(design_plan(), noise)).table()
    f = {(k, m): v for k, m, v, _, _ in rows}
    # non-unital noise moves A_k away from 1 but the decay stays exact
    for k in range(5):
        for m in (2, 3, 5):
            assert f[(k, m)] == pytest.approx(f[(k, 1)] * lam[k] ** (m - 1), abs=1e-10)
    assert abs(f[(1, 1)] - lam[1]) > 1e-3


def test_spam_errors_change_only_the_amplitude():
    noise = depolarizing(2, 0.1)
    spam = SpamNoise(prep=amplitude_damping_all(2, 0.05), meas=depolarizing(2, 0.04))
    rows = Aggregator().extend(iter_protocol(design_plan(), noise, spam_noise=spam)).table()
    f = {(k, m): v for k, m, v, _, _ in rows}
    lam = lambdas_exact(noise, 2)
    for k in range(1, 5):
        amp = f[(k, 1)] / lam[k]
        assert abs(amp - 1) > 1e-3
        for m in (2, 3, 5):
            assert f[(k, m)] == pytest.approx(amp * lam[k] ** m, abs=1e-10)


def test_design_rejects_gate_dependent_noise():
    with pytest.raises(BackendError):
        list(iter_protocol(design_plan(), GateDependent(0.1)))
    with pytest.raises(BackendError):
        list(iter_protocol(design_plan(), depolarizing(2, 0.1, mode="per_gate")))


def test_haar_exact_mode_noise_free_mean_near_one():
    plan = RoundPlan(2, (0, 1, 2, 3, 4), (2,), 400, None, 1)
    rows = Aggregator().extend(iter_protocol(plan)).table()
    assert rows[0][2] == pytest.approx(1.0)
    for k, m, f, K, _ in rows:
        assert abs(f - 1) < 0.25
        assert K == 400
