import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchbench.fitting import (DecayEstimate, FitError, extract_fidelity, favg_from_lambdas,
                                fit_decay)


@given(st.floats(0.2, 1.5), st.floats(0.5, 0.999))
@settings(max_examples=40, deadline=None)
def test_exact_data_recovered(a, lam):
    pts = [(m, a * lam ** m) for m in range(1, 13)]
    est = fit_decay(pts)
    assert abs(est.lam - lam) < 1e-9
    assert abs(est.A - a) < 1e-8
    assert est.r2 == pytest.approx(1.0)


def test_negative_lambda_kept():
    pts = [(m, 0.8 * (-0.9) ** m) for m in range(1, 9)]
    est = fit_decay(pts)
    assert est.lam == pytest.approx(-0.9, abs=1e-9)


def test_noisy_data_close():
    rng = np.random.default_rng(0)
    pts = [(m, 0.95 * 0.93 ** m + rng.normal(0, 0.002)) for m in range(2, 25, 2)]
    est = fit_decay(pts, bootstrap_resamples=300, seed=1)
    assert abs(est.lam - 0.93) < 0.005
    assert est.ci[0] <= est.lam <= est.ci[1]
    assert est.interval_method == "residual bootstrap"


def test_same_parity_lengths_prefer_positive_lambda():
    even = fit_decay([(m, 0.7 * 0.9 ** m) for m in (2, 4, 6, 8)])
    odd = fit_decay([(m, 0.7 * 0.9 ** m) for m in (1, 3, 5, 7)])
    assert even.lam == pytest.approx(0.9) and even.A == pytest.approx(0.7)
    assert odd.lam == pytest.approx(0.9) and odd.A == pytest.approx(0.7)


def test_sequence_bootstrap():
    rng = np.random.default_rng(2)
    seqs = {m: 0.9 ** m + rng.normal(0, 0.05, 40) for m in (1, 3, 5, 8, 12)}
    est = fit_decay(sequences=seqs, bootstrap_resamples=200, seed=4)
    assert est.interval_method == "sequence bootstrap"
    assert est.ci[0] < 0.9 < est.ci[1]
    assert len(est.bootstrap) == 200


def test_growth_is_clamped():
    est = fit_decay([(m, 0.5 * 1.05 ** m) for m in range(1, 8)])
    assert est.clamped
    assert est.lam == 1.0
    assert est.raw_lambda == pytest.approx(1.05)


def test_needs_three_lengths():
    with pytest.raises(ValueError):
        fit_decay([(1, 0.9), (2, 0.8)])
    with pytest.raises(ValueError):
        fit_decay()


def test_nonconvergence_raises(monkeypatch):
    import matchbench.fitting as fitting

    monkeypatch.setattr(fitting, "MAX_NFEV", 1)
    rng = np.random.default_rng(5)
    with pytest.raises(FitError) as info:
        fitting.fit_decay([(m, rng.normal()) for m in range(1, 10)])
    assert isinstance(info.value.estimate, DecayEstimate)
    assert not info.value.estimate.converged


def test_fidelity_from_table():
    rep = extract_fidelity([1.0, 0.78, 0.85, 0.87, 0.83], 2, two_qubit_gates=4)
    assert rep.favg == pytest.approx(0.8765, abs=1e-12)
    assert rep.fgate == pytest.approx(0.8765 ** 0.25)
    assert round(rep.fgate, 2) == 0.97


def test_fidelity_default_gate_count_and_mapping():
    rep = extract_fidelity({0: 1.0, 1: 0.9, 2: 0.9}, 1)
    assert rep.two_qubit_gates == 0 and rep.fgate is None
    with pytest.raises(ValueError):
        extract_fidelity({0: 1.0, 1: 0.9}, 1)
    with pytest.raises(ValueError):
        favg_from_lambdas([1, 1], 1)


def test_identity_channel_has_unit_fidelity():
    for n in (1, 2, 3):
        assert favg_from_lambdas(np.ones(2 * n + 1), n) == pytest.approx(1.0)


def test_fidelity_interval_from_bootstraps():
    rng = np.random.default_rng(8)
    ests = []
    for k, lam in enumerate([1.0, 0.95, 0.9, 0.92, 0.88]):
        pts = [(m, lam ** m + rng.normal(0, 0.003)) for m in range(1, 15)]
        ests.append(fit_decay(pts, bootstrap_resamples=200, seed=k, k=k))
    rep = extract_fidelity(ests, 2)
    assert rep.favg_ci[0] <= rep.favg <= rep.favg_ci[1]
