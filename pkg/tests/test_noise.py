import json

import numpy as np
import pytest

from matchbench.noise import (DenseChannel, GateDependent, GaussianB, NoiseSpecError, NoNoise,
                              amplitude_damping_all, depolarizing, noise_from_json, random_channel,
                              random_contraction)


def round_trip(model):
    return noise_from_json(json.loads(json.dumps(model.to_json())))


def test_dense_channel_round_trip(rng):
    ch = random_channel(2, rng)
    back = round_trip(ch)
    assert back.mode == ch.mode
    for a, b in zip(ch.kraus, back.kraus):
        assert np.array_equal(a, b)
    entry = ch.to_json()["kraus"][0][0][0]
    assert len(entry) == 2


def test_gaussian_round_trip(rng):
    b = random_contraction(2, rng)
    assert np.array_equal(round_trip(GaussianB(b)).B, b)
    mix = GaussianB.from_mixture([0.5, 0.5], [np.eye(4), -np.eye(4)])
    back = round_trip(mix)
    assert back.weights == (0.5, 0.5)
    assert np.allclose(back.B, 0)


def test_gate_dependent_and_none_round_trip():
    gd = GateDependent(0.2, depolarizing(1, 0.01))
    back = round_trip(gd)
    assert back.delta == 0.2 and back.base.n == 1
    assert isinstance(noise_from_json(None), NoNoise)
    assert isinstance(round_trip(NoNoise()), NoNoise)


def test_presets():
    dep = noise_from_json({"variant": "dense_channel", "preset": "depolarizing", "n": 2, "p": 0.1})
    assert len(dep.kraus) == 16
    ad = noise_from_json({"variant": "dense_channel", "preset": "amplitude_damping", "n": 2,
                          "gamma": 0.1, "mode": "per_gate"})
    assert ad.mode == "per_gate"


@pytest.mark.parametrize("bad", [
    {"variant": "mystery"},
    {"variant": "dense_channel", "kraus": [[[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]]},
    {"variant": "dense_channel", "preset": "bitflip", "n": 1},
    {"variant": "gaussian_b", "B": [[2, 0], [0, 1]]},
    {"variant": "gaussian_b", "B": [[1, 0, 0]]},
    {"variant": "gaussian_b", "weights": [0.7, 0.7], "rotations": [[[1, 0], [0, 1]], [[1, 0], [0, 1]]]},
    {"variant": "gate_dependent", "delta": 1.5},
    {"variant": "dense_channel", "preset": "depolarizing", "n": 1, "p": 0.1, "mode": "sometimes"},
])
def test_invalid_specs_rejected(bad):
    with pytest.raises(NoiseSpecError):
        noise_from_json(bad)


def test_mixture_needs_orthogonal_components():
    with pytest.raises(NoiseSpecError):
        GaussianB.from_mixture([1.0], [np.ones((2, 2))])


def test_channel_constructors_are_trace_preserving(rng):
    for ch in (depolarizing(2, 0.3), amplitude_damping_all(2, 0.2), random_channel(3, rng, 0.2)):
        tp = sum(k.conj().T @ k for k in ch.kraus)
        assert np.allclose(tp, np.eye(tp.shape[0]))


def test_random_contraction_norm(rng):
    b = random_contraction(3, rng, 0.5, 0.9)
    s = np.linalg.svd(b, compute_uv=False)
    assert s.max() <= 0.9 + 1e-12 and s.min() >= 0.5 - 1e-12


def test_liouville_acts_on_row_major_vec(rng):
    ch = random_channel(1, rng)
    rho = np.array([[0.7, 0.2 + 0.1j], [0.2 - 0.1j, 0.3]])
    direct = sum(k @ rho @ k.conj().T for k in ch.kraus)
    assert np.allclose(ch.liouville @ rho.ravel(), direct.ravel())
    assert isinstance(ch, DenseChannel)
