from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchbench.compiler import GateCircuit, circuit_unitary, compile_element
from matchbench.dense import (DenseLimitError, DenseLimits, channel_superop, conjugation_superop,
                              favg_exact, gaussian_superop, lambda_exact, lambdas_exact,
                              majorana_basis, orthogonal_superop, projector_superop, run_dense,
                              unitary_superop, BackendError)
from matchbench.linalg import haar_sample
from matchbench.noise import (GateDependent, GaussianB, amplitude_damping_all, depolarizing,
                              random_channel, random_contraction, unitary_channel)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_projectors_partition_identity(n):
    total = sum(projector_superop(n, k) for k in range(2 * n + 1))
    assert np.array_equal(total, np.eye(4 ** n))
    for k in range(2 * n + 1):
        p = projector_superop(n, k)
        assert np.trace(p) == comb(2 * n, k)
        assert np.array_equal(p @ p, p)


def test_majorana_basis_unitary():
    t = majorana_basis(2)
    assert np.allclose(t.conj().T @ t, np.eye(16))


@given(st.integers(1, 3), st.integers(0, 2 ** 31))
@settings(max_examples=15, deadline=None)
def test_group_action_is_block_diagonal_and_orthogonal(n, seed):
    q = haar_sample(n, np.random.default_rng(seed))
    w = conjugation_superop(q)
    assert np.allclose(w, orthogonal_superop(q), atol=1e-10)
    assert np.allclose(w.conj().T @ w, np.eye(4 ** n), atol=1e-10)
    for k in range(2 * n + 1):
        p = projector_superop(n, k)
        assert np.max(np.abs(p @ w - w @ p)) < 1e-10


@pytest.mark.parametrize("p", [0.0, 0.05, 0.3])
def test_depolarizing_lambdas(p):
    lam = lambdas_exact(depolarizing(2, p), 2)
    assert lam[0] == pytest.approx(1.0)
    assert np.allclose(lam[1:], 1 - p)
    assert favg_exact(depolarizing(2, p), 2) == pytest.approx(1 - 3 * p / 4)


def test_scalar_contraction_gives_powers():
    b = 0.9
    lam = lambdas_exact(GaussianB(b * np.eye(6)), 3)
    assert np.allclose(lam, b ** np.arange(7), atol=1e-12)


def test_gaussian_lambda_matches_superoperator(rng):
    noise = GaussianB(random_contraction(2, rng))
    sup = gaussian_superop(noise.B)
    assert np.allclose(channel_superop(noise, 2), sup, atol=1e-12)
    for k in range(5):
        sl = slice(sum(comb(4, j) for j in range(k)), sum(comb(4, j) for j in range(k + 1)))
        assert lambda_exact(noise, 2, k) == pytest.approx(np.trace(sup[sl, sl]).real / comb(4, k))


@pytest.mark.parametrize("n", [2, 3])
def test_favg_consistent_with_lambdas(n):
    ch = random_channel(n, np.random.default_rng(n), 0.2)
    lam = lambdas_exact(ch, n)
    weights = np.array([comb(2 * n, k) for k in range(2 * n + 1)])
    via_lam = (2.0 ** -n * weights @ lam + 1) / (2 ** n + 1)
    assert favg_exact(ch, n) == pytest.approx(via_lam, abs=1e-12)
    # entanglement-fidelity route
    tr = sum(abs(np.trace(k)) ** 2 for k in ch.kraus) / 4 ** n
    assert favg_exact(ch, n) == pytest.approx((2 ** n * tr + 1) / (2 ** n + 1), abs=1e-12)


def test_unitary_noise_lambda(rng):
    u = circuit_unitary(compile_element(haar_sample(2, rng)))
    sup = unitary_superop(u)
    assert np.allclose(channel_superop(unitary_channel(u), 2), sup)


def test_gate_dependent_has_no_lambda():
    with pytest.raises(BackendError):
        lambda_exact(GateDependent(0.1), 2, 1)


def test_run_dense_noise_free_distribution(rng):
    c = compile_element(haar_sample(2, rng))
    p = run_dense([c])
    u = circuit_unitary(c)
    assert np.allclose(p, np.abs(u[:, 0]) ** 2)
    counts = run_dense([c], rng=np.random.default_rng(0), shots=100)
    assert sum(counts.values()) == 100


def test_run_dense_noise_paths_agree(rng):
    segs = [compile_element(haar_sample(2, rng)) for _ in range(3)]
    noise = amplitude_damping_all(2, 0.1)
    p1 = run_dense(segs, noise)
    rho = np.zeros((4, 4), complex)
    rho[0, 0] = 1
    for s in segs:
        u = circuit_unitary(s)
        rho = u @ rho @ u.conj().T
        rho = sum(k @ rho @ k.conj().T for k in noise.kraus)
    assert np.allclose(p1, np.real(np.diag(rho)))


def test_per_gate_gaussian_equals_superoperator_product(rng):
    b = random_contraction(2, rng, 0.9, 0.99)
    c = compile_element(haar_sample(2, rng))
    p = run_dense([c], GaussianB(b, mode="per_gate"))
    t = majorana_basis(2)
    g = gaussian_superop(b)
    v = t.conj().T @ np.outer([1, 0, 0, 0], [1, 0, 0, 0]).ravel().astype(complex)
    for gate in c.gates:
        v = g @ (unitary_superop(circuit_unitary(GateCircuit(2, (gate,)))) @ v)
    rho = (t @ v).reshape(4, 4)
    assert np.allclose(p, np.real(np.diag(rho)), atol=1e-12)


def test_dense_limits_enforced(rng):
    c = compile_element(haar_sample(3, rng))
    with pytest.raises(DenseLimitError):
        run_dense([c], depolarizing(3, 0.1), limits=DenseLimits(statevector=10, channel=2))
    with pytest.raises(ValueError):
        run_dense([c], depolarizing(2, 0.1))
