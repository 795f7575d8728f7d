
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchbench import kernels
from matchbench.linalg import (OrthogonalElement, givens_decompose, haar_sample,
                               minor_sum_bruteforce, minor_sum_coefficients, pfaffian,
                               pfaffian_cofactor, plane_rotation)


def antisym(rng, d, cx=False):
    a = rng.standard_normal((d, d))
    if cx:
        a = a + 1j * rng.standard_normal((d, d))
    return a - a.T


def test_pfaffian_small_cases():
    assert pfaffian(np.zeros((0, 0))) == 1
    assert pfaffian(np.array([[0, 2.5], [-2.5, 0]])) == pytest.approx(2.5)
    a = np.zeros((4, 4))
    a[0, 1], a[0, 2], a[0, 3], a[1, 2], a[1, 3], a[2, 3] = 1, 2, 3, 4, 5, 6
    a = a - a.T
    # af - be + cd
    assert pfaffian(a) == pytest.approx(1 * 6 - 2 * 5 + 3 * 4)


def test_pfaffian_odd_dimension_is_zero(rng):
    assert pfaffian(antisym(rng, 5)) == 0


def test_pfaffian_rejects_non_antisymmetric():
    with pytest.raises(ValueError):
        pfaffian(np.ones((2, 2)))


@given(st.integers(1, 5), st.booleans(), st.integers(0, 2 ** 31))
@settings(max_examples=40, deadline=None)
def test_pfaffian_squared_is_determinant(half, cx, seed):
    a = antisym(np.random.default_rng(seed), 2 * half, cx)
    assert np.isclose(pfaffian(a) ** 2, np.linalg.det(a), rtol=1e-8, atol=1e-8)


def test_pfaffian_matches_cofactor_and_transforms(rng):
    for d in (2, 4, 6, 8):
        a = antisym(rng, d, True)
        assert abs(pfaffian(a) - pfaffian_cofactor(a)) < 1e-10
        b = rng.standard_normal((d, d))
        assert np.isclose(pfaffian(b @ a @ b.T), np.linalg.det(b) * pfaffian(a))


def test_kernel_implementations_agree(rng):
    impls = kernels.implementations()
    stack = np.array([antisym(rng, 6, True) for _ in range(5)])
    # the kernels work in place
    results = [np.asarray(mod.pfaffian_batch(stack.copy())) for mod in impls.values()]
    for r in results[1:]:
        assert np.allclose(r, results[0], atol=1e-12)
    single = [mod.pfaffian_ltl(stack[0].copy()) for mod in impls.values()]
    assert np.allclose(single, pfaffian_cofactor(stack[0]))


def test_minor_sum_against_bruteforce(rng):
    for d in (2, 4, 6):
        a, b = antisym(rng, d, True), antisym(rng, d, True)
        c = rng.standard_normal((d, d))
        assert np.allclose(minor_sum_coefficients(a, b, c), minor_sum_bruteforce(a, b, c), atol=1e-10)


def test_minor_sum_identity_counts_subsets():
    d = 4
    j = np.zeros((d, d))
    for i in range(0, d, 2):
        j[i, i + 1], j[i + 1, i] = 1, -1
    out = minor_sum_coefficients(j, j, np.eye(d))
    # Pf(A_S) Pf(B_S) is 1 exactly for unions of blocks, so the even coefficients count them
    assert np.allclose(out, [1, 0, 2, 0, 1], atol=1e-12)


def test_haar_sample_orthogonal_and_both_parities():
    rng = np.random.default_rng(0)
    parities = set()
    for _ in range(40):
        q = haar_sample(2, rng)
        assert np.allclose(q.matrix @ q.matrix.T, np.eye(4))
        parities.add(q.parity)
    assert parities == {-1, 1}


def test_haar_first_moment_vanishes():
    rng = np.random.default_rng(3)
    mean = np.mean([haar_sample(2, rng).matrix for _ in range(4000)], axis=0)
    assert np.max(np.abs(mean)) < 0.06


def test_orthogonal_element_rejects_non_orthogonal():
    with pytest.raises(ValueError):
        OrthogonalElement(np.ones((2, 2)))
    with pytest.raises(ValueError):
        OrthogonalElement(np.eye(3))
    with pytest.raises(ValueError):
        OrthogonalElement(np.eye(2), parity=-1)


def test_plane_rotation_convention():
    g = plane_rotation(4, 2, 0.3)
    e2 = np.eye(4)[:, 1]
    assert np.allclose(g @ e2, [0, np.cos(0.3), np.sin(0.3), 0])


@given(st.integers(1, 4), st.integers(0, 2 ** 31))
@settings(max_examples=30, deadline=None)
def test_givens_round_trip(n, seed):
    q = haar_sample(n, np.random.default_rng(seed))
    fac = givens_decompose(q)
    assert len(fac.layers) == n * (2 * n - 1)
    assert fac.parity == q.parity
    assert fac.reconstruct().allclose(q, 1e-10)


def test_givens_identity_has_zero_angles():
    fac = givens_decompose(OrthogonalElement.identity(3))
    assert all(t == 0.0 for _, t in fac.layers)


def test_inverse_and_product():
    rng = np.random.default_rng(5)
    a, b = haar_sample(2, rng), haar_sample(2, rng)
    assert (a @ a.inverse()).allclose(OrthogonalElement.identity(2))
    assert (a @ b).parity == a.parity * b.parity


def test_pure_python_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    code = ("from matchbench import kernels, linalg; import numpy as np; "
            "a = np.array([[0, 1, 2, 3], [-1, 0, 4, 5], [-2, -4, 0, 6], [-3, -5, -6, 0.0]]); "
            "print(kernels.BACKEND, round(float(linalg.pfaffian(a)), 9))")
    env = dict(os.environ, MATCHBENCH_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "8.0"]
