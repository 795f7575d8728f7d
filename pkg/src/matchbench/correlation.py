r"""Correlation functions ``alpha_k(x, Q)`` evaluated with Pfaffians.

The defining expression is

    alpha_k(x, Q) = N_k^{-1} tr(E_x P_k(U(Q) rho_0 U(Q)^dagger))
                  = 2^-n / N_k  sum_{|S|=|S'|=k} e_x(S') conj(e_0(S)) det Q[S', S],

with ``e_x(S) = tr(E_x gamma[S])``. For Z-basis SPAM ``e_x(S) = Pf(i M_x[S])``
so the double sum is one graded minor sum. For X-basis SPAM both the state and
the effects are mapped to ``sigma = |phi><phi|`` with
``|phi> = (I + i gamma_1)/sqrt(2) |0>`` by the rotations ``Q_x``, and the sum is
rewritten over ``W = Q_x Q Q_0^T``. ``sigma`` has moments only on even sets
inside ``[3, 2n]`` and on sets ``{2} u T`` with ``T`` even inside ``[3, 2n]``;
the odd part is isolated by bordering ``W`` with a marked first row and column.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .linalg import OrthogonalElement, minor_sum_coefficients
from .majorana import _bits, normalizations, spam_matrix


@lru_cache(maxsize=64)
def _cyclic_shift(n: int) -> np.ndarray:
    dim = 2 * n
    q = np.zeros((dim, dim))
    for i in range(dim - 1):
        q[i + 1, i] = 1.0
    q[0, dim - 1] = 1.0
    q.setflags(write=False)
    return q


def build_qx(x) -> OrthogonalElement:
    """``Q_x`` with ``U(Q_x) H^n |x> = (I + i gamma_1)/sqrt(2) |0>`` up to a phase.

    ``Q_0`` shifts every mode ``gamma_i -> gamma_{i+1}`` (and ``gamma_{2n} -> gamma_1``),
    which maps the stabilisers ``X_1, X_j X_{j+1}`` of ``|+>^n`` onto ``gamma_2, Z_{j+1}``;
    ``Q_x = Q_0 D_x`` where ``D_x`` negates both modes of every qubit with ``x_j = 1``.
    """
    bits = _bits(x)
    n = len(bits)
    d = np.ones(2 * n)
    for j, b in enumerate(bits):
        if b:
            d[2 * j:2 * j + 2] = -1.0
    return OrthogonalElement(_cyclic_shift(n) * d[None, :])


@lru_cache(maxsize=64)
def _sigma_blocks(n: int):
    even = 1j * spam_matrix("0" * n).entries
    even[:2, :2] = 0.0
    odd = even.copy()
    odd[0, 1], odd[1, 0] = 1.0, -1.0
    even.setflags(write=False)
    odd.setflags(write=False)
    return even, odd


def _scale(n: int, k: int, basis: str) -> float:
    norm = normalizations(n, basis)[k]
    return 0.0 if norm == 0 else 2.0 ** (-n) / float(norm)


def _check(n, k):
    if not 0 <= k <= 2 * n:
        raise ValueError(f"k must be in [0, {2 * n}]")


def z_basis_sums(x, q: np.ndarray) -> np.ndarray:
    """Graded sums ``sum_{|S|=|S'|=s} e_x(S') conj(e_0(S)) det Q[S', S]`` for Z-basis SPAM."""
    n = q.shape[0] // 2
    mx = spam_matrix(x).entries
    m0 = spam_matrix("0" * n).entries
    return minor_sum_coefficients(1j * mx, -1j * m0, q)


def x_basis_sums(x, q: np.ndarray, odd: bool) -> np.ndarray:
    """Same graded sums for X-basis SPAM; only the requested parity is meaningful."""
    n = q.shape[0] // 2
    w = build_qx(x).matrix @ q @ build_qx("0" * n).matrix.T
    even_b, odd_b = _sigma_blocks(n)
    if not odd:
        return minor_sum_coefficients(even_b, even_b.conj(), w)
    w1 = w.copy()
    w1[0, :] = 0.0
    w1[:, 0] = 0.0
    w0 = w1.copy()
    w1[0, 0] = 1.0
    hi = minor_sum_coefficients(odd_b, odd_b.conj(), w1)
    lo = minor_sum_coefficients(odd_b, odd_b.conj(), w0)
    out = np.zeros(2 * n + 1, dtype=complex)
    out[1::2] = (hi - lo)[2::2]
    return out


def alpha(x, q: OrthogonalElement | np.ndarray, k: int, spam: str | None = None) -> float:
    """``alpha_k(x, Q)``; the SPAM basis defaults to Z for even ``k`` and X for odd ``k``."""
    qm = q.matrix if isinstance(q, OrthogonalElement) else np.asarray(q, dtype=float)
    n = qm.shape[0] // 2
    _check(n, k)
    if len(_bits(x)) != n:
        raise ValueError(f"bitstring must have {n} bits")
    spam = spam or ("Z" if k % 2 == 0 else "X")
    if spam == "Z":
        if k % 2:
            return 0.0
        sums = z_basis_sums(x, qm)
    elif spam == "X":
        sums = x_basis_sums(x, qm, bool(k % 2))
    else:
        raise ValueError(f"spam basis must be 'Z' or 'X', got {spam!r}")
    return _scale(n, k, spam) * float(np.real(sums[k]))


def alpha_even(x, q, k: int) -> float:
    """Z-basis correlation function for even ``k``."""
    if k % 2:
        raise ValueError("alpha_even needs even k")
    return alpha(x, q, k, "Z")


def alpha_odd(x, q, k: int) -> float:
    """X-basis correlation function for odd ``k``."""
    if k % 2 == 0:
        raise ValueError("alpha_odd needs odd k")
    return alpha(x, q, k, "X")


def alpha_all(x, q, spam: str) -> np.ndarray:
    """``alpha_k`` for every ``k`` at once in the given SPAM basis."""
    qm = q.matrix if isinstance(q, OrthogonalElement) else np.asarray(q, dtype=float)
    n = qm.shape[0] // 2
    scale = np.array([_scale(n, k, spam) for k in range(2 * n + 1)])
    if spam == "Z":
        sums = z_basis_sums(x, qm)
    else:
        sums = x_basis_sums(x, qm, False) + x_basis_sums(x, qm, True)
    return scale * np.real(sums)
