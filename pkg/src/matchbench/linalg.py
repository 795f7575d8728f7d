"""Skew-symmetric linear algebra: Pfaffians, minor sums, Haar sampling, Givens staircases."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

ANTISYM_SILENT = 1e-12
ANTISYM_REJECT = 1e-10
ORTHO_TOL = 1e-10
ORTHO_RENORM = 1e-12


class InterpolationError(ArithmeticError):
    """Generating-function coefficients could not be recovered reliably."""


def _as_antisymmetric(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    dtype = np.float64 if np.isrealobj(a) else np.complex128
    a = a.astype(dtype, copy=False)
    if a.size == 0:
        return a
    dev = np.max(np.abs(a + a.T))
    scale = max(1.0, float(np.max(np.abs(a))))
    if dev > ANTISYM_REJECT * scale:
        raise ValueError(f"matrix is not antisymmetric (max |A + A^T| = {dev:.3e})")
    return np.ascontiguousarray(0.5 * (a - a.T))


def pfaffian(a):
    """Pfaffian of a real or complex antisymmetric matrix.

    Odd dimension gives 0 and the empty matrix gives 1. Inputs slightly off
    antisymmetry are projected onto ``(A - A^T)/2``.
    """
    a = _as_antisymmetric(a)
    if a.shape[0] == 0:
        return a.dtype.type(1)
    if a.shape[0] % 2:
        return a.dtype.type(0)
    return a.dtype.type(kernels.pfaffian_ltl(a))


def pfaffian_cofactor(a):
    """Pfaffian by recursive expansion along the first row, O(d!!).

    Used as an independent reference for small matrices only.
    """
    a = np.asarray(a)
    n = a.shape[0]
    if n == 0:
        return 1.0
    if n % 2:
        return 0.0
    total = 0
    rest = np.arange(1, n)
    for pos, j in enumerate(rest):
        if a[0, j] == 0:
            continue
        keep = np.delete(rest, pos)
        total = total + (-1) ** pos * a[0, j] * pfaffian_cofactor(a[np.ix_(keep, keep)])
    return total


def minor_sum_coefficients(a, b, c) -> np.ndarray:
    r"""Graded sums :math:`\sum_{|S|=|S'|=s} Pf(A[S]) Pf(B[S']) \det C[S,S']`.

    Returns a complex array of length ``2d + 1`` indexed by ``s``; odd entries
    are zero. With ``D = C B C^T`` the generating polynomial in ``w = z^2`` is

        g(w) = (-1)^d Pf([[A, I], [-I, -w D]]),

    which needs no inverse of ``A``. It is sampled on ``d + 1`` points of a
    circle and the coefficients are recovered with a discrete Fourier
    transform.
    """
    a = _as_antisymmetric(a)
    b = _as_antisymmetric(b)
    c = np.asarray(c)
    dim = a.shape[0]
    if dim % 2 or dim == 0 or b.shape != a.shape or c.shape != a.shape:
        raise ValueError("A, B, C must share an even, nonzero dimension")
    d = dim // 2
    dmat = c @ b @ c.T
    norm = np.linalg.norm(dmat, 2)
    radius = 1.0 / norm if norm > 0 else 1.0
    nodes = radius * np.exp(2j * np.pi * np.arange(d + 1) / (d + 1))
    eye = np.eye(dim)
    stack = np.empty((d + 1, 2 * dim, 2 * dim), dtype=np.complex128)
    stack[:, :dim, :dim] = a
    stack[:, :dim, dim:] = eye
    stack[:, dim:, :dim] = -eye
    stack[:, dim:, dim:] = -nodes[:, None, None] * dmat
    vals = (-1) ** d * kernels.pfaffian_batch(stack)
    if not np.all(np.isfinite(vals)):
        raise InterpolationError("non-finite generating-function values; inputs are ill-scaled")
    coef = np.fft.fft(vals) / (d + 1) / radius ** np.arange(d + 1)
    out = np.zeros(dim + 1, dtype=np.complex128)
    out[0::2] = coef
    return out


def minor_sum_bruteforce(a, b, c) -> np.ndarray:
    """Same as :func:`minor_sum_coefficients` by explicit subset enumeration."""
    from itertools import combinations

    a, b, c = np.asarray(a), np.asarray(b), np.asarray(c)
    dim = a.shape[0]
    out = np.zeros(dim + 1, dtype=np.complex128)
    out[0] = 1.0
    for s in range(2, dim + 1, 2):
        subsets = list(combinations(range(dim), s))
        pa = [pfaffian_cofactor(a[np.ix_(S, S)]) for S in subsets]
        pb = [pfaffian_cofactor(b[np.ix_(S, S)]) for S in subsets]
        tot = 0
        for S, x in zip(subsets, pa):
            for T, y in zip(subsets, pb):
                if x != 0 and y != 0:
                    tot += x * y * np.linalg.det(c[np.ix_(S, T)])
        out[s] = tot
    return out


@dataclass(frozen=True, eq=False)
class OrthogonalElement:
    """An element of O(2n) with its determinant sign cached as ``parity``."""

    matrix: np.ndarray
    parity: int = 0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValueError(f"expected an even-dimensional square matrix, got {m.shape}")
        drift = np.max(np.abs(m @ m.T - np.eye(m.shape[0])))
        if drift > ORTHO_TOL:
            raise ValueError(f"matrix is not orthogonal (max |Q Q^T - I| = {drift:.3e})")
        if drift > ORTHO_RENORM:
            u, _, vt = np.linalg.svd(m)
            m = u @ vt
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        sign = 1 if np.linalg.det(m) > 0 else -1
        if self.parity not in (0, sign):
            raise ValueError(f"parity {self.parity} disagrees with det sign {sign}")
        object.__setattr__(self, "parity", sign)

    @property
    def n(self) -> int:
        return self.matrix.shape[0] // 2

    @classmethod
    def identity(cls, n: int) -> "OrthogonalElement":
        return cls(np.eye(2 * n))

    def __matmul__(self, other: "OrthogonalElement") -> "OrthogonalElement":
        return OrthogonalElement(self.matrix @ other.matrix)

    def inverse(self) -> "OrthogonalElement":
        return OrthogonalElement(self.matrix.T)

    def allclose(self, other: "OrthogonalElement", atol=1e-9) -> bool:
        return np.allclose(self.matrix, other.matrix, atol=atol, rtol=0)


def last_axis_reflection(n: int) -> np.ndarray:
    f = np.eye(2 * n)
    f[-1, -1] = -1.0
    return f


def haar_sample(n: int, rng: np.random.Generator) -> OrthogonalElement:
    """Haar-random element of O(2n): sign-fixed QR of a Gaussian matrix, then a fair parity bit."""
    if n < 1:
        raise ValueError("n must be >= 1")
    g = rng.standard_normal((2 * n, 2 * n))
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, -1] = -q[:, -1]
    if rng.integers(2):
        q[:, -1] = -q[:, -1]
    return OrthogonalElement(q)


def plane_rotation(dim: int, j: int, theta: float) -> np.ndarray:
    """Rotation by ``theta`` in the 1-based ``(j, j+1)`` plane: ``e_j -> cos e_j + sin e_{j+1}``."""
    g = np.eye(dim)
    c, s = np.cos(theta), np.sin(theta)
    g[j - 1, j - 1] = c
    g[j, j] = c
    g[j - 1, j] = -s
    g[j, j - 1] = s
    return g


@dataclass(frozen=True)
class GivensFactorization:
    """Staircase factorisation ``Q = F^b (G^(1)_{N-1}...G^(1)_1)(G^(2)_{N-1}...G^(2)_2)...G^(N-1)_{N-1}``.

    ``layers`` lists ``(j, theta)`` in the written (left-to-right) product
    order; ``F`` is the last-axis reflection and ``b = 1`` iff ``parity == -1``.
    """

    n: int
    layers: tuple[tuple[int, float], ...]
    parity: int

    def rotation_matrix(self) -> np.ndarray:
        dim = 2 * self.n
        out = np.eye(dim)
        for j, theta in self.layers:
            out = out @ plane_rotation(dim, j, theta)
        return out

    def reconstruct(self) -> OrthogonalElement:
        r = self.rotation_matrix()
        if self.parity < 0:
            r = last_axis_reflection(self.n) @ r
        return OrthogonalElement(r)


def givens_decompose(q: OrthogonalElement) -> GivensFactorization:
    n = q.n
    dim = 2 * n
    m = q.matrix.copy()
    if q.parity < 0:
        m = last_axis_reflection(n) @ m
    layers = []
    for i in range(1, dim):
        w = m[:, i - 1].copy()
        group = []
        for j in range(dim - 1, i - 1, -1):
            a, b = w[j - 1], w[j]
            theta = float(np.arctan2(b, a)) if (a != 0 or b != 0) else 0.0
            w[j - 1], w[j] = np.hypot(a, b), 0.0
            group.append((j, theta))
        group.reverse()  # G_i acts first, so it sits rightmost in G_{N-1}...G_i
        factor = np.eye(dim)
        for j, theta in group:
            factor = plane_rotation(dim, j, theta) @ factor
        m = factor.T @ m
        layers.extend(reversed(group))
    layers = tuple((j, 0.0 if abs(t) < 1e-15 else t) for j, t in layers)
    return GivensFactorization(n, layers, q.parity)
