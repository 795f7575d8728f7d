"""Majorana operators, Pauli strings and the protocol's normalisation constants.

Majorana modes are 1-based: for qubit ``j`` (1..n),
``gamma_{2j-1} = Z_1...Z_{j-1} X_j`` and ``gamma_{2j} = Z_1...Z_{j-1} Y_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# (a, b) -> (power of i, letter) with sigma_a sigma_b = i^power sigma_letter
_PRODUCT = {}
for _a in "IXYZ":
    _PRODUCT[("I", _a)] = (0, _a)
    _PRODUCT[(_a, "I")] = (0, _a)
    _PRODUCT[(_a, _a)] = (0, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PRODUCT[(_a, _b)] = (1, _c)
    _PRODUCT[(_b, _a)] = (3, _c)

_PHASES = (1, 1j, -1, -1j)


@dataclass(frozen=True)
class MajoranaLabel:
    """An ordered Majorana product ``gamma[S]`` on ``n`` qubits."""

    indices: tuple[int, ...]
    n: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if self.n < 1:
            raise ValueError("qubit count must be >= 1")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"indices must be strictly increasing, got {idx}")
        if idx and (idx[0] < 1 or idx[-1] > 2 * self.n):
            raise ValueError(f"indices must lie in [1, {2 * self.n}], got {idx}")

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class PauliString:
    """``i**power * letters[0] (x) letters[1] (x) ...`` with an exact phase."""

    letters: str
    power: int = 0

    def __post_init__(self):
        if set(self.letters) - set("IXYZ"):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")
        object.__setattr__(self, "power", self.power % 4)

    @property
    def phase(self) -> complex:
        return _PHASES[self.power]

    @property
    def n(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        power = self.power + other.power
        out = []
        for a, b in zip(self.letters, other.letters):
            p, c = _PRODUCT[(a, b)]
            power += p
            out.append(c)
        return PauliString("".join(out), power)

    def to_matrix(self) -> np.ndarray:
        mat = np.array([[1.0 + 0j]])
        for letter in self.letters:
            mat = np.kron(mat, _PAULI[letter])
        return self.phase * mat


def single_majorana(j: int, n: int) -> PauliString:
    """Jordan-Wigner image of ``gamma_j`` (1-based)."""
    if not 1 <= j <= 2 * n:
        raise ValueError(f"Majorana index {j} outside [1, {2 * n}]")
    q = (j - 1) // 2
    letter = "X" if j % 2 else "Y"
    return PauliString("Z" * q + letter + "I" * (n - q - 1))


def majorana_to_pauli(label: MajoranaLabel) -> PauliString:
    out = PauliString("I" * label.n)
    for j in label.indices:
        out = out * single_majorana(j, label.n)
    return out


@lru_cache(maxsize=None)
def majorana_matrix(indices: tuple[int, ...], n: int) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of ``gamma[S]`` (cached, read-only)."""
    mat = majorana_to_pauli(MajoranaLabel(indices, n)).to_matrix()
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=None)
def majorana_subsets(n: int) -> tuple[tuple[int, ...], ...]:
    """All subsets of ``[1, 2n]`` ordered by size, then lexicographically."""
    modes = range(1, 2 * n + 1)
    return tuple(S for k in range(2 * n + 1) for S in combinations(modes, k))


@dataclass(frozen=True)
class SpamMatrix:
    entries: np.ndarray
    label: str


def spam_matrix(x) -> SpamMatrix:
    """Block-diagonal ``M_x`` with ``j``-th block ``(-1)^{x_j} [[0, 1], [-1, 0]]``."""
    bits = _bits(x)
    n = len(bits)
    m = np.zeros((2 * n, 2 * n))
    for j, b in enumerate(bits):
        s = -1.0 if b else 1.0
        m[2 * j, 2 * j + 1] = s
        m[2 * j + 1, 2 * j] = -s
    m.setflags(write=False)
    return SpamMatrix(m, "".join(str(b) for b in bits))


@dataclass(frozen=True)
class NormalizationTable:
    n: int
    values: tuple[Fraction, ...]

    def __getitem__(self, k):
        return self.values[k]

    def as_floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])


@lru_cache(maxsize=None)
def normalizations(n: int, basis: str = "Z") -> NormalizationTable:
    """Exact normalisation constants ``N_k`` for ``k = 0..2n``.

    Z basis: ``N_k = 2^-n C(n, floor(k/2))^2 / C(2n, k)``.

    X basis, odd ``k``: ``N_k = 2^-n C(n-1, (k-1)/2)^2 / C(2n, k)``. The X-type
    Majorana products of odd degree are ``gamma_1`` times ``(k-1)/2`` of the
    ``n - 1`` adjacent pairs ``gamma_{2i} gamma_{2i+1}``. Even ``k`` keeps the Z-basis
    constant; those settings have reduced or zero visibility.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if basis not in ("Z", "X"):
        raise ValueError(f"basis must be 'Z' or 'X', got {basis!r}")
    vals = []
    for k in range(2 * n + 1):
        top = n - 1 if (basis == "X" and k % 2) else n
        vals.append(Fraction(comb(top, k // 2) ** 2, 2 ** n * comb(2 * n, k)))
    return NormalizationTable(n, tuple(vals))


def subspace_dimension(n: int, k: int) -> int:
    if not 0 <= k <= 2 * n:
        raise ValueError(f"k must be in [0, {2 * n}]")
    return comb(2 * n, k)


def _bits(x) -> tuple[int, ...]:
    if isinstance(x, str):
        if set(x) - set("01"):
            raise ValueError(f"invalid bitstring {x!r}")
        return tuple(int(c) for c in x)
    return tuple(int(b) & 1 for b in x)


def bits_to_index(bits) -> int:
    """Big-endian: qubit 1 is the most significant bit."""
    out = 0
    for b in _bits(bits):
        out = (out << 1) | b
    return out


def index_to_bits(index: int, n: int) -> str:
    return format(index, f"0{n}b")
