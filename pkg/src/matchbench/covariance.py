"""Fermionic covariance-matrix backend (Z-basis preparation and measurement only).

A Gaussian state is held as the real antisymmetric ``Gamma`` with
``tr(rho gamma_a gamma_b) = i Gamma_ab`` for ``a != b``; higher moments follow
from Wick's theorem, ``tr(rho gamma[S]) = Pf(i Gamma[S])``. The Born
probability of a computational basis string is

    p(x) = 2^-n (-1)^n Pf([[i M_x, I], [-I, i Gamma]]),

and the marginal on the first ``j`` qubits is the same expression restricted
to the first ``2j`` modes, which gives exact bit-by-bit sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compiler import GateCircuit, gate_action, induced_rotation
from .dense import BackendError
from .linalg import pfaffian
from .majorana import index_to_bits, spam_matrix
from .noise import GaussianB, NoNoise


@dataclass(frozen=True, eq=False)
class CovarianceState:
    gamma: np.ndarray

    def __post_init__(self):
        g = np.array(self.gamma, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] % 2:
            raise ValueError("covariance matrix must be square with even dimension")
        if np.max(np.abs(g + g.T)) > 1e-10:
            raise ValueError("covariance matrix must be antisymmetric")
        if np.linalg.norm(g, 2) > 1 + 1e-8:
            raise ValueError("covariance matrix must satisfy Gamma Gamma^T <= I")
        g = 0.5 * (g - g.T)
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    @property
    def n(self) -> int:
        return self.gamma.shape[0] // 2

    @classmethod
    def vacuum(cls, n: int) -> "CovarianceState":
        return cls(spam_matrix("0" * n).entries)

    def rotate(self, q: np.ndarray) -> "CovarianceState":
        return CovarianceState(q @ self.gamma @ q.T)

    def marginal(self, prefix: str) -> float:
        """Probability that the first ``len(prefix)`` qubits read ``prefix``."""
        j = len(prefix)
        if j == 0:
            return 1.0
        d = 2 * j
        big = np.zeros((2 * d, 2 * d), dtype=complex)
        big[:d, :d] = 1j * spam_matrix(prefix).entries
        big[:d, d:] = np.eye(d)
        big[d:, :d] = -np.eye(d)
        big[d:, d:] = 1j * self.gamma[:d, :d]
        val = 2.0 ** (-j) * (-1) ** j * pfaffian(big)
        return max(float(np.real(val)), 0.0)

    def probability(self, x: str) -> float:
        if len(x) != self.n:
            raise ValueError(f"bitstring length {len(x)} != {self.n}")
        return self.marginal(x)

    def probabilities(self) -> np.ndarray:
        return np.array([self.marginal(index_to_bits(i, self.n)) for i in range(2 ** self.n)])

    def sample_counts(self, shots: int, rng: np.random.Generator) -> dict[str, int]:
        """Draw ``shots`` outcomes by splitting counts over conditional marginals."""
        level = {"": (shots, 1.0)}
        for _ in range(self.n):
            nxt = {}
            for prefix, (count, p_prefix) in level.items():
                p0 = self.marginal(prefix + "0")
                c0 = 0
                if p_prefix > 0:
                    c0 = int(rng.binomial(count, min(max(p0 / p_prefix, 0.0), 1.0)))
                if c0:
                    nxt[prefix + "0"] = (c0, p0)
                if count - c0:
                    nxt[prefix + "1"] = (count - c0, max(p_prefix - p0, 0.0))
            level = nxt
        return {x: c for x, (c, _) in sorted(level.items())}


def evolve_covariance(segments, noise, state: CovarianceState) -> CovarianceState:
    """Apply each segment's induced rotation, with Gaussian noise per element or per gate."""
    noise = NoNoise() if noise is None else noise
    if not isinstance(noise, (NoNoise, GaussianB)):
        raise BackendError(f"the covariance backend cannot simulate {type(noise).__name__} noise")
    gamma = state.gamma
    for seg in segments:
        if isinstance(noise, GaussianB) and noise.mode == "per_gate":
            for g in seg.gates:
                a = noise.B @ gate_action(g, seg.n)
                gamma = a @ gamma @ a.T
        else:
            q = induced_rotation(seg).matrix
            gamma = q @ gamma @ q.T
            if isinstance(noise, GaussianB):
                gamma = noise.B @ gamma @ noise.B.T
    return CovarianceState(gamma)


def run_covariance(circuits, noise=None, rng: np.random.Generator | None = None,
                   x: str | None = None, shots: int | None = None, spam: str = "Z"):
    """Simulate from the vacuum.

    With ``x`` returns ``p(x)``; with ``shots`` returns a ``{bitstring: count}``
    map; otherwise returns one sampled bitstring.
    """
    if spam != "Z":
        raise BackendError("the covariance backend supports Z-basis SPAM only")
    if isinstance(circuits, GateCircuit):
        circuits = [circuits]
    circuits = list(circuits)
    n = circuits[0].n
    if isinstance(noise, GaussianB) and noise.n != n:
        raise ValueError(f"noise acts on {noise.n} qubits, circuit has {n}")
    state = evolve_covariance(circuits, noise, CovarianceState.vacuum(n))
    if x is not None:
        return state.probability(x)
    if rng is None:
        raise ValueError("sampling requires a random generator")
    counts = state.sample_counts(1 if shots is None else shots, rng)
    if shots is None:
        return next(iter(counts))
    return counts
