"""Dense (statevector / density-matrix / superoperator) backend and exact channel quantities.

Superoperators are expressed in the orthonormal basis ``{2^{-n/2} gamma[S]}``
with ``S`` running over :func:`majorana_subsets` (size-major order), so each
projector ``P_k`` is a 0/1 diagonal.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np

from .compiler import GateCircuit, apply_local, circuit_unitary, compile_element, gate_matrix
from .fitting import favg_from_lambdas  # noqa: F401  (re-exported)
from .linalg import OrthogonalElement
from .majorana import majorana_matrix, majorana_subsets, index_to_bits
from .noise import (DenseChannel, GateDependent, GaussianB, NoNoise,
                    amplitude_damping_kraus)


class BackendError(RuntimeError):
    """Requested operation is not supported by the chosen backend."""


class DenseLimitError(BackendError):
    pass


@dataclass(frozen=True)
class DenseLimits:
    statevector: int = 10
    channel: int = 6


# -- Majorana operator basis -------------------------------------------------

@lru_cache(maxsize=8)
def majorana_basis(n: int) -> np.ndarray:
    """``4^n x 4^n`` unitary whose columns are row-major ``vec(2^{-n/2} gamma[S])``."""
    subsets = majorana_subsets(n)
    scale = 2.0 ** (-n / 2)
    t = np.empty((4 ** n, len(subsets)), dtype=complex)
    for col, s in enumerate(subsets):
        t[:, col] = scale * majorana_matrix(s, n).ravel()
    err = np.max(np.abs(t.conj().T @ t - np.eye(t.shape[1])))
    if err > 1e-12:
        raise AssertionError(f"Majorana basis is not orthonormal (error {err:.2e})")
    t.setflags(write=False)
    return t


def block_slices(n: int) -> list[slice]:
    """Index ranges of the sectors ``k = 0..2n`` in the Majorana basis."""
    out, start = [], 0
    for k in range(2 * n + 1):
        c = comb(2 * n, k)
        out.append(slice(start, start + c))
        start += c
    return out


def liouville_to_majorana(lmat: np.ndarray, n: int) -> np.ndarray:
    t = majorana_basis(n)
    return t.conj().T @ lmat @ t


def kraus_superop(kraus, n: int) -> np.ndarray:
    lmat = sum(np.kron(k, np.conj(k)) for k in kraus)
    return liouville_to_majorana(lmat, n)


def unitary_superop(u: np.ndarray) -> np.ndarray:
    n = int(np.log2(u.shape[0]))
    return liouville_to_majorana(np.kron(u, u.conj()), n)


def conjugation_superop(q: OrthogonalElement, use_xy: bool = False) -> np.ndarray:
    """``omega(Q)``: the superoperator of ``rho -> U(Q) rho U(Q)^dagger`` for the compiled circuit."""
    return unitary_superop(circuit_unitary(compile_element(q, use_xy)))


def compound_matrix(b: np.ndarray, k: int) -> np.ndarray:
    """k-th compound: entries ``det b[S', S]`` over k-subsets in lexicographic order."""
    dim = b.shape[0]
    subs = list(combinations(range(dim), k))
    if k == 0:
        return np.ones((1, 1))
    out = np.empty((len(subs), len(subs)))
    for r, sp in enumerate(subs):
        rows = b[list(sp)]
        for c, s in enumerate(subs):
            out[r, c] = np.linalg.det(rows[:, list(s)])
    return out


def gaussian_superop(b: np.ndarray) -> np.ndarray:
    """Block-diagonal ``(+)_k wedge^k B``, the action ``gamma[S] -> sum det B[S',S] gamma[S']``."""
    b = np.asarray(b, dtype=float)
    n = b.shape[0] // 2
    out = np.zeros((4 ** n, 4 ** n))
    for k, sl in enumerate(block_slices(n)):
        out[sl, sl] = compound_matrix(b, k)
    return out


def orthogonal_superop(q: OrthogonalElement) -> np.ndarray:
    """``omega(Q)`` from minors of ``Q``, without building a circuit."""
    return gaussian_superop(q.matrix)


def channel_superop(noise, n: int) -> np.ndarray:
    if isinstance(noise, NoNoise):
        return np.eye(4 ** n)
    if isinstance(noise, DenseChannel):
        if noise.n != n:
            raise ValueError(f"channel acts on {noise.n} qubits, expected {n}")
        return kraus_superop(noise.kraus, n)
    if isinstance(noise, GaussianB):
        if noise.n != n:
            raise ValueError(f"B is {noise.B.shape[0]}-dimensional, expected {2 * n}")
        return gaussian_superop(noise.B)
    raise BackendError(f"{type(noise).__name__} has no single gate-independent superoperator")


def projector_superop(n: int, k: int) -> np.ndarray:
    if not 0 <= k <= 2 * n:
        raise ValueError(f"k must be in [0, {2 * n}]")
    diag = np.zeros(4 ** n)
    diag[block_slices(n)[k]] = 1.0
    return np.diag(diag)


def elementary_symmetric(values) -> np.ndarray:
    """``e_0..e_N`` of ``values`` from characteristic-polynomial coefficients."""
    coeffs = np.poly(np.asarray(values))
    return np.real_if_close(coeffs * (-1.0) ** np.arange(len(coeffs)))


def lambda_exact(noise, n: int, k: int) -> float:
    """Majorana fidelity ``tr(P_k Lambda) / C(2n, k)``."""
    if not 0 <= k <= 2 * n:
        raise ValueError(f"k must be in [0, {2 * n}]")
    if isinstance(noise, GateDependent):
        raise BackendError("gate-dependent noise has no single lambda_k; fit the decay instead")
    if isinstance(noise, NoNoise):
        return 1.0
    if isinstance(noise, GaussianB):
        ek = elementary_symmetric(np.linalg.eigvals(noise.B))[k]
        return float(np.real(ek)) / comb(2 * n, k)
    sup = channel_superop(noise, n)
    return float(np.real(np.trace(sup[block_slices(n)[k], block_slices(n)[k]]))) / comb(2 * n, k)


def lambdas_exact(noise, n: int) -> np.ndarray:
    return np.array([lambda_exact(noise, n, k) for k in range(2 * n + 1)])


def favg_exact(noise, n: int) -> float:
    """Average gate fidelity ``(2^-n tr(Lambda) + 1) / (2^n + 1)``."""
    sup = channel_superop(noise, n)
    if isinstance(noise, DenseChannel):
        tp = sum(k.conj().T @ k for k in noise.kraus)
        if not np.allclose(tp, np.eye(2 ** n), atol=1e-10):
            warnings.warn("channel is not trace preserving", RuntimeWarning, stacklevel=2)
    return float((2.0 ** (-n) * np.real(np.trace(sup)) + 1) / (2 ** n + 1))


# -- state evolution ----------------------------------------------------------

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def hadamard_all(n: int) -> np.ndarray:
    h = np.eye(1, dtype=complex)
    for _ in range(n):
        h = np.kron(h, _H)
    return h


def initial_state(n: int, spam: str) -> np.ndarray:
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = 1.0
    if spam == "X":
        psi = np.full(2 ** n, 2.0 ** (-n / 2), dtype=complex)
    elif spam != "Z":
        raise ValueError(f"spam basis must be 'Z' or 'X', got {spam!r}")
    return psi


def _conj_rho(rho, u):
    a = u @ rho
    return a @ u.conj().T


def _apply_kraus(rho, kraus):
    return sum(k @ rho @ k.conj().T for k in kraus)


def _apply_local_channel(rho, kraus, qubits, n):
    out = 0
    for k in kraus:
        a = apply_local(rho, k, qubits, n)
        out = out + apply_local(a.conj().T, k, qubits, n).conj().T
    return out


@lru_cache(maxsize=64)
def _mode_flip(j: int, n: int) -> np.ndarray:
    """Unitary anticommuting with ``gamma_j`` and commuting with every other mode."""
    parity = majorana_matrix(tuple(range(1, 2 * n + 1)), n)
    m = majorana_matrix((j,), n) @ parity
    m.setflags(write=False)
    return m


def _apply_gaussian(rho, b, n):
    """Unital Gaussian channel via ``B = O1 diag(s) O2``: conjugations and per-mode dephasing."""
    o1, s, o2 = np.linalg.svd(b)
    rho = _conj_rho(rho, circuit_unitary(compile_element(OrthogonalElement(o2))))
    for j, sj in enumerate(s, start=1):
        if sj < 1.0:
            f = _mode_flip(j, n)
            rho = 0.5 * (1 + sj) * rho + 0.5 * (1 - sj) * (f @ rho @ f.conj().T)
    return _conj_rho(rho, circuit_unitary(compile_element(OrthogonalElement(o1))))


def _apply_noise(rho, noise, n):
    if isinstance(noise, DenseChannel):
        return _apply_kraus(rho, noise.kraus)
    if isinstance(noise, GaussianB):
        return _apply_gaussian(rho, noise.B, n)
    return rho


def _wrap(theta):
    return (theta + np.pi) % (2 * np.pi) - np.pi


def _gate_dependent_step(rho, gate, noise: GateDependent, n):
    if noise.base is not None:
        rho = _apply_kraus(rho, noise.base.kraus)
    strength = noise.delta * abs(_wrap(gate.angle)) / np.pi
    if strength > 0:
        kr = amplitude_damping_kraus(strength)
        for q in gate.qubits:
            rho = _apply_local_channel(rho, kr, (q,), n)
    return rho


def _check_noise(noise, n):
    if isinstance(noise, (DenseChannel, GaussianB)) and noise.n != n:
        raise ValueError(f"noise acts on {noise.n} qubits, circuit has {n}")
    if isinstance(noise, GateDependent) and noise.base is not None and noise.base.n != n:
        raise ValueError(f"base channel acts on {noise.base.n} qubits, circuit has {n}")


def evolve_density(segments: Sequence[GateCircuit], noise, rho: np.ndarray) -> np.ndarray:
    """Apply each segment (one sampled element) followed by per-element noise, or per-gate noise."""
    for seg in segments:
        n = seg.n
        if noise.mode == "per_gate" or isinstance(noise, GateDependent):
            for g in seg.gates:
                rho = apply_local(rho, gate_matrix(g), g.qubits, n)
                rho = apply_local(rho.conj().T, gate_matrix(g), g.qubits, n).conj().T
                if isinstance(noise, GateDependent):
                    rho = _gate_dependent_step(rho, g, noise, n)
                else:
                    rho = _apply_noise(rho, noise, n)
        else:
            rho = _conj_rho(rho, circuit_unitary(seg))
            rho = _apply_noise(rho, noise, n)
    return rho


def run_dense(circuits, noise=None, spam: str = "Z", rng: np.random.Generator | None = None,
              shots: int | None = None, prep_noise: DenseChannel | None = None,
              meas_noise: DenseChannel | None = None, limits: DenseLimits = DenseLimits()):
    """Simulate a sequence of circuits (one per sampled element) with noise.

    Returns the Born distribution over outcomes (array indexed big-endian)
    when ``shots`` is None, otherwise a ``{bitstring: count}`` map drawn with
    ``rng``. For ``spam="X"`` the register starts in ``|+>^n`` and is measured
    in the X basis.
    """
    if isinstance(circuits, GateCircuit):
        circuits = [circuits]
    circuits = list(circuits)
    if not circuits:
        raise ValueError("at least one circuit is required")
    n = circuits[0].n
    noise = NoNoise() if noise is None else noise
    _check_noise(noise, n)
    pure = isinstance(noise, NoNoise) and prep_noise is None and meas_noise is None
    limit = limits.statevector if pure else limits.channel
    if n > limit:
        raise DenseLimitError(f"n = {n} exceeds the dense limit of {limit} qubits")
    psi = initial_state(n, spam)
    if pure:
        for seg in circuits:
            for g in seg.gates:
                psi = apply_local(psi, gate_matrix(g), g.qubits, n)
        if spam == "X":
            psi = hadamard_all(n) @ psi
        probs = np.abs(psi) ** 2
    else:
        rho = np.outer(psi, psi.conj())
        if prep_noise is not None:
            rho = _apply_kraus(rho, prep_noise.kraus)
        rho = evolve_density(circuits, noise, rho)
        if meas_noise is not None:
            rho = _apply_kraus(rho, meas_noise.kraus)
        if spam == "X":
            h = hadamard_all(n)
            rho = h @ rho @ h
        probs = np.real(np.diag(rho)).copy()
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    if shots is None:
        return probs
    if rng is None:
        raise ValueError("sampling requires a random generator")
    counts = rng.multinomial(shots, probs)
    return {index_to_bits(i, n): int(c) for i, c in enumerate(counts) if c}


# -- reference correlation function -------------------------------------------

def spam_operators(n: int, spam: str):
    """``(rho_0, [E_x])`` for the given SPAM basis."""
    psi = initial_state(n, spam)
    rho0 = np.outer(psi, psi.conj())
    basis = np.eye(2 ** n, dtype=complex)
    if spam == "X":
        basis = hadamard_all(n)
    effects = [np.outer(basis[:, i], basis[:, i].conj()) for i in range(2 ** n)]
    return rho0, effects


def alpha_dense(x: str, q: OrthogonalElement, k: int, spam: str | None = None) -> float:
    """``N_k^{-1} tr(E_x P_k(U rho_0 U^dagger))`` from dense matrices."""
    from .majorana import bits_to_index, normalizations

    n = q.n
    spam = spam or ("Z" if k % 2 == 0 else "X")
    rho0, effects = spam_operators(n, spam)
    u = circuit_unitary(compile_element(q))
    rho = u @ rho0 @ u.conj().T
    t = majorana_basis(n)
    coeffs = t.conj().T @ rho.ravel()
    proj = np.zeros_like(coeffs)
    sl = block_slices(n)[k]
    proj[sl] = coeffs[sl]
    pk_rho = (t @ proj).reshape(rho.shape)
    val = np.trace(effects[bits_to_index(x)] @ pk_rho)
    norm = normalizations(n, spam)[k]
    return 0.0 if norm == 0 else float(np.real(val)) / float(norm)
