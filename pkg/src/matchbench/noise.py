"""Noise models and their JSON form.

``DenseChannel`` and ``GaussianB`` noise act either once after every sampled
element ``U(Q)`` (``mode="per_element"``, the gate-independent model) or after
every compiled gate (``mode="per_gate"``). ``GateDependent`` noise is always
per gate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

MODES = ("per_element", "per_gate")


class NoiseSpecError(ValueError):
    pass


@dataclass(frozen=True)
class NoNoise:
    variant = "none"
    mode = "per_element"

    def to_json(self) -> dict:
        return {"variant": "none"}


@dataclass(frozen=True, eq=False)
class DenseChannel:
    """A channel on all ``n`` qubits given by Kraus operators."""

    kraus: tuple[np.ndarray, ...]
    mode: str = "per_element"
    variant = "dense_channel"

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise NoiseSpecError("at least one Kraus operator is required")
        dim = ks[0].shape[0]
        if any(k.shape != (dim, dim) for k in ks) or dim & (dim - 1):
            raise NoiseSpecError("Kraus operators must be square with a power-of-two dimension")
        completeness = sum(k.conj().T @ k for k in ks)
        err = np.max(np.abs(completeness - np.eye(dim)))
        if err > 1e-10:
            raise NoiseSpecError(f"Kraus operators are not trace preserving (error {err:.2e})")
        if self.mode not in MODES:
            raise NoiseSpecError(f"mode must be one of {MODES}")
        object.__setattr__(self, "kraus", ks)

    @property
    def n(self) -> int:
        return int(np.log2(self.kraus[0].shape[0]))

    @cached_property
    def liouville(self) -> np.ndarray:
        """Matrix ``L`` with ``vec(Lambda(rho)) = L vec(rho)`` for row-major ``vec``."""
        return sum(np.kron(k, k.conj()) for k in self.kraus)

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "mode": self.mode,
            "kraus": [[[[float(z.real), float(z.imag)] for z in row] for row in k]
                      for k in self.kraus],
        }


@dataclass(frozen=True, eq=False)
class GaussianB:
    """Unital fermionic Gaussian channel with contraction ``B``.

    Acts on Majorana products by ``gamma[S] -> sum_{|S'|=|S|} det B[S', S] gamma[S']``
    and on covariance matrices by ``Gamma -> B Gamma B^T``. ``weights`` and
    ``rotations``, when given, record a convex decomposition ``B = sum p_i R_i``
    used to construct ``B``.
    """

    B: np.ndarray
    mode: str = "per_element"
    weights: tuple[float, ...] | None = None
    rotations: tuple[np.ndarray, ...] | None = None
    variant = "gaussian_b"

    def __post_init__(self):
        b = np.array(self.B, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] % 2:
            raise NoiseSpecError("B must be a square matrix of even dimension")
        if np.linalg.norm(b, 2) > 1 + 1e-10:
            raise NoiseSpecError("B must satisfy B B^T <= 1")
        if self.mode not in MODES:
            raise NoiseSpecError(f"mode must be one of {MODES}")
        b.setflags(write=False)
        object.__setattr__(self, "B", b)

    @classmethod
    def from_mixture(cls, weights, rotations, mode="per_element") -> "GaussianB":
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            raise NoiseSpecError("mixture weights must be nonnegative and sum to one")
        rots = tuple(np.asarray(r, dtype=float) for r in rotations)
        if len(rots) != len(w):
            raise NoiseSpecError("one rotation per weight is required")
        for r in rots:
            if np.max(np.abs(r @ r.T - np.eye(r.shape[0]))) > 1e-10:
                raise NoiseSpecError("mixture components must be orthogonal")
        b = sum(p * r for p, r in zip(w, rots))
        return cls(b, mode, tuple(float(p) for p in w), rots)

    @property
    def n(self) -> int:
        return self.B.shape[0] // 2

    def to_json(self) -> dict:
        out = {"variant": self.variant, "mode": self.mode}
        if self.weights is not None:
            out["weights"] = list(self.weights)
            out["rotations"] = [r.tolist() for r in self.rotations]
        else:
            out["B"] = self.B.tolist()
        return out


@dataclass(frozen=True, eq=False)
class GateDependent:
    """Per-gate noise: optional base channel plus amplitude damping of strength
    ``delta * |theta| / pi`` on every qubit a rotation acts on."""

    delta: float
    base: DenseChannel | None = None
    variant = "gate_dependent"
    mode = "per_gate"

    def __post_init__(self):
        if not 0 <= self.delta <= 1:
            raise NoiseSpecError("delta must lie in [0, 1]")

    def to_json(self) -> dict:
        return {"variant": self.variant, "delta": self.delta,
                "base": None if self.base is None else self.base.to_json()}


NoiseModel = NoNoise | DenseChannel | GaussianB | GateDependent


def noise_from_json(d: dict | None) -> NoiseModel:
    if d is None:
        return NoNoise()
    variant = d.get("variant")
    if variant == "none":
        return NoNoise()
    mode = d.get("mode", "per_element")
    if variant == "dense_channel":
        if "preset" in d:
            return _preset(d, mode)
        kraus = [np.array([[complex(re, im) for re, im in row] for row in k]) for k in d["kraus"]]
        return DenseChannel(tuple(kraus), mode)
    if variant == "gaussian_b":
        if "weights" in d:
            return GaussianB.from_mixture(d["weights"], d["rotations"], mode)
        return GaussianB(np.array(d["B"], dtype=float), mode)
    if variant == "gate_dependent":
        base = d.get("base")
        return GateDependent(float(d["delta"]), None if base is None else noise_from_json(base))
    raise NoiseSpecError(f"unknown noise variant {variant!r}")


def _preset(d, mode):
    name = d["preset"]
    if name == "depolarizing":
        return depolarizing(int(d["n"]), float(d["p"]), mode)
    if name == "amplitude_damping":
        return amplitude_damping_all(int(d["n"]), float(d["gamma"]), mode)
    raise NoiseSpecError(f"unknown channel preset {name!r}")


# -- channel constructors ----------------------------------------------------

_P1 = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]


def pauli_basis(n: int):
    mats = [np.eye(1, dtype=complex)]
    for _ in range(n):
        mats = [np.kron(m, p) for m in mats for p in _P1]
    return mats


def depolarizing(n: int, p: float, mode: str = "per_element") -> DenseChannel:
    """``rho -> (1 - p) rho + p tr(rho) I / 2^n``."""
    if not 0 <= p <= 1 + 1e-12:
        raise NoiseSpecError("p must lie in [0, 1]")
    paulis = pauli_basis(n)
    d2 = 4 ** n
    k0 = np.sqrt(1 - p + p / d2) * paulis[0]
    rest = [np.sqrt(p / d2) * P for P in paulis[1:]]
    return DenseChannel(tuple([k0] + rest), mode)


def amplitude_damping_kraus(gamma: float):
    return (np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex),
            np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex))


def amplitude_damping_all(n: int, gamma: float, mode: str = "per_element") -> DenseChannel:
    kraus = [np.eye(1, dtype=complex)]
    for _ in range(n):
        kraus = [np.kron(a, b) for a in kraus for b in amplitude_damping_kraus(gamma)]
    return DenseChannel(tuple(kraus), mode)


def unitary_channel(u, mode: str = "per_element") -> DenseChannel:
    return DenseChannel((np.asarray(u, dtype=complex),), mode)


def random_channel(n: int, rng: np.random.Generator, strength: float = 0.1,
                   n_kraus: int = 3, mode: str = "per_element") -> DenseChannel:
    """A random CPTP map close to the identity (Stinespring with a random isometry)."""
    d = 2 ** n
    g = (rng.standard_normal((n_kraus * d, d)) + 1j * rng.standard_normal((n_kraus * d, d)))
    g[:d] += np.eye(d) / max(strength, 1e-12)
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return DenseChannel(tuple(q[i * d:(i + 1) * d] for i in range(n_kraus)), mode)


def random_contraction(n: int, rng: np.random.Generator, low: float = 0.8, high: float = 0.99) -> np.ndarray:
    """``B = O1 diag(s) O2`` with singular values drawn from ``[low, high]``."""
    dim = 2 * n
    o1, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    o2, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    return o1 @ np.diag(rng.uniform(low, high, dim)) @ o2
