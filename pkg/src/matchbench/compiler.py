"""Translate O(2n) elements to nearest-neighbour matchgate circuits and back.

Gate conventions (pinned against dense conjugation in the tests):

=============  ==================================  ====================================
gate           unitary                             induced action on Majorana modes
=============  ==================================  ====================================
ZRot(j, t)     exp(-i t Z_j / 2)                   rotate plane (2j-1, 2j) by t
XXRot(j, t)    exp(-i t X_j X_{j+1} / 2)           rotate plane (2j, 2j+1) by t
XYRot(j, t)    exp(-i t (XX + YY)_{j,j+1} / 2)     plane (2j, 2j+1) by t, (2j-1, 2j+2) by -t
XFlip(j)       X_j                                 negate modes 2j, ..., 2n
=============  ==================================  ====================================

"rotate plane (a, b) by t" means ``e_a -> cos t e_a + sin t e_b``. With these
conventions ``XXRot(t) = XY(t/2) X_j XY(t/2) X_j`` as an operator product.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .linalg import GivensFactorization, OrthogonalElement, givens_decompose

KINDS = ("ZRot", "XXRot", "XYRot", "XFlip")


@dataclass(frozen=True)
class Gate:
    kind: str
    qubit: int
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.qubit < 1:
            raise ValueError("qubit indices are 1-based")

    @property
    def qubits(self) -> tuple[int, ...]:
        if self.kind in ("XXRot", "XYRot"):
            return (self.qubit, self.qubit + 1)
        return (self.qubit,)

    def to_record(self) -> dict:
        return {"kind": self.kind, "qubits": list(self.qubits), "angle": float(self.angle)}

    @classmethod
    def from_record(cls, rec: dict) -> "Gate":
        kind = rec["kind"]
        qubits = list(rec["qubits"])
        if kind in ("XXRot", "XYRot"):
            if len(qubits) != 2 or qubits[1] != qubits[0] + 1:
                raise ValueError(f"{kind} needs adjacent qubits (j, j+1), got {qubits}")
        elif len(qubits) != 1:
            raise ValueError(f"{kind} acts on one qubit, got {qubits}")
        return cls(kind, int(qubits[0]), float(rec.get("angle", 0.0)))


@dataclass(frozen=True)
class GateCircuit:
    """Gates applied left to right (``gates[0]`` acts first)."""

    n: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) > self.n:
                raise ValueError(f"gate {g} exceeds register of {self.n} qubits")

    def __add__(self, other: "GateCircuit") -> "GateCircuit":
        if other.n != self.n:
            raise ValueError("qubit count mismatch")
        return GateCircuit(self.n, self.gates + other.gates)

    def to_records(self) -> list[dict]:
        return [g.to_record() for g in self.gates]

    def to_json(self) -> str:
        return json.dumps(self.to_records())

    @classmethod
    def from_records(cls, n: int, records) -> "GateCircuit":
        return cls(n, tuple(Gate.from_record(r) for r in records))

    @classmethod
    def from_json(cls, n: int, text: str) -> "GateCircuit":
        return cls.from_records(n, json.loads(text))


def _xx_as_xy(j: int, theta: float) -> list[Gate]:
    return [Gate("XFlip", j), Gate("XYRot", j, theta / 2),
            Gate("XFlip", j), Gate("XYRot", j, theta / 2)]


def circuit_from_factorization(fac: GivensFactorization, use_xy: bool = False,
                               keep_zero: bool = False) -> GateCircuit:
    gates = []
    for j, theta in reversed(fac.layers):
        if theta == 0.0 and not keep_zero:
            continue
        q = (j + 1) // 2
        if j % 2:
            gates.append(Gate("ZRot", q, theta))
        elif use_xy:
            gates.extend(_xx_as_xy(q, theta))
        else:
            gates.append(Gate("XXRot", q, theta))
    if fac.parity < 0:
        gates.append(Gate("XFlip", fac.n))
    return GateCircuit(fac.n, tuple(gates))


def compile_element(q: OrthogonalElement, use_xy: bool = False, keep_zero: bool = False) -> GateCircuit:
    """Circuit whose conjugation action on the Majorana modes equals ``q``.

    Zero-angle rotations are dropped unless ``keep_zero`` is set, in which
    case all ``n(2n-1)`` staircase factors are emitted.
    """
    return circuit_from_factorization(givens_decompose(q), use_xy, keep_zero)


def _rotate_rows(m: np.ndarray, a: int, b: int, theta: float) -> None:
    """In place ``m <- G m`` for the rotation in 0-based plane (a, b)."""
    c, s = np.cos(theta), np.sin(theta)
    ra, rb = m[a].copy(), m[b].copy()
    m[a] = c * ra - s * rb
    m[b] = s * ra + c * rb


def gate_action(gate: Gate, n: int) -> np.ndarray:
    """The 2n x 2n orthogonal matrix induced by one gate."""
    m = np.eye(2 * n)
    _apply_action(m, gate)
    return m


def _apply_action(m: np.ndarray, g: Gate) -> None:
    j = g.qubit
    if g.kind == "ZRot":
        _rotate_rows(m, 2 * j - 2, 2 * j - 1, g.angle)
    elif g.kind == "XXRot":
        _rotate_rows(m, 2 * j - 1, 2 * j, g.angle)
    elif g.kind == "XYRot":
        _rotate_rows(m, 2 * j - 1, 2 * j, g.angle)
        _rotate_rows(m, 2 * j - 2, 2 * j + 1, -g.angle)
    else:
        m[2 * j - 1:] *= -1.0


def induced_rotation(c: GateCircuit) -> OrthogonalElement:
    m = np.eye(2 * c.n)
    for g in c.gates:
        _apply_action(m, g)
    return OrthogonalElement(m)


def gate_count(c: GateCircuit) -> tuple[int, int, int, int]:
    """Counts of ``(ZRot, XXRot, XYRot, XFlip)``."""
    counts = Counter(g.kind for g in c.gates)
    return tuple(counts.get(k, 0) for k in KINDS)


def two_qubit_gates_per_element(n: int, use_xy: bool = True) -> int:
    """Two-qubit gates in a generic compiled element: n(n-1) XX rotations, doubled for XY."""
    xx = n * (n - 1)
    return 2 * xx if use_xy else xx


# -- dense realisation -------------------------------------------------------

_X = np.array([[0, 1], [1, 0]], dtype=complex)


def gate_matrix(g: Gate) -> np.ndarray:
    """Local 2x2 or 4x4 unitary of a gate (qubit ``j`` is the more significant bit)."""
    t = g.angle
    if g.kind == "ZRot":
        return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
    if g.kind == "XFlip":
        return _X.copy()
    c, s = np.cos(t / 2), np.sin(t / 2)
    if g.kind == "XXRot":
        return c * np.eye(4) - 1j * s * np.kron(_X, _X)
    c, s = np.cos(t), np.sin(t)
    return np.array([[1, 0, 0, 0], [0, c, -1j * s, 0], [0, -1j * s, c, 0], [0, 0, 0, 1]],
                    dtype=complex)


def apply_local(psi: np.ndarray, mat: np.ndarray, qubits, n: int) -> np.ndarray:
    """Apply ``mat`` on ``qubits`` (1-based, adjacent and ascending) to the leading axis of ``psi``."""
    q0 = qubits[0] - 1
    k = len(qubits)
    rest = psi.shape[1:]
    t = psi.reshape((2 ** q0, 2 ** k, 2 ** (n - q0 - k)) + rest)
    t = np.einsum("ab,ibj...->iaj...", mat, t)
    return t.reshape(psi.shape)


def circuit_unitary(c: GateCircuit) -> np.ndarray:
    u = np.eye(2 ** c.n, dtype=complex)
    for g in c.gates:
        u = apply_local(u, gate_matrix(g), g.qubits, c.n)
    return u
