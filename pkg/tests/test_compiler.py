import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchbench.compiler import (Gate, GateCircuit, circuit_unitary, compile_element, gate_action,
                                 gate_count, gate_matrix, induced_rotation,
                                 two_qubit_gates_per_element)
from matchbench.linalg import OrthogonalElement, haar_sample
from matchbench.majorana import majorana_matrix


def conjugation_error(c: GateCircuit, q: np.ndarray) -> float:
    n = c.n
    u = circuit_unitary(c)
    worst = 0.0
    for j in range(1, 2 * n + 1):
        lhs = u @ majorana_matrix((j,), n) @ u.conj().T
        rhs = sum(q[i - 1, j - 1] * majorana_matrix((i,), n) for i in range(1, 2 * n + 1))
        worst = max(worst, np.max(np.abs(lhs - rhs)))
    return worst


@pytest.mark.parametrize("kind,qubit", [("ZRot", 1), ("ZRot", 2), ("XXRot", 1), ("XYRot", 2),
                                        ("XFlip", 1), ("XFlip", 3)])
def test_single_gate_action_matches_conjugation(kind, qubit):
    g = Gate(kind, qubit, 0.37)
    c = GateCircuit(3, (g,))
    assert conjugation_error(c, gate_action(g, 3)) < 1e-12


@given(st.integers(1, 3), st.booleans(), st.integers(0, 2 ** 31))
@settings(max_examples=30, deadline=None)
def test_compiled_circuit_realizes_element(n, xy, seed):
    q = haar_sample(n, np.random.default_rng(seed))
    c = compile_element(q, use_xy=xy)
    assert induced_rotation(c).allclose(q, 1e-9)
    assert conjugation_error(c, q.matrix) < 1e-9


def test_xy_circuits_use_only_xy_couplings(rng):
    c = compile_element(haar_sample(3, rng), use_xy=True)
    kinds = {g.kind for g in c.gates}
    assert "XXRot" not in kinds
    assert "XYRot" in kinds


def test_gate_counts(rng):
    q = haar_sample(3, rng)
    assert gate_count(compile_element(q)) == gate_count(compile_element(q))
    full = compile_element(q, keep_zero=True)
    rot = [g for g in full.gates if g.kind != "XFlip"]
    assert len(rot) == 3 * 5
    assert two_qubit_gates_per_element(2) == 4
    assert two_qubit_gates_per_element(3) == 12


def test_identity_compiles_to_empty_circuit():
    assert compile_element(OrthogonalElement.identity(2)).gates == ()


def test_reflection_appends_flip_on_last_qubit(rng):
    q = haar_sample(2, rng)
    if q.parity > 0:
        m = q.matrix.copy()
        m[:, -1] *= -1
        q = OrthogonalElement(m)
    c = compile_element(q)
    assert c.gates[-1] == Gate("XFlip", 2)


def test_records_round_trip(rng):
    c = compile_element(haar_sample(2, rng), use_xy=True)
    back = GateCircuit.from_json(2, c.to_json())
    assert back == c
    assert c.to_records()[0].keys() == {"kind", "qubits", "angle"}


def test_bad_gates_rejected():
    with pytest.raises(ValueError):
        Gate("CNOT", 1)
    with pytest.raises(ValueError):
        Gate("ZRot", 0)
    with pytest.raises(ValueError):
        GateCircuit(2, (Gate("XXRot", 2, 0.1),))
    with pytest.raises(ValueError):
        Gate.from_record({"kind": "XXRot", "qubits": [1, 3], "angle": 0.1})


def test_gate_matrices_unitary():
    for kind in ("ZRot", "XXRot", "XYRot", "XFlip"):
        u = gate_matrix(Gate(kind, 1, 1.1))
        assert np.allclose(u @ u.conj().T, np.eye(u.shape[0]))


def test_circuit_concatenation(rng):
    a = compile_element(haar_sample(2, rng))
    b = compile_element(haar_sample(2, rng))
    ab = induced_rotation(a + b)
    assert ab.allclose(induced_rotation(b) @ induced_rotation(a))
