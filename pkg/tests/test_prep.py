import numpy as np
import pytest

from fecsim import (
    Circuit,
    FecAngles,
    Gate,
    Representation,
    build_fec_target,
    build_psi_D,
    build_psi_G,
    dicke_circuit,
    export_qasm,
    ghz_circuit,
    layer_ghz_circuit,
    parse_qasm,
    prepare_state,
    run_circuit,
    state_from_amplitudes,
    synthesize_circuit,
    zero_state,
)
from fecsim.prep import dicke_support, layer_ghz_support
from fecsim.sim import GATE_KINDS


def test_representation_validation():
    with pytest.raises(ValueError):
        Representation("bosonic", 3, 8)  # odd N
    with pytest.raises(ValueError):
        Representation("bosonic", 4, 7)  # odd r
    with pytest.raises(ValueError):
        Representation("bosonic", 10, 8)  # N > r
    with pytest.raises(ValueError):
        Representation("spin", 4, 8)
    assert Representation("fermionic").n_qubits == 8
    assert Representation().n_qubits == 4


def test_angles_reduced_mod_2pi():
    a = FecAngles(2 * np.pi + 0.5, -0.5)
    assert a.theta1 == pytest.approx(0.5)
    assert a.theta2 == pytest.approx(2 * np.pi - 0.5)
    with pytest.raises(ValueError):
        FecAngles(np.nan, 0.0)


def test_psi_d_is_dicke(rep):
    psi = build_psi_D(rep)
    nz = np.flatnonzero(np.abs(psi.amplitudes) > 1e-12)
    assert len(nz) == 6  # C(4, 2)
    strings = {format(i, "04b") for i in nz}
    assert strings == set(dicke_support(4, 2))
    assert np.allclose(psi.amplitudes[nz], 1 / np.sqrt(6), atol=1e-12)


def test_psi_g_is_interlayer_ghz(rep):
    psi = build_psi_G(rep)
    nz = np.flatnonzero(np.abs(psi.amplitudes) > 1e-12)
    strings = {format(i, "04b") for i in nz}
    assert strings == {"1100", "0011"}
    assert np.allclose(psi.amplitudes[nz], 1 / np.sqrt(2), atol=1e-12)


def test_delta_overlap(rep):
    target = build_fec_target(rep, FecAngles(1.0, 1.0))
    assert target.delta == pytest.approx(2 / np.sqrt(3), abs=1e-12)
    assert -2.0 <= target.delta <= 2.0


def test_boundary_theta1_zero_gives_psi_g(rep):
    for theta2 in (0.0, 1.3, np.pi, 5.0):
        target = build_fec_target(rep, FecAngles(0.0, theta2))
        assert abs(target.psi.overlap(target.psi_G)) == pytest.approx(1.0, abs=1e-12)


def test_boundary_theta1_pi_gives_psi_d(rep):
    for theta2 in (0.0, 2.0, np.pi):
        target = build_fec_target(rep, FecAngles(np.pi, theta2))
        assert abs(target.psi.overlap(target.psi_D)) == pytest.approx(1.0, abs=1e-12)


def test_equal_weight_member_is_symmetric_combination(rep):
    """At theta1=pi/2, theta2=pi the target is the normalized psi_G + psi_D."""
    target = build_fec_target(rep, FecAngles(np.pi / 2, np.pi))
    raw = target.psi_G.amplitudes + target.psi_D.amplitudes
    expected = raw / np.linalg.norm(raw)
    assert np.max(np.abs(target.psi.amplitudes - expected)) < 1e-12
    # the normalization is 1/sqrt(2 + delta) times the unnormalized sum
    assert np.linalg.norm(raw) == pytest.approx(np.sqrt(2 + target.delta), abs=1e-12)


def test_support_confinement(rep):
    allowed = {int(s, 2) for s in dicke_support(4, 2)} | {
        int(s, 2) for s in layer_ghz_support(4, 2)
    } | {0b0000, 0b1111}
    forbidden = [i for i in range(16) if i not in allowed]
    for t1 in np.linspace(0, np.pi, 9):
        for t2 in np.linspace(0, 2 * np.pi, 8, endpoint=False):
            psi = build_fec_target(rep, FecAngles(t1, t2)).psi
            assert np.max(np.abs(psi.amplitudes[forbidden])) < 1e-12


def test_ghz_circuit_shape():
    circ = ghz_circuit(4)
    kinds = [g.kind for g in circ.gates]
    assert kinds == ["h", "cx", "cx", "cx"]
    out = run_circuit(circ)
    assert abs(out.amplitudes[0]) == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert abs(out.amplitudes[-1]) == pytest.approx(1 / np.sqrt(2), abs=1e-12)


def test_layer_ghz_circuit(rep):
    out = run_circuit(layer_ghz_circuit(4, 2))
    assert abs(out.overlap(build_psi_G(rep))) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (3, 2), (4, 2), (5, 2), (6, 3)])
def test_dicke_circuit(n, k):
    circ = dicke_circuit(n, k)
    assert all(g.kind in GATE_KINDS for g in circ.gates)
    target = np.zeros(2**n, dtype=complex)
    for s in dicke_support(n, k):
        target[int(s, 2)] = 1.0
    target = state_from_amplitudes(target)
    assert abs(run_circuit(circ).overlap(target)) >= 1 - 1e-10


def test_prepare_state_round_trip(rng):
    for n in (1, 2, 3, 4, 5):
        for _ in range(4):
            amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
            target = state_from_amplitudes(amps)
            circ = prepare_state(target)
            assert all(g.kind in ("ry", "rz", "cx") for g in circ.gates)
            assert abs(run_circuit(circ).overlap(target)) >= 1 - 1e-10


def test_synthesize_random_angles(rep, rng):
    for _ in range(16):
        angles = FecAngles(float(rng.uniform(0, np.pi)), float(rng.uniform(0, 2 * np.pi)))
        circ = synthesize_circuit(rep, angles)
        assert all(g.kind in GATE_KINDS for g in circ.gates)
        target = build_fec_target(rep, angles).psi
        assert abs(run_circuit(circ).overlap(target)) >= 1 - 1e-10


def test_synthesize_endpoint_circuits(rep):
    ghz_like = synthesize_circuit(rep, FecAngles(0.0, 0.0))
    assert abs(run_circuit(ghz_like).overlap(build_psi_G(rep))) >= 1 - 1e-10
    dicke_like = synthesize_circuit(rep, FecAngles(np.pi, 0.3))
    assert abs(run_circuit(dicke_like).overlap(build_psi_D(rep))) >= 1 - 1e-10


def test_fermionic_adds_exactly_four_cx(rep, frep):
    for t1, t2 in [(1.1, 0.4), (2.2, np.pi), (0.0, 0.0), (np.pi, 1.0)]:
        bos = synthesize_circuit(rep, FecAngles(t1, t2))
        ferm = synthesize_circuit(frep, FecAngles(t1, t2))
        assert ferm.two_qubit_count() - bos.two_qubit_count() == 4
        assert len(ferm.gates) - len(bos.gates) == 4
        # the tail is the geminal fan-out
        tail = ferm.gates[-4:]
        assert [(g.kind, g.control, g.target) for g in tail] == [
            ("cx", 0, 1), ("cx", 2, 3), ("cx", 4, 5), ("cx", 6, 7)]


def test_fermionic_output_is_pair_locked(frep):
    for t1 in np.linspace(0.1, np.pi - 0.1, 5):
        circ = synthesize_circuit(frep, FecAngles(t1, np.pi))
        out = run_circuit(circ)
        for idx in np.flatnonzero(np.abs(out.amplitudes) > 1e-12):
            bits = format(idx, "08b")
            assert all(bits[2 * q] == bits[2 * q + 1] for q in range(4))


def test_synthesize_nondefault_rep():
    rep = Representation("bosonic", 4, 12)
    angles = FecAngles(1.2, 2.0)
    circ = synthesize_circuit(rep, angles)
    target = build_fec_target(rep, angles).psi
    assert abs(run_circuit(circ).overlap(target)) >= 1 - 1e-10


def test_qasm_empty_circuit():
    text = export_qasm(Circuit(4))
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith(("OPENQASM", "include", "gate"))]
    assert lines == ["qreg q[4];"]


def test_qasm_single_cx():
    text = export_qasm(Circuit(2, [Gate("cx", 1, control=0)]))
    assert "cx q[0],q[1];" in text.splitlines()


def test_qasm_ghz_statements():
    text = export_qasm(ghz_circuit(4))
    stmts = [ln for ln in text.splitlines() if ln.startswith(("h ", "cx "))]
    assert stmts == ["h q[0];", "cx q[0],q[1];", "cx q[1],q[2];", "cx q[2],q[3];"]


def test_qasm_round_trip(rep, rng):
    for _ in range(5):
        angles = FecAngles(float(rng.uniform(0, np.pi)), float(rng.uniform(0, 2 * np.pi)))
        circ = synthesize_circuit(rep, angles)
        assert parse_qasm(export_qasm(circ)) == circ


def test_parse_qasm_rejects_junk():
    with pytest.raises(ValueError):
        parse_qasm('OPENQASM 2.0;\nqreg q[2];\nmeasure q[0] -> c[0];\n')
