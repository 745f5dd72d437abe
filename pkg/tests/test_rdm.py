import io

import numpy as np
import pytest

from fecsim import (
    FecAngles,
    Representation,
    StateVector,
    basis_state,
    build_fec_target,
    build_psi_D,
    build_psi_G,
    compute_1rdm,
    compute_2rdm,
    compute_modified_g,
    largest_eigenvalue,
    qubit_to_fock,
    run_circuit,
    signatures,
)
from fecsim.oracle import jacobi_eigenvalues, oracle_modified_g, run_suite
from fecsim.prep import ghz_circuit
from fecsim.rdm import FockVector, dump_matrix, load_matrix, orbital_pairs
from fecsim.sim import state_from_amplitudes


def _fock(bits: str) -> FockVector:
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[int(bits, 2)] = 1.0
    return FockVector(len(bits), amps)


def test_qubit_to_fock_pair_mapping(rep):
    fock = qubit_to_fock(basis_state(4, "1100"), rep)
    assert abs(fock.amplitudes[0b11110000]) == pytest.approx(1.0, abs=1e-12)
    vac = qubit_to_fock(basis_state(4, "0000"), rep)
    assert abs(vac.amplitudes[0]) == pytest.approx(1.0, abs=1e-12)


def test_qubit_to_fock_linearity(rep):
    ghz = run_circuit(ghz_circuit(4))
    fock = qubit_to_fock(ghz, rep)
    assert abs(fock.amplitudes[0]) == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert abs(fock.amplitudes[-1]) == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert fock.particle_sector() is None  # mixed 0- and 8-fermion sectors


def test_qubit_to_fock_mismatch(rep):
    with pytest.raises(ValueError):
        qubit_to_fock(basis_state(3, "000"), rep)


def test_1rdm_vacuum_and_determinant():
    assert np.allclose(compute_1rdm(_fock("00000000")), 0.0, atol=1e-14)
    d = compute_1rdm(_fock("11110000"))
    assert np.allclose(d, np.diag([1, 1, 1, 1, 0, 0, 0, 0]), atol=1e-12)


def test_1rdm_trace_dicke(rep):
    fock = qubit_to_fock(build_psi_D(rep), rep)
    assert np.trace(compute_1rdm(fock)).real == pytest.approx(4.0, abs=1e-10)


def test_2rdm_vacuum_zero():
    assert np.allclose(compute_2rdm(_fock("00000000")), 0.0, atol=1e-14)


def test_2rdm_slater_lambda_one():
    two = compute_2rdm(_fock("11110000"))
    assert largest_eigenvalue(two) == pytest.approx(1.0, abs=1e-10)
    assert np.trace(two).real == pytest.approx(6.0, abs=1e-10)


def test_2rdm_dicke_lambda(rep):
    fock = qubit_to_fock(build_psi_D(rep), rep)
    assert largest_eigenvalue(compute_2rdm(fock)) == pytest.approx(1.5, abs=1e-8)


def test_2rdm_rejects_mixed_sector(rep):
    ghz = qubit_to_fock(run_circuit(ghz_circuit(4)), rep)
    with pytest.raises(ValueError):
        compute_2rdm(ghz)
    compute_2rdm(ghz, allow_mixed=True)  # opt-in path used by signatures


def test_modified_g_values(rep):
    assert np.allclose(compute_modified_g(_fock("00000000")), 0.0, atol=1e-14)
    assert largest_eigenvalue(compute_modified_g(_fock("11110000"))) == pytest.approx(1.0, abs=1e-8)
    ghz = qubit_to_fock(run_circuit(ghz_circuit(4)), rep)
    assert largest_eigenvalue(compute_modified_g(ghz)) == pytest.approx(2.0, abs=1e-8)


def test_largest_eigenvalue_basics():
    assert largest_eigenvalue(np.eye(28)) == pytest.approx(1.0, abs=1e-12)
    assert largest_eigenvalue(np.diag([3.0, 1.0, 0.0, 0.0])) == pytest.approx(3.0, abs=1e-12)
    with pytest.raises(ValueError):
        largest_eigenvalue(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_largest_eigenvalue_cross_checked_by_jacobi(rep):
    ghz = qubit_to_fock(run_circuit(ghz_circuit(4)), rep)
    g = compute_modified_g(ghz)
    fast = largest_eigenvalue(g)
    reference = float(np.max(jacobi_eigenvalues(g)))
    assert fast == pytest.approx(reference, abs=1e-9)
    assert fast == pytest.approx(2.0, abs=1e-8)


def test_signatures_extremes(rep):
    sig_g = signatures(build_psi_G(rep), rep)
    assert sig_g.lambda_g == pytest.approx(2.0, abs=1e-8)
    assert sig_g.lambda_d <= 1.0 + 1e-10
    sig_ghz = signatures(run_circuit(ghz_circuit(4)), rep)
    assert sig_ghz.lambda_g == pytest.approx(2.0, abs=1e-8)
    assert sig_ghz.lambda_d <= 1.0 + 1e-10
    sig_d = signatures(build_psi_D(rep), rep)
    assert sig_d.lambda_d == pytest.approx(1.5, abs=1e-8)


def test_signatures_density_matches_pure(rep):
    psi = build_fec_target(rep, FecAngles(1.9, 0.7)).psi
    sig_pure = signatures(psi, rep)
    sig_mixed = signatures(psi.density(), rep)
    assert sig_mixed.lambda_d == pytest.approx(sig_pure.lambda_d, abs=1e-9)
    assert sig_mixed.lambda_g == pytest.approx(sig_pure.lambda_g, abs=1e-9)


def test_signatures_fermionic_matches_bosonic(rep, frep):
    angles = FecAngles(2.0, np.pi)
    bos = signatures(build_fec_target(rep, angles).psi, rep)
    ferm = signatures(build_fec_target(frep, angles).psi, frep)
    assert ferm.lambda_d == pytest.approx(bos.lambda_d, abs=1e-9)
    assert ferm.lambda_g == pytest.approx(bos.lambda_g, abs=1e-9)


def _random_n4_state(rng) -> FockVector:
    """Random r=8 Fock vector confined to the four-fermion sector."""
    amps = np.zeros(256, dtype=complex)
    idx = [i for i in range(256) if bin(i).count("1") == 4]
    vals = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
    amps[idx] = vals / np.linalg.norm(vals)
    return FockVector(8, amps)


def test_contraction_to_1rdm(rng):
    """Summing the 2-RDM over a shared index pair gives (N-1) x 1-RDM."""
    pairs = orbital_pairs(8)
    index = {p: a for a, p in enumerate(pairs)}

    def full_element(m, i, j, k, l):
        if i == j or k == l:
            return 0.0
        s = 1.0
        if i > j:
            i, j, s = j, i, -s
        if k > l:
            k, l, s = l, k, -s
        return s * m[index[(i, j)], index[(k, l)]]

    for _ in range(50):
        psi = _random_n4_state(rng)
        two = compute_2rdm(psi)
        one = compute_1rdm(psi)
        contracted = np.zeros((8, 8), dtype=complex)
        for i in range(8):
            for k in range(8):
                contracted[i, k] = sum(full_element(two, i, j, k, j) for j in range(8))
        assert np.max(np.abs(contracted - 3.0 * one)) < 1e-8


def test_oracle_suite_agrees():
    checks = run_suite(n_random=20)
    for chk in checks:
        assert chk.passed, f"{chk.name}: {chk.detail}"


def test_pauli_like_bound_for_determinants(rep):
    """Slater determinants carry no condensation: lambda <= 1."""
    for bits in range(256):
        if bin(bits).count("1") != 4:
            continue
        psi = _fock(format(bits, "08b"))
        assert largest_eigenvalue(compute_2rdm(psi)) <= 1.0 + 1e-8
        assert largest_eigenvalue(compute_modified_g(psi)) <= 1.0 + 1e-8


def test_exciton_bound_for_product_states(rep, rng):
    """Unentangled register states cannot exceed the exciton bound."""
    for _ in range(50):
        qubits = []
        for _ in range(4):
            a = rng.normal(size=2) + 1j * rng.normal(size=2)
            qubits.append(a / np.linalg.norm(a))
        v = qubits[0]
        for q in qubits[1:]:
            v = np.kron(v, q)
        sig = signatures(state_from_amplitudes(v), rep)
        assert sig.lambda_g <= 1.0 + 1e-8


def test_matrix_dump_round_trip(rng):
    m = rng.normal(size=(6, 4)) + 1j * rng.normal(size=(6, 4))
    buf = io.StringIO()
    dump_matrix(m, buf)
    buf.seek(0)
    loaded = load_matrix(buf)
    assert np.allclose(loaded, m, atol=0)
