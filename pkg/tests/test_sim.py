import numpy as np
import pytest

from fecsim import (
    Circuit,
    CountsTable,
    DensityMatrix,
    Gate,
    StateVector,
    apply_circuit,
    basis_state,
    evolve_density,
    run_circuit,
    sample_counts,
    zero_state,
)
from fecsim.noise import DeviceModel, noiseless_model
from fecsim.prep import ghz_circuit
from fecsim.sim import reduced_density


def test_ry_pi_flips_zero_to_one():
    out = apply_circuit(Circuit(1, [Gate("ry", 0, angle=np.pi)]), zero_state(1))
    assert abs(out.amplitudes[1]) == pytest.approx(1.0, abs=1e-12)


def test_cx_truth_table():
    out = apply_circuit(Circuit(2, [Gate("cx", 1, control=0)]), basis_state(2, "10"))
    assert abs(out.amplitudes[0b11]) == pytest.approx(1.0, abs=1e-12)
    # control clear: nothing happens
    out = apply_circuit(Circuit(2, [Gate("cx", 1, control=0)]), basis_state(2, "01"))
    assert abs(out.amplitudes[0b01]) == pytest.approx(1.0, abs=1e-12)


def test_reversed_control_order():
    out = apply_circuit(Circuit(2, [Gate("cx", 0, control=1)]), basis_state(2, "01"))
    assert abs(out.amplitudes[0b11]) == pytest.approx(1.0, abs=1e-12)


def test_ghz_construction():
    out = run_circuit(ghz_circuit(4))
    expected = np.zeros(16)
    expected[0] = expected[15] = 1 / np.sqrt(2)
    assert np.allclose(out.amplitudes, expected, atol=1e-12)


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("cz", 0)
    with pytest.raises(ValueError):
        Gate("ry", 0)  # missing angle
    with pytest.raises(ValueError):
        Gate("x", 0, angle=1.0)
    with pytest.raises(ValueError):
        Gate("cx", 1)  # missing control
    with pytest.raises(ValueError):
        Gate("cx", 1, control=1)


def test_circuit_index_range():
    with pytest.raises(ValueError):
        Circuit(2, [Gate("x", 2)])


def test_apply_circuit_qubit_mismatch():
    with pytest.raises(ValueError):
        apply_circuit(Circuit(3), zero_state(2))


def test_statevector_normalization_enforced():
    with pytest.raises(ValueError):
        StateVector(1, np.array([1.0, 1.0]))


def _random_circuit(rng, n_qubits, n_gates):
    gates = []
    for _ in range(n_gates):
        kind = rng.choice(["ry", "rz", "x", "h", "cx", "cry"])
        target = int(rng.integers(n_qubits))
        if kind in ("cx", "cry"):
            control = int((target + 1 + rng.integers(n_qubits - 1)) % n_qubits)
            angle = float(rng.uniform(0, 2 * np.pi)) if kind == "cry" else None
            gates.append(Gate(kind, target, control=control, angle=angle))
        else:
            angle = float(rng.uniform(0, 2 * np.pi)) if kind in ("ry", "rz") else None
            gates.append(Gate(kind, target, angle=angle))
    return Circuit(n_qubits, gates)


def test_unitarity_1000_random_circuits(rng):
    for _ in range(1000):
        circ = _random_circuit(rng, 4, 8)
        out = apply_circuit(circ, zero_state(4))
        assert abs(np.linalg.norm(out.amplitudes) - 1.0) < 1e-12


def test_sample_counts_deterministic_state():
    counts = sample_counts(zero_state(4), 1024, seed=7)
    assert counts.counts == {"0000": 1024}


def test_sample_counts_ghz_support():
    ghz = run_circuit(ghz_circuit(4))
    counts = sample_counts(ghz, 4096, seed=3)
    assert set(counts.counts) <= {"0000", "1111"}


def test_sample_counts_seeded_determinism():
    ghz = run_circuit(ghz_circuit(4))
    a = sample_counts(ghz, 1000, seed=11)
    b = sample_counts(ghz, 1000, seed=11)
    assert a == b
    c = sample_counts(ghz, 1000, seed=12)
    assert a != c


def test_sample_counts_rejects_bad_shots():
    with pytest.raises(ValueError):
        sample_counts(zero_state(1), 0, seed=1)


def test_sampling_consistency_vs_probabilities(rng):
    """Empirical frequencies match |amplitude|^2 within 4 standard errors."""
    for trial in range(20):
        amps = rng.normal(size=16) + 1j * rng.normal(size=16)
        state = StateVector(4, amps / np.linalg.norm(amps))
        shots = 10**6
        counts = sample_counts(state, shots, seed=100 + trial)
        probs = state.probabilities()
        for idx, p in enumerate(probs):
            freq = counts.counts.get(format(idx, "04b"), 0) / shots
            se = np.sqrt(max(p * (1 - p), 1e-12) / shots)
            assert abs(freq - p) <= 4 * se + 1e-9


def test_counts_table_invariant():
    with pytest.raises(ValueError):
        CountsTable(5, {"00": 4})


def test_evolve_density_matches_statevector(rng):
    circ = _random_circuit(rng, 3, 10)
    psi = apply_circuit(circ, zero_state(3))
    rho = evolve_density(circ, None, zero_state(3).density())
    assert np.max(np.abs(rho.elements - psi.density().elements)) < 1e-10


def test_evolve_density_zero_noise_model_equals_none(rng):
    circ = _random_circuit(rng, 3, 8)
    rho_none = evolve_density(circ, None, zero_state(3).density())
    rho_zero = evolve_density(circ, noiseless_model(3), zero_state(3).density())
    assert np.max(np.abs(rho_none.elements - rho_zero.elements)) < 1e-12


def test_full_depolarizing_gives_maximally_mixed():
    model = DeviceModel("p1", 1, 1.0, 0.0, np.tile(np.eye(2), (1, 1, 1)))
    circ = Circuit(1, [Gate("ry", 0, angle=0.7)])
    rho = evolve_density(circ, model, zero_state(1).density())
    assert np.max(np.abs(rho.elements - np.eye(2) / 2)) < 1e-10


def test_channel_trace_preservation_random_models(rng):
    for _ in range(50):
        model = DeviceModel(
            "rand", 2,
            float(rng.uniform(0, 0.2)), float(rng.uniform(0, 0.2)),
            np.tile(np.eye(2), (2, 1, 1)),
            float(rng.uniform(0, 0.2)), float(rng.uniform(0, 0.2)),
        )
        circ = _random_circuit(rng, 2, 6)
        rho = evolve_density(circ, model, zero_state(2).density())
        assert abs(np.trace(rho.elements).real - 1.0) < 1e-10


def test_density_matrix_validation():
    bad = np.array([[0.6, 0.1], [0.3, 0.4]], dtype=complex)  # not Hermitian
    with pytest.raises(ValueError):
        DensityMatrix(1, bad)


def test_reduced_density_of_ghz():
    ghz = run_circuit(ghz_circuit(3))
    sub = reduced_density(ghz.density(), [0])
    assert np.allclose(sub, np.eye(2) / 2, atol=1e-12)
