"""Exact statevector and density-matrix simulation of small qubit circuits.

Basis convention used across the package: qubit 0 is the most significant
bit of the computational-basis index, so |q0 q1 ... q_{n-1}> has index
sum_q q_bit << (n-1-q).  Bitstrings are written in the same order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .rng import generator

NORM_ATOL = 1e-12
HERM_ATOL = 1e-10

ROTATION_GATES = ("ry", "rz", "cry")
ONE_QUBIT_GATES = ("ry", "rz", "x", "h")
TWO_QUBIT_GATES = ("cx", "cry")
GATE_KINDS = ONE_QUBIT_GATES + TWO_QUBIT_GATES

_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0.0], [0.0, np.exp(0.5j * theta)]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    """One gate from the fixed set {ry, rz, x, h, cx, cry}."""

    kind: str
    target: int
    control: int | None = None
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        needs_angle = self.kind in ROTATION_GATES
        if needs_angle and self.angle is None:
            raise ValueError(f"gate {self.kind!r} requires an angle")
        if not needs_angle and self.angle is not None:
            raise ValueError(f"gate {self.kind!r} takes no angle")
        needs_control = self.kind in TWO_QUBIT_GATES
        if needs_control and self.control is None:
            raise ValueError(f"gate {self.kind!r} requires a control qubit")
        if not needs_control and self.control is not None:
            raise ValueError(f"gate {self.kind!r} takes no control qubit")
        if self.control is not None and self.control == self.target:
            raise ValueError("control and target must differ")
        if self.angle is not None and not np.isfinite(self.angle):
            raise ValueError("gate angle must be finite")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target,) if self.control is None else (self.control, self.target)

    def unitary(self) -> np.ndarray:
        """Matrix on the gate's qubits; two-qubit order is (control, target)."""
        if self.kind == "ry":
            return ry_matrix(self.angle)
        if self.kind == "rz":
            return rz_matrix(self.angle)
        if self.kind == "x":
            return _X
        if self.kind == "h":
            return _H
        block = _X if self.kind == "cx" else ry_matrix(self.angle)
        u = np.eye(4, dtype=complex)
        u[2:, 2:] = block
        return u


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list over a declared qubit count."""

    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"gate qubit {q} out of range for {self.n_qubits} qubits")

    def extended(self, gates: Iterable[Gate]) -> "Circuit":
        return Circuit(self.n_qubits, self.gates + tuple(gates))

    def two_qubit_count(self) -> int:
        return sum(1 for g in self.gates if g.kind in TWO_QUBIT_GATES)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure n-qubit state; amplitudes indexed with qubit 0 as the MSB."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(f"expected {2**self.n_qubits} amplitudes, got {amps.shape}")
        if abs(np.linalg.norm(amps) - 1.0) > NORM_ATOL:
            raise ValueError(f"state not normalized: |norm - 1| = {abs(np.linalg.norm(amps) - 1.0):.3e}")

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, np.outer(self.amplitudes, self.amplitudes.conj()))


def zero_state(n_qubits: int) -> StateVector:
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def basis_state(n_qubits: int, bitstring: str) -> StateVector:
    if len(bitstring) != n_qubits or set(bitstring) - {"0", "1"}:
        raise ValueError(f"bad bitstring {bitstring!r} for {n_qubits} qubits")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[int(bitstring, 2)] = 1.0
    return StateVector(n_qubits, amps)


def state_from_amplitudes(amps: np.ndarray) -> StateVector:
    """Normalize a raw amplitude array into a StateVector."""
    amps = np.asarray(amps, dtype=complex)
    n = int(round(np.log2(amps.size)))
    if 2**n != amps.size:
        raise ValueError("amplitude length must be a power of two")
    nrm = np.linalg.norm(amps)
    if nrm == 0:
        raise ValueError("cannot normalize the zero vector")
    return StateVector(n, amps / nrm)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Mixed n-qubit state; Hermitian, unit trace, PSD up to tolerance."""

    n_qubits: int
    elements: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.elements, dtype=complex)
        object.__setattr__(self, "elements", rho)
        dim = 2**self.n_qubits
        if rho.shape != (dim, dim):
            raise ValueError(f"expected {dim}x{dim} density matrix, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > HERM_ATOL:
            raise ValueError("density matrix not Hermitian within 1e-10")
        if abs(np.trace(rho).real - 1.0) > HERM_ATOL:
            raise ValueError(f"density trace {np.trace(rho).real!r} != 1")
        if np.linalg.eigvalsh(rho).min() < -1e-8:
            raise ValueError("density matrix has eigenvalue below -1e-8")

    def probabilities(self) -> np.ndarray:
        return np.clip(np.diag(self.elements).real, 0.0, None)


@dataclass(frozen=True)
class CountsTable:
    """Measurement record: bitstring -> number of observations."""

    shots: int
    counts: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "counts", dict(self.counts))
        if any(v < 0 for v in self.counts.values()):
            raise ValueError("negative count")
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to shots")

    def n_bits(self) -> int:
        return len(next(iter(self.counts)))

    def frequencies(self) -> dict[str, float]:
        return {k: v / self.shots for k, v in self.counts.items()}


# ---------------------------------------------------------------------------
# gate application


def _apply_unitary_axes(tensor: np.ndarray, u: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    """Contract u (2^k x 2^k) onto the given axes of a (2,)*m tensor."""
    k = len(axes)
    u_t = u.reshape((2,) * (2 * k))
    tensor = np.tensordot(u_t, tensor, axes=(tuple(range(k, 2 * k)), axes))
    return np.moveaxis(tensor, tuple(range(k)), axes)


def apply_gate(state: np.ndarray, n_qubits: int, gate: Gate) -> np.ndarray:
    psi = state.reshape((2,) * n_qubits)
    psi = _apply_unitary_axes(psi, gate.unitary(), gate.qubits)
    return psi.reshape(-1)


def apply_circuit(circuit: Circuit, input_state: StateVector) -> StateVector:
    """Sequentially apply every gate of the circuit to a pure state."""
    if input_state.n_qubits != circuit.n_qubits:
        raise ValueError(
            f"circuit has {circuit.n_qubits} qubits but state has {input_state.n_qubits}"
        )
    amps = input_state.amplitudes.copy()
    for gate in circuit.gates:
        amps = apply_gate(amps, circuit.n_qubits, gate)
    return StateVector(circuit.n_qubits, amps)


def run_circuit(circuit: Circuit) -> StateVector:
    """Apply the circuit to |0...0>."""
    return apply_circuit(circuit, zero_state(circuit.n_qubits))


def sample_counts(state: StateVector, shots: int, seed: int, *stream: int) -> CountsTable:
    """Draw outcomes from |amplitude|^2; identical seeds give identical tables."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    probs = state.probabilities()
    probs = probs / probs.sum()
    rng = generator(seed, *stream)
    draws = rng.multinomial(shots, probs)
    n = state.n_qubits
    counts = {format(i, f"0{n}b"): int(c) for i, c in enumerate(draws) if c > 0}
    return CountsTable(shots, counts)


def sample_distribution(probs: np.ndarray, n_qubits: int, shots: int, seed: int, *stream: int) -> CountsTable:
    """Multinomial sample from an explicit outcome distribution."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    p = p / p.sum()
    draws = generator(seed, *stream).multinomial(shots, p)
    counts = {format(i, f"0{n_qubits}b"): int(c) for i, c in enumerate(draws) if c > 0}
    return CountsTable(shots, counts)


# ---------------------------------------------------------------------------
# density-matrix evolution


def _apply_matrix_to_density(rho_t: np.ndarray, m: np.ndarray, axes: tuple[int, ...], n: int) -> np.ndarray:
    """rho -> M rho M^dagger on the given qubit axes of a (2,)*2n tensor."""
    rho_t = _apply_unitary_axes(rho_t, m, axes)
    ket_axes = tuple(a + n for a in axes)
    return _apply_unitary_axes(rho_t, m.conj(), ket_axes)


def apply_kraus(rho: np.ndarray, n_qubits: int, kraus: Iterable[np.ndarray], qubits: tuple[int, ...]) -> np.ndarray:
    """Apply a Kraus channel acting on the given qubits to a full density matrix."""
    dim = 2**n_qubits
    rho_t = rho.reshape((2,) * (2 * n_qubits))
    out = np.zeros_like(rho_t)
    for k in kraus:
        out = out + _apply_matrix_to_density(rho_t, k, qubits, n_qubits)
    return out.reshape(dim, dim)


def evolve_density(circuit: Circuit, noise, input_rho: DensityMatrix) -> DensityMatrix:
    """Evolve a density matrix through the circuit.

    Each gate acts by unitary conjugation; when a noise model is supplied,
    the gate's CPTP channel (see noise.gate_channel) is applied after it.
    """
    if input_rho.n_qubits != circuit.n_qubits:
        raise ValueError(
            f"circuit has {circuit.n_qubits} qubits but density has {input_rho.n_qubits}"
        )
    n = circuit.n_qubits
    rho = input_rho.elements.copy()
    for gate in circuit.gates:
        rho = apply_kraus(rho, n, [gate.unitary()], gate.qubits)
        if noise is not None:
            from .noise import gate_channel  # local import to avoid a module cycle

            kraus = gate_channel(noise, gate)
            rho = apply_kraus(rho, n, kraus, gate.qubits)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    return DensityMatrix(n, rho)


def reduced_density(rho: DensityMatrix, keep: Iterable[int]) -> np.ndarray:
    """Partial trace keeping the listed qubits (in their original order)."""
    keep = sorted(set(keep))
    n = rho.n_qubits
    drop = [q for q in range(n) if q not in keep]
    t = rho.elements.reshape((2,) * (2 * n))
    for q in sorted(drop, reverse=True):
        t = np.trace(t, axis1=q, axis2=q + (t.ndim // 2))
    d = 2 ** len(keep)
    return t.reshape(d, d)
