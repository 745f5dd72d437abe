"""Construction of the extreme condensate states and circuits preparing them.

The geminal register encodes pair occupations: qubit q <-> orbital pair
(2q, 2q+1).  Two extreme states span the tunable family:

* ``psi_D`` -- the Dicke state with N/2 excitations, the maximal
  fermion-pair condensate (lambda_D = 1.5 for N=4, r=8).
* ``psi_G`` -- the interlayer GHZ state (|1..10..0> + |0..01..1>)/sqrt(2)
  with N/2 geminals per layer, the maximal exciton condensate
  (lambda_G = 2.0 for N=4, r=8).

Their superposition, steered by two angles, interpolates between pure pair
condensation and pure exciton condensation; the dual-condensate region sits
in between.  All reachable amplitudes live on the six weight-N/2 basis
strings, which is what the projection mitigation exploits.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .sim import Circuit, Gate, StateVector, apply_circuit, run_circuit, state_from_amplitudes, zero_state

OVERLAP_TOL = 1e-10


class SynthesisError(RuntimeError):
    """Raised when a synthesized circuit misses its target state."""


@dataclass(frozen=True)
class Representation:
    """How the qubit register maps onto the fermionic system."""

    kind: str = "bosonic"
    n_fermions: int = 4
    n_orbitals: int = 8

    def __post_init__(self):
        if self.kind not in ("bosonic", "fermionic"):
            raise ValueError(f"unknown representation kind {self.kind!r}")
        n, r = self.n_fermions, self.n_orbitals
        if r % 2 or n % 2:
            raise ValueError("n_fermions and n_orbitals must both be even")
        if not 0 < n <= r:
            raise ValueError("need 0 < n_fermions <= n_orbitals")

    @property
    def n_qubits(self) -> int:
        return self.n_orbitals // 2 if self.kind == "bosonic" else self.n_orbitals

    @property
    def n_geminals(self) -> int:
        return self.n_orbitals // 2

    @property
    def n_pairs(self) -> int:
        return self.n_fermions // 2


@dataclass(frozen=True)
class FecAngles:
    """The two preparation angles, reduced modulo 2*pi."""

    theta1: float
    theta2: float

    def __post_init__(self):
        if not (np.isfinite(self.theta1) and np.isfinite(self.theta2)):
            raise ValueError("angles must be finite")
        object.__setattr__(self, "theta1", float(self.theta1) % (2 * np.pi))
        object.__setattr__(self, "theta2", float(self.theta2) % (2 * np.pi))


@dataclass(frozen=True)
class FecTarget:
    """The two extreme condensate states and their entangled combination."""

    psi_D: StateVector
    psi_G: StateVector
    delta: float
    psi: StateVector


def _weight_strings(n: int, k: int) -> list[str]:
    out = []
    for occ in combinations(range(n), k):
        bits = ["0"] * n
        for q in occ:
            bits[q] = "1"
        out.append("".join(bits))
    return out


def dicke_support(n: int, k: int) -> list[str]:
    """All n-bit strings of Hamming weight k, in lexicographic index order."""
    return sorted(_weight_strings(n, k), key=lambda s: int(s, 2))


def layer_ghz_support(n: int, k: int) -> list[str]:
    """The two layer strings: first k geminals set, or last k geminals set."""
    if 2 * k > n:
        raise ValueError(f"layers of {k} geminals do not fit in {n} without overlap")
    top = "1" * k + "0" * (n - k)
    bottom = "0" * (n - k) + "1" * k
    return [top, bottom]


def build_psi_D(rep: Representation) -> StateVector:
    """Maximal pair condensate: Dicke state with N/2 excited geminals."""
    n, k = rep.n_geminals, rep.n_pairs
    amps = np.zeros(2**n, dtype=complex)
    for s in dicke_support(n, k):
        amps[int(s, 2)] = 1.0
    psi = state_from_amplitudes(amps)
    if rep.kind == "fermionic":
        psi = _fan_out_state(psi)
    return psi


def build_psi_G(rep: Representation) -> StateVector:
    """Maximal exciton condensate: GHZ superposition of the two layer strings."""
    n, k = rep.n_geminals, rep.n_pairs
    amps = np.zeros(2**n, dtype=complex)
    for s in layer_ghz_support(n, k):
        amps[int(s, 2)] = 1.0
    psi = state_from_amplitudes(amps)
    if rep.kind == "fermionic":
        psi = _fan_out_state(psi)
    return psi


def _fan_out_state(psi: StateVector) -> StateVector:
    """Geminal-register state -> orbital-register state (qubit q -> 2q, 2q+1)."""
    n = psi.n_qubits
    out = np.zeros(4**n, dtype=complex)
    for b in range(2**n):
        if psi.amplitudes[b] == 0:
            continue
        f = 0
        for q in range(n):
            if (b >> (n - 1 - q)) & 1:
                f |= 1 << (2 * n - 1 - 2 * q)
                f |= 1 << (2 * n - 1 - (2 * q + 1))
        out[f] = psi.amplitudes[b]
    return StateVector(2 * n, out)


def build_fec_target(rep: Representation, angles: FecAngles) -> FecTarget:
    """Entangle the two extreme condensates.

    psi = normalize( cos(theta1/2) psi_G - exp(i theta2) sin(theta1/2) psi_D )

    The sign convention puts the dual-condensate branch at theta2 = pi, where
    the superposition is the symmetric (all-positive) combination.  delta is
    twice the real overlap <psi_D|psi_G>; it equals 2/sqrt(3) for the default
    representation, so the theta2 = pi, theta1 = pi/2 member carries the
    1/sqrt(2 - |delta|) normalization of the extreme entangled form.
    """
    psi_d = build_psi_D(rep)
    psi_g = build_psi_G(rep)
    delta = 2.0 * np.real(psi_d.overlap(psi_g))
    c = np.cos(angles.theta1 / 2.0)
    s = np.sin(angles.theta1 / 2.0)
    raw = c * psi_g.amplitudes - np.exp(1j * angles.theta2) * s * psi_d.amplitudes
    psi = state_from_amplitudes(raw)
    return FecTarget(psi_D=psi_d, psi_G=psi_g, delta=float(delta), psi=psi)


# ---------------------------------------------------------------------------
# named circuit constructions


def ghz_circuit(n_qubits: int) -> Circuit:
    """Hadamard plus a CX chain: (|0...0> + |1...1>)/sqrt(2)."""
    gates = [Gate("h", 0)]
    gates += [Gate("cx", q + 1, control=q) for q in range(n_qubits - 1)]
    return Circuit(n_qubits, gates)


def layer_ghz_circuit(n_qubits: int, k: int) -> Circuit:
    """Prepare (|1^k 0^{n-k}> + |0^{n-k} 1^k>)/sqrt(2) on n qubits."""
    if 2 * k > n_qubits:
        raise ValueError("layer size too large for qubit count")
    gates = [Gate("h", 0)]
    for t in range(1, k):
        gates.append(Gate("cx", t, control=0))
    for b in range(n_qubits - k, n_qubits):
        gates.append(Gate("x", b))
        gates.append(Gate("cx", b, control=0))
    return Circuit(n_qubits, gates)


def _ccry(theta: float, c1: int, c2: int, target: int) -> list[Gate]:
    """Doubly controlled RY from the fixed gate set."""
    return [
        Gate("cry", target, control=c2, angle=theta / 2.0),
        Gate("cx", c2, control=c1),
        Gate("cry", target, control=c2, angle=-theta / 2.0),
        Gate("cx", c2, control=c1),
        Gate("cry", target, control=c1, angle=theta / 2.0),
    ]


def dicke_circuit(n_qubits: int, k: int) -> Circuit:
    """Deterministic Dicke-state staircase (split-and-cycle-shift blocks).

    Starts from |1^k 0^{n-k}> and applies the usual ladder of two- and
    three-qubit shift blocks; every block is expanded over {ry, cry, cx}.
    """
    if not 0 < k < n_qubits:
        raise ValueError("need 0 < k < n_qubits")
    gates = [Gate("x", q) for q in range(n_qubits - k, n_qubits)]

    def scs_block(h: int, weight: int) -> list[Gate]:
        # split-and-shift acting on qubits 0..h-1; boundary qubit is h-1
        out: list[Gate] = []
        for i in range(h, h - weight, -1):
            theta = 2.0 * np.arccos(np.sqrt((h - i + 1.0) / h))
            if i == h:
                out.append(Gate("cx", h - 1, control=h - 2))
                out.append(Gate("cry", h - 2, control=h - 1, angle=theta))
                out.append(Gate("cx", h - 1, control=h - 2))
            else:
                out.append(Gate("cx", h - 1, control=i - 2))
                out += _ccry(theta, h - 1, i - 1, i - 2)
                out.append(Gate("cx", h - 1, control=i - 2))
        return out

    for h in range(n_qubits, k, -1):
        gates += scs_block(h, k)
    for h in range(k, 1, -1):
        gates += scs_block(h, h - 1)
    circuit = Circuit(n_qubits, gates)

    target = np.zeros(2**n_qubits, dtype=complex)
    for s in dicke_support(n_qubits, k):
        target[int(s, 2)] = 1.0
    _check_overlap(circuit, state_from_amplitudes(target), "dicke staircase")
    return circuit


def _check_overlap(circuit: Circuit, target: StateVector, what: str) -> None:
    got = run_circuit(circuit)
    fidelity = abs(got.overlap(target))
    if fidelity < 1.0 - OVERLAP_TOL:
        raise SynthesisError(f"{what}: achieved overlap {fidelity:.12f} < 1 - 1e-10")


# ---------------------------------------------------------------------------
# generic state preparation (multiplexed-rotation disentangling)


def _mux_rotation(kind: str, controls: list[int], target: int, angles: np.ndarray) -> list[Gate]:
    """Uniformly controlled rotation, recursively expanded into {ry,rz,cx}."""
    if not controls:
        return [Gate(kind, target, angle=float(angles[0]))]
    half = len(angles) // 2
    plus = (angles[:half] + angles[half:]) / 2.0
    minus = (angles[:half] - angles[half:]) / 2.0
    inner = controls[1:]
    out = _mux_rotation(kind, inner, target, plus)
    out.append(Gate("cx", target, control=controls[0]))
    out += _mux_rotation(kind, inner, target, minus)
    out.append(Gate("cx", target, control=controls[0]))
    return out


def prepare_state(target: StateVector) -> Circuit:
    """Synthesize a circuit mapping |0...0> to the target state exactly.

    Disentangles the least significant qubit with a multiplexed RZ/RY pair,
    recurses on the remaining register, then emits the inverse sequence.
    """
    n = target.n_qubits
    psi = target.amplitudes.copy()
    undo: list[Gate] = []
    for q in range(n - 1, -1, -1):
        pairs = psi.reshape(-1, 2)
        a, b = pairs[:, 0], pairs[:, 1]
        lam = np.where((np.abs(a) > 1e-14) & (np.abs(b) > 1e-14), np.angle(a) - np.angle(b), 0.0)
        controls = list(range(q))
        if np.max(np.abs(lam)) > 1e-12:
            undo += _mux_rotation("rz", controls, q, lam)
            phase = np.exp(-0.5j * lam)
            a, b = a * phase, b * phase.conj()
        theta = -2.0 * np.arctan2(np.abs(b), np.abs(a))
        if np.max(np.abs(theta)) > 1e-12:
            undo += _mux_rotation("ry", controls, q, theta)
        c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
        psi = c * a - s * b
    # psi is now a single complex number of unit modulus: the global phase
    gates = []
    for g in reversed(undo):
        if g.kind == "cx":
            gates.append(g)
        else:
            gates.append(Gate(g.kind, g.target, control=g.control, angle=-g.angle))
    circuit = simplify_circuit(Circuit(n, gates))
    _check_overlap(circuit, target, "generic preparation")
    return circuit


def simplify_circuit(circuit: Circuit) -> Circuit:
    """Drop zero-angle rotations and cancel adjacent self-inverse pairs."""
    gates = list(circuit.gates)
    changed = True
    while changed:
        changed = False
        kept: list[Gate] = []
        for g in gates:
            if g.kind in ("ry", "rz", "cry") and abs(g.angle) < 1e-12:
                changed = True
                continue
            if kept and g.kind in ("cx", "x", "h") and kept[-1] == g:
                kept.pop()
                changed = True
                continue
            kept.append(g)
        gates = kept
    return Circuit(circuit.n_qubits, gates)


# ---------------------------------------------------------------------------
# the tunable condensate preparation


def _family_circuit_default(angles: FecAngles) -> Circuit:
    """Structured 4-qubit preparation of the entangled condensate family.

    Writes the target as (|0> phi + |1> X^3 phi)/sqrt(2) over qubit 0 and
    builds phi on qubits 1-3 with one RY/RZ pair, one CRY and CX fixups.
    """
    c = np.cos(angles.theta1 / 2.0)
    s = np.sin(angles.theta1 / 2.0)
    phase = np.exp(1j * angles.theta2)
    a = c / np.sqrt(2.0) - phase * s / np.sqrt(6.0)  # amplitude on 1100 and 0011
    b = -phase * s / np.sqrt(6.0)                    # amplitude on the other four
    nrm = np.sqrt(2.0 * abs(a) ** 2 + 4.0 * abs(b) ** 2)
    a, b = a / nrm, b / nrm

    nu = 2.0 * np.arctan2(2.0 * abs(b), np.sqrt(2.0) * abs(a))
    delta = float(np.angle(b) - np.angle(a)) if min(abs(a), abs(b)) > 1e-14 else 0.0

    gates = [Gate("ry", 1, angle=nu)]
    if abs(delta) > 1e-12:
        gates.append(Gate("rz", 1, angle=delta))
    gates += [
        Gate("cry", 2, control=1, angle=np.pi / 2.0),
        Gate("cx", 3, control=2),
        Gate("cx", 3, control=1),
        Gate("x", 1),
        Gate("cx", 2, control=1),
        Gate("cx", 3, control=1),
        Gate("x", 1),
        Gate("h", 0),
        Gate("cx", 1, control=0),
        Gate("cx", 2, control=0),
        Gate("cx", 3, control=0),
    ]
    return Circuit(4, gates)


def synthesize_circuit(rep: Representation, angles: FecAngles) -> Circuit:
    """Circuit whose output matches build_fec_target up to global phase.

    The fermionic circuit is the bosonic one (on the even orbital qubits)
    followed by one CX fan-out per geminal onto its partner orbital qubit.
    """
    target = build_fec_target(rep, angles)
    bos_rep = Representation("bosonic", rep.n_fermions, rep.n_orbitals)
    bos_target = build_fec_target(bos_rep, angles)

    n, k = rep.n_geminals, rep.n_pairs
    s = np.sin(angles.theta1 / 2.0)
    c = np.cos(angles.theta1 / 2.0)
    if abs(s) < 1e-9:
        bos = layer_ghz_circuit(n, k)
    elif abs(c) < 1e-9:
        bos = dicke_circuit(n, k)
    elif (n, k) == (4, 2):
        bos = _family_circuit_default(angles)
    else:
        bos = prepare_state(bos_target.psi)
    _check_overlap(bos, bos_target.psi, "bosonic preparation")

    if rep.kind == "bosonic":
        return bos
    remapped = []
    for g in bos.gates:
        control = None if g.control is None else 2 * g.control
        remapped.append(Gate(g.kind, 2 * g.target, control=control, angle=g.angle))
    remapped += [Gate("cx", 2 * q + 1, control=2 * q) for q in range(n)]
    circuit = Circuit(rep.n_qubits, remapped)
    _check_overlap(circuit, target.psi, "fermionic preparation")
    return circuit


# ---------------------------------------------------------------------------
# OpenQASM 2.0 export

_QASM_HEADER = """OPENQASM 2.0;
include "qelib1.inc";
gate cry(theta) a,b { ry(theta/2) b; cx a,b; ry(-theta/2) b; cx a,b; }
"""


def export_qasm(circuit: Circuit) -> str:
    """Emit OpenQASM 2.0 text; parse_qasm round-trips the gate list exactly."""
    lines = [_QASM_HEADER.rstrip("\n"), f"qreg q[{circuit.n_qubits}];"]
    for g in circuit.gates:
        if g.kind in ("x", "h"):
            lines.append(f"{g.kind} q[{g.target}];")
        elif g.kind in ("ry", "rz"):
            lines.append(f"{g.kind}({g.angle!r}) q[{g.target}];")
        elif g.kind == "cx":
            lines.append(f"cx q[{g.control}],q[{g.target}];")
        else:
            lines.append(f"cry({g.angle!r}) q[{g.control}],q[{g.target}];")
    return "\n".join(lines) + "\n"


_QASM_GATE_RE = re.compile(
    r"^(?P<kind>[a-z]+)\s*(?:\((?P<angle>[^)]+)\))?\s*"
    r"q\[(?P<q0>\d+)\]\s*(?:,\s*q\[(?P<q1>\d+)\])?\s*;$"
)


def parse_qasm(text: str) -> Circuit:
    """Parse the subset of OpenQASM 2.0 emitted by export_qasm."""
    n_qubits = None
    gates: list[Gate] = []
    for raw in text.splitlines():
        line = raw.strip()
        if (not line or line.startswith(("OPENQASM", "include", "//"))
                or line.startswith("gate ")):
            continue
        m = re.match(r"^qreg\s+q\[(\d+)\];$", line)
        if m:
            n_qubits = int(m.group(1))
            continue
        m = _QASM_GATE_RE.match(line)
        if not m:
            raise ValueError(f"cannot parse QASM line: {line!r}")
        kind = m.group("kind")
        angle = float(m.group("angle")) if m.group("angle") else None
        q0, q1 = m.group("q0"), m.group("q1")
        if q1 is None:
            gates.append(Gate(kind, int(q0), angle=angle))
        else:
            gates.append(Gate(kind, int(q1), control=int(q0), angle=angle))
    if n_qubits is None:
        raise ValueError("QASM text has no qreg declaration")
    return Circuit(n_qubits, gates)
