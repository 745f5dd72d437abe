"""Device noise descriptions and the channels used to emulate NISQ hardware.

A DeviceModel is a small set of knobs: uniform one- and two-qubit
depolarizing probabilities applied after every gate, per-qubit readout
confusion matrices applied to measurement outcomes, and optional amplitude
and phase damping per gate.  Four bundled presets emulate the devices whose
noise-model results the toolkit regresses against; their rates were fitted
once against the published full-signature values and then frozen.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING

import jsonschema
import numpy as np

from .rng import generator

if TYPE_CHECKING:  # pragma: no cover
    from .sim import CountsTable, Gate

_I2 = np.eye(2, dtype=complex)
_PAULIS = {
    "I": _I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True, eq=False)
class DeviceModel:
    """Per-gate noise and readout-error description of one device."""

    name: str
    n_qubits: int
    one_qubit_depolarizing: float
    two_qubit_depolarizing: float
    readout_confusion: np.ndarray  # (n_qubits, 2, 2) row-stochastic
    amplitude_damping_gamma: float = 0.0
    phase_damping_gamma: float = 0.0
    quantum_volume: int | None = None

    def __post_init__(self):
        conf = np.asarray(self.readout_confusion, dtype=float)
        object.__setattr__(self, "readout_confusion", conf)
        if conf.shape != (self.n_qubits, 2, 2):
            raise ValueError(f"readout confusion must be ({self.n_qubits}, 2, 2)")
        for p in (self.one_qubit_depolarizing, self.two_qubit_depolarizing,
                  self.amplitude_damping_gamma, self.phase_damping_gamma):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")
        if np.any(conf < 0) or np.any(conf > 1):
            raise ValueError("confusion entries must lie in [0, 1]")
        rowsum = conf.sum(axis=2)
        if np.max(np.abs(rowsum - 1.0)) > 1e-12:
            raise ValueError("confusion rows must sum to 1 within 1e-12")

    def is_noiseless(self) -> bool:
        ident = np.tile(np.eye(2), (self.n_qubits, 1, 1))
        return (
            self.one_qubit_depolarizing == 0.0
            and self.two_qubit_depolarizing == 0.0
            and self.amplitude_damping_gamma == 0.0
            and self.phase_damping_gamma == 0.0
            and np.array_equal(self.readout_confusion, ident)
        )

    def restricted(self, n_qubits: int) -> "DeviceModel":
        """The same model on the first n_qubits qubits of the register."""
        if n_qubits == self.n_qubits:
            return self
        if n_qubits > self.n_qubits:
            raise ValueError(f"model covers {self.n_qubits} qubits, register needs {n_qubits}")
        return DeviceModel(
            name=self.name,
            n_qubits=n_qubits,
            one_qubit_depolarizing=self.one_qubit_depolarizing,
            two_qubit_depolarizing=self.two_qubit_depolarizing,
            readout_confusion=self.readout_confusion[:n_qubits],
            amplitude_damping_gamma=self.amplitude_damping_gamma,
            phase_damping_gamma=self.phase_damping_gamma,
            quantum_volume=self.quantum_volume,
        )


CALIBRATION_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "n_qubits", "p1", "p2", "readout"],
    "properties": {
        "name": {"type": "string"},
        "n_qubits": {"type": "integer", "minimum": 1},
        "quantum_volume": {"type": "integer", "minimum": 1},
        "p1": {"type": "number", "minimum": 0, "maximum": 1},
        "p2": {"type": "number", "minimum": 0, "maximum": 1},
        "readout": {
            "type": "array",
            "items": {
                "type": "array",
                "minItems": 2,
                "maxItems": 2,
                "items": {
                    "type": "array",
                    "minItems": 2,
                    "maxItems": 2,
                    "items": {"type": "number", "minimum": 0, "maximum": 1},
                },
            },
        },
        "gamma_amp": {"type": "number", "minimum": 0, "maximum": 1},
        "gamma_phase": {"type": "number", "minimum": 0, "maximum": 1},
    },
}


def _model_from_dict(doc: dict) -> DeviceModel:
    try:
        jsonschema.validate(doc, CALIBRATION_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValueError(f"calibration file invalid at {path}: {exc.message}") from None
    readout = np.asarray(doc["readout"], dtype=float)
    if readout.shape[0] != doc["n_qubits"]:
        raise ValueError(
            f"calibration file invalid at readout: {readout.shape[0]} matrices "
            f"for {doc['n_qubits']} qubits"
        )
    return DeviceModel(
        name=doc["name"],
        n_qubits=doc["n_qubits"],
        one_qubit_depolarizing=float(doc["p1"]),
        two_qubit_depolarizing=float(doc["p2"]),
        readout_confusion=readout,
        amplitude_damping_gamma=float(doc.get("gamma_amp", 0.0)),
        phase_damping_gamma=float(doc.get("gamma_phase", 0.0)),
        quantum_volume=doc.get("quantum_volume"),
    )


def load_device_model(path: str | Path) -> DeviceModel:
    """Load and schema-validate a calibration file."""
    with open(path, encoding="utf-8") as fh:
        return _model_from_dict(json.load(fh))


PRESET_NAMES = ("melbourne-like", "santiago-like", "montreal-like", "mumbai-like")


def load_preset(name: str) -> DeviceModel:
    """One of the bundled device presets (see PRESET_NAMES)."""
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    text = resources.files("fecsim.presets").joinpath(f"{name}.json").read_text("utf-8")
    return _model_from_dict(json.loads(text))


def noiseless_model(n_qubits: int, name: str = "noiseless") -> DeviceModel:
    return DeviceModel(
        name=name,
        n_qubits=n_qubits,
        one_qubit_depolarizing=0.0,
        two_qubit_depolarizing=0.0,
        readout_confusion=np.tile(np.eye(2), (n_qubits, 1, 1)),
    )


# ---------------------------------------------------------------------------
# channels


def depolarizing_kraus(p: float, n_qubits: int) -> list[np.ndarray]:
    """Uniform depolarizing channel on 1 or 2 qubits."""
    if n_qubits == 1:
        ops = [_PAULIS[s] for s in "XYZ"]
        return [np.sqrt(1.0 - 3.0 * p / 4.0) * _I2] + [np.sqrt(p / 4.0) * m for m in ops]
    labels = [a + b for a in "IXYZ" for b in "IXYZ"]
    out = [np.sqrt(1.0 - 15.0 * p / 16.0) * np.eye(4, dtype=complex)]
    for lbl in labels[1:]:
        out.append(np.sqrt(p / 16.0) * np.kron(_PAULIS[lbl[0]], _PAULIS[lbl[1]]))
    return out


def amplitude_damping_kraus(gamma: float) -> list[np.ndarray]:
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return [k0, k1]


def phase_damping_kraus(gamma: float) -> list[np.ndarray]:
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    k1 = np.array([[0.0, 0.0], [0.0, np.sqrt(gamma)]], dtype=complex)
    return [k0, k1]


def compose_kraus(first: list[np.ndarray], second: list[np.ndarray]) -> list[np.ndarray]:
    """Kraus set of (second after first)."""
    return [b @ a for b in second for a in first]


def _expand_to_two(kraus: list[np.ndarray]) -> list[np.ndarray]:
    """Independent copies of a single-qubit channel on both qubits."""
    return [np.kron(a, b) for a in kraus for b in kraus]


def gate_channel(model: DeviceModel, gate: "Gate") -> list[np.ndarray]:
    """CPTP Kraus set applied after the given gate.

    Depolarizing with the arity-appropriate probability, composed with the
    optional damping channels on every involved qubit.  The identity channel
    is returned as a single identity operator.
    """
    arity = len(gate.qubits)
    p = model.one_qubit_depolarizing if arity == 1 else model.two_qubit_depolarizing
    kraus: list[np.ndarray] = [np.eye(2**arity, dtype=complex)]
    if p > 0.0:
        kraus = depolarizing_kraus(p, arity)
    for gamma, maker in (
        (model.amplitude_damping_gamma, amplitude_damping_kraus),
        (model.phase_damping_gamma, phase_damping_kraus),
    ):
        if gamma > 0.0:
            damp = maker(gamma)
            kraus = compose_kraus(kraus, damp if arity == 1 else _expand_to_two(damp))
    return kraus


def kraus_completeness_defect(kraus: list[np.ndarray]) -> float:
    """max |sum K^H K - I|; zero for a trace-preserving channel."""
    dim = kraus[0].shape[0]
    acc = sum(k.conj().T @ k for k in kraus)
    return float(np.max(np.abs(acc - np.eye(dim))))


# ---------------------------------------------------------------------------
# readout errors


def confusion_matrix_distribution(probs: np.ndarray, model: DeviceModel) -> np.ndarray:
    """Exact confusion-tensor action on an outcome distribution (no sampling)."""
    n = model.n_qubits
    p = np.asarray(probs, dtype=float).reshape((2,) * n)
    for q in range(n):
        m = model.readout_confusion[q].T  # m[observed, true]
        p = np.tensordot(m, np.moveaxis(p, q, 0), axes=([1], [0]))
        p = np.moveaxis(p, 0, q)
    return p.reshape(-1)


def apply_readout_error(counts_or_probs, model: DeviceModel, seed: int | None = None, *stream: int):
    """Perturb outcomes by per-qubit readout confusion.

    CountsTable input: every recorded shot is resampled through the product
    confusion distribution of its outcome (seeded).  Array input: the exact
    confusion tensor is applied with no sampling.
    """
    if isinstance(counts_or_probs, np.ndarray):
        return confusion_matrix_distribution(counts_or_probs, model)

    from .sim import CountsTable  # local import to avoid a module cycle

    counts: CountsTable = counts_or_probs
    n = model.n_qubits
    if counts.n_bits() != n:
        raise ValueError(f"outcomes have {counts.n_bits()} bits, model has {n} qubits")
    if seed is None:
        raise ValueError("counts-mode readout perturbation requires a seed")
    rng = generator(seed, *stream)
    out: dict[str, int] = {}
    for outcome in sorted(counts.counts):
        c = counts.counts[outcome]
        cond = np.ones(1)
        for q, bit in enumerate(outcome):
            cond = np.kron(cond, model.readout_confusion[q][int(bit)])
        draws = rng.multinomial(c, cond / cond.sum())
        for idx, d in enumerate(draws):
            if d > 0:
                key = format(idx, f"0{n}b")
                out[key] = out.get(key, 0) + int(d)
    return CountsTable(counts.shots, out)
