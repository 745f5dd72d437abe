"""Shot-based state reconstruction and multi-trial signature statistics.

Full-state tomography measures every per-qubit basis assignment from
{X, Y, Z} (3^n settings), estimates all Pauli expectations by averaging
over the compatible settings, inverts linearly and projects the estimate
back to a physical density matrix by eigenvalue clipping.  Trials rerun the
whole prepare-measure-reconstruct pipeline on derived random substreams so
that means and sample standard deviations mirror repeated experiments.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Mapping, NamedTuple

import numpy as np

from .mitigation import SupportSet, project_density
from .noise import DeviceModel, confusion_matrix_distribution
from .prep import FecAngles, Representation, synthesize_circuit
from .rdm import Signatures, signatures, signatures_from_matrix
from .rng import derive_stream
from .sim import (
    Circuit,
    CountsTable,
    DensityMatrix,
    Gate,
    StateVector,
    apply_circuit,
    evolve_density,
    sample_distribution,
    zero_state,
)

BASES = ("X", "Y", "Z")

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliTerm:
    """A Pauli-string observable with an optional coefficient."""

    label: str
    coefficient: complex = 1.0 + 0.0j

    def __post_init__(self):
        if set(self.label) - {"I", "X", "Y", "Z"}:
            raise ValueError(f"bad Pauli label {self.label!r}")


class PauliExpectation(NamedTuple):
    value: float
    std_error: float


def enumerate_settings(n_qubits: int) -> list[str]:
    """All 3^n per-qubit basis assignments, in deterministic product order."""
    return ["".join(t) for t in product(BASES, repeat=n_qubits)]


def measurement_circuit(setting: str) -> Circuit:
    """Basis-change rotations mapping each chosen Pauli onto Z."""
    gates: list[Gate] = []
    for q, basis in enumerate(setting):
        if basis == "X":
            gates.append(Gate("h", q))
        elif basis == "Y":
            gates.append(Gate("rz", q, angle=-np.pi / 2.0))
            gates.append(Gate("h", q))
        elif basis != "Z":
            raise ValueError(f"bad basis {basis!r}")
    return Circuit(len(setting), gates)


def setting_distribution(state: StateVector | DensityMatrix, setting: str) -> np.ndarray:
    """Outcome distribution after rotating into the measurement bases."""
    circ = measurement_circuit(setting)
    if isinstance(state, StateVector):
        return apply_circuit(circ, state).probabilities()
    return evolve_density(circ, None, state).probabilities()


def _parity_vector(n: int, positions: list[int]) -> np.ndarray:
    idx = np.arange(1 << n)
    par = np.zeros(1 << n, dtype=np.int64)
    for q in positions:
        par ^= (idx >> (n - 1 - q)) & 1
    return 1.0 - 2.0 * par


def _counts_to_probs(counts: CountsTable, n: int) -> np.ndarray:
    probs = np.zeros(1 << n)
    for outcome, c in counts.counts.items():
        probs[int(outcome, 2)] = c / counts.shots
    return probs


def expectation_from_counts(counts: CountsTable, term: PauliTerm, setting: str) -> PauliExpectation:
    """Parity estimate of a Pauli term from counts taken in one setting.

    The term must be measurable there: every non-identity position has to
    agree with the setting's basis choice.
    """
    n = len(setting)
    if len(term.label) != n:
        raise ValueError("term length does not match setting")
    positions = [q for q, p in enumerate(term.label) if p != "I"]
    for q in positions:
        if term.label[q] != setting[q]:
            raise ValueError(
                f"term {term.label} not measurable in setting {setting} (qubit {q})"
            )
    probs = _counts_to_probs(counts, n)
    value = float(_parity_vector(n, positions) @ probs)
    std_error = float(np.sqrt(max(0.0, 1.0 - value**2) / counts.shots))
    return PauliExpectation(value, std_error)


def _pauli_matrix(label: str) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for ch in label:
        out = np.kron(out, _PAULI_1Q[ch])
    return out


def linear_inversion(counts_by_setting: Mapping[str, CountsTable | np.ndarray]) -> np.ndarray:
    """Raw linear-inversion estimate 2^-n sum_P <P> P (Hermitian, unit trace).

    Each Pauli expectation is averaged over every compatible setting.  The
    result may have small negative eigenvalues at finite shots; it is the
    unbiased estimator that trial statistics are computed from.  Values may
    be CountsTable (sampled) or plain outcome distributions (the
    infinite-shot limit).
    """
    settings = sorted(counts_by_setting)
    if not settings:
        raise ValueError("no measurement settings supplied")
    n = len(settings[0])
    expected = enumerate_settings(n)
    missing = sorted(set(expected) - set(settings))
    if missing:
        preview = ", ".join(missing[:8]) + ("..." if len(missing) > 8 else "")
        raise ValueError(f"tomography requires all {len(expected)} settings; missing {preview}")

    probs: dict[str, np.ndarray] = {}
    shots_seen = set()
    for s in expected:
        data = counts_by_setting[s]
        if isinstance(data, CountsTable):
            shots_seen.add(data.shots)
            probs[s] = _counts_to_probs(data, n)
        else:
            probs[s] = np.asarray(data, dtype=float)
    if len(shots_seen) > 1:
        raise ValueError(f"settings have unequal shot counts: {sorted(shots_seen)}")

    dim = 1 << n
    rho = np.eye(dim, dtype=complex)  # the identity label contributes 1
    for label_tuple in product("IXYZ", repeat=n):
        label = "".join(label_tuple)
        positions = [q for q, p in enumerate(label) if p != "I"]
        if not positions:
            continue
        parity = _parity_vector(n, positions)
        options = [(label[q],) if label[q] != "I" else BASES for q in range(n)]
        acc = 0.0
        count = 0
        for s_tuple in product(*options):
            acc += float(parity @ probs["".join(s_tuple)])
            count += 1
        rho += (acc / count) * _pauli_matrix(label)
    return rho / dim


def clip_to_density(raw: np.ndarray) -> DensityMatrix:
    """Projection to the nearest PSD unit-trace matrix (clip, renormalize)."""
    n = int(round(np.log2(raw.shape[0])))
    vals, vecs = np.linalg.eigh(0.5 * (raw + raw.conj().T))
    vals = np.clip(vals, 0.0, None)
    vals /= vals.sum()
    return DensityMatrix(n, (vecs * vals) @ vecs.conj().T)


def reconstruct_density(counts_by_setting: Mapping[str, CountsTable | np.ndarray]) -> DensityMatrix:
    """Linear-inversion tomography followed by a physicality projection.

    rho_hat = 2^-n sum_P <P> P over all Pauli labels, then eigenvalue
    clipping and trace renormalization.
    """
    return clip_to_density(linear_inversion(counts_by_setting))


# ---------------------------------------------------------------------------
# the prepare -> execute -> tomograph -> signatures pipeline


@dataclass(frozen=True)
class TrialStatistics:
    """Mean and sample standard deviation of signatures over trials."""

    n_trials: int
    mean_lambda_d: float
    mean_lambda_g: float
    std_lambda_d: float
    std_lambda_g: float
    trials: tuple[Signatures, ...] = ()

    def as_signatures(self) -> Signatures:
        return Signatures(
            self.mean_lambda_d, self.mean_lambda_g, self.std_lambda_d, self.std_lambda_g
        )


@dataclass(frozen=True)
class TrialOutcome:
    full: TrialStatistics
    projected: TrialStatistics | None


def _aggregate(per_trial: list[Signatures]) -> TrialStatistics:
    lam_d = np.array([s.lambda_d for s in per_trial])
    lam_g = np.array([s.lambda_g for s in per_trial])
    std_d = float(np.std(lam_d, ddof=1)) if len(per_trial) > 1 else 0.0
    std_g = float(np.std(lam_g, ddof=1)) if len(per_trial) > 1 else 0.0
    return TrialStatistics(
        len(per_trial), float(lam_d.mean()), float(lam_g.mean()), std_d, std_g, tuple(per_trial)
    )


def prepared_density(rep: Representation, angles: FecAngles, noise: DeviceModel | None) -> DensityMatrix:
    """State after running the preparation circuit under the noise model."""
    circuit = synthesize_circuit(rep, angles)
    rho0 = zero_state(rep.n_qubits).density()
    return evolve_density(circuit, None if noise is None or noise.is_noiseless() else noise, rho0)


def tomography_data(
    rho: DensityMatrix,
    shots: int | None,
    noise: DeviceModel | None,
    seed: int,
    trial_index: int,
) -> dict[str, CountsTable | np.ndarray]:
    """Measure every setting once: rotate, apply readout confusion, sample."""
    n = rho.n_qubits
    readout = noise.restricted(n) if noise is not None else None
    data: dict[str, CountsTable | np.ndarray] = {}
    for s_index, setting in enumerate(enumerate_settings(n)):
        probs = setting_distribution(rho, setting)
        if readout is not None:
            probs = confusion_matrix_distribution(probs, readout)
        if shots is None:
            data[setting] = probs
        else:
            data[setting] = sample_distribution(
                probs, n, shots, seed, trial_index, s_index
            )
    return data


def tomography_trial(
    rho: DensityMatrix,
    shots: int | None,
    noise: DeviceModel | None,
    seed: int,
    trial_index: int,
) -> DensityMatrix:
    """One tomography pass: measure every setting, then reconstruct."""
    return reconstruct_density(tomography_data(rho, shots, noise, seed, trial_index))


def run_trials(
    rep: Representation,
    angles: FecAngles,
    shots: int | None,
    n_trials: int,
    noise: DeviceModel | None,
    seed: int,
    support: SupportSet | None = None,
) -> TrialOutcome:
    """Repeat prepare/execute/tomograph/signatures with derived seeds.

    ``shots=None`` selects exact-expectation mode: no sampling anywhere, so
    every trial is identical and the standard deviations are zero.  In exact
    mode the reconstruction step is bypassed (it is the identity up to
    clipping) and signatures are taken from the noisy density directly; this
    is also the only mode run by default for the 8-qubit fermionic register,
    where sampling 3^8 settings is feasible but slow.

    Sampled full signatures come from the raw linear-inversion estimate,
    which is unbiased; the clipping projection would shift every eigenvalue
    estimate systematically by more than the trial scatter.  The mitigated
    signatures project the clipped physical estimate onto the support.
    """
    if n_trials < 2:
        raise ValueError("need n_trials >= 2 for sample statistics")
    rho = prepared_density(rep, angles, noise)

    full: list[Signatures] = []
    projected: list[Signatures] = []
    if shots is None:
        sig = signatures(rho, rep)
        sig_proj = signatures(project_density(rho, support), rep) if support else None
        full = [sig] * n_trials
        projected = [sig_proj] * n_trials if sig_proj else []
    else:
        for t in range(n_trials):
            raw = linear_inversion(tomography_data(rho, shots, noise, seed, t))
            full.append(signatures_from_matrix(raw, rep))
            if support is not None:
                rho_hat = clip_to_density(raw)
                projected.append(signatures(project_density(rho_hat, support), rep))
    return TrialOutcome(
        full=_aggregate(full),
        projected=_aggregate(projected) if projected else None,
    )


# ---------------------------------------------------------------------------
# file formats


def save_counts(counts: CountsTable, setting: str, path: str | Path) -> None:
    """One line per outcome: "bitstring count", after a shots/setting header."""
    lines = [f"# shots={counts.shots} setting={setting}"]
    for outcome in sorted(counts.counts):
        lines.append(f"{outcome} {counts.counts[outcome]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_counts(path: str | Path) -> tuple[CountsTable, str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("# shots="):
        raise ValueError("counts file must start with '# shots=<int> setting=<bases>'")
    head = lines[0][2:].split()
    shots = int(head[0].split("=", 1)[1])
    setting = head[1].split("=", 1)[1]
    counts: dict[str, int] = {}
    for ln in lines[1:]:
        if not ln.strip() or ln.startswith("#"):
            continue
        bits, num = ln.split()
        counts[bits] = int(num)
    return CountsTable(shots, counts), setting


def save_trials_csv(stats: TrialStatistics, path: str | Path) -> None:
    """Per-trial export with columns: trial, lambda_D, lambda_G."""
    lines = ["trial,lambda_D,lambda_G"]
    for t, sig in enumerate(stats.trials):
        lines.append(f"{t},{sig.lambda_d!r},{sig.lambda_g!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
