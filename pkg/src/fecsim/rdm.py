"""Fermionic Fock-space mapping and reduced density matrices.

Orbital ordering fixes all signs: basis state |occ> is the product of
creation operators applied in increasing orbital index, and orbital 0 is the
most significant bit of the Fock index.  The particle-particle matrix is
stored over ordered pairs i<j (dimension r(r-1)/2, trace N(N-1)/2); the
modified particle-hole matrix over index pairs (i,j) flattened as i*r+j.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import TextIO

import numpy as np

from .prep import Representation
from .sim import DensityMatrix, StateVector

_popcount_cache: dict[int, np.ndarray] = {}


def _popcount(r: int) -> np.ndarray:
    if r not in _popcount_cache:
        idx = np.arange(1 << r, dtype=np.int64)
        counts = np.zeros(1 << r, dtype=np.int64)
        for b in range(r):
            counts += (idx >> b) & 1
        _popcount_cache[r] = counts
    return _popcount_cache[r]


@dataclass(frozen=True, eq=False)
class FockVector:
    """State in the 2^r fermionic Fock space (orbital 0 = MSB)."""

    n_orbitals: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (2**self.n_orbitals,):
            raise ValueError(f"expected {2**self.n_orbitals} amplitudes")
        if abs(np.linalg.norm(amps) - 1.0) > 1e-12:
            raise ValueError("Fock vector not normalized")

    def particle_sector(self) -> int | None:
        """The particle number N if the support is a single sector, else None."""
        occ = _popcount(self.n_orbitals)
        present = np.unique(occ[np.abs(self.amplitudes) > 1e-12])
        return int(present[0]) if len(present) == 1 else None


def qubit_to_fock(state: StateVector, rep: Representation) -> FockVector:
    """Map a register state into Fock space.

    Bosonic: qubit q set means orbitals 2q and 2q+1 are both occupied; the
    paired creation operators commute, so no sign factors arise.  Fermionic:
    the occupation string carries over directly.
    """
    if state.n_qubits != rep.n_qubits:
        raise ValueError(
            f"state has {state.n_qubits} qubits, representation expects {rep.n_qubits}"
        )
    if rep.kind == "fermionic":
        return FockVector(rep.n_orbitals, state.amplitudes.copy())
    n, r = rep.n_qubits, rep.n_orbitals
    amps = np.zeros(1 << r, dtype=complex)
    idx = np.arange(1 << n)
    fock_idx = np.zeros(1 << n, dtype=np.int64)
    for q in range(n):
        bit = (idx >> (n - 1 - q)) & 1
        fock_idx |= bit << (r - 1 - 2 * q)
        fock_idx |= bit << (r - 1 - (2 * q + 1))
    amps[fock_idx] = state.amplitudes
    return FockVector(r, amps)


def _annihilate(amps: np.ndarray, r: int, orb: int) -> np.ndarray:
    """Apply a_orb with the parity sign from occupied orbitals below orb."""
    shift = r - 1 - orb
    idx = np.arange(amps.size)
    src = idx[((idx >> shift) & 1) == 1]
    out = np.zeros_like(amps)
    if src.size == 0:
        return out
    parity = _popcount(r)[src >> (shift + 1)] & 1
    out[src ^ (1 << shift)] = (1.0 - 2.0 * parity) * amps[src]
    return out


def _create(amps: np.ndarray, r: int, orb: int) -> np.ndarray:
    shift = r - 1 - orb
    idx = np.arange(amps.size)
    src = idx[((idx >> shift) & 1) == 0]
    out = np.zeros_like(amps)
    if src.size == 0:
        return out
    parity = _popcount(r)[src >> (shift + 1)] & 1
    out[src | (1 << shift)] = (1.0 - 2.0 * parity) * amps[src]
    return out


def orbital_pairs(r: int) -> list[tuple[int, int]]:
    """Ordered pairs i<j indexing the particle-particle matrix."""
    return list(combinations(range(r), 2))


def compute_1rdm(psi: FockVector) -> np.ndarray:
    """One-fermion RDM: D[i,j] = <psi| a+_i a_j |psi>."""
    r = psi.n_orbitals
    lowered = np.array([_annihilate(psi.amplitudes, r, i) for i in range(r)])
    return lowered.conj() @ lowered.T


def compute_2rdm(psi: FockVector, *, allow_mixed: bool = False) -> np.ndarray:
    """Particle-particle RDM over ordered pairs.

    2D[(i,j),(k,l)] = <psi| a+_i a+_j a_l a_k |psi>, i<j and k<l.  Built as a
    Gram matrix of the pair-annihilated vectors, so it is Hermitian and
    positive semidefinite by construction.
    """
    if not allow_mixed and psi.particle_sector() is None:
        raise ValueError("2-RDM requires a fixed particle-number sector")
    r = psi.n_orbitals
    vecs = np.array(
        [_annihilate(_annihilate(psi.amplitudes, r, i), r, j) for i, j in orbital_pairs(r)]
    )
    return vecs.conj() @ vecs.T


def compute_modified_g(psi: FockVector) -> np.ndarray:
    """Particle-hole RDM with the ground-state transition removed.

    G~[(i,j),(k,l)] = <a+_i a_j a+_l a_k> - D[i,j] D[l,k], flattened i*r+j.
    The subtraction is exactly the rank-one term outer(vec D, vec D*).
    """
    r = psi.n_orbitals
    vecs = np.zeros((r * r, psi.amplitudes.size), dtype=complex)
    for i in range(r):
        lowered = _annihilate(psi.amplitudes, r, i)
        for j in range(r):
            vecs[i * r + j] = _create(lowered, r, j)
    g = vecs.conj() @ vecs.T
    d = compute_1rdm(psi).reshape(-1)
    return g - np.outer(d, d.conj())


def largest_eigenvalue(matrix: np.ndarray) -> float:
    """Top eigenvalue of a Hermitian matrix (dense, exact).

    The input must be Hermitian within 1e-8; it is symmetrized before the
    dense eigendecomposition, which is accurate to ~1e-10 for dim <= 64.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if np.max(np.abs(m - m.conj().T)) > 1e-8:
        raise ValueError("matrix is not Hermitian within 1e-8")
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).max())


@dataclass(frozen=True)
class Signatures:
    """Condensation signatures; stds present when derived from trials."""

    lambda_d: float
    lambda_g: float
    std_lambda_d: float | None = None
    std_lambda_g: float | None = None

    def __post_init__(self):
        if not (np.isfinite(self.lambda_d) and np.isfinite(self.lambda_g)):
            raise ValueError("signatures must be finite")


def signatures(state: StateVector | DensityMatrix, rep: Representation) -> Signatures:
    """lambda_D and lambda_G of a register state.

    Pure states go through qubit_to_fock directly.  Mixed states are
    eigendecomposed; the linear matrix parts are ensemble-averaged and the
    1-RDM product term uses the ensemble 1-RDM, i.e. <A> = tr(rho A)
    throughout.
    """
    if isinstance(state, StateVector):
        fock = qubit_to_fock(state, rep)
        lam_d = largest_eigenvalue(compute_2rdm(fock, allow_mixed=True))
        lam_g = largest_eigenvalue(compute_modified_g(fock))
        return Signatures(lam_d, lam_g)
    return signatures_from_matrix(state.elements, rep)


def signatures_from_matrix(matrix: np.ndarray, rep: Representation) -> Signatures:
    """Signatures of a Hermitian register operator with unit trace.

    Works for proper densities and for raw tomography estimates whose small
    negative eigenvalues were not clipped: eigenvalues enter with their
    signs, which keeps <A> = tr(rho A) exact and the estimator unbiased.
    """
    m = np.asarray(matrix, dtype=complex)
    n_qubits = rep.n_qubits
    if m.shape != (2**n_qubits, 2**n_qubits):
        raise ValueError(f"expected a {2**n_qubits} x {2**n_qubits} matrix")
    if np.max(np.abs(m - m.conj().T)) > 1e-8:
        raise ValueError("matrix is not Hermitian within 1e-8")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    r = rep.n_orbitals
    two_d = np.zeros((r * (r - 1) // 2, r * (r - 1) // 2), dtype=complex)
    g_lin = np.zeros((r * r, r * r), dtype=complex)
    one_d = np.zeros((r, r), dtype=complex)
    for p, vec in zip(vals, vecs.T):
        if abs(p) < 1e-12:
            continue
        fock = qubit_to_fock(StateVector(n_qubits, vec / np.linalg.norm(vec)), rep)
        two_d += p * compute_2rdm(fock, allow_mixed=True)
        one_d += p * compute_1rdm(fock)
        gv = np.zeros((r * r, fock.amplitudes.size), dtype=complex)
        for i in range(r):
            lowered = _annihilate(fock.amplitudes, r, i)
            for j in range(r):
                gv[i * r + j] = _create(lowered, r, j)
        g_lin += p * (gv.conj() @ gv.T)
    d = one_d.reshape(-1)
    g_mod = g_lin - np.outer(d, d.conj())
    return Signatures(largest_eigenvalue(two_d), largest_eigenvalue(g_mod))


# ---------------------------------------------------------------------------
# plain-text matrix dump (consumed by the brute-force oracle checks)


def dump_matrix(matrix: np.ndarray, fh: TextIO) -> None:
    """Row-major complex dump: header "rows cols", then "re im" pairs."""
    m = np.asarray(matrix, dtype=complex)
    fh.write(f"{m.shape[0]} {m.shape[1]}\n")
    for row in m:
        fh.write(" ".join(f"{z.real!r} {z.imag!r}" for z in row) + "\n")


def load_matrix(fh: TextIO) -> np.ndarray:
    header = fh.readline().split()
    rows, cols = int(header[0]), int(header[1])
    out = np.zeros((rows, cols), dtype=complex)
    for i in range(rows):
        parts = [float(x) for x in fh.readline().split()]
        if len(parts) != 2 * cols:
            raise ValueError(f"row {i} has {len(parts)} values, expected {2 * cols}")
        out[i] = np.array(parts[0::2]) + 1j * np.array(parts[1::2])
    return out
