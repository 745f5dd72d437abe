"""Brute-force cross-checks for the RDM engine.

Everything here is deliberately independent of rdm.py: operators are built
as dense Jordan-Wigner matrices (Z strings times a lowering matrix) and the
reference eigensolver is a cyclic Jacobi iteration on the real embedding.
The fast engine and this module must agree elementwise; `run_suite` bundles
the checks used by both the test suite and the `fec oracle` command.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .prep import Representation, build_psi_D, build_psi_G
from .rdm import FockVector, compute_2rdm, compute_modified_g, qubit_to_fock
from .sim import StateVector

_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |0><1|


class OracleMismatch(RuntimeError):
    """Raised when the fast engine disagrees with the brute-force oracle."""


def jw_annihilation(r: int, orb: int) -> np.ndarray:
    """Dense a_orb as Z^{orb} (x) sigma- (x) I, orbital 0 first."""
    op = np.eye(1, dtype=complex)
    for _ in range(orb):
        op = np.kron(op, _Z)
    op = np.kron(op, _LOWER)
    for _ in range(r - orb - 1):
        op = np.kron(op, np.eye(2, dtype=complex))
    return op


def oracle_1rdm(psi: FockVector) -> np.ndarray:
    r = psi.n_orbitals
    ops = [jw_annihilation(r, i) for i in range(r)]
    v = psi.amplitudes
    return np.array([[np.vdot(v, ops[i].conj().T @ (ops[j] @ v)) for j in range(r)] for i in range(r)])


def oracle_2rdm(psi: FockVector) -> np.ndarray:
    r = psi.n_orbitals
    ops = [jw_annihilation(r, i) for i in range(r)]
    pairs = list(combinations(range(r), 2))
    v = psi.amplitudes
    out = np.zeros((len(pairs), len(pairs)), dtype=complex)
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            w = ops[l] @ (ops[k] @ v)
            w = ops[j].conj().T @ w
            w = ops[i].conj().T @ w
            out[a, b] = np.vdot(v, w)
    return out


def oracle_modified_g(psi: FockVector) -> np.ndarray:
    r = psi.n_orbitals
    ops = [jw_annihilation(r, i) for i in range(r)]
    v = psi.amplitudes
    d = np.array([[np.vdot(v, ops[i].conj().T @ (ops[j] @ v)) for j in range(r)] for i in range(r)])
    out = np.zeros((r * r, r * r), dtype=complex)
    for i in range(r):
        for j in range(r):
            for k in range(r):
                for l in range(r):
                    w = ops[k] @ v
                    w = ops[l].conj().T @ w
                    w = ops[j] @ w
                    w = ops[i].conj().T @ w
                    out[i * r + j, k * r + l] = np.vdot(v, w) - d[i, j] * d[l, k]
    return out


def jacobi_eigenvalues(matrix: np.ndarray, sweeps: int = 50) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi on the real embedding.

    The complex n x n Hermitian matrix maps to the 2n x 2n real symmetric
    [[Re, -Im], [Im, Re]], whose spectrum is the original one doubled.
    Rotations are applied in place, O(n) per pivot.
    """
    m = np.asarray(matrix, dtype=complex)
    a = np.block([[m.real, -m.imag], [m.imag, m.real]])
    n = a.shape[0]
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-14:
                    continue
                off = max(off, abs(apq))
                phi = 0.5 * np.arctan2(2.0 * apq, a[q, q] - a[p, p])
                c, s = np.cos(phi), np.sin(phi)
                rows_p = c * a[p, :] - s * a[q, :]
                rows_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rows_p, rows_q
                cols_p = c * a[:, p] - s * a[:, q]
                cols_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = cols_p, cols_q
        if off < 1e-13:
            break
    evals = np.sort(np.diag(a))
    return evals[::2]  # each eigenvalue appears twice in the embedding


@dataclass(frozen=True)
class OracleCheck:
    name: str
    passed: bool
    detail: str


def _elementwise(name: str, fast: np.ndarray, brute: np.ndarray, tol: float = 1e-10) -> OracleCheck:
    err = float(np.max(np.abs(fast - brute)))
    return OracleCheck(name, err <= tol, f"max |fast - oracle| = {err:.3e}")


def run_suite(n_random: int = 20, seed: int = 20210808) -> list[OracleCheck]:
    """Compare the fast RDM engine against the brute-force oracle.

    Covers every 4-qubit computational basis state plus random bosonic
    superpositions, and the extreme-state eigenvalues lambda_G(psi_G) = 2
    and lambda_D(psi_D) = 1.5 for the default representation.
    """
    rep = Representation()
    checks: list[OracleCheck] = []
    rng = np.random.default_rng(seed)

    worst_d = worst_g = 0.0
    states = []
    for b in range(16):
        amps = np.zeros(16, dtype=complex)
        amps[b] = 1.0
        states.append(amps)
    for _ in range(n_random):
        amps = rng.normal(size=16) + 1j * rng.normal(size=16)
        states.append(amps / np.linalg.norm(amps))
    for amps in states:
        fock = qubit_to_fock(StateVector(4, amps), rep)
        worst_d = max(worst_d, float(np.max(np.abs(
            compute_2rdm(fock, allow_mixed=True) - oracle_2rdm(fock)))))
        worst_g = max(worst_g, float(np.max(np.abs(
            compute_modified_g(fock) - oracle_modified_g(fock)))))
    checks.append(OracleCheck("2rdm elementwise", worst_d <= 1e-10, f"max err {worst_d:.3e}"))
    checks.append(OracleCheck("modified-g elementwise", worst_g <= 1e-10, f"max err {worst_g:.3e}"))

    fock_g = qubit_to_fock(build_psi_G(rep), rep)
    lam_g = float(np.max(jacobi_eigenvalues(oracle_modified_g(fock_g))))
    checks.append(OracleCheck(
        "lambda_G(psi_G) = 2.0", abs(lam_g - 2.0) <= 1e-8, f"oracle value {lam_g:.12f}"))

    fock_d = qubit_to_fock(build_psi_D(rep), rep)
    lam_d = float(np.max(jacobi_eigenvalues(oracle_2rdm(fock_d))))
    checks.append(OracleCheck(
        "lambda_D(psi_D) = 1.5", abs(lam_d - 1.5) <= 1e-8, f"oracle value {lam_d:.12f}"))

    tr = float(np.trace(oracle_2rdm(fock_d)).real)
    checks.append(OracleCheck(
        "trace 2D = N(N-1)/2", abs(tr - 6.0) <= 1e-10, f"trace {tr:.12f}"))
    return checks
