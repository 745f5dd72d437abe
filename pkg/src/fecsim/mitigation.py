"""Projection error mitigation.

The condensate preparations populate only the weight-N/2 basis strings (six
of them for the default system); any other observed contribution is device
error.  Mitigation zeroes those contributions and renormalizes, either on
raw counts (the hardware workflow) or on a reconstructed or simulated
density matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .prep import Representation, dicke_support, layer_ghz_support
from .sim import CountsTable, DensityMatrix


@dataclass(frozen=True)
class SupportSet:
    """Allowed basis strings for a preparation."""

    n_qubits: int
    allowed: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "allowed", frozenset(self.allowed))
        if not self.allowed:
            raise ValueError("support set must be nonempty")
        for s in self.allowed:
            if len(s) != self.n_qubits or set(s) - {"0", "1"}:
                raise ValueError(f"bad support string {s!r}")

    def indices(self) -> np.ndarray:
        return np.array(sorted(int(s, 2) for s in self.allowed))

    def sorted_strings(self) -> list[str]:
        return sorted(self.allowed, key=lambda s: int(s, 2))


def _fan_out_string(s: str) -> str:
    return "".join(c * 2 for c in s)


def default_support(rep: Representation, mode: str = "union") -> SupportSet:
    """Support set of the condensate family.

    ``union``: strings populated by psi_G or psi_D (the six weight-N/2
    strings for the default system; psi_G's two layer strings are among
    them).  ``dicke``: the weight-N/2 strings only (the strict variant; it
    coincides with ``union`` for the default system).  ``extended``: union
    plus the all-zeros and all-ones strings, for preparations that also
    populate the computational GHZ pair.
    """
    n, k = rep.n_geminals, rep.n_pairs
    dicke = set(dicke_support(n, k))
    if mode == "dicke":
        strings = dicke
    elif mode == "union":
        strings = dicke | set(layer_ghz_support(n, k))
    elif mode == "extended":
        strings = dicke | set(layer_ghz_support(n, k)) | {"0" * n, "1" * n}
    else:
        raise ValueError(f"unknown support mode {mode!r}")
    if rep.kind == "fermionic":
        strings = {_fan_out_string(s) for s in strings}
    return SupportSet(rep.n_qubits, frozenset(strings))


def project_counts(counts: CountsTable, support: SupportSet) -> CountsTable:
    """Drop disallowed outcomes; the reduced total is the new shot count."""
    kept = {k: v for k, v in counts.counts.items() if k in support.allowed and v > 0}
    total = sum(kept.values())
    if total == 0:
        raise ValueError("projection removed every count: support does not overlap outcomes")
    return CountsTable(total, kept)


def project_density(rho: DensityMatrix, support: SupportSet) -> DensityMatrix:
    """P rho P / tr(P rho P) for the support-span projector P."""
    if rho.n_qubits != support.n_qubits:
        raise ValueError("support and density have different qubit counts")
    idx = support.indices()
    projected = np.zeros_like(rho.elements)
    block = rho.elements[np.ix_(idx, idx)]
    weight = float(np.trace(block).real)
    if weight <= 1e-12:
        raise ValueError(f"support weight {weight:.3e} too small to renormalize")
    projected[np.ix_(idx, idx)] = block / weight
    return DensityMatrix(rho.n_qubits, projected)


def save_support(support: SupportSet, path: str | Path) -> None:
    """Newline-delimited bitstrings with an n_qubits header."""
    lines = [f"# n_qubits={support.n_qubits}"] + support.sorted_strings()
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_support(path: str | Path) -> SupportSet:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("# n_qubits="):
        raise ValueError("support file must start with '# n_qubits=<int>'")
    n = int(lines[0].split("=", 1)[1])
    strings = [ln.strip() for ln in lines[1:] if ln.strip() and not ln.startswith("#")]
    return SupportSet(n, frozenset(strings))


def support_from_strings(n_qubits: int, strings: Iterable[str]) -> SupportSet:
    return SupportSet(n_qubits, frozenset(strings))
