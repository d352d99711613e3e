"""Synthetic two-photon polarization tomography of the cascade pair.

Forward model: the dwell-time averaged pair matrix under a detection gate,
projected onto product polarization states, with optional Poisson noise.
Inverse: linear inversion by least squares over a Hermitian operator basis,
followed by eigenvalue clipping to restore positivity.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass

import numpy as np

from .cascade import QdParams, coherence_factor, gate_acceptance, pair_density
from .polarization import TWO_PHOTON_LABELS, DensityMatrix
from .rng import block_rng

_S = 1.0 / np.sqrt(2.0)
SINGLE_PHOTON_STATES = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "D": np.array([_S, _S], dtype=complex),
    "A": np.array([_S, -_S], dtype=complex),
    "R": np.array([_S, 1j * _S], dtype=complex),
    "L": np.array([_S, -1j * _S], dtype=complex),
}
# James, Kwiat, Munro & White sixteen-setting sequence
MINIMAL_SETTINGS = (
    "HH", "HV", "VV", "VH", "RH", "RV", "DV", "DH",
    "DR", "DD", "RD", "HD", "VD", "VL", "HL", "RL",
)  # fmt: skip
FULL_SETTINGS = tuple(a + b for a, b in itertools.product("HVDARL", repeat=2))

_PAULI = [
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]
_OPERATOR_BASIS = np.array([np.kron(p, q) for p in _PAULI for q in _PAULI])


class TomographyError(ValueError):
    pass


def projector(label: str) -> np.ndarray:
    """Rank-1 projector for a two-letter setting such as ``"DR"``."""
    if len(label) != 2 or any(ch not in SINGLE_PHOTON_STATES for ch in label):
        raise TomographyError(f"bad measurement label {label!r}")
    v = np.kron(SINGLE_PHOTON_STATES[label[0]], SINGLE_PHOTON_STATES[label[1]])
    return np.outer(v, v.conj())


@dataclass(frozen=True)
class MeasurementBasis:
    labels: tuple[str, ...]

    @classmethod
    def named(cls, name: str = "minimal") -> MeasurementBasis:
        if name == "minimal":
            return cls(MINIMAL_SETTINGS)
        if name == "full":
            return cls(FULL_SETTINGS)
        raise ValueError(f"unknown basis {name!r}; use 'minimal' or 'full'")

    @property
    def projectors(self) -> np.ndarray:
        return np.array([projector(lb) for lb in self.labels])


@dataclass(frozen=True)
class CoincidenceRecord:
    label: str
    basis_index: int
    expected: float
    counts: int | None
    gate_window: float | None

    @property
    def observed(self) -> float:
        """Poisson counts when sampled, otherwise the expected number."""
        return float(self.expected if self.counts is None else self.counts)


@dataclass(frozen=True)
class Reconstruction:
    rho: DensityMatrix
    raw_eigenvalues: np.ndarray
    total_counts: float

    @property
    def raw_min_eigenvalue(self) -> float:
        return float(self.raw_eigenvalues.min())


def gated_pair_density(params: QdParams, gate: float | None = None, cross_dephasing: bool = False) -> DensityMatrix:
    c = coherence_factor(params.fss, params.t1_x, gate, params.t2_star if cross_dephasing else None)
    return pair_density(complex(c))


def forward_counts(
    params: QdParams,
    gate: float | None = None,
    shots: float = 1e6,
    noise: bool = False,
    seed: int = 0,
    basis: MeasurementBasis | str = "minimal",
    cross_dephasing: bool = False,
) -> list[CoincidenceRecord]:
    """Expected (and optionally Poisson-sampled) coincidences per setting.

    ``shots`` is the number of pair events per setting before gating.
    """
    if shots < 0:
        raise ValueError("shots must be non-negative")
    if isinstance(basis, str):
        basis = MeasurementBasis.named(basis)
    rho = gated_pair_density(params, gate, cross_dephasing).entries
    accept = float(gate_acceptance(params.t1_x, gate))
    probs = np.einsum("kij,ji->k", basis.projectors, rho).real.clip(min=0.0)
    expected = shots * accept * probs
    counts = [None] * len(expected)
    if noise:
        counts = [int(c) for c in block_rng(seed, 0, stream=2).poisson(expected)]
    return [
        CoincidenceRecord(lb, i, float(e), c, gate)
        for i, (lb, e, c) in enumerate(zip(basis.labels, expected, counts))
    ]


def accepted_counts(records) -> float:
    return float(sum(r.observed for r in records))


def reconstruct(records) -> Reconstruction:
    """Linear-inversion estimate of the two-photon density matrix.

    Solves n_k = Tr(P_k A) for a Hermitian A in the least-squares sense, so
    both the 16-setting and the over-complete 36-setting sets work, then
    normalizes, clips negative eigenvalues and renormalizes.
    """
    records = list(records)
    if not records:
        raise TomographyError("no measurement records")
    projs = np.array([projector(r.label) for r in records])
    n = np.array([r.observed for r in records])
    design = np.einsum("kij,mji->km", projs, _OPERATOR_BASIS).real
    if np.linalg.matrix_rank(design) < 16:
        raise TomographyError("measurement settings are not informationally complete")
    total = float(n.sum())
    if total <= 0:
        raise TomographyError("zero total counts")
    coeffs, *_ = np.linalg.lstsq(design, n, rcond=None)
    a = np.einsum("m,mij->ij", coeffs, _OPERATOR_BASIS)
    trace = np.trace(a).real
    if trace <= 0:
        raise TomographyError("reconstructed trace is not positive")
    raw = a / trace
    raw = 0.5 * (raw + raw.conj().T)
    w, v = np.linalg.eigh(raw)
    clipped = np.clip(w, 0.0, None)
    rho = (v * clipped) @ v.conj().T / clipped.sum()
    return Reconstruction(DensityMatrix(0.5 * (rho + rho.conj().T)), w, total)


def counts_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["basis_label", "counts", "gate_ns"])
    for r in records:
        c = r.counts if r.counts is not None else f"{r.expected:.17g}"
        w.writerow([r.label, c, "" if r.gate_window is None else f"{r.gate_window:.17g}"])
    return buf.getvalue()


def counts_from_csv(text: str) -> list[CoincidenceRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["basis_label", "counts", "gate_ns"]:
        raise TomographyError("counts table must start with header basis_label,counts,gate_ns")
    out = []
    for i, row in enumerate(rows[1:]):
        if not row:
            continue
        label, counts, gate = (c.strip() for c in row)
        value = float(counts)
        if value < 0:
            raise TomographyError(f"negative counts for {label}")
        out.append(CoincidenceRecord(label, i, value, None, float(gate) if gate else None))
    return out


def matrix_to_csv(rho: DensityMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["part", "row", *TWO_PHOTON_LABELS])
    for part, m in (("re", rho.entries.real), ("im", rho.entries.imag)):
        for label, row in zip(TWO_PHOTON_LABELS, m):
            w.writerow([part, label, *(f"{x:.12g}" for x in row)])
    return buf.getvalue()
