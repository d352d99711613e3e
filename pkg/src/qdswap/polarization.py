"""Dense linear algebra for polarization qubits.

Basis convention (used by every module): single photon ``H = 0, V = 1``;
multi-photon kets are Kronecker products in photon order, so two photons are
ordered ``HH, HV, VH, VV`` and four photons ``|p1 p2 p3 p4>`` map to index
``8*p1 + 4*p2 + 2*p3 + p4``.

Projection results are kept un-normalized: the squared norm of the residual
ket is the probability of the projection outcome, and ``Ket.normalize()``
gives the conditional state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BELL_KINDS = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")
TWO_PHOTON_LABELS = ("HH", "HV", "VH", "VV")
_ALLOWED_DIMS = (2, 4, 16)
_SQRT1_2 = 1.0 / np.sqrt(2.0)

_BELL_AMPLITUDES = {
    "phi_plus": np.array([_SQRT1_2, 0.0, 0.0, _SQRT1_2], dtype=complex),
    "phi_minus": np.array([_SQRT1_2, 0.0, 0.0, -_SQRT1_2], dtype=complex),
    "psi_plus": np.array([0.0, _SQRT1_2, _SQRT1_2, 0.0], dtype=complex),
    "psi_minus": np.array([0.0, _SQRT1_2, -_SQRT1_2, 0.0], dtype=complex),
}


class DimensionError(ValueError):
    pass


def _check_dim(dim: int) -> None:
    if dim not in _ALLOWED_DIMS:
        raise DimensionError(f"dimension {dim} not in {_ALLOWED_DIMS}")


@dataclass(frozen=True, eq=False)
class Ket:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        _check_dim(amps.size)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm_sq(self) -> float:
        """Squared norm; for a projection residual this is the outcome probability."""
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalize(self) -> Ket:
        n = np.sqrt(self.norm_sq)
        if n == 0.0:
            raise ZeroDivisionError("cannot normalize the zero ket")
        return Ket(self.amplitudes / n)

    def inner(self, other: Ket) -> complex:
        """<self|other>."""
        if other.dim != self.dim:
            raise DimensionError(f"inner product of dims {self.dim} and {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def __repr__(self) -> str:
        return f"Ket({np.array2string(self.amplitudes, precision=4)})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got shape {m.shape}")
        _check_dim(m.shape[0])
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.entries + self.entries.conj().T))

    def is_valid(self, herm_tol: float = 1e-12, trace_tol: float = 1e-12, psd_tol: float = 1e-9) -> bool:
        m = self.entries
        return (
            np.max(np.abs(m - m.conj().T)) <= herm_tol
            and abs(self.trace - 1.0) <= trace_tol
            and self.eigenvalues().min() >= -psd_tol
        )

    def normalized(self) -> DensityMatrix:
        return DensityMatrix(self.entries / self.trace)


def basis_ket(label: str) -> Ket:
    """Product ket from a string of ``H``/``V`` letters, e.g. ``"HV"``."""
    amps = np.array([1.0], dtype=complex)
    for ch in label:
        if ch not in "HV":
            raise ValueError(f"unknown polarization {ch!r}")
        amps = np.kron(amps, np.array([1.0, 0.0]) if ch == "H" else np.array([0.0, 1.0]))
    return Ket(amps)


def bell_state(kind: str) -> Ket:
    try:
        return Ket(_BELL_AMPLITUDES[kind])
    except KeyError:
        raise ValueError(f"unknown Bell state {kind!r}; expected one of {BELL_KINDS}") from None


def tensor(a, b):
    """Kronecker product ``a (x) b`` of two kets or two density matrices."""
    if isinstance(a, Ket) and isinstance(b, Ket):
        if a.dim * b.dim > 16:
            raise DimensionError(f"combined dimension {a.dim * b.dim} exceeds 16")
        return Ket(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        if a.dim * b.dim > 16:
            raise DimensionError(f"combined dimension {a.dim * b.dim} exceeds 16")
        return DensityMatrix(np.kron(a.entries, b.entries))
    raise TypeError("tensor() needs two kets or two density matrices")


def project_amplitudes(bell_amps: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Partial inner product of photons (2,3) with a two-photon ket.

    ``states`` has shape ``(..., 16)``; the result has shape ``(..., 4)`` over
    photons (1,4) and is not normalized.
    """
    psi = np.asarray(states).reshape(*np.shape(states)[:-1], 2, 2, 2, 2)
    b = np.conj(np.asarray(bell_amps)).reshape(2, 2)
    out = np.einsum("jk,...ijkl->...il", b, psi)
    return out.reshape(*out.shape[:-2], 4)


def project(bell: Ket, state: Ket, slots: tuple[int, int] = (2, 3)) -> Ket:
    """Project photons ``slots`` of a four-photon ket onto a two-photon ket.

    Returns the un-normalized residual over photons (1,4); its ``norm_sq`` is
    the probability of the projection.
    """
    if tuple(slots) != (2, 3):
        raise ValueError(f"unsupported slot pair {slots}; only (2, 3) is implemented")
    if state.dim != 16 or bell.dim != 4:
        raise DimensionError("project() needs a 4-dim bra and a 16-dim state")
    return Ket(project_amplitudes(bell.amplitudes, state.amplitudes))


def fidelity(rho: DensityMatrix, target: Ket, tol: float = 1e-9) -> float:
    """<target|rho|target>, clamped to [0, 1] after a tolerance check."""
    if rho.dim != target.dim:
        raise DimensionError(f"rho has dim {rho.dim}, target has dim {target.dim}")
    t = target.amplitudes
    if abs(np.vdot(t, t).real - 1.0) > 1e-9:
        raise ValueError("target ket must have unit norm")
    f = float(np.vdot(t, rho.entries @ t).real)
    if f < -tol or f > 1.0 + tol:
        raise ValueError(f"fidelity {f} outside [0, 1]; is rho a valid state?")
    return min(max(f, 0.0), 1.0)


def batch_fidelity(rhos: np.ndarray, target: np.ndarray) -> np.ndarray:
    """<target|rho|target> for a stack of matrices of shape ``(n, d, d)``."""
    return np.einsum("i,nij,j->n", target.conj(), rhos, target).real
