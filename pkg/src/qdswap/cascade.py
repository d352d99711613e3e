"""Single quantum-dot biexciton-exciton cascade.

Pair state with fine-structure phase, time-averaged and gated coherence,
photon indistinguishability, two-source HOM visibility and blinking.

Functions accept scalars or numpy arrays (broadcast elementwise) so the Monte
Carlo runner can evaluate a whole batch of sampled devices in one call.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .constants import HBAR
from .polarization import DensityMatrix, Ket, bell_state, fidelity


@dataclass(frozen=True)
class QdParams:
    """Physical parameters of one emitter.

    Units: ``wavelength_x`` nm, ``fss`` ueV, lifetimes and ``t2_star`` ns.
    Fields may hold equally shaped arrays to describe a batch of devices.
    """

    wavelength_x: float = 777.85
    fss: float = 0.0
    t1_x: float = 0.300
    t1_xx: float = 0.150
    t2_star: float = 0.5
    on_fraction: float = 1.0

    def __post_init__(self):
        for name in ("wavelength_x", "t1_x", "t1_xx", "t2_star"):
            if not np.all(np.asarray(getattr(self, name)) > 0):
                raise ValueError(f"{name} must be positive")
        if not np.all(np.asarray(self.fss) >= 0):
            raise ValueError("fss must be non-negative")
        on = np.asarray(self.on_fraction)
        if not np.all((on >= 0) & (on <= 1)):
            raise ValueError("on_fraction must lie in [0, 1]")

    @property
    def t2_x(self):
        """First-order coherence time of the X line: 1/T2 = 1/(2 T1) + 1/T2*."""
        return coherence_time(self.t1_x, self.t2_star)

    @property
    def t2_xx(self):
        return coherence_time(self.t1_xx, self.t2_star)

    def replace(self, **changes) -> QdParams:
        return replace(self, **changes)


def coherence_time(t1, t2_star):
    return 1.0 / (0.5 / np.asarray(t1) + 1.0 / np.asarray(t2_star))


def pair_state(fss: float, t: float) -> Ket:
    """(|HH> + exp(-i S t / hbar) |VV>) / sqrt(2) after an exciton dwell time ``t``."""
    if t < 0:
        raise ValueError("dwell time must be non-negative")
    phase = np.exp(-1j * fss * t / HBAR)
    return Ket(np.array([1.0, 0.0, 0.0, phase]) / np.sqrt(2.0))


def coherence_factor(fss, t1_x, gate=None, t2_star=None):
    """Average of exp(-i S t / hbar) over exponentially distributed dwell times.

    With ``gate`` the dwell-time law is truncated to ``[0, gate]``. With
    ``t2_star`` each emission additionally carries the damping exp(-t/T2*)
    of the HH-VV coherence (off unless requested).
    """
    fss = np.asarray(fss, dtype=float)
    t1_x = np.asarray(t1_x, dtype=float)
    if np.any(t1_x <= 0):
        raise ValueError("t1_x must be positive")
    z = 1.0 + 1j * fss * t1_x / HBAR
    if t2_star is not None:
        z = z + t1_x / np.asarray(t2_star, dtype=float)
    c = 1.0 / z
    if gate is None:
        return c
    gate = np.asarray(gate, dtype=float)
    if np.any(gate <= 0):
        raise ValueError("gate must be positive")
    x = gate / t1_x
    # -expm1 keeps precision for small gate windows
    return c * (-np.expm1(-z * x)) / (-np.expm1(-x))


def gate_acceptance(t1_x, gate=None):
    """Fraction of cascades whose dwell time falls inside the gate window."""
    if gate is None:
        return 1.0
    return -np.expm1(-np.asarray(gate) / np.asarray(t1_x))


def pair_density(coherence: complex) -> DensityMatrix:
    """Time-averaged two-photon matrix: HH and VV populations 1/2, coherence c/2."""
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[3, 3] = 0.5
    rho[3, 0] = 0.5 * coherence
    rho[0, 3] = 0.5 * np.conj(coherence)
    return DensityMatrix(rho)


def pair_fidelity(params: QdParams, gate=None, target: str = "phi_plus", cross_dephasing: bool = False) -> float:
    c = coherence_factor(params.fss, params.t1_x, gate, params.t2_star if cross_dephasing else None)
    return fidelity(pair_density(complex(c)), bell_state(target))


def indistinguishability(t1, t2_star):
    """Single-source HOM visibility T2 / (2 T1)."""
    return coherence_time(t1, t2_star) / (2.0 * np.asarray(t1))


def cascade_limit(t1_x, t1_xx):
    """Timing-jitter ceiling on XX indistinguishability imposed by the cascade."""
    t1_x = np.asarray(t1_x)
    return t1_x / (t1_x + np.asarray(t1_xx))


def hom_visibility(a: QdParams, b: QdParams, detuning=0.0, include_cascade: bool = False):
    """Two-photon interference visibility between the XX photons of two sources.

    Exponential wavepackets with radiative rates 1/T1_XX, pure dephasing
    1/T2* and a centre-frequency detuning in ueV. Reduces to T2/(2 T1) for
    identical sources on resonance.
    """
    ga = 1.0 / np.asarray(a.t1_xx)
    gb = 1.0 / np.asarray(b.t1_xx)
    gmean = 0.5 * (ga + gb)
    gstar = 1.0 / np.asarray(a.t2_star) + 1.0 / np.asarray(b.t2_star)
    delta = np.asarray(detuning) / HBAR
    width = gmean + gstar
    v = ga * gb * width / (gmean * (width**2 + delta**2))
    if include_cascade:
        v = v * np.sqrt(cascade_limit(a.t1_x, a.t1_xx) * cascade_limit(b.t1_x, b.t1_xx))
    return v


def on_fraction_from_bunching(bunching_amplitude):
    """On-fraction of a blinking emitter from the g2 bunching amplitude a in 1 + a exp(-|tau|/tau_b)."""
    a = np.asarray(bunching_amplitude, dtype=float)
    if np.any(a < 0):
        raise ValueError("bunching amplitude must be non-negative")
    return 1.0 / (1.0 + a)


def interference_efficiency(beta_a, beta_b):
    return np.sqrt(np.asarray(beta_a) * np.asarray(beta_b))
