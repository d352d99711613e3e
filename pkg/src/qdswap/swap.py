"""Entanglement swapping between two cascade sources.

Photons 1,2 come from source A and 3,4 from source B; the XX photons 2 and 3
meet at the Bell-state measurement, which projects them onto Psi-. Because
the BSM erases which-path information the exciton phases can be assigned to
the two detection times in two ways, and the swapped state is the equal
mixture of both assignments.

The closed form used by the Monte Carlo runner is

    F = 1/2 + V/2 * Re[C_A * conj(C_B) * K]

with C_i the dwell-time averaged coherence of source i, V the two-photon
interference visibility (1 for an ideal BSM) and K = 1 unless the timing
ambiguity of the BSM detections is switched on, in which case
K = (1 + D) / 2 with D the characteristic function of the XX emission-time
difference. ``swap_fidelity_mc`` evaluates the same model from explicit
four-photon states and random emission times and serves as its oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cascade import QdParams, coherence_factor, hom_visibility
from .constants import HBAR
from .polarization import BELL_KINDS, DensityMatrix, Ket, bell_state, project_amplitudes
from .rng import block_rng, map_blocks

_PSI_MINUS = bell_state("psi_minus").amplitudes


@dataclass(frozen=True)
class SwapModelConfig:
    ideal_bsm: bool = False
    include_cascade: bool = False
    pair_cross_dephasing: bool = False
    # XX photons detected at distinct times: the two phase assignments differ
    bsm_timing_ambiguity: bool = False
    target: str = "psi_minus"

    def __post_init__(self):
        if self.target not in BELL_KINDS:
            raise ValueError(f"unknown target {self.target!r}")


@dataclass(frozen=True)
class SwapTimes:
    """Detection times (ns) of outer photons 1, 4 and of the two BSM detectors."""

    t1: float
    t4: float
    t_bsm1: float
    t_bsm2: float


@dataclass(frozen=True)
class PhaseAssignment:
    alpha: float
    beta: float
    variant: str
    times: SwapTimes = field(repr=False)

    @classmethod
    def from_times(cls, sa: float, sb: float, times: SwapTimes, variant: str) -> PhaseAssignment:
        if variant == "primed":
            ta, tb = times.t_bsm1, times.t_bsm2
        elif variant == "double_primed":
            ta, tb = times.t_bsm2, times.t_bsm1
        else:
            raise ValueError(f"unknown variant {variant!r}")
        alpha = -(sa / HBAR) * (times.t1 - ta)
        beta = -(sb / HBAR) * (times.t4 - tb)
        return cls(alpha, beta, variant, times)


def _four_photon_amplitudes(alpha, beta) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    shape = np.broadcast(alpha, beta).shape
    pa = np.zeros(shape + (4,), dtype=complex)
    pb = np.zeros(shape + (4,), dtype=complex)
    pa[..., 0] = pb[..., 0] = 1.0
    pa[..., 3] = np.exp(1j * alpha)
    pb[..., 3] = np.exp(1j * beta)
    return 0.5 * (pa[..., :, None] * pb[..., None, :]).reshape(shape + (16,))


def four_photon_state(alpha: float, beta: float) -> Ket:
    """(1/2)(|H1H2> + e^{i alpha}|V1V2>)(|H3H4> + e^{i beta}|V3V4>)."""
    return Ket(_four_photon_amplitudes(alpha, beta))


def _conditional_ket(alpha, beta) -> np.ndarray:
    """Normalized Psi-(2,3)-projected states over photons (1,4), shape (..., 4)."""
    res = project_amplitudes(_PSI_MINUS, _four_photon_amplitudes(alpha, beta))
    return res / np.linalg.norm(res, axis=-1, keepdims=True)


def _conditional_density(alpha, beta) -> np.ndarray:
    res = _conditional_ket(alpha, beta)
    return res[..., :, None] * res[..., None, :].conj()


def _dephase(rho: np.ndarray) -> np.ndarray:
    """Drop all coherences: the classically correlated counterpart of ``rho``."""
    out = np.zeros_like(rho)
    idx = np.arange(rho.shape[-1])
    out[..., idx, idx] = rho[..., idx, idx]
    return out


def _mixture_from_phases(alpha1, beta1, alpha2, beta2, visibility=1.0) -> np.ndarray:
    rho = 0.5 * (_conditional_density(alpha1, beta1) + _conditional_density(alpha2, beta2))
    v = np.asarray(visibility, dtype=float)[..., None, None]
    return v * rho + (1.0 - v) * _dephase(rho)


def swapped_mixture(sa: float, sb: float, times: SwapTimes, visibility: float = 1.0) -> DensityMatrix:
    """Equal mixture of the two phase assignments, optionally degraded by finite visibility."""
    p1 = PhaseAssignment.from_times(sa, sb, times, "primed")
    p2 = PhaseAssignment.from_times(sa, sb, times, "double_primed")
    return DensityMatrix(_mixture_from_phases(p1.alpha, p1.beta, p2.alpha, p2.beta, visibility))


def _visibility(a: QdParams, b: QdParams, detuning, cfg: SwapModelConfig):
    if cfg.ideal_bsm:
        return 1.0
    return hom_visibility(a, b, detuning, cfg.include_cascade)


def _target_fidelity(correlation, visibility, target: str):
    """Fidelity of the swapped state given V and Re-correlation R."""
    if target == "psi_minus":
        return 0.5 + 0.5 * visibility * correlation
    if target == "psi_plus":
        return 0.5 - 0.5 * visibility * correlation
    return np.zeros_like(np.asarray(correlation, dtype=float))


def swap_fidelity_analytic(a: QdParams, b: QdParams, detuning=0.0, cfg: SwapModelConfig = SwapModelConfig()):
    """Closed-form swapped-state fidelity; vectorizes over array-valued parameters."""
    t2a = a.t2_star if cfg.pair_cross_dephasing else None
    t2b = b.t2_star if cfg.pair_cross_dephasing else None
    corr = coherence_factor(a.fss, a.t1_x, t2_star=t2a) * np.conj(coherence_factor(b.fss, b.t1_x, t2_star=t2b))
    if cfg.bsm_timing_ambiguity:
        kappa = (np.asarray(a.fss) + np.asarray(b.fss)) / HBAR
        d = 1.0 / ((1.0 + 1j * kappa * np.asarray(a.t1_xx)) * (1.0 - 1j * kappa * np.asarray(b.t1_xx)))
        corr = corr * 0.5 * (1.0 + d)
    f = _target_fidelity(np.real(corr), _visibility(a, b, detuning, cfg), cfg.target)
    return float(f) if np.ndim(f) == 0 else f


def _mc_block(a: QdParams, b: QdParams, visibility, cfg: SwapModelConfig, rng: np.random.Generator, n: int):
    # fixed draw order: dwell A, dwell B, XX time A, XX time B, dephasing A, dephasing B
    tau_a = rng.exponential(a.t1_x, n)
    tau_b = rng.exponential(b.t1_x, n)
    txx_a = rng.exponential(a.t1_xx, n)
    txx_b = rng.exponential(b.t1_xx, n)
    phi_a = rng.standard_cauchy(n)
    phi_b = rng.standard_cauchy(n)
    if not cfg.bsm_timing_ambiguity:
        txx_b = txx_a
    t1 = txx_a + tau_a
    t4 = txx_b + tau_b
    wa, wb = a.fss / HBAR, b.fss / HBAR
    alpha1 = -wa * (t1 - txx_a)
    beta1 = -wb * (t4 - txx_b)
    alpha2 = -wa * (t1 - txx_b)
    beta2 = -wb * (t4 - txx_a)
    if cfg.pair_cross_dephasing:
        # Lorentzian phase kick: E[exp(i phi)] = exp(-tau / T2*)
        da = phi_a * tau_a / a.t2_star
        db = phi_b * tau_b / b.t2_star
        alpha1, alpha2 = alpha1 + da, alpha2 + da
        beta1, beta2 = beta1 + db, beta2 + db
    # <t|rho|t> of the visibility-weighted mixture, without forming rho
    target = bell_state(cfg.target).amplitudes
    weights = np.abs(target) ** 2
    f = np.zeros(n)
    for res in (_conditional_ket(alpha1, beta1), _conditional_ket(alpha2, beta2)):
        coherent = np.abs(res @ target.conj()) ** 2
        incoherent = (np.abs(res) ** 2) @ weights
        f += 0.5 * (visibility * coherent + (1.0 - visibility) * incoherent)
    return f


def swap_fidelity_mc(
    a: QdParams,
    b: QdParams,
    detuning: float = 0.0,
    cfg: SwapModelConfig = SwapModelConfig(),
    n: int = 100_000,
    seed: int = 0,
    workers: int | None = None,
) -> tuple[float, float]:
    """Monte Carlo estimate of the swapped fidelity from explicit four-photon states.

    Returns ``(mean, standard error)``; bit-identical for a fixed seed.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    v = _visibility(a, b, detuning, cfg)
    f = np.concatenate(
        map_blocks(lambda k, start, stop: _mc_block(a, b, v, cfg, block_rng(seed, k, stream=1), stop - start), n, workers)
    )
    stderr = float(f.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return float(f.mean()), stderr
