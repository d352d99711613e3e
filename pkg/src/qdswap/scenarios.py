"""Tuning mechanisms and the six preset scenarios of the fidelity study.

Each tuning step maps a pair of (possibly batched) ``QdParams`` to a new pair
and an XX-XX detuning in ueV. Steps are applied in stack order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cascade import QdParams
from .constants import energy_from_wavelength_shift
from .device_stats import GaussianSpec, ParamDistributions

TEMPERATURE_RANGE_NM = 0.445
# T2* shrinks by 1 + COHERENCE_LOSS * u, i.e. threefold at the full tuning range
COHERENCE_LOSS = 2.0
# residual wavelength gaps are converted to energy at the population centre
REFERENCE_WAVELENGTH_NM = 777.85
FSS_TUNING_UEV = 50.0
PURCELL_FACTOR = 10.0

TUNING_KINDS = ("temperature", "strain_wavelength", "strain_fss", "purcell_xx")
_DEFAULT_RANGE = {
    "temperature": TEMPERATURE_RANGE_NM,
    "strain_wavelength": 0.0,
    "strain_fss": FSS_TUNING_UEV,
    "purcell_xx": PURCELL_FACTOR,
}
SIDE_EFFECTS = {
    "temperature": "T2* of each device divided by 1 + 2u, u = used fraction of the range",
    "strain_wavelength": "none",
    "strain_fss": "none",
    "purcell_xx": "none (XX lifetime only)",
}


@dataclass(frozen=True)
class TuningSpec:
    """One tuning mechanism.

    ``range`` is in the mechanism's own unit: nm of redshift for temperature,
    ueV for strain_fss, the Purcell factor for purcell_xx (unused for
    strain_wavelength).
    """

    kind: str
    range: float | None = None

    def __post_init__(self):
        if self.kind not in TUNING_KINDS:
            raise ValueError(f"unknown tuning kind {self.kind!r}")
        if self.range is None:
            object.__setattr__(self, "range", _DEFAULT_RANGE[self.kind])
        if self.range < 0:
            raise ValueError("tuning range must be non-negative")
        if self.kind == "purcell_xx" and self.range < 1:
            raise ValueError("Purcell factor must be at least 1")

    @property
    def side_effects(self) -> str:
        return SIDE_EFFECTS[self.kind]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "range": self.range}


@dataclass(frozen=True)
class Scenario:
    id: int
    stack: tuple[TuningSpec, ...] = ()
    zero_sigma: bool = False
    t2_star_override: GaussianSpec | None = None
    label: str = ""

    def distributions(self, dists: ParamDistributions) -> ParamDistributions:
        """Population law after this scenario's device-level changes."""
        if self.t2_star_override is not None:
            dists = ParamDistributions(
                dists.wavelength_x, dists.fss, dists.t1_x, dists.t1_xx, self.t2_star_override
            )
        if self.zero_sigma:
            dists = dists.zero_sigma()
        return dists

    def apply(self, a: QdParams, b: QdParams):
        return apply_stack(a, b, self.stack)

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "label": self.label,
            "stack": [t.to_dict() for t in self.stack],
            "zero_sigma": self.zero_sigma,
            "t2_star_override_ns": None,
        }
        if self.t2_star_override is not None:
            g = self.t2_star_override
            out["t2_star_override_ns"] = {"mu": g.mu, "sigma": g.sigma, "lower": g.lower, "upper": g.upper}
        return out

    @classmethod
    def from_dict(cls, data: dict) -> Scenario:
        allowed = {"id", "label", "stack", "zero_sigma", "t2_star_override_ns"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        override = data.get("t2_star_override_ns")
        stack = []
        for item in data.get("stack", []):
            extra = set(item) - {"kind", "range"}
            if extra:
                raise ValueError(f"unknown tuning keys: {sorted(extra)}")
            stack.append(TuningSpec(item["kind"], item.get("range")))
        return cls(
            id=int(data.get("id", 0)),
            stack=tuple(stack),
            zero_sigma=bool(data.get("zero_sigma", False)),
            t2_star_override=GaussianSpec(**override) if override else None,
            label=str(data.get("label", "")),
        )


def wavelength_detuning(a: QdParams, b: QdParams):
    """XX-XX detuning in ueV implied by the X wavelength difference."""
    mean = 0.5 * (np.asarray(a.wavelength_x) + np.asarray(b.wavelength_x))
    return energy_from_wavelength_shift(np.abs(np.asarray(a.wavelength_x) - np.asarray(b.wavelength_x)), mean)


def apply_temperature_tuning(a: QdParams, b: QdParams, max_shift: float = TEMPERATURE_RANGE_NM):
    """Close the wavelength gap with temperature; the bluer device is tuned first.

    Each device covers at most ``max_shift`` nm of the gap. The part that
    cannot be closed is returned as a residual detuning in ueV.
    """
    la = np.asarray(a.wavelength_x, dtype=float)
    lb = np.asarray(b.wavelength_x, dtype=float)
    gap = np.abs(la - lb)
    first = np.minimum(gap, max_shift)
    second = np.minimum(gap - first, max_shift)
    residual = gap - first - second
    a_is_blue = la < lb
    shift_a = np.where(a_is_blue, first, second)
    shift_b = np.where(a_is_blue, second, first)
    # the bluer device moves up, the redder one moves down to meet it
    new_la = la + np.where(a_is_blue, shift_a, -shift_a)
    new_lb = lb + np.where(a_is_blue, -shift_b, shift_b)
    used_a = shift_a / max_shift if max_shift > 0 else np.zeros_like(gap)
    used_b = shift_b / max_shift if max_shift > 0 else np.zeros_like(gap)
    a2 = a.replace(wavelength_x=_like(a.wavelength_x, new_la), t2_star=_like(a.t2_star, a.t2_star / (1.0 + COHERENCE_LOSS * used_a)))
    b2 = b.replace(wavelength_x=_like(b.wavelength_x, new_lb), t2_star=_like(b.t2_star, b.t2_star / (1.0 + COHERENCE_LOSS * used_b)))
    detuning = energy_from_wavelength_shift(residual, REFERENCE_WAVELENGTH_NM)
    return a2, b2, _like(a.wavelength_x, detuning)


def apply_strain_wavelength(a: QdParams, b: QdParams):
    """Ideal wavelength tuning: resonance without touching any other property."""
    return a, b, 0.0


def apply_strain_fss(params: QdParams, magnitude: float = FSS_TUNING_UEV) -> QdParams:
    if magnitude < 0:
        raise ValueError("magnitude must be non-negative")
    return params.replace(fss=_like(params.fss, np.maximum(0.0, np.asarray(params.fss) - magnitude)))


def apply_purcell(params: QdParams, f_p: float = PURCELL_FACTOR) -> QdParams:
    """Selective Purcell enhancement of the XX transition."""
    if f_p < 1:
        raise ValueError("Purcell factor must be at least 1")
    return params.replace(t1_xx=params.t1_xx / f_p)


def apply_stack(a: QdParams, b: QdParams, stack) -> tuple[QdParams, QdParams, object]:
    detuning = wavelength_detuning(a, b)
    for step in stack:
        if step.kind == "temperature":
            a, b, detuning = apply_temperature_tuning(a, b, step.range)
        elif step.kind == "strain_wavelength":
            a, b, detuning = apply_strain_wavelength(a, b)
        elif step.kind == "strain_fss":
            a, b = apply_strain_fss(a, step.range), apply_strain_fss(b, step.range)
        elif step.kind == "purcell_xx":
            a, b = apply_purcell(a, step.range), apply_purcell(b, step.range)
    return a, b, detuning


def _like(template, value):
    """Return a Python float when both template and value are scalars, else an array."""
    return float(value) if np.ndim(template) == 0 and np.ndim(value) == 0 else np.asarray(value)


_TEMPERATURE = TuningSpec("temperature")
_STRAIN_WL = TuningSpec("strain_wavelength")
_STRAIN_FSS = TuningSpec("strain_fss", FSS_TUNING_UEV)
_PURCELL = TuningSpec("purcell_xx", PURCELL_FACTOR)
_LONG_T2 = GaussianSpec(4.0, 2.0, lower=0.04)


def scenario_preset(scenario_id: int) -> Scenario:
    presets = {
        1: Scenario(1, (_TEMPERATURE,), label="temperature tuning"),
        2: Scenario(2, (_STRAIN_WL,), label="ideal wavelength tuning"),
        3: Scenario(3, (_STRAIN_WL, _STRAIN_FSS), label="+ FSS tuning 50 ueV"),
        4: Scenario(4, (_STRAIN_WL, _STRAIN_FSS, _PURCELL), label="+ XX Purcell factor 10"),
        5: Scenario(5, (_STRAIN_WL, _STRAIN_FSS, _PURCELL), t2_star_override=_LONG_T2, label="+ T2* 4 ns"),
        6: Scenario(
            6, (_STRAIN_WL, _STRAIN_FSS, _PURCELL), zero_sigma=True, t2_star_override=_LONG_T2, label="as 5, no spread"
        ),
    }
    try:
        return presets[int(scenario_id)]
    except KeyError:
        raise ValueError(f"scenario id must be 1..6, got {scenario_id}") from None
