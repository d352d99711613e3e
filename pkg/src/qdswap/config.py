"""Run configuration: a JSON file with one section per command.

Keys carry their unit as a suffix (``t1x_ns``, ``fss_ueV``, ``mu_nm``).
Unknown keys are rejected and physical values are checked when parsed, so a
bad file fails before any computation starts.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

from .cascade import QdParams
from .device_stats import GaussianSpec, ParamDistributions
from .montecarlo import McConfig
from .polarization import BELL_KINDS
from .scenarios import Scenario, scenario_preset
from .swap import SwapModelConfig


class ConfigError(ValueError):
    pass


_SWAP_FLAGS = {
    "ideal_bsm": False,
    "include_cascade": False,
    "cross_dephasing": False,
    "bsm_timing_ambiguity": False,
}

SCHEMA: dict[str, dict] = {
    "pair": {
        "fss_ueV": 0.0,
        "t1x_ns": 0.3,
        "t2star_ns": 0.5,
        "gate_ns": None,
        "target": "phi_plus",
        "cross_dephasing": False,
    },
    "swap": {
        "fss_a_ueV": 0.0,
        "fss_b_ueV": 0.0,
        "t1x_ns": 0.3,
        "t1xx_ns": 0.15,
        "t2star_ns": 0.5,
        "detuning_ueV": 0.0,
        "target": "psi_minus",
        **_SWAP_FLAGS,
    },
    "resonance": {
        "mu_a_nm": 777.85,
        "mu_b_nm": 777.85,
        "sigma_a_nm": 2.19,
        "sigma_b_nm": 2.19,
        "tune_a_nm": 1.0,
        "tune_b_nm": 1.0,
    },
    "montecarlo": {
        "n_samples": 1_000_000,
        "seed": None,
        "scenario": 1,
        "bins": 200,
        "dists_a": None,
        "dists_b": None,
        "swap": None,
    },
    "tomography": {
        "fss_ueV": 4.22,
        "t1x_ns": 0.3,
        "t2star_ns": 0.5,
        "gate_ns": None,
        "shots": 1_000_000,
        "noise": False,
        "seed": None,
        "basis": "minimal",
        "cross_dephasing": False,
    },
    "sweep": {
        "swap_grid_ueV": [0.0, 20.0, 41],
        "resonance_dmu_nm": [0.0, 5.0, 51],
        "resonance_sigma_nm": [0.1, 5.0, 50],
        "gate_ns": [0.1, 0.25, 0.5, 1.0, 2.0, 3.0],
    },
}

_DIST_KEYS = {
    "wavelength_nm": "wavelength_x",
    "fss_ueV": "fss",
    "t1x_ns": "t1_x",
    "t1xx_ns": "t1_xx",
    "t2star_ns": "t2_star",
}
_MC_SWAP_DEFAULTS = {**_SWAP_FLAGS, "include_cascade": True}


def _check_keys(where: str, data: dict, allowed) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")


def _dists_to_dict(d: ParamDistributions) -> dict:
    out = {}
    for key, attr in _DIST_KEYS.items():
        g = getattr(d, attr)
        out[key] = {"mu": g.mu, "sigma": g.sigma, "lower": g.lower, "upper": g.upper}
    return out


def parse_distributions(data: dict | None, where: str) -> ParamDistributions:
    base = ParamDistributions()
    if data is None:
        return base
    _check_keys(where, data, _DIST_KEYS)
    changes = {}
    for key, spec in data.items():
        _check_keys(f"{where}.{key}", spec, ("mu", "sigma", "lower", "upper"))
        try:
            changes[_DIST_KEYS[key]] = GaussianSpec(**spec)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}.{key}: {exc}") from None
    fields = {f: changes.get(f, getattr(base, f)) for f in ParamDistributions.FIELDS}
    return ParamDistributions(**fields)


def parse_scenario(value) -> Scenario:
    try:
        if isinstance(value, dict):
            return Scenario.from_dict(value)
        return scenario_preset(int(value))
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"montecarlo.scenario: {exc}") from None


def swap_model(section: dict) -> SwapModelConfig:
    return SwapModelConfig(
        ideal_bsm=bool(section["ideal_bsm"]),
        include_cascade=bool(section["include_cascade"]),
        pair_cross_dephasing=bool(section["cross_dephasing"]),
        bsm_timing_ambiguity=bool(section["bsm_timing_ambiguity"]),
        target=section.get("target", "psi_minus"),
    )


@dataclass
class RunConfig:
    sections: dict

    def section(self, name: str) -> dict:
        return copy.deepcopy(self.sections[name])

    def to_dict(self) -> dict:
        return copy.deepcopy(self.sections)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _normalize_montecarlo(sec: dict) -> dict:
    sec["n_samples"] = int(sec["n_samples"])
    sec["bins"] = int(sec["bins"])
    if sec["seed"] is not None:
        sec["seed"] = int(sec["seed"])
    scenario = parse_scenario(sec["scenario"])
    sec["scenario"] = sec["scenario"] if not isinstance(sec["scenario"], dict) else scenario.to_dict()
    sec["dists_a"] = _dists_to_dict(parse_distributions(sec["dists_a"], "montecarlo.dists_a"))
    sec["dists_b"] = _dists_to_dict(parse_distributions(sec["dists_b"], "montecarlo.dists_b"))
    swap = dict(_MC_SWAP_DEFAULTS)
    if sec["swap"] is not None:
        _check_keys("montecarlo.swap", sec["swap"], _SWAP_FLAGS)
        swap.update(sec["swap"])
    sec["swap"] = swap
    return sec


def validate(sections: dict) -> None:
    """Build the domain objects once so invalid physics fails at parse time."""
    try:
        p = sections["pair"]
        QdParams(fss=p["fss_ueV"], t1_x=p["t1x_ns"], t2_star=p["t2star_ns"])
        if p["gate_ns"] is not None and p["gate_ns"] <= 0:
            raise ValueError("pair.gate_ns must be positive")
        if p["target"] not in BELL_KINDS:
            raise ValueError(f"pair.target must be one of {BELL_KINDS}")
        s = sections["swap"]
        for side in ("a", "b"):
            QdParams(fss=s[f"fss_{side}_ueV"], t1_x=s["t1x_ns"], t1_xx=s["t1xx_ns"], t2_star=s["t2star_ns"])
        swap_model(s)
        r = sections["resonance"]
        for side in ("a", "b"):
            GaussianSpec(r[f"mu_{side}_nm"], r[f"sigma_{side}_nm"])
            if r[f"tune_{side}_nm"] < 0:
                raise ValueError("tuning ranges must be non-negative")
        m = sections["montecarlo"]
        McConfig(
            n_samples=m["n_samples"],
            seed=0 if m["seed"] is None else m["seed"],
            scenario=parse_scenario(m["scenario"]),
            bins=m["bins"],
        )
        t = sections["tomography"]
        QdParams(fss=t["fss_ueV"], t1_x=t["t1x_ns"], t2_star=t["t2star_ns"])
        if t["shots"] < 0:
            raise ValueError("tomography.shots must be non-negative")
        if t["basis"] not in ("minimal", "full"):
            raise ValueError("tomography.basis must be 'minimal' or 'full'")
        if t["gate_ns"] is not None and t["gate_ns"] <= 0:
            raise ValueError("tomography.gate_ns must be positive")
        w = sections["sweep"]
        for key in ("swap_grid_ueV", "resonance_dmu_nm", "resonance_sigma_nm"):
            lo, hi, num = w[key]
            if int(num) < 1:
                raise ValueError(f"sweep.{key}: point count must be positive")
        if any(g <= 0 for g in w["gate_ns"]):
            raise ValueError("sweep.gate_ns entries must be positive")
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None


def parse_config(data: dict | None) -> RunConfig:
    data = {} if data is None else data
    _check_keys("config", data, SCHEMA)
    sections = {}
    for name, defaults in SCHEMA.items():
        given = data.get(name, {})
        _check_keys(name, given, defaults)
        sec = copy.deepcopy(defaults)
        sec.update(copy.deepcopy(given))
        sections[name] = sec
    sections["montecarlo"] = _normalize_montecarlo(sections["montecarlo"])
    validate(sections)
    return RunConfig(sections)


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(data)


def mc_config(sec: dict) -> McConfig:
    if sec["seed"] is None:
        raise ConfigError("montecarlo needs a seed (config key montecarlo.seed or --seed)")
    return McConfig(
        n_samples=sec["n_samples"],
        seed=sec["seed"],
        scenario=parse_scenario(sec["scenario"]),
        dists_a=parse_distributions(sec["dists_a"], "montecarlo.dists_a"),
        dists_b=parse_distributions(sec["dists_b"], "montecarlo.dists_b"),
        bins=sec["bins"],
        swap=swap_model({**sec["swap"], "target": "psi_minus"}),
    )
