"""Population Monte Carlo of the swapped-state fidelity.

For every sample two devices are drawn, the scenario's tuning stack is
applied, and the closed-form swap fidelity is evaluated. Samples are
processed in fixed blocks with their own random streams, so the histogram is
bit-identical for a given seed whatever the number of worker threads.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .device_stats import ParamDistributions
from .rng import block_rng, check_seed, map_blocks
from .scenarios import Scenario, scenario_preset
from .swap import SwapModelConfig, swap_fidelity_analytic

FIDELITY_RANGE = (0.5, 1.0)
PERCENTILES = (1, 5, 25, 75, 95, 99)


@dataclass(frozen=True)
class McConfig:
    n_samples: int = 1_000_000
    seed: int = 0
    scenario: Scenario = field(default_factory=lambda: scenario_preset(1))
    dists_a: ParamDistributions = field(default_factory=ParamDistributions)
    dists_b: ParamDistributions = field(default_factory=ParamDistributions)
    bins: int = 200
    swap: SwapModelConfig = field(default_factory=lambda: SwapModelConfig(include_cascade=True))

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.bins < 2:
            raise ValueError("bins must be at least 2")
        check_seed(self.seed)

    def describe(self) -> dict:
        """Plain-data echo of the configuration for provenance records."""
        d = {
            "n_samples": self.n_samples,
            "seed": self.seed,
            "bins": self.bins,
            "scenario": self.scenario.to_dict(),
            "swap": asdict(self.swap),
            "dists_a": {f: asdict(getattr(self.dists_a, f)) for f in ParamDistributions.FIELDS},
            "dists_b": {f: asdict(getattr(self.dists_b, f)) for f in ParamDistributions.FIELDS},
        }
        return d


@dataclass
class FidelityHistogram:
    edges: np.ndarray
    densities: np.ndarray
    counts: np.ndarray
    n_samples: int
    summary: dict
    provenance: dict
    samples: np.ndarray | None = None

    @property
    def bin_width(self) -> float:
        return float(self.edges[1] - self.edges[0])

    def mass(self, lo: float, hi: float) -> float:
        return summarize(self, (lo, hi))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fidelity_lo_1", "fidelity_hi_1", "density_per_fidelity"])
        for lo, hi, d in zip(self.edges[:-1], self.edges[1:], self.densities):
            w.writerow([f"{lo:.6f}", f"{hi:.6f}", f"{d:.12g}"])
        return buf.getvalue()

    def summary_text(self) -> str:
        s = self.summary
        sc = self.provenance["config"]["scenario"]
        lines = [
            f"qdswap {self.provenance['version']} montecarlo",
            f"scenario: {sc['id']} ({sc['label']})",
            f"samples: {self.n_samples}  seed: {self.provenance['config']['seed']}",
            f"mean fidelity: {s['mean']:.6f}",
            f"median fidelity: {s['median']:.6f}",
        ]
        lines += [f"p{p:02d}: {s['percentiles'][p]:.6f}" for p in PERCENTILES]
        lines.append(f"samples outside [0.5, 1]: {s['out_of_range']}")
        return "\n".join(lines) + "\n"


def _block_fidelities(cfg: McConfig, block: int, n: int) -> np.ndarray:
    rng = block_rng(cfg.seed, block)
    sc = cfg.scenario
    a = sc.distributions(cfg.dists_a).sample(rng, n)
    b = sc.distributions(cfg.dists_b).sample(rng, n)
    a, b, detuning = sc.apply(a, b)
    return np.asarray(swap_fidelity_analytic(a, b, detuning, cfg.swap), dtype=float)


def sample_fidelities(cfg: McConfig, workers: int | None = None) -> np.ndarray:
    parts = map_blocks(lambda k, start, stop: _block_fidelities(cfg, k, stop - start), cfg.n_samples, workers)
    return np.concatenate(parts)


def run(cfg: McConfig, workers: int | None = None, keep_samples: bool = False) -> FidelityHistogram:
    f = sample_fidelities(cfg, workers)
    lo, hi = FIDELITY_RANGE
    out_of_range = int(np.count_nonzero((f < lo) | (f > hi)))
    counts, edges = np.histogram(np.clip(f, lo, hi), bins=cfg.bins, range=FIDELITY_RANGE)
    densities = counts / (cfg.n_samples * np.diff(edges))
    summary = {
        "mean": float(f.mean()),
        "median": float(np.median(f)),
        "percentiles": {p: float(v) for p, v in zip(PERCENTILES, np.percentile(f, PERCENTILES))},
        "min": float(f.min()),
        "max": float(f.max()),
        "out_of_range": out_of_range,
    }
    provenance = {"version": __version__, "config": cfg.describe()}
    return FidelityHistogram(edges, densities, counts, cfg.n_samples, summary, provenance, f if keep_samples else None)


def summarize(h: FidelityHistogram, frange: tuple[float, float]) -> float:
    """Probability mass of the histogram density inside ``[lo, hi]``.

    The density is piecewise constant, so the integral is exact.
    """
    lo, hi = frange
    if hi <= lo:
        return 0.0
    left = np.clip(h.edges[:-1], lo, hi)
    right = np.clip(h.edges[1:], lo, hi)
    return float(np.sum(h.densities * (right - left)))


def write_outputs(h: FidelityHistogram, out: Path) -> tuple[Path, Path]:
    """Write ``<out>.csv`` (histogram) and ``<out>.summary.txt``; returns both paths."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_path = out.with_suffix(".csv")
    txt_path = out.with_suffix(".summary.txt")
    csv_path.write_text(h.to_csv())
    txt_path.write_text(h.summary_text())
    if h.samples is not None:
        np.savetxt(out.with_suffix(".samples.csv"), h.samples, fmt="%.17g", header="fidelity_1", comments="")
    return csv_path, txt_path
