"""Command-line entry point ``qdswap``.

Exit codes: 0 success, 2 configuration or usage error, 3 numeric failure.
Flags override values from ``--config``; units are fixed (nm, ueV, ns).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cascade import QdParams, coherence_factor, gate_acceptance, pair_fidelity
from .config import ConfigError, RunConfig, load_config, mc_config, parse_config, swap_model
from .device_stats import GaussianSpec, fit_gaussian, load_samples_csv, resonance_probability
from .montecarlo import run as run_montecarlo
from .montecarlo import write_outputs
from .polarization import BELL_KINDS, bell_state, fidelity
from .swap import swap_fidelity_analytic
from .tomography import (
    TomographyError,
    accepted_counts,
    counts_from_csv,
    counts_to_csv,
    forward_counts,
    matrix_to_csv,
    reconstruct,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class NumericFailure(RuntimeError):
    pass


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:num`` -> inclusive linspace."""
    try:
        lo, hi, num = text.split(":")
        num = int(num)
    except ValueError:
        raise ConfigError(f"grid must look like start:stop:num, got {text!r}") from None
    if num < 1:
        raise ConfigError("grid needs at least one point")
    return np.linspace(float(lo), float(hi), num)


def _grid_from_list(spec) -> np.ndarray:
    lo, hi, num = spec
    return np.linspace(float(lo), float(hi), int(num))


def _merge(section: dict, **overrides) -> dict:
    for key, value in overrides.items():
        if value is not None:
            section[key] = value
    return section


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _finite(*values) -> None:
    if not np.all(np.isfinite(np.asarray(values, dtype=float))):
        raise NumericFailure("non-finite result")


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def cmd_pair(args, cfg: RunConfig) -> int:
    p = _merge(
        cfg.section("pair"),
        fss_ueV=args.fss, t1x_ns=args.t1x, t2star_ns=args.t2star, gate_ns=args.gate,
        target=args.target, cross_dephasing=args.cross_dephasing,
    )  # fmt: skip
    cfg = parse_config({"pair": p})
    p = cfg.section("pair")
    params = QdParams(fss=p["fss_ueV"], t1_x=p["t1x_ns"], t2_star=p["t2star_ns"])
    c = complex(coherence_factor(params.fss, params.t1_x, p["gate_ns"], params.t2_star if p["cross_dephasing"] else None))
    f = pair_fidelity(params, p["gate_ns"], p["target"], p["cross_dephasing"])
    acc = float(gate_acceptance(params.t1_x, p["gate_ns"]))
    _finite(f, abs(c), acc)
    gate = "" if p["gate_ns"] is None else _fmt(p["gate_ns"])
    if args.csv:
        _emit(
            _csv_text(
                ["fss_ueV", "t1x_ns", "gate_ns", "target", "fidelity_1", "coherence_abs_1", "gate_acceptance_1"],
                [[_fmt(params.fss), _fmt(params.t1_x), gate, p["target"], _fmt(f), _fmt(abs(c)), _fmt(acc)]],
            ),
            args.out,
        )
    else:
        _emit(
            f"fidelity ({p['target']}): {f:.6f}\n|coherence|: {abs(c):.6f}\n"
            f"gate acceptance: {acc:.6f}\n",
            args.out,
        )
    return EXIT_OK


def cmd_swap(args, cfg: RunConfig) -> int:
    s = _merge(
        cfg.section("swap"),
        fss_a_ueV=args.fss_a, fss_b_ueV=args.fss_b, t1x_ns=args.t1x, t1xx_ns=args.t1xx,
        t2star_ns=args.t2star, detuning_ueV=args.detuning, target=args.target,
        ideal_bsm=args.ideal_bsm, include_cascade=args.cascade,
        cross_dephasing=args.cross_dephasing, bsm_timing_ambiguity=args.timing_ambiguity,
    )  # fmt: skip
    cfg = parse_config({"swap": s, "sweep": cfg.section("sweep")})
    s = cfg.section("swap")
    model = swap_model(s)
    common = dict(t1_x=s["t1x_ns"], t1_xx=s["t1xx_ns"], t2_star=s["t2star_ns"])
    if args.grid is not None:
        grid = parse_grid(args.grid) if args.grid != "config" else _grid_from_list(cfg.section("sweep")["swap_grid_ueV"])
        if np.any(grid < 0):
            raise ConfigError("FSS grid values must be non-negative")
        sa, sb = np.meshgrid(grid, grid, indexing="ij")
        f = swap_fidelity_analytic(
            QdParams(fss=sa.ravel(), **common), QdParams(fss=sb.ravel(), **common), s["detuning_ueV"], model
        )
        f = np.broadcast_to(f, sa.ravel().shape)
        _finite(*f)
        rows = [[_fmt(x), _fmt(y), _fmt(z)] for x, y, z in zip(sa.ravel(), sb.ravel(), f)]
        _emit(_csv_text(["fss_a_ueV", "fss_b_ueV", "fidelity_1"], rows), args.out)
        return EXIT_OK
    a = QdParams(fss=s["fss_a_ueV"], **common)
    b = QdParams(fss=s["fss_b_ueV"], **common)
    f = swap_fidelity_analytic(a, b, s["detuning_ueV"], model)
    _finite(f)
    if args.csv:
        _emit(
            _csv_text(
                ["fss_a_ueV", "fss_b_ueV", "fidelity_1"], [[_fmt(a.fss), _fmt(b.fss), _fmt(f)]]
            ),
            args.out,
        )
    else:
        _emit(f"swapped fidelity ({model.target}): {f:.6f}\n", args.out)
    return EXIT_OK


def cmd_resonance(args, cfg: RunConfig) -> int:
    r = _merge(
        cfg.section("resonance"),
        mu_a_nm=args.mu_a, mu_b_nm=args.mu_b, sigma_a_nm=args.sigma_a, sigma_b_nm=args.sigma_b,
        tune_a_nm=args.tune_a, tune_b_nm=args.tune_b,
    )  # fmt: skip
    cfg = parse_config({"resonance": r, "sweep": cfg.section("sweep")})
    r = cfg.section("resonance")
    if args.sweep:
        sweep = cfg.section("sweep")
        dmus = parse_grid(args.dmu) if args.dmu else _grid_from_list(sweep["resonance_dmu_nm"])
        sigmas = parse_grid(args.sigma) if args.sigma else _grid_from_list(sweep["resonance_sigma_nm"])
        if np.any(sigmas < 0):
            raise ConfigError("sigma grid must be non-negative")
        rows = []
        for dmu in dmus:
            for sig in sigmas:
                p = resonance_probability(
                    GaussianSpec(0.0, sig), GaussianSpec(-dmu, sig), r["tune_a_nm"], r["tune_b_nm"]
                )
                rows.append([_fmt(dmu), _fmt(sig), _fmt(p)])
        _emit(_csv_text(["delta_mu_nm", "sigma_nm", "probability_1"], rows), args.out)
        return EXIT_OK
    p = resonance_probability(
        GaussianSpec(r["mu_a_nm"], r["sigma_a_nm"]),
        GaussianSpec(r["mu_b_nm"], r["sigma_b_nm"]),
        r["tune_a_nm"],
        r["tune_b_nm"],
    )
    _finite(p)
    _emit(f"resonance probability: {p:.6f}\n", args.out)
    return EXIT_OK


def cmd_montecarlo(args, cfg: RunConfig) -> int:
    m = _merge(cfg.section("montecarlo"), scenario=args.scenario, seed=args.seed, n_samples=args.samples, bins=args.bins)
    cfg = parse_config({"montecarlo": m})
    mc = mc_config(cfg.section("montecarlo"))
    h = run_montecarlo(mc, workers=args.workers, keep_samples=args.dump_samples)
    _finite(h.summary["mean"])
    csv_path, txt_path = write_outputs(h, Path(args.out))
    sys.stdout.write(h.summary_text())
    sys.stdout.write(f"wrote {csv_path} and {txt_path}\n")
    return EXIT_OK


def cmd_tomography(args, cfg: RunConfig) -> int:
    t = _merge(
        cfg.section("tomography"),
        fss_ueV=args.fss, t1x_ns=args.t1x, t2star_ns=args.t2star, gate_ns=args.gate,
        shots=args.shots, noise=args.noise, seed=args.seed, basis=args.basis,
        cross_dephasing=args.cross_dephasing,
    )  # fmt: skip
    cfg = parse_config({"tomography": t, "sweep": cfg.section("sweep")})
    t = cfg.section("tomography")
    if t["noise"] and t["seed"] is None:
        raise ConfigError("noisy tomography needs a seed (tomography.seed or --seed)")
    params = QdParams(fss=t["fss_ueV"], t1_x=t["t1x_ns"], t2_star=t["t2star_ns"])
    target = bell_state("phi_plus")
    kwargs = dict(shots=t["shots"], noise=t["noise"], seed=t["seed"] or 0, basis=t["basis"],
                  cross_dephasing=t["cross_dephasing"])  # fmt: skip
    if args.gate_sweep:
        rows = []
        for g in cfg.section("sweep")["gate_ns"]:
            recs = forward_counts(params, g, **kwargs)
            f = fidelity(reconstruct(recs).rho, target)
            rows.append([_fmt(g), _fmt(accepted_counts(recs)), _fmt(f)])
        _emit(_csv_text(["gate_ns", "accepted_counts", "fidelity_1"], rows), args.out)
        return EXIT_OK
    recs = forward_counts(params, t["gate_ns"], **kwargs)
    rec = reconstruct(recs)
    f = fidelity(rec.rho, target)
    _finite(f)
    if args.counts_out:
        _emit(counts_to_csv(recs), args.counts_out)
    if args.matrix_out:
        _emit(matrix_to_csv(rec.rho), args.matrix_out)
    sys.stdout.write(
        f"reconstructed fidelity (phi_plus): {f:.6f}\naccepted counts: {accepted_counts(recs):.6g}\n"
        f"raw minimum eigenvalue: {rec.raw_min_eigenvalue:.3e}\n"
    )
    return EXIT_OK


def cmd_reconstruct(args, cfg: RunConfig) -> int:
    try:
        text = Path(args.counts).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.counts}: {exc}") from None
    try:
        recs = counts_from_csv(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rec = reconstruct(recs)
    _emit(matrix_to_csv(rec.rho), args.matrix_out)
    if args.matrix_out:
        f = fidelity(rec.rho, bell_state(args.target))
        sys.stdout.write(f"fidelity ({args.target}): {f:.6f}\nraw minimum eigenvalue: {rec.raw_min_eigenvalue:.3e}\n")
    return EXIT_OK


def cmd_fit(args, cfg: RunConfig) -> int:
    try:
        values, header = load_samples_csv(args.samples)
        spec = fit_gaussian(values)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    out = {header: {"mu": spec.mu, "sigma": spec.sigma, "lower": None, "upper": None}}
    sys.stdout.write(f"# {values.size} samples\n")
    _emit(json.dumps(out, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qdswap", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qdswap {__version__}")
    p.add_argument("--config", help="JSON run configuration")
    sub = p.add_subparsers(dest="cmd", required=True)
    flag = argparse.BooleanOptionalAction

    s = sub.add_parser("pair", help="pair fidelity of one cascade source")
    s.add_argument("--fss", type=float, help="fine-structure splitting (ueV)")
    s.add_argument("--t1x", type=float, help="X lifetime (ns)")
    s.add_argument("--t2star", type=float, help="pure dephasing time (ns)")
    s.add_argument("--gate", type=float, help="detection gate window (ns)")
    s.add_argument("--target", choices=BELL_KINDS)
    s.add_argument("--cross-dephasing", action=flag, default=None)
    s.add_argument("--csv", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_pair)

    s = sub.add_parser("swap", help="swapped-state fidelity of two sources")
    s.add_argument("--fss-a", type=float, help="FSS of source A (ueV)")
    s.add_argument("--fss-b", type=float, help="FSS of source B (ueV)")
    s.add_argument("--t1x", type=float, help="X lifetime of both sources (ns)")
    s.add_argument("--t1xx", type=float, help="XX lifetime of both sources (ns)")
    s.add_argument("--t2star", type=float, help="pure dephasing time (ns)")
    s.add_argument("--detuning", type=float, help="XX-XX detuning (ueV)")
    s.add_argument("--target", choices=BELL_KINDS)
    s.add_argument("--ideal-bsm", action=flag, default=None)
    s.add_argument("--cascade", action=flag, default=None, help="apply the cascade timing-jitter limit")
    s.add_argument("--cross-dephasing", action=flag, default=None)
    s.add_argument("--timing-ambiguity", action=flag, default=None)
    s.add_argument("--grid", nargs="?", const="config", help="start:stop:num FSS grid (ueV), CSV output")
    s.add_argument("--csv", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_swap)

    s = sub.add_parser("resonance", help="probability of tuning two emitters into resonance")
    for side in ("a", "b"):
        s.add_argument(f"--mu-{side}", type=float, help=f"mean wavelength of device {side.upper()} (nm)")
        s.add_argument(f"--sigma-{side}", type=float, help=f"wavelength spread of device {side.upper()} (nm)")
        s.add_argument(f"--tune-{side}", type=float, help=f"tuning range of device {side.upper()} (nm)")
    s.add_argument("--sweep", action="store_true", help="emit (delta_mu, sigma, P) CSV")
    s.add_argument("--dmu", help="start:stop:num grid of mean differences (nm)")
    s.add_argument("--sigma", help="start:stop:num grid of common sigma (nm)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_resonance)

    s = sub.add_parser("montecarlo", help="fidelity distribution of a device population")
    s.add_argument("--scenario", type=int, choices=range(1, 7))
    s.add_argument("--seed", type=int)
    s.add_argument("--samples", type=int)
    s.add_argument("--bins", type=int)
    s.add_argument("--workers", type=int, help="worker threads (default: QDSWAP_THREADS or CPU count)")
    s.add_argument("--dump-samples", action="store_true", help="also write raw fidelities")
    s.add_argument("--out", default="fidelity_histogram", help="output prefix")
    s.set_defaults(func=cmd_montecarlo)

    s = sub.add_parser("tomography", help="simulate and reconstruct pair tomography")
    s.add_argument("--fss", type=float)
    s.add_argument("--t1x", type=float)
    s.add_argument("--t2star", type=float)
    s.add_argument("--gate", type=float)
    s.add_argument("--shots", type=float)
    s.add_argument("--noise", action=flag, default=None)
    s.add_argument("--seed", type=int)
    s.add_argument("--basis", choices=("minimal", "full"))
    s.add_argument("--cross-dephasing", action=flag, default=None)
    s.add_argument("--gate-sweep", action="store_true", help="CSV of counts and fidelity vs gate")
    s.add_argument("--counts-out")
    s.add_argument("--matrix-out")
    s.add_argument("--out")
    s.set_defaults(func=cmd_tomography)

    s = sub.add_parser("reconstruct", help="reconstruct a density matrix from a counts CSV")
    s.add_argument("--counts", required=True)
    s.add_argument("--target", choices=BELL_KINDS, default="phi_plus")
    s.add_argument("--matrix-out")
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("fit", help="fit a Gaussian to a one-column sample CSV")
    s.add_argument("--samples", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_fit)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else parse_config({})
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"qdswap: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericFailure, TomographyError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"qdswap: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"qdswap: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
