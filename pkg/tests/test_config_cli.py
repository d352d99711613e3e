import json

import pytest

from qdswap.cli import main
from qdswap.config import ConfigError, load_config, mc_config, parse_config
from qdswap.tomography import counts_to_csv, forward_counts
from qdswap.cascade import QdParams


def run_cli(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def test_defaults_parse():
    cfg = parse_config(None)
    assert cfg.section("swap")["t1x_ns"] == 0.3
    assert cfg.section("montecarlo")["swap"]["include_cascade"] is True


@pytest.mark.parametrize(
    "data",
    [
        {"bogus": {}},
        {"pair": {"fss": 1.0}},
        {"montecarlo": {"dists_a": {"wavelength": {"mu": 1, "sigma": 1}}}},
        {"montecarlo": {"dists_a": {"fss_ueV": {"mu": 1, "sigma": 1, "shape": 2}}}},
        {"montecarlo": {"swap": {"ideal": True}}},
        {"montecarlo": {"scenario": {"id": 9, "stack": [{"kind": "temperature", "extra": 1}]}}},
    ],
)
def test_unknown_keys_rejected(data):
    with pytest.raises(ConfigError):
        parse_config(data)


@pytest.mark.parametrize(
    "data",
    [
        {"pair": {"t1x_ns": -0.3}},
        {"pair": {"gate_ns": 0}},
        {"swap": {"target": "psi_zero"}},
        {"resonance": {"sigma_a_nm": -1}},
        {"montecarlo": {"n_samples": 0}},
        {"montecarlo": {"scenario": 7}},
        {"montecarlo": {"dists_a": {"fss_ueV": {"mu": 1, "sigma": -1}}}},
        {"tomography": {"basis": "huge"}},
        {"sweep": {"gate_ns": [0.1, -1]}},
    ],
)
def test_invalid_values_rejected(data):
    with pytest.raises(ConfigError):
        parse_config(data)


def test_roundtrip_idempotent(tmp_path):
    data = {
        "swap": {"fss_a_ueV": 2.0, "ideal_bsm": True},
        "montecarlo": {
            "seed": 5,
            "scenario": {"id": 7, "label": "custom", "stack": [{"kind": "purcell_xx", "range": 3}]},
            "dists_b": {"t2star_ns": {"mu": 1.0, "sigma": 0.2, "lower": 0.01}},
        },
    }
    once = parse_config(data).dumps()
    twice = parse_config(json.loads(once)).dumps()
    assert once == twice
    p = tmp_path / "c.json"
    p.write_text(once)
    assert load_config(p).dumps() == once
    mc = mc_config(load_config(p).section("montecarlo"))
    assert mc.scenario.stack[0].range == 3 and mc.dists_b.t2_star.mu == 1.0


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_pair_command(capsys):
    rc, out, _ = run_cli(capsys, "pair", "--fss", "0")
    assert rc == 0 and "1.000000" in out
    rc, out, _ = run_cli(capsys, "pair", "--fss", "4.22", "--t1x", "0.3")
    assert "0.606396" in out
    _, out, _ = run_cli(capsys, "pair", "--fss", "4.22", "--csv")
    _, gated, _ = run_cli(capsys, "pair", "--fss", "4.22", "--gate", "0.5", "--csv")
    header, row = out.splitlines()
    assert header.startswith("fss_ueV,t1x_ns,gate_ns")
    idx = header.split(",").index("fidelity_1")
    assert float(gated.splitlines()[1].split(",")[idx]) > float(row.split(",")[idx])


def test_swap_command(capsys):
    _, out, _ = run_cli(capsys, "swap", "--fss-a", "0", "--fss-b", "0", "--ideal-bsm")
    assert "1.000000" in out
    _, out, _ = run_cli(capsys, "swap", "--fss-a", "2", "--fss-b", "2", "--t1x", "0.3", "--ideal-bsm")
    assert "0.773083" in out
    rc, out, _ = run_cli(capsys, "swap", "--grid", "0:20:41", "--ideal-bsm")
    lines = out.splitlines()
    assert rc == 0 and lines[0] == "fss_a_ueV,fss_b_ueV,fidelity_1"
    assert len(lines) == 1 + 41 * 41


def test_swap_grid_from_config(capsys, tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"sweep": {"swap_grid_ueV": [0, 4, 3]}}))
    _, out, _ = run_cli(capsys, "--config", str(p), "swap", "--grid")
    assert len(out.splitlines()) == 10


def test_resonance_command(capsys):
    _, out, _ = run_cli(capsys, "resonance", "--mu-a", "780", "--mu-b", "780", "--sigma-a", "0", "--sigma-b", "0")
    assert "1.000000" in out
    _, out, _ = run_cli(capsys, "resonance", "--mu-a", "779.85", "--sigma-a", "1", "--sigma-b", "1")
    assert "0.497661" in out
    _, out, _ = run_cli(capsys, "resonance", "--sweep", "--dmu", "0:4:5", "--sigma", "0.5:2:4")
    lines = out.splitlines()
    assert lines[0] == "delta_mu_nm,sigma_nm,probability_1" and len(lines) == 21


def test_montecarlo_command(capsys, tmp_path):
    prefix = tmp_path / "s6"
    rc, out, _ = run_cli(capsys, "montecarlo", "--scenario", "6", "--seed", "1", "--samples", "1000", "--out", str(prefix))
    assert rc == 0
    dens = [float(r.split(",")[2]) for r in (tmp_path / "s6.csv").read_text().splitlines()[1:]]
    assert sum(d > 0 for d in dens) == 1
    rc, out, _ = run_cli(capsys, "montecarlo", "--scenario", "5", "--seed", "1", "--samples", "50000", "--out", str(prefix))
    assert float(out.split("median fidelity:")[1].split()[0]) >= 0.9


def test_montecarlo_needs_seed(capsys, tmp_path):
    rc, _, err = run_cli(capsys, "montecarlo", "--samples", "10", "--out", str(tmp_path / "x"))
    assert rc == 2 and "seed" in err


def test_montecarlo_rerun_identical(capsys, tmp_path):
    for name, workers in (("a", "1"), ("b", "4")):
        args = ["--scenario", "3", "--seed", "9", "--samples", "140000", "--workers", workers]
        run_cli(capsys, "montecarlo", *args, "--dump-samples", "--out", str(tmp_path / name))
    for suffix in (".csv", ".summary.txt", ".samples.csv"):
        assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()


def test_tomography_and_reconstruct(capsys, tmp_path):
    counts, mat = tmp_path / "n.csv", tmp_path / "m.csv"
    rc, out, _ = run_cli(capsys, "tomography", "--fss", "4.22", "--counts-out", str(counts), "--matrix-out", str(mat))
    assert rc == 0 and "0.606396" in out
    assert counts.read_text().startswith("basis_label,counts,gate_ns\n")
    assert mat.read_text().startswith("part,row,HH,HV,VH,VV\n")
    rc, out, _ = run_cli(capsys, "reconstruct", "--counts", str(counts), "--matrix-out", str(tmp_path / "r.csv"))
    assert rc == 0 and "0.606396" in out
    assert (tmp_path / "r.csv").read_bytes() == mat.read_bytes()


def test_tomography_gate_sweep(capsys):
    _, out, _ = run_cli(capsys, "tomography", "--gate-sweep")
    lines = out.splitlines()
    assert lines[0] == "gate_ns,accepted_counts,fidelity_1" and len(lines) == 7


def test_exit_codes(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"pair": {"colour": 1}}))
    assert run_cli(capsys, "--config", str(bad), "pair")[0] == 2
    assert run_cli(capsys, "pair", "--t1x", "-1")[0] == 2
    assert run_cli(capsys, "tomography", "--noise")[0] == 2
    zero = tmp_path / "zero.csv"
    zero.write_text(counts_to_csv(forward_counts(QdParams(fss=1.0), shots=0)))
    assert run_cli(capsys, "reconstruct", "--counts", str(zero))[0] == 3
    partial = tmp_path / "partial.csv"
    partial.write_text(counts_to_csv(forward_counts(QdParams(fss=1.0))[:5]))
    assert run_cli(capsys, "reconstruct", "--counts", str(partial))[0] == 3
    assert run_cli(capsys, "reconstruct", "--counts", str(tmp_path / "none.csv"))[0] == 2


def test_fit_command(capsys, tmp_path):
    p = tmp_path / "wl.csv"
    p.write_text("wavelength_nm\n-1\n1\n")
    out_path = tmp_path / "fit.json"
    rc, out, _ = run_cli(capsys, "fit", "--samples", str(p), "--out", str(out_path))
    assert rc == 0 and "2 samples" in out
    fitted = json.loads(out_path.read_text())
    assert fitted == {"wavelength_nm": {"mu": 0.0, "sigma": 1.0, "lower": None, "upper": None}}
    # emitted spec is accepted by the config parser
    parse_config({"montecarlo": {"dists_a": fitted}})


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "qdswap" in capsys.readouterr().out
