import numpy as np
import pytest

from qdswap.cascade import QdParams, pair_fidelity
from qdswap.polarization import bell_state, fidelity
from qdswap.tomography import (
    FULL_SETTINGS,
    MINIMAL_SETTINGS,
    CoincidenceRecord,
    MeasurementBasis,
    TomographyError,
    accepted_counts,
    counts_from_csv,
    counts_to_csv,
    forward_counts,
    gated_pair_density,
    matrix_to_csv,
    projector,
    reconstruct,
)

PHI = bell_state("phi_plus")


def test_projectors_rank_one_unit_trace():
    for label in FULL_SETTINGS:
        p = projector(label)
        assert np.trace(p).real == pytest.approx(1.0)
        assert np.allclose(p @ p, p)
        assert np.allclose(p, p.conj().T)
    assert len(MINIMAL_SETTINGS) == 16 and len(FULL_SETTINGS) == 36
    with pytest.raises(TomographyError):
        projector("HX")


def test_bell_state_roundtrip():
    rec = forward_counts(QdParams(fss=0.0), shots=1e6)
    rho = reconstruct(rec).rho
    assert fidelity(rho, PHI) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("basis", ["minimal", "full"])
@pytest.mark.parametrize("fss,gate", [(4.22, None), (4.22, 0.5), (11.0, 0.2), (25.0, None)])
def test_noiseless_roundtrip(basis, fss, gate):
    p = QdParams(fss=fss)
    rho_true = gated_pair_density(p, gate)
    rec = reconstruct(forward_counts(p, gate, shots=1e6, basis=basis))
    assert np.max(np.abs(rec.rho.entries - rho_true.entries)) < 1e-9
    assert abs(fidelity(rec.rho, PHI) - pair_fidelity(p, gate)) <= 1e-9


def test_ungated_anchor():
    rec = reconstruct(forward_counts(QdParams(fss=4.22)))
    assert fidelity(rec.rho, PHI) == pytest.approx(0.6064, abs=1e-4)
    assert abs(fidelity(rec.rho, PHI) - 0.6063957) < 1e-6


def test_poisson_noise():
    rec = forward_counts(QdParams(fss=4.22), shots=1e6, noise=True, seed=12)
    assert all(isinstance(r.counts, int) for r in rec)
    f = fidelity(reconstruct(rec).rho, PHI)
    assert abs(f - 0.6064) < 0.01
    again = forward_counts(QdParams(fss=4.22), shots=1e6, noise=True, seed=12)
    assert [r.counts for r in again] == [r.counts for r in rec]


def test_reconstruction_is_physical_under_noise():
    rec = reconstruct(forward_counts(QdParams(fss=0.0), shots=200, noise=True, seed=1))
    assert rec.rho.is_valid()
    assert rec.raw_eigenvalues.min() <= rec.rho.eigenvalues().min() + 1e-12


def test_zero_shots():
    rec = forward_counts(QdParams(fss=4.22), shots=0)
    assert accepted_counts(rec) == 0
    with pytest.raises(TomographyError):
        reconstruct(rec)


def test_incomplete_basis():
    rec = forward_counts(QdParams(fss=4.22))[:10]
    with pytest.raises(TomographyError):
        reconstruct(rec)
    with pytest.raises(TomographyError):
        reconstruct([])


def test_gate_tradeoff():
    p = QdParams(fss=4.22)
    gates = [0.1, 0.25, 0.5, 1, 2, 3]
    fid = [fidelity(reconstruct(forward_counts(p, g)).rho, PHI) for g in gates]
    counts = [accepted_counts(forward_counts(p, g)) for g in gates]
    assert all(np.diff(fid) < 0) and all(np.diff(counts) > 0)


def test_named_basis():
    assert MeasurementBasis.named("full").labels == FULL_SETTINGS
    with pytest.raises(ValueError):
        MeasurementBasis.named("tiny")


def test_csv_roundtrip():
    rec = forward_counts(QdParams(fss=4.22), 0.5, noise=True, seed=4)
    back = counts_from_csv(counts_to_csv(rec))
    assert [r.label for r in back] == [r.label for r in rec]
    assert [r.observed for r in back] == [r.observed for r in rec]
    assert back[0].gate_window == 0.5
    exact = forward_counts(QdParams(fss=4.22))
    back = counts_from_csv(counts_to_csv(exact))
    assert [r.observed for r in back] == [r.observed for r in exact]


def test_csv_errors():
    with pytest.raises(TomographyError):
        counts_from_csv("label,n\nHH,1\n")
    with pytest.raises(TomographyError):
        counts_from_csv("basis_label,counts,gate_ns\nHH,-1,\n")


def test_matrix_csv():
    text = matrix_to_csv(gated_pair_density(QdParams(fss=4.22)))
    lines = text.splitlines()
    assert lines[0] == "part,row,HH,HV,VH,VV"
    assert len(lines) == 9


def test_record_observed():
    assert CoincidenceRecord("HH", 0, 2.5, None, None).observed == 2.5
    assert CoincidenceRecord("HH", 0, 2.5, 3, None).observed == 3
