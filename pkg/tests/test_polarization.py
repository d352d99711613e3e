import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdswap.polarization import (
    BELL_KINDS,
    DensityMatrix,
    DimensionError,
    Ket,
    basis_ket,
    bell_state,
    fidelity,
    project,
    tensor,
)
from qdswap.swap import four_photon_state

R2 = 1 / np.sqrt(2)


def random_ket(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return Ket(v / np.linalg.norm(v))


def test_bell_amplitudes():
    np.testing.assert_allclose(bell_state("psi_minus").amplitudes, [0, R2, -R2, 0], atol=1e-15)
    np.testing.assert_allclose(bell_state("phi_plus").amplitudes, [R2, 0, 0, R2], atol=1e-15)
    assert abs(bell_state("psi_minus").inner(bell_state("psi_plus"))) < 1e-15


def test_bell_basis_orthonormal():
    m = np.array([bell_state(k).amplitudes for k in BELL_KINDS])
    np.testing.assert_allclose(m.conj() @ m.T, np.eye(4), atol=1e-15)


def test_unknown_bell_state():
    with pytest.raises(ValueError):
        bell_state("phi_zero")


def test_tensor_basic():
    np.testing.assert_array_equal(tensor(basis_ket("H"), basis_ket("V")).amplitudes, [0, 1, 0, 0])
    half = DensityMatrix(np.eye(2) / 2)
    np.testing.assert_allclose(tensor(half, half).entries, np.eye(4) / 4)


def test_tensor_dimension_overflow():
    with pytest.raises(DimensionError):
        tensor(Ket(np.ones(16) / 4), Ket(np.ones(2) / np.sqrt(2)))
    with pytest.raises(TypeError):
        tensor(basis_ket("H"), DensityMatrix(np.eye(2) / 2))


def test_ket_dimension_checked():
    with pytest.raises(DimensionError):
        Ket(np.ones(3))
    with pytest.raises(DimensionError):
        DensityMatrix(np.eye(8) / 8)


def test_normalize_and_norm():
    k = Ket([3, 4])
    assert k.norm_sq == 25
    assert abs(k.normalize().norm_sq - 1) < 1e-12
    with pytest.raises(ZeroDivisionError):
        Ket(np.zeros(4)).normalize()


def test_projection_of_product_pairs():
    # four-photon state with zero phases, expanded by hand: only H1H2V3V4 and V1V2H3H4
    # survive the Psi-(2,3) bra, each with amplitude (1/2)(+-1/sqrt 2)
    res = project(bell_state("psi_minus"), four_photon_state(0.0, 0.0))
    np.testing.assert_allclose(res.amplitudes, np.array([0, 1, -1, 0]) / (2 * np.sqrt(2)), atol=1e-15)
    assert abs(res.norm_sq - 0.25) < 1e-15


def test_projection_brute_force():
    rng = np.random.default_rng(4)
    state = random_ket(rng, 16)
    bell = bell_state("psi_plus")
    res = project(bell, state)
    # brute force: <bell_23| summed element by element
    expect = np.zeros(4, dtype=complex)
    for p1 in range(2):
        for p4 in range(2):
            for p2 in range(2):
                for p3 in range(2):
                    expect[2 * p1 + p4] += np.conj(bell.amplitudes[2 * p2 + p3]) * state.amplitudes[8 * p1 + 4 * p2 + 2 * p3 + p4]
    np.testing.assert_allclose(res.amplitudes, expect, atol=1e-14)


def test_projection_orthogonal_is_zero():
    res = project(bell_state("psi_minus"), basis_ket("HHHH"))
    assert res.norm_sq == 0.0


def test_projection_phases_match_swapped_state():
    a, b = 0.7, -1.9
    res = project(bell_state("psi_minus"), four_photon_state(a, b))
    expected = np.exp(1j * b) * np.array([0, 1, -np.exp(1j * (a - b)), 0]) / (2 * np.sqrt(2))
    np.testing.assert_allclose(res.amplitudes, expected, atol=1e-14)


def test_unsupported_slots():
    with pytest.raises(ValueError):
        project(bell_state("psi_minus"), basis_ket("HHHH"), slots=(1, 2))


def test_fidelity_examples():
    assert fidelity(bell_state("phi_plus").density(), bell_state("phi_plus")) == pytest.approx(1.0, abs=1e-15)
    assert fidelity(DensityMatrix(np.eye(4) / 4), bell_state("psi_minus")) == pytest.approx(0.25, abs=1e-15)
    mix = DensityMatrix(0.5 * bell_state("psi_minus").density().entries + 0.5 * bell_state("psi_plus").density().entries)
    assert fidelity(mix, bell_state("psi_minus")) == pytest.approx(0.5, abs=1e-15)


def test_fidelity_errors():
    with pytest.raises(DimensionError):
        fidelity(DensityMatrix(np.eye(2) / 2), bell_state("phi_plus"))
    with pytest.raises(ValueError):
        fidelity(DensityMatrix(np.eye(4) / 4), Ket([1, 1, 0, 0]))


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_cauchy_schwarz(seed):
    rng = np.random.default_rng(seed)
    a = Ket(rng.normal(size=16) + 1j * rng.normal(size=16))
    b = Ket(rng.normal(size=16) + 1j * rng.normal(size=16))
    assert abs(a.inner(b)) <= np.sqrt(a.norm_sq * b.norm_sq) * (1 + 1e-12)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_tensor_trace_multiplies(seed):
    rng = np.random.default_rng(seed)
    r = random_ket(rng, 4).density()
    s = random_ket(rng, 4).density()
    t = tensor(r, s)
    assert abs(t.trace - r.trace * s.trace) < 1e-12
    a, b, c, d = (random_ket(rng, 2).density().entries for _ in range(4))
    nested = tensor(tensor(DensityMatrix(a), DensityMatrix(b)), tensor(DensityMatrix(c), DensityMatrix(d)))
    np.testing.assert_allclose(nested.entries, np.kron(a, np.kron(b, np.kron(c, d))), atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_bell_probabilities_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    state = tensor(random_ket(rng, 4), random_ket(rng, 4))
    total = sum(project(bell_state(k), state).norm_sq for k in BELL_KINDS)
    assert abs(total - 1.0) < 1e-12


@settings(max_examples=50, deadline=None)
@given(seeds, st.floats(min_value=-np.pi, max_value=np.pi))
def test_fidelity_global_phase_invariant(seed, phase):
    rng = np.random.default_rng(seed)
    rho = DensityMatrix(np.eye(4) / 8) if seed % 2 else random_ket(rng, 4).density()
    if seed % 2:
        rho = DensityMatrix(rho.entries + random_ket(rng, 4).density().entries / 2)
    t = random_ket(rng, 4)
    f1 = fidelity(rho, t)
    f2 = fidelity(rho, Ket(np.exp(1j * phase) * t.amplitudes))
    assert abs(f1 - f2) < 1e-12
