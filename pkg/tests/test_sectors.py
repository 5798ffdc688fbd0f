import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import dense_propagator, fock_index
from photon_chain_lab.chain import (
    ChainSpec,
    CouplingVector,
    Mirror,
    Statistics,
    TimeSliced,
    build_couplings,
    single_particle_matrix,
)
from photon_chain_lab.sectors import (
    Spectral,
    brute_force_permanent,
    enumerate_sector,
    multiparticle_amplitude,
    multiparticle_propagator,
    permanent,
    propagate,
    sector_hamiltonian,
    time_sliced_propagator,
)

couplings = st.integers(2, 6).flatmap(
    lambda n: st.lists(st.floats(0.1, 2.0), min_size=n - 1, max_size=n - 1)).map(tuple)


def test_sector_order_two_modes():
    assert enumerate_sector(2, 2).states == ((2, 0), (1, 1), (0, 2))


@pytest.mark.parametrize("n,m", [(3, 0), (4, 1), (5, 2), (9, 2), (6, 3)])
def test_sector_dimensions(n, m):
    assert enumerate_sector(n, m).dim == math.comb(n + m - 1, m)
    if m <= n:
        assert enumerate_sector(n, m, Statistics.FERMION).dim == math.comb(n, m)


def test_sector_first_state_has_all_in_channel_one():
    for m in range(1, 4):
        assert enumerate_sector(5, m).states[0] == (m, 0, 0, 0, 0)


def test_too_many_fermions():
    with pytest.raises(ValueError):
        enumerate_sector(3, 4, Statistics.FERMION)


def test_unknown_state_reports_sector():
    with pytest.raises(KeyError, match="N=3"):
        enumerate_sector(3, 2).position((3, 0, 0))


def test_single_excitation_sector_is_hopping_matrix():
    k = CouplingVector((0.3, 1.0, 0.7))
    np.testing.assert_array_equal(sector_hamiltonian(k, enumerate_sector(4, 1)), single_particle_matrix(k))


@given(couplings, st.floats(0, 20), st.sampled_from(["boson", "fermion"]))
def test_sector_propagator_matches_dense_fock_space(k, t, stat):
    """Each sector block equals the matching block of expm(-iHt) in the full space."""
    n = len(k) + 1
    statistics = Statistics(stat)
    U_full, levels = dense_propagator(k, t, stat, cutoff=3)
    for m in (1, 2):
        if statistics is Statistics.FERMION and m > n:
            continue
        basis = enumerate_sector(n, m, statistics)
        U = propagate(sector_hamiltonian(CouplingVector(k), basis), t).matrix
        idx = [fock_index(s, levels) for s in basis.states]
        np.testing.assert_allclose(U, U_full[np.ix_(idx, idx)], atol=1e-10)


@given(couplings, st.floats(0, 20))
def test_propagator_unitary(k, t):
    basis = enumerate_sector(len(k) + 1, 2)
    U = propagate(sector_hamiltonian(CouplingVector(k), basis), t).matrix
    np.testing.assert_allclose(U @ U.conj().T, np.eye(basis.dim), atol=1e-10)


def test_propagate_at_zero_is_identity():
    basis = enumerate_sector(5, 2)
    U = propagate(sector_hamiltonian(CouplingVector((1.0,) * 4), basis), 0.0).matrix
    np.testing.assert_allclose(U, np.eye(basis.dim), atol=1e-13)


def test_rejects_non_symmetric():
    with pytest.raises(ValueError):
        Spectral(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_mirror_transfer_at_half_pi():
    for n in range(2, 13):
        U = Spectral(single_particle_matrix(build_couplings(ChainSpec(n, Mirror())))).unitary(math.pi / 2)
        assert abs(abs(U[-1, 0]) - 1) < 1e-12
        phase = np.exp(-1j * math.pi * (n - 1) / 2)
        assert abs(U[-1, 0] - phase) < 1e-12


@given(st.integers(1, 6), st.integers(0, 10**6))
def test_ryser_matches_brute_force(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    assert abs(permanent(A) - brute_force_permanent(A)) < 1e-10 * max(1, abs(brute_force_permanent(A)))


def test_permanent_of_ones():
    assert abs(permanent(np.ones((5, 5))) - 120) < 1e-9


@given(couplings, st.floats(0, 20), st.sampled_from(["boson", "fermion"]), st.integers(2, 3))
def test_multiparticle_propagator_matches_sector(k, t, stat, m):
    n = len(k) + 1
    statistics = Statistics(stat)
    if statistics is Statistics.FERMION and m > n:
        return
    kv = CouplingVector(k)
    U1 = Spectral(single_particle_matrix(kv)).unitary(t)
    basis = enumerate_sector(n, m, statistics)
    U = Spectral(sector_hamiltonian(kv, basis)).unitary(t)
    np.testing.assert_allclose(multiparticle_propagator(U1, basis), U, atol=1e-10)


def test_two_photon_end_to_end_is_f_squared():
    kv = CouplingVector((0.4, 1.0, 1.0, 0.4))
    U1 = Spectral(single_particle_matrix(kv)).unitary(3.3)
    g = multiparticle_amplitude(U1, (2, 0, 0, 0, 0), (0, 0, 0, 0, 2))
    assert abs(g - U1[-1, 0] ** 2) < 1e-14


def test_amplitude_rejects_mismatched_numbers():
    with pytest.raises(ValueError):
        multiparticle_amplitude(np.eye(3), (1, 0, 0), (1, 1, 0))


def test_time_sliced_without_noise_equals_single_propagator():
    spec = ChainSpec(6, Mirror())
    k = build_couplings(spec)
    P = time_sliced_propagator(k, TimeSliced(50, 0.0, 0.0), 1.3, seed=0)
    U = Spectral(single_particle_matrix(k)).unitary(1.3)
    np.testing.assert_allclose(P.matrix, U, atol=1e-12)


def test_time_sliced_propagator_is_unitary_and_seeded():
    k = build_couplings(ChainSpec(5, Mirror()))
    a = time_sliced_propagator(k, TimeSliced(), 2.0, seed=5, trial=3).matrix
    b = time_sliced_propagator(k, TimeSliced(), 2.0, seed=5, trial=3).matrix
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(a @ a.conj().T, np.eye(5), atol=1e-12)
