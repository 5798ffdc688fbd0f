import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import expm_multiply

from oracles import boson_annihilators, hopping_hamiltonian
from photon_chain_lab.chain import ChainSpec, CouplingVector, Mirror, build_couplings, single_particle_matrix
from photon_chain_lab.flux import (
    SectorEvolver,
    aligned_amplitudes,
    per_term_bounds,
    coherent_bound,
    coherent_expectation,
    coherent_fock_vector,
    equal_leakage_coefficients,
    fock_expectation,
    general_state_bound,
    heisenberg_coefficients,
    information_flux,
    mean_field,
    mean_occupation,
    one_body_expectation,
)
from photon_chain_lab.sectors import Spectral

chains = st.integers(2, 8).flatmap(
    lambda n: st.lists(st.floats(0.2, 2.0), min_size=n - 1, max_size=n - 1)).map(lambda k: CouplingVector(tuple(k)))
times = st.floats(0, 20)


def test_identity_at_zero():
    C = heisenberg_coefficients(CouplingVector((1.0, 0.5, 2.0)), 0.0)
    np.testing.assert_allclose(C.matrix, np.eye(4), atol=1e-14)
    assert information_flux(C) < 1e-28


@given(chains, times)
def test_duality_with_schrodinger(k, t):
    C = heisenberg_coefficients(k, t)
    U = Spectral(single_particle_matrix(k)).unitary(t)
    np.testing.assert_allclose(C.matrix, U.conj().T, atol=1e-10)
    np.testing.assert_allclose(C.matrix @ C.matrix.conj().T, np.eye(k.n_channels), atol=1e-10)
    assert abs(information_flux(C) - abs(U[-1, 0]) ** 2) < 1e-12
    np.testing.assert_array_equal(C.annihilation, np.conj(C.matrix))


@given(st.floats(0.1, 3.0), times)
def test_two_channels_sine(J, t):
    C = heisenberg_coefficients(CouplingVector((J,)), t)
    assert abs(abs(C.matrix[1, 0]) - abs(math.sin(J * t))) < 1e-12


def test_heisenberg_matches_operator_evolution():
    """a_i^+(t) = U^+ a_i^+ U expanded on a_j^+ in a truncated Fock space."""
    k = (0.7, 1.3)
    t = 2.1
    ops = boson_annihilators(3, 3)
    U = expm(-1j * t * hopping_hamiltonian(ops, k))
    C = heisenberg_coefficients(CouplingVector(k), t).matrix
    # only states with at most one photon stay clear of the cutoff after a^+
    low = [0, 1, 3, 9]      # |000>, |001>, |010>, |100> in base-3 indexing
    for i in range(3):
        lhs = (U.conj().T @ ops[i].conj().T @ U)[:, low]
        rhs = sum(C[i, j] * ops[j].conj().T for j in range(3))[:, low]
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_mirror_flux_is_one():
    C = heisenberg_coefficients(build_couplings(ChainSpec(9, Mirror())), math.pi / 2)
    assert abs(information_flux(C) - 1) < 1e-9
    assert abs(fock_expectation(C, [1] + [0] * 8) - 1) < 1e-9


@given(chains, times)
def test_fock_expectation_properties(k, t):
    C = heisenberg_coefficients(k, t)
    n = k.n_channels
    assert fock_expectation(C, [0] * n) == 0
    assert abs(fock_expectation(C, [1] * n) - 1) < 1e-12
    occ = np.arange(n) % 3
    M = np.abs(C.matrix) ** 2
    assert abs((M @ occ).sum() - occ.sum()) < 1e-10


def test_fock_expectation_validates():
    C = heisenberg_coefficients(CouplingVector((1.0,)), 1.0)
    with pytest.raises(ValueError):
        fock_expectation(C, [1, -1])
    with pytest.raises(ValueError):
        fock_expectation(C, [1])


@given(chains, times, st.integers(0, 5))
def test_coherent_reduces_to_fock(k, t, n1):
    C = heisenberg_coefficients(k, t)
    n = k.n_channels
    fock = fock_expectation(C, [n1] + [0] * (n - 1))
    assert coherent_expectation(C, np.zeros(n - 1), n1) == pytest.approx(fock, rel=1e-12, abs=1e-15)


def test_coherent_single_amplitude():
    k = CouplingVector((0.5, 1.0, 0.5))
    C = heisenberg_coefficients(k, 3.0)
    a = np.zeros(3, complex)
    a[1] = 0.8 - 0.3j
    assert abs(coherent_expectation(C, a, 0) - abs(C.matrix[-1, 2]) ** 2 * abs(a[1]) ** 2) < 1e-14


def _product_state(vectors):
    out = np.ones(1, complex)
    for v in vectors:
        out = np.kron(out, v)
    return out


@settings(max_examples=10)
@given(st.integers(2, 3), st.integers(0, 10**6))
def test_coherent_matches_dense_truncated_evolution(n, seed):
    rng = np.random.default_rng(seed)
    k = tuple(rng.uniform(0.3, 1.5, n - 1))
    t = float(rng.uniform(0, 10))
    alphas = 0.6 * np.sqrt(rng.random(n - 1)) * np.exp(2j * np.pi * rng.random(n - 1))
    n1 = int(rng.integers(0, 2))
    modes = [coherent_fock_vector(math.sqrt(n1))] + [coherent_fock_vector(a) for a in alphas]
    cutoff = max(len(m) for m in modes)
    modes = [np.pad(m, (0, cutoff - len(m))) for m in modes]
    ops = boson_annihilators(n, cutoff)
    # truncation of H is harmless: the state never reaches the cutoff beyond the 1e-12 tail
    H = csr_matrix(hopping_hamiltonian(ops, k))
    psi = expm_multiply(-1j * t * H, _product_state(modes))
    number = ops[-1].conj().T @ ops[-1]
    brute = np.real(np.vdot(psi, number @ psi))
    C = heisenberg_coefficients(CouplingVector(k), t)
    assert abs(coherent_expectation(C, alphas, n1) - brute) < 1e-8


def test_coherent_matches_sector_evolution_n4():
    rng = np.random.default_rng(3)
    k = CouplingVector(tuple(rng.uniform(0.3, 1.5, 3)))
    alphas = np.array([0.4 + 0.2j, -0.3j, 0.5])
    modes = [coherent_fock_vector(1.0, cutoff=12)] + [coherent_fock_vector(a, cutoff=12) for a in alphas]
    # total photon number is Poissonian with mean ~1.7, so 16 keeps all but ~1e-11
    evolver = SectorEvolver(k, 16)
    value, norm = evolver.photon_number(modes, 4.0)
    assert abs(norm - 1) < 1e-10
    assert abs(coherent_expectation(heisenberg_coefficients(k, 4.0), alphas, 1) - value) < 1e-8


def test_sector_evolver_agrees_with_dense():
    k = (0.8, 1.1, 0.6)
    states = [np.array([0.6, 0.8j, 0]), np.array([0, 0.6, 0.8]), np.array([1.0, 0, 0]), np.array([0.8, 0, 0.6])]
    ops = boson_annihilators(4, 7)
    psi = expm_multiply(-2.5j * csr_matrix(hopping_hamiltonian(ops, k)), _product_state([np.pad(s, (0, 4)) for s in states]))
    dense = np.real(np.vdot(psi, ops[-1].conj().T @ ops[-1] @ psi))
    value, norm = SectorEvolver(CouplingVector(k), 6).photon_number(states, 2.5)
    assert abs(value - dense) < 1e-10 and abs(norm - 1) < 1e-12
    C = heisenberg_coefficients(CouplingVector(k), 2.5)
    assert abs(one_body_expectation(C, states) - dense) < 1e-10


def test_mean_field_and_occupation_of_coherent_state():
    v = coherent_fock_vector(0.7 - 0.2j)
    assert abs(np.vdot(v, v) - 1) < 1e-12
    assert abs(mean_field(v) - (0.7 - 0.2j)) < 1e-10
    assert abs(mean_occupation(v) - abs(0.7 - 0.2j) ** 2) < 1e-10


def test_bound_trivial_cases():
    C = heisenberg_coefficients(CouplingVector((1.0, 0.3, 1.0)), 2.0)
    assert coherent_bound(C, 0.0, 3) == 0
    assert general_state_bound(C, 0.0, 3) == 0
    perfect = heisenberg_coefficients(build_couplings(ChainSpec(5, Mirror())), math.pi / 2)
    # leak ~ 1e-16 enters through its square root
    assert coherent_bound(perfect, 1.5, 2) < 1e-6
    rep = per_term_bounds(C, np.zeros(3), 0.0, 2)
    for term in rep.terms:
        assert term.actual_correction == 0 and term.bound == 0


@given(chains, times, st.floats(0, 2), st.integers(0, 5), st.integers(0, 10**6))
def test_coherent_bound_holds(k, t, alpha_max, n1, seed):
    rng = np.random.default_rng(seed)
    C = heisenberg_coefficients(k, t)
    n = k.n_channels
    for a in (alpha_max * np.sqrt(rng.random(n - 1)) * np.exp(2j * np.pi * rng.random(n - 1)),
              aligned_amplitudes(C, alpha_max)):
        gamma = coherent_expectation(C, a, n1) - information_flux(C) * n1
        assert gamma <= coherent_bound(C, alpha_max, n1) + 1e-9
        assert gamma <= general_state_bound(C, alpha_max ** 2, n1) + 1e-9
        assert per_term_bounds(C, a, alpha_max, n1).satisfied


def test_per_term_rejects_large_amplitude():
    C = heisenberg_coefficients(CouplingVector((1.0, 1.0)), 1.0)
    with pytest.raises(ValueError):
        per_term_bounds(C, [0.5, 2.0], 1.0, 0)


@pytest.mark.parametrize("n,flux", [(3, 0.5), (6, 0.3), (10, 0.05)])
def test_equal_leakage_saturation(n, flux):
    C = equal_leakage_coefficients(n, flux, seed=n)
    np.testing.assert_allclose(C.matrix @ C.matrix.conj().T, np.eye(n), atol=1e-12)
    assert abs(information_flux(C) - flux) < 1e-12
    rep = per_term_bounds(C, aligned_amplitudes(C, 1.1), 1.1, 2)
    assert abs(rep.sum_abs_coefficients - rep.sum_abs_bound) < 1e-10
    gamma = coherent_expectation(C, aligned_amplitudes(C, 1.1), 2) - flux * 2
    assert abs(gamma - coherent_bound(C, 1.1, 2)) < 1e-10


@given(st.integers(2, 4), st.integers(0, 10**6))
def test_general_bound_brute_force(n, seed):
    rng = np.random.default_rng(seed)
    k = CouplingVector(tuple(rng.uniform(0.3, 1.5, n - 1)))
    t = float(rng.uniform(0, 20))
    states = []
    for _ in range(n):
        v = rng.normal(size=3) + 1j * rng.normal(size=3)
        states.append(v / np.linalg.norm(v))
    value, _ = SectorEvolver(k, 2 * n).photon_number(states, t)
    C = heisenberg_coefficients(k, t)
    occ = [mean_occupation(s) for s in states]
    gamma = value - information_flux(C) * occ[0]
    assert gamma <= general_state_bound(C, max(occ[1:]), occ[0]) + 1e-9
