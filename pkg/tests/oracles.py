"""Independent reference implementations used only by the tests.

Everything here works in the full (truncated) tensor-product Fock space with
Kronecker-product operators and ``scipy.linalg.expm``, sharing no code with
the sector machinery under test.
"""

from functools import reduce

import numpy as np
from scipy.linalg import expm


def _kron_all(ops):
    return reduce(np.kron, ops)


def boson_annihilators(n_modes, cutoff):
    a = np.diag(np.sqrt(np.arange(1, cutoff)), 1)
    eye = np.eye(cutoff)
    return [_kron_all([a if j == i else eye for j in range(n_modes)]) for i in range(n_modes)]


def fermion_annihilators(n_modes):
    """Jordan-Wigner: ``c_j = Z x ... x Z x s x 1 x ... x 1`` with ``s = |0><1|``."""
    s = np.array([[0.0, 1.0], [0.0, 0.0]])
    z = np.diag([1.0, -1.0])
    eye = np.eye(2)
    return [_kron_all([z] * i + [s] + [eye] * (n_modes - i - 1)) for i in range(n_modes)]


def hopping_hamiltonian(ops, couplings):
    H = 0
    for i, k in enumerate(couplings):
        hop = ops[i + 1].conj().T @ ops[i]
        H = H + k * (hop + hop.conj().T)
    return H


def fock_index(occupation, levels):
    idx = 0
    for n in occupation:
        idx = idx * levels + n
    return idx


def dense_propagator(couplings, t, statistics="boson", cutoff=3):
    n = len(couplings) + 1
    ops = boson_annihilators(n, cutoff) if statistics == "boson" else fermion_annihilators(n)
    return expm(-1j * t * hopping_hamiltonian(ops, couplings)), (cutoff if statistics == "boson" else 2)


def reduced_last_mode(psi, n_modes, levels):
    """Density matrix of the last mode of a pure state (rows: last-mode level)."""
    m = psi.reshape(levels ** (n_modes - 1), levels)
    return m.T @ m.conj()


def output_response(couplings, t, inputs, statistics="boson", cutoff=3, extra=()):
    """``rho_out[a, b]`` = last-mode operator produced by ``|a><b|`` in channel 1,
    extra excitations (a tuple of 0-based channels) present in both branches."""
    n = len(couplings) + 1
    U, levels = dense_propagator(couplings, t, statistics, cutoff)
    states = []
    for a in range(inputs):
        occ = [0] * n
        occ[0] = a
        for j in extra:
            occ[j] += 1
        psi = np.zeros(levels ** n, complex)
        psi[fock_index(occ, levels)] = 1.0
        states.append((U @ psi).reshape(levels ** (n - 1), levels))
    return np.array([[states[a].T @ states[b].conj() for b in range(inputs)] for a in range(inputs)])


def moment_average_fidelity(response, rotation):
    """Exact Bloch average of ``<psi| R rho(psi) R^+ |psi>`` for a qudit input.

    ``E[psi_a conj(psi_b) conj(psi_c) psi_d] = (d_ac d_bd + d_ab d_cd) / (d (d + 1))``
    for the unitarily invariant measure.
    """
    d = response.shape[0]
    R = np.asarray(rotation)[:d]
    total = 0.0
    for a in range(d):
        for b in range(d):
            for c in range(d):
                for e in range(d):
                    w = (a == c) * (b == e) + (a == b) * (c == e)
                    if w:
                        total += w * (R[c] * response[a, b][c, e] * np.conj(R[e]))
    return float(np.real(total)) / (d * (d + 1))


def quadrature_qutrit_moments():
    """``E|alpha|^4`` and ``E|alpha|^2 |beta|^2`` on the qutrit state space by
    2-d quadrature over ``(|alpha|^2, |beta|^2)`` on the simplex (flat density)."""
    from scipy.integrate import dblquad

    area = 0.5
    m4 = dblquad(lambda y, x: x * x, 0, 1, 0, lambda x: 1 - x)[0] / area
    m22 = dblquad(lambda y, x: x * y, 0, 1, 0, lambda x: 1 - x)[0] / area
    return m4, m22
