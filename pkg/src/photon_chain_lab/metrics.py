"""Transfer amplitudes, phase correction and average transfer fidelities.

Two routes to the average fidelity live here: the closed forms in the
end-to-end amplitudes ``f`` and ``g``, and the general route that traces
the evolved chain state down to the last channel and averages
``<psi|rho_out|psi>`` over input states (exactly through fourth moments,
or by Monte Carlo on the unitarily invariant measure).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace

import numpy as np

from .chain import CouplingVector, Statistics, trial_rng
from .sectors import SectorBasis, SectorPropagator, Spectral, enumerate_sector, sector_hamiltonian

AMPLITUDE_SLACK = 1e-9


@dataclass(frozen=True)
class AmplitudeSet:
    f: complex
    g: complex
    n_channels: int
    corrected: bool = False

    def __post_init__(self):
        if abs(self.f) > 1 + AMPLITUDE_SLACK or abs(self.g) > 1 + AMPLITUDE_SLACK:
            raise ValueError(f"amplitudes exceed unit modulus: |f|={abs(self.f)}, |g|={abs(self.g)}")


def correction_phase(n_channels: int, excitations: int) -> complex:
    """Diagonal entry of the output rotation for ``excitations`` photons:
    ``exp(i pi (N-1) m / 2)``."""
    # reduce the exponent mod 4 so that the common cases are exact
    quarter_turns = ((n_channels - 1) * excitations) % 4
    return (1, 1j, -1, -1j)[quarter_turns] + 0j


def _matrix(U) -> np.ndarray:
    return U.matrix if isinstance(U, SectorPropagator) else np.asarray(U)


def transfer_amplitudes(U1, U2, basis2: SectorBasis, n_channels: int) -> AmplitudeSet:
    """``f = <1_N|U|1_1>`` and ``g = <2_N|U|2_1>`` from the m=1 and m=2 propagators."""
    U1, U2 = _matrix(U1), _matrix(U2)
    if U1.shape != (n_channels, n_channels):
        raise ValueError(f"single-excitation propagator has shape {U1.shape}, expected N={n_channels}")
    if basis2.n_channels != n_channels or basis2.excitations != 2 or U2.shape != (basis2.dim, basis2.dim):
        raise ValueError("two-excitation propagator does not match its basis")
    first = [0] * n_channels
    last = [0] * n_channels
    first[0], last[-1] = 2, 2
    g = U2[basis2.position(last), basis2.position(first)]
    return AmplitudeSet(complex(U1[-1, 0]), complex(g), n_channels)


def apply_phase_correction(a: AmplitudeSet) -> AmplitudeSet:
    if a.corrected:
        raise ValueError("phase correction has already been applied")
    n = a.n_channels
    return replace(a, f=a.f * correction_phase(n, 1), g=a.g * correction_phase(n, 2), corrected=True)


def _check_modulus(*amps):
    for z in amps:
        if abs(z) > 1 + AMPLITUDE_SLACK:
            raise ValueError(f"amplitude modulus {abs(z)} exceeds 1")


def qubit_average_fidelity(f) -> float:
    """``Re f / 3 + |f|^2 / 6 + 1/2`` for a phase-corrected amplitude."""
    _check_modulus(f)
    return f.real / 3 + abs(f) ** 2 / 6 + 0.5


def qutrit_average_fidelity(f, g) -> float:
    _check_modulus(f, g)
    return (1 / 3 + abs(f) ** 2 / 12 + f.real / 6 + abs(g) ** 2 / 12
            + (g.real + (f * np.conj(g)).real) / 6)


def average_fidelity(amps: AmplitudeSet, qudit_dim: int) -> float:
    if not amps.corrected:
        raise ValueError("fidelity formulas expect phase-corrected amplitudes")
    if qudit_dim == 2:
        return qubit_average_fidelity(amps.f)
    if qudit_dim == 3:
        return qutrit_average_fidelity(amps.f, amps.g)
    raise ValueError(f"qudit_dim must be 2 or 3, got {qudit_dim}")


# vectorized versions used by the sweeps; same formulas, array inputs
def qubit_fidelity_array(f: np.ndarray) -> np.ndarray:
    return f.real / 3 + np.abs(f) ** 2 / 6 + 0.5


def qutrit_fidelity_array(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    return (1 / 3 + np.abs(f) ** 2 / 12 + f.real / 6 + np.abs(g) ** 2 / 12
            + (g.real + (f * np.conj(g)).real) / 6)


@dataclass(frozen=True)
class BlochQutrit:
    """Pure qutrit ``alpha|0> + beta|1> + gamma|2>`` in five-angle form."""

    theta: float
    phi: float
    delta: float = 0.0
    sigma_phase: float = 0.0

    def __post_init__(self):
        if not (0 <= self.theta <= math.pi / 2 and 0 <= self.phi <= math.pi / 2):
            raise ValueError("theta and phi must lie in [0, pi/2]")

    @property
    def alpha(self) -> complex:
        return math.sin(self.theta) * math.cos(self.phi) * complex(math.cos(self.delta), math.sin(self.delta))

    @property
    def beta(self) -> complex:
        return math.sin(self.theta) * math.sin(self.phi) * complex(math.cos(self.sigma_phase),
                                                                   math.sin(self.sigma_phase))

    @property
    def gamma(self) -> complex:
        return complex(math.cos(self.theta))

    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma])


def sample_input_states(qudit_dim: int, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Pure states from the unitarily invariant measure, via the angle parametrization.

    Qutrit: ``cos^2 theta ~ Beta(1, 2)``, ``sin^2 phi ~ U(0, 1)`` and two
    uniform phases, which is the density ``sin^3 th cos th sin ph cos ph``.
    Qubit: ``cos^2(theta/2) ~ U(0, 1)`` with a uniform relative phase.
    """
    if qudit_dim == 3:
        u, v = rng.random(samples), rng.random(samples)
        cos2_theta = 1.0 - np.sqrt(1.0 - u)
        sin2_phi = v
        delta, sig = rng.uniform(0, 2 * np.pi, (2, samples))
        sin_theta = np.sqrt(1.0 - cos2_theta)
        return np.stack([
            sin_theta * np.sqrt(1.0 - sin2_phi) * np.exp(1j * delta),
            sin_theta * np.sqrt(sin2_phi) * np.exp(1j * sig),
            np.sqrt(cos2_theta) + 0j,
        ], axis=1)
    if qudit_dim == 2:
        c2 = rng.random(samples)
        phase = rng.uniform(0, 2 * np.pi, samples)
        return np.stack([np.sqrt(c2) + 0j, np.sqrt(1.0 - c2) * np.exp(1j * phase)], axis=1)
    raise ValueError(f"qudit_dim must be 2 or 3, got {qudit_dim}")


@functools.lru_cache(maxsize=None)
def marginal_layout(n_channels: int, m: int, statistics: Statistics, channel: int = -1):
    """For every state of a sector: (id of the configuration of all other
    channels, occupation of ``channel``).

    Ids are global across sectors of the same chain, so amplitudes from
    different sectors that share the rest configuration line up.
    """
    basis = enumerate_sector(n_channels, m, statistics)
    channel = channel % n_channels
    occ = basis.occupations()
    levels = occ[:, channel]
    rest_ids = np.empty(basis.dim, dtype=int)
    for i, s in enumerate(basis.states):
        rest = s[:channel] + s[channel + 1:]
        r = sum(rest)
        offset = sum(comb_size(n_channels - 1, q) for q in range(r))
        rest_ids[i] = offset + enumerate_sector(n_channels - 1, r, Statistics.BOSON).position(rest)
    return rest_ids, levels


def comb_size(parts: int, total: int) -> int:
    return math.comb(parts + total - 1, total)


def _marginal_matrix(vec: np.ndarray, layout, n_rest: int, n_levels: int) -> np.ndarray:
    rest_ids, levels = layout
    M = np.zeros(vec.shape[:-1] + (n_rest, n_levels), dtype=complex)
    M[..., rest_ids, levels] = vec
    return M


def channel_marginals(components, n_channels: int, statistics: Statistics, n_levels: int,
                      channel: int = -1) -> list[np.ndarray]:
    """Reshape evolved sector vectors as ``M[rest, level]`` of the chosen channel.

    ``components`` is a list of ``(m, vector)`` pairs, one per input level;
    vectors may carry leading batch axes.
    """
    max_rest = max(m for m, _ in components)
    n_rest = sum(comb_size(n_channels - 1, q) for q in range(max_rest + 1))
    return [_marginal_matrix(np.asarray(v), marginal_layout(n_channels, m, statistics, channel),
                             n_rest, n_levels) for m, v in components]


def response_tensor(marginals: list[np.ndarray]) -> np.ndarray:
    """``L[a, b, c, d] = sum_rest M_a[rest, c] conj(M_b[rest, d])``: the output
    operator of the last channel produced by the input operator ``|a><b|``."""
    M = np.stack(marginals, axis=-3)   # (..., d, rest, L)
    return np.einsum("...arc,...brd->...abcd", M, np.conj(M))


@dataclass(frozen=True, eq=False)
class OutputState:
    """Reduced density matrix of the last channel (levels 0, 1, 2)."""

    rho: np.ndarray

    def __post_init__(self):
        rho = self.rho
        if not np.allclose(rho, rho.conj().T, atol=1e-10):
            raise ValueError("output state is not Hermitian")
        if abs(np.trace(rho) - 1) > 1e-10:
            raise ValueError(f"output state has trace {np.trace(rho).real}")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise ValueError("output state is not positive semidefinite")

    def fidelity(self, psi) -> float:
        full = np.zeros(self.rho.shape[0], dtype=complex)
        full[:len(psi)] = psi
        return float(np.real(np.conj(full) @ self.rho @ full))


def output_rotation(n_channels: int, n_levels: int = 3) -> np.ndarray:
    return np.array([correction_phase(n_channels, c) for c in range(n_levels)])


def reduced_output_state(sector_vectors, coefficients, n_channels: int,
                         statistics: Statistics = Statistics.BOSON, correct_phase: bool = True) -> OutputState:
    """Trace channels ``1..N-1`` out of ``sum_a c_a |psi_a(t)>``.

    ``sector_vectors[a]`` is the evolved vector of input level ``a`` (which
    lives in the sector with ``a`` excitations); ``coefficients`` are the
    input amplitudes ``(alpha, beta[, gamma])``.
    """
    c = np.asarray(coefficients.vector() if isinstance(coefficients, BlochQutrit) else coefficients, complex)
    if abs(np.vdot(c, c).real - 1) > 1e-10:
        raise ValueError("input state is not normalized")
    if len(sector_vectors) != len(c):
        raise ValueError("need one evolved vector per input level")
    marg = channel_marginals(list(enumerate(sector_vectors)), n_channels, statistics, 3)
    M = sum(ca * Ma for ca, Ma in zip(c, marg))
    rho = M.T @ M.conj()
    if correct_phase:
        R = output_rotation(n_channels)
        rho = R[:, None] * rho * np.conj(R)[None, :]
    return OutputState(rho)


def evolved_input_vectors(couplings: CouplingVector, t: float, qudit_dim: int,
                          statistics: Statistics = Statistics.BOSON) -> list[np.ndarray]:
    """Evolve ``|a>_1 |0...0>`` for ``a < qudit_dim`` with sector exponentials."""
    n = couplings.n_channels
    if statistics is Statistics.FERMION and qudit_dim > 2:
        raise ValueError("a fermionic channel cannot hold a qutrit")
    vecs = [np.ones(1, dtype=complex)]
    for m in range(1, qudit_dim):
        basis = enumerate_sector(n, m, statistics)
        U = Spectral(sector_hamiltonian(couplings, basis)).unitary(t)
        vecs.append(U[:, 0])   # first state holds all m excitations in channel 1
    return vecs


def channel_response(couplings: CouplingVector, t: float, qudit_dim: int,
                     statistics: Statistics = Statistics.BOSON, correct_phase: bool = True) -> np.ndarray:
    """Response tensor ``(d, d, 3, 3)`` of the chain read out at channel N."""
    n = couplings.n_channels
    vecs = evolved_input_vectors(couplings, t, qudit_dim, statistics)
    L = response_tensor(channel_marginals(list(enumerate(vecs)), n, statistics, 3))
    if correct_phase:
        R = output_rotation(n)
        L = L * R[None, None, :, None] * np.conj(R)[None, None, None, :]
    return L


def fidelity_of_inputs(response: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """``<psi|rho_out(psi)|psi>`` for a batch of inputs ``psi`` of shape ``(S, d)``."""
    d = response.shape[0]
    pad = np.zeros((psi.shape[0], response.shape[2]), dtype=complex)
    pad[:, :d] = psi
    return np.real(np.einsum("sa,sb,sc,sd,abcd->s", psi, np.conj(psi), np.conj(pad), pad, response,
                             optimize=True))


def exact_average_fidelity(response: np.ndarray) -> float:
    """Average over the unitarily invariant measure through its fourth moments:
    ``E[psi_a psi_b* psi_c* psi_d] = (d_ac d_bd + d_ab d_cd) / (d (d + 1))``."""
    d = response.shape[0]
    first = sum(response[a, b, a, b] for a in range(d) for b in range(d))
    second = sum(response[a, a, c, c] for a in range(d) for c in range(d))
    return float(np.real(first + second)) / (d * (d + 1))


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    samples: int


def mc_bloch_average(response: np.ndarray, samples: int = 100_000, seed: int = 0) -> MCEstimate:
    """Monte-Carlo average of ``<psi|rho_out|psi>`` over random pure inputs."""
    if samples < 1000:
        raise ValueError("use at least 1000 samples")
    d = response.shape[0]
    psi = sample_input_states(d, samples, trial_rng(seed, 0))
    vals = fidelity_of_inputs(response, psi)
    return MCEstimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples)), samples)
