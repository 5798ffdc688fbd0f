"""Heisenberg-picture analysis of the chain.

Because the Hamiltonian is quadratic, ``a_i^+(t) = sum_j C_ij a_j^+`` with
``C = exp(+i h t)`` (``h`` the hopping matrix); annihilators carry the
complex conjugate coefficients. Everything the end channel sees is then a
function of the last row of ``C``.

Coefficients are complex in general, so products written with real
coefficients are implemented with moduli and real parts, e.g.
``2 Re[conj(a_j) a_k C_Nj conj(C_Nk)]``, and bounds use ``|C_N1|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import CouplingVector, Statistics, single_particle_matrix
from .sectors import Spectral, enumerate_sector, sector_hamiltonian

BOUND_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class FluxCoefficients:
    matrix: np.ndarray
    time: float

    @property
    def n_channels(self) -> int:
        return self.matrix.shape[0]

    @property
    def last_row(self) -> np.ndarray:
        return self.matrix[-1]

    @property
    def annihilation(self) -> np.ndarray:
        return np.conj(self.matrix)


def heisenberg_coefficients(couplings: CouplingVector, t: float) -> FluxCoefficients:
    return FluxCoefficients(Spectral(single_particle_matrix(couplings)).unitary(t, sign=+1.0), float(t))


def information_flux(C: FluxCoefficients) -> float:
    """``|C_N1|^2``: weight of the first channel's operator in the last one."""
    return float(abs(C.matrix[-1, 0]) ** 2)


def fock_expectation(C: FluxCoefficients, occupations) -> float:
    """``<n_N(t)>`` for a Fock-state input ``|n_1, ..., n_N>``."""
    n = np.asarray(occupations, float)
    if n.shape != (C.n_channels,) or (n < 0).any():
        raise ValueError("need one non-negative occupation per channel")
    return float(np.abs(C.last_row) ** 2 @ n)


def coherent_expectation(C: FluxCoefficients, alphas, n1: float) -> float:
    """``<n_N(t)>`` with coherent states ``alpha_j`` in channels 2..N and the
    first channel carrying ``n1`` photons on average with a real mean field
    ``sqrt(n1)`` (a coherent state ``|sqrt(n1)>``).
    """
    a = np.asarray(alphas, complex)
    row = C.last_row
    if a.shape != (C.n_channels - 1,):
        raise ValueError(f"need {C.n_channels - 1} amplitudes for channels 2..N")
    if n1 < 0:
        raise ValueError("n1 must be >= 0")
    Cj = row[1:]
    signal = abs(row[0]) ** 2 * n1
    diag = float(np.sum(np.abs(Cj) ** 2 * np.abs(a) ** 2))
    w = np.conj(a) * Cj
    pair = np.outer(w, np.conj(w))
    cross = 2 * float(np.sum(np.real(np.tril(pair, -1))))   # j > k > 1
    with_first = 2 * math.sqrt(n1) * float(np.sum(np.real(w * np.conj(row[0]))))
    return float(signal + diag + cross + with_first)


def _coefficient_parts(C: FluxCoefficients):
    c1 = float(abs(C.matrix[-1, 0]))
    leak = max(0.0, 1.0 - c1 ** 2)
    return c1, leak


def coherent_bound(C: FluxCoefficients, alpha_max: float, n1: float, n_channels: int | None = None) -> float:
    """Upper bound on ``<n_N> - |C_N1|^2 n1`` for coherent inputs with ``|alpha_j| <= alpha_max``."""
    N = C.n_channels if n_channels is None else n_channels
    c1, leak = _coefficient_parts(C)
    return (alpha_max ** 2 * leak * (N - 1)
            + 2 * math.sqrt(n1) * c1 * alpha_max * math.sqrt(N - 1) * math.sqrt(leak))


def general_state_bound(C: FluxCoefficients, n_max: float, n1: float, n_channels: int | None = None) -> float:
    """Same bound with the largest mean occupation of channels 2..N in place of ``|alpha_max|^2``."""
    return coherent_bound(C, math.sqrt(n_max), n1, n_channels)


@dataclass(frozen=True)
class BoundReport:
    actual_correction: float
    bound: float
    context: str = ""

    @property
    def satisfied(self) -> bool:
        return self.actual_correction <= self.bound + BOUND_SLACK


@dataclass(frozen=True)
class PerTermReport:
    diagonal: BoundReport
    cross: BoundReport
    with_first: BoundReport
    sum_abs_coefficients: float
    sum_abs_bound: float

    @property
    def satisfied(self) -> bool:
        return (self.diagonal.satisfied and self.cross.satisfied and self.with_first.satisfied
                and self.sum_abs_coefficients <= self.sum_abs_bound + BOUND_SLACK)

    @property
    def terms(self) -> tuple[BoundReport, BoundReport, BoundReport]:
        return self.diagonal, self.cross, self.with_first


def per_term_bounds(C: FluxCoefficients, alphas, alpha_max: float, n1: float) -> PerTermReport:
    """Check the three correction terms of the coherent-input expectation one by one.

    diagonal:   sum_j |C_Nj|^2 |a_j|^2             <= a_max^2 (1 - |C_N1|^2)
    cross:      2 sum_{j>k>1} Re[...]              <= a_max^2 (1 - |C_N1|^2) (N - 2)
    with_first: 2 sqrt(n1) sum_j Re[...]           <= 2 sqrt(n1) |C_N1| a_max sqrt(N-1) sqrt(1 - |C_N1|^2)
    """
    a = np.asarray(alphas, complex)
    if np.any(np.abs(a) > alpha_max + 1e-12):
        raise ValueError("an amplitude exceeds alpha_max")
    N = C.n_channels
    row = C.last_row
    c1, leak = _coefficient_parts(C)
    Cj = row[1:]
    w = np.conj(a) * Cj
    diag = float(np.sum(np.abs(w) ** 2))
    cross = 2 * float(np.sum(np.real(np.tril(np.outer(w, np.conj(w)), -1))))
    first = 2 * math.sqrt(n1) * float(np.sum(np.real(w * np.conj(row[0]))))
    return PerTermReport(
        BoundReport(diag, alpha_max ** 2 * leak, "diagonal"),
        BoundReport(cross, alpha_max ** 2 * leak * (N - 2), "cross"),
        BoundReport(first, 2 * math.sqrt(n1) * c1 * alpha_max * math.sqrt(N - 1) * math.sqrt(leak), "with_first"),
        float(np.sum(np.abs(Cj))),
        math.sqrt((N - 1) * leak),
    )


def aligned_amplitudes(C: FluxCoefficients, alpha_max: float) -> np.ndarray:
    """Amplitudes ``|a_j| = alpha_max`` whose phases make every correction term
    real and non-negative: the worst case for the coherent bound."""
    row = C.last_row
    ref = row[0] / abs(row[0]) if abs(row[0]) > 0 else 1.0
    return alpha_max * np.exp(1j * np.angle(row[1:] * np.conj(ref)))


def equal_leakage_coefficients(n_channels: int, flux: float, seed: int = 0) -> FluxCoefficients:
    """A unitary whose last row has ``|C_N1|^2 = flux`` and equal moduli elsewhere.

    Completed to a full unitary with a Householder reflection; phases of the
    row are random.
    """
    rng = np.random.default_rng(seed)
    N = n_channels
    mags = np.full(N, math.sqrt((1 - flux) / (N - 1)))
    mags[0] = math.sqrt(flux)
    row = mags * np.exp(1j * rng.uniform(0, 2 * np.pi, N))
    # Householder H maps e_N to row (up to a phase) and is unitary
    e = np.zeros(N, complex)
    e[-1] = 1.0
    phase = row[-1] / abs(row[-1])
    v = row / phase - e
    H = np.eye(N) - 2 * np.outer(v, np.conj(v)) / np.vdot(v, v).real if np.linalg.norm(v) > 1e-14 else np.eye(N)
    U = phase * H            # U e_N = row, i.e. column N equals row
    return FluxCoefficients(U.T, float("nan"))    # last row of U^T is the wanted row


# ---------------------------------------------------------------------------
# brute-force references: evolve the full (truncated) Fock state


class SectorEvolver:
    """Exact number-conserving evolution of a product state in all sectors up to ``max_total``."""

    def __init__(self, couplings: CouplingVector, max_total: int):
        self.n_channels = couplings.n_channels
        self.max_total = max_total
        self.sectors = []
        for m in range(max_total + 1):
            basis = enumerate_sector(self.n_channels, m, Statistics.BOSON)
            spec = Spectral(sector_hamiltonian(couplings, basis)) if m else None
            self.sectors.append((basis, spec, basis.occupations()))

    def product_amplitudes(self, channel_states: list[np.ndarray], m: int) -> np.ndarray:
        """Amplitude of each basis state of sector ``m`` in ``prod_j |psi_j>``."""
        basis, _, occ = self.sectors[m]
        amp = np.ones(basis.dim, complex)
        for j, psi in enumerate(channel_states):
            n = occ[:, j]
            ok = n < len(psi)
            amp = np.where(ok, amp * np.asarray(psi)[np.minimum(n, len(psi) - 1)], 0)
        return amp

    def photon_number(self, channel_states: list[np.ndarray], t: float, channel: int = -1) -> tuple[float, float]:
        """``(<n_channel(t)>, norm kept by the truncation)``."""
        total, norm = 0.0, 0.0
        for m in range(self.max_total + 1):
            basis, spec, occ = self.sectors[m]
            psi = self.product_amplitudes(channel_states, m)
            if m:
                V = spec.vectors
                psi = V @ (np.exp(-1j * spec.energies * t) * (V.T @ psi))
            p = np.abs(psi) ** 2
            norm += p.sum()
            total += p @ occ[:, channel]
        return float(total), float(norm)


def coherent_fock_vector(alpha: complex, tail: float = 1e-12, cutoff: int | None = None) -> np.ndarray:
    """Fock amplitudes of ``|alpha>`` truncated once the discarded mass drops below ``tail``."""
    amps = [math.exp(-abs(alpha) ** 2 / 2)]
    mass = abs(amps[0]) ** 2
    n = 0
    while 1 - mass > tail and (cutoff is None or n < cutoff):
        n += 1
        amps.append(amps[-1] * alpha / math.sqrt(n))
        mass += abs(amps[-1]) ** 2
    return np.array(amps, complex)


def one_body_expectation(C: FluxCoefficients, channel_states: list[np.ndarray]) -> float:
    """Heisenberg-picture ``<n_N(t)>`` for a product of arbitrary single-channel
    states: only ``<n_j>`` and ``<a_j>`` of the input enter."""
    n = np.array([mean_occupation(s) for s in channel_states])
    a = np.array([mean_field(s) for s in channel_states])
    row = C.last_row
    # a_N(t) = sum_k conj(C_Nk) a_k  =>  <n_N> = sum_jk C_Nj conj(C_Nk) <a_j^+ a_k>
    coh = np.conj(a) * row
    corr = np.abs(np.sum(coh)) ** 2 - np.sum(np.abs(coh) ** 2)
    return float(np.sum(np.abs(row) ** 2 * n) + corr)


def mean_occupation(psi) -> float:
    psi = np.asarray(psi, complex)
    return float(np.sum(np.arange(len(psi)) * np.abs(psi) ** 2) / np.vdot(psi, psi).real)


def mean_field(psi) -> complex:
    """``<psi|a|psi>`` for a normalized Fock-basis vector."""
    psi = np.asarray(psi, complex)
    n = np.arange(1, len(psi))
    return complex(np.sum(np.conj(psi[:-1]) * np.sqrt(n) * psi[1:]))
