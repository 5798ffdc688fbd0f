"""Fixed-excitation-number sectors and their exact propagators.

The chain Hamiltonian is quadratic and conserves the total number of
excitations, so the dynamics is block diagonal. A block is spanned by the
occupation vectors of ``m`` excitations over ``N`` channels. Bosonic Fock
states are normalized as ``prod_i (a_i^+)^{n_i} / sqrt(n_i!) |0>``; fermionic
states are created in increasing channel order.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from math import comb, factorial, prod, sqrt

import numpy as np

from .chain import (
    CouplingVector,
    Statistics,
    TimeSliced,
    batched_single_particle_matrices,
    single_particle_matrix,
    time_sliced_couplings,
)

DEFAULT_SECTOR_CAP = 3


class PropagationError(RuntimeError):
    """Raised when a Hamiltonian cannot be diagonalized."""


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Occupation-number basis of one excitation sector.

    States are ordered reverse-lexicographically, so that the first state
    always has every excitation in channel 1, e.g. ``(2,0), (1,1), (0,2)``.
    """

    n_channels: int
    excitations: int
    statistics: Statistics
    states: tuple[tuple[int, ...], ...]
    index: dict = field(repr=False)

    def __len__(self):
        return len(self.states)

    @property
    def dim(self) -> int:
        return len(self.states)

    def position(self, occupation) -> int:
        try:
            return self.index[tuple(occupation)]
        except KeyError:
            raise KeyError(f"{tuple(occupation)} is not in the {self.statistics.value} "
                           f"sector N={self.n_channels}, m={self.excitations}") from None

    def occupations(self) -> np.ndarray:
        return np.array(self.states, dtype=int).reshape(len(self.states), self.n_channels)


def _compositions(total: int, parts: int, cap: int | None):
    """Occupation vectors summing to ``total``, reverse-lexicographic."""
    if parts == 1:
        if cap is None or total <= cap:
            yield (total,)
        return
    top = total if cap is None else min(total, cap)
    for first in range(top, -1, -1):
        for rest in _compositions(total - first, parts - 1, cap):
            yield (first,) + rest


@functools.lru_cache(maxsize=None)
def enumerate_sector(n_channels: int, m: int, statistics: Statistics = Statistics.BOSON) -> SectorBasis:
    if n_channels < 1:
        raise ValueError(f"n_channels must be >= 1, got {n_channels}")
    if m < 0:
        raise ValueError(f"excitation number must be >= 0, got {m}")
    if statistics is Statistics.FERMION and m > n_channels:
        raise ValueError(f"{m} fermions do not fit in {n_channels} channels")
    cap = 1 if statistics is Statistics.FERMION else None
    states = tuple(_compositions(m, n_channels, cap))
    expected = comb(n_channels, m) if cap else comb(n_channels + m - 1, m)
    assert len(states) == expected
    return SectorBasis(n_channels, m, statistics, states, {s: i for i, s in enumerate(states)})


def sector_hamiltonian(couplings: CouplingVector, basis: SectorBasis) -> np.ndarray:
    """Matrix of the hopping Hamiltonian restricted to ``basis``.

    A bosonic hop from channel ``s`` to channel ``d`` carries
    ``k sqrt(n_s) sqrt(n_d + 1)``. Fermionic nearest-neighbour hops never
    pass another particle in one dimension, so their elements are ``+k``.
    """
    k = couplings.as_array() if isinstance(couplings, CouplingVector) else np.asarray(couplings, float)
    if len(k) != basis.n_channels - 1:
        raise ValueError(f"{len(k)} couplings do not match a {basis.n_channels}-channel basis")
    H = np.zeros((basis.dim, basis.dim))
    for col, occ in enumerate(basis.states):
        for i, rate in enumerate(k):
            for src, dst in ((i, i + 1), (i + 1, i)):
                n_src, n_dst = occ[src], occ[dst]
                if n_src == 0:
                    continue
                if basis.statistics is Statistics.FERMION:
                    if n_dst:
                        continue
                    amp = rate
                else:
                    amp = rate * sqrt(n_src * (n_dst + 1))
                new = list(occ)
                new[src] -= 1
                new[dst] += 1
                H[basis.index[tuple(new)], col] += amp
    return H


@dataclass(frozen=True, eq=False)
class SectorPropagator:
    basis: SectorBasis | None
    time: float
    matrix: np.ndarray


class Spectral:
    """Eigendecomposition of a real symmetric Hamiltonian, reusable across times."""

    def __init__(self, H: np.ndarray):
        H = np.asarray(H, float)
        if H.shape[-1] != H.shape[-2] or not np.allclose(H, np.swapaxes(H, -1, -2), atol=1e-12, rtol=0):
            raise ValueError("Hamiltonian must be a real symmetric matrix")
        try:
            self.energies, self.vectors = np.linalg.eigh(H)
        except np.linalg.LinAlgError as exc:
            raise PropagationError(f"eigendecomposition did not converge: {exc}") from exc

    def unitary(self, t: float, sign: float = -1.0) -> np.ndarray:
        """``exp(sign * i H t)``; ``sign=-1`` is the Schrodinger propagator."""
        phases = np.exp(sign * 1j * self.energies * t)
        V = self.vectors
        return (V * phases[..., None, :]) @ np.swapaxes(V, -1, -2)

    def columns(self, cols, times) -> np.ndarray:
        """``exp(-iHt)[:, cols]`` for every time, shape ``(len(times), dim, len(cols))``
        (with any leading batch axes of the Hamiltonian in front)."""
        times = np.asarray(times, float)
        V = self.vectors
        Vc = V[..., cols, :]                                    # (..., c, k)
        ph = np.exp(-1j * self.energies[..., None, :] * times[:, None])  # (..., T, k)
        return np.einsum("...ik,...tk,...ck->...tic", V, ph, Vc)

    def element(self, row: int, col: int, times) -> np.ndarray:
        """``exp(-iHt)[row, col]`` for every time (trailing axis)."""
        times = np.asarray(times, float)
        w = self.vectors[..., row, :] * self.vectors[..., col, :]
        return np.einsum("...k,...tk->...t", w, np.exp(-1j * self.energies[..., None, :] * times[:, None]))


def propagate(H: np.ndarray, t: float, basis: SectorBasis | None = None) -> SectorPropagator:
    """Exact ``exp(-iHt)`` via the real-symmetric eigendecomposition."""
    return SectorPropagator(basis, float(t), Spectral(H).unitary(t))


def sector_propagator(couplings: CouplingVector, basis: SectorBasis, t: float) -> SectorPropagator:
    return propagate(sector_hamiltonian(couplings, basis), t, basis)


@functools.lru_cache(maxsize=None)
def _hop_structure(n_channels: int, m: int, statistics: Statistics):
    """Sparse description of a sector Hamiltonian: for each coupling index,
    (rows, cols, weights) such that H = sum_i k_i * W_i."""
    basis = enumerate_sector(n_channels, m, statistics)
    rows, cols, links, weights = [], [], [], []
    for i in range(n_channels - 1):
        unit = np.zeros(n_channels - 1)
        unit[i] = 1.0
        W = sector_hamiltonian(unit, basis)
        r, c = np.nonzero(W)
        rows.append(r)
        cols.append(c)
        links.append(np.full(len(r), i))
        weights.append(W[r, c])
    return (np.concatenate(rows), np.concatenate(cols), np.concatenate(links), np.concatenate(weights))


def batched_sector_hamiltonians(k: np.ndarray, basis: SectorBasis) -> np.ndarray:
    """Sector Hamiltonians for a ``(..., N-1)`` stack of coupling vectors."""
    k = np.asarray(k, float)
    if basis.excitations == 1:
        return batched_single_particle_matrices(k)
    rows, cols, links, weights = _hop_structure(basis.n_channels, basis.excitations, basis.statistics)
    H = np.zeros(k.shape[:-1] + (basis.dim, basis.dim))
    H[..., rows, cols] = k[..., links] * weights
    return H


def time_sliced_propagator(couplings: CouplingVector, model: TimeSliced, t: float, seed: int,
                           trial: int = 0, basis: SectorBasis | None = None) -> SectorPropagator:
    """Product of ``steps`` slice propagators, each of duration ``t / steps``."""
    if basis is None:
        basis = enumerate_sector(couplings.n_channels, 1, Statistics.BOSON)
    ks = time_sliced_couplings(couplings, model, seed, trial)
    H = batched_sector_hamiltonians(ks, basis)
    slices = Spectral(H).unitary(t / model.steps)
    U = np.eye(basis.dim, dtype=complex)
    for Us in slices:
        U = Us @ U
    return SectorPropagator(basis, float(t), U)


def permanent(A: np.ndarray) -> complex:
    """Ryser's formula with Gray-code updates, O(2^n n)."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if n == 0:
        return 1.0 + 0j
    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    sign = -1.0 if n % 2 else 1.0
    gray_prev = 0
    for step in range(1, 2 ** n):
        gray = step ^ (step >> 1)
        j = (gray ^ gray_prev).bit_length() - 1
        if gray & (1 << j):
            row_sums += A[:, j]
        else:
            row_sums -= A[:, j]
        gray_prev = gray
        total += (-1) ** bin(gray).count("1") * np.prod(row_sums)
    return sign * total


def _expand(occupation) -> list[int]:
    return [ch for ch, n in enumerate(occupation) for _ in range(n)]


def multiparticle_amplitude(U1: np.ndarray, in_occupation, out_occupation,
                            statistics: Statistics = Statistics.BOSON) -> complex:
    """``<out| exp(-iHt) |in>`` built from the single-particle propagator alone.

    Bosons: permanent of the repeated-index submatrix over
    ``sqrt(prod n_in! prod n_out!)``. Fermions: determinant.
    """
    U1 = np.asarray(U1)
    if sum(in_occupation) != sum(out_occupation):
        raise ValueError(f"particle numbers differ: {sum(in_occupation)} vs {sum(out_occupation)}")
    if len(in_occupation) != U1.shape[1] or len(out_occupation) != U1.shape[0]:
        raise ValueError("occupation length does not match the single-particle propagator")
    cols, rows = _expand(in_occupation), _expand(out_occupation)
    sub = U1[np.ix_(rows, cols)]
    if statistics is Statistics.FERMION:
        if max(in_occupation, default=0) > 1 or max(out_occupation, default=0) > 1:
            raise ValueError("fermionic occupations must be 0 or 1")
        return complex(np.linalg.det(sub)) if rows else 1.0 + 0j
    norm = sqrt(prod(factorial(n) for n in in_occupation) * prod(factorial(n) for n in out_occupation))
    return permanent(sub) / norm


def multiparticle_propagator(U1: np.ndarray, basis: SectorBasis) -> np.ndarray:
    """Whole sector propagator assembled element-wise from permanents/determinants."""
    out = np.empty((basis.dim, basis.dim), dtype=complex)
    for c, s_in in enumerate(basis.states):
        for r, s_out in enumerate(basis.states):
            out[r, c] = multiparticle_amplitude(U1, s_in, s_out, basis.statistics)
    return out


def check_sector_cap(m: int, cap: int = DEFAULT_SECTOR_CAP) -> None:
    if m > cap:
        raise ValueError(f"sector with {m} excitations exceeds the configured cap of {cap}")


def brute_force_permanent(A: np.ndarray) -> complex:
    """Sum over permutations; only for cross-checking :func:`permanent`."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    return sum(np.prod([A[i, p[i]] for i in range(n)]) for p in itertools.permutations(range(n))) if n else 1.0 + 0j
