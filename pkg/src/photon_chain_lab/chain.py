"""Chain geometry, coupling profiles and coupling disorder.

Units: hbar = 1 and every rate is expressed in units of the bulk coupling J,
so times are dimensionless ``t * J``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

import numpy as np


class Statistics(enum.Enum):
    BOSON = "boson"
    FERMION = "fermion"


@dataclass(frozen=True)
class Mirror:
    """Perfect-transfer profile ``k_i = J sqrt(i (N - i))``."""

    J: float = 1.0


@dataclass(frozen=True)
class UniformEdges:
    """Bulk couplings ``J`` with both edge couplings set to ``K``."""

    J: float = 1.0
    K: float = 1.0


@dataclass(frozen=True)
class Explicit:
    values: tuple[float, ...]


Profile = Union[Mirror, UniformEdges, Explicit]


@dataclass(frozen=True)
class ChainSpec:
    n_channels: int
    profile: Profile = Mirror()
    statistics: Statistics = Statistics.BOSON

    def __post_init__(self):
        if int(self.n_channels) != self.n_channels or self.n_channels < 2:
            raise ValueError(f"n_channels must be an integer >= 2, got {self.n_channels}")
        p = self.profile
        if isinstance(p, Mirror):
            rates = [p.J]
        elif isinstance(p, UniformEdges):
            rates = [p.J, p.K]
        elif isinstance(p, Explicit):
            if len(p.values) != self.n_channels - 1:
                raise ValueError(
                    f"explicit profile needs {self.n_channels - 1} couplings, got {len(p.values)}"
                )
            rates = list(p.values)
        else:
            raise TypeError(f"unknown coupling profile {p!r}")
        if not all(np.isfinite(r) and r > 0 for r in rates):
            raise ValueError(f"coupling rates must be strictly positive, got {rates}")

    def with_edge(self, K: float) -> ChainSpec:
        """Copy of a uniform-edge chain with a different edge coupling."""
        if not isinstance(self.profile, UniformEdges):
            raise ValueError("edge coupling is only defined for the uniform-edges profile")
        return ChainSpec(self.n_channels, UniformEdges(self.profile.J, K), self.statistics)


@dataclass(frozen=True)
class CouplingVector:
    """The N-1 nearest-neighbour rates of a chain (possibly disordered)."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError("a chain needs at least one coupling")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def n_channels(self) -> int:
        return len(self.values) + 1

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


@dataclass(frozen=True)
class NoDisorder:
    pass


@dataclass(frozen=True)
class StaticDisorder:
    sigma: float

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class TimeSliced:
    """Piecewise-constant couplings: one static error per realization plus
    a fresh temporal error on every one of ``steps`` equal time slices."""

    steps: int = 100
    sigma_static: float = 0.04
    sigma_temporal: float = 0.02

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be an integer >= 1, got {self.steps}")
        if not (self.sigma_static >= 0 and self.sigma_temporal >= 0):
            raise ValueError("sigmas must be >= 0")


DisorderModel = Union[NoDisorder, StaticDisorder, TimeSliced]


def is_disordered(model: DisorderModel) -> bool:
    if isinstance(model, NoDisorder):
        return False
    if isinstance(model, StaticDisorder):
        return model.sigma > 0
    return model.sigma_static > 0 or model.sigma_temporal > 0


def build_couplings(spec: ChainSpec) -> CouplingVector:
    n = spec.n_channels
    if n < 2:
        raise ValueError(f"n_channels must be >= 2, got {n}")
    p = spec.profile
    if isinstance(p, Mirror):
        i = np.arange(1, n)
        # exact palindrome: i (N - i) is symmetric under i -> N - i
        return CouplingVector(tuple(p.J * np.sqrt(i * (n - i))))
    if isinstance(p, UniformEdges):
        k = [p.J] * (n - 1)
        k[0] = k[-1] = p.K
        return CouplingVector(tuple(k))
    return CouplingVector(p.values)


def trial_rng(seed: int, trial: int = 0) -> np.random.Generator:
    """Generator for one realization.

    Uses the counter-based Philox4x32-10 bit generator keyed by the
    SeedSequence hash of ``(seed, trial)``; normals come from numpy's
    ziggurat sampler. Every trial owns an independent stream, so results
    never depend on how trials are scheduled.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(trial)])))


def apply_static_disorder(couplings: CouplingVector, sigma: float, seed: int,
                          trial: int = 0) -> CouplingVector:
    """Multiply each rate by ``1 + delta_i`` with independent ``delta_i ~ N(0, sigma)``.

    Negative results are kept as they are.
    """
    if not sigma >= 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return couplings
    k = couplings.as_array()
    delta = trial_rng(seed, trial).normal(0.0, sigma, size=k.shape)
    return CouplingVector(tuple(k * (1.0 + delta)))


def single_particle_matrix(couplings: CouplingVector | np.ndarray) -> np.ndarray:
    """Hopping matrix of the one-excitation sector (tridiagonal, zero diagonal)."""
    k = couplings.as_array() if isinstance(couplings, CouplingVector) else np.asarray(couplings, float)
    return np.diag(k, 1) + np.diag(k, -1)


def batched_single_particle_matrices(k: np.ndarray) -> np.ndarray:
    """Stack of hopping matrices for a ``(..., N-1)`` array of couplings."""
    k = np.asarray(k, float)
    n = k.shape[-1] + 1
    h = np.zeros(k.shape[:-1] + (n, n))
    idx = np.arange(n - 1)
    h[..., idx, idx + 1] = k
    h[..., idx + 1, idx] = k
    return h


def time_sliced_couplings(couplings: CouplingVector, model: TimeSliced, seed: int,
                          trial: int = 0) -> np.ndarray:
    """Per-slice couplings ``k_i (1 + d_i + e_{i,s})``, shape ``(steps, N-1)``.

    ``d_i`` is drawn once per realization, ``e_{i,s}`` afresh for every slice.
    """
    k = couplings.as_array()
    rng = trial_rng(seed, trial)
    static = rng.normal(0.0, model.sigma_static, size=k.shape)
    temporal = rng.normal(0.0, model.sigma_temporal, size=(model.steps,) + k.shape)
    return k * (1.0 + static + temporal)
