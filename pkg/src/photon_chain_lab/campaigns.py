"""Randomized falsification campaigns for the end-channel photon-number bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import CouplingVector, trial_rng
from .flux import (
    SectorEvolver,
    aligned_amplitudes,
    per_term_bounds,
    coherent_bound,
    coherent_expectation,
    general_state_bound,
    heisenberg_coefficients,
    mean_occupation,
    one_body_expectation,
)


@dataclass(frozen=True)
class CampaignRecord:
    instance: int
    kind: str
    n_channels: int
    t: float
    flux: float
    n1: float
    scale: float          # alpha_max for coherent inputs, n_max for general ones
    actual: float
    bound: float
    terms_ok: bool        # per-term inequalities (coherent only)
    crosscheck: float     # |closed form - independent evaluation|

    @property
    def satisfied(self) -> bool:
        return self.actual <= self.bound + 1e-9


def _random_couplings(rng: np.random.Generator, n: int) -> CouplingVector:
    return CouplingVector(tuple(rng.uniform(0.2, 2.0, n - 1)))


def _coherent_amplitudes(rng, n, alpha_max, C):
    """Random amplitudes, one instance in four pushed onto the worst case
    (all moduli at alpha_max, phases aligned with the coefficients)."""
    if rng.random() < 0.25:
        return aligned_amplitudes(C, alpha_max)
    mags = alpha_max * np.sqrt(rng.random(n - 1))
    return mags * np.exp(1j * rng.uniform(0, 2 * np.pi, n - 1))


def coherent_campaign(instances: int, seed: int, max_channels: int = 12, t_max: float = 20.0):
    """Coherent inputs in channels 2..N, a coherent ``|sqrt(n1)>`` in channel 1."""
    out = []
    for i in range(instances):
        rng = trial_rng(seed, i)
        n = int(rng.integers(2, max_channels + 1))
        k = _random_couplings(rng, n)
        t = float(rng.uniform(0, t_max))
        C = heisenberg_coefficients(k, t)
        alpha_max = float(rng.uniform(0, 2.0))
        a = _coherent_amplitudes(rng, n, alpha_max, C)
        n1 = float(rng.integers(0, 6))
        value = coherent_expectation(C, a, n1)
        c1sq = abs(C.matrix[-1, 0]) ** 2
        reference = abs(np.sum(np.conj(np.concatenate([[math.sqrt(n1)], a])) * C.last_row)) ** 2
        terms = per_term_bounds(C, a, alpha_max, n1)
        out.append(CampaignRecord(i, "coherent", n, t, c1sq, n1, alpha_max, value - c1sq * n1,
                                  coherent_bound(C, alpha_max, n1), terms.satisfied, abs(value - reference)))
    return out


def _random_channel_state(rng, levels: int) -> np.ndarray:
    v = rng.normal(size=levels) + 1j * rng.normal(size=levels)
    # sometimes favour low occupations, sometimes high, to spread n_j
    v *= rng.uniform(0.2, 1.0, levels) ** rng.integers(0, 3)
    return v / np.linalg.norm(v)


def general_campaign(instances: int, seed: int, max_channels: int = 4, levels: int = 3,
                     per_chain: int = 50, t_max: float = 20.0):
    """Random separable superpositions of ``|0>..|levels-1>`` per channel,
    evolved exactly in every photon-number sector (N <= ``max_channels``)."""
    out = []
    chains = math.ceil(instances / per_chain)
    i = 0
    for c in range(chains):
        rng = trial_rng(seed, c)
        n = int(rng.integers(2, max_channels + 1))
        k = _random_couplings(rng, n)
        evolver = SectorEvolver(k, (levels - 1) * n)
        for _ in range(min(per_chain, instances - i)):
            t = float(rng.uniform(0, t_max))
            states = [_random_channel_state(rng, levels) for _ in range(n)]
            C = heisenberg_coefficients(k, t)
            value, norm = evolver.photon_number(states, t)
            occ = [mean_occupation(s) for s in states]
            n1, n_max = occ[0], max(occ[1:])
            c1sq = abs(C.matrix[-1, 0]) ** 2
            heis = one_body_expectation(C, states)
            out.append(CampaignRecord(i, "general", n, t, c1sq, n1, n_max, value - c1sq * n1,
                                      general_state_bound(C, n_max, n1), True,
                                      max(abs(value - heis), abs(norm - 1))))
            i += 1
    return out


@dataclass(frozen=True)
class CampaignSummary:
    instances: int
    violations: int
    term_violations: int
    max_crosscheck: float
    max_ratio: float      # largest actual / bound over instances with a positive bound


def summarize(records) -> CampaignSummary:
    ratios = [r.actual / r.bound for r in records if r.bound > 1e-12]
    return CampaignSummary(
        len(records),
        sum(not r.satisfied for r in records),
        sum(not r.terms_ok for r in records),
        max((r.crosscheck for r in records), default=0.0),
        max(ratios, default=0.0),
    )
