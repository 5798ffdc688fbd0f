"""Built-in acceptance suite, shared by ``photon-chain-lab verify`` and the tests.

Each criterion returns a :class:`CriterionResult` with the measured values in
``detail``; tolerances and runtime limits are fixed here.
"""

from __future__ import annotations

import math
import os
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .campaigns import coherent_campaign, general_campaign, summarize
from .chain import (
    ChainSpec,
    CouplingVector,
    Mirror,
    NoDisorder,
    StaticDisorder,
    Statistics,
    TimeSliced,
    UniformEdges,
    single_particle_matrix,
    trial_rng,
)
from .config import parse_config
from .experiments import run_experiment, saturation_check
from .flux import heisenberg_coefficients, information_flux
from .metrics import (
    apply_phase_correction,
    average_fidelity,
    channel_response,
    mc_bloch_average,
    transfer_amplitudes,
)
from .noise import (
    ExtraExcitationConfig,
    Rotation,
    SweepGrid,
    compare_statistics,
    extra_excitation_fidelity,
    fidelity_sweep,
    optimize_transfer,
)
from .sectors import Spectral, enumerate_sector, multiparticle_propagator, sector_hamiltonian

SEED = 20240611


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number}. {self.title}: {self.detail} ({self.seconds:.1f} s)"


def _timed(limit: Optional[float]):
    """Decorator: measure runtime and fold an optional limit into ``passed``."""

    def wrap(func):
        def run() -> CriterionResult:
            start = time.perf_counter()
            number, title, passed, detail = func()
            elapsed = time.perf_counter() - start
            if limit is not None:
                ok = elapsed < limit
                detail += f"; runtime {elapsed:.1f} s vs limit {limit:.0f} s"
                passed = passed and ok
            return CriterionResult(number, title, passed, detail, elapsed)

        run.__name__ = func.__name__
        run.__doc__ = func.__doc__
        return run

    return wrap


# ---------------------------------------------------------------------------


@_timed(5.0)
def perfect_transfer():
    worst_F, worst_t = 0.0, 0.0
    for n in range(2, 13):
        rep = optimize_transfer(ChainSpec(n, Mirror()), (0.0, 20.0))
        worst_F = max(worst_F, abs(rep.mean - 1.0))
        worst_t = max(worst_t, abs(rep.argmax_t - math.pi / 2))
    passed = worst_F <= 1e-9 and worst_t <= 1e-6
    return 1, "perfect transfer, mirror N=2..12", passed, \
        f"max |F-1| = {worst_F:.2e} (tol 1e-9), max |t*-pi/2| = {worst_t:.2e} (tol 1e-6)"


def clean_edge_optimum(n: int = 9, qudit_dim: int = 2):
    """Noiseless optimum of the uniform-edge chain over K in [0.05, 1.5], t in [0, 20]."""
    return optimize_transfer(ChainSpec(n, UniformEdges()), (0.0, 20.0), (0.05, 1.5), NoDisorder(),
                             qudit_dim, t_points=401, K_points=30)


def disordered_optimum(qudit_dim: int, clean=None, trials: int = 1000, seed: int = SEED):
    """Ensemble optimum under time-sliced noise, searched around the clean optimum."""
    clean = clean or clean_edge_optimum()
    t0, K0 = clean.argmax_t, clean.argmax_K
    return optimize_transfer(ChainSpec(9, UniformEdges()), (t0 - 0.5, t0 + 0.5), (K0 - 0.04, K0 + 0.04),
                             TimeSliced(100, 0.04, 0.02), qudit_dim, trials, seed,
                             t_points=21, K_points=5, K_tolerance=1e-3)


@_timed(120.0)
def disorder_result():
    clean = clean_edge_optimum()
    q2 = disordered_optimum(2, clean)
    q3 = disordered_optimum(3, clean)
    ok2 = 0.967 <= q2.mean <= 1.0
    ok3 = 0.948 <= q3.mean <= 1.0
    detail = (f"F_qubit = {q2.mean:.4f} +- {q2.std:.4f} at (t={q2.argmax_t:.3f}, K={q2.argmax_K:.4f}), "
              f"F_qutrit = {q3.mean:.4f} +- {q3.std:.4f} at (t={q3.argmax_t:.3f}, K={q3.argmax_K:.4f}); "
              f"{q2.trials} trials; windows [0.967, 1] and [0.948, 1]")
    return 2, "time-sliced disorder, uniform edges N=9", ok2 and ok3, detail


@_timed(None)
def optimum_coincidence():
    grid = SweepGrid(tuple(np.linspace(0, 20, 401)), tuple(np.linspace(0.05, 1.5, 59)))
    spec = ChainSpec(9, UniformEdges())
    q2 = fidelity_sweep(spec, grid, qudit_dim=2)
    q3 = fidelity_sweep(spec, grid, qudit_dim=3)
    dt = grid.t_grid[1] - grid.t_grid[0]
    dK = grid.K_grid[1] - grid.K_grid[0]
    passed = abs(q2.argmax_t - q3.argmax_t) <= dt + 1e-12 and abs(q2.argmax_K - q3.argmax_K) <= dK + 1e-12
    return 3, "qubit/qutrit optimum coincide, N=9", passed, \
        (f"qubit (t={q2.argmax_t:.3f}, K={q2.argmax_K:.4f}), qutrit (t={q3.argmax_t:.3f}, K={q3.argmax_K:.4f}); "
         f"grid steps dt={dt:.3f}, dK={dK:.4f}")


@_timed(30.0)
def permanent_oracle(draws: int = 200, seed: int = SEED):
    worst_g, worst_el = 0.0, 0.0
    for i in range(draws):
        rng = trial_rng(seed, i)
        n = int(rng.integers(2, 13))
        k = CouplingVector(tuple(rng.uniform(0.1, 2.0, n - 1)))
        t = float(rng.uniform(0, 20))
        U1 = Spectral(single_particle_matrix(k)).unitary(t)
        stat = Statistics.BOSON if i % 2 == 0 else Statistics.FERMION
        basis = enumerate_sector(n, 2, stat)
        U2 = Spectral(sector_hamiltonian(k, basis)).unitary(t)
        if stat is Statistics.BOSON:
            amps = transfer_amplitudes(U1, U2, basis, n)
            worst_g = max(worst_g, abs(amps.g - amps.f ** 2))
        worst_el = max(worst_el, float(np.abs(U2 - multiparticle_propagator(U1, basis)).max()))
    passed = worst_g <= 1e-10 and worst_el <= 1e-10
    return 4, "permanent/determinant oracle", passed, \
        f"{draws} draws (N<=12): max |g-f^2| = {worst_g:.1e}, max element error = {worst_el:.1e} (tol 1e-10)"


@_timed(None)
def closed_form_mc(chains: int = 20, samples: int = 100_000, seed: int = SEED):
    worst = 0.0
    for i in range(chains):
        rng = trial_rng(seed + 1, i)
        n = int(rng.integers(3, 10))
        k = CouplingVector(tuple(rng.uniform(0.2, 2.0, n - 1)))
        t = float(rng.uniform(0, 20))
        spectra = [Spectral(sector_hamiltonian(k, enumerate_sector(n, m))) for m in (1, 2)]
        amps = apply_phase_correction(transfer_amplitudes(spectra[0].unitary(t), spectra[1].unitary(t),
                                                          enumerate_sector(n, 2), n))
        for d in (2, 3):
            est = mc_bloch_average(channel_response(k, t, d), samples, seed=seed + 100 * i + d)
            z = abs(est.mean - average_fidelity(amps, d)) / est.stderr
            worst = max(worst, z)
    return 5, "closed forms vs Monte-Carlo Bloch average", worst <= 3.0, \
        f"{chains} chains x qubit/qutrit, {samples} samples each: worst deviation {worst:.2f} SE (tol 3)"


def phase_match_table(boson=(5, 9, 13), fermion=(7, 11), p: float = 0.05):
    """R1 vs oracle rotation at the perfect-transfer time of the mirror chain."""
    out = []
    for stat, sizes in ((Statistics.BOSON, boson), (Statistics.FERMION, fermion)):
        for n in sizes:
            spec = ChainSpec(n, Mirror(), stat)
            vals = {rot: extra_excitation_fidelity(spec, ExtraExcitationConfig(p_extra=p, rotation=rot),
                                                   t=math.pi / 2).mean
                    for rot in (Rotation.R1, Rotation.ORACLE)}
            out.append((stat, n, vals[Rotation.R1], vals[Rotation.ORACLE]))
    return out


def statistics_ordering(trials: int = 500, seed: int = SEED, K: Optional[float] = None):
    K = clean_edge_optimum().argmax_K if K is None else K
    profile = UniformEdges(1.0, K)
    grid = SweepGrid(tuple(np.linspace(0, 20, 201)))
    return compare_statistics(ChainSpec(9, profile, Statistics.BOSON), ChainSpec(9, profile, Statistics.FERMION),
                              ExtraExcitationConfig(p_extra=0.05), StaticDisorder(0.05), grid, trials, seed)


@_timed(None)
def phase_match():
    rows = phase_match_table()
    parts, ok = [], True
    for stat, n, r1, oracle in rows:
        good = abs(r1 - oracle) <= 1e-6
        ok &= good
        parts.append(f"{stat.value} N={n}: R1 {r1:.6f} vs oracle {oracle:.6f} {'ok' if good else 'MISMATCH'}")
    cmp = statistics_ordering()
    order = cmp.boson.mean > cmp.fermion.mean
    parts.append(f"N=9 5% static disorder, {cmp.boson.trials} trials: boson peak {cmp.boson.mean:.4f} "
                 f"{'>' if order else '<='} fermion peak {cmp.fermion.mean:.4f}")
    return 6, "extra-excitation phase match and statistics ordering", ok and order, "; ".join(parts)


FLUX_VS_K_CONFIG = """
experiment = "info-flux"
seed = 5
trials = 1
qudit_dim = {d}

[chain]
n_channels = 9
profile = "uniform-edges"

[grid]
t_min = 0.0
t_max = 20.0
t_points = 2001
K_min = 0.05
K_max = 1.5
K_points = 59
"""


@_timed(None)
def flux_identity(chains: int = 50, seed: int = SEED):
    worst = 0.0
    times = np.linspace(0, 20, 2001)
    for i in range(chains):
        rng = trial_rng(seed + 2, i)
        n = int(rng.integers(2, 13))
        k = CouplingVector(tuple(rng.uniform(0.2, 2.0, n - 1)))
        f = Spectral(single_particle_matrix(k)).element(n - 1, 0, times)
        flux = np.array([information_flux(heisenberg_coefficients(k, t)) for t in times])
        worst = max(worst, float(np.abs(np.abs(f) ** 2 - flux).max()))
    agree = []
    for d in (2, 3):
        s = run_experiment(parse_config(FLUX_VS_K_CONFIG.format(d=d))).summary
        agree.append((d, s["fidelity_argmax_K"], s["flux_argmax_K"], s["argmax_K_agree_within_one_step"]))
    passed = worst <= 1e-12 and all(a[3] for a in agree)
    detail = f"{chains} chains x {len(times)} times: max ||f|^2 - flux| = {worst:.1e} (tol 1e-12); " + ", ".join(
        f"d={d}: argmax_K fidelity {kf:.4f} / flux {ki:.4f}" for d, kf, ki, _ in agree)
    return 7, "flux-fidelity identity and K argmax", passed, detail


@_timed(None)
def bound_campaigns(instances: int = 10_000, seed: int = SEED):
    coh = summarize(coherent_campaign(instances, seed))
    gen = summarize(general_campaign(instances, seed))
    sat = saturation_check()
    passed = (coh.violations == gen.violations == 0 and coh.term_violations == 0
              and coh.max_crosscheck <= 1e-8 and gen.max_crosscheck <= 1e-8 and sat["gap"] <= 1e-10)
    detail = (f"coherent {coh.instances}: {coh.violations} bound / {coh.term_violations} term violations "
              f"(max actual/bound {coh.max_ratio:.6f}); general {gen.instances}: {gen.violations} violations "
              f"(max ratio {gen.max_ratio:.4f}); saturation gap {sat['gap']:.1e} (tol 1e-10)")
    return 8, "bound campaigns", passed, detail


DETERMINISM_CONFIG = """
experiment = "fidelity-sweep"
seed = 11
trials = 300
qudit_dim = 3

[chain]
n_channels = 7
profile = "uniform-edges"
K = 0.4

[grid]
t_points = 81
K_min = 0.3
K_max = 0.5
K_points = 3

[disorder]
model = "static"
sigma = 0.05
"""


@_timed(None)
def determinism(threads=(1, 1, 3, 8)):
    blobs = []
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "cfg.toml")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(DETERMINISM_CONFIG)
        for i, n in enumerate(threads):
            prefix = os.path.join(tmp, f"run{i}")
            env = dict(os.environ, PCL_THREADS=str(n))
            proc = subprocess.run([sys.executable, "-m", "photon_chain_lab.cli", "run", path, "--output", prefix],
                                  env=env, capture_output=True, text=True)
            if proc.returncode:
                return 9, "determinism", False, f"run exited with {proc.returncode}: {proc.stderr.strip()}"
            with open(prefix + ".csv", "rb") as fh:
                blobs.append(fh.read())
    same = all(b == blobs[0] for b in blobs)
    return 9, "determinism across runs and PCL_THREADS", same, \
        f"{len(blobs)} runs with PCL_THREADS={list(threads)}: {'byte-identical' if same else 'DIFFERENT'} CSV"


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: perfect_transfer,
    2: disorder_result,
    3: optimum_coincidence,
    4: permanent_oracle,
    5: closed_form_mc,
    6: phase_match,
    7: flux_identity,
    8: bound_campaigns,
    9: determinism,
}


def run_acceptance(only=None, stream=None) -> list[CriterionResult]:
    results = []
    for number, func in CRITERIA.items():
        if only and number not in only:
            continue
        res = func()
        results.append(res)
        if stream is not None:
            print(res.line(), file=stream, flush=True)
    if stream is not None:
        print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed", file=stream)
    return results
