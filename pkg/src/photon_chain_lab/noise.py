"""Disorder-averaged fidelity experiments.

Trials are processed in fixed-size chunks; each trial draws from its own
``(seed, trial)`` stream, and the thread pool only decides how many chunks
run at once, so every number is independent of ``PCL_THREADS``.
"""

from __future__ import annotations

import enum
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .chain import (
    ChainSpec,
    DisorderModel,
    NoDisorder,
    StaticDisorder,
    Statistics,
    TimeSliced,
    UniformEdges,
    apply_static_disorder,
    batched_single_particle_matrices,
    build_couplings,
    is_disordered,
    time_sliced_couplings,
)
from .metrics import (
    channel_marginals,
    correction_phase,
    qubit_fidelity_array,
    qutrit_fidelity_array,
)
from .sectors import (
    DEFAULT_SECTOR_CAP,
    PropagationError,
    Spectral,
    batched_sector_hamiltonians,
    check_sector_cap,
    enumerate_sector,
)

CHUNK = 64
DEFAULT_T_GRID = np.linspace(0.0, 20.0, 401)


def worker_count() -> int:
    raw = os.environ.get("PCL_THREADS", "")
    if raw.strip():
        n = int(raw)
        if n < 1:
            raise ValueError("PCL_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def map_trials(func, trials: int):
    """Apply ``func(trial_ids)`` to fixed chunks of trials; results in trial order."""
    chunks = [np.arange(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]
    workers = min(worker_count(), len(chunks))
    if workers <= 1:
        return [func(c) for c in chunks]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(func, chunks))


def _map_chunks(func, items):
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(func, items))


def fsum_mean_std(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and sample std over axis 0 with compensated summation."""
    values = np.asarray(values, float)
    n = values.shape[0]
    flat = values.reshape(n, -1)
    mean = np.array([math.fsum(col) for col in flat.T]) / n
    if n > 1:
        dev = flat - mean
        var = np.array([math.fsum(col) for col in (dev * dev).T]) / (n - 1)
    else:
        var = np.zeros_like(mean)
    return mean.reshape(values.shape[1:]), np.sqrt(var).reshape(values.shape[1:])


@dataclass(frozen=True)
class SweepGrid:
    t_grid: tuple[float, ...] = tuple(DEFAULT_T_GRID)
    K_grid: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        for name, g in (("t_grid", self.t_grid), ("K_grid", self.K_grid)):
            if g is None:
                continue
            arr = np.asarray(g, float)
            if arr.size == 0:
                raise ValueError(f"{name} must not be empty")
            if np.any(np.diff(arr) <= 0):
                raise ValueError(f"{name} must be strictly increasing")
        object.__setattr__(self, "t_grid", tuple(float(x) for x in self.t_grid))
        if self.K_grid is not None:
            object.__setattr__(self, "K_grid", tuple(float(x) for x in self.K_grid))
            if min(self.K_grid) <= 0:
                raise ValueError("edge couplings must be positive")


@dataclass(frozen=True, eq=False)
class SweepTable:
    t: np.ndarray
    K: np.ndarray            # NaN where the profile has no edge coupling
    mean: np.ndarray
    std: np.ndarray
    flux: np.ndarray

    def __len__(self):
        return len(self.t)

    def rows(self):
        return zip(self.t, self.K, self.mean, self.std, self.flux)


@dataclass(frozen=True, eq=False)
class FidelityReport:
    mean: float
    std: float
    trials: int
    argmax_t: float
    argmax_K: Optional[float] = None
    table: Optional[SweepTable] = None

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(self.trials)


def _effective_trials(disorder: DisorderModel, trials: int) -> int:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return trials if is_disordered(disorder) else 1


# ---------------------------------------------------------------------------
# ensemble transfer amplitudes


def _static_coupling_stack(spec_couplings, disorder, seed, ids) -> np.ndarray:
    if isinstance(disorder, StaticDisorder):
        return np.array([apply_static_disorder(spec_couplings, disorder.sigma, seed, int(i)).values for i in ids])
    return np.tile(spec_couplings.as_array(), (len(ids), 1))


class EnsembleAmplitudes:
    """Raw end-to-end amplitudes ``f(t)`` (and ``g(t)``) for every trial of one chain.

    Static and disorder-free ensembles diagonalize once per trial and then
    evaluate any time cheaply; time-sliced ensembles cache the per-slice
    eigensystems and re-multiply the slices for each requested time.
    """

    def __init__(self, spec: ChainSpec, disorder: DisorderModel, trials: int, seed: int, need_g: bool):
        self.spec = spec
        self.disorder = disorder
        self.trials = _effective_trials(disorder, trials)
        self.seed = seed
        self.need_g = need_g
        self.n = spec.n_channels
        self._nominal = build_couplings(spec)
        if isinstance(disorder, TimeSliced):
            self._slices = map_trials(self._slice_spectra, self.trials)
        else:
            self._spectra = map_trials(self._static_spectra, self.trials)

    def _static_spectra(self, ids):
        k = _static_coupling_stack(self._nominal, self.disorder, self.seed, ids)
        one = Spectral(batched_single_particle_matrices(k))
        two = None
        if self.need_g:
            basis = enumerate_sector(self.n, 2, Statistics.BOSON)
            two = Spectral(batched_sector_hamiltonians(k, basis))
        return one, two

    def _slice_spectra(self, ids):
        ks = np.array([time_sliced_couplings(self._nominal, self.disorder, self.seed, int(i)) for i in ids])
        return Spectral(batched_single_particle_matrices(ks))

    def at(self, times) -> tuple[np.ndarray, Optional[np.ndarray]]:
        """``(f, g)`` with shape ``(trials, len(times))``; ``g`` is None unless requested."""
        times = np.atleast_1d(np.asarray(times, float))
        if isinstance(self.disorder, TimeSliced):
            f = np.concatenate(_map_chunks(lambda sp: self._sliced_f(sp, times), self._slices))
            # quadratic Hamiltonian: g = perm([[u, u], [u, u]]) / 2 = u^2 at every instant
            return f, (f ** 2 if self.need_g else None)
        fs, gs = [], []
        n = self.n
        last2 = enumerate_sector(n, 2, Statistics.BOSON).position((0,) * (n - 1) + (2,))
        for one, two in self._spectra:
            fs.append(one.element(n - 1, 0, times))
            if self.need_g:
                gs.append(two.element(last2, 0, times))
        return np.concatenate(fs), (np.concatenate(gs) if self.need_g else None)

    def _sliced_f(self, spectra: Spectral, times: np.ndarray) -> np.ndarray:
        V, E = spectra.vectors, spectra.energies          # (r, s, N, N), (r, s, N)
        steps = V.shape[1]
        phases = np.exp(-1j * E[..., None] * (times / self.disorder.steps))   # (r, s, N, T)
        VT = np.swapaxes(V, -1, -2)
        psi = np.zeros((V.shape[0], self.n, len(times)), complex)
        psi[:, 0, :] = 1.0
        for s in range(steps):
            psi = V[:, s] @ (phases[:, s] * (VT[:, s] @ psi))
        return psi[:, -1, :]


def corrected_fidelity(f: np.ndarray, g: Optional[np.ndarray], n_channels: int, qudit_dim: int) -> np.ndarray:
    fc = f * correction_phase(n_channels, 1)
    if qudit_dim == 2:
        F = qubit_fidelity_array(fc)
    elif qudit_dim == 3:
        F = qutrit_fidelity_array(fc, g * correction_phase(n_channels, 2))
    else:
        raise ValueError(f"qudit_dim must be 2 or 3, got {qudit_dim}")
    return np.clip(F, 0.0, 1.0)     # round-off only


class EnsembleObjective:
    """Ensemble-mean fidelity as a function of ``(t, K)`` with common random numbers."""

    def __init__(self, spec: ChainSpec, disorder: DisorderModel, qudit_dim: int, trials: int, seed: int):
        if qudit_dim not in (2, 3):
            raise ValueError(f"qudit_dim must be 2 or 3, got {qudit_dim}")
        if qudit_dim == 3 and spec.statistics is Statistics.FERMION:
            raise ValueError("qutrit transfer needs a bosonic chain")
        self.spec = spec
        self.disorder = disorder
        self.qudit_dim = qudit_dim
        self.trials = _effective_trials(disorder, trials)
        self.seed = seed
        self._cache: dict = {}

    def chain(self, K: Optional[float]) -> ChainSpec:
        return self.spec if K is None else self.spec.with_edge(K)

    def amplitudes(self, K: Optional[float]) -> EnsembleAmplitudes:
        key = None if K is None else float(K)
        if key not in self._cache:
            if len(self._cache) > 64:
                self._cache.clear()
            try:
                self._cache[key] = EnsembleAmplitudes(self.chain(K), self.disorder, self.trials,
                                                      self.seed, self.qudit_dim == 3)
            except PropagationError as exc:
                raise PropagationError(f"{exc} (K={K})") from exc
        return self._cache[key]

    def samples(self, times, K: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
        """Per-trial fidelity and flux ``|f|^2``, each ``(trials, len(times))``."""
        f, g = self.amplitudes(K).at(times)
        return corrected_fidelity(f, g, self.spec.n_channels, self.qudit_dim), np.abs(f) ** 2

    def mean(self, t: float, K: Optional[float] = None) -> float:
        F, _ = self.samples([t], K)
        return float(fsum_mean_std(F)[0][0])


# ---------------------------------------------------------------------------
# sweeps and optimization


def _edge_values(spec: ChainSpec, grid: SweepGrid) -> list[Optional[float]]:
    if grid.K_grid is None:
        return [None]
    if not isinstance(spec.profile, UniformEdges):
        raise ValueError("a K grid needs the uniform-edges profile")
    return list(grid.K_grid)


def _pick(values: np.ndarray, t: np.ndarray, K: np.ndarray, tol: float = 1e-12) -> int:
    """Index of the maximum; near-ties go to the smallest t, then the smallest K."""
    best = np.nanmax(values)
    cand = np.flatnonzero(values >= best - tol)
    Kc = np.where(np.isnan(K[cand]), 0.0, K[cand])
    order = np.lexsort((Kc, t[cand]))
    return int(cand[order[0]])


def fidelity_sweep(spec: ChainSpec, grid: SweepGrid, disorder: DisorderModel = NoDisorder(),
                   qudit_dim: int = 2, trials: int = 1, seed: int = 0) -> FidelityReport:
    """Ensemble mean and spread of the corrected average fidelity on a (K, t) grid."""
    obj = EnsembleObjective(spec, disorder, qudit_dim, trials, seed)
    times = np.asarray(grid.t_grid)
    cols = {"t": [], "K": [], "mean": [], "std": [], "flux": []}
    for K in _edge_values(spec, grid):
        F, flux = obj.samples(times, K)
        m, s = fsum_mean_std(F)
        cols["t"].append(times)
        cols["K"].append(np.full(len(times), np.nan if K is None else K))
        cols["mean"].append(m)
        cols["std"].append(s)
        cols["flux"].append(fsum_mean_std(flux)[0])
    table = SweepTable(*(np.concatenate(cols[c]) for c in ("t", "K", "mean", "std", "flux")))
    i = _pick(table.mean, table.t, table.K)
    K_best = None if np.isnan(table.K[i]) else float(table.K[i])
    return FidelityReport(float(table.mean[i]), float(table.std[i]), obj.trials, float(table.t[i]), K_best, table)


def _local_maxima(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values)
    if v.size == 1:
        return np.array([0])
    left = np.concatenate([[-np.inf], v[:-1]])
    right = np.concatenate([v[1:], [-np.inf]])
    return np.flatnonzero((v >= left) & (v >= right))


def _refine_t(obj: EnsembleObjective, K, t0: float, lo: float, hi: float, half: float) -> tuple[float, float]:
    a, b = max(lo, t0 - half), min(hi, t0 + half)
    if b - a < 1e-12:
        return t0, obj.mean(t0, K)
    res = minimize_scalar(lambda t: -obj.mean(t, K), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-10, "maxiter": 200})
    t_best, v_best = float(res.x), -float(res.fun)
    v0 = obj.mean(t0, K)
    return (t0, v0) if v0 > v_best else (t_best, v_best)


def _best_t(obj: EnsembleObjective, K, times: np.ndarray, keep: float = 0.05) -> tuple[float, float]:
    """Maximize over t: refine every grid local maximum close to the best one."""
    F, _ = obj.samples(times, K)
    curve = fsum_mean_std(F)[0]
    step = times[1] - times[0] if len(times) > 1 else 0.0
    best_val = curve.max()
    found = []
    for i in _local_maxima(curve):
        if curve[i] < best_val - keep:
            continue
        found.append(_refine_t(obj, K, float(times[i]), times[0], times[-1], step))
    found.sort(key=lambda tv: (-tv[1], tv[0]))
    top = found[0][1]
    return min((tv for tv in found if tv[1] >= top - 1e-9), key=lambda tv: tv[0])


def refine_sweep_peak(spec: ChainSpec, report: FidelityReport, disorder: DisorderModel = NoDisorder(),
                      qudit_dim: int = 2, trials: int = 1, seed: int = 0) -> tuple[float, float]:
    """Off-grid ``(t, mean)`` maximum on the report's best K slice."""
    table = report.table
    K = report.argmax_K
    rows = np.isnan(table.K) if K is None else table.K == K
    obj = EnsembleObjective(spec, disorder, qudit_dim, trials, seed)
    return _best_t(obj, K, table.t[rows])


def optimize_transfer(spec: ChainSpec, t_range=(0.0, 20.0), K_range=None, disorder: DisorderModel = NoDisorder(),
                      qudit_dim: int = 2, trials: int = 1, seed: int = 0, t_points: int = 401,
                      K_points: int = 41, K_tolerance: float = 1e-8) -> FidelityReport:
    """Grid search then bounded local refinement of the ensemble-mean fidelity.

    Returns the report at the optimum; its ``table`` is the coarse grid.
    Ties go to the smallest t, then the smallest K.
    """
    if not t_range[1] > t_range[0]:
        raise ValueError("t_range must be non-degenerate")
    times = np.linspace(t_range[0], t_range[1], t_points)
    obj = EnsembleObjective(spec, disorder, qudit_dim, trials, seed)
    Ks = None
    if K_range is not None:
        if not K_range[1] > K_range[0]:
            raise ValueError("K_range must be non-degenerate")
        Ks = np.linspace(K_range[0], K_range[1], K_points)
    coarse = fidelity_sweep(spec, SweepGrid(tuple(times), None if Ks is None else tuple(Ks)),
                            disorder, qudit_dim, trials, seed)
    if Ks is None:
        t_best, _ = _best_t(obj, None, times)
        K_best = None
    else:
        profile = coarse.table.mean.reshape(len(Ks), len(times)).max(axis=1)
        dK = Ks[1] - Ks[0]
        keep = profile.max() - 1e-3
        results = []
        for i in _local_maxima(profile):
            if profile[i] < keep:
                continue
            a, b = max(Ks[0], Ks[i] - dK), min(Ks[-1], Ks[i] + dK)
            res = minimize_scalar(lambda K: -_best_t(obj, K, times)[1], bounds=(a, b), method="bounded",
                                  options={"xatol": K_tolerance, "maxiter": 100})
            for K in (float(res.x), float(Ks[i])):
                t, v = _best_t(obj, K, times)
                results.append((v, t, K))
        top = max(r[0] for r in results)
        _, t_best, K_best = min((r for r in results if r[0] >= top - 1e-9), key=lambda r: (r[1], r[2]))
    F, _ = obj.samples([t_best], K_best)
    m, s = fsum_mean_std(F)
    return FidelityReport(float(m[0]), float(s[0]), obj.trials, t_best, K_best, coarse.table)


# ---------------------------------------------------------------------------
# extra excitations in the medium


class Rotation(enum.Enum):
    R1 = "R1"                 # single-excitation correction applied blindly
    R1_MINUS_1 = "R1minus1"   # closed-form correction for the extra-excitation branch
    ORACLE = "oracle"         # fidelity-optimal phase on each extra-excitation branch


class ExtraMode(enum.Enum):
    SINGLE_RANDOM = "single-random"
    BINOMIAL = "binomial"


@dataclass(frozen=True)
class ExtraExcitationConfig:
    """Imperfect initialization of channels 2..N.

    ``single-random``: with probability ``p_extra`` exactly one extra
    excitation sits in a channel drawn uniformly from 2..N.
    ``binomial``: every channel 2..N independently holds one excitation with
    probability ``p_extra``; configurations whose total excitation number
    (input included) exceeds ``max_total_excitations`` are dropped and the
    mixture renormalized.
    """

    mode: ExtraMode = ExtraMode.SINGLE_RANDOM
    p_extra: float = 0.05
    rotation: Rotation = Rotation.R1
    max_total_excitations: int = DEFAULT_SECTOR_CAP

    def __post_init__(self):
        if not 0 <= self.p_extra <= 1:
            raise ValueError(f"p_extra must lie in [0, 1], got {self.p_extra}")
        if self.max_total_excitations < 1:
            raise ValueError("max_total_excitations must be >= 1")

    def configurations(self, n_channels: int, sector_cap: int = DEFAULT_SECTOR_CAP):
        """``[(weight, extra channel indices)]`` with 0-based channel indices."""
        p = self.p_extra
        bulk = range(1, n_channels)
        if self.mode is ExtraMode.SINGLE_RANDOM:
            check_sector_cap(2, sector_cap)
            out = [(1.0 - p, ())]
            out += [(p / (n_channels - 1), (j,)) for j in bulk] if p > 0 else []
            return [c for c in out if c[0] > 0]
        check_sector_cap(self.max_total_excitations, sector_cap)
        out = []
        for e in range(0, self.max_total_excitations):
            w = p ** e * (1 - p) ** (n_channels - 1 - e)
            if w == 0:
                continue
            out += [(w, combo) for combo in itertools.combinations(bulk, e)]
        total = math.fsum(w for w, _ in out)
        return [(w / total, combo) for w, combo in out]


def closed_form_extra_phase(n_channels: int, extras: int, statistics: Statistics) -> complex:
    """Output phase that undoes the transfer phase of ``extras + 1`` excitations,
    with the exchange sign of fermions: boson ``exp(i pi (N-1) (e+1) / 2)``,
    fermion additionally ``(-1)^(e(e+1)/2)``; for one extra fermion this is
    ``exp(i pi N)``."""
    phase = correction_phase(n_channels, extras + 1)
    if statistics is Statistics.FERMION and (extras * (extras + 1) // 2) % 2:
        phase = -phase
    return phase


def _extra_terms(spectra: dict, n: int, statistics: Statistics, configs, times):
    """Per configuration: the four populations and the 0-1 coherence of the output
    channel, each of shape ``(trials, T)``."""
    out = []
    for w, extras in configs:
        e = len(extras)
        occ0 = [0] * n
        for j in extras:
            occ0[j] = 1
        occ1 = list(occ0)
        occ1[0] = 1
        vecs = []
        for m, occ in ((e, occ0), (e + 1, occ1)):
            if m == 0:
                vecs.append((0, np.ones(spectra[1].energies.shape[:-1] + (len(times), 1), complex)))
                continue
            basis = enumerate_sector(n, m, statistics)
            col = spectra[m].columns([basis.position(occ)], times)[..., 0]   # (trials, T, dim)
            vecs.append((m, col))
        M0, M1 = channel_marginals(vecs, n, statistics, e + 2)   # the channel can hold e+1 excitations
        p00 = np.sum(np.abs(M0[..., 0]) ** 2, axis=-1)
        p01 = np.sum(np.abs(M0[..., 1]) ** 2, axis=-1)
        p10 = np.sum(np.abs(M1[..., 0]) ** 2, axis=-1)
        p11 = np.sum(np.abs(M1[..., 1]) ** 2, axis=-1)
        coh = np.sum(M0[..., 0] * np.conj(M1[..., 1]), axis=-1)
        out.append((w, e, p00, p01, p10, p11, coh))
    return out


def _extra_fidelity_chunk(spec, cfg, disorder, times, seed, sector_cap, ids):
    n = spec.n_channels
    stat = spec.statistics
    configs = cfg.configurations(n, sector_cap)
    max_m = max(len(c) for _, c in configs) + 1
    k = _static_coupling_stack(build_couplings(spec), disorder, seed, ids)
    spectra = {m: Spectral(batched_sector_hamiltonians(k, enumerate_sector(n, m, stat))) for m in range(1, max_m + 1)}
    terms = _extra_terms(spectra, n, stat, configs, times)
    r1 = correction_phase(n, 1)
    phases = {}
    for w, e, *_, coh in terms:
        if e == 0 or cfg.rotation is Rotation.R1:
            phases.setdefault(e, np.full(coh.shape, r1))
        elif cfg.rotation is Rotation.R1_MINUS_1:
            phases.setdefault(e, np.full(coh.shape, closed_form_extra_phase(n, e, stat)))
        else:
            phases[e] = phases.get(e, 0) + w * coh
    if cfg.rotation is Rotation.ORACLE:
        for e, acc in phases.items():
            if e:
                mag = np.abs(acc)
                phases[e] = np.where(mag > 0, acc / np.where(mag > 0, mag, 1), r1)
    F = 0.0
    for w, e, p00, p01, p10, p11, coh in terms:
        # the rotation diag(1, z) turns the 0-1 coherence rho_01 into rho_01 conj(z)
        F = F + w * (2 * p00 + p01 + p10 + 2 * p11 + 2 * np.real(coh * np.conj(phases[e]))) / 6
    return np.clip(F, 0.0, 1.0)     # round-off only


def extra_excitation_curve(spec: ChainSpec, cfg: ExtraExcitationConfig, disorder: DisorderModel, times,
                           trials: int = 1, seed: int = 0, sector_cap: int = DEFAULT_SECTOR_CAP) -> np.ndarray:
    """Per-trial qubit average fidelity with extra excitations, ``(trials, len(times))``.

    Inputs are averaged exactly over the Bloch sphere through the moments
    ``E|a|^4 = 1/3`` and ``E|a|^2 |b|^2 = 1/6``.
    """
    if isinstance(disorder, TimeSliced):
        raise ValueError("extra-excitation experiments support static disorder only")
    times = np.atleast_1d(np.asarray(times, float))
    n_trials = _effective_trials(disorder, trials)
    parts = map_trials(lambda ids: _extra_fidelity_chunk(spec, cfg, disorder, times, seed, sector_cap, ids),
                       n_trials)
    return np.concatenate(parts)


def curve_report(F: np.ndarray, times: np.ndarray, K: Optional[float], flux=None) -> FidelityReport:
    m, s = fsum_mean_std(F)
    Kcol = np.full(len(times), np.nan if K is None else K)
    fl = np.full(len(times), np.nan) if flux is None else flux
    table = SweepTable(np.asarray(times, float), Kcol, m, s, fl)
    i = _pick(m, table.t, table.K)
    return FidelityReport(float(m[i]), float(s[i]), F.shape[0], float(times[i]), K, table)


def _edge_of(spec: ChainSpec) -> Optional[float]:
    return spec.profile.K if isinstance(spec.profile, UniformEdges) else None


def extra_excitation_fidelity(spec: ChainSpec, cfg: ExtraExcitationConfig, disorder: DisorderModel = NoDisorder(),
                              t: float = math.pi / 2, trials: int = 1, seed: int = 0,
                              sector_cap: int = DEFAULT_SECTOR_CAP) -> FidelityReport:
    F = extra_excitation_curve(spec, cfg, disorder, [t], trials, seed, sector_cap)
    return curve_report(F, np.array([t]), _edge_of(spec))


@dataclass(frozen=True, eq=False)
class StatisticsComparison:
    boson: FidelityReport
    fermion: FidelityReport
    baseline: FidelityReport

    def series(self):
        return {"boson": self.boson, "fermion": self.fermion, "no-extra": self.baseline}


def compare_statistics(spec_boson: ChainSpec, spec_fermion: ChainSpec, cfg: ExtraExcitationConfig,
                       disorder: DisorderModel, grid: SweepGrid, trials: int = 1, seed: int = 0,
                       sector_cap: int = DEFAULT_SECTOR_CAP) -> StatisticsComparison:
    """Boson, fermion and excitation-free qubit curves on a shared time grid
    with shared disorder draws."""
    if spec_boson.n_channels != spec_fermion.n_channels or spec_boson.profile != spec_fermion.profile:
        raise ValueError("both chains must share N and the coupling profile")
    if spec_boson.statistics is not Statistics.BOSON or spec_fermion.statistics is not Statistics.FERMION:
        raise ValueError("expected one bosonic and one fermionic chain")
    times = np.asarray(grid.t_grid)
    clean = ExtraExcitationConfig(cfg.mode, 0.0, cfg.rotation, cfg.max_total_excitations)
    K = _edge_of(spec_boson)
    reports = [
        curve_report(extra_excitation_curve(s, c, disorder, times, trials, seed, sector_cap), times, K)
        for s, c in ((spec_boson, cfg), (spec_fermion, cfg), (spec_boson, clean))
    ]
    return StatisticsComparison(*reports)
