"""Named experiments and their serialization.

Every experiment turns an :class:`ExperimentConfig` into a
:class:`ResultBundle`: one or more tables plus a JSON summary. Nothing in a
bundle depends on the wall clock or on the number of worker threads.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .campaigns import coherent_campaign, general_campaign, summarize
from .chain import ChainSpec, Statistics
from .config import ExperimentConfig
from .flux import aligned_amplitudes, per_term_bounds, equal_leakage_coefficients
from .noise import (
    SweepTable,
    compare_statistics,
    curve_report,
    extra_excitation_curve,
    fidelity_sweep,
    optimize_transfer,
    refine_sweep_peak,
)
from .sectors import PropagationError

SWEEP_COLUMNS = ("t_J", "K_over_J", "mean_fidelity", "std_fidelity", "flux")
CAMPAIGN_COLUMNS = ("instance", "kind", "n_channels", "t_J", "flux", "n1", "scale",
                    "actual", "bound", "satisfied", "terms_ok")


class ExperimentError(RuntimeError):
    """A module failed while running an experiment; ``numerical`` separates
    diagonalization or non-finite results from invalid requests."""

    def __init__(self, experiment: str, message: str, numerical: bool = False):
        self.experiment, self.numerical = experiment, numerical
        super().__init__(f"{experiment}: {message}")


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: list[tuple]

    def __len__(self):
        return len(self.rows)


@dataclass
class ResultBundle:
    experiment: str
    tables: dict[str, Table]          # "" is the main table, other keys become file suffixes
    summary: dict
    provenance: dict = field(default_factory=dict)


def _sweep_table(table: SweepTable) -> Table:
    return Table(SWEEP_COLUMNS, [tuple(float(x) for x in row) for row in table.rows()])


def _num(x) -> Optional[float]:
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _report_summary(report) -> dict:
    return {"max_mean_fidelity": _num(report.mean), "std_fidelity": _num(report.std),
            "trials": report.trials, "argmax_t": _num(report.argmax_t), "argmax_K": _num(report.argmax_K)}


def _check_finite(experiment: str, bundle_tables: dict[str, Table]):
    for name, tab in bundle_tables.items():
        if tab.columns != SWEEP_COLUMNS:
            continue
        means = np.array([r[2] for r in tab.rows], float)
        if not np.all(np.isfinite(means)):
            raise ExperimentError(experiment, f"non-finite fidelity in table {name or 'main'!r}", numerical=True)


# ---------------------------------------------------------------------------
# experiments


def _fidelity_sweep(cfg: ExperimentConfig):
    rep = fidelity_sweep(cfg.chain, cfg.grid.sweep_grid(), cfg.disorder, cfg.qudit_dim, cfg.trials, cfg.seed)
    summary = _report_summary(rep)
    if cfg.grid.t_points > 1:
        t, v = refine_sweep_peak(cfg.chain, rep, cfg.disorder, cfg.qudit_dim, cfg.trials, cfg.seed)
        summary["refined"] = {"t": t, "mean_fidelity": v, "K": _num(rep.argmax_K)}
    return {"": _sweep_table(rep.table)}, summary


def _optimize(cfg: ExperimentConfig):
    g = cfg.grid
    K_range = (g.K_min, g.K_max) if g.has_K and g.K_points > 1 else None
    spec = cfg.chain.with_edge(g.K_min) if g.has_K and g.K_points == 1 else cfg.chain
    rep = optimize_transfer(spec, (g.t_min, g.t_max), K_range, cfg.disorder, cfg.qudit_dim, cfg.trials,
                            cfg.seed, t_points=max(g.t_points, 2), K_points=g.K_points or 1,
                            K_tolerance=cfg.optimize.K_tolerance)
    summary = _report_summary(rep)
    if summary["argmax_K"] is None and g.has_K:
        summary["argmax_K"] = g.K_min
    summary["note"] = "optimum refined off-grid; the table is the coarse search grid"
    return {"": _sweep_table(rep.table)}, summary


def _extra_excitation(cfg: ExperimentConfig):
    times = np.asarray(cfg.grid.sweep_grid().t_grid)
    if cfg.compare_statistics:
        spec_b = ChainSpec(cfg.chain.n_channels, cfg.chain.profile, Statistics.BOSON)
        spec_f = ChainSpec(cfg.chain.n_channels, cfg.chain.profile, Statistics.FERMION)
        cmp = compare_statistics(spec_b, spec_f, cfg.extra, cfg.disorder, cfg.grid.sweep_grid(),
                                 cfg.trials, cfg.seed, cfg.sector_cap)
        tables = {"": _sweep_table(cmp.boson.table), "fermion": _sweep_table(cmp.fermion.table),
                  "no-extra": _sweep_table(cmp.baseline.table)}
        summary = {name: _report_summary(r) for name, r in cmp.series().items()}
        summary["boson_peak_exceeds_fermion"] = bool(cmp.boson.mean > cmp.fermion.mean)
        return tables, summary
    F = extra_excitation_curve(cfg.chain, cfg.extra, cfg.disorder, times, cfg.trials, cfg.seed, cfg.sector_cap)
    K = getattr(cfg.chain.profile, "K", None)
    rep = curve_report(F, times, K)
    return {"": _sweep_table(rep.table)}, {cfg.chain.statistics.value: _report_summary(rep)}


def _info_flux(cfg: ExperimentConfig):
    grid = cfg.grid.sweep_grid()
    rep = fidelity_sweep(cfg.chain, grid, cfg.disorder, cfg.qudit_dim, cfg.trials, cfg.seed)
    tab = rep.table
    if grid.K_grid is None:
        i_flux = int(np.argmax(tab.flux))
        return {"": _sweep_table(tab)}, {
            "fidelity": _report_summary(rep),
            "flux_max": _num(tab.flux[i_flux]), "flux_argmax_t": _num(tab.t[i_flux]),
        }
    # one row per K: fidelity and flux each maximized over the time grid
    nK, nT = len(grid.K_grid), len(grid.t_grid)
    mean = tab.mean.reshape(nK, nT)
    std = tab.std.reshape(nK, nT)
    flux = tab.flux.reshape(nK, nT)
    t = np.asarray(grid.t_grid)
    best = np.argmax(mean, axis=1)
    rows = [(float(t[best[i]]), float(grid.K_grid[i]), float(mean[i, best[i]]), float(std[i, best[i]]),
             float(flux[i].max())) for i in range(nK)]
    fid_curve = mean.max(axis=1)
    flux_curve = flux.max(axis=1)
    iF, iI = int(np.argmax(fid_curve)), int(np.argmax(flux_curve))
    step = grid.K_grid[1] - grid.K_grid[0] if nK > 1 else 0.0
    return {"": Table(SWEEP_COLUMNS, rows)}, {
        "fidelity_argmax_K": grid.K_grid[iF], "fidelity_max": _num(fid_curve[iF]),
        "flux_argmax_K": grid.K_grid[iI], "flux_max": _num(flux_curve[iI]),
        "argmax_K_agree_within_one_step": bool(abs(iF - iI) <= 1),
        "K_step": step, "trials": rep.trials,
    }


def saturation_check(n_channels: int = 6, flux: float = 0.3, alpha_max: float = 1.2, n1: float = 2.0,
                     seed: int = 0) -> dict:
    """Constructed equal-leakage instance on which the coefficient-sum bound is tight."""
    C = equal_leakage_coefficients(n_channels, flux, seed)
    rep = per_term_bounds(C, aligned_amplitudes(C, alpha_max), alpha_max, n1)
    return {"n_channels": n_channels, "flux": flux,
            "sum_abs_coefficients": rep.sum_abs_coefficients, "sum_abs_bound": rep.sum_abs_bound,
            "gap": abs(rep.sum_abs_coefficients - rep.sum_abs_bound)}


def _bounds_campaign(cfg: ExperimentConfig):
    c = cfg.campaign
    records = []
    if c.kind in ("coherent", "both"):
        records += coherent_campaign(c.instances, cfg.seed, c.max_channels)
    if c.kind in ("general", "both"):
        records += general_campaign(c.instances, cfg.seed, c.general_max_channels, c.levels)
    rows = [(r.instance, r.kind, r.n_channels, r.t, r.flux, r.n1, r.scale, r.actual, r.bound,
             r.satisfied, r.terms_ok) for r in records]
    summary = {}
    for kind in ("coherent", "general"):
        sub = [r for r in records if r.kind == kind]
        if sub:
            s = summarize(sub)
            summary[kind] = {"instances": s.instances, "violations": s.violations,
                             "term_violations": s.term_violations, "max_crosscheck": float(s.max_crosscheck),
                             "max_ratio": float(s.max_ratio)}
    summary["saturation"] = saturation_check(seed=cfg.seed)
    return {"": Table(CAMPAIGN_COLUMNS, rows)}, summary


_DISPATCH = {
    "fidelity-sweep": _fidelity_sweep,
    "optimize": _optimize,
    "extra-excitation": _extra_excitation,
    "info-flux": _info_flux,
    "bounds-campaign": _bounds_campaign,
}


def run_experiment(cfg: ExperimentConfig) -> ResultBundle:
    try:
        tables, summary = _DISPATCH[cfg.experiment](cfg)
    except (PropagationError, np.linalg.LinAlgError) as exc:
        raise ExperimentError(cfg.experiment, str(exc), numerical=True) from exc
    except ValueError as exc:
        raise ExperimentError(cfg.experiment, str(exc)) from exc
    _check_finite(cfg.experiment, tables)
    provenance = {"config": cfg.to_dict(), "version": __version__, "seed": cfg.seed}
    return ResultBundle(cfg.experiment, tables, summary, provenance)


# ---------------------------------------------------------------------------
# output


def format_value(x) -> str:
    """17 significant digits for floats, empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    return format(x, ".17g") if math.isfinite(x) else ""


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def emit_results(bundle: ResultBundle, prefix: str) -> list[str]:
    """Write ``<prefix>.csv`` (plus ``<prefix>.<name>.csv`` per extra table) and
    ``<prefix>.summary.json``; returns the written paths."""
    parent = os.path.dirname(prefix)
    paths = []
    try:
        if parent:
            os.makedirs(parent, exist_ok=True)
        for name, tab in bundle.tables.items():
            path = f"{prefix}.csv" if not name else f"{prefix}.{name}.csv"
            with open(path, "w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(tab.columns)
                for row in tab.rows:
                    w.writerow([format_value(x) for x in row])
            paths.append(path)
        path = f"{prefix}.summary.json"
        doc = {"experiment": bundle.experiment, "tables": {n or "main": len(t) for n, t in bundle.tables.items()},
               "summary": _json_safe(bundle.summary), "provenance": _json_safe(bundle.provenance)}
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")
        paths.append(path)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write results: {exc.strerror}", exc.filename) from exc
    return paths
