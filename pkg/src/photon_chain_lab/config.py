"""Experiment configuration files.

Configurations are TOML documents (JSON is accepted too, which is what the
config echo in every summary uses). Unknown keys, out-of-range values and a
missing seed are reported with the offending field path and, where it can be
found, the line number.

Minimal example::

    experiment = "fidelity-sweep"
    seed = 42

    [chain]
    n_channels = 9
    profile = "mirror"
"""

from __future__ import annotations

import json
import math
import re
import sys
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .chain import (
    ChainSpec,
    DisorderModel,
    Explicit,
    Mirror,
    NoDisorder,
    StaticDisorder,
    Statistics,
    TimeSliced,
    UniformEdges,
)
from .noise import ExtraExcitationConfig, ExtraMode, Rotation, SweepGrid
from .sectors import DEFAULT_SECTOR_CAP

EXPERIMENTS = ("fidelity-sweep", "optimize", "extra-excitation", "info-flux", "bounds-campaign")


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is the dotted field name, ``line`` 1-based or None."""

    def __init__(self, path: str, message: str, line: Optional[int] = None):
        self.path, self.line, self.message = path, line, message
        where = f"{path}" + (f" (line {line})" if line else "")
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class GridConfig:
    """Time grid ``linspace(t_min, t_max, t_points)`` and an optional edge-coupling grid."""

    t_min: float = 0.0
    t_max: float = 20.0
    t_points: int = 401
    K_min: Optional[float] = None
    K_max: Optional[float] = None
    K_points: Optional[int] = None

    @property
    def has_K(self) -> bool:
        return self.K_points is not None

    def sweep_grid(self) -> SweepGrid:
        t = tuple(np.linspace(self.t_min, self.t_max, self.t_points))
        K = tuple(np.linspace(self.K_min, self.K_max, self.K_points)) if self.has_K else None
        return SweepGrid(t, K)


@dataclass(frozen=True)
class CampaignConfig:
    kind: str = "both"               # coherent | general | both
    instances: int = 10_000
    max_channels: int = 12           # coherent campaign
    general_max_channels: int = 4    # brute-force campaign
    levels: int = 3


@dataclass(frozen=True)
class OptimizeConfig:
    K_tolerance: float = 1e-8


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    chain: ChainSpec
    grid: GridConfig = GridConfig()
    disorder: DisorderModel = NoDisorder()
    qudit_dim: int = 2
    trials: int = 1000
    sector_cap: int = DEFAULT_SECTOR_CAP
    output: str = "results"
    extra: ExtraExcitationConfig = ExtraExcitationConfig()
    compare_statistics: bool = True
    campaign: CampaignConfig = CampaignConfig()
    optimize: OptimizeConfig = OptimizeConfig()

    def to_dict(self) -> dict:
        """Plain-data echo accepted back by :func:`parse_config`."""
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "qudit_dim": self.qudit_dim,
            "trials": self.trials,
            "sector_cap": self.sector_cap,
            "output": self.output,
            "chain": _chain_dict(self.chain),
            "grid": {k: v for k, v in vars(self.grid).items() if v is not None},
            "disorder": _disorder_dict(self.disorder),
            "extra": {
                "mode": self.extra.mode.value,
                "p_extra": self.extra.p_extra,
                "rotation": self.extra.rotation.value,
                "max_total_excitations": self.extra.max_total_excitations,
                "compare_statistics": self.compare_statistics,
            },
            "campaign": dict(vars(self.campaign)),
            "optimize": dict(vars(self.optimize)),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _chain_dict(spec: ChainSpec) -> dict:
    p = spec.profile
    out: dict[str, Any] = {"n_channels": spec.n_channels, "statistics": spec.statistics.value}
    if isinstance(p, Mirror):
        out.update(profile="mirror", J=p.J)
    elif isinstance(p, UniformEdges):
        out.update(profile="uniform-edges", J=p.J, K=p.K)
    else:
        out.update(profile="explicit", couplings=list(p.values))
    return out


def _disorder_dict(model: DisorderModel) -> dict:
    if isinstance(model, StaticDisorder):
        return {"model": "static", "sigma": model.sigma}
    if isinstance(model, TimeSliced):
        return {"model": "time-sliced", "steps": model.steps,
                "sigma_static": model.sigma_static, "sigma_temporal": model.sigma_temporal}
    return {"model": "none"}


# ---------------------------------------------------------------------------
# parsing


class _Reader:
    """Typed access to one table of the document with path/line diagnostics."""

    def __init__(self, data: dict, path: str, locate):
        if not isinstance(data, dict):
            raise ConfigError(path or "<root>", "expected a table", locate(path))
        self.data, self.path, self.locate = data, path, locate
        self.used: set[str] = set()

    def _full(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def fail(self, key: str, message: str):
        full = self._full(key)
        raise ConfigError(full, message, self.locate(full))

    def get(self, key: str, kind, default=None, *, required=False, check=None, hint=""):
        self.used.add(key)
        if key not in self.data:
            if required:
                self.fail(key, f"missing required field{hint}")
            return default
        value = self.data[key]
        if kind is float:
            ok = isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)
            value = float(value) if ok else value
        elif kind is int:
            ok = isinstance(value, int) and not isinstance(value, bool)
        elif kind is bool:
            ok = isinstance(value, bool)
        elif kind is str:
            ok = isinstance(value, str)
        elif kind is list:
            ok = isinstance(value, list)
        else:
            ok = isinstance(value, kind)
        if not ok:
            self.fail(key, f"expected {getattr(kind, '__name__', kind)}, got {value!r}")
        if check is not None:
            problem = check(value)
            if problem:
                self.fail(key, problem)
        return value

    def choice(self, key: str, options, default):
        return self.get(key, str, default,
                        check=lambda v: None if v in options else f"must be one of {', '.join(options)}; got {v!r}")

    def table(self, key: str) -> "_Reader":
        self.used.add(key)
        return _Reader(self.data.get(key, {}), self._full(key), self.locate)

    def finish(self):
        for key in self.data:
            if key not in self.used:
                self.fail(key, "unknown key")


def _positive(v):
    return None if v > 0 else f"must be > 0, got {v}"


def _non_negative(v):
    return None if v >= 0 else f"must be >= 0, got {v}"


def _probability(v):
    return None if 0 <= v <= 1 else f"must lie in [0, 1], got {v}"


def _at_least(n):
    return lambda v: None if v >= n else f"must be >= {n}, got {v}"


def _line_locator(text: str, is_json: bool):
    lines = text.splitlines()

    def locate(path: str) -> Optional[int]:
        if not path:
            return None
        parts = path.split(".")
        key = parts[-1]
        if is_json:
            start = 0
            for part in parts:       # each component after the previous one
                pat = re.compile(r'"' + re.escape(part) + r'"\s*:')
                hit = next((i for i in range(start, len(lines)) if pat.search(lines[i])), None)
                if hit is None:
                    return None
                start = hit
            return start + 1
        section = ".".join(parts[:-1])
        current = ""
        pat = re.compile(r"^\s*" + re.escape(key) + r"\s*=")
        header = re.compile(r"^\s*\[\s*([^\]]+?)\s*\]")
        for i, line in enumerate(lines, 1):
            m = header.match(line)
            if m:
                current = m.group(1)
                if current == path:
                    return i
                continue
            if current == section and pat.match(line):
                return i
        return None

    return locate


def _load(text: str) -> tuple[dict, bool]:
    if text.lstrip().startswith("{"):
        try:
            return json.loads(text), True
        except json.JSONDecodeError as exc:
            raise ConfigError("<document>", f"invalid JSON: {exc.msg}", exc.lineno) from None
    try:
        return tomllib.loads(text), False
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError("<document>", f"invalid TOML: {exc}", int(m.group(1)) if m else None) from None


def _parse_chain(r: _Reader) -> ChainSpec:
    n = r.get("n_channels", int, required=True, check=_at_least(2))
    profile = r.choice("profile", ("mirror", "uniform-edges", "explicit"), "mirror")
    stat = Statistics(r.choice("statistics", ("boson", "fermion"), "boson"))
    J = r.get("J", float, 1.0, check=_positive)
    if profile == "mirror":
        prof = Mirror(J)
    elif profile == "uniform-edges":
        prof = UniformEdges(J, r.get("K", float, 1.0, check=_positive))
    else:
        values = r.get("couplings", list, required=True, hint=" for the explicit profile")
        if len(values) != n - 1:
            r.fail("couplings", f"needs {n - 1} values for {n} channels, got {len(values)}")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 for v in values):
            r.fail("couplings", "every coupling must be a positive number")
        prof = Explicit(tuple(float(v) for v in values))
    r.finish()
    return ChainSpec(n, prof, stat)


def _parse_grid(r: _Reader) -> GridConfig:
    t_min = r.get("t_min", float, 0.0, check=_non_negative)
    t_max = r.get("t_max", float, 20.0)
    if not t_max > t_min:
        r.fail("t_max", f"must exceed t_min ({t_min}), got {t_max}")
    t_points = r.get("t_points", int, 401, check=_at_least(1))
    K_keys = [k for k in ("K_min", "K_max", "K_points") if k in r.data]
    K_min = K_max = K_points = None
    if K_keys:
        K_min = r.get("K_min", float, required=True, check=_positive, hint=" of the K grid")
        K_max = r.get("K_max", float, required=True, check=_positive, hint=" of the K grid")
        K_points = r.get("K_points", int, required=True, check=_at_least(1), hint=" of the K grid")
        if K_points > 1 and not K_max > K_min:
            r.fail("K_max", f"must exceed K_min ({K_min}), got {K_max}")
    r.finish()
    return GridConfig(t_min, t_max, t_points, K_min, K_max, K_points)


def _parse_disorder(r: _Reader) -> DisorderModel:
    model = r.choice("model", ("none", "static", "time-sliced"), "none")
    if model == "static":
        out = StaticDisorder(r.get("sigma", float, required=True, check=_non_negative))
    elif model == "time-sliced":
        out = TimeSliced(r.get("steps", int, 100, check=_at_least(1)),
                         r.get("sigma_static", float, 0.04, check=_non_negative),
                         r.get("sigma_temporal", float, 0.02, check=_non_negative))
    else:
        out = NoDisorder()
    r.finish()
    return out


def parse_config(text: str, seed: Optional[int] = None) -> ExperimentConfig:
    """Parse and validate a configuration document.

    ``seed`` (e.g. from the command line) overrides the document's seed; one
    of the two must be present.
    """
    data, is_json = _load(text)
    root = _Reader(data, "", _line_locator(text, is_json))
    experiment = root.choice("experiment", EXPERIMENTS, None)
    if experiment is None:
        root.fail("experiment", f"missing required field (one of {', '.join(EXPERIMENTS)})")
    doc_seed = root.get("seed", int, None, check=_non_negative)
    if seed is None:
        if doc_seed is None:
            root.fail("seed", "missing required field (no default seed is ever derived from the clock)")
        seed = doc_seed
    elif seed < 0:
        raise ConfigError("seed", f"must be >= 0, got {seed}")
    qudit_dim = root.get("qudit_dim", int, 2, check=lambda v: None if v in (2, 3) else f"unsupported qudit dimension {v}; use 2 or 3")
    trials = root.get("trials", int, 1000, check=_at_least(1))
    sector_cap = root.get("sector_cap", int, DEFAULT_SECTOR_CAP, check=_at_least(2))
    output = root.get("output", str, "results", check=lambda v: None if v.strip() else "must not be empty")

    if "chain" in data:
        chain = _parse_chain(root.table("chain"))
    elif experiment == "bounds-campaign":
        chain = ChainSpec(2)     # campaigns draw their own random chains
    else:
        raise ConfigError("chain", "missing required section")
    grid = _parse_grid(root.table("grid"))
    disorder = _parse_disorder(root.table("disorder"))

    ex = root.table("extra")
    extra = ExtraExcitationConfig(
        ExtraMode(ex.choice("mode", [m.value for m in ExtraMode], ExtraMode.SINGLE_RANDOM.value)),
        ex.get("p_extra", float, 0.05, check=_probability),
        Rotation(ex.choice("rotation", [r.value for r in Rotation], Rotation.R1.value)),
        ex.get("max_total_excitations", int, DEFAULT_SECTOR_CAP, check=_at_least(1)),
    )
    compare = ex.get("compare_statistics", bool, True)
    if extra.mode is ExtraMode.BINOMIAL and extra.max_total_excitations > sector_cap:
        ex.fail("max_total_excitations", f"exceeds the sector cap of {sector_cap}")
    ex.finish()

    ca = root.table("campaign")
    campaign = CampaignConfig(
        ca.choice("kind", ("coherent", "general", "both"), "both"),
        ca.get("instances", int, 10_000, check=_at_least(1)),
        ca.get("max_channels", int, 12, check=_at_least(2)),
        ca.get("general_max_channels", int, 4, check=lambda v: None if 2 <= v <= 5 else f"must lie in [2, 5], got {v}"),
        ca.get("levels", int, 3, check=lambda v: None if 2 <= v <= 4 else f"must lie in [2, 4], got {v}"),
    )
    ca.finish()

    op = root.table("optimize")
    optimize = OptimizeConfig(op.get("K_tolerance", float, 1e-8, check=_positive))
    op.finish()
    root.finish()

    if experiment == "extra-excitation" and isinstance(disorder, TimeSliced):
        raise ConfigError("disorder.model", "extra-excitation runs support static disorder only",
                          root.locate("disorder.model"))
    if grid.has_K and not isinstance(chain.profile, UniformEdges):
        raise ConfigError("grid.K_points", "a K grid needs profile = \"uniform-edges\"",
                          root.locate("grid.K_points"))
    if experiment == "extra-excitation" and grid.has_K:
        raise ConfigError("grid.K_points", "extra-excitation runs use the chain's own K",
                          root.locate("grid.K_points"))
    if experiment == "extra-excitation" and qudit_dim != 2:
        raise ConfigError("qudit_dim", "extra-excitation runs use qubit inputs", root.locate("qudit_dim"))
    if qudit_dim == 3 and chain.statistics is Statistics.FERMION:
        raise ConfigError("qudit_dim", "fermionic channels hold at most one excitation; qutrits need bosons",
                          root.locate("qudit_dim"))

    return ExperimentConfig(experiment, seed, chain, grid, disorder, qudit_dim, trials, sector_cap,
                            output, extra, compare, campaign, optimize)


def load_config(path: str, seed: Optional[int] = None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, seed)
