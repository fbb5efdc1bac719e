"""Scenario and run configuration, loaded from TOML.

The file uses km/h and microseconds; everything is converted to SI on
construction of :class:`ChannelProfile`. Example::

    [system]
    n_bs = 4
    k = 4
    carrier_freq_hz = 2.6e9
    velocity_kmh = 10.0
    tau_max_us = 1.0

    [budget]
    sigma2_ul = 0.1
    sigma2_dl = 0.1
    sigma2_p = 0.1
    p_max_ul = 1.0
    p_tot_dl = 1.0

    [feedback]
    n_rank = 2
    delay = 5
    mode = "redundant"

    [sweep]
    n_b = [0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24]
    max_density = 0.15
    dl_mode = "auto"
    samples = 200
    seed = 0
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .capacity import LinkBudget
from .channel import ChannelProfile, PrbGeometry
from .errors import InvalidArgument
from .feedback import FeedbackConfig

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

DL_MODES = ("auto", "spatial", "tdm")
DEFAULT_NB_GRID = tuple(float(n) for n in range(0, 25, 2))


@dataclass(frozen=True)
class SystemConfig:
    """One BS with ``n_bs`` antennas serving ``k`` single-antenna terminals."""

    n_bs: int = 4
    k: int = 4
    geometry: PrbGeometry = field(default_factory=PrbGeometry)
    carrier_freq: float = 2.6e9
    velocity_kmh: float = 10.0
    tau_max_us: float = 1.0
    coeff_variance: float = 1.0
    budget: LinkBudget = field(default_factory=LinkBudget)
    n_rank: int = 2
    delay: int = 5
    feedback_mode: str = "redundant"
    dl_mode: str = "auto"

    def __post_init__(self):
        if self.n_bs < 1 or self.k < 1:
            raise InvalidArgument("n_bs and k must be positive")
        if not 1 <= self.n_rank <= self.geometry.size:
            raise InvalidArgument("n_rank must lie in [1, PRB size]")
        if self.dl_mode not in DL_MODES:
            raise InvalidArgument(f"dl_mode must be one of {DL_MODES}")
        for name in ("velocity_kmh", "tau_max_us"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InvalidArgument(f"{name} must be finite and >= 0")
        # validates mode and delay
        self.feedback(0.0)
        self.profile()

    def profile(self, velocity_kmh: float | None = None, tau_max_us: float | None = None) -> ChannelProfile:
        return ChannelProfile.from_kmh(self.velocity_kmh if velocity_kmh is None else velocity_kmh,
                                       carrier_freq=self.carrier_freq,
                                       tau_max_us=self.tau_max_us if tau_max_us is None else tau_max_us,
                                       coeff_variance=self.coeff_variance)

    def feedback(self, n_b: float) -> FeedbackConfig:
        return FeedbackConfig(n_b=n_b, n_rank=self.n_rank, delay=self.delay, mode=self.feedback_mode)

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    n_b_grid: tuple[float, ...] = DEFAULT_NB_GRID
    max_density: float = 0.15
    samples: int = 200
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if not self.n_b_grid:
            raise InvalidArgument("N_b grid must be nonempty")
        if any(not math.isfinite(n) or n < 0 for n in self.n_b_grid):
            raise InvalidArgument("N_b grid values must be finite and >= 0")
        if not 0 < self.max_density <= 1:
            raise InvalidArgument("max_density must lie in (0, 1]")
        if self.samples < 1:
            raise InvalidArgument("samples must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidArgument("seed must be an unsigned 64-bit integer")
        if self.threads < 1:
            raise InvalidArgument("threads must be >= 1")


def _pick(section: dict, cls, where: str) -> dict:
    allowed = {f.name for f in fields(cls)}
    unknown = set(section) - allowed
    if unknown:
        raise InvalidArgument(f"unknown keys in [{where}]: {sorted(unknown)}")
    return dict(section)


def config_from_dict(data: dict) -> RunConfig:
    known = {"system", "budget", "feedback", "sweep"}
    unknown = set(data) - known
    if unknown:
        raise InvalidArgument(f"unknown config sections: {sorted(unknown)}")
    try:
        sys_d = dict(data.get("system", {}))
        geom_keys = {f.name for f in fields(PrbGeometry)}
        geom = PrbGeometry(**{k: sys_d.pop(k) for k in list(sys_d) if k in geom_keys})
        if "carrier_freq_hz" in sys_d:
            sys_d["carrier_freq"] = sys_d.pop("carrier_freq_hz")
        sys_d = _pick(sys_d, SystemConfig, "system")
        budget = LinkBudget(**_pick(data.get("budget", {}), LinkBudget, "budget"))
        fb = dict(data.get("feedback", {}))
        fb_map = {"n_rank": "n_rank", "delay": "delay", "mode": "feedback_mode"}
        bad = set(fb) - set(fb_map)
        if bad:
            raise InvalidArgument(f"unknown keys in [feedback]: {sorted(bad)}")
        sys_d.update({fb_map[k]: v for k, v in fb.items()})
        sweep = dict(data.get("sweep", {}))
        if "dl_mode" in sweep:
            sys_d["dl_mode"] = sweep.pop("dl_mode")
        system = SystemConfig(geometry=geom, budget=budget, **sys_d)
        run = {}
        sweep_map = {"n_b": "n_b_grid", "max_density": "max_density", "samples": "samples",
                     "seed": "seed", "threads": "threads"}
        bad = set(sweep) - set(sweep_map)
        if bad:
            raise InvalidArgument(f"unknown keys in [sweep]: {sorted(bad)}")
        for k, v in sweep.items():
            run[sweep_map[k]] = tuple(float(x) for x in v) if k == "n_b" else v
        return RunConfig(system=system, **run)
    except TypeError as exc:
        raise InvalidArgument(f"malformed configuration: {exc}") from exc


def load_config(path: str | Path) -> RunConfig:
    """Parse a TOML run configuration. The file is only read."""
    p = Path(path)
    try:
        with p.open("rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise InvalidArgument(f"config file not found: {p}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise InvalidArgument(f"invalid TOML in {p}: {exc}") from exc
    return config_from_dict(data)
