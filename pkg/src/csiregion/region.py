"""Net rates, CSI lookup table, parameter sweep and joint UL/DL rate region.

The sweep evaluates every combination of UL pilot layout, DL pilot layout,
feedback budget and DL transmission mode on one shared set of channel
realizations (common random numbers), so differences between operating
points are not blurred by independent Monte Carlo noise.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .capacity import dl_rates_batch, tdm_rates_batch, ul_rates_batch
from .channel import ChannelProfile, PrbGeometry, sample_flat_arrays
from .config import SystemConfig
from .errors import InvalidArgument, UnusableLink
from .estimation import estimation_mse, noise_ratio
from .feedback import CsiQuality, FeedbackModel, sigma_dl_bs
from .pilots import PilotPattern, candidate_patterns

log = logging.getLogger(__name__)

#: Lookup entry for a link whose estimate is useless; forces rate 0.
UNUSABLE = -1.0
AXES = ("rho_ul", "rho_dl", "n_b", "v_kmh", "tau_max_us")
VALUE_KEYS = ("sigma_ul_bs", "sigma_dl_ut", "sigma_dl_ut_tdm", "sigma_dl_bs")
CSV_COLUMNS = ("ul_pattern", "dl_pattern", "rho_ul", "rho_dl", "n_b", "dl_mode", "feedback_mode",
               "gross_ul", "gross_dl", "net_ul", "net_dl", "pareto", "hull")


@dataclass(frozen=True)
class OperatingParams:
    ul_pattern: str
    dl_pattern: str
    rho_ul: float
    rho_dl: float
    n_b: float
    dl_mode: str = "spatial"
    feedback_mode: str = "redundant"

    def __post_init__(self):
        if not (math.isfinite(self.n_b) and self.n_b >= 0):
            raise InvalidArgument("N_b must be finite and >= 0")
        if self.dl_mode not in ("spatial", "tdm", "auto"):
            raise InvalidArgument(f"unknown dl_mode {self.dl_mode!r}")
        for rho in (self.rho_ul, self.rho_dl):
            if not 0 <= rho <= 1:
                raise InvalidArgument("pilot densities must lie in [0, 1]")

    @property
    def id(self) -> str:
        return f"{self.ul_pattern}|{self.dl_pattern}|nb{self.n_b:g}|{self.dl_mode}|{self.feedback_mode}"


@dataclass(frozen=True)
class RatePoint:
    params: OperatingParams
    gross_ul: float
    gross_dl: float
    net_ul: float
    net_dl: float
    realization_count: int
    infeasible: bool = False
    #: DL mode that produced ``gross_dl`` (differs from params only for "auto")
    dl_mode_used: str = "spatial"

    @property
    def coords(self) -> tuple[float, float]:
        return self.net_ul, self.net_dl


# --- net rates ----------------------------------------------------------------------

def net_rates_unclamped(gross_ul: float, gross_dl: float, params: OperatingParams, geom: PrbGeometry,
                        n_bs: int, k: int, dl_mode: str | None = None) -> tuple[float, float]:
    """Net rates before clamping: pilot overhead on both links and feedback cost on the UL."""
    if gross_ul < 0 or gross_dl < 0:
        raise InvalidArgument("gross rates must be nonnegative")
    mode = dl_mode or params.dl_mode
    if mode not in ("spatial", "tdm"):
        raise InvalidArgument("net DL rate needs a concrete dl_mode (spatial or tdm)")
    size = geom.size
    ul = (gross_ul * size * (1.0 - k * params.rho_ul) - params.n_b * n_bs * k) / size
    streams = n_bs + k if mode == "spatial" else 1
    dl = gross_dl * (1.0 - streams * params.rho_dl)
    return ul, dl


def net_rates(gross_ul: float, gross_dl: float, params: OperatingParams, geom: PrbGeometry,
              n_bs: int, k: int, dl_mode: str | None = None) -> tuple[float, float]:
    """Net UL/DL rates clamped at zero."""
    ul, dl = net_rates_unclamped(gross_ul, gross_dl, params, geom, n_bs, k, dl_mode)
    return max(0.0, ul), max(0.0, dl)


def _overhead_infeasible(params: OperatingParams, n_bs: int, k: int, mode: str, raw: tuple[float, float]) -> bool:
    streams = n_bs + k if mode == "spatial" else 1
    return raw[0] < 0 or raw[1] < 0 or k * params.rho_ul >= 1 or streams * params.rho_dl >= 1


# --- pilot catalog ----------------------------------------------------------------------

def optimized_catalog(geom: PrbGeometry, profile: ChannelProfile, sigma2_p: float,
                      max_density: float = 0.15) -> list[PilotPattern]:
    """Best layout per pilot count for one scenario.

    Among all candidate lattices with the same number of pilots, the one
    with the smallest worst-case estimation MSE is kept (ties: pattern id),
    so each entry of the result has a distinct density.
    """
    best: dict[int, tuple[float, str, PilotPattern]] = {}
    for pat in candidate_patterns(geom, max_density):
        m = estimation_mse(profile, geom, pat, sigma2_p, 0).max
        key = (m, pat.id, pat)
        cur = best.get(pat.n_ppos)
        if cur is None or key[:2] < cur[:2]:
            best[pat.n_ppos] = key
    return [best[n][2] for n in sorted(best)]


# --- lookup table ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LookupGrids:
    rho_ul: tuple[float, ...]
    rho_dl: tuple[float, ...]
    n_b: tuple[float, ...]
    v_kmh: tuple[float, ...]
    tau_max_us: tuple[float, ...]

    def __post_init__(self):
        for name in AXES:
            vals = getattr(self, name)
            if not vals:
                raise InvalidArgument(f"grid {name} must be nonempty")
            if any(not math.isfinite(v) or v < 0 for v in vals):
                raise InvalidArgument(f"grid {name} must hold finite nonnegative values")
            object.__setattr__(self, name, tuple(sorted(set(float(v) for v in vals))))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(getattr(self, a)) for a in AXES)


@dataclass
class LookupTable:
    """Grid-indexed CSI quality; ``values[..., j]`` follows :data:`VALUE_KEYS`.

    ``patterns[i_ul or i_dl, i_v, i_tau]`` records the layout used for each
    density at each scenario (layouts are chosen per scenario).
    """

    grids: LookupGrids
    values: np.ndarray
    ul_patterns: np.ndarray = field(repr=False)
    dl_patterns: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.shape != self.grids.shape + (len(VALUE_KEYS),):
            raise InvalidArgument("lookup values do not cover the full grid")
        if not np.all(np.isfinite(self.values)):
            raise InvalidArgument("lookup values must be finite")

    @property
    def size(self) -> int:
        return int(np.prod(self.grids.shape))

    def nearest_index(self, rho_ul, rho_dl, n_b, v_kmh, tau_max_us) -> tuple[int, ...]:
        out = []
        for name, q in zip(AXES, (rho_ul, rho_dl, n_b, v_kmh, tau_max_us)):
            axis = np.asarray(getattr(self.grids, name))
            out.append(int(np.argmin(np.abs(axis - q))))  # first of equidistant nodes
        return tuple(out)

    def node(self, idx: Sequence[int]) -> tuple[float, float, float, float]:
        return tuple(float(x) for x in self.values[tuple(idx)])

    def query(self, rho_ul, rho_dl, n_b, v_kmh, tau_max_us) -> tuple[float, float, float, float]:
        """Nearest-node values ``(sigma_ul_bs, sigma_dl_ut, sigma_dl_ut_tdm, sigma_dl_bs)``."""
        return self.node(self.nearest_index(rho_ul, rho_dl, n_b, v_kmh, tau_max_us))

    def quality(self, idx: Sequence[int]) -> CsiQuality | None:
        ul, ut, _, bs = self.node(idx)
        if min(ul, ut, bs) < 0:
            return None
        return CsiQuality(ul, ut, bs)

    def pattern_ids(self, v_kmh: float, tau_max_us: float) -> tuple[list[str], list[str]]:
        iv = int(np.argmin(np.abs(np.asarray(self.grids.v_kmh) - v_kmh)))
        it = int(np.argmin(np.abs(np.asarray(self.grids.tau_max_us) - tau_max_us)))
        return list(self.ul_patterns[:, iv, it]), list(self.dl_patterns[:, iv, it])

    # serialization
    def to_dict(self) -> dict:
        rows = []
        for idx in np.ndindex(*self.grids.shape):
            row = {"idx": list(idx)}
            row.update({k: float(v) for k, v in zip(VALUE_KEYS, self.values[idx])})
            row["ul_pattern"] = str(self.ul_patterns[idx[0], idx[3], idx[4]])
            row["dl_pattern"] = str(self.dl_patterns[idx[1], idx[3], idx[4]])
            rows.append(row)
        return {"axes": {a: list(getattr(self.grids, a)) for a in AXES}, "values": rows}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def from_dict(cls, data: dict) -> "LookupTable":
        try:
            grids = LookupGrids(**{a: tuple(data["axes"][a]) for a in AXES})
            values = np.full(grids.shape + (len(VALUE_KEYS),), np.nan)
            ulp = np.full((grids.shape[0], grids.shape[3], grids.shape[4]), "", dtype=object)
            dlp = np.full((grids.shape[1], grids.shape[3], grids.shape[4]), "", dtype=object)
            for row in data["values"]:
                idx = tuple(int(i) for i in row["idx"])
                values[idx] = [float(row[k]) for k in VALUE_KEYS]
                ulp[idx[0], idx[3], idx[4]] = row.get("ul_pattern", f"rho{grids.rho_ul[idx[0]]:g}")
                dlp[idx[1], idx[3], idx[4]] = row.get("dl_pattern", f"rho{grids.rho_dl[idx[1]]:g}")
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise InvalidArgument(f"malformed lookup table: {exc}") from exc
        if np.isnan(values).any():
            raise InvalidArgument("lookup table has missing nodes")
        return cls(grids, values, ulp, dlp)

    @classmethod
    def load(cls, path: str | Path) -> "LookupTable":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise InvalidArgument(f"lookup file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidArgument(f"lookup file is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


def _density_map(patterns: Iterable[PilotPattern]) -> dict[float, PilotPattern]:
    out: dict[float, PilotPattern] = {}
    for p in patterns:
        if p.density in out and out[p.density].id != p.id:
            raise InvalidArgument(f"catalog has two layouts with density {p.density:g}")
        out[p.density] = p
    return out


def _resolve(densities: Sequence[float], by_density: dict[float, PilotPattern], geom: PrbGeometry) -> list[PilotPattern]:
    out = []
    for rho in densities:
        hit = [p for d, p in by_density.items() if abs(d - rho) <= 0.5 / geom.size]
        if not hit:
            raise InvalidArgument(f"no pilot layout with density {rho:g} in the catalog")
        out.append(hit[0])
    return out


def _safe(fn) -> float:
    try:
        v = fn()
    except UnusableLink:
        return UNUSABLE
    return v if math.isfinite(v) else UNUSABLE


def _scenario_values(config: SystemConfig, profile: ChannelProfile, ul_pats, dl_pats, n_b_grid):
    """``(n_ul, n_dl, n_nb, 4)`` values for one (velocity, delay spread) scenario."""
    geom, s2p, e = config.geometry, config.budget.sigma2_p, config.coeff_variance
    est: dict[str, object] = {}

    def csir(p):
        if p.id not in est:
            est[p.id] = estimation_mse(profile, geom, p, s2p, 0)
        return est[p.id]

    ul_sig = [_safe(lambda p=p: noise_ratio(csir(p), e)) for p in ul_pats]
    dl_ut = [_safe(lambda p=p: noise_ratio(csir(p), e)) for p in dl_pats]
    dl_bs = np.empty((len(dl_pats), len(n_b_grid)))
    for i, p in enumerate(dl_pats):
        model = None
        for j, nb in enumerate(n_b_grid):
            fb = config.feedback(nb)
            if model is None:
                model = FeedbackModel(profile, geom, p, s2p, fb.delay, fb.n_rank)
            dl_bs[i, j] = _safe(lambda: sigma_dl_bs(profile, geom, p, s2p, fb, model=model, csir=csir(p)))
    out = np.empty((len(ul_pats), len(dl_pats), len(n_b_grid), 4))
    out[..., 0] = np.asarray(ul_sig)[:, None, None]
    out[..., 1] = np.asarray(dl_ut)[None, :, None]
    # TDM: the DL layout is one pilot sequence for the single effective coefficient
    out[..., 2] = np.asarray(dl_ut)[None, :, None]
    out[..., 3] = dl_bs[None, :, :]
    return out


def build_lookup(config: SystemConfig, grids: LookupGrids, catalog: Sequence[PilotPattern] | None = None,
                 *, max_density: float = 0.15) -> LookupTable:
    """Evaluate CSI quality at every grid node; deterministic.

    With ``catalog=None`` the layout for each density is the per-scenario
    optimum from :func:`optimized_catalog`; otherwise densities are
    resolved against the given catalog.
    """
    geom = config.geometry
    values = np.empty(grids.shape + (len(VALUE_KEYS),))
    n_ul, n_dl, _, n_v, n_t = grids.shape
    ulp = np.empty((n_ul, n_v, n_t), dtype=object)
    dlp = np.empty((n_dl, n_v, n_t), dtype=object)
    fixed = _density_map(catalog) if catalog is not None else None
    for iv, v in enumerate(grids.v_kmh):
        for it, tau in enumerate(grids.tau_max_us):
            profile = config.profile(v, tau)
            by_density = fixed if fixed is not None else _density_map(
                optimized_catalog(geom, profile, config.budget.sigma2_p, max_density))
            ul_pats = _resolve(grids.rho_ul, by_density, geom)
            dl_pats = _resolve(grids.rho_dl, by_density, geom)
            log.info("lookup: v=%g km/h tau=%g us (%d UL x %d DL x %d N_b)", v, tau,
                     len(ul_pats), len(dl_pats), len(grids.n_b))
            values[:, :, :, iv, it] = _scenario_values(config, profile, ul_pats, dl_pats, grids.n_b)
            ulp[:, iv, it] = [p.id for p in ul_pats]
            dlp[:, iv, it] = [p.id for p in dl_pats]
    return LookupTable(grids, values, ulp, dlp)


def scenario_grids(config: SystemConfig, catalog: Sequence[PilotPattern], n_b_grid: Sequence[float]) -> LookupGrids:
    dens = tuple(p.density for p in catalog)
    return LookupGrids(dens, dens, tuple(n_b_grid), (config.velocity_kmh,), (config.tau_max_us,))


# --- Monte Carlo evaluation ---------------------------------------------------------------

@dataclass(frozen=True)
class Realizations:
    h_ul: np.ndarray
    h_dl: np.ndarray

    @property
    def count(self) -> int:
        return self.h_ul.shape[0]


def draw_realizations(config: SystemConfig, count: int, seed: int) -> Realizations:
    if count < 1:
        raise InvalidArgument("need at least one realization")
    ul, dl = sample_flat_arrays(config.n_bs, config.k, count, seed, coeff_variance=config.coeff_variance)
    return Realizations(ul, dl)


def _mean(x: np.ndarray) -> float:
    return math.fsum(x.tolist()) / x.size


def _gross_ul(config: SystemConfig, real: Realizations, s_ul: float) -> float:
    if s_ul < 0:
        return 0.0
    return _mean(ul_rates_batch(real.h_ul, config.coeff_variance, s_ul, config.budget))


def _gross_spatial(config: SystemConfig, real: Realizations, s_ut: float, s_bs: float) -> float:
    if s_ut < 0 or s_bs < 0:
        return 0.0
    return _mean(dl_rates_batch(real.h_dl, config.coeff_variance, s_ut, s_bs, config.budget))


def _gross_tdm(config: SystemConfig, real: Realizations, s_tdm: float) -> float:
    if s_tdm < 0:
        return 0.0
    return _mean(tdm_rates_batch(real.h_dl, config.coeff_variance, s_tdm, config.budget))


def _assemble(config: SystemConfig, params: OperatingParams, node, gross_ul: float,
              spatial: float | None, tdm: float | None, count: int) -> RatePoint:
    s_ul, s_ut, s_tdm, s_bs = node
    unusable = s_ul < 0
    if params.dl_mode == "spatial":
        mode, gross_dl = "spatial", spatial
        unusable |= s_ut < 0 or s_bs < 0
    elif params.dl_mode == "tdm":
        mode, gross_dl = "tdm", tdm
        unusable |= s_tdm < 0
    else:
        # compare on net rates: the two modes pay different pilot overheads
        nets = {m: net_rates(gross_ul, g, params, config.geometry, config.n_bs, config.k, m)[1]
                for m, g in (("spatial", spatial), ("tdm", tdm))}
        mode = "spatial" if nets["spatial"] >= nets["tdm"] else "tdm"
        gross_dl = spatial if mode == "spatial" else tdm
        unusable |= (s_ut < 0 or s_bs < 0) and s_tdm < 0
    raw = net_rates_unclamped(gross_ul, gross_dl, params, config.geometry, config.n_bs, config.k, mode)
    infeasible = unusable or _overhead_infeasible(params, config.n_bs, config.k, mode, raw)
    return RatePoint(params, gross_ul, gross_dl, max(0.0, raw[0]), max(0.0, raw[1]), count, infeasible, mode)


def evaluate_operating_point(config: SystemConfig, params: OperatingParams, lookup: LookupTable,
                             realizations: int | Realizations, seed: int = 0) -> RatePoint:
    """Average gross rates over the realization set and convert them to net rates.

    ``realizations`` is either a count (drawn from ``seed``) or a
    precomputed :class:`Realizations` set.
    """
    real = realizations if isinstance(realizations, Realizations) else draw_realizations(config, realizations, seed)
    node = lookup.query(params.rho_ul, params.rho_dl, params.n_b, config.velocity_kmh, config.tau_max_us)
    gross_ul = _gross_ul(config, real, node[0])
    need_sp = params.dl_mode in ("spatial", "auto")
    need_tdm = params.dl_mode in ("tdm", "auto")
    spatial = _gross_spatial(config, real, node[1], node[3]) if need_sp else None
    tdm = _gross_tdm(config, real, node[2]) if need_tdm else None
    return _assemble(config, params, node, gross_ul, spatial, tdm, real.count)


def _dl_modes(config: SystemConfig) -> tuple[str, ...]:
    return ("spatial", "tdm") if config.dl_mode == "auto" else (config.dl_mode,)


def sweep(config: SystemConfig, catalog: Sequence[PilotPattern], n_b_grid: Sequence[float],
          realizations: int, seed: int, *, lookup: LookupTable | None = None, threads: int = 1,
          dl_modes: Sequence[str] | None = None) -> list[RatePoint]:
    """One :class:`RatePoint` per (UL layout, DL layout, N_b, DL mode).

    Every distinct CSI-quality value is evaluated once on the shared
    realization set; the work is spread over ``threads`` workers, and the
    result does not depend on the worker count.
    """
    if not catalog or not n_b_grid:
        raise InvalidArgument("sweep grids must be nonempty")
    if threads < 1:
        raise InvalidArgument("threads must be >= 1")
    modes = tuple(dl_modes) if dl_modes is not None else _dl_modes(config)
    if lookup is None:
        lookup = build_lookup(config, scenario_grids(config, catalog, n_b_grid), catalog)
    real = draw_realizations(config, realizations, seed)

    combos = list(product(catalog, catalog, n_b_grid))
    nodes = {}
    for ul, dl, nb in combos:
        nodes[(ul.id, dl.id, nb)] = lookup.query(ul.density, dl.density, nb, config.velocity_kmh,
                                                 config.tau_max_us)
    tasks: dict[tuple, object] = {}
    for s_ul, s_ut, s_tdm, s_bs in nodes.values():
        tasks.setdefault(("ul", s_ul), lambda s=s_ul: _gross_ul(config, real, s))
        if "spatial" in modes:
            tasks.setdefault(("sp", s_ut, s_bs), lambda a=s_ut, b=s_bs: _gross_spatial(config, real, a, b))
        if "tdm" in modes:
            tasks.setdefault(("tdm", s_tdm), lambda s=s_tdm: _gross_tdm(config, real, s))
    keys = sorted(tasks)
    log.info("sweep: %d points, %d distinct rate evaluations, %d thread(s)",
             len(combos) * len(modes), len(keys), threads)
    if threads == 1:
        results = [tasks[k]() for k in keys]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda k: tasks[k](), keys))
    cache = dict(zip(keys, results))

    points = []
    for ul, dl, nb in combos:
        node = nodes[(ul.id, dl.id, nb)]
        s_ul, s_ut, s_tdm, s_bs = node
        for mode in modes:
            params = OperatingParams(ul.id, dl.id, ul.density, dl.density, float(nb), mode, config.feedback_mode)
            spatial = cache.get(("sp", s_ut, s_bs))
            tdm = cache.get(("tdm", s_tdm))
            points.append(_assemble(config, params, node, cache[("ul", s_ul)], spatial, tdm, real.count))
    return points


# --- region geometry -------------------------------------------------------------------

def _coords(p) -> tuple[float, float]:
    return (p.net_ul, p.net_dl) if hasattr(p, "net_ul") else (float(p[0]), float(p[1]))


def _pid(p) -> str:
    return p.params.id if hasattr(p, "params") else ""


def pareto_frontier(points: Sequence) -> list:
    """Points not dominated in (net UL, net DL), ordered by increasing net UL.

    Weak dominance also removes exact duplicates; the one with the
    lexicographically smallest parameter id is kept.
    """
    order = sorted(points, key=lambda p: (-_coords(p)[0], -_coords(p)[1], _pid(p)))
    out, best_dl = [], -math.inf
    for p in order:
        dl = _coords(p)[1]
        if dl > best_dl:
            out.append(p)
            best_dl = dl
    return out[::-1]


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_region(frontier: Sequence) -> list[tuple[float, float]]:
    """Upper-right convex hull of the frontier plus the two axis anchors.

    Vertices run from ``(0, max DL)`` to ``(max UL, 0)``; collinear interior
    points are dropped. Segments between vertices are achievable by time
    sharing.
    """
    if not frontier:
        raise InvalidArgument("convex_region needs at least one point")
    pts = sorted({_coords(p) for p in frontier})
    ul_max = max(x for x, _ in pts)
    dl_max = max(y for _, y in pts)
    # keep only the Pareto staircase so ties in x cannot hide a vertex
    stair, best = [], -math.inf
    for x, y in sorted(pts, key=lambda c: (-c[0], -c[1])):
        if y > best:
            stair.append((x, y))
            best = y
    chain = [(0.0, dl_max)] + stair[::-1] + [(ul_max, 0.0)]
    hull: list[tuple[float, float]] = []
    for c in chain:
        if hull and hull[-1] == c:
            continue
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], c) >= 0:
            hull.pop()
        hull.append(c)
    return hull


def hull_value(vertices: Sequence[tuple[float, float]], w: float) -> float:
    return max(w * x + (1.0 - w) * y for x, y in vertices)


def weighted_optimum(points: Sequence[RatePoint], w: float, *, rel_tol: float = 1e-12) -> RatePoint:
    """Maximizer of ``w * net UL + (1 - w) * net DL``.

    Among points tied on the objective, dominated ones are discarded first
    (at ``w = 0`` or ``1`` the other rate decides); the remaining ties go to
    smaller N_b, then smaller DL density, then parameter id.
    """
    if not points:
        raise InvalidArgument("weighted_optimum needs at least one point")
    if not 0 <= w <= 1:
        raise InvalidArgument("weight must lie in [0, 1]")
    obj = [w * p.net_ul + (1.0 - w) * p.net_dl for p in points]
    top = max(obj)
    tol = rel_tol * max(1.0, abs(top))
    tied = [p for p, o in zip(points, obj) if o >= top - tol]
    front = pareto_frontier(tied)
    # restore duplicates of frontier coordinates so tie-breaks see all of them
    keep = {_coords(p) for p in front}
    cands = [p for p in tied if _coords(p) in keep]
    return min(cands, key=lambda p: (p.params.n_b, p.params.rho_dl, p.params.id))


@dataclass(frozen=True)
class RateRegion:
    points: list[RatePoint]
    frontier: list[RatePoint]
    hull: list[tuple[float, float]]

    @classmethod
    def from_points(cls, points: Sequence[RatePoint]) -> "RateRegion":
        front = pareto_frontier(points)
        return cls(list(points), front, convex_region(front))

    def flags(self, p: RatePoint) -> tuple[bool, bool]:
        on_front = any(p is q for q in self.frontier)
        return on_front, on_front and _coords(p) in set(self.hull)


def _num(x: float) -> str:
    return repr(float(x))


def region_rows(region: RateRegion) -> list[dict]:
    rows = []
    front_ids = {id(q) for q in region.frontier}
    hull = set(region.hull)
    for p in region.points:
        on_front = id(p) in front_ids
        a = p.params
        rows.append({"ul_pattern": a.ul_pattern, "dl_pattern": a.dl_pattern, "rho_ul": _num(a.rho_ul),
                     "rho_dl": _num(a.rho_dl), "n_b": _num(a.n_b), "dl_mode": a.dl_mode,
                     "feedback_mode": a.feedback_mode, "gross_ul": _num(p.gross_ul),
                     "gross_dl": _num(p.gross_dl), "net_ul": _num(p.net_ul), "net_dl": _num(p.net_dl),
                     "pareto": int(on_front), "hull": int(on_front and _coords(p) in hull)})
    return rows


def region_csv(region: RateRegion) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(region_rows(region))
    return buf.getvalue()


def region_json(region: RateRegion) -> str:
    return json.dumps({"points": region_rows(region), "hull": [list(v) for v in region.hull]}, indent=1)


def point_dict(p: RatePoint) -> dict:
    d = asdict(p)
    d["params"]["id"] = p.params.id
    return d
