"""Pilot layouts inside a PRB and their selection matrices."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import PrbGeometry
from .errors import InvalidArgument


@dataclass(frozen=True)
class PilotPattern:
    geometry: PrbGeometry
    positions: tuple[tuple[int, int], ...]
    id: str
    dt: int = 0
    df: int = 0
    offset: tuple[int, int] = (0, 0)
    kind: str = "rect"
    # stacked indices, derived
    indices: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.positions:
            raise InvalidArgument("a pilot pattern needs at least one position")
        g = self.geometry
        for t, f in self.positions:
            if not (0 <= t < g.n_symbols and 0 <= f < g.n_subcarriers):
                raise InvalidArgument(f"pilot position {(t, f)} outside the PRB")
        if len(set(self.positions)) != len(self.positions):
            raise InvalidArgument("pilot positions must be unique")
        object.__setattr__(self, "indices", tuple(g.index(t, f) for t, f in self.positions))

    @property
    def n_ppos(self) -> int:
        return len(self.positions)

    @property
    def density(self) -> float:
        return self.n_ppos / self.geometry.size

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "dt": self.dt, "df": self.df,
                "offset": list(self.offset), "n_ppos": self.n_ppos, "density": self.density}


def lattice_pattern(geom: PrbGeometry, dt: int, df: int, offset: tuple[int, int] = (0, 0)) -> PilotPattern:
    """Rectangular lattice ``{(t0 + a dt, f0 + b df)}`` clipped to the PRB."""
    if dt < 1 or df < 1:
        raise InvalidArgument("lattice spacings must be >= 1")
    t0, f0 = offset
    if not (0 <= t0 < dt and 0 <= f0 < df):
        raise InvalidArgument("offset must lie inside one lattice cell")
    positions = tuple((t, f) for t in range(t0, geom.n_symbols, dt)
                      for f in range(f0, geom.n_subcarriers, df))
    if not positions:
        raise InvalidArgument(f"lattice dt={dt}, df={df}, offset={offset} has no pilot in the PRB")
    return PilotPattern(geom, positions, f"rect-t{dt}-f{df}-o{t0}.{f0}", dt, df, (t0, f0), "rect")


def diamond_pattern(geom: PrbGeometry, dt: int, df: int, offset: tuple[int, int] = (0, 0)) -> PilotPattern:
    """Staggered lattice: every other pilot symbol is shifted by ``df // 2`` subcarriers."""
    if dt < 1 or df < 2:
        raise InvalidArgument("diamond lattices need dt >= 1 and df >= 2")
    t0, f0 = offset
    if not (0 <= t0 < dt and 0 <= f0 < df):
        raise InvalidArgument("offset must lie inside one lattice cell")
    shift = df // 2
    positions = []
    for a, t in enumerate(range(t0, geom.n_symbols, dt)):
        start = (f0 + (a % 2) * shift) % df
        positions.extend((t, f) for f in range(start, geom.n_subcarriers, df))
    if not positions:
        raise InvalidArgument("diamond lattice has no pilot in the PRB")
    return PilotPattern(geom, tuple(positions), f"diam-t{dt}-f{df}-o{t0}.{f0}", dt, df, (t0, f0), "diamond")


def selection_matrix(pattern: PilotPattern) -> np.ndarray:
    """0/1 matrix of shape ``(N_ppos, L)`` picking the pilot entries of a stacked PRB vector."""
    s = np.zeros((pattern.n_ppos, pattern.geometry.size))
    s[np.arange(pattern.n_ppos), pattern.indices] = 1.0
    return s


def _centered(extent: int, step: int) -> int:
    count = math.ceil(extent / step)
    return (extent - 1 - (count - 1) * step) // 2


def candidate_patterns(geom: PrbGeometry, max_density: float = 0.15) -> list[PilotPattern]:
    """All centered rectangular and diamond lattices up to ``max_density``.

    Offsets center the lattice in the PRB, which keeps the worst-case
    (edge) interpolation distance small.
    """
    out: dict[tuple, PilotPattern] = {}
    for dt in range(1, geom.n_symbols + 1):
        for df in range(1, geom.n_subcarriers + 1):
            off = (_centered(geom.n_symbols, dt), _centered(geom.n_subcarriers, df))
            pats = [lattice_pattern(geom, dt, df, off)]
            if df >= 2 and math.ceil(geom.n_symbols / dt) >= 2:
                pats.append(diamond_pattern(geom, dt, df, off))
            for p in pats:
                if p.density <= max_density + 1e-12:
                    out.setdefault(tuple(sorted(p.positions)), p)
    return sorted(out.values(), key=lambda p: (p.n_ppos, p.id))


def catalog_to_json(patterns: list[PilotPattern]) -> str:
    return json.dumps([p.to_dict() for p in patterns], indent=2)


def pattern_from_dict(geom: PrbGeometry, d: dict) -> PilotPattern:
    build = diamond_pattern if d.get("kind") == "diamond" else lattice_pattern
    return build(geom, int(d["dt"]), int(d["df"]), tuple(d["offset"]))
