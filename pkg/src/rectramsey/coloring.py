"""Colorings and the two forbidden-pattern checks.

A coloring assigns one of r colors to every point of a configuration.  The
avoidance problem forbids monochromatic designated segments (both endpoints
one color) and rainbow rectangles (four pairwise-distinct colors); a coloring
avoiding both refutes the Gallai-Ramsey arrow on that finite ground set.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .geometry import (
    DEFAULT_EPS,
    Configuration,
    RectangleCopy,
    SegmentCopy,
    find_rectangles,
    find_segments,
)


@dataclass(frozen=True)
class Coloring:
    """A total assignment of colors 0..r-1 to points 0..N-1."""

    r: int
    colors: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ValueError(f"color count must be positive, got {self.r}")
        object.__setattr__(self, "colors", tuple(int(c) for c in self.colors))
        for i, c in enumerate(self.colors):
            if not 0 <= c < self.r:
                raise ValueError(f"color {c} at point {i} outside range [0, {self.r})")

    def to_obj(self) -> dict:
        return {"r": self.r, "colors": list(self.colors)}

    @classmethod
    def from_obj(cls, obj: dict) -> "Coloring":
        try:
            return cls(int(obj["r"]), tuple(int(c) for c in obj["colors"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed coloring object: {exc}") from exc


def _check_total(cfg: Configuration, coloring: Coloring) -> None:
    if len(coloring.colors) != cfg.n_points:
        raise ValueError(
            f"coloring length {len(coloring.colors)} != point count {cfg.n_points}"
        )


def has_mono_copy(cfg: Configuration, coloring: Coloring, role: str = "a") -> SegmentCopy | None:
    """Lexicographically first designated pair of the role whose endpoints
    share a color, or None."""
    _check_total(cfg, coloring)
    side = cfg.side_a if role == "a" else cfg.side_b
    colors = coloring.colors
    for p, q in side.pairs:
        if colors[p] == colors[q]:
            return SegmentCopy(p, q, role)
    return None


def has_rainbow_copy(cfg: Configuration, coloring: Coloring, a: float, b: float,
                     eps: float = DEFAULT_EPS,
                     rectangles: Sequence[RectangleCopy] | None = None) -> RectangleCopy | None:
    """Lexicographically first a-by-b rectangle with four distinct colors,
    or None.  Pass precomputed ``rectangles`` to skip re-enumeration."""
    _check_total(cfg, coloring)
    if coloring.r < 4:
        return None
    if rectangles is None:
        rectangles = find_rectangles(cfg, a, b, eps)
    colors = coloring.colors
    for rect in rectangles:
        c1, c2, c3, c4 = (colors[p] for p in rect.corners)
        if c1 != c2 and c1 != c3 and c1 != c4 and c2 != c3 and c2 != c4 and c3 != c4:
            return rect
    return None


@dataclass(frozen=True)
class AvoidanceProblem:
    """A configuration, a color count, and the two forbidden pattern families."""

    cfg: Configuration
    r: int
    a: float
    b: float
    eps: float
    mono_forbidden: tuple[SegmentCopy, ...]
    rainbow_forbidden: tuple[RectangleCopy, ...]

    @classmethod
    def build(cls, cfg: Configuration, r: int, a: float, b: float,
              eps: float = DEFAULT_EPS) -> "AvoidanceProblem":
        return cls(
            cfg=cfg,
            r=r,
            a=a,
            b=b,
            eps=eps,
            mono_forbidden=tuple(find_segments(cfg, a, eps)),
            rainbow_forbidden=tuple(find_rectangles(cfg, a, b, eps)),
        )

    def violations(self, coloring: Coloring) -> tuple[SegmentCopy | None, RectangleCopy | None]:
        """First violated segment and first violated rectangle, if any."""
        _check_total(self.cfg, coloring)
        colors = coloring.colors
        mono = None
        for seg in self.mono_forbidden:
            if colors[seg.p] == colors[seg.q]:
                mono = seg
                break
        rainbow = None
        for rect in self.rainbow_forbidden:
            cs = set(colors[p] for p in rect.corners)
            if len(cs) == 4:
                rainbow = rect
                break
        return mono, rainbow

    def is_avoiding(self, coloring: Coloring) -> bool:
        mono, rainbow = self.violations(coloring)
        return mono is None and rainbow is None


# ---------------------------------------------------------------------------
# seeded sampling (extractor and pipeline stress inputs)


def sample_uniform_coloring(cfg: Configuration, r: int, rng: random.Random) -> Coloring:
    return Coloring(r, tuple(rng.randrange(r) for _ in range(cfg.n_points)))


def sample_mono_avoiding_coloring(cfg: Configuration, r: int, rng: random.Random,
                                  max_restarts: int = 10000) -> Coloring:
    """Random coloring with every designated side-a pair bichromatic.

    Greedy in point order: each point draws uniformly from the colors not
    used by already-colored side-a neighbors; a dead end restarts the whole
    draw.  Deterministic for a given rng state.
    """
    n = cfg.n_points
    neighbors: list[list[int]] = [[] for _ in range(n)]
    for p, q in cfg.side_a.pairs:
        neighbors[q].append(p)
        neighbors[p].append(q)
    for _ in range(max_restarts):
        colors: list[int] = []
        ok = True
        for p in range(n):
            banned = {colors[q] for q in neighbors[p] if q < p}
            avail = [c for c in range(r) if c not in banned]
            if not avail:
                ok = False
                break
            colors.append(avail[rng.randrange(len(avail))])
        if ok:
            return Coloring(r, tuple(colors))
    raise ValueError(
        f"no mono-avoiding coloring sampled in {max_restarts} restarts (r={r} too small?)"
    )
