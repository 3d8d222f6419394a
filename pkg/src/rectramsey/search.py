"""Arrow verification: does every r-coloring of a finite configuration hit a
monochromatic side-a segment or a rainbow a-by-b rectangle?

Two engines answer the question:

* ``backtrack``  -- depth-first search over a static point order (descending
  side-a degree, ties by PointId) with forward checking on both constraint
  families and restricted-growth color-symmetry breaking (the first point
  takes color 0 and each new color must be the smallest unused index).
* ``exhaustive`` -- scans all r^N colorings in lexicographic order of the
  same static point order; usable while r^N <= 10^8.

Both engines return the identical lexicographically least avoiding coloring
(under the fixed assignment order) when one exists: the least avoiding
coloring is always a restricted-growth string, so symmetry breaking never
skips it.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .coloring import AvoidanceProblem, Coloring
from .geometry import DEFAULT_EPS, Configuration

ARROW_HOLDS = "ArrowHolds"
COUNTEREXAMPLE = "Counterexample"

EXHAUSTIVE_LIMIT = 10**8


class SearchLimitError(ValueError):
    """The exhaustive engine's r^N cap was exceeded."""


@dataclass
class SearchStats:
    engine: str
    nodes: int = 0
    max_depth: int = 0
    wall_time_s: float = 0.0
    mono_prunes: int = 0
    rainbow_prunes: int = 0

    def dominant_constraint(self) -> str:
        if self.mono_prunes == 0 and self.rainbow_prunes == 0:
            return "none"
        return "mono" if self.mono_prunes >= self.rainbow_prunes else "rainbow"

    def to_obj(self, include_timing: bool = True) -> dict:
        obj = {
            "engine": self.engine,
            "nodes": self.nodes,
            "max_depth": self.max_depth,
            "mono_prunes": self.mono_prunes,
            "rainbow_prunes": self.rainbow_prunes,
            "dominant_constraint": self.dominant_constraint(),
        }
        if include_timing:
            obj["wall_time_s"] = self.wall_time_s
        return obj


@dataclass
class SearchOutcome:
    verdict: str
    counterexample: Coloring | None
    stats: SearchStats

    def __post_init__(self) -> None:
        if self.verdict == COUNTEREXAMPLE and self.counterexample is None:
            raise ValueError("Counterexample verdict requires a coloring")
        if self.verdict == ARROW_HOLDS and self.counterexample is not None:
            raise ValueError("ArrowHolds verdict must not carry a coloring")


def assignment_order(problem: AvoidanceProblem) -> list[int]:
    """Static order: descending degree in the side-a graph, ties by PointId."""
    n = problem.cfg.n_points
    deg = [0] * n
    for seg in problem.mono_forbidden:
        deg[seg.p] += 1
        deg[seg.q] += 1
    return sorted(range(n), key=lambda p: (-deg[p], p))


def verify_gallai_arrow(cfg: Configuration, r: int, a: float, b: float,
                        engine: str = "backtrack", eps: float = DEFAULT_EPS) -> SearchOutcome:
    """Decide whether cfg arrows (segment_a; rectangle_ab) for r colors."""
    problem = AvoidanceProblem.build(cfg, r, a, b, eps)
    return solve(problem, engine=engine)


def solve(problem: AvoidanceProblem, engine: str = "backtrack") -> SearchOutcome:
    if engine == "backtrack":
        outcome = _solve_backtrack(problem)
    elif engine == "exhaustive":
        outcome = _solve_exhaustive(problem)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    if outcome.counterexample is not None and not problem.is_avoiding(outcome.counterexample):
        raise AssertionError("engine returned a non-avoiding counterexample")
    return outcome


def _solve_backtrack(problem: AvoidanceProblem) -> SearchOutcome:
    t0 = time.perf_counter()
    n = problem.cfg.n_points
    r = problem.r
    stats = SearchStats(engine="backtrack")
    order = assignment_order(problem)
    pos = [0] * n
    for depth, p in enumerate(order):
        pos[p] = depth

    # forward mono edges: assigning p removes its color from these partners
    later_mono: list[list[int]] = [[] for _ in range(n)]
    for seg in problem.mono_forbidden:
        if pos[seg.p] < pos[seg.q]:
            later_mono[seg.p].append(seg.q)
        else:
            later_mono[seg.q].append(seg.p)

    # rainbow watches fire when the third corner (in assignment order) is
    # assigned: if the three are pairwise distinct the last corner's domain
    # shrinks to exactly those three colors
    third_watch: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
    for rect in problem.rainbow_forbidden:
        members = sorted(rect.corners, key=lambda p: pos[p])
        third_watch[members[2]].append((members[0], members[1], members[3]))

    unassigned = -1
    colors = [unassigned] * n
    full_mask = (1 << r) - 1
    allowed = [full_mask] * n

    sys.setrecursionlimit(max(10000, 4 * n + 100))

    def rec(depth: int, used: int) -> bool:
        stats.max_depth = max(stats.max_depth, depth)
        if depth == n:
            return True
        p = order[depth]
        mask = allowed[p]
        cap = used + 1 if used < r else r
        for c in range(cap):
            if not (mask >> c) & 1:
                continue
            stats.nodes += 1
            colors[p] = c
            bit = 1 << c
            trail: list[tuple[int, int]] = []
            ok = True
            for q in later_mono[p]:
                if colors[q] == unassigned:
                    m = allowed[q]
                    if m & bit:
                        trail.append((q, m))
                        m &= ~bit
                        allowed[q] = m
                        if m == 0:
                            stats.mono_prunes += 1
                            ok = False
                            break
            if ok:
                for q1, q2, last in third_watch[p]:
                    c1, c2 = colors[q1], colors[q2]
                    if c1 != c2 and c1 != c and c2 != c:
                        m = allowed[last]
                        nm = m & ((1 << c1) | (1 << c2) | bit)
                        if nm != m:
                            trail.append((last, m))
                            allowed[last] = nm
                            if nm == 0:
                                stats.rainbow_prunes += 1
                                ok = False
                                break
            if ok and rec(depth + 1, used + (1 if c == used else 0)):
                return True
            for q, m in trail:
                allowed[q] = m
            colors[p] = unassigned
        return False

    found = rec(0, 0)
    stats.wall_time_s = time.perf_counter() - t0
    if found:
        return SearchOutcome(COUNTEREXAMPLE, Coloring(r, tuple(colors)), stats)
    return SearchOutcome(ARROW_HOLDS, None, stats)


def _solve_exhaustive(problem: AvoidanceProblem, chunk: int = 1 << 17) -> SearchOutcome:
    t0 = time.perf_counter()
    n = problem.cfg.n_points
    r = problem.r
    total = r**n
    if total > EXHAUSTIVE_LIMIT:
        raise SearchLimitError(
            f"exhaustive engine needs r^N <= {EXHAUSTIVE_LIMIT}, got {r}^{n} = {total}"
        )
    stats = SearchStats(engine="exhaustive", max_depth=n)
    order = assignment_order(problem)
    # digit j of the enumeration index colors point order[j]; most significant
    # digit first, so index order is lexicographic in assignment order
    divisors = np.array([r ** (n - 1 - j) for j in range(n)], dtype=np.int64)
    mono_pairs = [(seg.p, seg.q) for seg in problem.mono_forbidden]
    quads = [rect.corners for rect in problem.rainbow_forbidden]
    pos = {p: j for j, p in enumerate(order)}

    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        idx = np.arange(start, stop, dtype=np.int64)
        digits = (idx[:, None] // divisors[None, :]) % r
        cols = np.empty_like(digits)
        for p in range(n):
            cols[:, p] = digits[:, pos[p]]
        ok = np.ones(len(idx), dtype=bool)
        for p, q in mono_pairs:
            np.logical_and(ok, cols[:, p] != cols[:, q], out=ok)
        for p1, p2, p3, p4 in quads:
            rainbow = (
                (cols[:, p1] != cols[:, p2])
                & (cols[:, p1] != cols[:, p3])
                & (cols[:, p1] != cols[:, p4])
                & (cols[:, p2] != cols[:, p3])
                & (cols[:, p2] != cols[:, p4])
                & (cols[:, p3] != cols[:, p4])
            )
            np.logical_and(ok, ~rainbow, out=ok)
        if ok.any():
            first = int(np.argmax(ok))
            stats.nodes += first + 1
            stats.wall_time_s = time.perf_counter() - t0
            coloring = Coloring(r, tuple(int(c) for c in cols[first]))
            return SearchOutcome(COUNTEREXAMPLE, coloring, stats)
        stats.nodes += stop - start
    stats.wall_time_s = time.perf_counter() - t0
    return SearchOutcome(ARROW_HOLDS, None, stats)
