"""Point configurations and congruent-copy enumeration.

Builders for the three configuration families used throughout:

* ``build_simplex`` -- S_n(x), n points pairwise at distance x;
* ``build_path``    -- B_t(x, y), a planar chain of t edges of length y whose
  endpoints are at distance x, realized on a circular arc;
* ``product``      -- Cartesian products with coordinate concatenation.

Coordinates are double precision.  Every pattern predicate compares squared
distances against squared target bounds, and every enumeration returns
lexicographically sorted output, so repeated runs are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

PointId = int
Pair = tuple[int, int]

DEFAULT_EPS = 1e-9
_CHORD_THETA_TOL = 1e-13
_CHORD_MAX_ITER = 200


class GeometryError(ValueError):
    """Invalid parameters or a violated construction contract."""


class NoRootError(GeometryError):
    """The chord-ratio equation has no root on the search bracket."""


class GeneralPositionError(GeometryError):
    """A non-designated pair landed on a designated distance."""

    def __init__(self, message: str, pair: Pair | None = None, theta: float | None = None):
        super().__init__(message)
        self.pair = pair
        self.theta = theta


@dataclass(frozen=True)
class DesignatedPairs:
    """One role's declared length together with the pairs carrying it."""

    length: float | None
    pairs: tuple[Pair, ...]

    def __post_init__(self) -> None:
        for p, q in self.pairs:
            if not 0 <= p < q:
                raise GeometryError(f"designated pair ({p},{q}) is not ordered")


@dataclass(frozen=True, eq=False)
class Configuration:
    """An immutable finite point set with role-tagged pair designations."""

    dim: int
    points: np.ndarray
    side_a: DesignatedPairs
    side_b: DesignatedPairs
    provenance: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise GeometryError(
                f"points must be an (n, {self.dim}) array, got shape {pts.shape}"
            )
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        n = pts.shape[0]
        for side in (self.side_a, self.side_b):
            for p, q in side.pairs:
                if q >= n:
                    raise GeometryError(f"designated pair ({p},{q}) out of range for n={n}")

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def squared_distance(self, p: PointId, q: PointId) -> float:
        diff = self.points[p] - self.points[q]
        return float(diff @ diff)

    def distance(self, p: PointId, q: PointId) -> float:
        return math.sqrt(self.squared_distance(p, q))

    def squared_distance_matrix(self) -> np.ndarray:
        return squared_distance_matrix(self.points)


@dataclass(frozen=True, order=True)
class SegmentCopy:
    """An unordered point pair realizing one of the designated lengths."""

    p: PointId
    q: PointId
    length_role: str = "a"

    def __post_init__(self) -> None:
        if not 0 <= self.p < self.q:
            raise GeometryError(f"segment ({self.p},{self.q}) is not ordered")
        if self.length_role not in ("a", "b"):
            raise GeometryError(f"unknown length role {self.length_role!r}")

    @property
    def pair(self) -> Pair:
        return (self.p, self.q)


@dataclass(frozen=True, order=True)
class RectangleCopy:
    """Corner ids (p1, p2, p3, p4): p1-p2 and p3-p4 are the side-a edges,
    p1-p3 and p2-p4 the side-b edges, p1-p4 and p2-p3 the diagonals.

    Canonical ordering: p1 is the least corner id, and for squares the two
    neighbors of p1 are ordered p2 < p3.
    """

    corners: tuple[int, int, int, int]

    def __post_init__(self) -> None:
        if len(set(self.corners)) != 4:
            raise GeometryError(f"rectangle corners {self.corners} are not distinct")
        if min(self.corners) != self.corners[0]:
            raise GeometryError(f"corners {self.corners} not canonical: p1 must be least")

    @property
    def side_a_edges(self) -> tuple[Pair, Pair]:
        p1, p2, p3, p4 = self.corners
        return (_ordered(p1, p2), _ordered(p3, p4))

    @property
    def side_b_edges(self) -> tuple[Pair, Pair]:
        p1, p2, p3, p4 = self.corners
        return (_ordered(p1, p3), _ordered(p2, p4))

    @property
    def diagonals(self) -> tuple[Pair, Pair]:
        p1, p2, p3, p4 = self.corners
        return (_ordered(p1, p4), _ordered(p2, p3))


def _ordered(p: int, q: int) -> Pair:
    return (p, q) if p < q else (q, p)


def squared_distance_matrix(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _squared_bounds(length: float, eps: float) -> tuple[float, float]:
    lo = max(length - eps, 0.0)
    return lo * lo, (length + eps) * (length + eps)


def _within(d2: float, length: float, eps: float) -> bool:
    lo, hi = _squared_bounds(length, eps)
    return lo <= d2 <= hi


def _pairs_at_length(points: np.ndarray, length: float, eps: float) -> tuple[Pair, ...]:
    """All unordered pairs whose distance is within eps of length, in lex order."""
    n = points.shape[0]
    if n < 2:
        return ()
    d2 = squared_distance_matrix(points)
    lo, hi = _squared_bounds(length, eps)
    iu, ju = np.triu_indices(n, k=1)
    vals = d2[iu, ju]
    mask = (vals >= lo) & (vals <= hi)
    return tuple((int(i), int(j)) for i, j in zip(iu[mask], ju[mask]))


# ---------------------------------------------------------------------------
# builders


def build_simplex(n: int, side: float) -> Configuration:
    """S_n(side): n points pairwise at distance side, embedded as scaled
    standard basis vectors (side/sqrt(2) * e_i) in ambient dimension n."""
    if n < 2:
        raise GeometryError(f"simplex needs n >= 2 points, got {n}")
    if side <= 0:
        raise GeometryError(f"simplex side must be positive, got {side}")
    pts = np.eye(n) * (side / math.sqrt(2.0))
    pairs = tuple((i, j) for i in range(n) for j in range(i + 1, n))
    return Configuration(
        dim=n,
        points=pts,
        side_a=DesignatedPairs(side, pairs),
        side_b=DesignatedPairs(None, ()),
        provenance={"kind": "simplex", "n": n, "side": side},
    )


def _chord_ratio(theta: float, t: int) -> float:
    return math.sin(t * theta / 2.0) / math.sin(theta / 2.0)


def _solve_step_angle(t: int, ratio: float) -> float:
    """Solve sin(t*theta/2)/sin(theta/2) = ratio for theta in (0, 2*pi/t).

    The ratio function is strictly decreasing from t to 0 on the bracket, so
    plain bisection converges; we run it to the floating-point fixpoint
    (well inside the 1e-13 contract).
    """
    lo = 1e-12
    hi = 2.0 * math.pi / t - 1e-12
    f_lo = _chord_ratio(lo, t) - ratio
    f_hi = _chord_ratio(hi, t) - ratio
    if f_lo <= 0.0 or f_hi >= 0.0:
        raise NoRootError(
            f"chord equation has no root for t={t}, x/y={ratio}: "
            f"bracket values {f_lo + ratio:.6g}..{f_hi + ratio:.6g}"
        )
    for _ in range(_CHORD_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= _CHORD_THETA_TOL:
            break
        if _chord_ratio(mid, t) - ratio > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def build_path(t: int, endpoint: float, edge: float, eps: float = DEFAULT_EPS) -> Configuration:
    """B_t(endpoint, edge): t+1 coplanar points v_0..v_t with consecutive
    distances ``edge`` and endpoint distance ``endpoint``.

    The points sit on a circular arc: the step angle theta solves
    sin(t*theta/2)/sin(theta/2) = endpoint/edge and the radius is
    edge / (2*sin(theta/2)).  Requires t >= max(2, ceil(endpoint/edge)) and
    endpoint != t*edge (collinear limit).  After construction, every
    non-designated pair is checked to stay eps away from both designated
    lengths; violation raises GeneralPositionError.
    """
    x, y = float(endpoint), float(edge)
    if x <= 0 or y <= 0:
        raise GeometryError(f"path lengths must be positive, got x={x}, y={y}")
    t_min = max(2, math.ceil(x / y))
    if t < t_min:
        raise GeometryError(f"path needs t >= max(2, ceil(x/y)) = {t_min}, got t={t}")
    if x == t * y:
        raise GeometryError(f"degenerate collinear path: endpoint == t*edge == {x}")
    theta = _solve_step_angle(t, x / y)
    radius = y / (2.0 * math.sin(theta / 2.0))
    angles = theta * np.arange(t + 1)
    pts = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)

    consecutive = tuple((i, i + 1) for i in range(t))
    side_a = DesignatedPairs(x, ((0, t),))
    side_b = DesignatedPairs(y, consecutive)
    cfg = Configuration(
        dim=2,
        points=pts,
        side_a=side_a,
        side_b=side_b,
        provenance={"kind": "path", "t": t, "endpoint": x, "edge": y, "theta": theta},
    )

    d2 = cfg.squared_distance_matrix()
    if not _within(d2[0, t], x, 1e-9 * x):
        raise GeometryError(
            f"endpoint distance {math.sqrt(d2[0, t]):.17g} drifted from {x} after solving theta"
        )
    for i, j in consecutive:
        if not _within(d2[i, j], y, 1e-9 * y):
            raise GeometryError(f"edge ({i},{j}) drifted from {y} after solving theta")
    designated = {(0, t), *consecutive}
    for i in range(t + 1):
        for j in range(i + 1, t + 1):
            if (i, j) in designated:
                continue
            for target in (x, y):
                if _within(d2[i, j], target, eps):
                    raise GeneralPositionError(
                        f"non-designated pair ({i},{j}) of B_{t}({x},{y}) lies at "
                        f"distance {math.sqrt(d2[i, j]):.17g} ~ {target} (theta={theta:.17g})",
                        pair=(i, j),
                        theta=theta,
                    )
    return cfg


def product(left: Configuration, right: Configuration, a: float, b: float,
            eps: float = DEFAULT_EPS) -> Configuration:
    """Cartesian product by coordinate concatenation; point (i, j) gets id
    i*|right| + j.  Designated pairs are re-derived by scanning all pairs
    against a and b (never inherited), so accidental coincidences on product
    diagonals are caught rather than silently missed."""
    nl, nr = left.n_points, right.n_points
    pts = np.hstack(
        [np.repeat(left.points, nr, axis=0), np.tile(right.points, (nl, 1))]
    )
    return Configuration(
        dim=left.dim + right.dim,
        points=pts,
        side_a=DesignatedPairs(a, _pairs_at_length(pts, a, eps)),
        side_b=DesignatedPairs(b, _pairs_at_length(pts, b, eps)),
        provenance={
            "kind": "product",
            "a": a,
            "b": b,
            "left_points": nl,
            "right_points": nr,
            "left": left.provenance,
            "right": right.provenance,
        },
    )


def from_points(points: Sequence[Sequence[float]] | np.ndarray,
                a: float | None = None, b: float | None = None,
                eps: float = DEFAULT_EPS) -> Configuration:
    """Explicit configuration; designated pairs scanned from coordinates."""
    pts = np.asarray(points, dtype=float)
    side_a = DesignatedPairs(a, _pairs_at_length(pts, a, eps) if a is not None else ())
    side_b = DesignatedPairs(b, _pairs_at_length(pts, b, eps) if b is not None else ())
    return Configuration(
        dim=pts.shape[1],
        points=pts,
        side_a=side_a,
        side_b=side_b,
        provenance={"kind": "explicit"},
    )


# ---------------------------------------------------------------------------
# enumeration


def _role_for_length(cfg: Configuration, length: float, eps: float) -> str:
    if cfg.side_a.length is not None and abs(length - cfg.side_a.length) <= eps:
        return "a"
    if cfg.side_b.length is not None and abs(length - cfg.side_b.length) <= eps:
        return "b"
    return "a"


def find_segments(cfg: Configuration, length: float, eps: float = DEFAULT_EPS) -> list[SegmentCopy]:
    """All unordered pairs at the given length (within eps), lex sorted."""
    if length <= 0:
        raise GeometryError(f"segment length must be positive, got {length}")
    role = _role_for_length(cfg, length, eps)
    return [SegmentCopy(p, q, role) for p, q in _pairs_at_length(cfg.points, length, eps)]


def find_rectangles(cfg: Configuration, a: float, b: float,
                    eps: float = DEFAULT_EPS) -> list[RectangleCopy]:
    """All canonical rectangles with side lengths a and b (within eps).

    Enumeration joins side-a pairs with compatible side-b pairs and then
    checks both diagonals against sqrt(a^2 + b^2); since all six pairwise
    distances are constrained, a match is congruent to the a-by-b rectangle.
    """
    if a <= 0 or b <= 0:
        raise GeometryError(f"rectangle sides must be positive, got a={a}, b={b}")
    d2 = cfg.squared_distance_matrix()
    a_pairs = _pairs_at_length(cfg.points, a, eps)
    b_pairs = _pairs_at_length(cfg.points, b, eps)
    a_adj: dict[int, set[int]] = {}
    b_adj: dict[int, set[int]] = {}
    for pairs, adj in ((a_pairs, a_adj), (b_pairs, b_adj)):
        for p, q in pairs:
            adj.setdefault(p, set()).add(q)
            adj.setdefault(q, set()).add(p)
    diag_lo, diag_hi = _squared_bounds(math.hypot(a, b), eps)
    square_like = abs(a - b) <= 2 * eps

    found: set[tuple[int, int, int, int]] = set()
    for p, q in a_pairs:
        for u in b_adj.get(p, ()):
            if u == q:
                continue
            for v in b_adj.get(q, ()) & a_adj.get(u, set()):
                if v == p or v == u:
                    continue
                if not (diag_lo <= d2[p, v] <= diag_hi and diag_lo <= d2[q, u] <= diag_hi):
                    continue
                found.add(_canonical_corners(p, q, u, v, square_like))
    return sorted(RectangleCopy(c) for c in found)


def _canonical_corners(p: int, q: int, u: int, v: int, square_like: bool) -> tuple[int, int, int, int]:
    # roles: p-q and u-v are side-a edges, p-u and q-v side-b, p-v and q-u diagonals
    a_partner = {p: q, q: p, u: v, v: u}
    b_partner = {p: u, u: p, q: v, v: q}
    d_partner = {p: v, v: p, q: u, u: q}
    m = min(p, q, u, v)
    p2, p3 = a_partner[m], b_partner[m]
    if square_like and p3 < p2:
        p2, p3 = p3, p2
    return (m, p2, p3, d_partner[m])


def rectangle_matches_pattern(points: np.ndarray, corners: Sequence[int],
                              a: float, b: float, eps: float = DEFAULT_EPS) -> bool:
    """True when corners (p1, p2, p3, p4) realize the a-by-b rectangle with
    p1-p2/p3-p4 at one side length and p1-p3/p2-p4 at the other; both role
    assignments (a, b) and (b, a) are accepted so rotated copies validate."""
    if len(corners) != 4 or len(set(corners)) != 4:
        return False
    p1, p2, p3, p4 = corners
    d2 = squared_distance_matrix(points[list(corners)])
    diag = math.hypot(a, b)
    for s1, s2 in ((a, b), (b, a)):
        ok = (
            _within(d2[0, 1], s1, eps)
            and _within(d2[2, 3], s1, eps)
            and _within(d2[0, 2], s2, eps)
            and _within(d2[1, 3], s2, eps)
            and _within(d2[0, 3], diag, eps)
            and _within(d2[1, 2], diag, eps)
        )
        if ok:
            return True
    return False


def count_segments_closed_form(s: int) -> int:
    """Copies of the side-a segment in S_{3s+1}(a) x B_s(a, b):
    (s+1)*C(3s+1, 2) pairs inside simplex columns plus 3s+1 endpoint pairs."""
    if s < 2:
        raise GeometryError(f"closed form needs s >= 2, got {s}")
    return (s + 1) * math.comb(3 * s + 1, 2) + (3 * s + 1)


def affine_rank(cfg: Configuration, subset: Iterable[PointId] | None = None,
                eps: float = DEFAULT_EPS) -> int:
    """Rank of the difference-vector matrix of the subset; singular values
    below eps * (largest singular value) count as zero."""
    ids = list(range(cfg.n_points)) if subset is None else list(subset)
    if not ids:
        raise GeometryError("affine_rank of an empty subset")
    pts = cfg.points[ids]
    diffs = pts[1:] - pts[0]
    if diffs.shape[0] == 0:
        return 0
    sv = np.linalg.svd(diffs, compute_uv=False)
    if sv.size == 0 or sv[0] <= 0.0:
        return 0
    return int(np.sum(sv > eps * sv[0]))


# ---------------------------------------------------------------------------
# JSON form


def config_to_obj(cfg: Configuration) -> dict[str, Any]:
    return {
        "dim": cfg.dim,
        "points": [[float(x) for x in row] for row in cfg.points],
        "side_a": _side_to_obj(cfg.side_a),
        "side_b": _side_to_obj(cfg.side_b),
        "provenance": cfg.provenance,
    }


def _side_to_obj(side: DesignatedPairs) -> dict[str, Any]:
    return {
        "length": None if side.length is None else float(side.length),
        "pairs": [[p, q] for p, q in side.pairs],
    }


def _side_from_obj(obj: dict[str, Any]) -> DesignatedPairs:
    length = obj.get("length")
    pairs = tuple((int(p), int(q)) for p, q in obj.get("pairs", []))
    return DesignatedPairs(None if length is None else float(length), pairs)


def config_from_obj(obj: dict[str, Any], eps: float = DEFAULT_EPS) -> Configuration:
    """Rebuild a configuration from its JSON object, re-validating that every
    designated pair realizes its declared length."""
    try:
        cfg = Configuration(
            dim=int(obj["dim"]),
            points=np.asarray(obj["points"], dtype=float),
            side_a=_side_from_obj(obj["side_a"]),
            side_b=_side_from_obj(obj["side_b"]),
            provenance=dict(obj.get("provenance", {})),
        )
    except (KeyError, TypeError) as exc:
        raise GeometryError(f"malformed configuration object: {exc}") from exc
    for role, side in (("a", cfg.side_a), ("b", cfg.side_b)):
        if side.length is None:
            if side.pairs:
                raise GeometryError(f"side_{role} has pairs but no declared length")
            continue
        for p, q in side.pairs:
            if not _within(cfg.squared_distance(p, q), side.length, eps):
                raise GeometryError(
                    f"designated side_{role} pair ({p},{q}) has distance "
                    f"{cfg.distance(p, q):.17g}, declared {side.length}"
                )
    return cfg
