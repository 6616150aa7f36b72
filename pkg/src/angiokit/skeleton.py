"""Centerline extraction: thinning, point classification, spur pruning.

The pruning contract reads the branch-removal rule as classic spur removal
(drop endpoint branches *shorter* than the threshold). ``literal=True``
inverts the comparison to remove branches at or above the threshold instead,
for fidelity experiments; both modes retain the bifurcation point.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EmptyMaskError, NotAPathError
from .raster import Mask, Point

_OFFSETS8 = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))

DEFAULT_MIN_BRANCH = 25


@dataclass(frozen=True)
class Skeleton:
    """One-pixel-wide centerline structure as a point set."""

    points: frozenset[Point]
    width: int
    height: int

    def __len__(self) -> int:
        return len(self.points)

    def as_mask(self) -> Mask:
        grid = np.zeros((self.height, self.width), dtype=bool)
        for p in self.points:
            grid[p.y, p.x] = True
        return Mask(grid)

    def adjacency(self) -> dict[Point, list[Point]]:
        """8-neighbor adjacency among skeleton points, neighbor lists sorted by (y, x)."""
        pts = self.points
        adj = {}
        for p in pts:
            nbrs = [Point(p.x + dx, p.y + dy) for dx, dy in _OFFSETS8 if Point(p.x + dx, p.y + dy) in pts]
            nbrs.sort(key=lambda q: (q.y, q.x))
            adj[p] = nbrs
        return adj


@dataclass(frozen=True)
class Centerline:
    """Ordered simple path from one endpoint to the other."""

    points: tuple[Point, ...]

    def __len__(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        """(N, 2) float64 array of (x, y) coordinates."""
        return np.array([(p.x, p.y) for p in self.points], dtype=np.float64)

    def to_csv(self) -> str:
        lines = ["x,y"] + [f"{p.x},{p.y}" for p in self.points]
        return "\n".join(lines) + "\n"


def thin(mask: Mask, backend: str | None = None) -> Skeleton:
    """Reduce a mask to a one-pixel-wide skeleton by Zhang-Suen thinning.

    The result is a fixed point: running another thinning pass deletes
    nothing. Raises EmptyMaskError on an all-background mask.
    """
    if mask.count() == 0:
        raise EmptyMaskError("cannot thin an empty mask")
    grid = kernels.thin_grid(mask.pixels.astype(np.uint8), backend=backend)
    ys, xs = np.nonzero(grid)
    pts = frozenset(Point(int(x), int(y)) for x, y in zip(xs, ys))
    return Skeleton(pts, mask.width, mask.height)


def classify_points(s: Skeleton) -> tuple[list[Point], list[Point]]:
    """Split skeleton points into endpoints (1 neighbor) and bifurcations (>= 3).

    Isolated points (0 neighbors) are reported as endpoints. Lists are sorted
    by (y, x).
    """
    if not s.points:
        raise EmptyMaskError("cannot classify an empty skeleton")
    adj = s.adjacency()
    endpoints = [p for p, nbrs in adj.items() if len(nbrs) <= 1]
    bifurcations = [p for p, nbrs in adj.items() if len(nbrs) >= 3]
    endpoints.sort(key=lambda p: (p.y, p.x))
    bifurcations.sort(key=lambda p: (p.y, p.x))
    return endpoints, bifurcations


_RING_ORDER = ((0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1))


def limb_count(points: frozenset[Point] | set[Point], p: Point) -> int:
    """Number of locally distinct limbs at p: foreground runs in its 8-ring.

    Thinning leaves staircase pixels with 3 raw neighbors that are not real
    branch points; two of their neighbors touch each other and form a single
    run. A true junction has >= 3 separate runs.
    """
    ring = [Point(p.x + dx, p.y + dy) in points for dx, dy in _RING_ORDER]
    return sum(1 for i in range(8) if not ring[i] and ring[(i + 1) % 8])


def _trace_branch(
    pts: frozenset[Point] | set[Point],
    adj: dict[Point, list[Point]],
    endpoint: Point,
) -> tuple[list[Point], Point | None]:
    """Walk from an endpoint until the nearest true junction (>= 3 limbs).

    Returns (walked points, junction), with junction None when the walk ran
    to the other end of a pure path. Staircase pixels with an extra raw
    neighbor are walked through, not treated as bifurcations.
    """
    walked = [endpoint]
    seen = {endpoint}
    current = endpoint
    while True:
        nxt = [q for q in adj[current] if q not in seen]
        if not nxt:
            return walked, None
        junctions = [q for q in nxt if limb_count(pts, q) >= 3]
        if junctions:
            return walked, junctions[0]
        walked.append(nxt[0])
        seen.add(nxt[0])
        current = nxt[0]


def prune(s: Skeleton, min_branch: int = DEFAULT_MIN_BRANCH, literal: bool = False) -> Skeleton:
    """Remove endpoint spurs, iterating to a fixed point.

    A branch runs from an endpoint to the nearest true junction (a point
    with >= 3 limbs, see limb_count). Default mode removes it when its
    removable length (endpoint up to, not including, the junction) is
    < min_branch; literal mode removes it when the point count including
    endpoint and junction is >= min_branch. The junction is retained either
    way, and isolated points are always dropped.
    """
    if not s.points:
        raise EmptyMaskError("cannot prune an empty skeleton")
    pts = set(s.points)

    # Removing one spur can demote a bifurcation to an ordinary path point and
    # merge branches, so adjacency is rebuilt after every removal.
    changed = True
    while changed and pts:
        changed = False
        adj = Skeleton(frozenset(pts), s.width, s.height).adjacency()

        isolated = [p for p, n in adj.items() if not n]
        if isolated:
            pts.difference_update(isolated)
            changed = True
            continue

        endpoints = sorted((p for p, n in adj.items() if len(n) == 1), key=lambda p: (p.y, p.x))
        frozen = frozenset(pts)
        for e in endpoints:
            walked, bif = _trace_branch(frozen, adj, e)
            if bif is None:
                continue
            if literal:
                remove = len(walked) + 1 >= min_branch
            else:
                remove = len(walked) < min_branch
            if remove:
                pts.difference_update(walked)
                changed = True
                break

    return Skeleton(frozenset(pts), s.width, s.height)


def _farthest_from(adj: dict[Point, list[Point]], start: Point) -> Point:
    """BFS-farthest point from start; ties broken by (y, x)."""
    dist = {start: 0}
    queue = deque([start])
    far, far_d = start, 0
    while queue:
        p = queue.popleft()
        for q in adj[p]:
            if q not in dist:
                dist[q] = dist[p] + 1
                if dist[q] > far_d or (dist[q] == far_d and (q.y, q.x) < (far.y, far.x)):
                    far, far_d = q, dist[q]
                queue.append(q)
    return far


def _bfs_path(adj: dict[Point, list[Point]], start: Point, goal: Point) -> list[Point] | None:
    """Shortest 8-connected path start->goal; None if unreachable."""
    parent: dict[Point, Point | None] = {start: None}
    queue = deque([start])
    while queue:
        p = queue.popleft()
        if p == goal:
            path = [p]
            while parent[p] is not None:
                p = parent[p]
                path.append(p)
            path.reverse()
            return path
        for q in adj[p]:
            if q not in parent:
                parent[q] = p
                queue.append(q)
    return None


def longest_path(s: Skeleton) -> Skeleton:
    """Keep only the longest endpoint-to-endpoint path of the skeleton.

    Paths are shortest paths between endpoint pairs over the skeleton graph;
    the returned point set is a chord-free simple path (any chord would have
    produced a shorter path), so it always orders cleanly.
    """
    if not s.points:
        raise EmptyMaskError("cannot extract a path from an empty skeleton")
    adj = s.adjacency()
    endpoints = sorted((p for p, n in adj.items() if len(n) <= 1), key=lambda p: (p.y, p.x))
    if len(endpoints) < 2:
        if len(s.points) == 1:
            return s
        # No degree-1 tips (e.g. staircase triangles at the ends): fall back
        # to the farthest pair found by a double BFS sweep.
        start = min(s.points, key=lambda p: (p.y, p.x))
        u = _farthest_from(adj, start)
        v = _farthest_from(adj, u)
        best = _bfs_path(adj, u, v)
        if best is None or len(best) < 2:
            raise NotAPathError("skeleton has no traceable endpoint-to-endpoint path")
        return Skeleton(frozenset(best), s.width, s.height)

    best: list[Point] | None = None
    for i, a in enumerate(endpoints):
        for b in endpoints[i + 1 :]:
            path = _bfs_path(adj, a, b)
            if path is not None and (best is None or len(path) > len(best)):
                best = path
    if best is None:
        raise NotAPathError("no endpoint pair is connected")
    return Skeleton(frozenset(best), s.width, s.height)


def to_single_path(s: Skeleton) -> Skeleton:
    """Reduce a pruned skeleton to a single simple path if it is not one already."""
    endpoints, bifurcations = classify_points(s)
    if len(endpoints) == 2 and not bifurcations:
        return s
    return longest_path(s)


def order_centerline(s: Skeleton) -> Centerline:
    """Order a single-path skeleton from the (y, x)-smaller endpoint to the other.

    Raises NotAPathError when the skeleton has bifurcations, does not have
    exactly two endpoints, or the walk cannot cover every point.
    """
    endpoints, bifurcations = classify_points(s)
    if bifurcations:
        raise NotAPathError(f"skeleton has {len(bifurcations)} bifurcation(s)")
    if len(endpoints) != 2:
        raise NotAPathError(f"skeleton has {len(endpoints)} endpoint(s), need exactly 2")

    adj = s.adjacency()
    start = min(endpoints, key=lambda p: (p.y, p.x))
    ordered = [start]
    seen = {start}
    current = start
    while True:
        nxt = [q for q in adj[current] if q not in seen]
        if not nxt:
            break
        if len(nxt) > 1:
            raise NotAPathError(f"ambiguous walk at {current}")
        current = nxt[0]
        ordered.append(current)
        seen.add(current)
    if len(ordered) != len(s.points):
        raise NotAPathError(f"walk covered {len(ordered)} of {len(s.points)} points")
    return Centerline(tuple(ordered))


def centerline_from_mask(
    mask: Mask,
    min_branch: int = DEFAULT_MIN_BRANCH,
    literal: bool = False,
    backend: str | None = None,
) -> Centerline:
    """Full chain: largest component -> thin -> prune -> single path -> order."""
    from .raster import largest_component

    blob = largest_component(mask)
    sk = prune(thin(blob, backend=backend), min_branch=min_branch, literal=literal)
    if not sk.points:
        raise EmptyMaskError("skeleton vanished during pruning")
    return order_centerline(to_single_path(sk))
