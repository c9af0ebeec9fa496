"""Cluster neighbourhoods in diversity space.

The level-t cluster neighbourhood of v (toward an ambient set) collects the
vertices whose restricted-neighbourhood Hamming distance to v is at most
(4^t / scale) * deg(v in ambient). The moment of v is the first level where
one more level grows by less than the growth factor; the cluster is the
neighbourhood at that level and the halo is one level higher.

Vertices with zero ambient degree are degenerate: every threshold vanishes
and the cluster collapses to the exact-twin set. They are flagged and callers
exclude them from moment-based pipelines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConstructionError, PreconditionError
from .graphs import Graph, VertexSet, diversity_block, diversity_row
from .oracles import turan_independent_set


@dataclass(frozen=True)
class ClusterParams:
    scale: float  # diversity-threshold divisor, > 1
    growth: float  # stopping ratio between consecutive levels, > 1
    ambient: VertexSet

    def __post_init__(self):
        if not self.scale > 1:
            raise PreconditionError("cluster scale must exceed 1")
        if not self.growth > 1:
            raise PreconditionError("cluster growth must exceed 1")


@dataclass(frozen=True)
class ClusterView:
    vertex: int
    moment: int
    w_star: VertexSet
    w_plus: VertexSet
    level_sizes: tuple[int, ...]  # |W_0| .. |W_{moment+1}|
    ambient_degree: int
    degenerate: bool


def _threshold(t: int, ambient_degree: int, scale: float) -> float:
    return (4.0**t / scale) * ambient_degree


def cluster_neighbourhood(g: Graph, v: int, t: int, params: ClusterParams) -> VertexSet:
    """Vertices whose diversity to v inside the ambient set is below the level-t
    threshold; always contains v."""
    if t < 0:
        raise PreconditionError("cluster level must be >= 0")
    divs = diversity_row(g, v, params.ambient)
    thresh = _threshold(t, g.degree_within(v, params.ambient), params.scale)
    return VertexSet.from_bools(divs <= thresh)


def theta_moment(g: Graph, v: int, params: ClusterParams,
                 _divs: Optional[np.ndarray] = None) -> ClusterView:
    """Cluster view of v: moment, cluster, halo and the level size profile."""
    divs = diversity_row(g, v, params.ambient) if _divs is None else _divs
    deg = g.degree_within(v, params.ambient)
    sorted_divs = np.sort(divs)
    n = g.n

    def level_count(t: int) -> int:
        return int(np.searchsorted(sorted_divs, _threshold(t, deg, params.scale), side="right"))

    sizes = [level_count(0)]
    t = 0
    while True:
        nxt = level_count(t + 1)
        sizes.append(nxt)
        if nxt <= params.growth * sizes[t]:
            break
        t += 1
        if sizes[-1] >= n:
            # one more level cannot grow, the ratio test passes next round
            sizes.append(n)
            t = len(sizes) - 2
            break
    moment = t
    w_star = VertexSet.from_bools(divs <= _threshold(moment, deg, params.scale))
    w_plus = VertexSet.from_bools(divs <= _threshold(moment + 1, deg, params.scale))
    return ClusterView(vertex=v, moment=moment, w_star=w_star, w_plus=w_plus,
                       level_sizes=tuple(sizes[: moment + 2]), ambient_degree=deg,
                       degenerate=(deg == 0))


def all_cluster_views(g: Graph, params: ClusterParams) -> list[ClusterView]:
    """Views for every vertex, cached on the graph (it is immutable)."""
    key = ("views", params.scale, params.growth, params.ambient.mask)
    cached = g._caches.get(key)
    if cached is None:
        cached = [theta_moment(g, v, params) for v in range(g.n)]
        g._caches[key] = cached
    return cached


def verify_cluster_view(g: Graph, view: ClusterView, params: ClusterParams) -> list[str]:
    """Recheck the structural cluster facts through the slow int-popcount path.

    Returns human-readable violations (empty list = all hold):
    nesting of consecutive levels, growth^moment lower bound on the cluster,
    the moment log bound, and the one-level growth cap on the halo.
    """
    v = view.vertex
    amb = params.ambient.mask
    divs = [0 if u == v else ((g.row(u) ^ g.row(v)) & amb).bit_count() for u in range(g.n)]
    deg = (g.row(v) & amb).bit_count()
    problems = []
    if deg != view.ambient_degree:
        problems.append(f"ambient degree mismatch for {v}")

    def level_mask(t: int) -> int:
        thresh = _threshold(t, deg, params.scale)
        mask = 0
        for u, d in enumerate(divs):
            if d <= thresh:
                mask |= 1 << u
        return mask

    prev = None
    for t in range(view.moment + 2):
        cur = level_mask(t)
        if prev is not None and prev & ~cur:
            problems.append(f"level {t - 1} not nested in level {t} for vertex {v}")
        prev = cur
    star = level_mask(view.moment)
    plus = level_mask(view.moment + 1)
    if star != view.w_star.mask:
        problems.append(f"cluster mask mismatch for {v}")
    if plus != view.w_plus.mask:
        problems.append(f"halo mask mismatch for {v}")
    if star & ~plus:
        problems.append(f"cluster not nested in halo for {v}")
    if star.bit_count() < params.growth**view.moment - 1e-9:
        problems.append(f"cluster of {v} smaller than growth^moment")
    amb_size = params.ambient.card
    if amb_size >= 1 and view.moment > math.log(max(amb_size, 1)) / math.log(params.growth) + 1e-9:
        problems.append(f"moment of {v} exceeds log_growth(ambient size)")
    if plus.bit_count() > params.growth * star.bit_count() + 1e-9:
        problems.append(f"halo of {v} exceeds growth * cluster")
    # moment minimality: every earlier level grows by more than the factor
    sizes = [level_mask(t).bit_count() for t in range(view.moment + 2)]
    for t in range(view.moment):
        if sizes[t + 1] <= params.growth * sizes[t]:
            problems.append(f"moment of {v} is not minimal (level {t} already stalls)")
    return problems


@dataclass(frozen=True)
class BoundVerdict:
    applicable: bool
    reason: str
    holds: Optional[bool]
    measured: int
    bound: float


def check_cluster_bound(g: Graph, v: int, t: int, params: ClusterParams) -> BoundVerdict:
    """Level size against twice the max degree, valid for t < log4(scale) - 1
    and non-degenerate v."""
    measured = cluster_neighbourhood(g, v, t, params).card
    bound = 2.0 * g.max_degree()
    if g.degree_within(v, params.ambient) == 0:
        return BoundVerdict(False, "degenerate vertex (zero ambient degree)", None, measured, bound)
    if not t < math.log(params.scale, 4) - 1:
        return BoundVerdict(False, f"level {t} >= log4(scale) - 1", None, measured, bound)
    return BoundVerdict(True, "", measured <= bound, measured, bound)


@dataclass(frozen=True)
class DisjointnessVerdict:
    applicable: bool
    route: Optional[str]  # "degree-ordered" or "mutual"
    holds: Optional[bool]
    intersection: int


def check_disjointness(g: Graph, v1: int, t1: int, v2: int, t2: int,
                       params: ClusterParams) -> DisjointnessVerdict:
    """Two cluster neighbourhoods are disjoint when one center is outside the
    other's next level and the scaled degrees are ordered (or the exclusion is
    mutual). Hypothesis failures report inapplicable, not false."""
    if v1 == v2:
        raise PreconditionError("need two distinct centers")
    d1 = g.degree_within(v1, params.ambient)
    d2 = g.degree_within(v2, params.ambient)
    div12 = ((g.row(v1) ^ g.row(v2)) & params.ambient.mask).bit_count()
    out2 = div12 > _threshold(t1 + 1, d1, params.scale)  # v2 outside W_{t1+1}(v1)
    out1 = div12 > _threshold(t2 + 1, d2, params.scale)
    route = None
    if out2 and 3.0 * 4.0**t1 * d1 >= 4.0**t2 * d2:
        route = "degree-ordered"
    elif out1 and 3.0 * 4.0**t2 * d2 >= 4.0**t1 * d1:
        route = "degree-ordered"
    elif out1 and out2:
        route = "mutual"
    if route is None:
        return DisjointnessVerdict(False, None, None, -1)
    w1 = cluster_neighbourhood(g, v1, t1, params)
    w2 = cluster_neighbourhood(g, v2, t2, params)
    inter = (w1 & w2).card
    return DisjointnessVerdict(True, route, inter == 0, inter)


def extract_diverse_set(g: Graph, candidates: VertexSet, t: int, d: float,
                        params: ClusterParams) -> VertexSet:
    """Pull a pairwise-diverse subset out of candidates whose clusters are small.

    Requires every candidate to have level-t cluster size at most n/|candidates|
    and ambient degree at least d. Pairs closer than 4^t * d / scale become
    edges of an auxiliary graph; a greedy independent set of it is returned,
    after re-verifying both the size bound and the pairwise diversity floor.
    """
    n = g.n
    members = candidates.members()
    m = len(members)
    if m < 1:
        raise PreconditionError("candidate set is empty")
    thresh = 4.0**t * d / params.scale
    for v in members:
        w_card = cluster_neighbourhood(g, v, t, params).card
        if w_card * m > n:
            raise PreconditionError(f"vertex {v}: cluster size {w_card} exceeds n/|candidates|")
        if g.degree_within(v, params.ambient) < d:
            raise PreconditionError(f"vertex {v}: ambient degree below {d}")
    div = diversity_block(g, members, params.ambient)
    edges = []
    for i in range(m):
        for j in range(i + 1, m):
            if div[i, j] < thresh:
                edges.append((i, j))
    aux = Graph.from_edges(m, edges) if m > 1 else Graph.from_edges(1, [])
    picked = turan_independent_set(aux)
    out = VertexSet.from_members(n, (members[i] for i in picked))
    # independent re-verification through the int path
    chosen = out.members()
    for a in range(len(chosen)):
        for b in range(a + 1, len(chosen)):
            pair_div = ((g.row(chosen[a]) ^ g.row(chosen[b])) & params.ambient.mask).bit_count()
            if pair_div < thresh:
                raise ConstructionError(
                    f"extracted pair ({chosen[a]},{chosen[b]}) below diversity floor")
    delta = m / n
    if out.card < delta * m / 2.0 - 1e-9:
        raise ConstructionError(f"extracted set of {out.card} below the size floor {delta * m / 2:.3f}")
    return out
