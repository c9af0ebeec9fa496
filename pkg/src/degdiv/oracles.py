"""Exact and greedy oracles on small graphs.

hom_exact runs a Tomita-style maximum-clique branch and bound with a greedy
colouring bound on int bitsets; the independence number comes from the
complement. f_exact enumerates every nonempty host set, vectorised over
chunks of bitmasks. Both carry practical size guards; exceeding one raises
SizeLimitError rather than silently degrading.

Every returned witness is re-verified against the graph before it leaves
this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, PreconditionError, SizeLimitError
from .graphs import Graph, VertexSet
from .rng import stream

HOM_GUARD_DEFAULT = 128
F_EXACT_GUARD_DEFAULT = 20

# Base-2 logs where the contracts state them explicitly (regularize);
# natural log elsewhere.
LOG2 = math.log2


@dataclass(frozen=True)
class HomResult:
    """Largest homogeneous set: a clique or independent set with its witness."""

    value: int
    witness: VertexSet
    kind: str  # "clique" or "independent"


@dataclass(frozen=True)
class DistinctDegreeWitness:
    """Host set plus marked vertices whose degrees inside the host differ pairwise."""

    host: VertexSet
    marked: VertexSet
    value: int


def _induced_degrees(g: Graph, host_mask: int) -> dict[int, int]:
    degs = {}
    m = host_mask
    while m:
        low = m & -m
        u = low.bit_length() - 1
        degs[u] = (g.row(u) & host_mask).bit_count()
        m ^= low
    return degs


def distinct_degree_count(g: Graph, host: VertexSet) -> int:
    return len(set(_induced_degrees(g, host.mask).values()))


def make_witness(g: Graph, host: VertexSet) -> DistinctDegreeWitness:
    """Mark one vertex per distinct induced degree value (lowest label wins)."""
    degs = _induced_degrees(g, host.mask)
    chosen: dict[int, int] = {}
    for u in sorted(degs):
        chosen.setdefault(degs[u], u)
    marked = VertexSet.from_members(g.n, chosen.values())
    w = DistinctDegreeWitness(host=host, marked=marked, value=marked.card)
    verify_witness(g, w)
    return w


def verify_witness(g: Graph, w: DistinctDegreeWitness) -> None:
    if not w.marked.issubset(w.host):
        raise ConstructionError("witness marked set not inside its host")
    degs = [(g.row(u) & w.host.mask).bit_count() for u in w.marked]
    if len(set(degs)) != len(degs):
        raise ConstructionError("witness marked degrees are not pairwise distinct")
    if w.value != w.marked.card:
        raise ConstructionError("witness value differs from its marked cardinality")


# -- maximum clique -----------------------------------------------------------


def _max_clique_mask(rows: list[int], n: int) -> int:
    # Relabel by degree descending; greedy colouring then bounds tighter.
    order = sorted(range(n), key=lambda v: rows[v].bit_count(), reverse=True)
    pos = {v: i for i, v in enumerate(order)}
    rrows = [0] * n
    for v in range(n):
        m = rows[v]
        new = 0
        while m:
            low = m & -m
            new |= 1 << pos[low.bit_length() - 1]
            m ^= low
        rrows[pos[v]] = new

    best_mask = 0
    best_size = 0

    def expand(cand: int, cur_mask: int, cur_size: int) -> None:
        nonlocal best_mask, best_size
        colour_order: list[int] = []
        colour_bound: list[int] = []
        colour = 0
        rest = cand
        while rest:
            colour += 1
            avail = rest
            while avail:
                low = avail & -avail
                v = low.bit_length() - 1
                avail &= ~rrows[v]
                avail ^= low
                rest ^= low
                colour_order.append(v)
                colour_bound.append(colour)
        p = cand
        for i in range(len(colour_order) - 1, -1, -1):
            if cur_size + colour_bound[i] <= best_size:
                return
            v = colour_order[i]
            vbit = 1 << v
            child = p & rrows[v]
            if child:
                expand(child, cur_mask | vbit, cur_size + 1)
            elif cur_size + 1 > best_size:
                best_size = cur_size + 1
                best_mask = cur_mask | vbit
            p ^= vbit

    expand((1 << n) - 1, 0, 0)
    # map the relabelled clique back to original labels
    out = 0
    m = best_mask
    while m:
        low = m & -m
        out |= 1 << order[low.bit_length() - 1]
        m ^= low
    return out


def _is_clique(g: Graph, mask: int) -> bool:
    m = mask
    while m:
        low = m & -m
        u = low.bit_length() - 1
        if mask & ~(g.row(u) | low):
            return False
        m ^= low
    return True


def hom_exact(g: Graph, guard: int = HOM_GUARD_DEFAULT) -> HomResult:
    """max(clique number, independence number) with a verified witness."""
    if g.n > guard:
        raise SizeLimitError("hom_exact", g.n, guard)
    rows = [g.row(v) for v in range(g.n)]
    clique = _max_clique_mask(rows, g.n)
    comp = g.complement()
    indep = _max_clique_mask([comp.row(v) for v in range(g.n)], g.n)
    if clique.bit_count() >= indep.bit_count():
        mask, kind = clique, "clique"
        ok = _is_clique(g, mask)
    else:
        mask, kind = indep, "independent"
        ok = _is_clique(comp, mask)
    if not ok:
        raise ConstructionError("hom_exact produced a non-homogeneous witness")
    witness = VertexSet(g.n, mask)
    return HomResult(value=witness.card, witness=witness, kind=kind)


# -- exact distinct-degree number ---------------------------------------------


def f_exact(g: Graph, guard: int = F_EXACT_GUARD_DEFAULT) -> DistinctDegreeWitness:
    """Maximum over all hosts of the number of distinct induced degree values.

    Choosing one vertex per value realises the largest subset with pairwise
    distinct degrees, so this equals the distinct-degree number.
    """
    n = g.n
    if n > guard:
        raise SizeLimitError("f_exact", n, guard)
    adj = np.array([g.row(v) for v in range(n)], dtype=np.uint32)
    best_value = 0
    best_mask = 0
    chunk = 1 << 16
    sentinel = np.uint8(255)
    for lo in range(1, 1 << n, chunk):
        hi = min(lo + chunk, 1 << n)
        masks = np.arange(lo, hi, dtype=np.uint32)
        member = (masks[:, None] >> np.arange(n, dtype=np.uint32)[None, :]) & 1
        degs = np.bitwise_count(masks[:, None] & adj[None, :]).astype(np.uint8)
        degs[member == 0] = sentinel
        degs.sort(axis=1)
        valid_next = degs[:, 1:] != sentinel
        distinct = ((np.diff(degs.astype(np.int16), axis=1) != 0) & valid_next).sum(axis=1) + 1
        i = int(np.argmax(distinct))
        if int(distinct[i]) > best_value:
            best_value = int(distinct[i])
            best_mask = int(masks[i])
    return make_witness(g, VertexSet(n, best_mask))


# -- Turan greedy independent set ---------------------------------------------


def turan_independent_set(g: Graph) -> VertexSet:
    """Greedy minimum-degree removal; guaranteed size >= n / (avg degree + 1)."""
    n = g.n
    remaining = list(range(n))
    rem_mask = (1 << n) - 1
    picked = 0
    while remaining:
        idx = np.array(remaining, dtype=np.int64)
        words = VertexSet(n, rem_mask).to_words()
        degs = np.bitwise_count(g.packed[idx] & words).sum(axis=1, dtype=np.int64)
        if degs.sum() == 0:
            picked |= rem_mask
            break
        v = remaining[int(np.argmin(degs))]
        picked |= 1 << v
        rem_mask &= ~(g.row(v) | (1 << v))
        remaining = [u for u in remaining if (rem_mask >> u) & 1]
    out = VertexSet(g.n, picked)
    for u in out:
        if g.row(u) & picked:
            raise ConstructionError("greedy produced a dependent set")
    target = g.n / (g.average_degree() + 1.0)
    if out.card + 1e-9 < target:
        raise ConstructionError(f"greedy independent set of {out.card} below bound {target:.3f}")
    return out


# -- degree regularization ------------------------------------------------------


def regularize(g: Graph, max_rounds: int = 60) -> VertexSet:
    """Find A with |A| >= n/(30 log2 n) whose induced subgraph has
    max degree <= 5 log2 n * min degree.

    Dyadic degree bucketing, re-induced until the ratio certifies. Both
    conditions are rechecked before returning; a near-miss raises instead of
    leaking an uncertified set.
    """
    n = g.n
    if n < 2:
        raise PreconditionError("regularize needs n >= 2")
    ratio_cap = 5.0 * LOG2(n)
    size_floor = n / (30.0 * LOG2(n))
    current = VertexSet.full(n)

    def certified(s: VertexSet) -> bool:
        degs = g.degrees_within(s)[np.array(s.members())]
        lo, hi = int(degs.min()), int(degs.max())
        return hi <= ratio_cap * lo and s.card >= size_floor - 1e-9

    for _ in range(max_rounds):
        if certified(current):
            return current
        members = np.array(current.members())
        degs = g.degrees_within(current)[members]
        levels = np.where(degs > 0, np.floor(np.log2(np.maximum(degs, 1))).astype(np.int64) + 1, 0)
        sizes = np.bincount(levels)
        best_level = int(np.argmax(sizes))
        bucket = VertexSet.from_members(n, members[levels == best_level].tolist())
        if bucket.card < size_floor:
            break
        if bucket == current:
            break
        current = bucket
    if certified(current):
        return current
    # peel low-degree outliers before giving up
    while current.card - 1 >= size_floor:
        members = np.array(current.members())
        degs = g.degrees_within(current)[members]
        current = VertexSet.from_members(n, members[degs != degs.min()].tolist())
        if current.card == 0:
            break
        if certified(current):
            return current
    raise ConstructionError("regularize failed to certify a degree-regular subset")


# -- randomized lower bound for the distinct-degree number ----------------------


def f_lower_greedy(g: Graph, effort: int, seed: int = 0) -> DistinctDegreeWitness:
    """Randomized local search over hosts; the result is always a verified
    witness, hence a true lower bound."""
    if effort < 1:
        raise PreconditionError("effort must be >= 1")
    n = g.n
    rng = stream(seed, "f-greedy", n)
    full = VertexSet.full(n)
    best_mask = full.mask
    best_value = distinct_degree_count(g, full)
    for _ in range(effort):
        keep = rng.random(n) < 0.5
        mask = 0
        for v in range(n):
            if keep[v]:
                mask |= 1 << v
        if mask == 0:
            mask = 1 << int(rng.integers(n))
        value = distinct_degree_count(g, VertexSet(n, mask))
        for v in rng.permutation(n):
            flipped = mask ^ (1 << int(v))
            if flipped == 0:
                continue
            cand = distinct_degree_count(g, VertexSet(n, flipped))
            if cand > value:
                mask, value = flipped, cand
        if value > best_value:
            best_mask, best_value = mask, value
    return make_witness(g, VertexSet(n, best_mask))
