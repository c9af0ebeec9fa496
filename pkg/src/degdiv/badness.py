"""Monte Carlo estimation of the small-ball collision quantity.

For a pair (u, v), a coordinate set s and a distribution spec, the estimand is
the maximum over centers c of the probability that the expected-degree
difference X = E[deg_s(u)] - E[deg_s(v)] lands in the closed window
[c - 1, c + 1]. On an empirical sample the supremum over c is attained with a
sample point at a window endpoint, so a sorted two-pointer sweep computes it
exactly -- no grid over c.

Ties at window boundaries count inside (the window is closed, length exactly
2). Confidence half-widths are normal-approximation binomial intervals at 99%
and are always reported, never folded into the point estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .distributions import DistributionSpec, product_of, restricted_rows, sample_matrix
from .errors import PreconditionError
from .graphs import Graph, VertexSet
from .rng import stream

Z99 = 2.5758293035489004
SAMPLE_CHUNK = 8192
MIN_SAMPLES = 100


@dataclass(frozen=True)
class BadEstimate:
    point: float
    samples: int
    half_width: float
    window_center: float


@dataclass(frozen=True)
class SetBadness:
    """Sum of pair estimates over a set (or across two sets)."""

    total: float
    alpha: float
    pair_count: int
    half_width_total: float
    per_pair: Optional[dict] = None


def _half_width(point: float, n: int) -> float:
    return float(Z99 * np.sqrt(point * (1.0 - point) / n))


def window_maximum(x: np.ndarray) -> tuple[int, float]:
    """Largest number of points inside a closed length-2 interval, plus a center
    achieving it. Input need not be sorted."""
    xs = np.sort(x)
    hi = np.searchsorted(xs, xs + 2.0, side="right")
    counts = hi - np.arange(len(xs))
    i = int(np.argmax(counts))
    j = int(hi[i]) - 1
    return int(counts[i]), float((xs[i] + xs[j]) / 2.0)


def _estimate_from_diffs(x: np.ndarray) -> BadEstimate:
    count, center = window_maximum(x)
    point = count / len(x)
    return BadEstimate(point=point, samples=len(x), half_width=_half_width(point, len(x)),
                       window_center=center)


def _check_pair(u: int, v: int) -> None:
    if u == v:
        raise PreconditionError("bad estimation needs two distinct vertices")


def _check_scope(spec: DistributionSpec, s: VertexSet) -> None:
    if not s.issubset(spec.domain):
        raise PreconditionError("s must lie inside the distribution's domain")


def pair_differences(g: Graph, spec: DistributionSpec, u: int, v: int, s: VertexSet,
                     n_samples: int, rng) -> np.ndarray:
    """Samples of the expected-degree difference between u and v on s."""
    weight = restricted_rows(g, [u, v], s)
    w = weight[0] - weight[1]
    out = np.empty(n_samples, dtype=np.float64)
    done = 0
    while done < n_samples:
        take = min(SAMPLE_CHUNK, n_samples - done)
        values = sample_matrix(g, spec, rng, take)
        out[done : done + take] = values @ w
        done += take
    return out


def bad_pair(g: Graph, spec: DistributionSpec, u: int, v: int, s: VertexSet,
             n_samples: int, seed: int = 0, rng=None) -> BadEstimate:
    _check_pair(u, v)
    _check_scope(spec, s)
    if n_samples < MIN_SAMPLES:
        raise PreconditionError(f"need at least {MIN_SAMPLES} samples")
    if s.card == 0:
        # X is identically zero; the window at 0 holds all the mass
        return BadEstimate(point=1.0, samples=n_samples, half_width=0.0, window_center=0.0)
    if rng is None:
        rng = stream(seed, "bad-pair", u, v)
    return _estimate_from_diffs(pair_differences(g, spec, u, v, s, n_samples, rng))


def _pairwise_estimates(g: Graph, spec: DistributionSpec, vertices: Sequence[int],
                        pairs: Sequence[tuple[int, int]], s: VertexSet,
                        n_samples: int, rng) -> dict:
    """Estimate many pairs from one shared sample batch (one sampling pass)."""
    rows = restricted_rows(g, vertices, s)
    index = {v: i for i, v in enumerate(vertices)}
    expected = np.empty((n_samples, len(vertices)), dtype=np.float64)
    done = 0
    while done < n_samples:
        take = min(SAMPLE_CHUNK, n_samples - done)
        values = sample_matrix(g, spec, rng, take)
        expected[done : done + take] = values @ rows.T
        done += take
    out = {}
    for u, v in pairs:
        x = expected[:, index[u]] - expected[:, index[v]]
        out[(u, v)] = _estimate_from_diffs(x)
    return out


def bad_set(g: Graph, spec: DistributionSpec, u_set: VertexSet, s: VertexSet,
            n_samples: int, seed: int = 0, keep_pairs: bool = False) -> SetBadness:
    """Sum of pair collision estimates over all unordered pairs of u_set.

    alpha is total / |u_set|, the normalisation downstream controls consume.
    """
    _check_scope(spec, s)
    members = u_set.members()
    if len(members) < 2:
        raise PreconditionError("bad_set needs at least two vertices")
    pairs = [(members[i], members[j]) for i in range(len(members)) for j in range(i + 1, len(members))]
    rng = stream(seed, "bad-set", u_set.mask)
    estimates = _pairwise_estimates(g, spec, members, pairs, s, n_samples, rng)
    total = sum(e.point for e in estimates.values())
    hw = sum(e.half_width for e in estimates.values())
    return SetBadness(total=total, alpha=total / len(members), pair_count=len(pairs),
                      half_width_total=hw, per_pair=estimates if keep_pairs else None)


def bad_cross(g: Graph, spec: DistributionSpec, u_set: VertexSet, v_set: VertexSet,
              s: VertexSet, n_samples: int, seed: int = 0, keep_pairs: bool = False) -> SetBadness:
    """Sum over ordered pairs of u_set x v_set (the two sets must be disjoint)."""
    _check_scope(spec, s)
    if (u_set & v_set).card:
        raise PreconditionError("cross badness needs disjoint sets")
    us, vs = u_set.members(), v_set.members()
    if not us or not vs:
        raise PreconditionError("cross badness needs two nonempty sets")
    pairs = [(u, v) for u in us for v in vs]
    rng = stream(seed, "bad-cross", u_set.mask, v_set.mask)
    estimates = _pairwise_estimates(g, spec, us + vs, pairs, s, n_samples, rng)
    total = sum(e.point for e in estimates.values())
    hw = sum(e.half_width for e in estimates.values())
    denom = max(len(us), 1)
    return SetBadness(total=total, alpha=total / denom, pair_count=len(pairs),
                      half_width_total=hw, per_pair=estimates if keep_pairs else None)


@dataclass(frozen=True)
class DominationReport:
    product: BadEstimate
    components: tuple[BadEstimate, ...]
    verdict: bool
    slack: float


def check_product_domination(g: Graph, spec_list: Sequence[DistributionSpec], u: int, v: int,
                             s_list: Sequence[VertexSet], n_samples: int, seed: int = 0) -> DominationReport:
    """Empirically verify the product rule: collision under the product is at
    most the minimum over components, within combined half-widths."""
    _check_pair(u, v)
    if len(spec_list) != len(s_list):
        raise PreconditionError("one coordinate piece per component spec")
    for spec, piece in zip(spec_list, s_list):
        _check_scope(spec, piece)
    product = product_of(list(spec_list))
    union = VertexSet(product.domain.n, 0)
    for piece in s_list:
        union = union | piece
    full = bad_pair(g, product, u, v, union, n_samples, seed=seed,
                    rng=stream(seed, "domination", u, v, 0))
    comps = tuple(
        bad_pair(g, spec, u, v, piece, n_samples, seed=seed,
                 rng=stream(seed, "domination", u, v, i + 1))
        for i, (spec, piece) in enumerate(zip(spec_list, s_list))
    )
    floor = min(c.point for c in comps)
    floor_hw = min((c for c in comps), key=lambda c: c.point).half_width
    slack = floor + floor_hw + full.half_width - full.point
    return DominationReport(product=full, components=comps, verdict=slack >= 0.0, slack=slack)
