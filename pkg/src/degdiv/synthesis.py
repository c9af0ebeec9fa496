"""From distribution-level control to concrete distinct-degree witnesses.

Three layers:

  * pressure_pipeline turns a diverse, balanced set into a blended-controlled
    set, choosing the blend spread from the balance and size of the set and
    measuring the collision mass of every pair against the analytic target;

  * merge_controlled combines disjoint controlled sets under a cross
    distribution, ordered descending and accumulated until the requested mass
    is reached (a single dominating set short-circuits);

  * synthesize recurses through a three-way case split on degree range and
    cluster size -- neighbourhood splitting, direct cluster partition, or
    degree regularization followed by the partition -- bottoming out in the
    exact oracle. All randomness is seed-streamed; identical inputs replay
    identical traces.

realize_witness converts any controlled set into an actual induced-subgraph
witness: sample a probability vector, keep members whose expected degrees are
pairwise separated by more than the collision window, realize the random
subgraph and count distinct realized degrees. Witnesses are always re-verified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .badness import bad_set
from .clusters import ClusterParams, all_cluster_views
from .distributions import (
    BlendedSpec,
    DistributionSpec,
    TrivialSpec,
    UniformConstantSpec,
    lift_set,
    lift_spec,
    product_of,
    restricted_rows,
    sample,
    realize_subgraph,
)
from .errors import ConstructionError, DegdivError, PreconditionError
from .graphs import Graph, VertexSet, diversity_block
from .oracles import DistinctDegreeWitness, f_exact, f_lower_greedy, hom_exact, verify_witness
from .partition import PartitionConfig, eligible_set, run_partition
from .rng import stream

SPREAD_CAP = 0.4
EXPECTED_GAP = 2.0  # collision window length; gaps beyond it separate windows


@dataclass(frozen=True)
class PressureInstance:
    """A set whose pairwise restricted diversity is at least min_div while no
    coordinate vertex sees more than balance * |u_set| of its members."""

    u_set: VertexSet
    s: VertexSet
    min_div: float
    balance: float

    def __post_init__(self):
        if self.u_set.card < 2:
            raise PreconditionError("pressure instance needs at least two vertices")
        if self.min_div < 1:
            raise PreconditionError("diversity floor must be >= 1")
        if not 0.0 < self.balance <= 1.0:
            raise PreconditionError("balance must lie in (0, 1]")
        if self.balance * self.u_set.card < 1.0 - 1e-12:
            raise PreconditionError("balance below 1/|u_set| is unsatisfiable")


@dataclass
class ControlledSet:
    """A vertex set with measured collision control under a distribution."""

    u_set: VertexSet
    spec: DistributionSpec
    alpha: float
    half_width: float
    provenance: str
    graph: Graph
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GrowthProfile:
    """Control growth functions used by the merge rule.

    stretch_exp: c1 * exp(c2 * (ln x)^(2/3)); square_log: c1 * (log2 x)^2.
    Both are increasing with decreasing derivative beyond threshold()."""

    kind: str
    c1: float = 1.0
    c2: float = 1.0

    def f(self, x: float) -> float:
        x = max(x, 1.0)
        if self.kind == "stretch_exp":
            return self.c1 * math.exp(self.c2 * math.log(x) ** (2.0 / 3.0))
        if self.kind == "square_log":
            return self.c1 * math.log2(max(x, 1.0)) ** 2
        raise PreconditionError(f"unknown growth profile {self.kind!r}")

    def f_prime(self, x: float) -> float:
        x = max(x, 1.0 + 1e-9)
        if self.kind == "stretch_exp":
            lx = math.log(x)
            return self.c1 * self.c2 * (2.0 / 3.0) * math.exp(self.c2 * lx ** (2.0 / 3.0)) / (x * lx ** (1.0 / 3.0))
        if self.kind == "square_log":
            return 2.0 * self.c1 * math.log2(x) / (x * math.log(2.0))
        raise PreconditionError(f"unknown growth profile {self.kind!r}")

    def threshold(self) -> float:
        """Point beyond which f' is decreasing (and the merge rule is valid)."""
        if self.kind == "stretch_exp":
            return math.exp(self.c2**3)
        return math.exp(1.0)


@dataclass(frozen=True)
class SynthesisBudget:
    """Targets and effort knobs for the recursive synthesizer."""

    k: float
    c1: float = 1.0
    c2: float = 1.0
    c: float = 1.0
    depth_cap: int = 6
    exact_cutoff: int = 14
    n_samples: int = 1500
    witness_trials: int = 24
    partition_attempts: int = 60
    o2_size_cap: int = 48
    relax_degree_floor: float = 1.0

    def __post_init__(self):
        if self.k < 1:
            raise PreconditionError("synthesis target must be >= 1")

    def schedule(self, k: Optional[float] = None) -> tuple[float, float, float]:
        """(growth, degree divisor, scale): log2 of each is a fixed power of
        log2(k) -- 4/9, 5/9 and 2/3 respectively -- floored at 2."""
        kk = max(k if k is not None else self.k, 4.0)
        lk = math.log2(kk)
        growth = max(2.0, 2.0 ** (lk ** (4.0 / 9.0)))
        deg_div = max(2.0, 2.0 ** (lk ** (5.0 / 9.0)))
        scale = max(2.0, 2.0 ** (lk ** (2.0 / 3.0)))
        return growth, deg_div, scale

    def profile_main(self) -> GrowthProfile:
        return GrowthProfile(kind="stretch_exp", c1=self.c1, c2=self.c2)

    def profile_base(self) -> GrowthProfile:
        return GrowthProfile(kind="square_log", c1=self.c)


# -- pressure pipeline ---------------------------------------------------------


def _scan_hypotheses(g: Graph, inst: PressureInstance) -> tuple[np.ndarray, list[int]]:
    members = inst.u_set.members()
    div = diversity_block(g, members, inst.s)
    t = len(members)
    for i in range(t):
        for j in range(i + 1, t):
            if div[i, j] < inst.min_div:
                raise PreconditionError(
                    f"pair ({members[i]},{members[j]}) has diversity {div[i, j]}"
                    f" below the floor {inst.min_div}")
    cap = inst.balance * t + 1e-9
    u_words = inst.u_set.to_words()
    into_u = np.bitwise_count(g.packed & u_words).sum(axis=1, dtype=np.int64)
    for v in inst.s:
        if into_u[v] > cap:
            raise PreconditionError(
                f"vertex {v} sees {into_u[v]} members, above balance*|u_set| = {cap:.3f}")
    return div, members


def _trim_coordinates(g: Graph, members: list[int], s: VertexSet, div_cap: float) -> VertexSet:
    """Shrink s to at most div_cap * |members|^2 coordinates while keeping at
    least div_cap symmetric-difference coordinates per pair."""
    budget = int(math.ceil(div_cap * len(members) ** 2))
    if s.card <= budget:
        return s
    keep = 0
    per_pair = int(math.ceil(div_cap))
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            sym = (g.row(members[i]) ^ g.row(members[j])) & s.mask & ~keep
            got = 0
            while sym and got < per_pair:
                low = sym & -sym
                keep |= low
                sym ^= low
                got += 1
    return VertexSet(s.n, keep)


def pressure_pipeline(g: Graph, inst: PressureInstance, n_samples: int, seed: int = 0,
                      keep_pairs: bool = False) -> ControlledSet:
    """Blend along the instance's members and measure every pair's collision
    mass against the analytic target 40*sqrt(balance*|U|*ln|U|)/min_div."""
    div, members = _scan_hypotheses(g, inst)
    t = len(members)
    div_cap = min(inst.min_div, float(t) ** 1.5)
    s_eff = _trim_coordinates(g, members, inst.s, div_cap)
    spread = min(SPREAD_CAP, 1.0 / (10.0 * math.sqrt(inst.balance * t * math.log(t))))
    blended = BlendedSpec(anchors=tuple(members), domain=s_eff, spread=spread)
    rest = s_eff.complement()
    spec = product_of([blended, TrivialSpec(rest)]) if rest.card else blended
    measured = bad_set(g, spec, inst.u_set, s_eff, n_samples, seed=seed, keep_pairs=True)
    target = 40.0 * math.sqrt(inst.balance * t * math.log(t)) / div_cap
    violations = [
        {"pair": list(pair), "point": est.point, "half_width": est.half_width}
        for pair, est in measured.per_pair.items()
        if est.point > target + 3.0 * est.half_width
    ]
    details = {
        "target": target,
        "spread": spread,
        "div_cap": div_cap,
        "coords_used": s_eff.card,
        "pair_violations": violations,
        "target_met": not violations,
    }
    if keep_pairs:
        details["per_pair"] = measured.per_pair
    return ControlledSet(u_set=inst.u_set, spec=spec, alpha=measured.alpha,
                         half_width=measured.half_width_total, provenance="pressure",
                         graph=g, details=details)


# -- merging ---------------------------------------------------------------------


def merge_controlled(parts: Sequence[tuple[ControlledSet, VertexSet]],
                     cross_spec: DistributionSpec, cross_domain: VertexSet,
                     profile: GrowthProfile, target_mass: float, mass_cap: float,
                     g: Graph, n_samples: int, seed: int = 0) -> ControlledSet:
    """Combine controlled sets living on disjoint parts under a cross
    distribution, following the descending prefix rule.

    Preconditions checked: disjointness, per-part control alpha_i <= f(|U_i|)
    (within reported half-widths), and cross-pair collision at most
    f'(mass_cap) within three half-widths.
    """
    if not parts:
        raise PreconditionError("nothing to merge")
    n = g.n
    union = cross_domain.mask
    problems = []
    for idx, (cs, dom) in enumerate(parts):
        if not cs.u_set.issubset(dom):
            problems.append(f"part {idx}: set outside its domain")
        if not cs.spec.domain.issubset(dom):
            problems.append(f"part {idx}: spec domain outside its part")
        if dom.mask & union:
            problems.append(f"part {idx}: domain overlaps an earlier one")
        union |= dom.mask
        size = cs.u_set.card
        if size >= 2 and cs.alpha > profile.f(size) + cs.half_width / size:
            problems.append(
                f"part {idx}: alpha {cs.alpha:.4f} above f({size}) = {profile.f(size):.4f}")
    if problems:
        raise PreconditionError("merge preconditions violated: " + "; ".join(problems))

    cross_cap = profile.f_prime(mass_cap)
    ordered = sorted(range(len(parts)), key=lambda i: (-parts[i][0].u_set.card, i))
    # cross-pair control, measured on one shared batch over the cross domain
    all_members = [m for i in ordered for m in parts[i][0].u_set.members()]
    owner = {}
    for i in ordered:
        for m in parts[i][0].u_set.members():
            owner[m] = i
    cross_pairs = [(u, v) for ai, u in enumerate(all_members) for v in all_members[ai + 1 :]
                   if owner[u] != owner[v]]
    cross_report = None
    if cross_pairs:
        from .badness import _pairwise_estimates  # shared-batch estimator

        rng = stream(seed, "merge-cross")
        ests = _pairwise_estimates(g, cross_spec, all_members, cross_pairs,
                                   cross_domain, n_samples, rng)
        bad_cross_pairs = [
            {"pair": list(pair), "point": e.point, "half_width": e.half_width}
            for pair, e in ests.items() if e.point > cross_cap + 3.0 * e.half_width
        ]
        cross_report = {
            "cap": cross_cap,
            "pairs": len(cross_pairs),
            "worst": max(e.point for e in ests.values()),
            "violations": bad_cross_pairs,
        }
        if bad_cross_pairs:
            raise PreconditionError(
                f"{len(bad_cross_pairs)} cross pairs above f'(mass_cap) = {cross_cap:.5f}")

    sizes = [parts[i][0].u_set.card for i in ordered]
    if sum(sizes) < target_mass:
        raise PreconditionError(
            f"total mass {sum(sizes)} below the merge target {target_mass:.3f}")
    if max(sizes) < profile.threshold():
        raise PreconditionError(
            f"largest part {max(sizes)} below the profile threshold {profile.threshold():.3f}")

    first = parts[ordered[0]][0]
    if first.u_set.card > target_mass:
        # a single dominating set already carries the mass
        rest = VertexSet(n, ((1 << n) - 1) ^ first.spec.domain.mask)
        spec = product_of([first.spec, TrivialSpec(rest)]) if rest.card else first.spec
        merged_set = first.u_set
        kept = [ordered[0]]
    else:
        kept = []
        total = 0
        for i in ordered:
            kept.append(i)
            total += parts[i][0].u_set.card
            if total >= target_mass:
                break
        merged_mask = 0
        for i in kept:
            merged_mask |= parts[i][0].u_set.mask
        merged_set = VertexSet(n, merged_mask)
        if not target_mass <= merged_set.card <= 2 * target_mass:
            raise ConstructionError(
                f"merged size {merged_set.card} outside [target, 2*target]")
        children = [parts[i][0].spec for i in kept] + [cross_spec]
        covered = cross_domain.mask
        for i in kept:
            covered |= parts[i][0].spec.domain.mask
        rest = VertexSet(n, ((1 << n) - 1) ^ covered)
        if rest.card:
            children.append(TrivialSpec(rest))
        spec = product_of(children)

    measured = bad_set(g, spec, merged_set, g.vertices(), n_samples,
                       seed=stream_key(seed, "merge-verify"))
    bound = merged_set.card * profile.f(merged_set.card)
    details = {
        "kept_parts": kept,
        "sizes": sizes,
        "cross": cross_report,
        "bound": bound,
        "bound_ok": measured.total <= bound + measured.half_width_total,
    }
    return ControlledSet(u_set=merged_set, spec=spec, alpha=measured.alpha,
                         half_width=measured.half_width_total, provenance="merge",
                         graph=g, details=details)


def stream_key(seed: int, label: str) -> int:
    """Stable derived integer seed for nested components that take seeds."""
    return int(stream(seed, label).integers(1 << 62))


# -- witness realization -----------------------------------------------------------


def realize_witness(g: Graph, cs: ControlledSet, trials: int, seed: int = 0) -> DistinctDegreeWitness:
    """Turn a controlled set into a verified distinct-degree witness.

    Per trial: draw a probability vector, greedily keep members whose expected
    degrees are separated by more than the collision window, realize the
    random vertex subset, and count distinct realized degrees of the kept
    members inside it. Best verified witness over all trials; never fails
    (worst case is a single-vertex witness).
    """
    if trials < 1:
        raise PreconditionError("need at least one trial")
    n = g.n
    full = g.vertices()
    spec = cs.spec
    if spec.domain != full:
        spec = product_of([spec, TrivialSpec(spec.domain.complement())])
    members = cs.u_set.members()
    rows = restricted_rows(g, members, full) if members else None
    best: Optional[DistinctDegreeWitness] = None
    for trial in range(trials):
        rng = stream(seed, "witness", trial)
        pvec = sample(g, spec, rng)
        if members:
            expected = rows @ pvec.values
            order = sorted(range(len(members)), key=lambda i: (expected[i], members[i]))
            chosen = []
            last = -math.inf
            for i in order:
                if expected[i] - last > EXPECTED_GAP:
                    chosen.append(members[i])
                    last = expected[i]
        else:
            chosen = []
        realized = realize_subgraph(g, pvec, rng)
        host = realized | VertexSet.from_members(n, chosen)
        if host.card == 0:
            host = VertexSet.from_members(n, [0])
        if chosen:
            degs: dict[int, int] = {}
            for u in chosen:
                degs.setdefault((g.row(u) & host.mask).bit_count(), u)
            marked = VertexSet.from_members(n, degs.values())
        else:
            any_member = next(iter(host))
            marked = VertexSet.from_members(n, [any_member])
        cand = DistinctDegreeWitness(host=host, marked=marked, value=marked.card)
        if best is None or cand.value > best.value:
            best = cand
    verify_witness(g, best)
    return best


# -- the recursive synthesizer -------------------------------------------------------


def _trivial_controlled(g: Graph, witness: DistinctDegreeWitness, provenance: str) -> ControlledSet:
    """Exact control bookkeeping under the trivial distribution: every pair's
    expected-degree difference is deterministic, so each pair contributes
    exactly one unit of collision mass. The originating witness rides along."""
    u_set = witness.marked
    pairs = u_set.card * (u_set.card - 1) / 2.0
    alpha = pairs / u_set.card if u_set.card else 0.0
    return ControlledSet(u_set=u_set, spec=TrivialSpec(g.vertices()), alpha=alpha,
                         half_width=0.0, provenance=provenance, graph=g,
                         details={"witness": witness})


# recursion hits identical small subgraphs repeatedly; exact witnesses are
# memoized on the byte-exact fingerprint (same labels, not just isomorphic)
_EXACT_MEMO: dict[str, DistinctDegreeWitness] = {}
_EXACT_MEMO_CAP = 4096


def _base_case(g: Graph, budget: SynthesisBudget, seed: int, trace: list[str], tag: str) -> ControlledSet:
    if g.n <= budget.exact_cutoff:
        key = g.fingerprint()
        witness = _EXACT_MEMO.get(key)
        if witness is None:
            witness = f_exact(g)
            if len(_EXACT_MEMO) < _EXACT_MEMO_CAP:
                _EXACT_MEMO[key] = witness
        trace.append(f"{tag} base: exact witness of value {witness.value}")
        return _trivial_controlled(g, witness, "base-exact")
    # the hill-climb costs ~n^2 per pass, so scale passes down with size
    effort = max(2, min(budget.witness_trials, 8192 // g.n))
    witness = f_lower_greedy(g, effort=effort, seed=stream_key(seed, "base"))
    trace.append(f"{tag} base: greedy witness of value {witness.value}")
    return _trivial_controlled(g, witness, "base-greedy")


def _ensure_full_domain(g: Graph, cs: ControlledSet) -> ControlledSet:
    if cs.spec.domain != g.vertices():
        rest = cs.spec.domain.complement()
        cs.spec = product_of([cs.spec, TrivialSpec(rest)])
    return cs


def _lift(cs: ControlledSet, mapping: Sequence[int], parent: Graph) -> ControlledSet:
    details = dict(cs.details)
    witness = details.get("witness")
    if witness is not None:
        details["witness"] = DistinctDegreeWitness(
            host=lift_set(witness.host, mapping, parent.n),
            marked=lift_set(witness.marked, mapping, parent.n),
            value=witness.value)
    return ControlledSet(
        u_set=lift_set(cs.u_set, mapping, parent.n),
        spec=lift_spec(cs.spec, mapping, parent.n),
        alpha=cs.alpha, half_width=cs.half_width,
        provenance=cs.provenance, graph=parent, details=details)


def _o2_controlled(g: Graph, k_target: float, budget: SynthesisBudget, seed: int,
                   trace: list[str], tag: str) -> ControlledSet:
    """Stand-in for the cited low-size route: measured-diversity pressure
    pipeline on a sampled subset. Weaker than the cited result; provenance
    records it."""
    if g.n <= budget.exact_cutoff:
        return _base_case(g, budget, seed, trace, tag)
    size = int(min(max(4, math.ceil(k_target)), budget.o2_size_cap, g.n))
    rng = stream(seed, "o2-pick")
    candidates = list(rng.permutation(g.n)[: 4 * size])
    chosen: list[int] = []
    for v in candidates:
        v = int(v)
        if all(((g.row(v) ^ g.row(u)) != 0) for u in chosen):
            chosen.append(v)
        if len(chosen) == size:
            break
    if len(chosen) < 2:
        trace.append(f"{tag} o2: too many twins, falling back to base")
        return _base_case(g, budget, seed, trace, tag)
    u_set = VertexSet.from_members(g.n, chosen)
    div = diversity_block(g, sorted(chosen))
    off = div[np.triu_indices(len(chosen), 1)]
    min_div = float(off.min())
    words = u_set.to_words()
    into = np.bitwise_count(g.packed & words).sum(axis=1, dtype=np.int64)
    balance = max(float(into.max()) / len(chosen), 1.0 / len(chosen))
    inst = PressureInstance(u_set=u_set, s=g.vertices(), min_div=max(min_div, 1.0),
                            balance=min(1.0, balance))
    cs = pressure_pipeline(g, inst, budget.n_samples, seed=stream_key(seed, "o2-pipe"))
    cs.provenance = "o2-pressure"
    trace.append(f"{tag} o2: |U|={u_set.card} min_div={min_div:.0f} alpha={cs.alpha:.3f}")
    return cs


def _sub_route(n: int, k: float, size: int) -> tuple[str, float]:
    """O-route split on subset size: big subsets recurse with k scaled by
    (size/n)^(2/3), small ones go to the o2 stand-in with k*size*k^2/n^2."""
    boundary = n**4 / k**6
    if size >= boundary:
        return "O1", k * (size / n) ** (2.0 / 3.0)
    return "O2", size * k**3 / n**2


def synthesize(g: Graph, budget: SynthesisBudget, seed: int = 0) -> ControlledSet:
    """Best-effort recursive construction of a controlled set for g."""
    trace: list[str] = []
    cs = _synth(g, float(budget.k), budget, seed, 0, trace)
    cs.details["trace"] = trace
    return cs


def _synth(g: Graph, k: float, budget: SynthesisBudget, seed: int, depth: int,
           trace: list[str]) -> ControlledSet:
    n = g.n
    tag = f"[depth {depth}, n={n}, k={k:.3g}]"
    if n <= budget.exact_cutoff or depth >= budget.depth_cap or k <= 2:
        return _base_case(g, budget, seed, trace, tag)
    if n > k * k:
        trace.append(f"{tag} note: n > k^2, hypothesis violated, continuing best-effort")
    if n <= 128:
        hom_value = hom_exact(g).value
        if hom_value > n * n / k**3:
            trace.append(f"{tag} note: hom {hom_value} above n^2/k^3, continuing best-effort")

    work = g
    complemented = False
    if int((g.degrees < n / 2).sum()) < n / 2:
        work = g.complement()
        complemented = True
        trace.append(f"{tag} working with the complement (majority of degrees >= n/2)")

    growth, deg_div, scale = budget.schedule(k)
    params = ClusterParams(scale=scale, growth=growth, ambient=work.vertices())
    views = all_cluster_views(work, params)
    deg_floor = k**1.5 / deg_div
    a1, a2, a3 = [], [], []
    for v in range(n):
        d = work.degree(v)
        if d < n / 2 and d > deg_floor:
            (a1 if views[v].w_star.card >= 4 * k else a2).append(v)
        elif d <= deg_floor:
            a3.append(v)
    trace.append(f"{tag} split: high-cluster {len(a1)}, low-cluster {len(a2)}, low-degree {len(a3)}"
                 f" (growth {growth:.2f}, divisor {deg_div:.2f}, scale {scale:.2f})")

    attempts = []
    if a1:
        attempts.append(("case1", lambda: _case1(work, k, a1, views, params, budget, seed, depth, trace, tag)))
    if len(a2) >= n / 4:
        attempts.append(("case2", lambda: _case23(work, k, VertexSet.from_members(n, a2), False,
                                                  budget, seed, depth, trace, tag, case="2")))
    if len(a3) >= n / 4:
        attempts.append(("case3", lambda: _case3(work, k, VertexSet.from_members(n, a3),
                                                 budget, seed, depth, trace, tag)))

    outcomes = []
    for name, fn in attempts:
        try:
            got = fn()
        except DegdivError as exc:
            trace.append(f"{tag} {name} failed: {exc}")
            continue
        trace.append(f"{tag} {name} produced |U|={got.u_set.card} alpha={got.alpha:.3f}")
        outcomes.append(got)
    promised = k / budget.profile_main().f(k)
    if not outcomes or max(o.u_set.card for o in outcomes) < promised:
        trace.append(f"{tag} cases fell short of the promised size {promised:.2f},"
                     " adding the greedy partial result")
        outcomes.append(_base_case(work, budget, seed, trace, tag))
    # best found wins: largest set, then tightest control, then case order
    result = max(enumerate(outcomes), key=lambda io: (io[1].u_set.card, -io[1].alpha, -io[0]))[1]
    result = _ensure_full_domain(work, result)
    if complemented:
        result.details["complemented"] = True
    return result


def _case1(work: Graph, k: float, a1: list[int], views, params: ClusterParams,
           budget: SynthesisBudget, seed: int, depth: int, trace: list[str], tag: str):
    """Split on a high-cluster vertex: its cluster gives the control
    coordinates, the two sides of its neighbourhood get recursed and merged
    under uniform-constant cross control."""
    n = work.n
    v0 = max(a1, key=lambda v: (views[v].w_star.card, -v))
    star = views[v0].w_star
    s0_size = int(min(star.card, math.ceil(4 * k)))
    s0 = VertexSet.from_members(n, star.members()[:s0_size])
    nbrs = work.neighbourhood(v0)
    deg_into_s0 = work.degrees_within(s0)
    big = VertexSet.from_bools(deg_into_s0 > 3 * k)
    small = VertexSet.from_bools(deg_into_s0 < k)
    v1 = (nbrs & big) - s0
    v2 = (nbrs.complement() & small) - s0 - VertexSet.from_members(n, [v0])
    trace.append(f"{tag} case1: center {v0}, coords {s0.card}, sides {v1.card}/{v2.card}")
    if v1.card < 2 or v2.card < 2:
        raise ConstructionError("case1 sides too small after trimming")
    d0 = work.degree(v0)
    parts = []
    for side_idx, side in enumerate((v1, v2)):
        sub, mapping = work.induced(side)
        if side_idx == 0 and d0 < 2 * n**4 / k**6:
            cap = int(max(2, min(side.card, math.floor(n**4 / k**6))))
            side_trim = VertexSet.from_members(n, side.members()[:cap])
            sub, mapping = work.induced(side_trim)
            route, sub_k = "O2", len(mapping) * k**3 / n**2
        else:
            route, sub_k = _sub_route(n, k, side.card)
        if route == "O1":
            child = _synth(sub, sub_k, budget, stream_key(seed, f"case1-{side_idx}"), depth + 1, trace)
        else:
            child = _o2_controlled(sub, sub_k, budget, stream_key(seed, f"case1-{side_idx}"),
                                   trace, f"{tag}/side{side_idx}")
        child = _ensure_full_domain(sub, child)
        lifted = _lift(child, mapping, work)
        parts.append((lifted, VertexSet.from_members(n, mapping)))
    profile = budget.profile_main()
    target = k / profile.f(k)
    cross = UniformConstantSpec(domain=s0)
    return merge_controlled(parts, cross, s0, profile, target_mass=target, mass_cap=2 * k,
                            g=work, n_samples=budget.n_samples, seed=stream_key(seed, "case1-merge"))


def _case23(work: Graph, k: float, candidates: VertexSet, use_measured_balance: bool,
            budget: SynthesisBudget, seed: int, depth: int, trace: list[str], tag: str,
            case: str):
    """Shared body of the partition-driven cases: case 2 runs at trivial
    balance, case 3 takes the balance the partition actually measured."""
    n = work.n
    growth, deg_div, scale = budget.schedule(k)
    # At scale the eligibility floor scale*log^2(n) sits below the case's own
    # degree threshold; on desk-size graphs it does not, so the relaxation
    # factor is set to make the effective floor match that threshold.
    ln2 = math.log(n) ** 2
    if case == "2":
        floor_eff = max(1.0, k**1.5 / deg_div)
    else:
        floor_eff = max(1.0, float(work.min_degree()))
    relax_floor = min(budget.relax_degree_floor, floor_eff / (scale * ln2))
    cfg = PartitionConfig(
        target_count=max(1, int(round(min(k, n)))),
        scale=scale, growth=growth,
        alpha=min(1.0, 4.0 * k / n) if case == "2" else min(1.0, 2.0 * k**1.5 / (deg_div * n)),
        max_attempts=budget.partition_attempts, mode="relaxed",
        relax_degree_floor=relax_floor)
    params = ClusterParams(scale=scale, growth=growth, ambient=work.vertices())
    usable = candidates & eligible_set(work, params, cfg)
    if usable.card < 2:
        raise ConstructionError(f"case{case}: no eligible candidates")
    res = run_partition(work, usable, cfg, seed=stream_key(seed, f"case{case}-part"))
    t = res.t
    u_set = VertexSet.from_members(n, res.u_list)
    if not use_measured_balance:
        spread = 1.0 / (10.0 * math.sqrt(max(k, 2.0) * math.log(max(k, 2.0))))
    else:
        balance = max(res.gamma, 1.0 / max(t, 1))
        spread = 1.0 / (10.0 * math.sqrt(balance * t * math.log(max(k, 2.0)) ** 4))
    spread = min(SPREAD_CAP, spread)
    cross = BlendedSpec(anchors=tuple(res.u_list), domain=res.s, spread=spread)
    trace.append(f"{tag} case{case}: partition t={t} gamma={res.gamma:.3f} spread={spread:.4f}")

    if t >= k / growth**3:
        rest = res.s.complement()
        spec = product_of([cross, TrivialSpec(rest)]) if rest.card else cross
        if u_set.card >= 2:
            measured = bad_set(work, spec, u_set, work.vertices(), budget.n_samples,
                               seed=stream_key(seed, f"case{case}-direct"))
            alpha, hw = measured.alpha, measured.half_width_total
        else:
            alpha, hw = 0.0, 0.0  # no pairs, no collision mass
        return ControlledSet(u_set=u_set, spec=spec, alpha=alpha, half_width=hw,
                             provenance=f"case{case}a", graph=work,
                             details={"t": t, "gamma": res.gamma})

    # recurse into the parts, keeping whichever O-route class carries more mass
    one, two = [], []
    for i, vs in enumerate(res.v_sets):
        (one if vs.card >= n**4 / k**6 else two).append(i)
    mass_one = sum(res.v_sets[i].card for i in one)
    mass_two = sum(res.v_sets[i].card for i in two)
    kept_idx = one if mass_one >= mass_two else two
    trace.append(f"{tag} case{case}b: classes {len(one)}/{len(two)} mass {mass_one}/{mass_two}")
    parts = []
    for i in kept_idx:
        vs = res.v_sets[i]
        if vs.card < 1:
            continue
        sub, mapping = work.induced(vs)
        route, sub_k = _sub_route(n, k, vs.card)
        if route == "O1":
            child = _synth(sub, sub_k, budget, stream_key(seed, f"case{case}-{i}"), depth + 1, trace)
        else:
            child = _o2_controlled(sub, sub_k, budget, stream_key(seed, f"case{case}-{i}"),
                                   trace, f"{tag}/part{i}")
        child = _ensure_full_domain(sub, child)
        lifted = _lift(child, mapping, work)
        parts.append((lifted, vs))
    profile = budget.profile_main()
    target = k / profile.f(k)
    return merge_controlled(parts, cross, res.s, profile, target_mass=target, mass_cap=2 * k,
                            g=work, n_samples=budget.n_samples,
                            seed=stream_key(seed, f"case{case}-merge"))


def _case3(work: Graph, k: float, low_degree: VertexSet, budget: SynthesisBudget,
           seed: int, depth: int, trace: list[str], tag: str):
    """Regularize the low-degree part first, then run the partition route on
    the regular subgraph with the measured balance."""
    from .oracles import regularize

    if low_degree.card < 4:
        raise ConstructionError("case3: low-degree side too small")
    sub3, map3 = work.induced(low_degree)
    reg = regularize(sub3)
    h, map_h = sub3.induced(reg)
    mapping = [map3[i] for i in map_h]
    trace.append(f"{tag} case3: regularized to {h.n} vertices")
    child = _case23(h, k, h.vertices(), use_measured_balance=True, budget=budget,
                    seed=stream_key(seed, "case3-inner"), depth=depth, trace=trace,
                    tag=f"{tag}/reg", case="3")
    child = _ensure_full_domain(h, child)
    lifted = _lift(child, mapping, work)
    return _ensure_full_domain(work, lifted)
