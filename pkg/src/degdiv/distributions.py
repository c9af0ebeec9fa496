"""Distributions on probability vectors in [0.1, 0.9]^T.

Specs are immutable data, not closures, so they serialize into experiment
logs and service payloads (see spec_to_json). Sampling takes the graph (the
blended variant perturbs along projected neighbourhood rows) and an explicit
generator; tests can substitute rng.ForcedStream to script the draws.

The four constructors:
  * trivial        -- the constant 1/2 vector on T, with probability 1;
  * uniform const  -- one alpha ~ U[0.1, 0.9], vector alpha * 1_T;
  * blended        -- 1/2 * 1 + sum_i alpha_i * proj_S(row of anchor_i), each
                      alpha_i ~ U[-spread, spread] independently, truncated
                      coordinatewise back into [0.1, 0.9];
  * product        -- independent children on pairwise-disjoint domains.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import PreconditionError
from .graphs import Graph, VertexSet

COORD_LOW = 0.1
COORD_HIGH = 0.9
SPREAD_MAX = 0.4
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TrivialSpec:
    domain: VertexSet


@dataclass(frozen=True)
class UniformConstantSpec:
    domain: VertexSet


@dataclass(frozen=True)
class BlendedSpec:
    """Perturb the half vector along the anchors' neighbourhoods inside domain.

    anchors is ordered: the i-th blend coefficient always belongs to the i-th
    anchor, which per-index conditioning arguments rely on.
    """

    anchors: tuple[int, ...]
    domain: VertexSet
    spread: float

    def __post_init__(self):
        if not self.anchors:
            raise PreconditionError("blended distribution needs at least one anchor")
        if len(set(self.anchors)) != len(self.anchors):
            raise PreconditionError("blended anchors must be distinct")
        if not 0.0 < self.spread <= SPREAD_MAX:
            raise PreconditionError(f"blend spread {self.spread} outside (0, {SPREAD_MAX}]")
        for u in self.anchors:
            if not 0 <= u < self.domain.n:
                raise PreconditionError(f"anchor {u} outside the vertex universe")


@dataclass(frozen=True)
class ProductSpec:
    children: tuple["DistributionSpec", ...]
    domain: VertexSet

    def __post_init__(self):
        if not self.children:
            raise PreconditionError("product distribution needs children")
        union = 0
        for child in self.children:
            if child.domain.n != self.domain.n:
                raise PreconditionError("product children over different universes")
            if union & child.domain.mask:
                raise PreconditionError("product children domains overlap")
            union |= child.domain.mask
        if union != self.domain.mask:
            raise PreconditionError("product domain must be the union of child domains")


DistributionSpec = Union[TrivialSpec, UniformConstantSpec, BlendedSpec, ProductSpec]


def product_of(children: Sequence[DistributionSpec]) -> ProductSpec:
    children = tuple(children)
    n = children[0].domain.n
    union = 0
    for child in children:
        union |= child.domain.mask
    return ProductSpec(children=children, domain=VertexSet(n, union))


@dataclass
class ProbVector:
    """A sampled probability vector; coordinates outside the domain are undefined."""

    values: np.ndarray
    domain: VertexSet

    def __getitem__(self, v: int) -> float:
        if v not in self.domain:
            raise PreconditionError(f"coordinate {v} outside the vector's domain")
        return float(self.values[v])


# -- sampling -------------------------------------------------------------------


def _fill(out: np.ndarray, g: Graph, spec: DistributionSpec, rng) -> None:
    dom = spec.domain.to_bools()
    if isinstance(spec, TrivialSpec):
        out[:, dom] = 0.5
    elif isinstance(spec, UniformConstantSpec):
        alpha = np.asarray(rng.uniform(COORD_LOW, COORD_HIGH, size=(out.shape[0], 1)))
        out[:, dom] = alpha
    elif isinstance(spec, BlendedSpec):
        k = len(spec.anchors)
        alphas = np.asarray(rng.uniform(-spec.spread, spec.spread, size=(out.shape[0], k)))
        rows = np.stack([
            VertexSet(g.n, g.row(u) & spec.domain.mask).to_bools().astype(np.float64)
            for u in spec.anchors
        ])
        raw = 0.5 + alphas @ rows[:, dom]
        out[:, dom] = np.clip(raw, COORD_LOW, COORD_HIGH)
    elif isinstance(spec, ProductSpec):
        for child in spec.children:
            _fill(out, g, child, rng)
    else:
        raise PreconditionError(f"unknown distribution spec {type(spec).__name__}")


def sample_matrix(g: Graph, spec: DistributionSpec, rng, count: int) -> np.ndarray:
    """count independent draws as rows of a (count, n) array, zero outside domain."""
    if spec.domain.n != g.n:
        raise PreconditionError("spec universe does not match the graph")
    out = np.zeros((count, g.n), dtype=np.float64)
    _fill(out, g, spec, rng)
    return out


def sample(g: Graph, spec: DistributionSpec, rng) -> ProbVector:
    values = sample_matrix(g, spec, rng, 1)[0]
    return ProbVector(values=values, domain=spec.domain)


# -- functionals ------------------------------------------------------------------


def expected_degree(g: Graph, u: int, p: ProbVector, s: VertexSet) -> float:
    """Sum of p over N(u) in s: the expected degree of u into s under the
    vertex-percolated subgraph model."""
    if not s.issubset(p.domain):
        raise PreconditionError("s must lie inside the vector's domain")
    nbrs = VertexSet(g.n, g.row(u) & s.mask)
    return float(p.values[nbrs.to_bools()].sum())


def restricted_rows(g: Graph, vertices: Sequence[int], s: VertexSet) -> np.ndarray:
    """Float 0/1 matrix of the vertices' neighbourhood rows projected onto s."""
    return np.stack([
        VertexSet(g.n, g.row(u) & s.mask).to_bools().astype(np.float64) for u in vertices
    ])


def expected_degree_matrix(values: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Expected degrees for many samples at once: (count, n) @ (t, n)^T."""
    return values @ rows.T


def realize_subgraph(g: Graph, p: ProbVector, rng) -> VertexSet:
    """Include each vertex independently with its coordinate probability."""
    if p.domain != VertexSet.full(g.n):
        raise PreconditionError("realize_subgraph needs a vector over the full vertex set")
    draws = np.asarray(rng.random(g.n))
    return VertexSet.from_bools(draws < p.values)


# -- serialization ------------------------------------------------------------------


def spec_to_dict(spec: DistributionSpec) -> dict:
    base = {"version": SCHEMA_VERSION, "n": spec.domain.n, "domain": spec.domain.members()}
    if isinstance(spec, TrivialSpec):
        return {**base, "variant": "trivial"}
    if isinstance(spec, UniformConstantSpec):
        return {**base, "variant": "uniform_constant"}
    if isinstance(spec, BlendedSpec):
        return {**base, "variant": "blended", "anchors": list(spec.anchors), "spread": spec.spread}
    if isinstance(spec, ProductSpec):
        return {**base, "variant": "product", "children": [spec_to_dict(c) for c in spec.children]}
    raise PreconditionError(f"unknown distribution spec {type(spec).__name__}")


def spec_from_dict(data: dict) -> DistributionSpec:
    if data.get("version") != SCHEMA_VERSION:
        raise PreconditionError(f"unsupported spec schema version {data.get('version')!r}")
    n = int(data["n"])
    domain = VertexSet.from_members(n, data["domain"])
    variant = data["variant"]
    if variant == "trivial":
        return TrivialSpec(domain=domain)
    if variant == "uniform_constant":
        return UniformConstantSpec(domain=domain)
    if variant == "blended":
        return BlendedSpec(anchors=tuple(data["anchors"]), domain=domain, spread=float(data["spread"]))
    if variant == "product":
        return product_of([spec_from_dict(c) for c in data["children"]])
    raise PreconditionError(f"unknown distribution variant {variant!r}")


def spec_to_json(spec: DistributionSpec) -> str:
    return json.dumps(spec_to_dict(spec), sort_keys=True)


def spec_from_json(text: str) -> DistributionSpec:
    return spec_from_dict(json.loads(text))


# -- label lifting -------------------------------------------------------------------


def lift_set(s: VertexSet, mapping: Sequence[int], parent_n: int) -> VertexSet:
    return VertexSet.from_members(parent_n, (mapping[v] for v in s))


def lift_spec(spec: DistributionSpec, mapping: Sequence[int], parent_n: int) -> DistributionSpec:
    """Relabel a spec built on an induced subgraph into the parent's labels.

    Valid because induced adjacency agrees with parent adjacency inside the
    mapped set, so projected anchor rows are unchanged by the lift.
    """
    dom = lift_set(spec.domain, mapping, parent_n)
    if isinstance(spec, TrivialSpec):
        return TrivialSpec(domain=dom)
    if isinstance(spec, UniformConstantSpec):
        return UniformConstantSpec(domain=dom)
    if isinstance(spec, BlendedSpec):
        return BlendedSpec(anchors=tuple(mapping[u] for u in spec.anchors), domain=dom, spread=spec.spread)
    if isinstance(spec, ProductSpec):
        return product_of([lift_spec(c, mapping, parent_n) for c in spec.children])
    raise PreconditionError(f"unknown distribution spec {type(spec).__name__}")
