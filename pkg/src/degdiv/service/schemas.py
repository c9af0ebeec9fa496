"""Pydantic request/response models for the degdiv service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field, model_validator


class GnpIn(BaseModel):
    n: int = Field(ge=1)
    p: float = Field(ge=0.0, le=1.0)
    seed: int = 0


class GraphIn(BaseModel):
    """A graph payload: inline edge text or generator parameters, exactly one."""

    edge_text: Optional[str] = None
    gnp: Optional[GnpIn] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.edge_text is None) == (self.gnp is None):
            raise ValueError("provide exactly one of edge_text or gnp")
        return self


class GenRequest(GnpIn):
    pass


class GenResponse(BaseModel):
    n: int
    m: int
    edge_text: str


class HomRequest(BaseModel):
    graph: GraphIn
    guard: int = 128


class HomResponse(BaseModel):
    value: int
    witness: list[int]
    kind: str


class FExactRequest(BaseModel):
    graph: GraphIn
    guard: int = 20


class FGreedyRequest(BaseModel):
    graph: GraphIn
    effort: int = Field(default=16, ge=1)
    seed: int = 0


class WitnessOut(BaseModel):
    """value plus the marked vertices (the witness proper) and their host set."""

    value: int
    witness: list[int]
    host: list[int]


class RegularizeRequest(BaseModel):
    graph: GraphIn


class RegularizeResponse(BaseModel):
    vertices: list[int]
    size: int
    max_degree: int
    min_degree: int
    ratio_bound: float
    size_floor: float


class BadRequest(BaseModel):
    """Pair estimation when u/v are given, set estimation when u_set is given,
    cross-set when both u_set and v_set are given."""

    graph: GraphIn
    spec: dict  # distribution spec JSON (schema in distributions.spec_to_dict)
    u: Optional[int] = None
    v: Optional[int] = None
    u_set: Optional[list[int]] = None
    v_set: Optional[list[int]] = None
    s: Optional[list[int]] = None  # None means all vertices
    n_samples: int = Field(default=10_000, ge=100)
    seed: int = 0

    @model_validator(mode="after")
    def _one_mode(self):
        pair = self.u is not None and self.v is not None
        if pair == (self.u_set is not None):
            raise ValueError("provide either (u, v) or u_set")
        return self


class BadPairResponse(BaseModel):
    point: float
    half_width: float
    window_center: float
    samples: int


class BadSetResponse(BaseModel):
    total: float
    alpha: float
    pair_count: int
    half_width_total: float


class ClusterRequest(BaseModel):
    graph: GraphIn
    vertex: int
    scale: float = Field(gt=1.0)
    growth: float = Field(gt=1.0)
    ambient: Optional[list[int]] = None


class ClusterResponse(BaseModel):
    vertex: int
    moment: int
    cluster: list[int]
    halo: list[int]
    level_sizes: list[int]
    ambient_degree: int
    degenerate: bool


class PartitionOptions(BaseModel):
    target_count: int = Field(ge=1)
    scale: float = Field(gt=1.0)
    growth: float = Field(gt=1.0)
    alpha: float = Field(gt=0.0, le=1.0)
    max_attempts: int = Field(default=50, ge=1)
    mode: str = "relaxed"
    relax_degree_floor: float = 1.0
    relax_a2: float = 1.0
    relax_a3: float = 1.0
    relax_ii: float = 1.0
    relax_v: float = 1.0


class PartitionRequest(BaseModel):
    graph: GraphIn
    options: PartitionOptions
    candidates: Optional[list[int]] = None  # default: the eligible set
    seed: int = 0


class ConclusionOut(BaseModel):
    name: str
    exact: bool
    holds: bool
    measured: float
    bound: float
    detail: str


class PartitionResponse(BaseModel):
    t: int
    u_list: list[int]
    v_sets: list[list[int]]
    s: list[int]
    d_list: list[float]
    gamma: float
    attempts_used: int
    bucket_level: int
    bucket_moment: int
    bucket_size: int
    rate: float
    notes: list[str]
    relaxation: dict
    event_log: list[dict]
    report: list[ConclusionOut]
    report_exact_ok: bool


class PressureRequest(BaseModel):
    """Explicit instance (u_set with floors) or the random-graph instantiation
    (p with a size scale)."""

    graph: GraphIn
    u_set: Optional[list[int]] = None
    s: Optional[list[int]] = None
    min_div: Optional[float] = None
    balance: Optional[float] = None
    p: Optional[float] = None
    u_scale: float = 0.25
    literal: bool = False
    n_samples: int = Field(default=1500, ge=100)
    trials: int = Field(default=24, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _mode(self):
        if self.u_set is None and self.p is None:
            raise ValueError("provide u_set (explicit instance) or p (random-graph instantiation)")
        if self.u_set is not None and (self.min_div is None or self.balance is None):
            raise ValueError("explicit instances need min_div and balance")
        return self


class ControlledSetOut(BaseModel):
    u_set: list[int]
    alpha: float
    half_width: float
    provenance: str
    target: Optional[float] = None
    target_met: Optional[bool] = None
    spread: Optional[float] = None
    witness: WitnessOut
    trace: list[str] = []


class SynthesizeRequest(BaseModel):
    graph: GraphIn
    k: Optional[float] = None  # default sqrt(n)
    c1: float = 1.0
    c2: float = 1.0
    c: float = 1.0
    depth_cap: int = 6
    exact_cutoff: int = 14
    n_samples: int = Field(default=1500, ge=100)
    witness_trials: int = Field(default=24, ge=1)
    partition_attempts: int = Field(default=60, ge=1)
    seed: int = 0


class ExperimentRequest(BaseModel):
    kind: str  # "hom" | "f" | "regime"
    n_values: list[int]
    p_values: list[float]
    seeds: list[int]
    u_scale: float = 0.25
    witness_trials: int = 24
    n_samples: int = 400
    hom_guard: int = 64
    exact_guard: int = 16
    hom_upper_c: float = 1.0
    slope_window_n: tuple[float, float] = (0.5, 0.8)
    slope_window_p: tuple[float, float] = (0.2, 0.47)
    commit: str = ""
    threads: int = 1


class RowOut(BaseModel):
    n: int
    p: float
    seed: int
    metric: str
    value: float
    half_width: float
    budget: str
    commit: str


class FitOut(BaseModel):
    axis: str
    slope: float
    intercept: float
    stderr: float
    window: tuple[float, float]
    passed: bool
    points: int


class ExperimentResponse(BaseModel):
    rows: list[RowOut]
    fits: list[FitOut]
    window_checks: list[dict]
    notes: list[str]
    csv: str


class HealthResponse(BaseModel):
    status: str
    service: str
    version: str
