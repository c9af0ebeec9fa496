"""FastAPI service wrapping the core library.

Each endpoint is a thin adapter: decode the payload, call the library, encode
the result. Precondition violations map to 422, failed constructions to 409;
both carry {"error": {"type", "message"}} so the CLI can pick exit codes.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..badness import bad_cross, bad_pair, bad_set
from ..clusters import ClusterParams, theta_moment
from ..distributions import spec_from_dict
from ..errors import ConstructionError, PreconditionError
from ..experiments import ExperimentPlan, rows_to_csv, run_experiment
from ..graphs import Graph, VertexSet, dumps_graph, generate_gnp, loads_graph
from ..oracles import f_exact, f_lower_greedy, hom_exact, regularize
from ..partition import PartitionConfig, eligible_set, run_partition, verify_partition
from ..synthesis import (
    PressureInstance,
    SynthesisBudget,
    pressure_pipeline,
    realize_witness,
    synthesize,
)
from ..experiments import section1_instance
from . import schemas as sc

app = FastAPI(title="degdiv", version=__version__)


@app.exception_handler(PreconditionError)
async def _precondition(request: Request, exc: PreconditionError):
    return JSONResponse(status_code=422,
                        content={"error": {"type": "precondition", "message": str(exc)}})


@app.exception_handler(ConstructionError)
async def _construction(request: Request, exc: ConstructionError):
    return JSONResponse(status_code=409,
                        content={"error": {"type": "construction", "message": str(exc)}})


def _graph(gi: sc.GraphIn) -> Graph:
    if gi.gnp is not None:
        return generate_gnp(gi.gnp.n, gi.gnp.p, gi.gnp.seed)
    return loads_graph(gi.edge_text)


def _vset(g: Graph, members, default_full: bool = True) -> VertexSet:
    if members is None:
        return g.vertices() if default_full else VertexSet.empty(g.n)
    return VertexSet.from_members(g.n, members)


def _witness_out(w) -> sc.WitnessOut:
    return sc.WitnessOut(value=w.value, witness=w.marked.members(), host=w.host.members())


@app.get("/healthz", response_model=sc.HealthResponse)
def healthz() -> sc.HealthResponse:
    return sc.HealthResponse(status="ok", service="degdiv", version=__version__)


@app.post("/gen", response_model=sc.GenResponse)
def gen(req: sc.GenRequest) -> sc.GenResponse:
    g = generate_gnp(req.n, req.p, req.seed)
    return sc.GenResponse(n=g.n, m=g.edge_count(), edge_text=dumps_graph(g))


@app.post("/hom", response_model=sc.HomResponse)
def hom(req: sc.HomRequest) -> sc.HomResponse:
    result = hom_exact(_graph(req.graph), guard=req.guard)
    return sc.HomResponse(value=result.value, witness=result.witness.members(), kind=result.kind)


@app.post("/f-exact", response_model=sc.WitnessOut)
def f_exact_ep(req: sc.FExactRequest) -> sc.WitnessOut:
    return _witness_out(f_exact(_graph(req.graph), guard=req.guard))


@app.post("/f-greedy", response_model=sc.WitnessOut)
def f_greedy_ep(req: sc.FGreedyRequest) -> sc.WitnessOut:
    return _witness_out(f_lower_greedy(_graph(req.graph), effort=req.effort, seed=req.seed))


@app.post("/regularize", response_model=sc.RegularizeResponse)
def regularize_ep(req: sc.RegularizeRequest) -> sc.RegularizeResponse:
    g = _graph(req.graph)
    subset = regularize(g)
    members = subset.members()
    degs = [g.degree_within(v, subset) for v in members]
    return sc.RegularizeResponse(
        vertices=members, size=len(members), max_degree=max(degs), min_degree=min(degs),
        ratio_bound=5.0 * math.log2(g.n), size_floor=g.n / (30.0 * math.log2(g.n)))


@app.post("/bad")
def bad_ep(req: sc.BadRequest):
    g = _graph(req.graph)
    spec = spec_from_dict(req.spec)
    s = _vset(g, req.s)
    if req.u_set is None:
        est = bad_pair(g, spec, req.u, req.v, s, req.n_samples, seed=req.seed)
        return sc.BadPairResponse(point=est.point, half_width=est.half_width,
                                  window_center=est.window_center, samples=est.samples)
    u_set = VertexSet.from_members(g.n, req.u_set)
    if req.v_set is not None:
        out = bad_cross(g, spec, u_set, VertexSet.from_members(g.n, req.v_set), s,
                        req.n_samples, seed=req.seed)
    else:
        out = bad_set(g, spec, u_set, s, req.n_samples, seed=req.seed)
    return sc.BadSetResponse(total=out.total, alpha=out.alpha, pair_count=out.pair_count,
                             half_width_total=out.half_width_total)


@app.post("/cluster", response_model=sc.ClusterResponse)
def cluster_ep(req: sc.ClusterRequest) -> sc.ClusterResponse:
    g = _graph(req.graph)
    params = ClusterParams(scale=req.scale, growth=req.growth, ambient=_vset(g, req.ambient))
    view = theta_moment(g, req.vertex, params)
    return sc.ClusterResponse(
        vertex=view.vertex, moment=view.moment, cluster=view.w_star.members(),
        halo=view.w_plus.members(), level_sizes=list(view.level_sizes),
        ambient_degree=view.ambient_degree, degenerate=view.degenerate)


@app.post("/partition", response_model=sc.PartitionResponse)
def partition_ep(req: sc.PartitionRequest) -> sc.PartitionResponse:
    g = _graph(req.graph)
    o = req.options
    cfg = PartitionConfig(
        target_count=o.target_count, scale=o.scale, growth=o.growth, alpha=o.alpha,
        max_attempts=o.max_attempts, mode=o.mode, relax_degree_floor=o.relax_degree_floor,
        relax_a2=o.relax_a2, relax_a3=o.relax_a3, relax_ii=o.relax_ii, relax_v=o.relax_v)
    if req.candidates is not None:
        a = VertexSet.from_members(g.n, req.candidates)
    else:
        params = ClusterParams(scale=cfg.scale, growth=cfg.growth, ambient=g.vertices())
        a = eligible_set(g, params, cfg)
    res = run_partition(g, a, cfg, seed=req.seed)
    report = verify_partition(g, res, cfg)
    return sc.PartitionResponse(
        t=res.t, u_list=res.u_list, v_sets=[v.members() for v in res.v_sets],
        s=res.s.members(), d_list=res.d_list, gamma=res.gamma,
        attempts_used=res.attempts_used, bucket_level=res.bucket_level,
        bucket_moment=res.bucket_moment, bucket_size=res.bucket_size, rate=res.rate,
        notes=res.notes, relaxation=res.relaxation, event_log=res.event_log,
        report=[sc.ConclusionOut(name=c.name, exact=c.exact, holds=c.holds,
                                 measured=c.measured, bound=c.bound, detail=c.detail)
                for c in report.checks],
        report_exact_ok=report.exact_ok)


@app.post("/pressure", response_model=sc.ControlledSetOut)
def pressure_ep(req: sc.PressureRequest) -> sc.ControlledSetOut:
    g = _graph(req.graph)
    if req.u_set is not None:
        inst = PressureInstance(u_set=VertexSet.from_members(g.n, req.u_set),
                                s=_vset(g, req.s), min_div=req.min_div, balance=req.balance)
    else:
        inst = section1_instance(g, req.p, req.u_scale, req.seed, literal=req.literal)
    cs = pressure_pipeline(g, inst, n_samples=req.n_samples, seed=req.seed)
    witness = realize_witness(g, cs, trials=req.trials, seed=req.seed)
    return sc.ControlledSetOut(
        u_set=cs.u_set.members(), alpha=cs.alpha, half_width=cs.half_width,
        provenance=cs.provenance, target=cs.details.get("target"),
        target_met=cs.details.get("target_met"), spread=cs.details.get("spread"),
        witness=_witness_out(witness), trace=[])


@app.post("/synthesize", response_model=sc.ControlledSetOut)
def synthesize_ep(req: sc.SynthesizeRequest) -> sc.ControlledSetOut:
    g = _graph(req.graph)
    k = req.k if req.k is not None else math.sqrt(g.n)
    budget = SynthesisBudget(
        k=k, c1=req.c1, c2=req.c2, c=req.c, depth_cap=req.depth_cap,
        exact_cutoff=req.exact_cutoff, n_samples=req.n_samples,
        witness_trials=req.witness_trials, partition_attempts=req.partition_attempts)
    cs = synthesize(g, budget, seed=req.seed)
    witness = realize_witness(cs.graph, cs, trials=req.witness_trials,
                              seed=req.seed)
    carried = cs.details.get("witness")
    if carried is not None and carried.value > witness.value:
        witness = carried
    return sc.ControlledSetOut(
        u_set=cs.u_set.members(), alpha=cs.alpha, half_width=cs.half_width,
        provenance=cs.provenance, spread=None, target=None, target_met=None,
        witness=_witness_out(witness), trace=cs.details.get("trace", []))


@app.post("/experiment", response_model=sc.ExperimentResponse)
def experiment_ep(req: sc.ExperimentRequest) -> sc.ExperimentResponse:
    plan = ExperimentPlan(
        kind=req.kind, n_values=tuple(req.n_values), p_values=tuple(req.p_values),
        seeds=tuple(req.seeds), u_scale=req.u_scale, witness_trials=req.witness_trials,
        n_samples=req.n_samples, hom_guard=req.hom_guard, exact_guard=req.exact_guard,
        hom_upper_c=req.hom_upper_c, slope_window_n=tuple(req.slope_window_n),
        slope_window_p=tuple(req.slope_window_p), commit=req.commit, threads=req.threads)
    report = run_experiment(plan)
    return sc.ExperimentResponse(
        rows=[sc.RowOut(**r.__dict__) for r in report.rows],
        fits=[sc.FitOut(**f.__dict__) for f in report.fits],
        window_checks=report.window_checks, notes=report.notes,
        csv=rows_to_csv(report.rows))
