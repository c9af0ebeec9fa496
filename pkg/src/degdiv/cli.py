"""Thin CLI client for the degdiv service.

Every subcommand builds a JSON request and sends it to the FastAPI app --
in-process by default (no server needed, bit-identical output for a fixed
seed), or to a running instance via --server. `degdiv serve` starts one.

Exit codes: 0 success, 2 precondition failure, 3 construction failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PRECONDITION = 2
EXIT_CONSTRUCTION = 3


def _post(server: Optional[str], path: str, payload: dict):
    import httpx

    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.post(path, json=payload)

    import asyncio

    from .service import app

    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport, base_url="http://degdiv.internal",
                                     timeout=None) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _graph_payload(args) -> dict:
    if args.gnp is not None and args.graph is not None:
        sys.stderr.write("precondition failure: --graph and --gnp are mutually exclusive\n")
        raise SystemExit(EXIT_PRECONDITION)
    if args.gnp is not None:
        n, p, seed = args.gnp.split(",")
        return {"gnp": {"n": int(n), "p": float(p), "seed": int(seed)}}
    if args.graph is not None:
        with open(args.graph, "r", encoding="utf8") as fh:
            return {"edge_text": fh.read()}
    sys.stderr.write("precondition failure: a graph is required (--graph FILE or --gnp N,P,SEED)\n")
    raise SystemExit(EXIT_PRECONDITION)


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip() != ""]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip() != ""]


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _dispatch(args, path: str, payload: dict) -> int:
    resp = _post(args.server, path, payload)
    if resp.status_code >= 400:
        try:
            error = resp.json().get("error", {})
        except Exception:
            error = {}
        kind = error.get("type", "http")
        message = error.get("message", resp.text)
        sys.stderr.write(f"{kind} failure: {message}\n")
        if kind == "precondition":
            return EXIT_PRECONDITION
        if kind == "construction":
            return EXIT_CONSTRUCTION
        return EXIT_USAGE
    body = resp.json()
    if args.cmd == "gen" and args.out:
        # the graph text itself is the artifact; the summary goes to stdout
        with open(args.out, "w", encoding="utf8", newline="\n") as fh:
            fh.write(body["edge_text"])
        sys.stdout.write(json.dumps({"n": body["n"], "m": body["m"], "out": args.out}) + "\n")
        return EXIT_OK
    if args.format == "csv":
        if "csv" not in body:
            sys.stderr.write("precondition failure: csv output is only available for experiments\n")
            return EXIT_PRECONDITION
        _emit(args, body["csv"])
        return EXIT_OK
    _emit(args, resp.text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="degdiv", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    # global options live on the root (with defaults) and on every subcommand
    # (defaults suppressed), so they are accepted on either side of the verb
    def add_common(target, suppress: bool):
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        target.add_argument("--server", default=d(None),
                            help="remote service URL (default: in-process)")
        target.add_argument("--seed", type=int, default=d(0), help="random seed (default 0)")
        target.add_argument("--threads", type=int, default=d(1),
                            help="worker threads for experiments")
        target.add_argument("--out", default=d(None),
                            help="write output to this file instead of stdout")
        target.add_argument("--format", choices=("json", "csv"), default=d("json"))

    add_common(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    add_common(common, suppress=True)
    sub = parser.add_subparsers(dest="cmd", required=True)

    def add_graph(sp):
        sp.add_argument("--graph", default=None, help="graph text file")
        sp.add_argument("--gnp", default=None, metavar="N,P,SEED",
                        help="generate the input graph instead of reading a file")

    sp = sub.add_parser("gen", parents=[common], help="generate a seeded random graph")
    sp.add_argument("n", type=int)
    sp.add_argument("p", type=float)

    sp = sub.add_parser("hom", parents=[common], help="exact largest homogeneous set")
    add_graph(sp)
    sp.add_argument("--guard", type=int, default=128)

    sp = sub.add_parser("f-exact", parents=[common], help="exact distinct-degree number")
    add_graph(sp)
    sp.add_argument("--guard", type=int, default=20)

    sp = sub.add_parser("f-greedy", parents=[common], help="greedy distinct-degree lower bound")
    add_graph(sp)
    sp.add_argument("--effort", type=int, default=16)

    sp = sub.add_parser("regularize", parents=[common], help="degree-regular induced subset")
    add_graph(sp)

    sp = sub.add_parser("bad", parents=[common], help="small-ball collision estimate")
    add_graph(sp)
    sp.add_argument("--spec", default=None, help="distribution spec JSON file")
    sp.add_argument("--spec-json", default=None, help="distribution spec JSON inline")
    sp.add_argument("--pair", default=None, metavar="U,V")
    sp.add_argument("--set", dest="uset", default=None, metavar="V1,V2,...")
    sp.add_argument("--cross", default=None, metavar="W1,W2,...")
    sp.add_argument("--coords", default=None, metavar="S1,S2,...",
                    help="coordinate set (default: all vertices)")
    sp.add_argument("--samples", type=int, default=10000)

    sp = sub.add_parser("cluster", parents=[common], help="cluster view of a vertex")
    add_graph(sp)
    sp.add_argument("--vertex", type=int, required=True)
    sp.add_argument("--scale", type=float, required=True)
    sp.add_argument("--growth", type=float, required=True)
    sp.add_argument("--ambient", default=None, metavar="S1,S2,...")

    sp = sub.add_parser("partition", parents=[common], help="randomized cluster partition")
    add_graph(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--scale", type=float, required=True)
    sp.add_argument("--growth", type=float, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--attempts", type=int, default=50)
    sp.add_argument("--mode", choices=("strict", "relaxed"), default="relaxed")
    sp.add_argument("--relax-degree-floor", type=float, default=1.0)
    sp.add_argument("--relax-a2", type=float, default=1.0)
    sp.add_argument("--relax-a3", type=float, default=1.0)
    sp.add_argument("--relax-ii", type=float, default=1.0)
    sp.add_argument("--relax-v", type=float, default=1.0)
    sp.add_argument("--candidates", default=None, metavar="V1,V2,...")

    sp = sub.add_parser("pressure", parents=[common], help="diverse-set pressure pipeline")
    add_graph(sp)
    sp.add_argument("--p", type=float, default=None,
                    help="edge density for the random-graph instantiation")
    sp.add_argument("--u-set", default=None, metavar="V1,V2,...")
    sp.add_argument("--min-div", type=float, default=None)
    sp.add_argument("--balance", type=float, default=None)
    sp.add_argument("--u-scale", type=float, default=0.25)
    sp.add_argument("--literal", action="store_true",
                    help="use the stated floors without measured tempering")
    sp.add_argument("--samples", type=int, default=1500)
    sp.add_argument("--trials", type=int, default=24)

    sp = sub.add_parser("synthesize", parents=[common], help="recursive controlled-set synthesis")
    add_graph(sp)
    sp.add_argument("--k", type=float, default=None, help="target (default sqrt(n))")
    sp.add_argument("--c1", type=float, default=1.0)
    sp.add_argument("--c2", type=float, default=1.0)
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--depth-cap", type=int, default=6)
    sp.add_argument("--exact-cutoff", type=int, default=14)
    sp.add_argument("--samples", type=int, default=1500)
    sp.add_argument("--trials", type=int, default=24)
    sp.add_argument("--attempts", type=int, default=60)

    sp = sub.add_parser("experiment", parents=[common], help="scaling-law experiment grids")
    sp.add_argument("--kind", choices=("hom", "f", "regime"), required=True)
    sp.add_argument("--n-values", required=True, metavar="N1,N2,...")
    sp.add_argument("--p-values", required=True, metavar="P1,P2,...")
    sp.add_argument("--grid-seeds", required=True, metavar="S1,S2,...")
    sp.add_argument("--u-scale", type=float, default=0.25)
    sp.add_argument("--trials", type=int, default=24)
    sp.add_argument("--samples", type=int, default=400)
    sp.add_argument("--commit", default="")

    sp = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8322)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.cmd == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    if args.cmd == "gen":
        return _dispatch(args, "/gen", {"n": args.n, "p": args.p, "seed": args.seed})

    if args.cmd == "hom":
        return _dispatch(args, "/hom", {"graph": _graph_payload(args), "guard": args.guard})

    if args.cmd == "f-exact":
        return _dispatch(args, "/f-exact", {"graph": _graph_payload(args), "guard": args.guard})

    if args.cmd == "f-greedy":
        return _dispatch(args, "/f-greedy",
                         {"graph": _graph_payload(args), "effort": args.effort, "seed": args.seed})

    if args.cmd == "regularize":
        return _dispatch(args, "/regularize", {"graph": _graph_payload(args)})

    if args.cmd == "bad":
        if (args.spec is None) == (args.spec_json is None):
            sys.stderr.write("precondition failure: provide exactly one of --spec/--spec-json\n")
            return EXIT_PRECONDITION
        if args.spec is not None:
            with open(args.spec, "r", encoding="utf8") as fh:
                spec = json.load(fh)
        else:
            spec = json.loads(args.spec_json)
        payload = {"graph": _graph_payload(args), "spec": spec,
                   "n_samples": args.samples, "seed": args.seed}
        if args.pair is not None:
            u, v = _int_list(args.pair)
            payload.update(u=u, v=v)
        elif args.uset is not None:
            payload["u_set"] = _int_list(args.uset)
            if args.cross is not None:
                payload["v_set"] = _int_list(args.cross)
        else:
            sys.stderr.write("precondition failure: provide --pair or --set\n")
            return EXIT_PRECONDITION
        if args.coords is not None:
            payload["s"] = _int_list(args.coords)
        return _dispatch(args, "/bad", payload)

    if args.cmd == "cluster":
        payload = {"graph": _graph_payload(args), "vertex": args.vertex,
                   "scale": args.scale, "growth": args.growth}
        if args.ambient is not None:
            payload["ambient"] = _int_list(args.ambient)
        return _dispatch(args, "/cluster", payload)

    if args.cmd == "partition":
        payload = {
            "graph": _graph_payload(args), "seed": args.seed,
            "options": {
                "target_count": args.k, "scale": args.scale, "growth": args.growth,
                "alpha": args.alpha, "max_attempts": args.attempts, "mode": args.mode,
                "relax_degree_floor": args.relax_degree_floor, "relax_a2": args.relax_a2,
                "relax_a3": args.relax_a3, "relax_ii": args.relax_ii, "relax_v": args.relax_v,
            },
        }
        if args.candidates is not None:
            payload["candidates"] = _int_list(args.candidates)
        return _dispatch(args, "/partition", payload)

    if args.cmd == "pressure":
        payload = {"graph": _graph_payload(args), "u_scale": args.u_scale,
                   "literal": args.literal, "n_samples": args.samples,
                   "trials": args.trials, "seed": args.seed}
        if args.u_set is not None:
            payload.update(u_set=_int_list(args.u_set), min_div=args.min_div,
                           balance=args.balance)
        if args.p is not None:
            payload["p"] = args.p
        return _dispatch(args, "/pressure", payload)

    if args.cmd == "synthesize":
        payload = {"graph": _graph_payload(args), "k": args.k, "c1": args.c1, "c2": args.c2,
                   "c": args.c, "depth_cap": args.depth_cap, "exact_cutoff": args.exact_cutoff,
                   "n_samples": args.samples, "witness_trials": args.trials,
                   "partition_attempts": args.attempts, "seed": args.seed}
        return _dispatch(args, "/synthesize", payload)

    if args.cmd == "experiment":
        payload = {"kind": args.kind, "n_values": _int_list(args.n_values),
                   "p_values": _float_list(args.p_values), "seeds": _int_list(args.grid_seeds),
                   "u_scale": args.u_scale, "witness_trials": args.trials,
                   "n_samples": args.samples, "commit": args.commit, "threads": args.threads}
        return _dispatch(args, "/experiment", payload)

    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
