"""Command-line driver: ``l1lab gen|embed|eval|certify|experiment``.

Exit status is 0 iff every verdict (or certificate) in the output passes.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .decomp import SnowflakeParams, snowflake_embed
from .errors import L1LabError
from .experiments import ExperimentConfig, run_experiment
from .graphs import diamond, hypercube_metric, laakso, random_pointset, shortest_path_metric, walsh_pointset
from .lower_bounds import (
    LinearMap,
    certify_laakso_embedding,
    heuristic_best_linear,
    hypercube_concentration_check,
    walsh_bound,
    walsh_linear_distortion,
)
from .metric import (
    PointSet,
    distortion_report,
    doubling_constant,
    metric_from_points,
    validate_metric,
)
from .stable import apply, calibrated_C, embed_theorem1, sample_operator


def _emit(obj, out, fmt="json") -> None:
    if fmt == "csv" and isinstance(obj, dict) and "records" in obj:
        text = io.records_to_csv(obj["records"])
    else:
        text = io.dumps(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_space(path):
    """Metric JSON or point-set CSV, chosen by extension."""
    if str(path).endswith(".csv"):
        return io.read_pointset(path)
    return io.read_metric(path)


def cmd_gen(args) -> int:
    fam = args.family
    if fam in ("laakso", "diamond"):
        G = (laakso if fam == "laakso" else diamond)(args.level)
        if args.metric:
            io.write_metric(shortest_path_metric(G), args.out) if args.out else _emit(shortest_path_metric(G), None)
        else:
            io.write_graph(G, args.out) if args.out else _emit(G, None)
    elif fam == "cube":
        M = hypercube_metric(args.k)
        io.write_metric(M, args.out) if args.out else _emit(M, None)
    elif fam in ("walsh", "random"):
        ps = walsh_pointset(args.k, args.p) if fam == "walsh" else \
            random_pointset(args.n, args.d, args.p, args.distribution, args.seed)
        if args.out:
            io.write_pointset(ps, args.out)
        else:
            sys.stdout.write(io.pointset_to_csv(ps))
    return 0


def cmd_embed(args) -> int:
    if args.method == "stable":
        ps = io.read_pointset(args.inp)
        if args.p == 1:
            res = embed_theorem1(PointSet(1, ps.coords), args.J, args.seed, args.max_tries,
                                 args.q, args.C)
            img, report = res.image, {**res.report.to_dict(), "tries_used": res.tries_used,
                                      "threshold": res.threshold}
        else:
            C = args.C if args.C is not None else calibrated_C(args.p, args.J)
            T = sample_operator(args.p, ps.d, args.J, C, args.seed)
            img = apply(T, PointSet(args.p, ps.coords))
            src = ps if args.p >= 1 else None
            report = distortion_report(src, img, args.q).to_dict() if src is not None else {}
        if args.out:
            io.write_pointset(img, args.out)
        _emit(report, args.report)
        return 0
    M = _load_space(args.inp)
    if isinstance(M, PointSet):
        M = metric_from_points(M)
    params = SnowflakeParams(args.partitions, args.signs)
    res = snowflake_embed(M, args.eps, params, args.seed)
    if args.out:
        io.write_pointset(res.image, args.out)
    _emit(res.summary(), args.report)
    return 0 if not res.envelope_violations else 1


def cmd_eval(args) -> int:
    if args.what == "distortion":
        src, img = _load_space(args.src), _load_space(args.img)
        _emit(distortion_report(src, img, args.q), args.out)
        return 0
    M = _load_space(args.inp)
    if isinstance(M, PointSet):
        M = metric_from_points(M)
    if args.what == "validate":
        v = validate_metric(M)
        _emit({"valid": not v, "violations": [vars(x) for x in v]}, args.out)
        return 0 if not v else 1
    _emit({"mode": args.mode, "doubling_constant": doubling_constant(M, args.mode)}, args.out)
    return 0


def cmd_certify(args) -> int:
    if args.kind == "laakso":
        img = io.read_pointset(args.inp)
        p = args.p if args.p is not None else img.p
        cert = certify_laakso_embedding(args.level, PointSet(p, img.coords))
    elif args.kind == "walsh":
        A = walsh_pointset(args.k, args.p)
        if args.map:
            data = json.loads(Path(args.map).read_text())
            T = LinearMap(np.asarray(data["matrix"] if isinstance(data, dict) else data), args.p)
            rep, residual = walsh_linear_distortion(T, A, args.p)
        else:
            T, rep = heuristic_best_linear(A, args.p, restarts=args.restarts, seed=args.seed)
            _, residual = walsh_linear_distortion(T, A, args.p)
        bound = walsh_bound(args.k, args.p)
        cert = {"bound": bound, "achieved": rep.distortion,
                "witness": {"map": T.matrix.tolist() if args.search else None},
                "passed": rep.distortion >= bound - 1e-6 and residual < 1e-12,
                "details": {"report": rep.to_dict(), "residual": residual}}
        _emit(cert, args.out)
        return 0 if cert["passed"] else 1
    else:
        text = Path(args.coords).read_text().splitlines()
        values = [float(x.split(",")[0]) for x in text if x.strip() and not x.startswith("p=")]
        if len(values) != 2 ** args.k:
            raise L1LabError(f"expected {2 ** args.k} values, got {len(values)}")
        cert = hypercube_concentration_check(values, args.alpha)
    _emit(cert, args.out)
    return 0 if cert.passed else 1


def cmd_experiment(args) -> int:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    data.setdefault("experiment", args.experiment)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out:
        data["out"] = args.out
    data["format"] = args.format or data.get("format", "json")
    cfg = ExperimentConfig.from_dict(data)
    res = run_experiment(cfg)
    _emit(res.to_dict(), cfg.out, cfg.format)
    return 0 if res.passed else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("json", "csv"), default=None)

    parser = argparse.ArgumentParser(prog="l1lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate instances")
    gsub = gen.add_subparsers(dest="family", required=True)
    for fam in ("laakso", "diamond"):
        g = gsub.add_parser(fam, parents=[common])
        g.add_argument("--level", type=int, required=True)
        g.add_argument("--metric", action="store_true", help="write the shortest-path metric")
    g = gsub.add_parser("cube", parents=[common])
    g.add_argument("--k", type=int, required=True)
    g = gsub.add_parser("walsh", parents=[common])
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--p", type=float, default=1.0)
    g = gsub.add_parser("random", parents=[common])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--p", type=float, default=1.0)
    g.add_argument("--distribution", choices=("gaussian", "unit-cube"), default="gaussian")
    gen.set_defaults(func=cmd_gen)

    emb = sub.add_parser("embed", help="embed a point set or metric")
    esub = emb.add_subparsers(dest="method", required=True)
    e = esub.add_parser("stable", parents=[common])
    e.add_argument("--p", type=float, default=1.0)
    e.add_argument("--J", type=int, default=10_000)
    e.add_argument("--C", type=float, default=None)
    e.add_argument("--q", type=float, default=0.5)
    e.add_argument("--max-tries", type=int, default=20)
    e.add_argument("--in", dest="inp", required=True)
    e.add_argument("--report", default=None)
    e = esub.add_parser("snowflake", parents=[common])
    e.add_argument("--eps", type=float, required=True)
    e.add_argument("--partitions", type=int, default=16)
    e.add_argument("--signs", type=int, default=64)
    e.add_argument("--in", dest="inp", required=True)
    e.add_argument("--report", default=None)
    emb.set_defaults(func=cmd_embed)

    ev = sub.add_parser("eval", help="evaluate metrics and maps")
    vsub = ev.add_subparsers(dest="what", required=True)
    v = vsub.add_parser("distortion", parents=[common])
    v.add_argument("--src", required=True)
    v.add_argument("--img", required=True)
    v.add_argument("--q", type=float, default=0.5)
    v = vsub.add_parser("doubling", parents=[common])
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--mode", choices=("exact", "greedy"), default="exact")
    v = vsub.add_parser("validate", parents=[common])
    v.add_argument("--in", dest="inp", required=True)
    ev.set_defaults(func=cmd_eval)

    cert = sub.add_parser("certify", help="run lower-bound certificates")
    csub = cert.add_subparsers(dest="kind", required=True)
    c = csub.add_parser("laakso", parents=[common])
    c.add_argument("--level", type=int, required=True)
    c.add_argument("--p", type=float, default=None)
    c.add_argument("--in", dest="inp", required=True)
    c = csub.add_parser("walsh", parents=[common])
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--p", type=float, default=1.0)
    group = c.add_mutually_exclusive_group(required=True)
    group.add_argument("--map", default=None)
    group.add_argument("--search", action="store_true")
    c.add_argument("--restarts", type=int, default=20)
    c = csub.add_parser("cube", parents=[common])
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--coords", required=True)
    cert.set_defaults(func=cmd_certify)

    ex = sub.add_parser("experiment", parents=[common], help="run a seeded experiment")
    ex.add_argument("experiment", choices=("thm1", "walsh", "laakso", "snowflake", "cube"))
    ex.add_argument("--config", default=None, help="JSON config mirroring ExperimentConfig")
    ex.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is None and args.command != "experiment":
        args.seed = 0
    try:
        return args.func(args)
    except L1LabError as exc:
        print(f"l1lab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
