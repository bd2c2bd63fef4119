"""Command-line interface.

Exit codes: 0 success, 2 identifiability failure, 3 parse or validation
failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import io
from .constraints import TARGETS, derive_constraints, plan_removals, residual_of_plan
from .errors import EdgeSemError, LabelMismatch, NotIdentifiable, ValidationError
from .graph import Admg, parse_edge, sort_labels
from .identify import (
    check_add_directed,
    check_remove_bidirected,
    check_remove_directed,
    check_simple_generic,
    identify_path_sum,
    identify_path_sum_cutvertex,
)
from .intervene import add_directed, apply_to_data, remove_bidirected, remove_directed
from .random_models import random_admg, random_parameters
from .sem import CovMatrix, Dataset, covariance_from_params, sample_cov, simulate, standardize
from .treks import enumerate_treks


@dataclass
class RunConfig:
    command: str
    graph: Optional[str] = None
    params: Optional[str] = None
    sigma: Optional[str] = None
    data: Optional[str] = None
    edge: Optional[str] = None
    op: str = "remove"
    lam: Optional[float] = None
    tol: float = 1e-8
    seed: int = 0
    n: int = 1000
    standardize: Optional[bool] = None
    out: Optional[str] = None
    format: str = "machine"
    method: str = "regression"
    target: str = "directed-only"
    vertices: int = 6
    p_directed: float = 0.3
    p_bidirected: float = 0.2
    pair: Optional[str] = None

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        fields = {k: v for k, v in vars(ns).items() if k in cls.__dataclass_fields__ and v is not None}
        if getattr(ns, "lambda_", None) is not None:
            fields["lam"] = ns.lambda_
        return cls(**fields)


def _emit(cfg: RunConfig, doc: dict, table: str) -> None:
    text = json.dumps(doc, indent=2) + "\n" if cfg.format == "machine" else table.rstrip("\n") + "\n"
    if cfg.out:
        io.write_text(cfg.out, text)
    else:
        sys.stdout.write(text)


def _matrix_table(s: CovMatrix) -> str:
    width = max(8, max(len(v) for v in s.labels) + 1)
    head = " " * width + "".join(f"{v:>{width + 2}}" for v in s.labels)
    rows = [f"{v:<{width}}" + "".join(f"{x:>{width + 2}.4f}" for x in row) for v, row in zip(s.labels, s.values)]
    return "\n".join([head, *rows])


def _graph(cfg: RunConfig) -> Admg:
    if not cfg.graph:
        raise ValidationError("--graph is required")
    return io.load_graph(cfg.graph)


def _covariance(cfg: RunConfig, g: Admg, allow_data: bool = True) -> CovMatrix:
    sources = [x for x in (cfg.params, cfg.sigma, cfg.data if allow_data else None) if x]
    if len(sources) > 1:
        raise ValidationError("give exactly one covariance source among --params, --sigma, --data")
    if not sources:
        raise ValidationError("a covariance source is required (--params, --sigma or --data)")
    if cfg.params:
        s = covariance_from_params(io.load_params(cfg.params, g))
    elif cfg.sigma:
        s = io.load_cov(cfg.sigma)
    else:
        d = io.load_dataset(cfg.data)
        if cfg.standardize:
            d, _ = standardize(d)
        s = sample_cov(d)
    s.matches(g)
    return s.reorder(list(g.vertices))


def _edge(cfg: RunConfig) -> tuple[str, str, str]:
    if not cfg.edge:
        raise ValidationError("--edge is required")
    return parse_edge(cfg.edge)


# -- commands ------------------------------------------------------------

def cmd_validate(cfg: RunConfig) -> int:
    g = _graph(cfg)
    doc = {
        "ok": True,
        "vertices": len(g.vertices),
        "directed": len(g.directed),
        "bidirected": len(g.bidirected),
        "topological_order": g.topological_order(),
        "simple": g.is_simple(),
    }
    lines = [f"OK: {doc['vertices']} vertices, {doc['directed']} directed, {doc['bidirected']} bidirected"]
    if cfg.params:
        p = io.load_params(cfg.params, g)
        covariance_from_params(p)
        doc["params"] = "ok"
        lines.append("parameters: ok")
    if cfg.sigma:
        s = io.load_cov(cfg.sigma)
        s.matches(g)
        s.require_pd()
        doc["sigma"] = "ok"
        lines.append("covariance: ok (positive definite)")
    _emit(cfg, doc, "\n".join(lines))
    return 0


def _identify_report(cfg: RunConfig, g: Admg):
    kind, a, b = _edge(cfg)
    if cfg.op == "path":
        if kind != "directed":
            raise ValidationError("path queries take 'b->c'")
        fn = identify_path_sum_cutvertex if cfg.method == "cutvertex" else identify_path_sum
        return fn(g, a, b)
    if kind == "bidirected":
        if cfg.op != "remove":
            raise ValidationError("only removal is supported for bidirected edges")
        return check_remove_bidirected(g, a, b, cfg.method)
    if cfg.op == "add":
        return check_add_directed(g, a, b, cfg.method)
    return check_remove_directed(g, a, b, cfg.method)


def cmd_identify(cfg: RunConfig) -> int:
    g = _graph(cfg)
    rep = check_simple_generic(g) if cfg.op == "model" else _identify_report(cfg, g)
    verdict = "OK" if rep.ok else "FAIL"
    table = f"{verdict}: {rep.summary()}"
    if rep.recipe:
        table += "\nrecipe:\n" + "\n".join(
            f"  beta[{st.source},{st.target} | {{{', '.join(sort_labels(st.adjustment))}}}]" for st in rep.recipe
        )
    _emit(cfg, rep.to_dict(), table)
    return 0 if rep.ok or rep.status == "unknown" else NotIdentifiable.exit_code


def _intervene(cfg: RunConfig, g: Admg, s: CovMatrix):
    kind, a, b = _edge(cfg)
    if kind == "bidirected":
        if cfg.op != "remove":
            raise ValidationError("only removal is supported for bidirected edges")
        return remove_bidirected(s, g, a, b, cfg.method)
    if cfg.op == "add":
        if cfg.lam is None:
            raise ValidationError("--lambda is required with --op add")
        return add_directed(s, g, a, b, cfg.lam, cfg.method)
    if cfg.op != "remove":
        raise ValidationError(f"unsupported --op {cfg.op!r} for intervene")
    return remove_directed(s, g, a, b, cfg.method)


def cmd_intervene(cfg: RunConfig) -> int:
    g = _graph(cfg)
    s = _covariance(cfg, g)
    res = _intervene(cfg, g, s)
    doc = {
        **res.to_dict(),
        "graph": io.graph_to_dict(res.new_graph),
        "covariance": io.cov_to_dict(res.new_cov),
    }
    table = "\n".join([
        f"{res.kind} {doc['edge']}: pd_check={'ok' if res.pd_ok else 'FAILED'}",
        _matrix_table(res.new_cov),
    ])
    _emit(cfg, doc, table)
    return 0


def cmd_transform(cfg: RunConfig) -> int:
    g = _graph(cfg)
    if not cfg.data:
        raise ValidationError("--data is required")
    d = io.load_dataset(cfg.data)
    if set(d.labels) != set(g.vertices):
        missing = sort_labels(set(g.vertices) - set(d.labels))
        extra = sort_labels(set(d.labels) - set(g.vertices))
        raise LabelMismatch(f"data header differs from graph: missing {missing}, extra {extra}")
    own_cov = not (cfg.params or cfg.sigma)
    std_on = own_cov if cfg.standardize is None else cfg.standardize
    work, st = standardize(d) if std_on else (d, None)
    if own_cov:
        s = sample_cov(work)
    else:
        s = _covariance(replace(cfg, data=None), g, allow_data=False).reorder(list(d.labels))
        if st is not None:
            # Work on the standardized scale so the identified quantities match the rows.
            s = CovMatrix(s.labels, s.values / np.outer(st.scale, st.scale))
    res = _intervene(cfg, g, s.reorder(list(g.vertices)))
    out = apply_to_data(work, res)
    if st is not None:
        # Undoing the scaling is inexact in floating point; untouched columns come back verbatim.
        same = np.all(out.rows == work.rows, axis=0)
        rows = np.array(st.invert(out).rows)
        rows[:, same] = d.rows[:, same]
        out = Dataset(d.labels, rows)
    text = io.dumps_dataset(out)
    if cfg.out:
        io.write_text(cfg.out, text)
    else:
        sys.stdout.write(text)
    info = {**res.to_dict(), "standardization": st.to_dict() if st else None}
    if cfg.format == "machine":
        sys.stderr.write(json.dumps(info) + "\n")
    else:
        sys.stderr.write(f"{res.kind} {info['edge']}: standardized={'yes' if st else 'no'}\n")
    return 0


def cmd_constraints(cfg: RunConfig) -> int:
    g = _graph(cfg)
    plan = plan_removals(g, cfg.target)
    cs = derive_constraints(g, plan)
    doc = cs.to_dict()
    lines = ["plan: " + (", ".join(plan.edges()) or "(empty)"),
             "constraints: " + (", ".join(f"({u},{v})" for u, v in cs.pairs) or "none")]
    if cfg.params or cfg.sigma or cfg.data:
        s = _covariance(cfg, g)
        res = residual_of_plan(s, cs)
        doc["residuals"] = [
            {"pair": list(r.pair), "value": r.value, "scale": r.scale, "relative": r.relative,
             "vanishes": r.relative <= cfg.tol}
            for r in res
        ]
        lines.append(f"{'pair':<10}{'value':>14}{'relative':>14}  vanishes (tol {cfg.tol:g})")
        lines += [f"({r.pair[0]},{r.pair[1]})".ljust(10) + f"{r.value:>14.4f}{r.relative:>14.4g}  "
                  f"{'yes' if r.relative <= cfg.tol else 'no'}" for r in res]
    _emit(cfg, doc, "\n".join(lines))
    return 0


def cmd_random(cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    g = random_admg(rng, cfg.vertices, cfg.p_directed, cfg.p_bidirected)
    p = random_parameters(rng, g)
    covariance_from_params(p)
    if cfg.out:
        io.write_text(f"{cfg.out}.graph.json", io.dumps_graph(g))
        io.write_text(f"{cfg.out}.params.json", io.dumps_params(p))
    else:
        sys.stdout.write(json.dumps({"graph": io.graph_to_dict(g), "params": io.params_to_dict(p)}, indent=2) + "\n")
    return 0


def cmd_cov(cfg: RunConfig) -> int:
    g = _graph(cfg)
    if not cfg.params:
        raise ValidationError("--params is required")
    s = covariance_from_params(io.load_params(cfg.params, g))
    _emit(cfg, io.cov_to_dict(s), _matrix_table(s))
    return 0


def cmd_treks(cfg: RunConfig) -> int:
    g = _graph(cfg)
    if not cfg.pair:
        raise ValidationError("--pair v,w is required")
    parts = [x.strip() for x in cfg.pair.split(",")]
    if len(parts) != 2:
        raise ValidationError("--pair must look like 'v,w'")
    p = io.load_params(cfg.params, g) if cfg.params else None
    treks = enumerate_treks(g, *parts)
    rows = []
    for t in treks:
        row = {"trek": str(t), "left": list(t.left), "right": list(t.right),
               "source": list(t.source) if t.is_bidirected else t.source}
        if p is not None:
            row["monomial"] = t.monomial(p)
        rows.append(row)
    doc = {"pair": parts, "count": len(treks), "treks": rows}
    if p is not None:
        doc["sum"] = float(sum(r["monomial"] for r in rows))
    lines = [f"{len(treks)} trek(s) between {parts[0]} and {parts[1]}"]
    lines += [r["trek"] + (f"  {r['monomial']:.4f}" if p is not None else "") for r in rows]
    _emit(cfg, doc, "\n".join(lines))
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    g = _graph(cfg)
    s = _covariance(cfg, g, allow_data=False)
    d = simulate(s, cfg.n, cfg.seed)
    text = io.dumps_dataset(d)
    if cfg.out:
        io.write_text(cfg.out, text)
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "identify": cmd_identify,
    "intervene": cmd_intervene,
    "transform": cmd_transform,
    "constraints": cmd_constraints,
    "random": cmd_random,
    "cov": cmd_cov,
    "treks": cmd_treks,
    "simulate": cmd_simulate,
}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; 2 is reserved for identifiability failures.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ValidationError.exit_code, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="edgesem", description="Edge interventions in linear Gaussian SEMs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, *flags):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--format", choices=["machine", "table"], default="machine")
        sp.add_argument("--out")
        for f in flags:
            f(sp)
        return sp

    graph = lambda sp: sp.add_argument("--graph", required=True, help="graph JSON file")
    params = lambda sp: sp.add_argument("--params", help="parameter JSON file")
    sigma = lambda sp: sp.add_argument("--sigma", help="covariance JSON file")
    data = lambda sp: sp.add_argument("--data", help="CSV dataset with a header row of labels")
    edge = lambda sp: sp.add_argument("--edge", required=True, help="'a->b' or 'a<->b'")
    method = lambda sp: sp.add_argument("--method", choices=["regression", "cutvertex"], default="regression")
    lam = lambda sp: sp.add_argument("--lambda", dest="lambda_", type=float, help="coefficient for --op add")
    seed = lambda sp: sp.add_argument("--seed", type=int, default=0)

    def op(choices, default="remove"):
        return lambda sp: sp.add_argument("--op", choices=choices, default=default)

    def std(sp):
        sp.add_argument("--standardize", dest="standardize", action="store_true", default=None)
        sp.add_argument("--no-standardize", dest="standardize", action="store_false")

    add("validate", "check a graph and optional parameters or covariance", graph, params, sigma)
    add("identify", "decide identifiability for an edge intervention or path sum", graph,
        lambda sp: sp.add_argument("--edge", help="'a->b' or 'a<->b'"),
        op(["remove", "add", "path", "model"]), method)
    add("intervene", "compute the interventional covariance", graph, params, sigma, data, edge,
        op(["remove", "add"]), lam, method, std)
    add("transform", "transform individual-level data", graph, params, sigma, data, edge,
        op(["remove", "add"]), lam, method, std)
    add("constraints", "derive covariance constraints by edge removal", graph, params, sigma, data, std,
        lambda sp: sp.add_argument("--target", choices=TARGETS, default="directed-only"),
        lambda sp: sp.add_argument("--tol", type=float, default=1e-8, help="relative residual threshold"))
    add("random", "write a random graph and parameters", seed,
        lambda sp: sp.add_argument("--vertices", type=int, default=6),
        lambda sp: sp.add_argument("--p-directed", dest="p_directed", type=float, default=0.3),
        lambda sp: sp.add_argument("--p-bidirected", dest="p_bidirected", type=float, default=0.2))
    add("cov", "covariance from parameters", graph, lambda sp: sp.add_argument("--params", required=True))
    add("treks", "enumerate treks between two vertices", graph, params,
        lambda sp: sp.add_argument("--pair", required=True, help="'v,w'"))
    add("simulate", "draw Gaussian samples", graph, params, sigma, seed,
        lambda sp: sp.add_argument("--n", type=int, default=1000))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = RunConfig.from_args(ns)
    try:
        return COMMANDS[cfg.command](cfg)
    except NotIdentifiable as exc:
        sys.stderr.write(f"not identifiable: {exc}\n")
        return exc.exit_code
    except EdgeSemError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
