"""Command-line experiment harness.

Every algorithm subcommand loads a graph and a stream of recurrent
instances (one JSON object per line), preprocesses once, runs each instance
in the simulator, validates it and writes a report. Exit status is 0 when
every instance is valid, 1 when some instance is not, 2 on usage or input
errors.
"""

import argparse
import csv
import io
import json
import math
import os
import random
import sys
from pathlib import Path
from typing import Optional

from . import cds_planar, cds_tree, color_completion, lcl_paths, matching_mis, oracles
from .errors import CapExceeded, UsageError, WorkbenchError
from .graph import (Graph, forest_decompose, generate_path, generate_random_graph, generate_random_planar,
                    generate_random_tree, greedy_chromatic_upper, load_graph, root_at, save_graph)
from .sim import (RecurrentInstance, RunReport, client_set, dump_instances, load_instances,
                  precoloring, run_instance, run_preprocess)

FIXTURE_ENV = "SUPPORTED_FIXTURES"
PACKAGE_FIXTURES = Path(__file__).parent / "fixtures"
REPORT_HEADER = ["index", "rounds", "valid", "ratio", "bound", "messages"]


def resolve(path: Optional[str]) -> Optional[Path]:
    """Paths that do not exist are looked up in the fixture directory."""
    if path is None:
        return None
    p = Path(path)
    if p.exists():
        return p
    base = Path(os.environ.get(FIXTURE_ENV, PACKAGE_FIXTURES))
    if (base / path).exists():
        return base / path
    raise UsageError(f"file not found: {path}")


# ------------------------------------------------------------- reporting

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6f}"
    return str(x)


def summarize(rows: list, bits: int) -> dict:
    ratios = [r["ratio"] for r in rows if r["ratio"] is not None]
    return {
        "instances": len(rows),
        "all_valid": all(r["valid"] for r in rows),
        "max_rounds": max((r["rounds"] for r in rows), default=0),
        "max_ratio": max(ratios, default=None),
        "mean_ratio": sum(ratios) / len(ratios) if ratios else None,
        "preprocess_bits": bits,
    }


def render_csv(rows: list, summary: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r in rows:
        w.writerow([_fmt(r[k]) if k != "valid" else int(bool(r[k])) for k in REPORT_HEADER])
    w.writerow(["#summary", "max_rounds", "all_valid", "max_ratio", "mean_ratio", "preprocess_bits"])
    w.writerow(["summary", summary["max_rounds"], int(summary["all_valid"]), _fmt(summary["max_ratio"]),
                _fmt(summary["mean_ratio"]), summary["preprocess_bits"]])
    return buf.getvalue()


def write_report(rows: list, bits: int, report: Optional[str], extra: Optional[dict] = None) -> dict:
    summary = summarize(rows, bits)
    text = render_csv(rows, summary)
    if report:
        base = Path(report)
        base.parent.mkdir(parents=True, exist_ok=True)
        base.with_suffix(".csv").write_text(text)
        doc = {"rows": rows, "summary": summary}
        if extra:
            doc.update(extra)
        base.with_suffix(".json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)
    return summary


def row(i: int, rep: RunReport, valid: bool, ratio=None, bound=None) -> dict:
    return {"index": i, "rounds": rep.rounds, "valid": bool(valid), "ratio": ratio, "bound": bound,
            "messages": rep.messages_sent, "error": rep.error}


def run_one(g: Graph, pre, prog, inst: RecurrentInstance, round_cap: int, index: int) -> RunReport:
    try:
        return run_instance(g, pre, prog, inst, round_cap, index=index)
    except CapExceeded as exc:
        return exc.details["report"]


def _clients(inst: RecurrentInstance) -> list:
    if inst.kind != "client-set":
        raise UsageError(f"expected client-set instances, got {inst.kind}")
    return [v for v, b in enumerate(inst.payload) if b]


def _cds_opt(g: Graph, clients, tree=None) -> int:
    if tree is not None:
        return oracles.cds_tree_dp(tree, clients)[0]
    return oracles.cds_bruteforce(g, clients, cap=30)[0]


def _ratio(size: int, opt: int) -> float:
    return 1.0 if opt == 0 and size == 0 else (size / opt if opt else math.inf)


# ------------------------------------------------------------ subcommands

def cmd_cds_tree(a) -> dict:
    g = load_graph(resolve(a.graph))
    t = root_at(g, a.root)
    cds_tree.check_k(a.k)
    prog = cds_tree.ApprProgram(t, a.k)
    pre = run_preprocess(g, prog)
    bound = cds_tree.ratio_bound(a.k)
    rows = []
    for i, inst in enumerate(load_instances(resolve(a.instances))):
        clients = _clients(inst)
        rep = run_one(g, pre, prog, inst, a.round_cap, i)
        d = {v for v, o in enumerate(rep.outputs) if o}
        valid = rep.error is None and oracles.dominates(g, clients, d)
        ratio = _ratio(len(d), _cds_opt(g, clients, t)) if a.oracle else None
        rows.append(row(i, rep, valid or a.no_validate, ratio, bound))
    return write_report(rows, pre.bits, a.report)


def cmd_cds_planar(a) -> dict:
    g = load_graph(resolve(a.graph))
    rows = []
    bits = 0
    if a.mode == "approx39":
        prog = cds_planar.Approx39Program()
        pre = run_preprocess(g, prog)
        bits = pre.bits
        for i, inst in enumerate(load_instances(resolve(a.instances))):
            clients = _clients(inst)
            rep = run_one(g, pre, prog, inst, a.round_cap, i)
            d = {v for v, o in enumerate(rep.outputs) if o}
            valid = rep.error is None and oracles.dominates(g, clients, d)
            ratio = _ratio(len(d), _cds_opt(g, clients)) if a.oracle else None
            rows.append(row(i, rep, valid or a.no_validate, ratio, 39.0))
    else:
        nrc = cds_planar.compute_nonrepetitive_coloring(g, seed=a.seed)
        bits = max(1, nrc.palette.bit_length())
        for i, inst in enumerate(load_instances(resolve(a.instances))):
            clients = _clients(inst)
            d, cg = cds_planar.planar_ctas(g, clients, a.eps, nrc=nrc, seed=a.seed)
            rep = RunReport(index=i, rounds=cds_planar_rounds(cg))
            valid = oracles.dominates(g, clients, d)
            ratio = _ratio(len(d), _cds_opt(g, clients)) if a.oracle else None
            rows.append(row(i, rep, valid or a.no_validate, ratio, 1 + a.eps))
    return write_report(rows, bits, a.report)


def cds_planar_rounds(cg) -> int:
    """Base-graph rounds recorded by the clustering history."""
    return sum(h.get("base_rounds", 0) for h in cg.history)


def _default_coloring(g: Graph, mode: str) -> list:
    if mode == "exact":
        return oracles.chromatic_exact(g, cap=max(20, g.n))[1]
    return greedy_chromatic_upper(g)[1]


def cmd_cc(a) -> dict:
    g = load_graph(resolve(a.graph))
    dc = _default_coloring(g, a.default_coloring)
    chi, delta = max(dc, default=0), g.max_degree
    if a.scheme == "single":
        prog, bound = color_completion.SingleRoundCC(dc, delta), float(chi * delta)
    elif a.scheme == "k-rounds":
        prog = color_completion.KRoundsCC(dc, delta, a.k)
        bound = float(max(math.ceil(chi / a.k) * delta, delta + 1))
    elif a.scheme == "priority":
        prog, bound = color_completion.PriorityCC(dc, delta), 2.0
    else:
        fam = color_completion.build_set_family(g.n, max(1, delta), seed=a.seed)
        prog, bound = color_completion.NoPreprocessCC(list(range(1, g.n + 1)), fam), float(fam.m)
    pre = run_preprocess(g, prog)
    rows = []
    for i, inst in enumerate(load_instances(resolve(a.instances))):
        if inst.kind != "precoloring":
            raise UsageError(f"expected precoloring instances, got {inst.kind}")
        pc = dict(inst.payload)
        try:
            color_completion.check_precoloring(g, pc)
        except WorkbenchError as exc:
            rows.append(row(i, RunReport(index=i, error=exc.code), False, None, bound))
            continue
        rep = run_one(g, pre, prog, inst, a.round_cap, i)
        valid = rep.error is None and oracles.check_proper_extension(g, pc, rep.outputs)
        ratio = None
        if valid:
            stats = color_completion.color_stats(pc, rep.outputs)
            if a.scheme == "priority" and a.oracle:
                ratio = stats.chi_all / max(1, oracles.cc_exact(g, pc, "chi_all", cap=max(12, g.n))[0])
            else:
                ratio = float(stats.chi_new)
        rows.append(row(i, rep, valid or a.no_validate, ratio, bound))
    return write_report(rows, pre.bits, a.report)


def _load_lcl(name: str) -> lcl_paths.LclSpec:
    if name in lcl_paths.BUNDLED:
        return lcl_paths.BUNDLED[name]()
    return lcl_paths.load_spec(resolve(name))


def cmd_lcl(a) -> dict:
    spec = _load_lcl(a.spec)
    cls = lcl_paths.classify(spec, a.cap)
    if a.action == "classify":
        doc = cls.to_json()
        if a.report:
            Path(a.report).with_suffix(".json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        else:
            sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")
        return {"all_valid": True}
    norm = lcl_paths.normalize_radius(spec)
    if cls.verdict != "Theta1":
        raise UsageError(f"spec {spec.name!r} is not constant-time solvable; nothing to synthesize")
    prog = lcl_paths.synthesize_solver(norm, lcl_paths.classify(norm, a.cap), threshold=a.threshold)
    g = load_graph(resolve(a.graph)) if a.graph else generate_path(a.n)
    pre = run_preprocess(g, prog)
    insts = load_instances(resolve(a.instances)) if a.instances else [lcl_paths.full_path_instance(g)]
    rows = []
    for i, inst in enumerate(insts):
        rep = run_one(g, pre, prog, inst, a.round_cap, i)
        valid = rep.error is None and lcl_paths.validate_instance(norm, g, inst, rep.outputs)
        rows.append(row(i, rep, valid or a.no_validate, None, float(prog.radius)))
    return write_report(rows, pre.bits, a.report, {"classification": cls.to_json()})


def cmd_mm(a) -> dict:
    g = load_graph(resolve(a.graph))
    if a.mode == "tree":
        t = root_at(g, a.root)
        prog = matching_mis.ForestMatchingProgram(g, [(list(t.parent), list(t.depth))])
    else:
        fd = forest_decompose(g, a.forests)
        prog = matching_mis.ForestMatchingProgram(g, [matching_mis._root_forest(g, f) for f in fd.forests])
    pre = run_preprocess(g, prog)
    rows = []
    for i, inst in enumerate(load_instances(resolve(a.instances))):
        rep = run_one(g, pre, prog, inst, a.round_cap, i)
        valid = False
        if rep.error is None:
            m = matching_mis._matching_from(rep.outputs)
            valid = oracles.is_matching(g, matching_mis.active_edge_set(g, inst), m) == (True, True)
        rows.append(row(i, rep, valid or a.no_validate, None, float(prog.round_bound)))
    return write_report(rows, pre.bits, a.report)


def cmd_mis(a) -> dict:
    g = load_graph(resolve(a.graph))
    coloring = _default_coloring(g, a.colors)
    prog = matching_mis.ColorMisProgram(coloring)
    pre = run_preprocess(g, prog)
    rows = []
    for i, inst in enumerate(load_instances(resolve(a.instances))):
        rep = run_one(g, pre, prog, inst, a.round_cap, i)
        valid = False
        if rep.error is None:
            members = {v for v, x in enumerate(rep.outputs) if x}
            valid = oracles.is_mis(g, matching_mis.active_edge_set(g, inst), members) == (True, True)
        rows.append(row(i, rep, valid or a.no_validate, None, float(max(coloring, default=0))))
    return write_report(rows, pre.bits, a.report)


def cmd_oracle(a) -> dict:
    g = load_graph(resolve(a.graph)) if a.graph else None
    out = []
    if a.problem == "chromatic":
        chi, col = oracles.chromatic_exact(g, cap=a.size_cap)
        out.append({"chi": chi, "coloring": col})
    elif a.problem == "lcl-count":
        spec = lcl_paths.normalize_radius(_load_lcl(a.spec))
        out.append({"n": a.n, "count": oracles.lcl_count(spec, a.n)})
    else:
        for inst in load_instances(resolve(a.instances)):
            if a.problem == "cds":
                clients = _clients(inst)
                size, d = (oracles.cds_tree_dp(root_at(g, 0), clients) if g.is_tree()
                           else oracles.cds_bruteforce(g, clients, cap=a.size_cap))
                out.append({"opt": size, "witness": sorted(d)})
            else:
                val, col = oracles.cc_exact(g, dict(inst.payload), a.objective, cap=a.size_cap)
                out.append({"opt": val, "witness": col})
    text = "".join(json.dumps(o, sort_keys=True) + "\n" for o in out)
    if a.report:
        Path(a.report).with_suffix(".jsonl").write_text(text)
    else:
        sys.stdout.write(text)
    return {"all_valid": True}


GEN_KINDS = ("path-lb-C1", "path-lb-C2", "random-tree", "random-planar", "random-graph",
             "lcl-mis", "lcl-2-coloring", "lcl-acyclic", "lcl-coprime", "lcl-ruling-2", "bad-bound")


def cmd_gen(a) -> dict:
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(a.seed)
    kind = a.kind
    if kind.startswith("path-lb-"):
        g, inst = cds_tree.gen_path_lb_instances(kind[len("path-lb-"):], a.k)
        save_graph(g, out / "graph.json")
        dump_instances([inst], out / "instances.jsonl")
    elif kind in ("random-tree", "random-planar", "random-graph"):
        if a.n < 1:
            raise UsageError("--n must be positive")
        if kind == "random-tree":
            g = generate_random_tree(a.n, a.seed)
        elif kind == "random-planar":
            g = generate_random_planar(a.n, a.seed)
        else:
            g = generate_random_graph(a.n, a.p, a.seed)
        save_graph(g, out / "graph.json")
        insts = []
        for _ in range(a.count):
            if a.instance_kind == "client-set":
                insts.append(client_set(g.n, [v for v in range(g.n) if rng.random() < a.density]))
            elif a.instance_kind == "edge-subset":
                insts.append(RecurrentInstance("edge-subset", tuple(rng.random() < a.density for _ in range(g.m))))
            else:
                insts.append(precoloring(_random_precoloring(g, rng, a.density)))
        dump_instances(insts, out / "instances.jsonl")
    elif kind.startswith("lcl-"):
        spec = lcl_paths.BUNDLED[kind[len("lcl-"):]]()
        lcl_paths.save_spec(spec, out / f"{kind}.json")
    elif kind == "bad-bound":
        g, dc, pc = color_completion.bad_bound_fixture()
        save_graph(g, out / "graph.json")
        (out / "default_coloring.json").write_text(json.dumps(dc) + "\n")
        dump_instances([precoloring(pc)], out / "instances.jsonl")
    else:
        raise UsageError(f"unknown fixture kind {kind!r}; choose from {', '.join(GEN_KINDS)}")
    return {"all_valid": True}


def _random_precoloring(g: Graph, rng, density: float) -> dict:
    pc = {}
    palette = g.max_degree + 2
    for v in range(g.n):
        if rng.random() < density:
            used = {pc.get(w) for w in g.adj[v]}
            free = [c for c in range(1, palette + 1) if c not in used]
            pc[v] = rng.choice(free)
    return pc


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="supported", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, instances=True):
        sp.add_argument("--config", help="JSON file of option defaults; flags override it")
        sp.add_argument("--graph")
        if instances:
            sp.add_argument("--instances")
        sp.add_argument("--report", help="output path prefix; CSV to stdout when omitted")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--round-cap", type=int, default=100_000)
        sp.add_argument("--oracle", action="store_true", help="compare against exact optima")
        sp.add_argument("--no-validate", action="store_true")
        return sp

    sp = common(sub.add_parser("cds-tree", help="client dominating set on trees"))
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--root", type=int, default=0)
    sp.set_defaults(func=cmd_cds_tree)

    sp = common(sub.add_parser("cds-planar", help="client dominating set on planar graphs"))
    sp.add_argument("--mode", choices=("approx39", "ctas"), default="approx39")
    sp.add_argument("--eps", type=float, default=1.0)
    sp.set_defaults(func=cmd_cds_planar)

    sp = common(sub.add_parser("cc", help="color completion"))
    sp.add_argument("--scheme", choices=("single", "k-rounds", "priority", "no-preprocess"), default="single")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--default-coloring", choices=("greedy", "exact"), default="greedy")
    sp.set_defaults(func=cmd_cc)

    sp = common(sub.add_parser("lcl", help="LCL on paths: classify or solve"))
    sp.add_argument("--spec", default="mis", help="bundled name or JSON file")
    sp.add_argument("--action", choices=("classify", "solve"), default="classify")
    sp.add_argument("--cap", type=int, default=None, help="walk length cap")
    sp.add_argument("--threshold", choices=("generic", "tight"), default="generic")
    sp.add_argument("--n", type=int, default=200, help="path length when no graph is given")
    sp.set_defaults(func=cmd_lcl)

    sp = common(sub.add_parser("mm", help="subgraph maximal matching"))
    sp.add_argument("--mode", choices=("tree", "arboricity"), default="tree")
    sp.add_argument("--root", type=int, default=0)
    sp.add_argument("--forests", type=int, default=6, help="forest budget for the decomposition")
    sp.set_defaults(func=cmd_mm)

    sp = common(sub.add_parser("mis", help="subgraph maximal independent set"))
    sp.add_argument("--colors", choices=("exact", "greedy"), default="greedy")
    sp.set_defaults(func=cmd_mis)

    sp = common(sub.add_parser("oracle", help="exact optima for debugging"))
    sp.add_argument("--problem", choices=("cds", "chromatic", "cc", "lcl-count"), default="cds")
    sp.add_argument("--objective", choices=("chi_new", "chi_all"), default="chi_new")
    sp.add_argument("--size-cap", type=int, default=20)
    sp.add_argument("--spec", default="mis")
    sp.add_argument("--n", type=int, default=5)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("gen", help="write fixture files")
    sp.add_argument("--config")
    sp.add_argument("--kind", required=True)
    sp.add_argument("--out", default=".")
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--p", type=float, default=0.1)
    sp.add_argument("--count", type=int, default=50)
    sp.add_argument("--density", type=float, default=0.3)
    sp.add_argument("--instance-kind", choices=("client-set", "edge-subset", "precoloring"), default="client-set")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_gen)
    return p


def parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            conf = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        given = {a.dest for a in sub._actions
                 for opt in a.option_strings if any(x == opt or x.startswith(opt + "=") for x in argv)}
        for key, val in conf.items():
            dest = key.replace("-", "_")
            if dest not in known:
                raise UsageError(f"unknown config key {key!r}")
            if dest not in given:
                setattr(args, dest, val)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse(argv)
        if args.command not in ("gen", "oracle", "lcl") and not args.instances:
            raise UsageError("--instances is required")
        if args.command not in ("gen", "oracle", "lcl") and not args.graph:
            raise UsageError("--graph is required")
        summary = args.func(args)
    except WorkbenchError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0 if summary.get("all_valid", True) else 1


if __name__ == "__main__":
    sys.exit(main())
