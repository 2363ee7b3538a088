"""Command-line entry point: ``graphshift {test,discover,power,simulate}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .discovery import DiscoveryConfig, permutation_null, run_discovery
from .distributions import power, shift_increase
from .graph import GraphError, connected_components, induced_subgraph, laplacian, read_graph_tsv
from .inference import SingularCovarianceError, bh_fdr, graph_t2, hotelling_t2
from .simulate import SCENARIOS, run_experiment
from .spectral import eigenbasis, resolve_k

log = logging.getLogger("graphshift")

VARIANT_CHOICES = ("laplacian", "normalized", "signed", "mg")


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _sibling(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


def _load_graph_and_data(args):
    graph = read_graph_tsv(args.graph)
    dataset = io.load_dataset(args.expr, args.labels)
    measured = set(dataset.node_ids)
    keep = [v for v in graph.node_ids if v in measured]
    if not keep:
        raise GraphError("no graph node is present in the expression matrix")
    dropped = graph.n_nodes - len(keep)
    if dropped:
        log.info("dropping %d graph nodes absent from the expression matrix", dropped)
    return induced_subgraph(graph, keep), dataset


def cmd_test(args) -> int:
    graph, dataset = _load_graph_and_data(args)
    rows = []
    for cid, comp in enumerate(connected_components(graph)):
        data = dataset.two_sample(comp.node_ids)
        p = comp.n_nodes
        k = resolve_k(p, args.k, args.k_frac)
        row = dict(component_id=cid, n_nodes=p, k=k, stat_graph=None, p_graph=None,
                   stat_full=None, p_full=None, p_graph_bh=None, rejected=None)
        status = []
        try:
            basis = eigenbasis(laplacian(comp, args.variant))
            res = graph_t2(data, basis, k)
            row.update(stat_graph=res.statistic, p_graph=res.pvalue)
        except SingularCovarianceError:
            status.append("graph_singular")
        except (GraphError, ValueError) as exc:
            log.warning("component %d: %s", cid, exc)
            status.append("graph_error")
        if data.n1 + data.n2 - p - 1 < 1:
            status.append("full_na")
        else:
            try:
                res = hotelling_t2(data)
                row.update(stat_full=res.statistic, p_full=res.pvalue)
            except SingularCovarianceError:
                status.append("full_singular")
        row["status"] = ",".join(status) or "ok"
        rows.append(row)

    tested = [r for r in rows if r["p_graph"] is not None]
    if tested:
        rejected, adjusted = bh_fdr([r["p_graph"] for r in tested], args.fdr)
        for r, rej, adj in zip(tested, rejected, adjusted):
            r.update(p_graph_bh=adj, rejected=bool(rej))
    io.write_table(args.out, io.TEST_HEADER, rows)
    print(
        f"tested {len(tested)} of {len(rows)} components; "
        f"{len(rows) - len(tested)} skipped; "
        f"{sum(bool(r['rejected']) for r in tested)} rejected at FDR {args.fdr}",
        file=sys.stderr,
    )
    return 0


def cmd_discover(args) -> int:
    graph, dataset = _load_graph_and_data(args)
    data = dataset.two_sample(graph.node_ids)
    q = args.q
    k = args.k if args.k is not None else min(3, q)
    config = DiscoveryConfig(
        q=q, k=k, alpha=args.alpha, bound_mode=args.bound, theta=args.theta,
        structure_variant=args.variant,
    )
    result = run_discovery(graph, data, config)
    io.write_hits_tsv(args.out, result.hits, graph)
    perm_path = _sibling(Path(args.out), ".perm.tsv")
    if args.permutations > 0:
        summary = permutation_null(graph, data, config, args.permutations, args.seed)
    else:
        summary = None
    io.write_permutation_tsv(perm_path, summary)
    msg = (
        f"{len(result.hits)} hits; {result.n_tested} subgraphs tested; "
        f"{len(result.skipped)} skipped as singular"
    )
    if summary is not None:
        msg += f"; permutations with hits: {summary.fraction_with_hits:.3f}"
    print(msg, file=sys.stderr)
    return 0


def cmd_power(args) -> int:
    k = args.k if args.k is not None else 5
    rows = []
    for d2 in _float_list(args.delta2):
        beta = power(args.alpha, k, args.n1, args.n2, d2)
        for l in range(args.l_max + 1):
            inc = shift_increase(args.alpha, k, l, d2, args.n1, args.n2)
            rows.append(dict(alpha=args.alpha, k=k, n1=args.n1, n2=args.n2, delta2_k=d2,
                             power_k=beta, l=l, delta2_kl=d2 + inc, shift_increase=inc))
    io.write_table(args.out, io.POWER_HEADER, rows, delimiter=",")
    return 0


def cmd_simulate(args) -> int:
    n = args.replicates
    result = run_experiment(args.scenario, n_null=n, n_alt=n, seed=args.seed)
    out = Path(args.out)
    io.write_roc_csv(out, result.rocs)
    io.write_roc_summary_csv(_sibling(out, "_summary.csv"), result.rocs, n, n, args.seed)
    for method, roc in result.rocs.items():
        print(f"{method}\tAUC={roc.auc:.4f}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphshift",
        description="Graph-structured two-sample tests and nonhomogeneous subgraph discovery.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_flags(p):
        p.add_argument("--graph", required=True, help="graph TSV (src, dst, sign, directed)")
        p.add_argument("--expr", required=True, help="expression TSV, samples x nodes")
        p.add_argument("--labels", required=True, help="labels TSV (sample_id, group)")
        p.add_argument("--variant", choices=VARIANT_CHOICES, default="laplacian")

    p = sub.add_parser("test", help="test each connected component, BH-FDR across components")
    data_flags(p)
    p.add_argument("--k-frac", type=float, default=0.2)
    p.add_argument("--k", type=int, default=None, help="absolute retained dimension")
    p.add_argument("--fdr", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("discover", help="branch-and-bound subgraph discovery")
    data_flags(p)
    p.add_argument("--q", type=int, default=5)
    p.add_argument("--k", type=int, default=None, help="retained dimension (default min(3, q))")
    p.add_argument("--alpha", type=float, default=1e-4)
    p.add_argument("--bound", choices=("exact", "euclidean"), default="exact")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--permutations", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("power", help="power and shift-increase table")
    p.add_argument("--k", type=int, default=None, help="base dimension (default 5)")
    p.add_argument("--alpha", type=float, default=1e-2)
    p.add_argument("--n1", type=int, default=100)
    p.add_argument("--n2", type=int, default=100)
    p.add_argument("--delta2", default="0,0.1,0.2,0.3,0.5", help="comma-separated shifts")
    p.add_argument("--l-max", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("simulate", help="synthetic ROC experiments")
    p.add_argument("--scenario", choices=SCENARIOS, required=True)
    p.add_argument("--replicates", type=int, default=1000, help="datasets per hypothesis")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="ROC CSV; summary goes to <stem>_summary.csv")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
