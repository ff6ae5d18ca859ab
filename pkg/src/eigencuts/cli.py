"""Command-line harness: maxcut / spca / theta experiments and a batch driver."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import EigencutsError
from .iogen import InstanceSpec
from .maxcut import (brute_force_max_cut, build_SD, build_SP, eigenvalue_bound,
                     greedy_cut, gw_instance, gw_round, gw_value,
                     rounding_matrix, sweep_cut)
from .relax import PSD_TOL, CutSet, build_LS, cutting_plane, reference_sdp
from .report import ExperimentReport, aggregate_csv, trace_csv, write_report
from .solvers import SolverOptions, solve
from .spca import (CovMatrix, extract_component, deflate, spca_instance,
                   spca_reference, synthetic_covariance, explained_variance)
from .theta import theta_experiment, theta_reference

# Budget-capped oracle loops legitimately stop at the iteration limit; only
# solver breakdowns should flip the exit code.
ACCEPTED_STATUSES = ("optimal", "iteration-limit")


def _add_instance_flags(p: argparse.ArgumentParser, matrix: bool = False) -> None:
    src = p.add_mutually_exclusive_group(required=not matrix)
    src.add_argument("--gen", metavar="SPEC",
                     help='generator spec, e.g. "er:n=50,p=0.25", '
                          '"regular:n=50,d=6", "planted:n=64,d=4,l=5"')
    src.add_argument("--file", metavar="PATH", help="instance file")
    if matrix:
        src.add_argument("--synthetic", action="store_true",
                         help="built-in three-factor covariance")
    p.add_argument("--format", choices=["edgelist", "tsplib", "csv-matrix"],
                   help="file format (default: inferred from the extension)")
    p.add_argument("--seed", type=int, default=None)


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="PATH", help="write the JSON report here "
                   "(default: stdout)")
    p.add_argument("--csv", metavar="PATH", help="also write a one-row CSV table")
    p.add_argument("--trace", metavar="PATH", help="also write the main trace "
                   "as a two-column CSV")
    p.add_argument("--tol", type=float, default=PSD_TOL,
                   help="PSD tolerance for separation oracles (default %(default)g)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eigencuts",
        description="Linear relaxations of SDPs seeded with eigenvector cuts.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    mc = sub.add_parser("maxcut", help="SP/SD relaxation pair plus rounding")
    _add_instance_flags(mc)
    mc.add_argument("--cuts", choices=["eigen", "oracle", "hybrid"],
                    default="eigen",
                    help="cut policy: adjacency eigenbasis, separation loop, "
                         "or the loop seeded with the eigenbasis")
    mc.add_argument("--sdp-ref", choices=["direct", "cutting-plane", "none"],
                    default="direct")
    mc.add_argument("--rounds", type=int, default=100,
                    help="hyperplane rounding trials (default %(default)s)")
    mc.add_argument("--baselines", default="greedy,sweep",
                    help='comma list from {greedy,sweep}, or "none"')
    mc.add_argument("--budget", type=int, default=None,
                    help="oracle cut budget (default: 2n)")
    mc.add_argument("--batch", type=int, default=1,
                    help="cuts added per oracle round")
    mc.add_argument("--exact", action="store_true",
                    help="brute-force optimum for the OPT column (n <= 22)")
    _add_output_flags(mc)
    mc.set_defaults(func=cmd_maxcut)

    sp = sub.add_parser("spca", help="sparse components through deflation")
    _add_instance_flags(sp, matrix=True)
    sp.add_argument("matrix", nargs="?", metavar="MATRIX_CSV",
                    help="covariance/correlation CSV (shorthand for --file)")
    sp.add_argument("--k", required=True, metavar="K1,K2,...",
                    help="per-component sparsity targets")
    sp.add_argument("--alpha", type=float, default=1.0,
                    help="pairwise-row coefficient in [0, sqrt(2)]")
    sp.add_argument("--cuts", choices=["eigen", "oracle", "hybrid"],
                    default="eigen")
    sp.add_argument("--sdp-ref", choices=["direct", "cutting-plane", "none"],
                    default="direct")
    sp.add_argument("--budget", type=int, default=None,
                    help="oracle cut budget (default: 2p)")
    sp.add_argument("--batch", type=int, default=1)
    sp.add_argument("--n-obs", type=int, default=None,
                    help="sample the synthetic model instead of using its "
                         "exact covariance")
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_spca)

    th = sub.add_parser("theta", help="Lovasz-theta relaxation experiment")
    _add_instance_flags(th)
    th.add_argument("--cuts", choices=["eigen", "oracle"], default="eigen")
    th.add_argument("--sdp-ref", choices=["direct", "cutting-plane", "none"],
                    default="direct")
    th.add_argument("--socp", action="store_true",
                    help="add the 2x2-minor cone rows")
    th.add_argument("--budget", type=int, default=500)
    th.add_argument("--batch", type=int, default=20)
    _add_output_flags(th)
    th.set_defaults(func=cmd_theta)

    be = sub.add_parser("bench", help="run every row of a manifest file")
    be.add_argument("manifest", help="JSON list of experiment rows")
    be.add_argument("--out-dir", default="bench-out")
    be.set_defaults(func=cmd_bench)
    return parser


def _instance_spec(args) -> InstanceSpec:
    if args.gen:
        return InstanceSpec.from_genspec(args.gen, seed=args.seed)
    return InstanceSpec.from_file(args.file, args.format)


def _tolerances(args, opts: SolverOptions) -> dict:
    return {"psd_tol": args.tol, "opt_tol": opts.opt_tol,
            "feas_tol": opts.feas_tol, "sdp_eps": opts.sdp_eps}


def cmd_maxcut(args) -> ExperimentReport:
    t_start = time.perf_counter()
    opts = SolverOptions()
    spec = _instance_spec(args)
    G = spec.load_graph(args.seed)
    inst = gw_instance(G)
    budget = args.budget if args.budget is not None else 2 * G.n

    t0 = time.perf_counter()
    bound = eigenvalue_bound(G)
    S = CutSet.eigenbasis(G.adjacency(), provenance="eigen")
    t_eig = time.perf_counter() - t0

    values, gaps, statuses, traces, timings = {}, {}, {}, {}, {}
    values["eigenvalue_bound"] = bound
    t_solve = t_build = 0.0

    if args.cuts == "eigen":
        t0 = time.perf_counter()
        model = build_SP(G, S)
        t_build += time.perf_counter() - t0
        sp_report = solve(model, opts)
        if sp_report.status != "optimal":
            raise RuntimeError(f"SP solve ended with status {sp_report.status}")
        statuses["sp"] = sp_report.status
        z_sp = gw_value(G, sp_report.objective)
        t_solve += sp_report.wall_time or 0.0
    else:
        S0 = CutSet() if args.cuts == "oracle" else S
        sp_report, S, raw_trace = cutting_plane(inst, S0, budget=budget,
                                                batch=args.batch,
                                                tol=args.tol, opts=opts)
        if sp_report.status not in ACCEPTED_STATUSES:
            raise RuntimeError(f"cut loop ended with status {sp_report.status}")
        statuses["sp"] = sp_report.status
        z_sp = gw_value(G, sp_report.objective)
        traces["cutting_plane"] = [[c, gw_value(G, obj)] for c, obj in raw_trace]
        t_solve += sp_report.wall_time or 0.0
    values["z_sp"] = z_sp

    if len(S) > 0:
        t0 = time.perf_counter()
        sd_model = build_SD(G, S)
        t_build += time.perf_counter() - t0
        sd_report = solve(sd_model, opts)
        if sd_report.status != "optimal":
            raise RuntimeError(f"SD solve ended with status {sd_report.status}")
        statuses["sd"] = sd_report.status
        z_sd = gw_value(G, sd_report.objective)
        values["z_sd"] = z_sd
        if z_sd > 1e-12:
            gaps["lp_gap"] = z_sp / z_sd
        t_solve += sd_report.wall_time or 0.0

    if args.sdp_ref != "none":
        ref = reference_sdp(inst, tol=args.tol, method=args.sdp_ref, opts=opts)
        if ref.status not in ACCEPTED_STATUSES:
            raise RuntimeError(f"reference solve ended with status {ref.status}")
        statuses["ref"] = ref.status
        values["z_ref"] = gw_value(G, ref.objective)
        if values["z_ref"] > 1e-12:
            gaps["opt_gap"] = z_sp / values["z_ref"]
        t_solve += ref.wall_time or 0.0

    baselines = {}
    wanted = [] if args.baselines == "none" else args.baselines.split(",")
    for name in wanted:
        if name == "greedy":
            baselines["greedy"] = greedy_cut(G).value
        elif name == "sweep":
            baselines["sweep"] = sweep_cut(G).value
        else:
            raise ValueError(f"unknown baseline {name!r}")

    t0 = time.perf_counter()
    rounded = gw_round(G, rounding_matrix(G, sp_report, opts),
                       trials=args.rounds, seed=args.seed)
    timings["round"] = time.perf_counter() - t0
    candidates = [(rounded.value, rounded.method)]
    candidates += [(v, name) for name, v in baselines.items()]
    best_value, best_method = max(candidates)
    best_cut = {"value": best_value, "method": best_method}
    values["z_gw_cut"] = rounded.value

    if args.exact:
        values["opt"] = brute_force_max_cut(G).value

    timings.update({"build": t_build, "eig": t_eig, "solve": t_solve,
                    "total": time.perf_counter() - t_start})
    return ExperimentReport(
        command="maxcut", source=spec.describe(), seed=args.seed, n=G.n,
        m_total=G.m_total, values=values, gaps=gaps, best_cut=best_cut,
        baselines=baselines, traces=traces, timings=timings,
        tolerances=_tolerances(args, opts), statuses=statuses)


def cmd_spca(args) -> ExperimentReport:
    t_start = time.perf_counter()
    opts = SolverOptions()
    if args.matrix:
        if args.file or args.gen or args.synthetic:
            raise ValueError("give the matrix positionally or by flag, not both")
        args.file = args.matrix
    if args.synthetic:
        C = synthetic_covariance(seed=args.seed, n_obs=args.n_obs)
        source = "synthetic"
    elif args.gen or args.file:
        spec = _instance_spec(args)
        M = spec.load_matrix()
        C = CovMatrix(M.entries)
        source = spec.describe()
    else:
        raise ValueError("spca needs --file, --gen, or --synthetic")
    try:
        ks = [int(tok) for tok in args.k.split(",")]
    except ValueError:
        raise ValueError(f"--k expects a comma list of integers, got {args.k!r}")
    budget = args.budget if args.budget is not None else 2 * C.n

    values, statuses, components = {}, {}, []
    t_solve = 0.0
    current = C
    for idx, k in enumerate(ks, start=1):
        inst = spca_instance(current, k, args.alpha)
        if args.cuts == "eigen":
            rep = solve(build_LS(inst, CutSet.eigenbasis(current)), opts)
            if rep.status != "optimal":
                raise RuntimeError(f"LSPCA solve ended with status {rep.status}")
        else:
            S0 = CutSet() if args.cuts == "oracle" else CutSet.eigenbasis(current)
            rep, _, _ = cutting_plane(inst, S0, budget=budget,
                                      batch=args.batch, tol=args.tol, opts=opts)
            if rep.status not in ACCEPTED_STATUSES:
                raise RuntimeError(f"cut loop ended with status {rep.status}")
        statuses[f"lspca_{idx}"] = rep.status
        t_solve += rep.wall_time or 0.0
        comp = extract_component(rep, k, current)
        entry = {"k": k, "support": list(comp.support),
                 "loading": [float(x) for x in comp.loading],
                 "objective": comp.objective, "z_lspca": rep.objective,
                 "z_ref": None, "quotient": None}
        if args.sdp_ref != "none":
            ref = spca_reference(current, k, method=args.sdp_ref,
                                 tol=args.tol, opts=opts)
            if ref.status not in ACCEPTED_STATUSES:
                raise RuntimeError(f"reference solve ended with status {ref.status}")
            statuses[f"ref_{idx}"] = ref.status
            entry["z_ref"] = ref.objective
            entry["quotient"] = ref.objective / rep.objective
            t_solve += ref.wall_time or 0.0
        components.append(entry)
        current = deflate(current, comp)

    loadings = [np.array(c["loading"]) for c in components]
    values["explained_variance"] = explained_variance(C, loadings)
    timings = {"solve": t_solve, "total": time.perf_counter() - t_start}
    return ExperimentReport(
        command="spca", source=source, seed=args.seed, n=C.n, m_total=None,
        values=values, components=components, timings=timings,
        tolerances=_tolerances(args, opts), statuses=statuses)


def cmd_theta(args) -> ExperimentReport:
    t_start = time.perf_counter()
    opts = SolverOptions()
    spec = _instance_spec(args)
    G = spec.load_graph(args.seed)

    values, statuses, traces = {}, {}, {}
    values["policy"] = args.cuts
    values["socp"] = bool(args.socp)
    if args.sdp_ref == "none":
        # no reference: record the raw objective trajectory instead
        trace = theta_experiment(G, policy=args.cuts, socp=args.socp,
                                 budget=args.budget, batch=args.batch,
                                 tol=args.tol, reference=1.0, opts=opts)
        traces["objective"] = [[c, 1.0 / r] for c, r in trace]
        values["z_ltn_final"] = traces["objective"][-1][1]
    else:
        z_ref, ref_report = theta_reference(G, method=args.sdp_ref,
                                            tol=args.tol, opts=opts)
        statuses["ref"] = ref_report.status
        values["z_ref"] = z_ref
        trace = theta_experiment(G, policy=args.cuts, socp=args.socp,
                                 budget=args.budget, batch=args.batch,
                                 tol=args.tol, reference=z_ref, opts=opts)
        traces["ratio"] = [[c, r] for c, r in trace]
        values["final_ratio"] = trace[-1][1]
        values["z_ltn_final"] = z_ref / trace[-1][1]
    statuses["experiment"] = "optimal"  # theta_experiment raises otherwise

    timings = {"total": time.perf_counter() - t_start}
    return ExperimentReport(
        command="theta", source=spec.describe(), seed=args.seed, n=G.n,
        m_total=G.m_total, values=values, traces=traces, timings=timings,
        tolerances=_tolerances(args, opts), statuses=statuses)


def _emit(report: ExperimentReport, args) -> int:
    report.validate()
    if args.out:
        write_report(report, args.out)
    else:
        sys.stdout.write(report.to_json())
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(aggregate_csv([report]))
    if args.trace:
        name = next(iter(report.traces), None)
        if name is not None:
            with open(args.trace, "w") as fh:
                fh.write(trace_csv(report, name))
        else:
            # eigen-cut solves have no iteration trace; say so instead of
            # leaving the requested file silently absent
            print(f"note: report has no iteration trace, {args.trace} "
                  "not written", file=sys.stderr)
    bad = [s for s in report.statuses.values() if s not in ACCEPTED_STATUSES]
    return 1 if bad else 0


def _row_argv(row: dict) -> list[str]:
    """Manifest row {"command": ..., "flag": value, ...} -> argv."""
    if "command" not in row:
        raise ValueError("manifest row is missing 'command'")
    argv = [str(row["command"])]
    for key, val in row.items():
        if key == "command":
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(val, bool):
            if val:
                argv.append(flag)
        else:
            argv.extend([flag, str(val)])
    return argv


def cmd_bench(args) -> int:
    with open(args.manifest) as fh:
        rows = json.load(fh)
    if not isinstance(rows, list):
        raise ValueError("manifest must be a JSON list of rows")
    os.makedirs(args.out_dir, exist_ok=True)
    parser = build_parser()
    reports: list[ExperimentReport] = []
    failures = 0
    for i, row in enumerate(rows):
        try:
            row_args = parser.parse_args(_row_argv(dict(row)))
            report = row_args.func(row_args)
            report.validate()
            path = os.path.join(args.out_dir, f"row_{i:03d}_{report.command}.json")
            write_report(report, path)
            reports.append(report)
            if not all(s in ACCEPTED_STATUSES for s in report.statuses.values()):
                failures += 1
        except SystemExit:  # argparse rejected the row's flags
            failures += 1
            _write_row_error(args.out_dir, i, ValueError(f"bad flags in row {i}"))
        except Exception as exc:  # noqa: BLE001 - rows must not sink the batch
            failures += 1
            _write_row_error(args.out_dir, i, exc)
    for command in ("maxcut", "spca", "theta"):
        group = [r for r in reports if r.command == command]
        if group:
            with open(os.path.join(args.out_dir, f"{command}.csv"), "w") as fh:
                fh.write(aggregate_csv(group))
    print(f"{len(reports)} of {len(rows)} rows completed, "
          f"{failures} failed, reports in {args.out_dir}")
    return 1 if failures else 0


def _write_row_error(out_dir: str, index: int, exc: Exception) -> None:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    path = os.path.join(out_dir, f"row_{index:03d}_error.json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bench":
            return cmd_bench(args)
        report = args.func(args)
        return _emit(report, args)
    except (EigencutsError, ValueError, RuntimeError, OSError) as exc:
        payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
