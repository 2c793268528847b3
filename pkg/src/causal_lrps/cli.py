"""Command-line surface: simulate, fit, ida, eval and bench subcommands.

Every command writes its outputs plus a manifest.json (command, version,
seed, inputs, outputs, config snapshot, timings) into --out. Matrices are
headered CSV with 17 significant digits; graphs use the edge-list text
format; runs are reproducible from the recorded seed.
"""

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .errors import CausalLrpsError
from .ges import GesConfig, bic_lambda, ges_run
from .graphs import Pdag, dag_to_cpdag, from_edge_list_text, to_edge_list_text
from .ida import EffectSets, effect_matrix
from .matcore import CovarianceEstimate
from .simsem import (
    LinearSem,
    SimDesign,
    random_sem,
    sample,
    true_total_effects,
)
from .tune_eval import (
    CV5,
    RECALL_GRID,
    covariance_from_data,
    deconfounded_covariance,
    directed_pr,
    effect_ranking_pr,
    fit_lrps_stage,
    pca_regress_out,
    pr_curve_from_points,
    resolve_lambda,
    skeleton_pr,
)

# second-stage penalty sweep used by bench curves, as multiples of the
# BIC value ln(n)/2
LAMBDA_MULTIPLIERS = (0.03, 0.1, 0.2, 0.33, 0.5, 0.75, 1.0, 1.5, 2.5, 4.0, 7.0, 12.0, 20.0)

BENCH_METHODS = ("lrps-ges", "ges", "empty")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_atomic(path: str, text: str):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_matrix_csv(path: str, m: np.ndarray):
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    header = ",".join(f"c{j}" for j in range(m.shape[1]))
    lines = [header]
    for row in m:
        lines.append(",".join(_fmt(v) for v in row))
    _write_atomic(path, "\n".join(lines) + "\n")


def _read_matrix_csv(path: str) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def _write_data_csv(path: str, x: np.ndarray):
    x = np.asarray(x, dtype=np.float64)
    header = ",".join(f"x{j}" for j in range(x.shape[1]))
    lines = [header]
    for row in x:
        lines.append(",".join(_fmt(v) for v in row))
    _write_atomic(path, "\n".join(lines) + "\n")


def _read_data_csv(path: str) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def _write_json(path: str, obj):
    _write_atomic(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_manifest(out_dir: str, command: str, args: argparse.Namespace,
                    inputs, outputs, timings):
    manifest = {
        "command": command,
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "inputs": sorted(inputs),
        "outputs": sorted(outputs),
        "config": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "timings": timings,
    }
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)


def _load_pdag(path: str) -> Pdag:
    with open(path) as fh:
        return from_edge_list_text(fh.read())


def _effects_to_json(e: EffectSets):
    return {
        "num_nodes": e.num_nodes,
        "sets": {f"{i},{j}": sorted(v) for (i, j), v in sorted(e.sets.items())},
        "failures": {f"{i},{j}": c for (i, j), c in sorted(e.failures.items())},
    }


def _effects_from_json(obj) -> EffectSets:
    sets = {}
    for key, vals in obj["sets"].items():
        i, j = key.split(",")
        sets[(int(i), int(j))] = list(vals)
    failures = {}
    for key, c in obj.get("failures", {}).items():
        i, j = key.split(",")
        failures[(int(i), int(j))] = int(c)
    return EffectSets(num_nodes=int(obj["num_nodes"]), sets=sets, failures=failures)


def _sem_to_json(sem: LinearSem, design: SimDesign):
    out = {
        "design": {
            "p": design.p, "h": design.h, "n": design.n,
            "f_pct": design.f_pct, "sparsity": design.sparsity,
            "weight_range": list(design.weight_range),
            "noise_range": list(design.noise_range),
            "seed": design.seed,
        },
        "seed": design.seed,
        "b_o": sem.b_o.tolist(),
        "noise_var": sem.noise_var.tolist(),
    }
    if sem.h > 0:
        out["b_oh"] = sem.b_oh.tolist()
        out["b_h"] = sem.b_h.tolist()
    return out


def _sem_from_json(obj) -> LinearSem:
    b_o = np.array(obj["b_o"], dtype=np.float64)
    p = b_o.shape[0]
    b_oh = np.array(obj.get("b_oh", np.zeros((p, 0))), dtype=np.float64).reshape(p, -1)
    h = b_oh.shape[1]
    b_h = np.array(obj.get("b_h", np.zeros((h, h))), dtype=np.float64).reshape(h, h)
    return LinearSem(b_o=b_o, b_oh=b_oh, b_h=b_h,
                     noise_var=np.array(obj["noise_var"], dtype=np.float64))


def cmd_simulate(args) -> int:
    t0 = time.time()
    design = SimDesign(p=args.p, h=args.h, n=args.n, f_pct=args.f_pct,
                       sparsity=args.sparsity,
                       weight_range=(args.weight_lo, args.weight_hi),
                       noise_range=(args.noise_lo, args.noise_hi),
                       seed=args.seed)
    sem = random_sem(design)
    data = sample(sem, design.n, seed=design.seed)
    os.makedirs(args.out, exist_ok=True)
    data_path = os.path.join(args.out, "data.csv")
    edges_path = os.path.join(args.out, "truth_edges.txt")
    truth_path = os.path.join(args.out, "truth.json")
    _write_data_csv(data_path, data)
    _write_atomic(edges_path, to_edge_list_text(sem.observed_dag()))
    _write_json(truth_path, _sem_to_json(sem, design))
    outputs = [data_path, edges_path, truth_path]
    _write_manifest(args.out, "simulate", args, [], outputs,
                    {"total_s": time.time() - t0})
    return 0


def _fit_cpdag(args, data: np.ndarray):
    """Returns (cpdag, artifacts) for the requested estimation method."""
    n = data.shape[0]
    lam = resolve_lambda(args.lam, n)
    artifacts = {}
    if args.method == "ges":
        cov = covariance_from_data(data)
        cpdag = ges_run(cov, GesConfig(lam=lam)).cpdag
    elif args.method == "lrps-ges":
        sol, sel, _ = fit_lrps_stage(data, selection=args.select, seed=args.seed)
        cov2 = deconfounded_covariance(sol, n)
        cpdag = ges_run(cov2, GesConfig(lam=lam)).cpdag
        artifacts["k_o.csv"] = sol.k_o
        artifacts["l.csv"] = sol.l
        artifacts["selection.json"] = {
            "method": sel.method,
            "chosen_eta": sel.chosen_eta,
            "chosen_gamma": sel.chosen_gamma,
            "criterion_table": [list(r) for r in sel.criterion_table],
        }
    elif args.method == "pca-ges":
        resid = pca_regress_out(data, args.pca_k)
        cov = covariance_from_data(resid, center=False)
        cpdag = ges_run(cov, GesConfig(lam=lam)).cpdag
    elif args.method == "empty":
        cpdag = Pdag(data.shape[1])
    elif args.method == "random":
        design = SimDesign(p=data.shape[1], h=0, n=n, sparsity=args.sparsity,
                           seed=args.seed)
        cpdag = dag_to_cpdag(random_sem(design).observed_dag())
    else:
        raise ValueError(f"unknown method {args.method!r}")
    return cpdag, artifacts


def cmd_fit(args) -> int:
    t0 = time.time()
    data = _read_data_csv(args.data)
    cpdag, artifacts = _fit_cpdag(args, data)
    os.makedirs(args.out, exist_ok=True)
    cpdag_path = os.path.join(args.out, "cpdag.txt")
    _write_atomic(cpdag_path, to_edge_list_text(cpdag))
    outputs = [cpdag_path]
    for name, obj in artifacts.items():
        path = os.path.join(args.out, name)
        if name.endswith(".json"):
            _write_json(path, obj)
        else:
            _write_matrix_csv(path, obj)
        outputs.append(path)
    _load_pdag(cpdag_path)  # validate round trip
    _write_manifest(args.out, "fit", args, [args.data], outputs,
                    {"total_s": time.time() - t0})
    return 0


def _covariance_from_flags(args) -> CovarianceEstimate:
    given = [x is not None for x in (args.cov, args.data, args.precision)]
    if sum(given) != 1:
        raise ValueError("provide exactly one of --cov, --data, --precision")
    if args.cov is not None:
        return CovarianceEstimate(_read_matrix_csv(args.cov), args.sample_size)
    if args.data is not None:
        return covariance_from_data(_read_data_csv(args.data))
    prec = _read_matrix_csv(args.precision)
    inv = np.linalg.inv(prec)
    return CovarianceEstimate((inv + inv.T) / 2.0, args.sample_size)


def cmd_ida(args) -> int:
    t0 = time.time()
    cpdag = _load_pdag(args.cpdag)
    cov = _covariance_from_flags(args)
    effects = effect_matrix(cpdag, cov)
    os.makedirs(args.out, exist_ok=True)
    eff_path = os.path.join(args.out, "effects.json")
    _write_json(eff_path, _effects_to_json(effects))
    inputs = [p for p in (args.cpdag, args.cov, args.data, args.precision) if p]
    _write_manifest(args.out, "ida", args, inputs, [eff_path],
                    {"total_s": time.time() - t0})
    return 0


def cmd_eval(args) -> int:
    t0 = time.time()
    est = _load_pdag(args.est)
    truth = _load_pdag(args.truth)
    if not truth.undirected_edges and not args.truth_is_cpdag:
        from .graphs import Dag
        truth = dag_to_cpdag(Dag.from_amat(truth.amat))
    sp, sr = skeleton_pr(est, truth)
    dp, dr = directed_pr(est, truth)
    metrics = {
        "skeleton": {"precision": sp, "recall": sr},
        "directed": {"precision": dp, "recall": dr},
    }
    inputs = [args.est, args.truth]
    if args.effects and args.truth_sem:
        with open(args.effects) as fh:
            effects = _effects_from_json(json.load(fh))
        with open(args.truth_sem) as fh:
            sem = _sem_from_json(json.load(fh))
        curve = effect_ranking_pr(effects, true_total_effects(sem))
        metrics["effect_pr_curve"] = {
            "recall_grid": list(curve.recall_grid),
            "precision_at": list(curve.precision_at),
        }
        inputs += [args.effects, args.truth_sem]
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "metrics.json")
    _write_json(path, metrics)
    _write_manifest(args.out, "eval", args, inputs, [path],
                    {"total_s": time.time() - t0})
    return 0


def _bench_curves_for_method(method, data, truth_cp, truth_eff, n, seed):
    """One dataset, one method: ({curve_name: precisions}, chosen_params)."""
    lam_bic = bic_lambda(n)
    out = {}
    chosen = None

    def sweep(cov):
        skel_pts, dir_pts = [], []
        for mult in LAMBDA_MULTIPLIERS:
            cp = ges_run(cov, GesConfig(lam=mult * lam_bic)).cpdag
            skel_pts.append(skeleton_pr(cp, truth_cp))
            dir_pts.append(directed_pr(cp, truth_cp))
        return (pr_curve_from_points([(r, p) for p, r in skel_pts]),
                pr_curve_from_points([(r, p) for p, r in dir_pts]))

    if method == "ges":
        cov = covariance_from_data(data)
        skel, dire = sweep(cov)
        eff_cov = cov
    elif method == "lrps-ges":
        sol, sel, _ = fit_lrps_stage(data, selection=CV5, seed=seed)
        chosen = {"eta": sel.chosen_eta, "gamma": sel.chosen_gamma,
                  "selection": sel.method}
        cov2 = deconfounded_covariance(sol, n)
        skel, dire = sweep(cov2)
        eff_cov = cov2
    elif method == "empty":
        cp = Pdag(data.shape[1])
        skel = pr_curve_from_points([skeleton_pr(cp, truth_cp)[::-1]])
        dire = pr_curve_from_points([directed_pr(cp, truth_cp)[::-1]])
        eff_cov = covariance_from_data(data)
        eff = effect_matrix(cp, eff_cov)
        out["skeleton"] = skel.precision_at
        out["directed"] = dire.precision_at
        out["effect"] = effect_ranking_pr(eff, truth_eff).precision_at
        return out, chosen
    elif method == "pca-ges":
        best = None
        for k in range(1, min(6, data.shape[1] - 1, data.shape[0] - 1)):
            resid = pca_regress_out(data, k)
            cov = covariance_from_data(resid, center=False)
            sk, di = sweep(cov)
            ap = sk.average_precision()
            if best is None or ap > best[0]:
                best = (ap, sk, di, cov, k)
        _, skel, dire, eff_cov, k_star = best
        chosen = {"pca_k": k_star}
    elif method == "random":
        from . import rng as rngmod
        cov = covariance_from_data(data)
        base = rngmod.stream(seed, rngmod.STREAM_BASELINE)
        curves_s, curves_e = [], []
        p = data.shape[1]
        for s in base.integers(1, 2**62, size=100):
            rsem = random_sem(SimDesign(p=p, h=0, n=n, sparsity=0.05, seed=int(s)))
            rcp = dag_to_cpdag(rsem.observed_dag())
            curves_s.append(pr_curve_from_points([skeleton_pr(rcp, truth_cp)[::-1]]).precision_at)
            curves_e.append(effect_ranking_pr(effect_matrix(rcp, cov), truth_eff).precision_at)
        out["skeleton"] = tuple(np.mean(curves_s, axis=0))
        out["effect"] = tuple(np.mean(curves_e, axis=0))
        return out, chosen
    else:
        raise ValueError(f"unknown bench method {method!r}")

    cp_bic = ges_run(eff_cov, GesConfig(lam=lam_bic)).cpdag
    eff = effect_matrix(cp_bic, eff_cov)
    out["skeleton"] = skel.precision_at
    out["directed"] = dire.precision_at
    out["effect"] = effect_ranking_pr(eff, truth_eff).precision_at
    return out, chosen


def _bench_unit(task):
    """One (design, replicate) cell: aggregation rows plus result records."""
    p, h, n, f_pct, sparsity, rep, seed, methods = task
    seed_r = seed + rep
    design = SimDesign(p=p, h=h, n=n, f_pct=f_pct, sparsity=sparsity, seed=seed_r)
    sem = random_sem(design)
    data = sample(sem, n, seed=seed_r)
    truth_cp = dag_to_cpdag(sem.observed_dag())
    truth_eff = true_total_effects(sem)
    rows = {}
    records = []
    for method in methods:
        t0 = time.time()
        curves, chosen = _bench_curves_for_method(method, data, truth_cp,
                                                  truth_eff, n, seed_r)
        for curve_name, precisions in curves.items():
            rows[(method, curve_name)] = tuple(precisions)
        metrics = {f"{name}_pr_curve": {"recall_grid": list(RECALL_GRID),
                                        "precision_at": list(vals)}
                   for name, vals in curves.items()}
        records.append({
            "design": {"p": p, "h": h, "n": n, "f_pct": f_pct,
                       "sparsity": sparsity},
            "seed": seed_r,
            "method": method,
            "chosen_params": chosen,
            "metrics": metrics,
            "timings": {"total_s": time.time() - t0},
        })
    return (p, h, n, f_pct, rep), rows, records


def cmd_bench(args) -> int:
    t0 = time.time()
    hs = [int(v) for v in str(args.h).split(",")]
    ns = [int(v) for v in str(args.n).split(",")]
    methods = tuple(args.methods.split(","))
    tasks = []
    for h in hs:
        for n in ns:
            for rep in range(args.reps):
                tasks.append((args.p, h, n, args.f_pct, args.sparsity, rep,
                              args.seed, methods))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_bench_unit, tasks))
    else:
        results = [_bench_unit(t) for t in tasks]

    # aggregate: mean precision across reps per (design, method, curve)
    acc = {}
    for (p, h, n, f_pct, rep), rows, _ in results:
        for (method, curve_name), precisions in rows.items():
            acc.setdefault((p, h, n, f_pct, method, curve_name), []).append(precisions)
    lines = ["p,h,n,f_pct,method,curve,recall,mean_precision"]
    for key in sorted(acc.keys()):
        p, h, n, f_pct, method, curve_name = key
        mean = np.mean(acc[key], axis=0)
        for r, m in zip(RECALL_GRID, mean):
            lines.append(f"{p},{h},{n},{f_pct:g},{method},{curve_name},"
                         f"{r:.2f},{_fmt(m)}")
    os.makedirs(args.out, exist_ok=True)
    results_dir = os.path.join(args.out, "results")
    os.makedirs(results_dir, exist_ok=True)
    outputs = []
    for (p, h, n, f_pct, rep), _, records in results:
        for rec in records:
            name = (f"result_p{p}_h{h}_n{n}_f{f_pct:g}_"
                    f"{rec['method']}_rep{rep}.json")
            rec_path = os.path.join(results_dir, name)
            _write_json(rec_path, rec)
            outputs.append(rec_path)
    path = os.path.join(args.out, "bench.csv")
    _write_atomic(path, "\n".join(lines) + "\n")
    outputs.append(path)
    _write_manifest(args.out, "bench", args, [], outputs,
                    {"total_s": time.time() - t0})
    return 0


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="causal-lrps",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw a synthetic dataset with ground truth")
    sim.add_argument("--p", type=int, default=50)
    sim.add_argument("--h", type=int, default=5)
    sim.add_argument("--n", type=int, default=500)
    sim.add_argument("--f-pct", type=float, default=70.0, dest="f_pct")
    sim.add_argument("--sparsity", type=float, default=0.05)
    sim.add_argument("--weight-lo", type=float, default=0.3)
    sim.add_argument("--weight-hi", type=float, default=1.0)
    sim.add_argument("--noise-lo", type=float, default=0.5)
    sim.add_argument("--noise-hi", type=float, default=1.5)
    sim.add_argument("--seed", type=int, default=1)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="estimate a CPDAG from a data CSV")
    fit.add_argument("--data", required=True)
    fit.add_argument("--method", default="lrps-ges",
                     choices=["ges", "lrps-ges", "pca-ges", "empty", "random"])
    fit.add_argument("--select", default="cv5", choices=["cv5", "bic", "ebic"])
    fit.add_argument("--lambda", default="bic", dest="lam",
                     help="second-stage penalty: a number or 'bic'")
    fit.add_argument("--pca-k", type=int, default=1, dest="pca_k")
    fit.add_argument("--sparsity", type=float, default=0.05,
                     help="edge probability for --method random")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=cmd_fit)

    ida = sub.add_parser("ida", help="enumerate possible total causal effects")
    ida.add_argument("--cpdag", required=True)
    ida.add_argument("--cov", default=None)
    ida.add_argument("--data", default=None)
    ida.add_argument("--precision", default=None,
                     help="precision-matrix CSV; its inverse is used")
    ida.add_argument("--sample-size", type=int, default=1, dest="sample_size")
    ida.add_argument("--seed", type=int, default=0)
    ida.add_argument("--out", required=True)
    ida.set_defaults(func=cmd_ida)

    ev = sub.add_parser("eval", help="score an estimate against ground truth")
    ev.add_argument("--est", required=True)
    ev.add_argument("--truth", required=True)
    ev.add_argument("--truth-is-cpdag", action="store_true", dest="truth_is_cpdag",
                    help="treat a fully directed truth file as a CPDAG as-is")
    ev.add_argument("--effects", default=None)
    ev.add_argument("--truth-sem", default=None, dest="truth_sem")
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--out", required=True)
    ev.set_defaults(func=cmd_eval)

    be = sub.add_parser("bench", help="factorial benchmark emitting PR curves")
    be.add_argument("--p", type=int, default=10)
    be.add_argument("--h", default="0,2")
    be.add_argument("--n", default="500,5000")
    be.add_argument("--f-pct", type=float, default=80.0, dest="f_pct")
    be.add_argument("--sparsity", type=float, default=0.05)
    be.add_argument("--reps", type=int, default=1)
    be.add_argument("--methods", default=",".join(BENCH_METHODS))
    be.add_argument("--seed", type=int, default=1)
    be.add_argument("--jobs", type=int,
                    default=int(os.environ.get("CAUSAL_LRPS_JOBS", "1")))
    be.add_argument("--out", required=True)
    be.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (CausalLrpsError, ValueError, OSError) as exc:
        stage = getattr(args, "command", "cli")
        print(f"causal-lrps {stage}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
