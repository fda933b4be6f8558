"""Command-line entry point: validation, spectral computations, censuses, and
the acceptance suite.  Reports land under out/<command>-<confighash>/ with a
manifest; identical configs and seeds give byte-identical outputs."""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import census as cen
from . import schottky as sk
from . import shift as sh
from . import stats as st
from . import transfer as tr
from .acceptance import run_all
from .errors import CovercountError, ValidationError
from .groupfile import load_any, load_group
from .reporting import ReportWriter, census_csv_rows, scan_csv_rows

EXIT_OK, EXIT_COMPUTE, EXIT_ACCEPT, EXIT_CONFIG = 0, 1, 2, 3


def _color(text: str, code: str) -> str:
    if os.environ.get("NO_COLOR") or not sys.stdout.isatty():
        return text
    return f"\x1b[{code}m{text}\x1b[0m"


def _parse_vec(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip() != ""]


def _spec_for(source, nodes):
    obj = load_any(source)
    if isinstance(obj, sh.MarkovShift):
        return obj, tr.OperatorSpec(obj)
    shift = sh.from_schottky(obj)
    return obj, tr.OperatorSpec(shift, nodes_per_disk=nodes)


def cmd_validate(args) -> int:
    group = load_group(args.group)  # construction validates; raises on failure
    print(f"group ok: model={group.model.value} generators={group.g} d={group.d}")
    print(f"fingerprint: {group.fingerprint()}")
    n = group.n_symbols
    for i in range(n):
        for j in range(i + 1, n):
            gap = abs(group.disks[i].center - group.disks[j].center) \
                - group.disks[i].radius - group.disks[j].radius
            print(f"disk gap [{i},{j}]: {gap:.6f}")
    print(f"orbit prune margin: {group.orbit_margin():.6f}")
    print(f"min cycle step: {group.min_cycle_step():.6f}")
    return EXIT_OK


def cmd_delta(args) -> int:
    obj, spec = _spec_for(args.group, args.nodes)
    delta = tr.critical_exponent(spec)
    res = tr.leading_eigenvalue(spec, delta)
    print(f"delta = {delta:.12f}   |lambda(delta)-1| = {abs(res.lam - 1.0):.3e}")
    writer = ReportWriter(args.out, "delta", {"group": str(args.group), "nodes": args.nodes})
    writer.write_json("summary.json", {"delta": delta, "lambda_residual": res.residual,
                                       "abs_lambda_err": abs(res.lam - 1.0)})
    writer.finish({"input": spec.fingerprint()})
    return EXIT_OK


def cmd_pressure(args) -> int:
    obj, spec = _spec_for(args.group, args.nodes)
    surf = tr.pressure_surface(spec, fd_step=args.fd_step)
    print(f"delta = {surf.delta:.12f}")
    print(f"grad P(0) = {surf.gradient.tolist()}")
    print(f"hess P(0) = {surf.hessian.tolist()}")
    print(f"sigma = {surf.sigma:.12f}   C(0) = {surf.c0:.12f}")
    extras = {}
    for text in args.u or []:
        u = _parse_vec(text)
        extras[text] = tr.pressure(spec, u)
        print(f"P({text}) = {extras[text]:.12f}")
    writer = ReportWriter(args.out, "pressure",
                          {"group": str(args.group), "nodes": args.nodes,
                           "fd_step": args.fd_step, "u": args.u or []})
    d = spec.shift.d
    header = [f"u_{i}" for i in range(d)] + ["P"]
    rows = [list(k) + [v] for k, v in sorted(surf.samples.items())]
    writer.write_csv("pressure.csv", header, rows)
    writer.write_json("summary.json", {
        "delta": surf.delta, "gradient": surf.gradient, "hessian": surf.hessian,
        "sigma": surf.sigma, "c0": surf.c0,
        "samples": {repr(k): v for k, v in surf.samples.items()},
        "extra": extras})
    writer.finish({"input": spec.fingerprint()})
    return EXIT_OK


def cmd_scan(args) -> int:
    obj, spec = _spec_for(args.group, args.nodes)
    delta = tr.critical_exponent(spec)
    t_grid = np.linspace(args.t_min, args.t_max, args.t_count)
    d = spec.shift.d
    if d > 0:
        axis = np.linspace(0.0, 2.0 * math.pi, args.v_count, endpoint=False)
        v_grid = [[x] + [0.0] * (d - 1) for x in axis]
    else:
        v_grid = [[]]
    rep = tr.spectral_radius_scan(spec, delta, t_grid, v_grid,
                                  p_list=args.p, margin=args.margin)
    print(f"delta = {delta:.12f}; max |lambda| on grid = {rep.max_abs_lambda():.8f}")
    print(f"violations: {len(rep.violations)}")
    for r in rep.violations[:10]:
        print(f"  flagged t={r.t:.6f} v={r.v} p={r.p} |lambda|={r.abs_lambda:.8f}")
    writer = ReportWriter(args.out, "scan",
                          {"group": str(args.group), "nodes": args.nodes,
                           "t": [args.t_min, args.t_max, args.t_count],
                           "v_count": args.v_count, "p": args.p, "margin": args.margin})
    writer.write_csv("scan.csv", *scan_csv_rows(rep))
    writer.write_json("summary.json", {"delta": delta,
                                       "max_abs_lambda": rep.max_abs_lambda(),
                                       "violations": len(rep.violations)})
    writer.finish({"input": spec.fingerprint()})
    return EXIT_OK


def _emit_census(args, command, rep, extra=None) -> None:
    writer = ReportWriter(args.out, command, vars_config(args))
    writer.write_csv("census.csv", *census_csv_rows(rep))
    summary = {"kind": rep.kind, "checkpoints": rep.checkpoints,
               "totals": rep.totals,
               "meta": {k: v for k, v in rep.meta.items() if k != "all_classes"}}
    if extra:
        summary.update(extra)
    writer.write_json("summary.json", summary)
    writer.finish({"group": rep.meta.get("group", "")})


def vars_config(args) -> dict:
    skip = {"func", "out", "command"}  # the run directory is not configuration
    return {k: v for k, v in vars(args).items() if k not in skip}


def _group_prediction(args, group):
    shift = sh.from_schottky(group)
    spec = tr.OperatorSpec(shift, nodes_per_disk=args.nodes)
    delta = tr.critical_exponent(spec)
    if group.d >= 1 and getattr(args, "use_sigma", False):
        sigma = tr.pressure_surface(spec).sigma
    else:
        sigma = 1.0
    return cen.Prediction(delta=delta, sigma=sigma, d=group.d,
                          mode="Absolute" if getattr(args, "use_sigma", False) else "UpToConstant")


def cmd_count_orbit(args) -> int:
    group = load_group(args.group)
    pred = _group_prediction(args, group)
    cps = cen.checkpoints_linear(args.t_min, args.t_max, args.checkpoints)
    classes = [tuple(int(x) for x in c.split(",")) for c in args.classes] if args.classes else None
    records = []
    if args.dump_records:
        sk.enumerate_orbit(group, args.t_max,
                           emit=lambda r: records.append(
                               [len(r.word), r.displacement, *r.homology]),
                           budget=args.budget_cap)
    rep = cen.orbit_by_homology(group, pred, args.t_max, cps, classes=classes,
                                budget=args.budget_cap, threads=args.threads)
    for key in sorted(rep.counts):
        print(f"class {key}: N(T_max) = {rep.counts[key][-1]}, ratio = {rep.ratios[key][-1]:.4f}")
    writer = ReportWriter(args.out, "count-orbit", vars_config(args))
    writer.write_csv("census.csv", *census_csv_rows(rep))
    if args.dump_records:
        header = ["word_len", "displacement"] + [f"xi_{i}" for i in range(group.d)]
        writer.write_csv("records.csv", header, records)
    writer.write_json("summary.json", {"kind": rep.kind, "checkpoints": rep.checkpoints,
                                       "totals": rep.totals, "delta": pred.delta,
                                       "meta": {k: v for k, v in rep.meta.items()
                                                if k != "all_classes"}})
    writer.finish({"group": group.fingerprint()})
    return EXIT_OK


def cmd_count_geodesics(args) -> int:
    group = load_group(args.group)
    args.use_sigma = group.d >= 1
    pred = _group_prediction(args, group)
    cps = cen.checkpoints_linear(args.l_min, args.l_max, args.checkpoints)
    records = []
    if args.dump_records:
        from covercount.hyperbolic import displacement as disp_of
        sk.primitive_classes(group, args.l_max,
                             emit=lambda r: records.append(
                                 [len(r.word), disp_of(group.evaluate(r.word)),
                                  *r.homology, r.length, r.holonomy]),
                             budget=args.budget_cap)
    rep = cen.geodesics_by_homology(group, pred, args.l_max, cps, budget=args.budget_cap)
    key = (0,) * group.d
    print(f"primitive classes <= {args.l_max}: {rep.totals[-1]}")
    print(f"trivial-class ratio to the absolute law: {rep.ratios[key][-1]:.4f}")
    writer = ReportWriter(args.out, "count-geodesics", vars_config(args))
    writer.write_csv("census.csv", *census_csv_rows(rep))
    if args.dump_records:
        header = (["word_len", "displacement"] + [f"xi_{i}" for i in range(group.d)]
                  + ["length", "holonomy"])
        writer.write_csv("records.csv", header, records)
    writer.write_json("summary.json", {"kind": rep.kind, "checkpoints": rep.checkpoints,
                                       "totals": rep.totals, "delta": pred.delta,
                                       "sigma": pred.sigma,
                                       "meta": rep.meta})
    writer.finish({"group": group.fingerprint()})
    return EXIT_OK


def cmd_count_vectors(args) -> int:
    group = load_group(args.group)
    pred = _group_prediction(args, group)
    cps = np.exp(np.linspace(math.log(args.t_min), math.log(args.t_max), args.checkpoints))
    rep = cen.vector_orbit(group, pred, _parse_vec(args.w0), args.t_max, cps,
                           norm=args.norm, disp_pad=args.disp_pad,
                           budget=args.budget_cap, threads=args.threads)
    cts = rep.counts["vectors"]
    print(f"vectors with norm <= {args.t_max:.3e}: {cts[-1]}")
    half = len(cps) // 2
    fit = cen.fit_growth(np.log(cps)[half:], cts[half:], fix_log_power=-pred.d / 2.0)
    print(f"fitted exponent {fit.exponent:.4f} (delta = {pred.delta:.4f})")
    _emit_census(args, "count-vectors", rep,
                 {"delta": pred.delta, "fitted_exponent": fit.exponent})
    return EXIT_OK


def cmd_holonomy(args) -> int:
    group = load_group(args.group)
    cps = cen.checkpoints_linear(args.l_min, args.l_max, args.checkpoints)
    rep = cen.holonomy_equidistribution(group, args.l_max, args.p, cps,
                                        budget=args.budget_cap)
    for p in sorted(rep.ratios):
        print(f"p={p}: |char sum|/count at L_max = {rep.ratios[p][-1]:.5f}")
    _emit_census(args, "holonomy", rep)
    return EXIT_OK


def cmd_clt(args) -> int:
    obj = load_any(args.group)
    if isinstance(obj, sh.MarkovShift):
        shift, spec = obj, tr.OperatorSpec(obj)
    else:
        shift = sh.from_schottky(obj)
        spec = tr.OperatorSpec(shift, nodes_per_disk=args.nodes)
    if shift.d < 1:
        raise ValidationError("CLT check needs homology dimension d >= 1")
    delta = tr.critical_exponent(spec)
    surf = tr.pressure_surface(spec)
    sr = tr.leading_eigenvalue(spec, delta, want_measure=True)
    chain = sh.parry_chain(shift, sr)
    tau, f = sh.sample_cocycle_batch(chain, shift, args.steps, args.traj,
                                     args.seed, spectral=sr)
    z = f / np.sqrt(tau)[:, None]
    print(f"delta = {delta:.9f}, Cov reference = {surf.hessian.tolist()}")
    summary = {
        "delta": delta, "sigma": surf.sigma, "hessian": surf.hessian,
        "empirical_mean": z.mean(axis=0), "empirical_cov": np.cov(z.T),
        "gaussian_check": None,
        "sample_head": {"tau": tau[:8], "f": f[:8, 0]}}
    if args.traj >= 1000:
        chk = st.clt_check(z, surf.hessian)
        print(f"empirical covariance = {chk.covariance.tolist()}")
        print(f"ks_p = {chk.ks_p}, chi2_p = {chk.chi2_p:.4f}")
        summary["gaussian_check"] = {"ks_p": list(chk.ks_p), "chi2_p": chk.chi2_p}
    else:
        print(f"empirical covariance = {np.cov(z.T).tolist()} "
              f"(too few trajectories for p-values)")
    writer = ReportWriter(args.out, "clt", vars_config(args))
    writer.write_json("summary.json", summary)
    if args.dump_trajectory:
        rows = sh.sample_trajectory(chain, shift, args.dump_trajectory,
                                    args.seed, spectral=sr)
        header = ["step", "symbol", "tau_cum"] + [f"f_cum_{i}" for i in range(shift.d)]
        writer.write_csv("trajectory.csv", header, rows)
    writer.finish({"input": spec.fingerprint()})
    return EXIT_OK


def cmd_verify_all(args) -> int:
    rows = []

    def show(res):
        mark = _color("PASS", "32") if res.passed else _color("FAIL", "31")
        print(f"[{mark}] {res.cid:>4} {res.name}  ({res.seconds:.1f}s)")
        for k, v in res.details.items():
            print(f"         {k} = {v}")
        rows.append(res)

    results = run_all(budget=args.budget, seed=args.seed, progress=show)
    n_fail = sum(not r.passed for r in results)
    writer = ReportWriter(args.out, "verify-all", {"budget": args.budget, "seed": args.seed})
    # timings go to stdout only; report files must be bitwise reproducible
    writer.write_json("summary.json", [
        {"cid": r.cid, "name": r.name, "passed": r.passed,
         "details": r.details} for r in results])
    writer.write_csv("results.csv", ["cid", "name", "passed"],
                     [[r.cid, r.name, int(r.passed)] for r in results])
    manifest = writer.finish()
    print(f"\n{len(results) - n_fail}/{len(results)} criteria passed; "
          f"manifest {manifest['manifest_sha256'][:12]} in {writer.dir}")
    return EXIT_OK if n_fail == 0 else EXIT_ACCEPT


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="covercount",
                                 description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out", help="output directory root")
    sub = ap.add_subparsers(dest="command", required=True)

    ap._command_parsers = {}

    def add(name, fn, **kw):
        p = sub.add_parser(name, **kw)
        p.set_defaults(func=fn)
        ap._command_parsers[name] = p
        return p

    p = add("validate", cmd_validate, help="check a group definition file")
    p.add_argument("--group")

    p = add("delta", cmd_delta, help="critical exponent via the transfer operator")
    p.add_argument("--group")
    p.add_argument("--nodes", type=int, default=24)

    p = add("pressure", cmd_pressure, help="pressure surface: gradient, Hessian, sigma, C0")
    p.add_argument("--group")
    p.add_argument("--nodes", type=int, default=24)
    p.add_argument("--fd-step", type=float, default=1e-3)
    p.add_argument("--u", action="append", help="extra twist point, e.g. '0.3' or '0.3,0.1'")

    p = add("scan", cmd_scan, help="spectral radius scan on the critical line")
    p.add_argument("--group")
    p.add_argument("--nodes", type=int, default=48)
    p.add_argument("--t-min", type=float, default=0.05)
    p.add_argument("--t-max", type=float, default=5.0)
    p.add_argument("--t-count", type=int, default=25)
    p.add_argument("--v-count", type=int, default=16)
    p.add_argument("--p", type=int, nargs="*", default=[0])
    p.add_argument("--margin", type=float, default=1e-3)

    p = add("count-orbit", cmd_count_orbit, help="orbit census by homology class")
    p.add_argument("--group")
    p.add_argument("--nodes", type=int, default=24)
    p.add_argument("--t-min", type=float, default=5.0)
    p.add_argument("--t-max", type=float, default=12.0)
    p.add_argument("--checkpoints", type=int, default=12)
    p.add_argument("--classes", nargs="*", help="homology classes like '0' '1' '-1'")
    p.add_argument("--budget-cap", type=int, default=5_000_000)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--dump-records", action="store_true",
                   help="also write the raw record stream CSV")

    p = add("count-geodesics", cmd_count_geodesics,
            help="primitive closed geodesics vs the absolute law")
    p.add_argument("--group")
    p.add_argument("--nodes", type=int, default=24)
    p.add_argument("--l-min", type=float, default=8.0)
    p.add_argument("--l-max", type=float, default=16.0)
    p.add_argument("--checkpoints", type=int, default=10)
    p.add_argument("--budget-cap", type=int, default=5_000_000)
    p.add_argument("--dump-records", action="store_true",
                   help="also write the raw record stream CSV")

    p = add("count-vectors", cmd_count_vectors, help="vector orbit counting in R^3")
    p.add_argument("--group")
    p.add_argument("--nodes", type=int, default=24)
    p.add_argument("--w0", default="1,0,1")
    p.add_argument("--t-min", type=float, default=math.e ** 6)
    p.add_argument("--t-max", type=float, default=math.e ** 13)
    p.add_argument("--checkpoints", type=int, default=12)
    p.add_argument("--norm", choices=["euclidean", "sup"], default="euclidean")
    p.add_argument("--disp-pad", type=float, default=4.0)
    p.add_argument("--budget-cap", type=int, default=5_000_000)
    p.add_argument("--threads", type=int, default=1)

    p = add("holonomy", cmd_holonomy, help="holonomy character sums over classes")
    p.add_argument("--group")
    p.add_argument("--l-min", type=float, default=9.0)
    p.add_argument("--l-max", type=float, default=17.0)
    p.add_argument("--checkpoints", type=int, default=8)
    p.add_argument("--p", type=int, nargs="*", default=[1, 2, 3])
    p.add_argument("--budget-cap", type=int, default=5_000_000)

    p = add("clt", cmd_clt, help="Gaussian check for the homology cocycle")
    p.add_argument("--group")
    p.add_argument("--nodes", type=int, default=24)
    p.add_argument("--traj", type=int, default=10_000)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--dump-trajectory", type=int, default=0, metavar="STEPS",
                   help="write one trajectory dump of this many steps")

    p = add("verify-all", cmd_verify_all, help="run the full acceptance suite")
    p.add_argument("--budget", choices=["small", "smoke"], default="small")
    p.add_argument("--seed", type=int)

    return ap


def main(argv=None) -> int:
    import json
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    if "--config" in argv:
        i = argv.index("--config")
        try:
            cfg = json.loads(open(argv[i + 1]).read())
        except (IndexError, OSError, json.JSONDecodeError) as e:
            print(f"error: bad --config: {e}", file=sys.stderr)
            return EXIT_CONFIG
        del argv[i:i + 2]
        defaults = {k.replace("-", "_"): v for k, v in cfg.items()}
        ap.set_defaults(**defaults)
        for p in ap._command_parsers.values():
            p.set_defaults(**{k: v for k, v in defaults.items()
                              if any(k == a.dest for a in p._actions)})
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else EXIT_OK
    if getattr(args, "group", "set") is None:
        print("error: --group is required (flag or config file)", file=sys.stderr)
        return EXIT_CONFIG
    if args.command in ("clt", "verify-all") and getattr(args, "seed", 1) is None:
        print("error: sampling commands require --seed", file=sys.stderr)
        return EXIT_CONFIG
    for cap_name in ("budget_cap", "traj", "steps", "checkpoints"):
        if (getattr(args, cap_name, 1) or 0) <= 0:
            print(f"error: --{cap_name.replace('_', '-')} must be positive", file=sys.stderr)
            return EXIT_CONFIG
    try:
        return args.func(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG if args.command != "validate" else EXIT_COMPUTE
    except CovercountError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_COMPUTE
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
