"""Command-line front end.

Subcommands: gen, mcmc, landscape, fmf, region, critical-c, cover, gfun.
Exit codes: 0 ok, 2 usage (bad flags or parameter domains), 3 enumeration
cap exceeded, 4 numerical failure.  Every file-producing run writes a
<out>.manifest.json recording the command, parameters, seeds, version and
wall time; re-running the same command reproduces the output bytes.
"""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, fmf, gfunc, landscape, mcmc, model, regions, \
    setcover
from .errors import CAPS, BGTError, CapExceededError, DomainError, \
    NumericalError


def _fmt(x):
    return f"{x:.12g}"


def _common(sub):
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", type=str, default=None)
    sub.add_argument("--format", choices=["csv", "json"], default="csv")
    sub.add_argument("--threads", type=int,
                     default=int(os.environ.get("BGT_THREADS", "1")))
    sub.add_argument("--caps", type=str, default=None,
                     help="cap overrides, e.g. 'stratum=5e7,subsets=1e8'")
    sub.add_argument("--config", type=str, default=None,
                     help="JSON file of flag defaults")


def _apply_caps(spec):
    if not spec:
        return
    for part in spec.split(","):
        key, _, val = part.partition("=")
        key = key.strip()
        if key not in CAPS:
            raise DomainError(f"--caps: unknown cap {key!r}")
        CAPS[key] = int(float(val))


def _apply_config(args):
    if not args.config:
        return args
    with open(args.config) as fh:
        conf = json.load(fh)
    for key, val in conf.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise DomainError(f"--config: unknown key {key!r}")
        if getattr(args, dest) is None:
            setattr(args, dest, val)
    return args


def _write(path, text, outputs):
    with open(path, "w") as fh:
        fh.write(text)
    outputs.append(path)


def _manifest(args, command, outputs, t0, seeds):
    if not outputs:
        return
    params = {k: v for k, v in vars(args).items()
              if k not in ("func", "config") and v is not None}
    doc = {
        "command": command,
        "params": params,
        "seeds": seeds,
        "version": __version__,
        "outputs": outputs,
        "wall_time_s": time.monotonic() - t0,
    }
    with open(outputs[0] + ".manifest.json", "w") as fh:
        json.dump(doc, fh, indent=2, default=str)


def _load_or_sample(args):
    if getattr(args, "instance", None):
        with open(args.instance, "rb") as fh:
            blob = fh.read()
        if blob[:4] == b"BGT1":
            inst = model.GTInstance.from_binary(blob)
        else:
            inst = model.GTInstance.from_json(blob.decode())
    else:
        if args.n is None or args.k is None or args.C is None:
            raise DomainError("either --instance or --n/--k/--C is required")
        inst = model.sample_instance_k(args.n, args.k, args.C, args.seed)
    return inst, model.comp_prune(inst)


def _instance_flags(sub):
    sub.add_argument("--instance", type=str, default=None)
    sub.add_argument("--n", type=int, default=None)
    sub.add_argument("--k", type=int, default=None)
    sub.add_argument("--C", type=float, default=None)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args):
    outputs = []
    t0 = time.monotonic()
    if args.alpha is not None and args.k is None:
        inst = model.sample_instance(args.n, args.alpha, args.C, args.seed)
    else:
        inst = model.sample_instance_k(args.n, args.k, args.C, args.seed)
    pr = model.comp_prune(inst)
    payload = inst.to_binary() if args.binary else inst.to_json()
    if args.out:
        mode = "wb" if args.binary else "w"
        with open(args.out, mode) as fh:
            fh.write(payload)
        outputs.append(args.out)
    elif not args.binary:
        sys.stdout.write(payload + "\n")
    print(f"n={inst.n} k={inst.k} N={inst.N} M={pr.M} p={pr.p} "
          f"seed={inst.seed}", file=sys.stderr)
    _manifest(args, "gen", outputs, t0, [args.seed])
    return 0


def cmd_mcmc(args):
    outputs = []
    t0 = time.monotonic()
    inst, pr = _load_or_sample(args)
    beta = args.beta
    if args.beta_scale is not None:
        beta = mcmc.beta_scaled(pr, args.beta_scale)
    if beta is None:
        raise DomainError("one of --beta or --beta-scale is required")
    cfg = mcmc.ChainConfig(
        beta=beta, max_steps=args.steps, init=args.init,
        stop_overlap=args.stop_overlap, record_every=args.record_every,
        seed=args.chain_seed if args.chain_seed is not None else args.seed,
        kernel="metropolis" if args.metropolis else "glauber",
        stop_at_zero=args.stop_at_zero)
    if args.chains == 1:
        trace = mcmc.run_chain(pr, cfg)
        text = trace.to_csv()
        if args.out:
            _write(args.out, text, outputs)
        else:
            sys.stdout.write(text)
    else:
        t_run = time.monotonic()
        traces = mcmc.run_ensemble(pr, cfg, args.chains,
                                   threads=args.threads)
        per_seed = []
        for i, tr in enumerate(traces):
            success = (tr.energies[-1] == 0.0) if args.stop_at_zero else \
                (tr.hit_step is not None)
            per_seed.append({"seed": cfg.seed + i, "hit_step": tr.hit_step,
                             "final_energy": tr.energies[-1],
                             "success": bool(success)})
        doc = json.dumps({"beta": beta, "steps": args.steps,
                          "per_seed": per_seed,
                          "wall_time_s": time.monotonic() - t_run}, indent=2)
        if args.out:
            _write(args.out, doc + "\n", outputs)
        else:
            sys.stdout.write(doc + "\n")
    _manifest(args, "mcmc", outputs, t0, [cfg.seed + i
                                          for i in range(args.chains)])
    return 0


def cmd_landscape(args):
    outputs = []
    t0 = time.monotonic()
    inst, pr = _load_or_sample(args)
    curve = landscape.phi_curve(pr)
    base = args.out or "landscape_out"
    if args.out or not (args.bogp or args.z_table or args.bottleneck):
        text = curve.to_csv()
        if args.out:
            _write(base + ".phi.csv" if not base.endswith(".csv") else base,
                   text, outputs)
        else:
            sys.stdout.write(text)
    if args.z_table:
        table = landscape.count_z_table(pr)
        lines = ["t,l,count"]
        for t in range(table.shape[0]):
            for l in range(table.shape[1]):
                lines.append(f"{t},{l},{table[t, l]}")
        _write(base + ".ztable.csv", "\n".join(lines) + "\n", outputs)
    if args.bogp:
        found = landscape.search_bogp(curve)
        if found is None:
            doc = landscape.BOGPReport(holds=False, zeta1=0.0, zeta2=1.0,
                                       r=0.0, delta=0.0).to_json()
        else:
            doc = landscape.detect_bogp(curve, *found).to_json()
        _write(base + ".bogp.json", doc + "\n", outputs)
    if args.bottleneck is not None:
        betas = [float(b) for b in args.beta_list.split(",")]
        lines = ["beta,ratio"]
        for b in betas:
            lines.append(f"{_fmt(b)},"
                         f"{_fmt(mcmc.bottleneck_ratio(pr, b, args.bottleneck))}")
        _write(base + ".bottleneck.csv", "\n".join(lines) + "\n", outputs)
    _manifest(args, "landscape", outputs, t0, [args.seed])
    return 0


def _parse_grid(spec):
    start, stop, step = (float(v) for v in spec.split(":"))
    n = int(round((stop - start) / step)) + 1
    return np.linspace(start, start + step * (n - 1), n)


def cmd_fmf(args):
    outputs = []
    t0 = time.monotonic()
    slacks = dict(zip(("c_r", "c_s", "c_i"),
                      (float(s) for s in args.slacks.split(","))))
    if args.M is not None and args.p is not None and args.k is not None:
        a = args.a if args.a is not None else \
            regions.a_inf(args.alpha, args.C) + 1e-9
        params = fmf.FMFParams(alpha=args.alpha, C=args.C, a=a,
                               k=float(args.k), M=args.M, p=args.p, **slacks)
    else:
        params = fmf.surrogate_params(float(args.n), args.alpha, args.C,
                                      a=args.a, **slacks)
    if args.y0:
        y0 = fmf.y_zero(params)
        print(f"y_zero={_fmt(y0)} h_c={_fmt(fmf.y_zero_limit(params))}")
    grid = _parse_grid(args.grid) if args.grid else None
    curve = fmf.solve_curve(params, x_grid=grid,
                            with_unconditional=args.compare_unconditional)
    text = curve.to_csv()
    if args.out:
        _write(args.out, text, outputs)
    else:
        sys.stdout.write(text)
    mono = fmf.nonmonotonicity(curve) if not math.isnan(curve.y[0]) else None
    if mono is not None:
        print(f"rising_at_zero eps1={_fmt(mono[0])} delta1={_fmt(mono[1])}",
              file=sys.stderr)
    _manifest(args, "fmf", outputs, t0, [])
    return 0


def cmd_region(args):
    outputs = []
    t0 = time.monotonic()
    a_lo, a_hi = (float(v) for v in args.alpha_range.split(":"))
    c_lo, c_hi = (float(v) for v in args.C_range.split(":"))
    report = regions.region_scan((a_lo, a_hi), (c_lo, c_hi), args.resolution)
    text = report.to_csv()
    if args.out:
        _write(args.out, text, outputs)
    else:
        sys.stdout.write(text)
    _manifest(args, "region", outputs, t0, [])
    return 0


def cmd_critical_c(args):
    outputs = []
    t0 = time.monotonic()
    root, resid = regions.critical_c(args.alpha)
    print(f"critical_C={_fmt(root)} residual={_fmt(resid)}")
    if args.out:
        _write(args.out, json.dumps({"alpha": args.alpha, "critical_C": root,
                                     "residual": resid}) + "\n", outputs)
    _manifest(args, "critical-c", outputs, t0, [])
    return 0


def cmd_cover(args):
    outputs = []
    t0 = time.monotonic()
    if args.from_model:
        n, alpha, C = args.from_model.split(",")
        P, M, k = setcover.cover_scales_from_model(int(float(n)),
                                                   float(alpha), float(C))
    else:
        if args.P is None or args.M is None or args.k is None:
            raise DomainError("either --from-model or --P/--M/--k is required")
        P, M, k = args.P, args.M, args.k
    inst = setcover.sample_cover(P, M, k, args.seed)
    doc = {"P": P, "M": M, "k": k, "q": inst.q, "seed": args.seed}
    if not args.skip_exact:
        val, wit = setcover.phi_k_exact(inst)
        doc["phi_exact"] = val
        doc["witness"] = list(wit.members)
    gval, _ = setcover.phi_k_greedy(inst)
    doc["phi_greedy"] = gval
    if args.random_trials:
        mean, se = setcover.random_guess_mean(inst, args.random_trials,
                                              seed=args.seed)
        doc["phi_random_mean"] = mean
        doc["phi_random_se"] = se
    if args.limit_C is not None:
        doc["phi_limit"] = setcover.phi_k_limit(args.limit_C)
    if args.flat_y is not None:
        counts = setcover.count_flat(inst, k, args.flat_y, args.c_dl)
        doc["flat"] = {"target": counts.target, "flat": counts.flat,
                       "exact": counts.exact, "at_most": counts.at_most}
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        _write(args.out, text, outputs)
    else:
        sys.stdout.write(text)
    _manifest(args, "cover", outputs, t0, [args.seed])
    return 0


def cmd_gfun(args):
    outputs = []
    t0 = time.monotonic()
    ys = [float(v) for v in args.y.split(",")]
    summaries = []
    for y in ys:
        rep = gfunc.verify_g_properties(y, grid_resolution=args.resolution)
        summaries.append(json.loads(rep.summary_json()))
        if args.out and len(ys) == 1:
            _write(args.out, rep.to_csv(), outputs)
    doc = json.dumps(summaries, indent=2) + "\n"
    if args.out and len(ys) > 1:
        _write(args.out, doc, outputs)
    elif not args.out:
        sys.stdout.write(doc)
    _manifest(args, "gfun", outputs, t0, [])
    return 0


# ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="bgt", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="sample + prune + serialize an instance")
    _common(g)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, default=None)
    g.add_argument("--alpha", type=float, default=None)
    g.add_argument("--C", type=float, required=True)
    g.add_argument("--binary", action="store_true",
                   help="write the compact BGT1 format instead of JSON")
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("mcmc", help="chain or ensemble runs")
    _common(m)
    _instance_flags(m)
    m.add_argument("--beta", type=float, default=None)
    m.add_argument("--beta-scale", type=float, default=None,
                   help="beta = c * k * log(p/k)")
    m.add_argument("--steps", type=int, default=10_000)
    m.add_argument("--chains", type=int, default=1)
    m.add_argument("--init", choices=[mcmc.UNIFORM, mcmc.DISJOINT],
                   default=mcmc.UNIFORM)
    m.add_argument("--record-every", type=int, default=1)
    m.add_argument("--stop-overlap", type=int, default=None)
    m.add_argument("--stop-at-zero", action="store_true")
    m.add_argument("--metropolis", action="store_true")
    m.add_argument("--chain-seed", type=int, default=None)
    m.set_defaults(func=cmd_mcmc)

    l = sub.add_parser("landscape",
                       help="phi curve, Z table, barrier search, bottleneck")
    _common(l)
    _instance_flags(l)
    l.add_argument("--z-table", action="store_true")
    l.add_argument("--bogp", action="store_true")
    l.add_argument("--bottleneck", type=float, default=None,
                   help="eps1 for the bottleneck ratio")
    l.add_argument("--beta-list", type=str, default="0,2,4,8")
    l.set_defaults(func=cmd_landscape)

    f = sub.add_parser("fmf", help="first-moment curve solving")
    _common(f)
    f.add_argument("--n", type=float, default=None)
    f.add_argument("--alpha", type=float, required=True)
    f.add_argument("--C", type=float, required=True)
    f.add_argument("--a", type=float, default=None)
    f.add_argument("--slacks", type=str, default="0,0,0")
    f.add_argument("--grid", type=str, default=None,
                   help="start:stop:step for the x grid")
    f.add_argument("--compare-unconditional", action="store_true")
    f.add_argument("--k", type=float, default=None)
    f.add_argument("--M", type=float, default=None)
    f.add_argument("--p", type=float, default=None)
    f.add_argument("--y0", action="store_true")
    f.set_defaults(func=cmd_fmf)

    r = sub.add_parser("region", help="(alpha, C) admissibility scan")
    _common(r)
    r.add_argument("--alpha-range", type=str, required=True)
    r.add_argument("--C-range", type=str, required=True)
    r.add_argument("--resolution", type=int, default=10)
    r.set_defaults(func=cmd_region)

    c = sub.add_parser("critical-c", help="derivative-boundary constant")
    _common(c)
    c.add_argument("--alpha", type=float, required=True)
    c.set_defaults(func=cmd_critical_c)

    v = sub.add_parser("cover", help="random MAX k-set cover runs")
    _common(v)
    v.add_argument("--P", type=int, default=None)
    v.add_argument("--M", type=int, default=None)
    v.add_argument("--k", type=int, default=None)
    v.add_argument("--from-model", type=str, default=None,
                   help="n,alpha,C -> derives P, M, k")
    v.add_argument("--skip-exact", action="store_true")
    v.add_argument("--random-trials", type=int, default=0)
    v.add_argument("--limit-C", type=float, default=None)
    v.add_argument("--flat-y", type=float, default=None)
    v.add_argument("--c-dl", type=float, default=0.1)
    v.set_defaults(func=cmd_cover)

    u = sub.add_parser("gfun", help="second-moment function certification")
    _common(u)
    u.add_argument("--y", type=str, required=True)
    u.add_argument("--resolution", type=float, default=1e-3)
    u.set_defaults(func=cmd_gfun)

    return ap


def dispatch(argv):
    ap = build_parser()
    args = ap.parse_args(argv)
    args = _apply_config(args)
    _apply_caps(args.caps)
    return args.func(args)


def main(argv=None):
    try:
        return dispatch(sys.argv[1:] if argv is None else argv)
    except CapExceededError as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return 3
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except BGTError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
