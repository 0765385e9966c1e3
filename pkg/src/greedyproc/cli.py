"""Command-line front end: configuration, seeding, orchestration, file I/O.

All randomness flows from the run seed through numpy's PCG64; transcripts
are emitted with canonical JSON so identical (config, seed) runs produce
byte-identical files.  ``--repeat R`` runs seeds seed..seed+R-1; ``--jobs``
farms independent runs over processes with per-run private output files and
a deterministic summary merge.
"""
import argparse
import concurrent.futures
import functools
import json
import math
import os
import sys

import numpy as np

from . import __version__, apfree, bipartite, dem, trifree, vdw, zring

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2


class ConfigError(ValueError):
    pass


# Per-subcommand configurable keys and their built-in defaults; config-file
# keys and flag names coincide (flags use dashes).
DEFAULTS = {
    "apfree-run": {
        "N": 1009, "r": 3, "xi": apfree.DESK_XI, "delta": apfree.DESK_DELTA,
        "seed": 0, "repeat": 1, "jobs": 1, "checkpoint_every": 1,
        "tracked_k": 32, "sampled_v": 64, "monitor": 1, "hit_samples": 0,
        "out": ".", "format": "csv",
    },
    "apfree-verify": {
        "N": 1009, "r": 3, "k": 0, "hit_samples": 0, "seed": 0,
    },
    "vdw-witness": {
        "r": 3, "k": 2126, "C": apfree.DESK_CK, "xi": apfree.DESK_XI,
        "delta": apfree.DESK_DELTA, "seed": 0, "repeat": 1, "jobs": 1,
        "out": ".",
    },
    "vdw-exact": {"r": 3, "k": 3, "n_max": 40, "out": "."},
    "vdw-check": {"r": 3, "k": 3},
    "trifree-run": {
        "n": 1024, "beta": 0.05, "seed": 0, "repeat": 1, "jobs": 1,
        "tstar_samples": 0, "tplus_samples": 0, "out": ".", "format": "csv",
    },
    "trifree-analyze": {
        "n": 1024, "beta": 0.05, "seed": 0, "tstar_samples": 1000,
        "tplus_samples": 1000,
    },
    "gnd-witness": {
        "n": 2000, "d": 45, "mode": "measured", "case": "", "seed": 0,
        "gen_beta": 0.05, "out": ".",
    },
    "dem-summary": {"format": "csv"},
}

_TYPES = {"xi": float, "delta": float, "C": float, "beta": float,
          "gen_beta": float, "out": str, "format": str, "mode": str,
          "case": str}


def _coerce(key, raw):
    typ = _TYPES.get(key, int)
    try:
        return typ(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def load_config(path, allowed):
    """Flat key=value file; '#' comments; unknown keys are an error."""
    cfg = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, raw = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in allowed:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            cfg[key] = _coerce(key, raw)
    return cfg


def effective_config(sub, args):
    base = dict(DEFAULTS[sub])
    if getattr(args, "config", None):
        base.update(load_config(args.config, set(base)))
    for key in DEFAULTS[sub]:
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    return base


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      default=_json_default)


def _header(kind, cfg, seed):
    return _json({"artifact": f"greedyproc {__version__}", "kind": kind,
                  "config": cfg, "seed": seed})


def _write_lines(path, lines):
    with open(path, "w") as fh:
        for line in lines:
            fh.write(line + "\n")


def _seeds(cfg):
    return list(range(cfg["seed"], cfg["seed"] + cfg["repeat"]))


def _farm(fn, seeds, jobs):
    if jobs <= 1 or len(seeds) <= 1:
        return [fn(s) for s in seeds]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, seeds))


# -- apfree ----------------------------------------------------------------

def _apfree_one(cfg, seed):
    ctx = zring.make_context(cfg["N"], cfg["r"])
    params = apfree.APParams.from_context(ctx, xi=cfg["xi"],
                                          delta=cfg["delta"])
    monitors = None
    if cfg["monitor"]:
        monitors = dem.MonitorConfig(checkpoint_every=cfg["checkpoint_every"],
                                     tracked_k_count=cfg["tracked_k"],
                                     sampled_v_count=cfg["sampled_v"],
                                     delta=cfg["delta"], xi=cfg["xi"])
    state = apfree.new_process(ctx, params, seed)
    res = apfree.run(state, monitors=monitors)
    hit_fraction = ""
    if cfg["hit_samples"] > 0:
        fam = apfree.sample_ap_family(ctx, params.k_eff(ctx),
                                      cfg["hit_samples"], state.monitor_rng)
        rep = apfree.hitting_report(ctx, res.I, fam, k=params.k_eff(ctx))
        hit_fraction = f"{rep['hit_fraction']:.6f}"
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    head = _header("apfree-run", cfg, seed)
    _write_lines(os.path.join(out, f"apfree_I_seed{seed}.txt"),
                 [f"# {head}"] + [str(x) for x in res.I])
    _write_lines(os.path.join(out, f"apfree_run_seed{seed}.jsonl"),
                 [head] + [_json(rec.to_dict()) for rec in res.trajectory])
    kviol = sum(rec.k_band_violations for rec in res.trajectory)
    sviol = sum(1 for rec in res.trajectory
                if not (rec.s_avail_ok and rec.s_nv_ok))
    return {"seed": seed, "terminated_early": res.terminated_early,
            "k_band_violations": kviol, "s_band_violations": sviol,
            "final_I": len(res.I), "final_avail": res.final_avail_count,
            "hit_fraction": hit_fraction}


def cmd_apfree_run(args):
    cfg = effective_config("apfree-run", args)
    rows = _farm(functools.partial(_apfree_one, cfg), _seeds(cfg),
                 cfg["jobs"])
    _emit_summary(cfg, rows,
                  ["seed", "terminated_early", "k_band_violations",
                   "s_band_violations", "final_I", "final_avail",
                   "hit_fraction"],
                  os.path.join(cfg["out"], "apfree_summary"))
    return EXIT_OK


def cmd_apfree_verify(args):
    cfg = effective_config("apfree-verify", args)
    I = _read_i_file(args.input)
    ctx = zring.make_context(cfg["N"], cfg["r"])
    free = apfree.is_ap_free(ctx, I)
    verdict = {"apFree": free, "size": len(I)}
    if cfg["hit_samples"] > 0:
        k = cfg["k"] or apfree.APParams.from_context(ctx).k_eff(ctx)
        k = min(k, ctx.N)
        rng = np.random.default_rng(cfg["seed"])
        fam = apfree.sample_ap_family(ctx, k, cfg["hit_samples"], rng)
        rep = apfree.hitting_report(ctx, I, fam, k=k)
        verdict["hitFraction"] = rep["hit_fraction"]
    print(_json(verdict))
    ok = free and verdict.get("hitFraction", 1.0) >= 1.0
    return EXIT_OK if ok else EXIT_VERIFY_FAIL


def _read_i_file(path):
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                out.append(int(line))
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: not an integer") from exc
    return out


# -- vdw -------------------------------------------------------------------

def _vdw_witness_one(cfg, seed):
    res = vdw.lower_bound_witness(cfg["r"], cfg["k"], seed, C=cfg["C"],
                                  xi=cfg["xi"], delta=cfg["delta"])
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    vdw.write_coloring(os.path.join(out, f"vdw_coloring_seed{seed}.txt"),
                       res.coloring)
    payload = {"header": json.loads(_header("vdw-witness", cfg, seed)),
               "n": res.n, "N": res.N, "k": res.k, "success": res.success,
               "verdict": res.verdict.to_dict(), "metadata": res.metadata}
    _write_lines(os.path.join(out, f"vdw_verdict_seed{seed}.json"),
                 [_json(payload)])
    return {"seed": seed, "success": res.success, "n": res.n,
            "longest_blue": res.verdict.longest_blue_ap}


def cmd_vdw_witness(args):
    cfg = effective_config("vdw-witness", args)
    rows = _farm(functools.partial(_vdw_witness_one, cfg), _seeds(cfg),
                 cfg["jobs"])
    for row in rows:
        print(_json(row))
    return EXIT_OK if all(r["success"] for r in rows) else EXIT_VERIFY_FAIL


def cmd_vdw_exact(args):
    cfg = effective_config("vdw-exact", args)
    res = vdw.exact_vdw(cfg["r"], cfg["k"], n_max=cfg["n_max"])
    if res["exceeds_bound"]:
        print(_json({"value": None, "exceedsBound": True,
                     "nMax": cfg["n_max"]}))
        return EXIT_VERIFY_FAIL
    os.makedirs(cfg["out"], exist_ok=True)
    cert_path = os.path.join(cfg["out"],
                             f"vdw_cert_r{cfg['r']}_k{cfg['k']}.txt")
    vdw.write_coloring(cert_path, res["certificate"])
    print(res["value"])
    return EXIT_OK


def cmd_vdw_check(args):
    cfg = effective_config("vdw-check", args)
    coloring = vdw.read_coloring(args.input)
    verdict = vdw.check_coloring(coloring, cfg["r"], cfg["k"])
    print(_json(verdict.to_dict()))
    return EXIT_OK if verdict.clean else EXIT_VERIFY_FAIL


# -- trifree ---------------------------------------------------------------

def _trifree_one(cfg, seed):
    params = trifree.TriFreeParams.from_n(cfg["n"], beta=cfg["beta"])
    rep = trifree.run(params, seed, tstar_samples=cfg["tstar_samples"],
                      tplus_samples=cfg["tplus_samples"])
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    us, vs = rep.edges
    _write_lines(os.path.join(out, f"trifree_graph_seed{seed}.edges"),
                 [f"{int(u)} {int(v)}" for u, v in zip(us, vs)])
    header = {"header": json.loads(_header("trifree-run", cfg, seed)),
              "n": params.n, "beta": params.beta, "steps": params.steps,
              "edges": rep.metadata["edgeCount"],
              "maxDegree": rep.metadata["maxDegree"],
              "triangleFree": rep.triangle_free,
              "nLeAllOk": rep.n_le_all_ok,
              "reconstructedRecursion": True,
              "eventReport": rep.event_report.to_dict()
              if rep.event_report else None}
    _write_lines(os.path.join(out, f"trifree_graph_seed{seed}.json"),
                 [_json(header)])
    _write_lines(os.path.join(out, f"trifree_run_seed{seed}.jsonl"),
                 [_header("trifree-run", cfg, seed)]
                 + [_json(rec) for rec in rep.trajectory])
    return {"seed": seed, "edges": rep.metadata["edgeCount"],
            "max_degree": rep.metadata["maxDegree"],
            "triangle_free": rep.triangle_free,
            "n_le_all_ok": rep.n_le_all_ok}


def cmd_trifree_run(args):
    cfg = effective_config("trifree-run", args)
    rows = _farm(functools.partial(_trifree_one, cfg), _seeds(cfg),
                 cfg["jobs"])
    _emit_summary(cfg, rows,
                  ["seed", "edges", "max_degree", "triangle_free",
                   "n_le_all_ok"],
                  os.path.join(cfg["out"], "trifree_summary"))
    return EXIT_OK if all(r["triangle_free"] for r in rows) \
        else EXIT_VERIFY_FAIL


def cmd_trifree_analyze(args):
    cfg = effective_config("trifree-analyze", args)
    params = trifree.TriFreeParams.from_n(cfg["n"], beta=cfg["beta"])
    us, vs = _read_edges(args.input)
    view = trifree.graph_view(params, us, vs, cfg["seed"])
    if not view.t_is_triangle_free():
        print(_json({"triangleFree": False}))
        return EXIT_VERIFY_FAIL
    rep = trifree.event_checks(view, tstar_samples=cfg["tstar_samples"],
                               tplus_samples=cfg["tplus_samples"])
    out = {"triangleFree": True, "eventReport": rep.to_dict()}
    print(_json(out))
    ok = rep.tplus_violations == 0 and rep.consistency_ok
    return EXIT_OK if ok else EXIT_VERIFY_FAIL


def _read_edges(path):
    us, vs = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ConfigError(f"{path}:{lineno}: expected 'u v'")
            try:
                us.append(int(parts[0]))
                vs.append(int(parts[1]))
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: not integers") from exc
    return np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64)


# -- gnd -------------------------------------------------------------------

def cmd_gnd_witness(args):
    cfg = effective_config("gnd-witness", args)

    def genH(n_prime):
        return trifree_graph_source(n_prime, cfg["gen_beta"], cfg["seed"])

    wit = bipartite.build_gnd_witness(cfg["n"], cfg["d"], genH,
                                      mode=cfg["mode"],
                                      case=cfg["case"] or None)
    os.makedirs(cfg["out"], exist_ok=True)
    payload = {"header": json.loads(_header("gnd-witness", cfg, cfg["seed"])),
               **wit.to_dict()}
    _write_lines(os.path.join(cfg["out"],
                              f"gnd_witness_n{cfg['n']}_d{cfg['d']}.json"),
                 [_json(payload)])
    if wit.graph is not None and wit.ok:
        _write_lines(
            os.path.join(cfg["out"], f"gnd_graph_n{cfg['n']}_d{cfg['d']}.edges"),
            [f"{u} {v}" for u, v in wit.graph.edges()])
    print(_json({"ok": wit.ok, "case": wit.case,
                 "failingLink": wit.failing_link}))
    return EXIT_OK if wit.ok or wit.failing_link else EXIT_VERIFY_FAIL


def trifree_graph_source(n_prime, beta, seed):
    """Triangle-free generator for witness assembly: a semi-random process
    run pruned of its low-degree stragglers."""
    n_run = max(16, n_prime)
    params = trifree.TriFreeParams.from_n(n_run, beta=beta)
    rep = trifree.run(params, seed)
    us, vs = rep.edges
    G = bipartite.Graph.from_edges(n_run, zip(us.tolist(), vs.tolist()))
    typical = math.sqrt(beta * n_run * math.log(n_run))
    return bipartite.prune_min_degree(G, math.floor(typical / 2))


# -- dem -------------------------------------------------------------------

def cmd_dem_summary(args):
    cfg = effective_config("dem-summary", args)
    rows = []
    for path in args.inputs:
        rows.append(_summarize_transcript(path))
    fields = ["seed", "terminated_early", "k_band_violations",
              "s_band_violations", "final_I", "hit_fraction"]
    if cfg["format"] == "json":
        print(_json(rows))
    else:
        print(",".join(fields))
        for row in rows:
            print(",".join(str(row.get(f, "")) for f in fields))
    return EXIT_OK


def _summarize_transcript(path):
    """Replay band flags from a JSONL transcript alone."""
    seed = None
    kviol = sviol = 0
    final_i = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}:{lineno}: bad JSON") from exc
            if lineno == 1 and "artifact" in obj:
                seed = obj.get("seed")
                continue
            flags = obj["bandFlags"]
            kviol += flags["kBandViolations"]
            sviol += 0 if flags["sBandOk"] else 1
            final_i = max(final_i, obj["i"])
    return {"seed": seed, "terminated_early": "", "k_band_violations": kviol,
            "s_band_violations": sviol, "final_I": final_i,
            "hit_fraction": ""}


# -- summaries -------------------------------------------------------------

def _emit_summary(cfg, rows, fields, base):
    os.makedirs(cfg["out"], exist_ok=True)
    head = _header("summary", cfg, cfg["seed"])
    if cfg.get("format") == "json":
        _write_lines(base + ".json", [head] + [_json(r) for r in rows])
    else:
        lines = [f"# {head}", ",".join(fields)]
        lines += [",".join(str(r[f]) for f in fields) for r in rows]
        _write_lines(base + ".csv", lines)
    for row in rows:
        print(_json(row))


# -- argument plumbing -----------------------------------------------------

def _add_cfg_flags(parser, sub):
    parser.add_argument("--config", help="key=value config file")
    for key in DEFAULTS[sub]:
        typ = _TYPES.get(key, int)
        parser.add_argument("--" + key.replace("_", "-"), dest=key,
                            type=typ, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="greedyproc",
        description="Random greedy AP-free / semi-random triangle-free "
                    "process simulators and witness builders.")
    parser.add_argument("--version", action="version",
                        version=f"greedyproc {__version__}")
    top = parser.add_subparsers(dest="command", required=True)

    ap = top.add_parser("apfree").add_subparsers(dest="sub", required=True)
    p = ap.add_parser("run")
    _add_cfg_flags(p, "apfree-run")
    p.set_defaults(fn=cmd_apfree_run)
    p = ap.add_parser("verify")
    p.add_argument("input", help="stored I-file")
    _add_cfg_flags(p, "apfree-verify")
    p.set_defaults(fn=cmd_apfree_verify)

    vd = top.add_parser("vdw").add_subparsers(dest="sub", required=True)
    p = vd.add_parser("witness")
    _add_cfg_flags(p, "vdw-witness")
    p.set_defaults(fn=cmd_vdw_witness)
    p = vd.add_parser("exact")
    _add_cfg_flags(p, "vdw-exact")
    p.set_defaults(fn=cmd_vdw_exact)
    p = vd.add_parser("check")
    p.add_argument("input", help="coloring file")
    _add_cfg_flags(p, "vdw-check")
    p.set_defaults(fn=cmd_vdw_check)

    tf = top.add_parser("trifree").add_subparsers(dest="sub", required=True)
    p = tf.add_parser("run")
    _add_cfg_flags(p, "trifree-run")
    p.set_defaults(fn=cmd_trifree_run)
    p = tf.add_parser("analyze")
    p.add_argument("input", help="stored edge-list file")
    _add_cfg_flags(p, "trifree-analyze")
    p.set_defaults(fn=cmd_trifree_analyze)

    gnd = top.add_parser("gnd").add_subparsers(dest="sub", required=True)
    p = gnd.add_parser("witness")
    _add_cfg_flags(p, "gnd-witness")
    p.set_defaults(fn=cmd_gnd_witness)

    dm = top.add_parser("dem").add_subparsers(dest="sub", required=True)
    p = dm.add_parser("summary")
    p.add_argument("inputs", nargs="+", help="JSONL transcripts")
    _add_cfg_flags(p, "dem-summary")
    p.set_defaults(fn=cmd_dem_summary)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (zring.RingError, vdw.VdwError, trifree.TriFreeError,
            bipartite.GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
