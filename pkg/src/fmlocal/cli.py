"""Command-line interface.

Primary outputs (CSV/JSON) carry no wall-clock data so that reruns are
byte-identical; stage timings go to a ``<prefix>.timings.json`` file.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
import traceback
from dataclasses import replace

import numpy as np

from . import __version__
from .core import PatternError, read_pattern, write_pattern
from .envelope import EnvelopeError
from .experiment import ExperimentSpec, run_experiment, table1_spec
from .ingest import ingest_catalog
from .intensity import (IntensityError, cvl_objective, cvl_select_bandwidth,
                        default_bandwidth_grid, kernel_intensity)
from .rltest import (ConfigError, LocalTestConfig, estimate_intensity,
                     global_random_labelling_test, local_random_labelling_test)
from .simulate import (ScenarioSpec, SimulationError, sim_scenario, table1_scenario,
                       waveform_scenario)
from .summaries import EstimatorError, LocalKEngine, default_r_grid
from .testfun import GridMismatch

VALIDATION_ERRORS = (PatternError, ConfigError, EnvelopeError, IntensityError,
                     SimulationError, EstimatorError, GridMismatch, ValueError,
                     FileNotFoundError)


class UsageError(ValueError):
    pass


def _bandwidth(value: str):
    if value in ("cvl", "constant"):
        return value
    try:
        h = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("bandwidth must be 'cvl', 'constant' or a number")
    if not h > 0:
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return h


def _common(p: argparse.ArgumentParser, test: bool = True) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--json-errors", action="store_true",
                   help="print machine-readable error JSON on stderr")
    if not test:
        return
    p.add_argument("--rmax", type=float, default=None, help="largest r (default: min side / 4)")
    p.add_argument("--nr", type=int, default=50, help="number of r grid values")
    p.add_argument("--q", type=int, default=39, help="number of resamples")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--testfun", default="lp", help="lp | variogram | dlp | one")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--bandwidth", type=_bandwidth, default="cvl",
                   help="cvl, constant or a positive number")
    p.add_argument("--edge", default="iso", choices=["iso", "trans", "none"])
    p.add_argument("--n", type=int, default=2, choices=[2, 3])
    p.add_argument("--resampling", default="with_replacement",
                   choices=["with_replacement", "without_replacement"])
    p.add_argument("--alternative", default="two.sided",
                   choices=["two.sided", "greater", "less"])
    p.add_argument("--holm", action="store_true", help="Holm-Bonferroni adjustment")


def _config(args) -> LocalTestConfig:
    return LocalTestConfig(Q=args.q, alpha=args.alpha, resampling=args.resampling,
                           testfun=args.testfun, p=args.p, bandwidth=args.bandwidth,
                           edge=args.edge, n=args.n, r_max=args.rmax, n_r=args.nr,
                           holm_bonferroni=args.holm, seed=args.seed,
                           alternative=args.alternative, threads=args.threads)


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _write_timings(prefix, timings: dict) -> None:
    _write_json(f"{prefix}.timings.json", {"version": __version__, "timings": timings})


def _writer(path):
    fh = open(path, "w", newline="", encoding="utf-8")
    return fh, csv.writer(fh, lineterminator="\n")


def _f(x) -> str:
    return repr(float(x))


# subcommands

def cmd_simulate(args) -> dict:
    t0 = time.perf_counter()
    if args.preset and args.preset.startswith("waveform"):
        feature = None if args.preset.endswith(":none") else 50
        pattern, labels = waveform_scenario(args.seed, n_feature=feature)
    else:
        if args.spec:
            spec = ScenarioSpec.from_json(args.spec)
        elif args.preset:
            ground, _, model = args.preset.partition(":")
            spec = table1_scenario(ground, int(model) if model not in ("", "none") else None)
        else:
            raise UsageError("simulate needs --spec or --preset")
        if args.seed_given:
            spec = replace(spec, seed=args.seed)
        pattern, labels = sim_scenario(spec)
    write_pattern(pattern, f"{args.out}.csv")
    fh, w = _writer(f"{args.out}_labels.csv")
    with fh:
        w.writerow(["index", "origin"])
        for i, lab in enumerate(labels):
            w.writerow([i, "feature" if lab else "base"])
    return {"simulate": time.perf_counter() - t0}


def cmd_intensity(args) -> dict:
    pattern = read_pattern(args.pattern)
    t0 = time.perf_counter()
    grid = default_bandwidth_grid(pattern.window)
    obj = cvl_objective(pattern, grid)
    if args.bandwidth in ("cvl", "constant"):
        h = cvl_select_bandwidth(pattern, grid)
    else:
        h = float(args.bandwidth)
    fh, w = _writer(f"{args.out}_cvl.csv")
    with fh:
        w.writerow(["h", "cvl"])
        for hh, v in zip(grid, obj):
            w.writerow([_f(hh), _f(v)])
    est = kernel_intensity(pattern, h)
    W = pattern.window
    gx = np.linspace(W.x_min, W.x_max, args.grid)
    gy = np.linspace(W.y_min, W.y_max, args.grid)
    X, Y = np.meshgrid(gx, gy)
    vals = est(np.column_stack([X.ravel(), Y.ravel()]))
    fh, w = _writer(f"{args.out}_grid.csv")
    with fh:
        w.writerow(["x", "y", "intensity"])
        for x, y, v in zip(X.ravel(), Y.ravel(), vals):
            w.writerow([_f(x), _f(y), _f(v)])
    at = est.at_data()
    _write_json(f"{args.out}.json", {
        "version": __version__, "bandwidth": h,
        "selected_by": "cvl" if args.bandwidth in ("cvl", "constant") else "user",
        "edge_correction": est.edge_correction,
        "sum_inverse_intensity": float(np.sum(1.0 / at)), "area": W.area()})
    return {"intensity": time.perf_counter() - t0}


def cmd_localk(args) -> dict:
    pattern = read_pattern(args.pattern)
    cfg = _config(args)
    t0 = time.perf_counter()
    intensity, h = estimate_intensity(pattern, cfg)
    t1 = time.perf_counter()
    eng = LocalKEngine(pattern, cfg.test_function, intensity,
                       default_r_grid(pattern.window, cfg.n_r, cfg.r_max), cfg.edge, cfg.n)
    local = eng.curves()
    glob = eng.global_from_locals(local)
    fh, w = _writer(f"{args.out}.csv")
    with fh:
        w.writerow(["r", "value", "point_index"])
        for i in range(local.shape[0]):
            for r, v in zip(eng.r, local[i]):
                w.writerow([_f(r), _f(v), i])
    fh, w = _writer(f"{args.out}_global.csv")
    with fh:
        w.writerow(["r", "value"])
        for r, v in zip(eng.r, glob):
            w.writerow([_f(r), _f(v)])
    _write_json(f"{args.out}.json", {"version": __version__, "config": cfg.echo(),
                                     "bandwidth": h, "n_points": len(pattern),
                                     "cap_binds": bool(eng.cap_binds)})
    return {"intensity": t1 - t0, "curves": time.perf_counter() - t1}


def cmd_globaltest(args) -> dict:
    pattern = read_pattern(args.pattern)
    cfg = _config(args)
    res = global_random_labelling_test(pattern, cfg)
    _write_json(f"{args.out}.json", {"version": __version__, "config": cfg.echo(),
                                     "bandwidth": res.bandwidth, **res.to_dict()})
    fh, w = _writer(f"{args.out}.csv")
    with fh:
        w.writerow(["r", "observed", "lower", "upper"])
        for row in zip(res.r, res.observed, res.lower, res.upper):
            w.writerow([_f(v) for v in row])
    return res.timings


def cmd_localtest(args) -> dict:
    pattern = read_pattern(args.pattern)
    cfg = _config(args)
    rep = local_random_labelling_test(pattern, cfg, keep_curves=args.envelopes)
    rep.write_json(f"{args.out}.json")
    rep.write_csv(f"{args.out}.csv")
    if args.envelopes:
        rep.write_envelopes_csv(f"{args.out}_envelopes.csv")
    return rep.timings


def cmd_experiment(args) -> dict:
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            spec = ExperimentSpec.from_dict(json.load(fh))
        if args.replicates:
            spec = replace(spec, replicates=args.replicates)
    elif args.preset:
        ground, _, model = args.preset.partition(":")
        spec = table1_spec(ground, int(model) if model not in ("", "none") else None,
                           args.replicates or 20, args.seed, _config(args))
    else:
        raise UsageError("experiment needs --spec or --preset")
    if args.seed_given:
        spec = replace(spec, scenario=replace(spec.scenario, seed=args.seed),
                       test=replace(spec.test, seed=args.seed))
    out_dir = args.workdir or spec.output_dir or f"{args.out}_replicates"
    spec = replace(spec, output_dir=out_dir)
    t0 = time.perf_counter()
    report = run_experiment(spec, threads=args.threads)
    report.spec.pop("output_dir", None)
    report.write_json(f"{args.out}.json")
    report.write_csv(f"{args.out}.csv")
    return {"experiment": time.perf_counter() - t0}


def cmd_ingest(args) -> dict:
    t0 = time.perf_counter()
    pattern = ingest_catalog(args.events, args.waveforms, args.sidecar, args.resample)
    write_pattern(pattern, f"{args.out}.csv")
    ids = pattern.metadata.get("id", [str(i) for i in range(len(pattern))])
    fh, w = _writer(f"{args.out}_ids.csv")
    with fh:
        w.writerow(["index", "id"])
        for i, e in enumerate(ids):
            w.writerow([i, e])
    return {"ingest": time.perf_counter() - t0}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fmlocal", description=(
        "Local K-functions and random-labelling tests for functional marked point patterns"))
    ap.add_argument("--version", action="version", version=f"fmlocal {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a scenario to pattern files")
    p.add_argument("--spec", help="ScenarioSpec JSON")
    p.add_argument("--preset", help=("table-1 cell (homogeneous:3, thomas:none, ...) or "
                                     "waveform / waveform:none"))
    p.add_argument("--out", required=True, help="output prefix")
    _common(p, test=False)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("intensity", help="CvL bandwidth and kernel intensity grid")
    p.add_argument("pattern")
    p.add_argument("--out", required=True)
    p.add_argument("--bandwidth", type=_bandwidth, default="cvl")
    p.add_argument("--grid", type=int, default=64, help="grid points per axis")
    _common(p, test=False)
    p.set_defaults(func=cmd_intensity)

    p = sub.add_parser("localk", help="local curves of every point")
    p.add_argument("pattern")
    p.add_argument("--out", required=True)
    _common(p)
    p.set_defaults(func=cmd_localk)

    p = sub.add_parser("globaltest", help="global envelope test of random labelling")
    p.add_argument("pattern")
    p.add_argument("--out", required=True)
    _common(p)
    p.set_defaults(func=cmd_globaltest)

    p = sub.add_parser("localtest", help="per-point test of random labelling")
    p.add_argument("pattern")
    p.add_argument("--out", required=True)
    p.add_argument("--envelopes", action="store_true", help="also write per-point envelopes")
    _common(p)
    p.set_defaults(func=cmd_localtest)

    p = sub.add_parser("experiment", help="replicated simulation study")
    p.add_argument("--spec", help="ExperimentSpec JSON")
    p.add_argument("--preset", help="table-1 cell, e.g. homogeneous:3")
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--workdir", help="per-replicate result directory (resumable)")
    p.add_argument("--out", required=True)
    _common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("ingest", help="catalog + waveforms to pattern files")
    p.add_argument("--events", required=True)
    p.add_argument("--waveforms", required=True)
    p.add_argument("--sidecar", required=True)
    p.add_argument("--resample", type=int, default=None, help="samples of the common grid")
    p.add_argument("--out", required=True)
    _common(p, test=False)
    p.set_defaults(func=cmd_ingest)
    return ap


def _report_error(args, code: int, exc: BaseException) -> int:
    kind = "validation" if code == 2 else "internal"
    if getattr(args, "json_errors", False):
        payload = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, PatternError):
            payload["violations"] = [[k, [int(i) if isinstance(i, (int, np.integer)) else i
                                          for i in idx]] for k, idx in exc.violations]
        print(json.dumps(payload), file=sys.stderr)
    else:
        print(f"fmlocal: {kind} error: {exc}", file=sys.stderr)
        if code == 1:
            traceback.print_exc()
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.seed_given = any(a == "--seed" or a.startswith("--seed=") for a in argv)
    try:
        timings = args.func(args)
        if timings is not None and getattr(args, "out", None):
            _write_timings(args.out, timings)
    except VALIDATION_ERRORS as exc:
        return _report_error(args, 2, exc)
    except Exception as exc:  # noqa: BLE001
        return _report_error(args, 1, exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
