"""Command line surface: condition checking, single-path simulation with a
deterministic overlay, and ensemble runs with density plots.

Exit codes: 0 success/PASS, 1 condition FAIL, 2 configuration error,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (ConfigError, config_digest, load_ensemble_config,
                     load_sim_config)
from .core import (basic_reproduction_number, check_disease_free_conditions,
                   check_ergodic_conditions, equilibria)
from .engine import (NegativeStateError, NumericalError, simulate_path,
                     write_trajectory_csv)
from .ensemble import EnsembleError, run_ensemble
from .stats import (DegenerateSampleError, density_to_csv, gaussian_kde,
                    ks_distance)
from .svgplot import Series, line_plot, write_svg

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

_COLORS = {"S": "#1f77b4", "I": "#d62728", "R": "#2ca02c"}
_PROBE_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")


def _fmt(v, digits=6):
    return "n/a" if v is None else f"{v:.{digits}g}"


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def _write_manifest(out_dir: Path, config_path, seed, outputs) -> None:
    manifest = {
        "config_digest": config_digest(config_path),
        "seed": seed,
        "tool_version": __version__,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": sorted(str(p.name) for p in outputs),
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_check(args) -> int:
    sim = load_sim_config(args.config)
    p = sim.params
    r0 = basic_reproduction_number(p)
    eq = equilibria(p)
    df = check_disease_free_conditions(p)
    er = check_ergodic_conditions(p)

    print(f"R0 = {r0:.6g}")
    print(f"E0 = ({eq.e0[0]:.6g}, 0, 0)")
    if eq.e_star is not None:
        s, i, r = eq.e_star
        print(f"E* = ({s:.6g}, {i:.6g}, {r:.6g})   excess mu*S*-eta*R* = "
              f"{eq.excess:.6g}")
    else:
        print("E* = none (R0 <= 1)")
    print("disease-free conditions:")
    print(f"  R0 < 1:                         {_verdict(df.r0_lt_one)}")
    print(f"  mu > gamma+delta+3/2(eta+s^2):  {_verdict(df.mu_above_rates)}")
    print(f"  mu > rational expression:       {_verdict(df.mu_above_ratio)}")
    print(f"  gamma+delta-eta-sigma^2 > 0:    {_verdict(df.damping_positive)}")
    print(f"  K = {_fmt(df.k_const)}   c1 = {_fmt(df.c1)}   "
          f"bound = {_fmt(df.bound)}")
    print(f"  overall: {_verdict(df.conditions_hold)}")
    print("ergodic conditions:")
    print(f"  R0 > 1:            {_verdict(er.r0_gt_one)}")
    print(f"  mu*S*-eta*R* > 0:  {_verdict(er.excess_positive)}")
    print(f"  sigma^2 <= mu/2:   {_verdict(er.sigma_small)}")
    print(f"  m~ = {_fmt(er.m_tilde)}   K~ = {_fmt(er.k_tilde)}   "
          f"region radius^2 = {_fmt(er.region_radius_sq)}")
    print(f"  overall: {_verdict(er.conditions_hold)}")

    regime = args.regime
    if regime == "auto":
        regime = "disease-free" if r0 < 1.0 else "ergodic"
    ok = df.conditions_hold if regime == "disease-free" else er.conditions_hold
    print(f"requested regime: {regime} -> {_verdict(ok)}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_simulate(args) -> int:
    sim = load_sim_config(args.config, dt=args.dt, t_end=args.t_end,
                          clamp_policy=args.clamp_policy,
                          record_stride=args.stride)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    stochastic = simulate_path(sim, args.seed)
    det_sim = dataclasses.replace(
        sim, params=dataclasses.replace(sim.params, sigma=0.0))
    deterministic = simulate_path(det_sim, args.seed)

    path_csv = out_dir / "path.csv"
    det_csv = out_dir / "deterministic.csv"
    write_trajectory_csv(stochastic, path_csv)
    write_trajectory_csv(deterministic, det_csv)

    series = []
    for ci, name in enumerate("SIR"):
        series.append(Series(x=stochastic.times, y=stochastic.states[:, ci],
                             label=f"{name} (stochastic)",
                             color=_COLORS[name]))
        series.append(Series(x=deterministic.times,
                             y=deterministic.states[:, ci],
                             label=f"{name} (deterministic)",
                             color=_COLORS[name], dashed=True))
    svg_path = out_dir / "path.svg"
    write_svg(svg_path, line_plot(series, title="Sample path vs deterministic",
                                  xlabel="t", ylabel="population"))
    _write_manifest(out_dir, args.config, args.seed,
                    [path_csv, det_csv, svg_path])
    if stochastic.flagged:
        print(f"warning: clamping exceeded {stochastic.clamp_events} events; "
              "consider a smaller dt")
    print(f"wrote {path_csv}, {det_csv}, {svg_path}")
    return EXIT_OK


def cmd_ensemble(args) -> int:
    sim = load_sim_config(args.config, dt=args.dt, t_end=args.t_end,
                          clamp_policy=args.clamp_policy,
                          record_stride=args.stride)
    probes = None
    if args.probes:
        probes = tuple(float(x) for x in args.probes.split(","))
    cfg = load_ensemble_config(args.config, sim, n_paths=args.paths,
                               base_seed=args.seed, probe_times=probes,
                               n_jobs=args.jobs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    summary = run_ensemble(cfg)
    outputs = []

    probe_stats = {}
    ks_stats = {}
    degenerate = False
    for t, samples in summary.probe_samples.items():
        tag = f"{t:g}"
        csv_path = out_dir / f"probe_t{tag}.csv"
        np.savetxt(csv_path, samples, delimiter=",", header="S,I,R",
                   comments="", fmt="%.17g")
        outputs.append(csv_path)
        probe_stats[tag] = {
            "mean": [float(v) for v in samples.mean(axis=0)],
            "std": [float(v) for v in samples.std(axis=0)],
        }
    for ci, name in enumerate("SIR"):
        curves = []
        for pi, t in enumerate(summary.probe_times):
            samples = summary.probe_samples[t][:, ci]
            try:
                est = gaussian_kde(samples)
            except (DegenerateSampleError, ValueError):
                degenerate = True
                continue
            csv_path = out_dir / f"density_{name}_t{t:g}.csv"
            density_to_csv(est, csv_path)
            outputs.append(csv_path)
            curves.append(Series(x=est.grid, y=est.density, label=f"t={t:g}",
                                 color=_PROBE_COLORS[pi % len(_PROBE_COLORS)]))
        if curves:
            svg_path = out_dir / f"density_{name}.svg"
            write_svg(svg_path, line_plot(
                curves, title=f"{name} marginal density", xlabel=name,
                ylabel="density"))
            outputs.append(svg_path)
        for a_i in range(len(summary.probe_times)):
            for b_i in range(a_i + 1, len(summary.probe_times)):
                ta, tb = summary.probe_times[a_i], summary.probe_times[b_i]
                d = ks_distance(summary.probe_samples[ta][:, ci],
                                summary.probe_samples[tb][:, ci])
                ks_stats[f"{name}:t{ta:g}-t{tb:g}"] = d
    if degenerate:
        print("note: degenerate samples; density estimates skipped")

    exit_code = EXIT_OK
    bound_check = None
    r0 = basic_reproduction_number(sim.params)
    if r0 < 1.0 and summary.time_average_estimate is not None:
        df = check_disease_free_conditions(sim.params)
        if df.bound is not None:
            ok = summary.time_average_estimate <= df.bound
            bound_check = {
                "time_average_estimate": summary.time_average_estimate,
                "tail_average": summary.tail_average,
                "bound": df.bound,
                "pass": bool(ok),
            }
            print(f"disease-free time-average {summary.time_average_estimate:.6g} "
                  f"vs bound {df.bound:.6g}: {_verdict(ok)}")
            if not ok:
                exit_code = EXIT_FAIL

    doc = {
        "n_paths": summary.n_paths,
        "times": [float(t) for t in summary.times],
        "mean": [[float(v) for v in row] for row in summary.mean],
        "variance": [[float(v) for v in row] for row in summary.variance],
        "functional": summary.functional,
        "time_average_estimate": summary.time_average_estimate,
        "tail_average": summary.tail_average,
        "clamp_rate": summary.clamp_rate,
        "probe_stats": probe_stats,
        "ks_distances": ks_stats,
        "bound_check": bound_check,
        "failures": summary.failures,
    }
    summary_path = out_dir / "summary.json"
    with open(summary_path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append(summary_path)
    _write_manifest(out_dir, args.config, cfg.base_seed, outputs)
    print(f"wrote {len(outputs)} files to {out_dir}")
    return exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sirslab",
        description="Simulation laboratory for the stochastic delayed SIRS model")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="evaluate thresholds, equilibria "
                                           "and regime conditions")
    p_check.add_argument("config")
    p_check.add_argument("--regime", choices=("auto", "disease-free", "ergodic"),
                         default="auto")
    p_check.set_defaults(func=cmd_check)

    common = dict(seed=42)
    for name, fn, extra in (("simulate", cmd_simulate, False),
                            ("ensemble", cmd_ensemble, True)):
        p = sub.add_parser(name)
        p.add_argument("config")
        p.add_argument("--seed", type=int, default=common["seed"])
        p.add_argument("--dt", type=float, default=None)
        p.add_argument("--t-end", type=float, default=None)
        p.add_argument("--out", default="out")
        p.add_argument("--clamp-policy", choices=("clamp", "fail"),
                       default=None)
        p.add_argument("--stride", type=int, default=None)
        if extra:
            p.add_argument("--paths", type=int, default=None)
            p.add_argument("--probes", default=None,
                           help="comma-separated probe times")
            p.add_argument("--jobs", type=int, default=None)
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NegativeStateError, NumericalError, EnsembleError, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
