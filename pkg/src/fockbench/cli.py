"""Command-line entry point: ``fockbench <subcommand> ...``.

Exit codes: 0 success, 2 parse/input error or missing file, 3 propagator
convergence failure, 4 failed acceptance metric under ``--check``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import scenarios
from .bench import io as bio
from .bench.dsl import arg_kind, find_statement, load_bench, parse_values, substitute
from .bench.program import run_program
from .calibration import fit_camera, fit_k6, spectrometer_detuning
from .elements import MeasurementRecord
from .errors import ConvergenceError, FockBenchError, ParseError
from .hilbert import DEVICE, mhz, to_mhz

EXIT_INPUT = 2
EXIT_CONVERGENCE = 3
EXIT_CHECK = 4


def resolve_seed(seed: int) -> int:
    env = os.environ.get("FOCKBENCH_SEED")
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise ParseError(f"FOCKBENCH_SEED must be an integer, got {env!r}")
    return seed


def _print_json(doc):
    print(json.dumps(bio._clean(doc), indent=2, sort_keys=True))


def _params_echo(prog) -> dict:
    return {"dim": prog.dim, "params": {k: str(v) for k, v in prog.params.args},
            "state": {"kind": prog.initial.head.split()[1], **{k: str(v) for k, v in prog.initial.args}}}


def cmd_run(args) -> int:
    prog = load_bench(args.program)
    seed = resolve_seed(args.seed)
    final, records = run_program(prog, seed=seed, trials=args.trials)
    out = Path(args.out)
    stem = Path(args.program).stem
    unitary = final is not None
    if records:
        bio.emit_csv(records, out / f"{stem}.csv", args.floor)
    meta = {"program": str(args.program), "seed": seed, "echo": _params_echo(prog)}
    bio.emit_json(meta, records, out / f"{stem}.json", unitary=unitary)
    by_label = {r.label: r for r in records}
    for label, path in prog.outputs:
        bio.emit_csv([by_label[label]], out / path, args.floor)
    for r in records:
        print(f"{r.label}: t={r.time_cursor:.6g} us mean={r.mean:.6g} var={r.variance:.6g} norm={r.norm:.12g}")
    return 0


def _sweep_point(job):
    prog, seed, trials = job
    _, recs = run_program(prog, seed=seed, trials=trials)
    return recs


def cmd_sweep(args) -> int:
    prog = load_bench(args.program)
    seed = resolve_seed(args.seed)
    _, _, head, arg = find_statement(prog, args.param)
    values = parse_values(arg_kind(head, arg), args.values)
    if not values:
        raise ParseError("empty value list")
    jobs = [(substitute(prog, args.param, v), seed + i, args.trials) for i, v in enumerate(values)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    out = Path(args.out)
    stem = Path(args.program).stem
    combined = []
    for i, recs in enumerate(results):
        if recs:
            bio.emit_csv(recs, out / f"{stem}_p{i:03d}.csv", args.floor)
        for r in recs:
            combined.append(MeasurementRecord(f"p{i:03d}/{r.label}", r.time_cursor, r.kind, r.populations,
                                              r.mean, r.variance, r.norm, r.stderr))
    if combined:
        bio.emit_csv(combined, out / f"{stem}_sweep.csv", args.floor)
    meta = {"program": str(args.program), "seed": seed, "param": args.param,
            "values": [str(v) for v in values], "echo": _params_echo(prog)}
    bio.emit_json(meta, combined, out / f"{stem}_sweep.json")
    print(f"{len(values)} sweep points written to {out}")
    return 0


def cmd_figure(args) -> int:
    seed = resolve_seed(args.seed)
    res = scenarios.FIGURES[args.name]()
    out = Path(args.out)
    if res.records:
        bio.emit_csv(res.records, out / f"figure_{args.name}.csv", args.floor)
    doc = {"version": bio.package_version(), "seed": seed, **res.summary(), "notes": bio.SIMULATOR_NOTES}
    bio.write_atomic(out / f"figure_{args.name}.json", json.dumps(bio._clean(doc), indent=2, sort_keys=True) + "\n")
    for key, m in res.metrics.items():
        flag = "info" if m.passed is None else ("PASS" if m.passed else "FAIL")
        print(f"[{flag}] {key} = {m.value:.6g}  {m.target}")
    if args.check and not res.passed:
        return EXIT_CHECK
    return 0


def cmd_calibrate_k6(args) -> int:
    if args.synthetic:
        n0 = list(range(140, 161, 5))
        pairs = [(n, float(spectrometer_detuning(n, DEVICE.k4, DEVICE.k6))) for n in n0]
        source = "synthetic"
    else:
        pairs = [(n, d) for d, n, _ in scenarios.newton_sweep()]
        source = "simulated Newton-prism sweep"
    fit = fit_k6(pairs, DEVICE.k4)
    doc = {
        "source": source,
        "pairs": [{"n0": n, "delta_mhz": to_mhz(d)} for n, d in pairs],
        "slope_khz": 1e3 * to_mhz(fit.slope),
        "slope_half_width_khz": 1e3 * to_mhz(fit.slope_half_width),
        "k4_khz": 1e3 * to_mhz(fit.k4_input),
        "k6_hz": 1e6 * to_mhz(fit.k6),
        "k6_half_width_hz": 1e6 * to_mhz(fit.k6_half_width),
    }
    _print_json(doc)
    return 0


def cmd_camera_fit(args) -> int:
    pts = bio.read_points_csv(args.csv)
    fit = fit_camera([(n, mhz(f)) for n, f in pts])
    _print_json({
        "points": len(pts),
        "chi_mhz": to_mhz(fit.chi),
        "chi_half_width_mhz": to_mhz(fit.chi_half_width),
        "ke_khz": 1e3 * to_mhz(fit.ke),
        "ke_half_width_khz": 1e3 * to_mhz(fit.ke_half_width),
        "residual_rms_khz": 1e3 * to_mhz(fit.residual_rms),
    })
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fockbench", description="Fock-space optics bench simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default="."):
        sp.add_argument("--out", default=out_default, help="output directory")
        sp.add_argument("--seed", type=int, default=0, help="base seed (FOCKBENCH_SEED overrides)")
        sp.add_argument("--floor", type=float, default=bio.POPULATION_FLOOR, help="smallest population written")

    r = sub.add_parser("run", help="execute a bench program")
    r.add_argument("program")
    r.add_argument("--trials", type=int, default=None, help="trajectories for lossy programs")
    common(r)
    r.set_defaults(func=cmd_run)

    f = sub.add_parser("figure", help="reproduce a built-in experiment")
    f.add_argument("name", choices=sorted(scenarios.FIGURES))
    f.add_argument("--check", action="store_true", help="exit 4 when a metric misses its target")
    common(f, "figures")
    f.set_defaults(func=cmd_figure)

    k = sub.add_parser("calibrate-k6", help="spectrometer fit of the sixth-order Kerr term")
    k.add_argument("--synthetic", action="store_true", help="fit generator data instead of simulating")
    k.set_defaults(func=cmd_calibrate_k6)

    c = sub.add_parser("camera-fit", help="fit chi and Ke to (n, shift MHz) rows of a CSV file")
    c.add_argument("csv")
    c.set_defaults(func=cmd_camera_fit)

    s = sub.add_parser("sweep", help="run a program over a list of values of one argument")
    s.add_argument("program")
    s.add_argument("--param", required=True, help="e.g. pump.t, pump[1].delta, state.alpha")
    s.add_argument("--values", required=True, help="comma list or start:stop:step, e.g. 0:400ns:20")
    s.add_argument("--trials", type=int, default=None)
    s.add_argument("--jobs", type=int, default=1)
    common(s)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except FockBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
