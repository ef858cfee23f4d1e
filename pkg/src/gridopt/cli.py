"""Command-line front end.

Subcommands: ``calibrate``, ``lambda``, ``nufft``, ``bench``, ``bench2d``
and ``signals``.  All outputs are CSV/JSON files; report commands also render
matplotlib figures next to the delimited output unless ``--no-figures`` is
given.  Exit codes: 0 success, 2 input or configuration error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (
    default_placement,
    default_target,
    generate_signals,
    initial_kernel,
    run_bench,
    run_bench2d,
)
from .calibrate import CalibrationConfig, TargetShape, optimize_kernel, target_shape
from .error_shape import lambda_and_h
from .nufft import build_lookup, nudft_direct, nufft_forward
from .spectral import NumericalConsistencyError, frequency_grid
from . import figures, storage

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _resolve_threads(value) -> int:
    if value is not None:
        return max(1, int(value))
    env = os.environ.get("GRIDOPT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ValueError(f"GRIDOPT_THREADS is not an integer: {env!r}") from exc
    return os.cpu_count() or 1


def _parse_target(spec: str, M: int) -> TargetShape:
    """Parse a target profile argument.

    Forms: ``test1`` / ``test2`` / ``test3``, ``half_step:LOW,HIGH``,
    ``notch:CENTER,WIDTH,FLOOR,CEILING``,
    ``multi_notch:WIDTH,FLOOR,CEILING,C1[,C2...]`` and ``custom:PATH`` where
    PATH is an ``x,eta`` CSV (linearly resampled onto the frequency grid if
    its grid differs).
    """
    if spec in ("test1", "test2", "test3"):
        return default_target(int(spec[-1]), M)
    if ":" not in spec:
        raise ValueError(f"malformed target spec {spec!r}")
    kind, _, arg = spec.partition(":")
    if kind == "custom":
        x, eta = storage.read_target_csv(arg)
        if eta.size == M:
            values = eta
        else:
            order = np.argsort(x)
            values = np.interp(frequency_grid(M), x[order], eta[order])
        return target_shape("custom", values, M)
    try:
        params = [float(tok) for tok in arg.split(",") if tok != ""]
    except ValueError as exc:
        raise ValueError(f"malformed target parameters {arg!r}: {exc}") from exc
    return target_shape(kind, params, M)


def _load_config(path: str) -> CalibrationConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValueError(f"config {path} must be a JSON object")
    return CalibrationConfig.from_dict(raw)


def _bench_config(args) -> CalibrationConfig:
    return CalibrationConfig(
        W=args.width,
        seed=args.seed,
        gamma=args.gamma,
        L=args.slepian_order,
        D=args.kernel_density,
        M=args.grid_size,
        max_fun_evals=args.max_evals,
        restarts=args.restarts,
    )


def _cmd_calibrate(args) -> int:
    config = _load_config(args.config)
    target = _parse_target(args.target, config.M)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / name for name in
             ("kernel.json", "lambda.csv", "h.csv", "trace.csv")}
    meta = dict(config.as_dict())
    meta["target"] = args.target
    storage.write_manifest(
        out / "meta.json", "calibrate", meta, config.seed, list(paths)
    )
    init = initial_kernel(config, target)
    try:
        result = optimize_kernel(config, target, init)
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        raise NumericalConsistencyError(f"optimization failed: {exc}") from exc
    storage.write_kernel_json(paths["kernel.json"], result.kernel)
    storage.write_lambda_csv(paths["lambda.csv"], result.error_shape)
    storage.write_h_csv(paths["h.csv"], result.h)
    storage.write_trace_csv(paths["trace.csv"], result.trace)
    if not args.no_figures:
        init_shape, _ = lambda_and_h(init, config.M, config.gamma)
        figures.save_profile_figure(
            out / "lambda.png",
            target.x,
            {"initial": init_shape.values, "optimized": result.error_shape.values},
            eta=target.values,
        )
        figures.save_trace_figure(out / "trace.png", result.trace)
    print(
        f"calibrate: objective {result.objective:.6g} after {result.eval_count} "
        f"evaluations ({result.termination_reason})"
    )
    return EXIT_OK


def _cmd_lambda(args) -> int:
    kernel = storage.read_kernel_json(args.kernel)
    shape, h = lambda_and_h(kernel, args.grid_size, args.gamma)
    storage.write_lambda_csv(args.out, shape)
    if args.h_out:
        storage.write_h_csv(args.h_out, h)
    if not args.no_figures:
        figures.save_profile_figure(
            Path(args.out).with_suffix(".png"), shape.x, {"lambda": shape.values}
        )
    return EXIT_OK


def _cmd_nufft(args) -> int:
    kernel = storage.read_kernel_json(args.kernel)
    signal = storage.read_signal_csv(args.signal)
    if args.oracle:
        spectrum = nudft_direct(signal, args.grid_size)
    else:
        _, h = lambda_and_h(kernel, args.grid_size, args.gamma)
        spectrum = nufft_forward(signal, build_lookup(kernel), h, args.grid_size, args.gamma)
    storage.write_spectrum_csv(args.out, spectrum)
    if not args.no_figures:
        figures.save_spectrum_figure(
            Path(args.out).with_suffix(".png"), spectrum.x, spectrum.values
        )
    return EXIT_OK


_BENCH_METHODS = ["pswf", "kb", "init", "opt"]


def _cmd_bench(args) -> int:
    config = _bench_config(args)
    threads = _resolve_threads(args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = dict(config.as_dict())
    meta.update(test=args.test, n_signals=args.signals, signal_length=args.signal_length,
                threads=threads)
    storage.write_manifest(out / "meta.json", "bench", meta, args.seed,
                           ["mae.csv", "summary.csv"])
    result = run_bench(args.test, config, args.signals, N=args.signal_length,
                       threads=threads)
    storage.write_mae_csv(out / "mae.csv", result.report.x_grid,
                          result.report.mae_per_method, _BENCH_METHODS)
    storage.write_summary_csv(out / "summary.csv",
                              result.report.weighted_l1_per_method, _BENCH_METHODS)
    if not args.no_figures:
        figures.save_mae_figure(out / "mae.png", result.report.x_grid,
                                result.report.mae_per_method)
        shapes = {
            name: lambda_and_h(kern, config.M, config.gamma)[0].values
            for name, kern in result.kernels.items()
        }
        figures.save_profile_figure(out / "lambda.png", result.target.x, shapes,
                                    eta=result.target.values)
    for name in _BENCH_METHODS:
        print(f"bench test{args.test} {name}: weighted_l1 = "
              f"{result.report.weighted_l1_per_method[name]:.6g}")
    return EXIT_OK


def _cmd_bench2d(args) -> int:
    config = _bench_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = dict(config.as_dict())
    meta.update(size=args.size, spokes=args.spokes, radial=args.radial)
    storage.write_manifest(out / "meta.json", "bench2d", meta, args.seed,
                           ["error_map.csv", "error_map_kb.csv", "summary.csv"])
    result = run_bench2d(args.size, args.spokes, args.radial, config)
    storage.write_error_map_csv(out / "error_map.csv", result.error_maps["opt"])
    storage.write_error_map_csv(out / "error_map_kb.csv", result.error_maps["kb"])
    order = ["kb", "opt", "direct"]
    storage.write_summary_csv(out / "summary.csv",
                              result.weighted_error_per_method, order)
    if not args.no_figures:
        figures.save_image_figure(out / "phantom.png", result.truth, title="phantom")
        for name in ("kb", "opt"):
            figures.save_image_figure(out / f"error_map_{name}.png",
                                      result.error_maps[name],
                                      title=f"log10 error ({name})", cmap="viridis")
    for name in order:
        print(f"bench2d {name}: weighted error = "
              f"{result.weighted_error_per_method[name]:.6g}")
    return EXIT_OK


def _cmd_signals(args) -> int:
    target = _parse_target(args.target, args.grid_size)
    placement = args.placement
    if placement == "auto":
        placement = (default_placement(int(args.target[-1]))
                     if args.target in ("test1", "test2", "test3") else "log_inv_eta")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "target": args.target,
        "count": args.count,
        "length": args.length,
        "placement": placement,
        "grid_size": args.grid_size,
    }
    names = [f"signal_{i:04d}.csv" for i in range(args.count)]
    storage.write_manifest(out / "meta.json", "signals", meta, args.seed, names)
    suite = generate_signals(target, args.count, args.length, args.seed,
                             placement=placement)
    for name, sig in zip(names, suite.signals):
        storage.write_signal_csv(out / name, sig)
    print(f"signals: wrote {args.count} files to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridopt",
        description="Gridding-kernel calibration and evaluation for nonuniform FFT.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"gridopt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", formatter_class=argparse.ArgumentDefaultsHelpFormatter, help="optimise a kernel against a target profile")
    p.add_argument("--config", required=True, help="calibration config JSON")
    p.add_argument("--target", required=True,
                   help="target spec, e.g. test2 or notch:0.25,0.1,1e-7,1e-2 or custom:PATH")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("lambda", formatter_class=argparse.ArgumentDefaultsHelpFormatter, help="error shape and deapodization of a kernel")
    p.add_argument("--kernel", required=True, help="kernel JSON")
    p.add_argument("--grid-size", type=int, default=2048, metavar="M",
                   help="frequency grid size")
    p.add_argument("--gamma", type=float, default=1.0, help="oversampling factor")
    p.add_argument("--out", required=True, help="output CSV (x,lambda)")
    p.add_argument("--h-out", default=None, help="optional CSV for h (x,h_re,h_im)")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.set_defaults(func=_cmd_lambda)

    p = sub.add_parser("nufft", formatter_class=argparse.ArgumentDefaultsHelpFormatter, help="gridding+FFT transform of a signal CSV")
    p.add_argument("--kernel", required=True, help="kernel JSON")
    p.add_argument("--signal", required=True, help="signal CSV (t,u_re,u_im)")
    p.add_argument("--grid-size", type=int, default=2048, metavar="M",
                   help="frequency grid size")
    p.add_argument("--gamma", type=float, default=1.0, help="oversampling factor")
    p.add_argument("--out", required=True, help="output CSV (x,y_re,y_im)")
    p.add_argument("--oracle", action="store_true",
                   help="compute the exact nonuniform DFT instead of gridding")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.set_defaults(func=_cmd_nufft)

    p = sub.add_parser("bench", formatter_class=argparse.ArgumentDefaultsHelpFormatter, help="1-D benchmark protocol")
    p.add_argument("--test", type=int, required=True, choices=(1, 2, 3),
                   help="standard test case")
    p.add_argument("--width", type=int, required=True, metavar="W",
                   help="kernel support half-width")
    p.add_argument("--gamma", type=float, default=1.0, help="oversampling factor")
    p.add_argument("--signals", type=int, required=True, help="suite size")
    p.add_argument("--seed", type=int, required=True, help="suite/calibration seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--grid-size", type=int, default=512, metavar="M",
                   help="frequency grid size")
    p.add_argument("--signal-length", type=int, default=None, metavar="N",
                   help="time samples per signal (default: grid size)")
    p.add_argument("--kernel-density", type=int, default=21, metavar="D",
                   help="kernel samples per unit")
    p.add_argument("--slepian-order", type=int, default=15, metavar="L",
                   help="basis truncation order")
    p.add_argument("--max-evals", type=int, default=20000,
                   help="calibration evaluation budget")
    p.add_argument("--restarts", type=int, default=3, help="optimiser starts")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: GRIDOPT_THREADS or CPU count)")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("bench2d", formatter_class=argparse.ArgumentDefaultsHelpFormatter, help="2-D radial k-space experiment")
    p.add_argument("--size", type=int, required=True, help="phantom side length")
    p.add_argument("--spokes", type=int, required=True, help="golden-angle spokes")
    p.add_argument("--radial", type=int, required=True, help="samples per spoke")
    p.add_argument("--width", type=int, required=True, metavar="W",
                   help="kernel support half-width")
    p.add_argument("--gamma", type=float, default=2.0, help="oversampling factor")
    p.add_argument("--seed", type=int, required=True, help="calibration seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--grid-size", type=int, default=512, metavar="M",
                   help="calibration frequency grid")
    p.add_argument("--kernel-density", type=int, default=21, metavar="D",
                   help="kernel samples per unit")
    p.add_argument("--slepian-order", type=int, default=15, metavar="L",
                   help="basis truncation order")
    p.add_argument("--max-evals", type=int, default=20000,
                   help="calibration evaluation budget")
    p.add_argument("--restarts", type=int, default=3, help="optimiser starts")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.set_defaults(func=_cmd_bench2d)

    p = sub.add_parser("signals", formatter_class=argparse.ArgumentDefaultsHelpFormatter, help="generate a reproducible signal suite")
    p.add_argument("--target", required=True, help="target spec (see calibrate)")
    p.add_argument("--count", type=int, required=True, help="number of signals")
    p.add_argument("--length", type=int, required=True, metavar="N",
                   help="time samples per signal")
    p.add_argument("--seed", type=int, required=True, help="suite seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--grid-size", type=int, default=2048, metavar="M",
                   help="placement-density grid size")
    p.add_argument("--placement", choices=("auto", "uniform_half", "log_inv_eta"),
                   default="auto", help="tone placement distribution")
    p.set_defaults(func=_cmd_signals)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalConsistencyError as exc:
        print(f"gridopt: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, KeyError) as exc:
        print(f"gridopt: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entry() -> None:  # console-script hook
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
