"""Command-line front end.

Subcommands: ``gen`` (emit a code as an IQ file), ``simulate`` (apply the
fixed-Doppler channel to an IQ file), ``estimate`` (run one estimator on an
IQ file), ``ambiguity`` (dump an ambiguity map as CSV), ``bench`` (run a
Monte-Carlo experiment from a config file).

Exit codes: 0 success, 2 usage/config error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .channel import ChannelSpec, apply_channel_fixed
from .correlation import circular_xcorr, diff_sliding_corr
from .estimators import MlSearchConfig, ml_estimate, ambiguity_map
from .harness import (config_from_file, run_experiment, summarize,
                      write_csv, write_summary_csv)
from .iqfile import read_iq, write_iq
from .sequences import CodeKind, SequenceSpec, code_sequence


def _spec_from_args(args, default_kind: str = "dzc") -> SequenceSpec:
    kind = CodeKind(getattr(args, "kind", None) or default_kind)
    return SequenceSpec(args.n, args.m, kind)


def cmd_gen(args) -> int:
    spec = _spec_from_args(args)
    length = args.length or spec.n
    samples = code_sequence(spec, length)
    write_iq(args.out, samples, {"fs": args.fs, "fc": args.fc, "c": args.c})
    return 0


def cmd_simulate(args) -> int:
    samples, meta = read_iq(args.infile)
    ch = ChannelSpec(tau_samples=args.tau, delta=args.delta, nu=args.nu,
                     theta=args.theta, alpha=args.alpha,
                     snr_db=args.snr, seed=args.seed)
    out = apply_channel_fixed(samples, ch)
    write_iq(args.out, out, meta)
    return 0


def cmd_estimate(args) -> int:
    samples, meta = read_iq(args.infile)
    fs = args.fs or meta.get("fs", 192_000.0)
    fc = args.fc or meta.get("fc", 20_000.0)
    c = args.c or meta.get("c", 345.664)
    spec = _spec_from_args(args)
    n = spec.n
    if samples.size < n:
        raise ValueError(f"input has {samples.size} samples, need at least N={n}")

    if args.algo == "xcorr":
        res = circular_xcorr(code_sequence(spec), samples[:n])
        tau_hat, nu_hat, metric = res.peak_index, 0.0, res.peak_magnitude
    elif args.algo == "diff":
        frame = samples[:min(n + 1, samples.size)]
        res = diff_sliding_corr(code_sequence(spec, n + 1)[:frame.size], frame,
                                frame_len=n)
        tau_hat, nu_hat, metric = res.peak_index, 0.0, res.peak_magnitude
    elif args.algo == "ml":
        est = ml_estimate(samples[:n], spec, MlSearchConfig(fs=fs, fc=fc, c=c))
        tau_hat, nu_hat, metric = est.tau_hat, est.nu_hat, est.metric
    else:  # pragma: no cover - argparse choices guard this
        raise ValueError(f"unknown algorithm {args.algo!r}")

    d_hat = tau_hat * c / fs
    lines = [f"# dzc-ranging v{__version__}",
             "algorithm,tau_hat,nu_hat,d_hat_m,metric",
             f"{args.algo},{tau_hat},{nu_hat:.12g},{d_hat:.12g},{metric:.12g}"]
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_ambiguity(args) -> int:
    spec = _spec_from_args(args)
    n = spec.n
    tau_grid = np.arange(n)
    step = 1.0 / (4 * n)
    nu_grid = np.arange(-0.5, 0.5, step)
    grid = ambiguity_map(spec, args.tau, args.nu, tau_grid, nu_grid)
    lines = [f"# dzc-ranging v{__version__}",
             "tau," + ",".join(f"nu={v:.12g}" for v in nu_grid)]
    for i, tau in enumerate(tau_grid):
        lines.append(f"{tau}," + ",".join(f"{v:.12g}" for v in grid[i]))
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_bench(args) -> int:
    cfg = config_from_file(args.config)
    records = run_experiment(cfg, workers=args.workers)
    os.makedirs(args.out_dir, exist_ok=True)
    write_csv(records, os.path.join(args.out_dir, "trials.csv"))
    write_summary_csv(summarize(records, cfg.half_lambda_mm),
                      os.path.join(args.out_dir, "summary.csv"))
    return 0


def _write_text(path, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _add_spec_flags(p, kind_flag=True):
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    if kind_flag:
        p.add_argument("--kind", choices=["zc", "dzc"], default="dzc")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dzc-ranging",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"dzc-ranging {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a code and write it as IQ")
    _add_spec_flags(p)
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--fs", type=float, default=192_000.0)
    p.add_argument("--fc", type=float, default=20_000.0)
    p.add_argument("--c", type=float, default=345.664)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("simulate", help="apply the fixed-Doppler channel")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--snr", type=float, default=float("inf"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate delay from an IQ file")
    p.add_argument("--in", dest="infile", required=True)
    _add_spec_flags(p)
    p.add_argument("--algo", choices=["diff", "ml", "xcorr"], required=True)
    p.add_argument("--fs", type=float, default=None)
    p.add_argument("--fc", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("ambiguity", help="dump an ambiguity map as CSV")
    _add_spec_flags(p)
    p.add_argument("--tau", type=int, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_ambiguity)

    p = sub.add_parser("bench", help="run a Monte-Carlo experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - unexpected failures
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
