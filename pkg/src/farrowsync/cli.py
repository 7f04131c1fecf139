"""Command-line front end for the experiment campaigns.

Usage::

    farrowsync --experiment ex1 --trials 100 --seed 7 --out results/
    farrowsync --config run.cfg --experiment ex4

A config file is a flat ``key=value`` text file using the same names as the
long flags (without the leading dashes, dashes may be written as
underscores).  Values given on the command line win over the config file.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ParameterError
from .experiments import ExperimentConfig, run_experiment

__all__ = ["build_parser", "parse_config_file", "main"]

_SENTINEL = None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="farrowsync",
        description="Joint sampling-offset estimation/compensation experiments",
    )
    p.add_argument("--config", default=None,
                   help="flat key=value config file; flags override it")
    p.add_argument("--experiment",
                   choices=["ex1", "ex2", "ex3", "ex4", "ex5", "custom"],
                   default=_SENTINEL, help="which campaign to run (default ex1)")
    p.add_argument("--trials", type=int, default=_SENTINEL,
                   help="Monte-Carlo trials per sweep point (default 1000)")
    p.add_argument("--n", type=int, default=_SENTINEL, dest="n",
                   help="estimation window length N (default 256)")
    p.add_argument("--order", type=int, default=_SENTINEL,
                   help="Farrow polynomial order L for estimation (default 3)")
    p.add_argument("--delta-ppm", type=float, default=_SENTINEL,
                   help="true sampling-frequency offset in ppm (default -200)")
    p.add_argument("--epsilon", type=float, default=_SENTINEL,
                   help="true sampling-time offset in reference periods")
    p.add_argument("--snr-db", type=float, action="append", default=_SENTINEL,
                   help="SNR in dB; repeat the flag to sweep")
    p.add_argument("--delta-sweep", default=_SENTINEL,
                   help="comma-separated ppm values to sweep")
    p.add_argument("--seed", type=int, default=_SENTINEL,
                   help="base RNG seed (default 0)")
    p.add_argument("--out", default=_SENTINEL,
                   help="output directory for the CSV files (default .)")
    p.add_argument("--signal", choices=["multisine", "bandpass", "ofdm"],
                   default=_SENTINEL, help="signal kind for --experiment custom")
    p.add_argument("--ber-trials", type=int, default=_SENTINEL,
                   help="run the OFDM BER pipeline only for the first K trials")
    p.add_argument("--dump-constellations", action="store_true", default=_SENTINEL,
                   help="write pre/post constellation CSVs for the first BER trial")
    return p


def parse_config_file(path: str) -> dict:
    """Read a flat key=value file into a string dict.

    Blank lines and lines starting with ``#`` are ignored; keys are
    normalized to use underscores.
    """
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _parse_sweep(text: str) -> list:
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as exc:
        raise ParameterError(f"bad sweep list {text!r}") from exc


_BOOL = {"1": True, "true": True, "yes": True, "0": False, "false": False, "no": False}


def _config_from(args: argparse.Namespace) -> ExperimentConfig:
    file_vals = parse_config_file(args.config) if args.config else {}

    def pick(flag_val, key, cast, default):
        if flag_val is not None:
            return flag_val
        if key in file_vals:
            return cast(file_vals[key])
        return default

    snr = args.snr_db
    if snr is None and "snr_db" in file_vals:
        snr = _parse_sweep(file_vals["snr_db"])
    if snr is None:
        snr = 60.0
    elif isinstance(snr, list) and len(snr) == 1:
        snr = snr[0]

    sweep = pick(args.delta_sweep, "delta_sweep", str, None)
    dump = pick(args.dump_constellations, "dump_constellations",
                lambda s: _BOOL[s.lower()], False)
    return ExperimentConfig(
        experiment=pick(args.experiment, "experiment", str, "ex1"),
        trials=pick(args.trials, "trials", int, 1000),
        n_samples=pick(args.n, "n", int, 256),
        order=pick(args.order, "order", int, 3),
        delta_ppm=pick(args.delta_ppm, "delta_ppm", float, -200.0),
        epsilon=pick(args.epsilon, "epsilon", float, None),
        snr_db=snr,
        delta_sweep=_parse_sweep(sweep) if sweep else None,
        seed=pick(args.seed, "seed", int, 0),
        output_path=pick(args.out, "out", str, "."),
        signal=pick(args.signal, "signal", str, None),
        ber_trials=pick(args.ber_trials, "ber_trials", int, None),
        dump_constellations=bool(dump),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from(args)
        summary = run_experiment(cfg)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for agg in summary.aggregates:
        print(
            f"{cfg.experiment} sweep={agg['sweep_value']:g}: "
            f"mean NMSE {agg['mean_nmse_post_db']:.2f} dB, "
            f"median {agg['median_nmse_post_db']:.2f} dB, "
            f"BER {agg['mean_ber_post']:.3g}, "
            f"within 1%/3%: {agg['frac_within_1pct']:.3f}/{agg['frac_within_3pct']:.3f}"
        )
    print(f"wrote {summary.trial_csv} and {summary.aggregate_csv}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
