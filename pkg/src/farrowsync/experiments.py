"""Monte-Carlo experiment campaigns with CSV output.

Five canned experiments mirror the evaluation scenarios this library targets:

* ``ex1`` - multi-sine signal, fixed offsets, estimation accuracy.
* ``ex2`` - bandpass-filtered white noise, fixed offsets.
* ``ex3`` - OFDM with CFO and phase offset on top of SFO/STO; constellation
  and BER before/after compensation.
* ``ex4`` - OFDM, NMSE/BER versus SNR sweep.
* ``ex5`` - OFDM, NMSE versus SFO sweep at fixed SNR.
* ``custom`` - the same pipeline with fully user-chosen parameters.

Each trial draws a fresh signal (seed = campaign seed + trial index), samples
the reference/offset pair exactly, impairs the offset copy, estimates
(delta, epsilon) from one real component, compensates with a wideband Farrow
bank and measures NMSE (and BER for OFDM).  Results are written as a
per-trial CSV plus an aggregate CSV per sweep point, both deterministic for
a fixed seed.

The receiver-side model: carrier offsets (CFO/PO) rotate the continuous
signal before either converter samples it, so they are common to both copies
and the timing estimator is insensitive to them; additive noise models the
offset converter's front end, so the reference copy stays clean.
"""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import sigsim
from .errors import ParameterError
from .estimator import EstimatorConfig, estimate
from .farrow import FarrowBank, design_wideband, stream_compensate
from .sigsim import (
    OfdmSampler,
    OfdmSpec,
    add_awgn,
    apply_cfo_po,
    ber_qam16,
    gen_bandpass_noise,
    gen_multisine,
    gen_ofdm,
    nmse,
    residual_phase_fit,
)

__all__ = ["ExperimentConfig", "TrialRecord", "run_experiment", "run_custom",
           "TRIAL_CSV_HEADER", "AGGREGATE_CSV_HEADER"]

TRIAL_CSV_HEADER = (
    "trial,delta_true_ppm,eps_true,delta_hat_ppm,eps_hat,delta_relerr,"
    "eps_relerr,iters,nmse_pre_db,nmse_post_db,ber_pre,ber_post"
)
AGGREGATE_CSV_HEADER = (
    "sweep_value,mean_nmse_post_db,median_nmse_post_db,mean_ber_post,"
    "frac_within_1pct,frac_within_3pct"
)

_EXPERIMENTS = ("ex1", "ex2", "ex3", "ex4", "ex5", "custom")

# compensation uses a fixed high-accuracy bank; estimation order is the
# user-facing L knob
_COMP_ORDER = 7
_BANK_TAPS = 24


@dataclass
class ExperimentConfig:
    experiment: str = "ex1"
    trials: int = 1000
    n_samples: int = 256
    order: int = 3
    delta_ppm: float = -200.0
    epsilon: float | None = None  # 0.03 for ex1-ex3, 300e-6 for ex4/ex5
    snr_db: float | list = 60.0
    delta_sweep: list | None = None
    epsilon_sweep: list | None = None
    seed: int = 0
    output_path: str = "."
    # signal knobs
    signal: str | None = None  # custom only: multisine | bandpass | ofdm
    n_tones: int = 8
    tone_band: tuple = (0.0, 0.375)
    noise_band: tuple = (0.05, 0.35)
    ofdm: OfdmSpec = field(default_factory=OfdmSpec)
    cfo_fraction: float = 0.0
    phase_offset: float = 0.0
    # BER pipeline is much heavier than estimation; limit it to the first
    # ber_trials trials per sweep point (None = all OFDM trials)
    ber_trials: int | None = None
    dump_constellations: bool = False

    def resolved_epsilon(self) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return 300e-6 if self.experiment in ("ex4", "ex5") else 0.03


@dataclass
class TrialRecord:
    trial: int
    delta_true_ppm: float
    eps_true: float
    delta_hat_ppm: float
    eps_hat: float
    delta_relerr: float
    eps_relerr: float
    iters: int
    nmse_pre_db: float
    nmse_post_db: float
    ber_pre: float
    ber_post: float
    wall_time_s: float = 0.0

    def csv_row(self):
        return [
            self.trial,
            repr(float(self.delta_true_ppm)),
            repr(float(self.eps_true)),
            repr(float(self.delta_hat_ppm)),
            repr(float(self.eps_hat)),
            repr(float(self.delta_relerr)),
            repr(float(self.eps_relerr)),
            self.iters,
            repr(float(self.nmse_pre_db)),
            repr(float(self.nmse_post_db)),
            repr(float(self.ber_pre)),
            repr(float(self.ber_post)),
        ]


def _relerr(est: float, true: float) -> float:
    """Relative error, falling back to absolute error at a zero true value."""
    return abs(est - true) / abs(true) if true != 0.0 else abs(est)


_bank_cache: dict = {}


def _banks(order: int):
    key = (order, _BANK_TAPS)
    if key not in _bank_cache:
        _bank_cache[key] = (
            design_wideband(order=order, taps=_BANK_TAPS),
            design_wideband(order=_COMP_ORDER, taps=_BANK_TAPS),
        )
    return _bank_cache[key]


def _window_nmse(comp_bank: FarrowBank, y_stream: np.ndarray, ref: np.ndarray,
                 n_window: int) -> float:
    """NMSE of the compensated stream against the reference over one window."""
    M, D = comp_bank.taps, comp_bank.latency
    n_hi = min(len(y_stream) + M - 1, n_window)
    y = y_stream[: n_hi - (M - 1)]
    r = ref[M - 1 - D : n_hi - D]
    ok = ~np.isnan(np.real(y))
    return nmse(y[ok], r[ok])


def _grid_view(comp_bank: FarrowBank, y_stream: np.ndarray, total: int) -> np.ndarray:
    """Re-index a compensated stream onto the reference grid (0..total-1)."""
    M, D = comp_bank.taps, comp_bank.latency
    out = np.zeros(total, dtype=y_stream.dtype)
    i = np.arange(total)
    j = i + D - (M - 1)
    ok = (j >= 0) & (j < len(y_stream))
    vals = y_stream[j[ok]]
    out[i[ok]] = np.nan_to_num(vals)
    return out


def _ofdm_receiver(sampler: OfdmSampler, comp_bank: FarrowBank, z1n: np.ndarray,
                   delta_hat: float, eps_hat: float):
    """SFO compensation, data-aided CFO/PO fit, demodulation.

    Returns (ber, grid views before/after the phase de-rotation).
    """
    sp = sampler.spec
    y = stream_compensate(comp_bank, z1n, delta_hat, eps_hat)
    grid = _grid_view(comp_bank, y, sp.total_len)
    eq1 = sampler.demodulate(grid)
    centers = np.arange(sp.n_symbols) * sp.symbol_len + sp.cp + sp.fft_size / 2.0
    times = np.repeat(centers, sp.active)
    slope, intercept = residual_phase_fit(eq1.ravel(), sampler.symbols.ravel(), times)
    i = np.arange(sp.total_len)
    grid2 = grid * np.exp(-1j * (slope * i + intercept))
    eq2 = sampler.demodulate(grid2)
    ber = ber_qam16(eq2, sampler.symbols)
    return ber, eq1, eq2


def _make_sampler(kind: str, cfg: ExperimentConfig, seed: int, est_window: int):
    if kind == "multisine":
        return gen_multisine(cfg.n_tones, seed, band=cfg.tone_band)
    if kind == "bandpass":
        return gen_bandpass_noise(cfg.noise_band, seed, duration=est_window + 16)
    if kind == "ofdm":
        return gen_ofdm(cfg.ofdm, seed)
    raise ParameterError(f"unknown signal kind {kind!r}")


def _run_trial(kind: str, cfg: ExperimentConfig, trial: int, delta: float,
               epsilon: float, snr_db: float, with_ber: bool):
    t_start = time.perf_counter()
    est_bank, comp_bank = _banks(cfg.order)
    N = cfg.n_samples
    pad = comp_bank.taps + 8
    seed = cfg.seed + trial
    noise_seed = seed + 0x5EED0
    sampler = _make_sampler(kind, cfg, seed, N + pad)

    m = np.arange(N + pad, dtype=float)
    if kind == "ofdm" and with_ber:
        total = sampler.spec.total_len
        margin = int(np.ceil(total * abs(delta) + abs(epsilon))) + comp_bank.taps
        m = np.arange(total + margin, dtype=float)
        x0 = sampler.reference_grid()
    elif kind == "ofdm":
        x0 = sampler.reference_grid()[: N + pad]
    else:
        x0 = sampler.eval(np.arange(N + pad, dtype=float))
    x1 = sampler.eval(m * (1.0 + delta) + epsilon)

    if cfg.cfo_fraction or cfg.phase_offset:
        # carrier offsets hit the continuous signal before either converter
        x0 = apply_cfo_po(x0, cfg.cfo_fraction, cfg.phase_offset, cfg.ofdm.fft_size)
        x1 = apply_cfo_po(x1, cfg.cfo_fraction, cfg.phase_offset, cfg.ofdm.fft_size)
    x1n = add_awgn(x1, snr_db, noise_seed)

    est = estimate(x0, x1n, est_bank,
                   EstimatorConfig(n_samples=N, d_max=est_bank.d_valid[1]))

    y = stream_compensate(comp_bank, x1n[: N + pad], est.delta_hat, est.epsilon_hat)
    nmse_post = _window_nmse(comp_bank, y, x0, N)
    nmse_pre = nmse(x1n[:N], x0[:N])

    ber_pre = ber_post = float("nan")
    eq_views = None
    if kind == "ofdm" and with_ber:
        total = sampler.spec.total_len
        ber_pre = ber_qam16(sampler.demodulate(x1n[:total]), sampler.symbols)
        ber_post, eq1, eq2 = _ofdm_receiver(sampler, comp_bank, x1n,
                                            est.delta_hat, est.epsilon_hat)
        eq_views = (sampler.demodulate(x1n[:total]), eq1, eq2)

    rec = TrialRecord(
        trial=trial,
        delta_true_ppm=delta * 1e6,
        eps_true=epsilon,
        delta_hat_ppm=est.delta_hat * 1e6,
        eps_hat=est.epsilon_hat,
        delta_relerr=_relerr(est.delta_hat, delta),
        eps_relerr=_relerr(est.epsilon_hat, epsilon),
        iters=est.iterations,
        nmse_pre_db=nmse_pre,
        nmse_post_db=nmse_post,
        ber_pre=ber_pre,
        ber_post=ber_post,
        wall_time_s=time.perf_counter() - t_start,
    )
    return rec, eq_views


def _sweep_points(cfg: ExperimentConfig):
    """One (sweep_value, delta, epsilon, snr) tuple per campaign point."""
    eps = cfg.resolved_epsilon()
    base_delta = cfg.delta_ppm * 1e-6
    if cfg.delta_sweep:
        snr = cfg.snr_db if np.isscalar(cfg.snr_db) else cfg.snr_db[0]
        return [(ppm, ppm * 1e-6, eps, float(snr)) for ppm in cfg.delta_sweep]
    if cfg.epsilon_sweep:
        snr = cfg.snr_db if np.isscalar(cfg.snr_db) else cfg.snr_db[0]
        return [(e, base_delta, float(e), float(snr)) for e in cfg.epsilon_sweep]
    if not np.isscalar(cfg.snr_db):
        return [(float(s), base_delta, eps, float(s)) for s in cfg.snr_db]
    return [(float(cfg.snr_db), base_delta, eps, float(cfg.snr_db))]


def _experiment_kind(cfg: ExperimentConfig) -> str:
    if cfg.experiment == "ex1":
        return "multisine"
    if cfg.experiment == "ex2":
        return "bandpass"
    if cfg.experiment in ("ex3", "ex4", "ex5"):
        return "ofdm"
    if cfg.experiment == "custom":
        return cfg.signal or "multisine"
    raise ParameterError(f"unknown experiment {cfg.experiment!r}")


def _resolve_defaults(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.experiment == "ex3" and cfg.cfo_fraction == 0.0 and cfg.phase_offset == 0.0:
        cfg = replace(cfg, cfo_fraction=0.05, phase_offset=0.3)
    if cfg.experiment == "ex4" and np.isscalar(cfg.snr_db):
        cfg = replace(cfg, snr_db=[10.0, 20.0, 30.0, 40.0, 50.0, 60.0])
    if cfg.experiment == "ex5" and not cfg.delta_sweep:
        cfg = replace(
            cfg,
            delta_sweep=[-1000.0, -500.0, -200.0, -50.0, 50.0, 200.0, 500.0, 1000.0],
            snr_db=30.0,
        )
    return cfg


@dataclass
class ExperimentSummary:
    config: ExperimentConfig
    records: list
    aggregates: list
    trial_csv: str | None
    aggregate_csv: str | None


def run_experiment(cfg: ExperimentConfig) -> ExperimentSummary:
    """Run one campaign and write trial + aggregate CSV files.

    The per-trial CSV holds all sweep points in order (``cfg.trials``
    consecutive rows per point); the aggregate CSV has one row per point.
    """
    if cfg.experiment not in _EXPERIMENTS:
        raise ParameterError(f"experiment must be one of {_EXPERIMENTS}")
    if cfg.trials < 1:
        raise ParameterError("trials must be >= 1")
    cfg = _resolve_defaults(cfg)
    kind = _experiment_kind(cfg)
    points = _sweep_points(cfg)
    for _, delta, epsilon, _ in points:
        if abs(delta) >= 0.01:
            raise ParameterError(f"|delta| must be < 0.01, got {delta}")
        if abs(epsilon) > 0.5:
            raise ParameterError(f"|epsilon| must be <= 0.5, got {epsilon}")

    records: list[TrialRecord] = []
    aggregates = []
    const_dump = None
    for sweep_value, delta, epsilon, snr in points:
        point_records = []
        for trial in range(cfg.trials):
            with_ber = kind == "ofdm" and (
                cfg.ber_trials is None or trial < cfg.ber_trials
            )
            rec, eq_views = _run_trial(kind, cfg, trial, delta, epsilon, snr, with_ber)
            point_records.append(rec)
            if cfg.dump_constellations and const_dump is None and eq_views is not None:
                const_dump = eq_views
        records.extend(point_records)
        aggregates.append(_aggregate(sweep_value, point_records))

    trial_csv = aggregate_csv = None
    if cfg.output_path:
        os.makedirs(cfg.output_path, exist_ok=True)
        trial_csv = os.path.join(cfg.output_path, f"{cfg.experiment}_trials.csv")
        aggregate_csv = os.path.join(cfg.output_path, f"{cfg.experiment}_aggregate.csv")
        _write_trials_csv(trial_csv, records)
        _write_aggregate_csv(aggregate_csv, aggregates)
        if const_dump is not None:
            names = ("constellation_pre.csv", "constellation_post_sfo.csv",
                     "constellation_post_cfo.csv")
            for name, eq in zip(names, const_dump):
                sigsim.dump_complex_csv(os.path.join(cfg.output_path, name), eq.ravel())
    return ExperimentSummary(cfg, records, aggregates, trial_csv, aggregate_csv)


def run_custom(cfg: ExperimentConfig) -> ExperimentSummary:
    """Run the shared pipeline with fully user-specified parameters."""
    return run_experiment(replace(cfg, experiment="custom"))


def _aggregate(sweep_value, recs):
    post = np.array([r.nmse_post_db for r in recs])
    bers = np.array([r.ber_post for r in recs])
    bers = bers[~np.isnan(bers)]
    within = lambda tol: float(
        np.mean([(r.delta_relerr <= tol and r.eps_relerr <= tol) for r in recs])
    )
    return {
        "sweep_value": float(sweep_value),
        "mean_nmse_post_db": float(post.mean()),
        "median_nmse_post_db": float(np.median(post)),
        "mean_ber_post": float(bers.mean()) if bers.size else float("nan"),
        "frac_within_1pct": within(0.01),
        "frac_within_3pct": within(0.03),
    }


def _write_trials_csv(path, records):
    with open(path, "w", newline="") as fh:
        fh.write(TRIAL_CSV_HEADER + "\n")
        w = csv.writer(fh)
        for rec in records:
            w.writerow(rec.csv_row())


def _write_aggregate_csv(path, aggregates):
    cols = AGGREGATE_CSV_HEADER.split(",")
    with open(path, "w", newline="") as fh:
        fh.write(AGGREGATE_CSV_HEADER + "\n")
        w = csv.writer(fh)
        for agg in aggregates:
            w.writerow([repr(float(agg[c])) for c in cols])
