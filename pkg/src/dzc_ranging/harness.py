"""Monte-Carlo experiment runner and CSV emission.

An experiment sweeps SNR points for one or more estimation algorithms and
produces one :class:`TrialRecord` per trial.  Window algorithms (correlators
and the ML grid search) draw an independent noise realization per trial; the
reduced-complexity pipeline instead processes one long stream per SNR point
and emits one record per sliding window, so ``trials`` caps the number of
windows kept.

Seeds are derived per (algorithm, SNR index, trial) through
``numpy.random.SeedSequence``, so results are identical regardless of
execution order or worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from time import perf_counter_ns

import numpy as np

from . import __version__
from .channel import ChannelSpec, MotionProfile, apply_channel_fixed, apply_channel_moving
from .correlation import circular_xcorr, diff_sliding_corr
from .estimators import (MlSearchConfig, PipelineConfig, RangeEstimate,
                         ml_estimate, reduced_complexity_pipeline)
from .sequences import CodeKind, SequenceSpec, code_sequence, dzc_period

SCENARIOS = ("fixed_doppler", "constant_velocity", "velocity_profile")
ALGORITHMS = ("xcorr_zc", "diff_dzc", "ml_zc", "ml_dzc", "reduced_dzc")

CSV_HEADER = "trial_id,snr_db,algorithm,true_tau,tau_hat,true_d_m,d_hat_m,error_mm,runtime_ns"
SUMMARY_HEADER = "algorithm,snr_db,mse_samples2,mse_mm2,rmse_mm,p_within_halflambda"


@dataclass(frozen=True)
class ExperimentConfig:
    spec: SequenceSpec = SequenceSpec(511, 1, CodeKind.DZC)
    scenario: str = "fixed_doppler"
    snr_grid: tuple = (20.0,)
    trials: int = 500
    algorithms: tuple = ("diff_dzc",)
    base_seed: int = 0
    # channel / motion parameters
    tau: float = 60.0
    delta: float = 0.0
    nu: float = 0.0
    theta: float = 0.0
    alpha: float = 1.0
    velocity: float = 0.0          # m/s, positive toward the receiver
    fs: float = 192_000.0
    fc: float = 20_000.0
    c: float = 345.664
    # estimator knobs
    nu_center: float = 0.0
    pipeline: PipelineConfig | None = None
    half_lambda_mm: float = 7.5

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.snr_grid:
            raise ValueError("snr_grid must be non-empty")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")

    def pipeline_cfg(self) -> PipelineConfig:
        if self.pipeline is not None:
            return self.pipeline
        return PipelineConfig(fs=self.fs, fc=self.fc, c=self.c)


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    snr_db: float
    algorithm: str
    true_tau: float
    tau_hat: int
    true_d_m: float
    d_hat_m: float
    error_mm: float
    runtime_ns: int = 0


@lru_cache(maxsize=32)
def _cached_stream(spec: SequenceSpec, min_len: int = 0) -> np.ndarray:
    period = dzc_period(spec) if spec.kind is CodeKind.DZC else spec.n
    reps = max(1, -(-min_len // period))
    out = code_sequence(spec, reps * period)
    out.setflags(write=False)
    return out


def _algo_spec(base: SequenceSpec, algorithm: str) -> SequenceSpec:
    kind = CodeKind.ZC if algorithm.endswith("_zc") else CodeKind.DZC
    return SequenceSpec(base.n, base.m, kind)


def _trial_seed(cfg: ExperimentConfig, algo_idx: int, snr_idx: int, trial_id: int) -> int:
    ss = np.random.SeedSequence([cfg.base_seed, algo_idx, snr_idx, trial_id])
    return int(ss.generate_state(1)[0])


def _window_trial(cfg: ExperimentConfig, algorithm: str, snr_db: float,
                  seed: int) -> tuple[float, int, float]:
    """Run one single-window trial; returns (true_tau, tau_hat, d_hat)."""
    spec = _algo_spec(cfg.spec, algorithm)
    n = spec.n
    tx = _cached_stream(spec, n + 1)
    ch = ChannelSpec(tau_samples=cfg.tau, delta=cfg.delta, nu=cfg.nu,
                     theta=cfg.theta, alpha=cfg.alpha, snr_db=snr_db, seed=seed)
    y = apply_channel_fixed(tx, ch)

    if algorithm == "xcorr_zc":
        res = circular_xcorr(code_sequence(spec), y[:n])
        tau_hat = res.peak_index
    elif algorithm == "diff_dzc":
        res = diff_sliding_corr(code_sequence(spec, n + 1), y[:n + 1], frame_len=n)
        tau_hat = res.peak_index
    elif algorithm in ("ml_zc", "ml_dzc"):
        ml_cfg = MlSearchConfig(nu_center=cfg.nu_center, fs=cfg.fs,
                                fc=cfg.fc, c=cfg.c)
        est = ml_estimate(y[:n], spec, ml_cfg)
        tau_hat = est.tau_hat
    else:  # pragma: no cover - guarded by config validation
        raise ValueError(f"not a window algorithm: {algorithm}")
    return cfg.tau, tau_hat, tau_hat * cfg.c / cfg.fs


def _velocity_fn(cfg: ExperimentConfig, length: int):
    """Constant or trapezoidal (ramp up - cruise - ramp down) profile."""
    v = cfg.velocity
    if cfg.scenario == "constant_velocity":
        return lambda k: np.full(np.size(k), v)
    ramp = max(1, length // 5)

    def profile(k):
        k = np.asarray(k, dtype=float)
        up = np.clip(k / ramp, 0.0, 1.0)
        down = np.clip((length - 1 - k) / ramp, 0.0, 1.0)
        return v * np.minimum(up, down)

    return profile


def _pipeline_records(cfg: ExperimentConfig, algo_idx: int, snr_idx: int) -> list[TrialRecord]:
    """One long stream per SNR point; one record per sliding window."""
    snr_db = float(cfg.snr_grid[snr_idx])
    pcfg = cfg.pipeline_cfg()
    spec = _algo_spec(cfg.spec, "reduced_dzc")
    n = spec.n
    # The stream extends past the last window so the acquisition stage has
    # its full integration budget; only the first `trials` windows are kept.
    length = max((cfg.trials - 1) * pcfg.window_step + n + 2,
                 pcfg.acquisition_samples + n + 2)
    pcfg = replace(pcfg, max_windows=cfg.trials)
    tx = _cached_stream(spec, int(length * 1.06) + 64)

    vfn = _velocity_fn(cfg, length)
    k = np.arange(length)
    v = np.asarray(vfn(k), dtype=float)
    motion = MotionProfile(velocity_fn=vfn, c=cfg.c, fs=cfg.fs, fc=cfg.fc)
    seed = _trial_seed(cfg, algo_idx, snr_idx, 0)
    # Coherent reception: the carrier arrives rotated by -omega_c * tau0 and
    # the phase refinement relies on that rotation carrying range information.
    theta = cfg.theta - 2 * np.pi * cfg.fc / cfg.fs * cfg.tau
    stream = apply_channel_moving(tx, motion, theta=theta, alpha=cfg.alpha,
                                  snr_db=snr_db, seed=seed,
                                  tau0_samples=cfg.tau)[:length]

    # Effective delay at sample j: tau0 minus the accumulated target motion.
    tau_true = cfg.tau - np.concatenate(([0.0], np.cumsum(v / motion.c)[:-1]))

    estimates = reduced_complexity_pipeline(stream, spec, pcfg)[:cfg.trials]
    sample_m = cfg.c / cfg.fs
    records = []
    for trial_id, est in enumerate(estimates):
        i = est.diagnostics["window_index"]
        true_tau = float(tau_true[i])
        true_d = true_tau * sample_m
        records.append(TrialRecord(
            trial_id=trial_id, snr_db=snr_db, algorithm="reduced_dzc",
            true_tau=true_tau, tau_hat=est.tau_hat,
            true_d_m=true_d, d_hat_m=est.d_hat,
            error_mm=abs(est.d_hat - true_d) * 1e3))
    return records


def run_experiment(cfg: ExperimentConfig, workers: int = 1,
                   measure_runtime: bool = False) -> list[TrialRecord]:
    """Run all (algorithm, SNR, trial) combinations.

    ``workers`` > 1 executes window trials on a thread pool; the output list
    is ordered and seeded identically either way.  Runtime is recorded only
    when requested so that default outputs are byte-reproducible.
    """
    tasks = []
    for algo_idx, algorithm in enumerate(cfg.algorithms):
        for snr_idx in range(len(cfg.snr_grid)):
            if algorithm == "reduced_dzc":
                tasks.append((algo_idx, snr_idx, None))
            else:
                for trial_id in range(cfg.trials):
                    tasks.append((algo_idx, snr_idx, trial_id))

    def run_task(task):
        algo_idx, snr_idx, trial_id = task
        algorithm = cfg.algorithms[algo_idx]
        snr_db = float(cfg.snr_grid[snr_idx])
        t0 = perf_counter_ns() if measure_runtime else 0
        if trial_id is None:
            records = _pipeline_records(cfg, algo_idx, snr_idx)
        else:
            seed = _trial_seed(cfg, algo_idx, snr_idx, trial_id)
            true_tau, tau_hat, d_hat = _window_trial(cfg, algorithm, snr_db, seed)
            true_d = true_tau * cfg.c / cfg.fs
            records = [TrialRecord(
                trial_id=trial_id, snr_db=snr_db, algorithm=algorithm,
                true_tau=true_tau, tau_hat=tau_hat,
                true_d_m=true_d, d_hat_m=d_hat,
                error_mm=abs(d_hat - true_d) * 1e3)]
        if measure_runtime:
            dt = perf_counter_ns() - t0
            per = max(1, dt // max(1, len(records)))
            records = [replace(r, runtime_ns=int(per)) for r in records]
        return records

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_task, tasks))
    else:
        chunks = [run_task(t) for t in tasks]
    return [rec for chunk in chunks for rec in chunk]


# ---------------------------------------------------------------------------
# Metrics and CSV emission
# ---------------------------------------------------------------------------

def summarize(records, half_lambda_mm: float = 7.5) -> list[dict]:
    """Per (algorithm, SNR) row: MSE in samples^2 and mm^2, RMSE in mm, and
    the fraction of estimates with error below ``half_lambda_mm``."""
    records = list(records)
    if not records:
        raise ValueError("no records to summarize")
    keys = sorted({(r.algorithm, r.snr_db) for r in records},
                  key=lambda t: (t[0], t[1]))
    rows = []
    for algorithm, snr_db in keys:
        group = [r for r in records if r.algorithm == algorithm and r.snr_db == snr_db]
        tau_err = np.array([r.tau_hat - r.true_tau for r in group])
        err_mm = np.array([r.error_mm for r in group])
        rows.append({
            "algorithm": algorithm,
            "snr_db": snr_db,
            "mse_samples2": float(np.mean(tau_err ** 2)),
            "mse_mm2": float(np.mean(err_mm ** 2)),
            "rmse_mm": float(np.sqrt(np.mean(err_mm ** 2))),
            "p_within_halflambda": float(np.mean(err_mm < half_lambda_mm)),
        })
    return rows


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def records_to_csv(records) -> str:
    lines = [f"# dzc-ranging v{__version__}", CSV_HEADER]
    for r in records:
        lines.append(",".join(_fmt(v) for v in (
            r.trial_id, r.snr_db, r.algorithm, r.true_tau, r.tau_hat,
            r.true_d_m, r.d_hat_m, r.error_mm, r.runtime_ns)))
    return "\n".join(lines) + "\n"


def summary_to_csv(rows) -> str:
    lines = [f"# dzc-ranging v{__version__}", SUMMARY_HEADER]
    for row in rows:
        lines.append(",".join(_fmt(row[k]) for k in SUMMARY_HEADER.split(",")))
    return "\n".join(lines) + "\n"


def write_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records))


def write_summary_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(summary_to_csv(rows))


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from flat key=value pairs (strings allowed)."""
    m = dict(mapping)
    n = int(m.pop("n", 511))
    mm = int(m.pop("m", 1))
    kind = CodeKind(str(m.pop("kind", "dzc")).lower())
    kwargs = {"spec": SequenceSpec(n, mm, kind)}
    pipeline_keys = {}
    for key, value in m.items():
        if key in ("segment_length", "window_step", "candidate_window"):
            pipeline_keys[key] = int(value)
        elif key in ("snr_grid",):
            if isinstance(value, str):
                value = [float(s) for s in value.split(";") if s.strip()]
            kwargs[key] = tuple(float(v) for v in value)
        elif key in ("algorithms",):
            if isinstance(value, str):
                value = [s.strip() for s in value.split(";") if s.strip()]
            kwargs[key] = tuple(value)
        elif key in ("trials", "base_seed"):
            kwargs[key] = int(value)
        elif key in ("scenario",):
            kwargs[key] = str(value)
        else:
            kwargs[key] = float(value)
    if pipeline_keys:
        base = ExperimentConfig(**kwargs).pipeline_cfg()
        kwargs["pipeline"] = replace(base, **pipeline_keys)
    return ExperimentConfig(**kwargs)


def config_from_file(path) -> ExperimentConfig:
    """Parse a flat key=value config file; JSON is accepted as an alternate."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return config_from_mapping(json.loads(text))
    mapping = {}
    for line_no, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {line_no}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        mapping[key.strip()] = value.strip()
    return config_from_mapping(mapping)
