"""Ranging algorithms.

Three estimators operate on windows of the received complex envelope:

* a maximum-likelihood grid search over (delay, carrier offset) hypotheses,
  with the matched-filter metric that also defines the ambiguity map;
* the reduced-complexity pipeline: differential sliding correlation for the
  integer delay, Doppler estimation from the resulting range staircase,
  time-scale compensation, a minimum-refinement-variance search over shift
  candidates, and per-frequency-bin phase refinement down to sub-sample
  range resolution.

Delay hypotheses and estimates are expressed in samples; ranges in meters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import channel as chan
from .correlation import CorrelationResult, circular_xcorr
from .sequences import CodeKind, SequenceSpec, code_sequence, dzc_period, zc_sequence


class RefinementError(RuntimeError):
    """Raised when the phase refinement has no valid frequency bins."""


@dataclass(frozen=True)
class MlSearchConfig:
    tau_grid: np.ndarray | None = None      # defaults to all integer lags
    nu_center: float = 0.0
    nu_halfwidth: float | None = None       # defaults to M/2
    nu_step: float | None = None            # defaults to 1/(4N)
    delta_from_nu: bool = False             # couple the time-scale to nu via fs/fc
    fs: float = 192_000.0
    fc: float = 20_000.0
    c: float = 345.664


@dataclass(frozen=True)
class RangeEstimate:
    tau_hat: int
    nu_hat: float
    d_hat: float
    refinement_mm: float = 0.0
    metric: float = 0.0
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PipelineConfig:
    segment_length: int = 73
    window_step: int = 1
    candidate_window: int = 200
    valid_bin_ratio: float = 0.5
    fs: float = 192_000.0
    c: float = 345.664
    fc: float = 20_000.0
    # Trailing span of initial estimates used for the velocity fit and the
    # minimum span below which the target is assumed still static.
    doppler_lookback: int = 4096
    doppler_min_span: int = 256
    # Stream-level acquisition: total sample budget integrated incoherently
    # across code periods, and the per-period delay-drift hypothesis grid
    # (in samples per period) scanned during the integration.
    acquisition_samples: int = 16384
    acq_drift_max: float = 1.0
    acq_drift_step: float = 0.125
    # Single-window integer estimates further than this many samples from
    # the acquisition track are snapped to it before refinement.
    track_gate: int = 8
    # Cap on the number of windows refined (None = all).
    max_windows: int | None = None

    def __post_init__(self):
        if self.segment_length < 1 or self.window_step < 1:
            raise ValueError("segment_length and window_step must be positive")
        if not 0 < self.valid_bin_ratio <= 1:
            raise ValueError("valid_bin_ratio must be in (0, 1]")

    def sample_m(self) -> float:
        """Range covered by one sample period, in meters."""
        return self.c / self.fs


def _template_stream(spec: SequenceSpec) -> np.ndarray:
    """One full period of the transmitted code stream."""
    period = dzc_period(spec) if spec.kind is CodeKind.DZC else spec.n
    return code_sequence(spec, period)


# ---------------------------------------------------------------------------
# Maximum-likelihood grid search
# ---------------------------------------------------------------------------

def ml_metric(received: np.ndarray, spec: SequenceSpec, tau: float, nu: float,
              delta: float = 0.0) -> float:
    """|sum_k y[k] conj(x((1+delta)(k-tau))) exp(-2j pi nu k)|."""
    received = np.asarray(received, dtype=complex)
    n = spec.n
    if received.size != n:
        raise ValueError(f"received window must have length N={n}")
    stream = _template_stream(spec)
    k = np.arange(n)
    template = chan.interp_circular(stream, (1.0 + delta) * (k - tau))
    return float(np.abs(np.sum(received * np.conj(template) * np.exp(-2j * np.pi * nu * k))))


def _nu_grid(spec: SequenceSpec, cfg: MlSearchConfig) -> np.ndarray:
    halfwidth = cfg.nu_halfwidth if cfg.nu_halfwidth is not None else spec.m / 2.0
    step = cfg.nu_step if cfg.nu_step is not None else 1.0 / (4 * spec.n)
    if step <= 0 or halfwidth <= 0:
        raise ValueError("nu_step and nu_halfwidth must be positive")
    count = int(np.floor(2 * halfwidth / step)) + 1
    return cfg.nu_center - halfwidth + step * np.arange(count)


def ml_estimate(received: np.ndarray, spec: SequenceSpec,
                cfg: MlSearchConfig | None = None) -> RangeEstimate:
    """Exhaustive grid argmax of the matched-filter metric.

    Ties resolve to the smallest delay hypothesis, then the smallest carrier
    offset hypothesis.
    """
    cfg = cfg or MlSearchConfig()
    received = np.asarray(received, dtype=complex)
    n = spec.n
    if received.size != n:
        raise ValueError(f"received window must have length N={n}")
    taus = np.arange(n) if cfg.tau_grid is None else np.asarray(cfg.tau_grid)
    nus = _nu_grid(spec, cfg)
    if taus.size == 0 or nus.size == 0:
        raise ValueError("empty search grid")

    stream = _template_stream(spec)
    k = np.arange(n)
    rot = np.exp(-2j * np.pi * np.outer(nus, k))  # (n_nu, N)

    best = (-1.0, 0, 0.0)
    for tau in taus:
        if cfg.delta_from_nu:
            row = np.empty(nus.size)
            for j, nu in enumerate(nus):
                delta = nu * cfg.fs / cfg.fc
                row[j] = ml_metric(received, spec, int(tau), float(nu), delta)
        else:
            template = chan.interp_circular(stream, (k - float(tau)))
            z = received * np.conj(template)
            row = np.abs(rot @ z)
        j = int(np.argmax(row))
        if row[j] > best[0]:
            best = (float(row[j]), int(tau), float(nus[j]))

    metric, tau_hat, nu_hat = best
    return RangeEstimate(tau_hat=tau_hat, nu_hat=nu_hat,
                         d_hat=tau_hat * cfg.c / cfg.fs, metric=metric)


def ambiguity_map(spec: SequenceSpec, true_tau: int, true_nu: float,
                  tau_grid: np.ndarray, nu_grid: np.ndarray) -> np.ndarray:
    """Matrix of metric values over (tau, nu) hypotheses for a noiseless
    internally synthesized received window (row-major: tau outer)."""
    n = spec.n
    stream = _template_stream(spec)
    k = np.arange(n)
    received = chan.interp_circular(stream, k - float(true_tau)) \
        * np.exp(2j * np.pi * true_nu * k)
    rot = np.exp(-2j * np.pi * np.outer(np.asarray(nu_grid), k))
    out = np.empty((len(tau_grid), len(nu_grid)))
    for i, tau in enumerate(tau_grid):
        template = chan.interp_circular(stream, k - float(tau))
        out[i] = np.abs(rot @ (received * np.conj(template)))
    return out


# ---------------------------------------------------------------------------
# Reduced-complexity pipeline stages
# ---------------------------------------------------------------------------

def initial_tof_window(received_stream: np.ndarray, spec: SequenceSpec,
                       window_index: int, cfg: PipelineConfig | None = None,
                       m: int = 1) -> RangeEstimate:
    """Integer-delay estimate from one sliding window.

    Correlates the differential product of the window [i, i+N) against the
    i-shifted differential template (a circular shift of the step-m decode of
    the code), so the peak index is the absolute delay regardless of i.
    """
    cfg = cfg or PipelineConfig()
    received_stream = np.asarray(received_stream, dtype=complex)
    n = spec.n
    i = window_index
    if received_stream.size < i + n:
        raise ValueError("stream too short for the requested window")
    stop = min(i + n + m, received_stream.size)
    window = received_stream[i:stop]

    if spec.kind is CodeKind.DZC and m == 1:
        diff_template = zc_sequence(SequenceSpec(spec.n, spec.m, CodeKind.ZC))
    else:
        stream = _template_stream(spec)
        period = stream.size
        idx = (np.arange(n) % period)
        diff_template = stream[idx] * np.conj(stream[(idx + m) % period])
        diff_template = np.conj(diff_template)  # conj(x[k]) x[k+m]
    p = np.roll(diff_template, -i % n)

    if window.size >= n + m:
        q = window[:n] * np.conj(window[m:n + m])
    else:
        q = window[:n] * np.conj(np.roll(window[:n], -m))

    res = circular_xcorr(np.conj(p), q)
    tau_hat = res.peak_index
    return RangeEstimate(tau_hat=tau_hat, nu_hat=0.0,
                         d_hat=tau_hat * cfg.sample_m(),
                         metric=res.peak_magnitude,
                         diagnostics={"window_index": i})


def estimate_doppler(range_series, cfg: PipelineConfig | None = None) -> float:
    """Relative Doppler (range-rate over c) from initial range estimates.

    ``range_series`` is a list of (stream sample index, range in meters).
    The velocity is taken as the endpoints difference over the whole span,
    which keeps sample-quantized staircases from amplifying into the first
    differences.  Positive values mean the range is increasing.
    """
    cfg = cfg or PipelineConfig()
    series = list(range_series)
    if len(series) < 2:
        raise ValueError("need at least two range estimates")
    (i0, d0), (i1, d1) = series[0], series[-1]
    if i1 == i0:
        raise ValueError("series spans zero time")
    velocity = (d1 - d0) / ((i1 - i0) / cfg.fs)
    return velocity / cfg.c


def compensate_doppler(segment: np.ndarray, delta_hat: float,
                       cfg: PipelineConfig | None = None) -> np.ndarray:
    """Undo a fixed time scaling of (1 + delta_hat) and the matching carrier
    offset fc*delta_hat/fs (delta_hat > 0 = compressed waveform)."""
    cfg = cfg or PipelineConfig()
    if abs(delta_hat) >= 0.05:
        raise ValueError("|delta_hat| must be < 0.05")
    segment = np.asarray(segment, dtype=complex)
    if delta_hat == 0.0:
        return segment.copy()
    k = np.arange(segment.size)
    out = chan.interp_circular(segment, k / (1.0 + delta_hat))
    nu_hat = cfg.fc * delta_hat / cfg.fs
    return out * np.exp(-2j * np.pi * nu_hat * k)


def _refine_rows(y_window: np.ndarray, templates: np.ndarray,
                 cfg: PipelineConfig):
    """Refinement mean and variance for each template row.

    Per-bin phases ang(Z(w) Y*(w)) are divided by the physical (passband)
    frequency of the bin, carrier + envelope offset, because a physical delay
    rotates the carrier along with the envelope; this is what confines the
    refinement to half a carrier wavelength.  Templates must carry their own
    carrier reference phase (see :func:`_carrier_phase`).  With fc = 0 the
    division falls back to the envelope bin frequency and the DC/Nyquist
    bins are excluded instead.
    """
    n = y_window.size
    yf = np.fft.fft(y_window)
    zf = np.atleast_2d(np.fft.fft(templates, axis=-1))
    mag = np.abs(zf[0])
    valid = mag >= cfg.valid_bin_ratio * mag.max()
    omega_c = 2 * np.pi * cfg.fc / cfg.fs
    omega = omega_c + 2 * np.pi * np.fft.fftfreq(n)
    if omega_c > 0:
        valid &= np.abs(omega) >= 0.5 * omega_c
    else:
        valid[0] = False
        if n % 2 == 0:
            valid[n // 2] = False
    if not np.any(valid):
        raise RefinementError("no valid frequency bins above the threshold")
    phases = np.angle(zf[:, valid] * np.conj(yf[valid]))
    dd = (phases / omega[valid]) * cfg.sample_m()
    # Inverse-noise-variance bin weights: per-bin phase noise scales as
    # 1/|Z_m| and the division by omega_m amplifies it by 1/omega_m, so
    # |Z_m * omega_m|^2 weighting equalizes the bins' noise contributions.
    weights = (mag[valid] * omega[valid]) ** 2
    weights = weights / weights.sum()
    means = dd @ weights
    variances = ((dd - means[:, None]) ** 2) @ weights
    return means, variances


def _carrier_phase(tau, cfg: PipelineConfig):
    """Carrier reference exp(-i*omega_c*tau) for a delay candidate.

    A target at delay tau rotates the received carrier by -omega_c*tau; the
    matching template must carry the same reference so that only the residual
    (sub-candidate) delay appears in the cross-spectrum phases.
    """
    return np.exp(-2j * np.pi * cfg.fc / cfg.fs * np.asarray(tau, dtype=float))


def phase_refine(received_comp: np.ndarray, spec: SequenceSpec, tau_hat: int,
                 cfg: PipelineConfig | None = None,
                 template: np.ndarray | None = None) -> float:
    """Sub-sample range refinement (meters) from per-bin phase slopes.

    The template is the code circularly shifted by ``tau_hat`` unless an
    explicit stream-aligned template is supplied.
    """
    cfg = cfg or PipelineConfig()
    received_comp = np.asarray(received_comp, dtype=complex)[:spec.n]
    if template is None:
        template = np.roll(code_sequence(spec), tau_hat) * _carrier_phase(tau_hat, cfg)
    means, _ = _refine_rows(received_comp, template, cfg)
    return float(means[0])


def min_variance_search(received_comp: np.ndarray, spec: SequenceSpec,
                        tau_hat: int, cfg: PipelineConfig | None = None,
                        templates: np.ndarray | None = None,
                        offsets: np.ndarray | None = None):
    """Pick the shift candidate whose per-bin refinements agree best.

    Returns (corrected_tau, refinement_m).  Candidates are circular shifts
    centered on ``tau_hat``; ties resolve to the offset closest to zero and
    then to the smaller shift.
    """
    cfg = cfg or PipelineConfig()
    received_comp = np.asarray(received_comp, dtype=complex)[:spec.n]
    n = spec.n
    if offsets is None:
        w = min(cfg.candidate_window, n)
        offsets = np.arange(-(w // 2), w - w // 2)
    if templates is None:
        code = code_sequence(spec)
        templates = np.stack([np.roll(code, int(tau_hat + s)) for s in offsets])
        templates *= _carrier_phase(tau_hat + offsets, cfg)[:, None]
    means, variances = _refine_rows(received_comp, templates, cfg)
    order = np.lexsort((offsets, np.abs(offsets), variances))
    best = order[0]
    return int(tau_hat + offsets[best]), float(means[best])


def acquire_track(stream: np.ndarray, spec: SequenceSpec,
                  cfg: PipelineConfig | None = None) -> tuple[int, float]:
    """Robust stream-level delay acquisition.

    A single window at very low SNR does not carry enough energy for a
    reliable correlation peak (the differential products square the noise),
    so the correlation magnitudes of consecutive code periods are combined
    incoherently, with the peak allowed to drift linearly across periods.
    Scans a small grid of per-period drift hypotheses and returns
    ``(tau at stream start, delay drift in samples per stream sample)``.
    """
    cfg = cfg or PipelineConfig()
    stream = np.asarray(stream, dtype=complex)
    n = spec.n
    if stream.size < n:
        raise ValueError("stream shorter than one code period")

    looks = max(1, min(cfg.acquisition_samples // n, (stream.size - 1) // n))
    x = code_sequence(spec, n + 1)
    p = np.conj(x[:n]) * x[1:]
    tf = np.conj(np.fft.fft(np.conj(p)))  # r = sum_k p[k] q[k+lag]

    drifts = np.arange(-cfg.acq_drift_max, cfg.acq_drift_max + cfg.acq_drift_step / 2,
                       cfg.acq_drift_step)
    k = np.arange(n + 1)
    best = (-np.inf, 0, 0.0)
    for d in drifts:
        # A delay drifting by d per period means the received stream is
        # time-scaled by s = 1 - d/n.  Resampling each look at rate 1/s puts
        # it back on the code's sample grid, where the consecutive-sample
        # products match the integer-sample decode template; warping the
        # template instead would not match the band-limited resampling the
        # channel applies to this full-band chirp.
        s = 1.0 - d / n
        shifts = np.rint(d * np.arange(looks)).astype(int)
        acc = np.zeros(n)
        for j in range(looks):
            z = chan.interp_circular(stream, j * n + k / s)
            q = z[:n] * np.conj(z[1:])
            r = np.fft.ifft(tf * np.fft.fft(q))
            acc += np.roll(np.abs(r) ** 2, -shifts[j])
        lag = int(np.argmax(acc))
        if acc[lag] > best[0]:
            best = (float(acc[lag]), lag, float(d))
    _, tau0, d_star = best
    return tau0, d_star / n


# ---------------------------------------------------------------------------
# End-to-end pipeline
# ---------------------------------------------------------------------------

def reduced_complexity_pipeline(stream: np.ndarray, spec: SequenceSpec,
                                cfg: PipelineConfig | None = None) -> list[RangeEstimate]:
    """Run the full reduced-complexity chain over a received stream.

    Produces one estimate per sliding window (step ``cfg.window_step``):
    integer delay from differential correlation, per-segment Doppler
    estimate and compensation, minimum-variance shift correction and phase
    refinement.  A window whose refinement fails falls back to its integer
    estimate with a diagnostic flag.
    """
    cfg = cfg or PipelineConfig()
    if spec.kind is not CodeKind.DZC:
        raise ValueError("the reduced-complexity pipeline requires a DZC spec")
    stream = np.asarray(stream, dtype=complex)
    n = spec.n
    starts = np.arange(0, stream.size - n, cfg.window_step)
    if cfg.max_windows is not None:
        starts = starts[:cfg.max_windows]
    if starts.size == 0:
        raise ValueError("stream shorter than one window")

    sample_m = cfg.sample_m()
    tx = _template_stream(spec)
    period = tx.size
    zc = zc_sequence(SequenceSpec(spec.n, spec.m, CodeKind.ZC))

    # Pass 1: integer delays for every window.
    initial = np.empty(starts.size, dtype=int)
    peak_mags = np.empty(starts.size)
    for w, i in enumerate(starts):
        stop = min(i + n + 1, stream.size)
        window = stream[i:stop]
        p = np.roll(zc, -(i % n))
        if window.size >= n + 1:
            q = window[:n] * np.conj(window[1:n + 1])
        else:
            q = window[:n] * np.conj(np.roll(window[:n], -1))
        res = circular_xcorr(np.conj(p), q)
        initial[w] = res.peak_index
        peak_mags[w] = res.peak_magnitude

    # Acquisition track over the whole stream; windows whose single-frame
    # estimate falls outside the candidate window around the track are
    # snapped to it (the search stage recovers the exact delay from there).
    tau_acq, drift = acquire_track(stream, spec, cfg)
    gate = min(cfg.track_gate, n // 2)
    predicted = np.rint(tau_acq + drift * starts).astype(int)
    dist = (initial - predicted) % n
    dist = np.minimum(dist, n - dist)
    gated = dist > gate
    initial = np.where(gated, predicted % n, initial)

    initial_d = initial * sample_m

    # The acquisition track localizes the delay to within the gate (plus a
    # small acquisition bias), so the per-window candidate search only needs
    # to cover that neighbourhood; a wider search re-admits sidelobes of the
    # variance statistic at low SNR.
    w_half = min(cfg.candidate_window // 2, cfg.track_gate + 4, n // 2)
    offsets = np.arange(-w_half, w_half + 1)
    k = np.arange(n)

    estimates: list[RangeEstimate] = []
    for seg_start in range(0, starts.size, cfg.segment_length):
        seg = slice(seg_start, min(seg_start + cfg.segment_length, starts.size))
        seg_end = seg.stop

        # Doppler over the trailing lookback of initial estimates; medians at
        # both ends keep single-window outliers from polluting the slope.
        # When the single-frame estimates are mostly gated (low SNR) the
        # staircase is just the acquisition track, so use its drift directly.
        lb_start = max(0, seg_end - cfg.doppler_lookback)
        if np.mean(gated[lb_start:seg_end]) > 0.1:
            delta_range = drift
        elif seg_end - lb_start < cfg.doppler_min_span:
            delta_range = 0.0
        else:
            edge = max(1, min(64, (seg_end - lb_start) // 8))
            d0 = float(np.median(initial_d[lb_start:lb_start + edge]))
            d1 = float(np.median(initial_d[seg_end - edge:seg_end]))
            i0 = float(np.mean(starts[lb_start:lb_start + edge]))
            i1 = float(np.mean(starts[seg_end - edge:seg_end]))
            delta_range = estimate_doppler([(i0, d0), (i1, d1)], cfg)
        delta_ch = -delta_range  # channel compresses when the range shrinks
        if abs(delta_ch) >= 0.05:
            delta_ch = 0.0

        for w in range(seg.start, seg.stop):
            i = int(starts[w])
            tau0 = int(initial[w])
            window = stream[i:i + n]
            comp = compensate_doppler(window, delta_ch, cfg)

            diag = {"window_index": i, "tau_initial": tau0,
                    "delta_hat": delta_ch, "gated": bool(gated[w]),
                    "fallback": False}
            try:
                cand_idx = ((i + k[None, :] - (tau0 + offsets)[:, None]) % period)
                templates = tx[cand_idx] * _carrier_phase(tau0 + offsets, cfg)[:, None]
                means, variances = _refine_rows(comp, templates, cfg)
                order = np.lexsort((offsets, np.abs(offsets), variances))
                best = order[0]
                tau_corr = tau0 + int(offsets[best])
                refinement = float(means[best])
                d_hat = tau_corr * sample_m + refinement
            except RefinementError:
                tau_corr = tau0
                refinement = 0.0
                d_hat = tau0 * sample_m
                diag["fallback"] = True

            estimates.append(RangeEstimate(
                tau_hat=tau_corr,
                nu_hat=cfg.fc * delta_ch / cfg.fs,
                d_hat=d_hat,
                refinement_mm=refinement * 1e3,
                metric=float(peak_mags[w]),
                diagnostics=diag,
            ))
    return estimates
