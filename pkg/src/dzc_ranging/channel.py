"""Synthetic baseband channel: delay, Doppler, phase, attenuation, AWGN.

The input sequence is treated as one period of a periodic transmission, so
all sample positions are interpolated circularly (mod len(x)).  Band-limited
interpolation uses a Kaiser-windowed sinc kernel; positions that land exactly
on a sample grid point short-circuit to the stored sample so that identity
channels are exact.

Sign conventions (positive velocity = target approaching):
    delta = v / c            relative Doppler, compresses the waveform
    nu    = fc * v / (c*fs)  carrier offset in cycles per sample
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

DEFAULT_KAISER_BETA = 8.6
DEFAULT_HALF_WIDTH = 32

_INTEGER_SNAP = 1e-12
_DELTA_GUARD = 0.05


@dataclass(frozen=True)
class ChannelSpec:
    """Fixed-Doppler channel parameters for one received window."""

    tau_samples: float = 0.0
    delta: float = 0.0
    nu: float = 0.0
    theta: float = 0.0
    alpha: float = 1.0
    snr_db: float = np.inf
    seed: int = 0

    def __post_init__(self):
        if self.tau_samples < 0:
            raise ValueError("tau_samples must be >= 0")
        if abs(self.delta) >= _DELTA_GUARD:
            raise ValueError(f"|delta| must be < {_DELTA_GUARD} (sound-speed regime)")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")


@dataclass(frozen=True)
class MotionProfile:
    """Target motion for the time-varying channel.

    ``velocity_fn`` maps sample index -> radial velocity in m/s, positive
    toward the receiver.
    """

    velocity_fn: Callable[[np.ndarray], np.ndarray]
    c: float = 345.664
    fs: float = 192_000.0
    fc: float = 20_000.0

    def __post_init__(self):
        if self.c <= 0 or self.fs <= 0 or self.fc <= 0:
            raise ValueError("c, fs and fc must be positive")


def _kaiser_sinc(offsets: np.ndarray, half_width: int, beta: float) -> np.ndarray:
    """Windowed-sinc kernel evaluated at fractional tap offsets."""
    u = offsets / half_width
    w = np.zeros_like(offsets)
    inside = np.abs(u) <= 1.0
    w[inside] = np.i0(beta * np.sqrt(1.0 - u[inside] ** 2)) / np.i0(beta)
    return np.sinc(offsets) * w


def interp_circular(x: np.ndarray, positions: np.ndarray,
                    half_width: int = DEFAULT_HALF_WIDTH,
                    beta: float = DEFAULT_KAISER_BETA) -> np.ndarray:
    """Band-limited interpolation of x at real-valued positions, mod len(x)."""
    x = np.asarray(x)
    n = x.size
    positions = np.asarray(positions, dtype=float) % n
    out = np.empty(positions.shape, dtype=complex)

    # Positions on the sample grid are read back exactly.
    nearest = np.round(positions)
    on_grid = np.abs(positions - nearest) < _INTEGER_SNAP
    out[on_grid] = x[nearest[on_grid].astype(int) % n]

    off = ~on_grid
    if np.any(off):
        p = positions[off]
        k0 = np.floor(p).astype(int)
        taps = np.arange(-half_width + 1, half_width + 1)
        idx = (k0[:, None] + taps[None, :]) % n
        offs = p[:, None] - (k0[:, None] + taps[None, :])
        kern = _kaiser_sinc(offs, half_width, beta)
        out[off] = np.sum(x[idx] * kern, axis=1)
    return out


def resample(x: np.ndarray, ratio: float,
             half_width: int = DEFAULT_HALF_WIDTH) -> np.ndarray:
    """Evaluate x at positions k/ratio; output length floor(len(x) * ratio)."""
    if not 0.95 < ratio < 1.05:
        raise ValueError(f"resample ratio {ratio} outside guard band (0.95, 1.05)")
    x = np.asarray(x)
    n_out = int(np.floor(x.size * ratio))
    positions = np.arange(n_out) / ratio
    return interp_circular(x, positions, half_width=half_width)


def add_awgn(x: np.ndarray, snr_db: float, seed: int = 0) -> np.ndarray:
    """Add circular complex Gaussian noise at the requested per-sample SNR."""
    x = np.asarray(x, dtype=complex)
    if x.size == 0:
        raise ValueError("input must be non-empty")
    if np.isinf(snr_db):
        return x.copy()
    power = np.mean(np.abs(x) ** 2)
    sigma2 = power / 10.0 ** (snr_db / 10.0)
    rng = np.random.Generator(np.random.Philox(key=seed))
    noise = rng.normal(scale=np.sqrt(sigma2 / 2), size=(x.size, 2))
    return x + noise[:, 0] + 1j * noise[:, 1]


def apply_channel_fixed(x: np.ndarray, spec: ChannelSpec) -> np.ndarray:
    """Fixed-Doppler received envelope.

    out[k] = alpha * x((1+delta)(k - tau)) * exp(i(theta + 2*pi*nu*k)) + n[k]
    with x interpolated circularly.
    """
    x = np.asarray(x, dtype=complex)
    k = np.arange(x.size)
    positions = (1.0 + spec.delta) * (k - spec.tau_samples)
    y = interp_circular(x, positions)
    y *= spec.alpha * np.exp(1j * (spec.theta + 2 * np.pi * spec.nu * k))
    return add_awgn(y, spec.snr_db, spec.seed)


def apply_channel_moving(x: np.ndarray, motion: MotionProfile,
                         theta: float = 0.0, alpha: float = 1.0,
                         snr_db: float = np.inf, seed: int = 0,
                         tau0_samples: float = 0.0) -> np.ndarray:
    """Time-varying channel: per-sample warp with rate 1 + v(k)/c.

    The transmitted-time position advances by (1 + v[k]/c) per received
    sample and the carrier phase by 2*pi*fc*v[k]/(c*fs).
    """
    x = np.asarray(x, dtype=complex)
    k = np.arange(x.size)
    v = np.asarray(motion.velocity_fn(k), dtype=float)
    if v.shape == ():
        v = np.full(x.size, float(v))
    if np.any(np.abs(v) >= _DELTA_GUARD * motion.c):
        raise ValueError("|velocity| must stay below 0.05 * c")

    rate = 1.0 + v / motion.c
    positions = np.concatenate(([0.0], np.cumsum(rate)[:-1])) - tau0_samples
    nu = motion.fc * v / (motion.c * motion.fs)
    phase = theta + 2 * np.pi * np.concatenate(([0.0], np.cumsum(nu)[:-1]))

    y = interp_circular(x, positions) * alpha * np.exp(1j * phase)
    return add_awgn(y, snr_db, seed)
